#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dlr/matrix.hpp"
#include "dlr/reservoir.hpp"
#include "dlr/signal.hpp"
#include "dlr/synth.hpp"

namespace dlr {

// Binary formats, all little-endian:
//   DLRC capture: "DLRC", u32 version, f64 sample_rate_hz, f64
//     center_freq_hz, u64 count, then count interleaved (I, Q) f32 pairs.
//   DLRD dataset: "DLRD", u32 version, u32 L, u64 count, u16 Q, then per
//     datapoint L f32 values followed by a u16 label.
//   DLRW weights: "DLRW", u32 version, u32 N, u32 Q, f64 lambda, u64
//     config fingerprint, then N*Q row-major f64.

void write_capture(const std::string& path, const IqCapture& capture);
IqCapture read_capture(const std::string& path);

void write_dataset(const std::string& path, const Dataset& dataset);
Dataset read_dataset(const std::string& path);

struct WeightsArtifact {
  Matrix w;  // N x Q
  double lambda = 0.0;
  uint64_t config_fingerprint = 0;
};

void write_weights(const std::string& path, const WeightsArtifact& weights);
WeightsArtifact read_weights(const std::string& path);

// Flat key = value text; '#' starts a comment, blank lines ignored.
class KvConfig {
 public:
  KvConfig() = default;
  static KvConfig from_file(const std::string& path);
  static KvConfig from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  int get(const std::string& key, int fallback) const;
  uint64_t get(const std::string& key, uint64_t fallback) const;
  bool get(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Ordered key = value report writer for machine-readable output.
struct KvReport {
  std::vector<std::pair<std::string, std::string>> lines;
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, uint64_t value);
  void add(const std::string& key, int value);
  std::string to_string() const;
  void write(const std::string& path) const;
};

// FNV-1a over the canonical config string; identifies the reservoir
// configuration a weights artifact was trained under.
uint64_t config_fingerprint(const ReservoirConfig& config,
                            const std::string& normalization, bool raw_features);

}  // namespace dlr
