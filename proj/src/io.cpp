#include "dlr/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "dlr/error.hpp"

namespace dlr {

namespace {

// this code assumes a little-endian host, as the formats are LE on disk
template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is, const std::string& what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InputError("truncated file while reading " + what);
  return v;
}

void put_magic(std::ostream& os, const char magic[5]) { os.write(magic, 4); }

void check_magic(std::istream& is, const char magic[5], const std::string& path) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw InputError(path + ": bad magic, expected " + magic);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open: " + path);
  return is;
}

}  // namespace

void write_capture(const std::string& path, const IqCapture& capture) {
  std::ofstream os = open_out(path);
  put_magic(os, "DLRC");
  put<uint32_t>(os, 1);
  put<double>(os, capture.sample_rate_hz);
  put<double>(os, capture.center_freq_hz);
  put<uint64_t>(os, capture.samples.size());
  for (const auto& z : capture.samples) {
    put<float>(os, z.real());
    put<float>(os, z.imag());
  }
  if (!os) throw InputError("write failed: " + path);
}

IqCapture read_capture(const std::string& path) {
  std::ifstream is = open_in(path);
  check_magic(is, "DLRC", path);
  const auto version = take<uint32_t>(is, "version");
  if (version != 1) throw InputError(path + ": unsupported DLRC version");
  IqCapture cap;
  cap.sample_rate_hz = take<double>(is, "sample_rate_hz");
  cap.center_freq_hz = take<double>(is, "center_freq_hz");
  const auto count = take<uint64_t>(is, "count");
  cap.samples.resize(count);
  for (auto& z : cap.samples) {
    const float i = take<float>(is, "sample");
    const float q = take<float>(is, "sample");
    z = {i, q};
  }
  return cap;
}

void write_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream os = open_out(path);
  put_magic(os, "DLRD");
  put<uint32_t>(os, 1);
  put<uint32_t>(os, static_cast<uint32_t>(dataset.length));
  put<uint64_t>(os, dataset.points.size());
  put<uint16_t>(os, static_cast<uint16_t>(dataset.num_classes));
  for (const auto& dp : dataset.points) {
    if (static_cast<int>(dp.values.size()) != dataset.length)
      throw InputError("datapoint length differs from dataset header");
    for (double v : dp.values) put<float>(os, static_cast<float>(v));
    put<uint16_t>(os, static_cast<uint16_t>(dp.label < 0 ? 0 : dp.label));
  }
  if (!os) throw InputError("write failed: " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream is = open_in(path);
  check_magic(is, "DLRD", path);
  const auto version = take<uint32_t>(is, "version");
  if (version != 1) throw InputError(path + ": unsupported DLRD version");
  Dataset ds;
  ds.length = static_cast<int>(take<uint32_t>(is, "L"));
  const auto count = take<uint64_t>(is, "count");
  ds.num_classes = take<uint16_t>(is, "Q");
  ds.points.resize(count);
  for (auto& dp : ds.points) {
    dp.values.resize(static_cast<size_t>(ds.length));
    for (double& v : dp.values) v = take<float>(is, "value");
    dp.label = take<uint16_t>(is, "label");
  }
  return ds;
}

void write_weights(const std::string& path, const WeightsArtifact& weights) {
  std::ofstream os = open_out(path);
  put_magic(os, "DLRW");
  put<uint32_t>(os, 1);
  put<uint32_t>(os, static_cast<uint32_t>(weights.w.rows));
  put<uint32_t>(os, static_cast<uint32_t>(weights.w.cols));
  put<double>(os, weights.lambda);
  put<uint64_t>(os, weights.config_fingerprint);
  for (double v : weights.w.data) put<double>(os, v);
  if (!os) throw InputError("write failed: " + path);
}

WeightsArtifact read_weights(const std::string& path) {
  std::ifstream is = open_in(path);
  check_magic(is, "DLRW", path);
  const auto version = take<uint32_t>(is, "version");
  if (version != 1) throw InputError(path + ": unsupported DLRW version");
  WeightsArtifact wa;
  const auto n = take<uint32_t>(is, "N");
  const auto q = take<uint32_t>(is, "Q");
  wa.lambda = take<double>(is, "lambda");
  wa.config_fingerprint = take<uint64_t>(is, "fingerprint");
  wa.w = Matrix(n, q);
  for (double& v : wa.w.data) v = take<double>(is, "weight");
  return wa;
}

KvConfig KvConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_string(ss.str());
}

KvConfig KvConfig::from_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) +
                                      ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

bool KvConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KvConfig::get(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "inf") return std::numeric_limits<double>::infinity();
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': not a number: " + it->second);
  }
}

int KvConfig::get(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': not an integer: " + it->second);
  }
}

uint64_t KvConfig::get(const std::string& key, uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw InputError("config key '" + key + "': not an unsigned integer: " +
                     it->second);
  }
}

bool KvConfig::get(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config key '" + key + "': not a boolean: " + v);
}

void KvConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void KvReport::add(const std::string& key, const std::string& value) {
  lines.emplace_back(key, value);
}

void KvReport::add(const std::string& key, double value) {
  std::ostringstream ss;
  ss.precision(17);
  ss << value;
  lines.emplace_back(key, ss.str());
}

void KvReport::add(const std::string& key, uint64_t value) {
  lines.emplace_back(key, std::to_string(value));
}

void KvReport::add(const std::string& key, int value) {
  lines.emplace_back(key, std::to_string(value));
}

std::string KvReport::to_string() const {
  std::string out;
  for (const auto& [k, v] : lines) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

void KvReport::write(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << to_string();
  if (!os) throw InputError("write failed: " + path);
}

uint64_t config_fingerprint(const ReservoirConfig& config,
                            const std::string& normalization,
                            bool raw_features) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "n=" << config.n_nodes << ";nu=" << config.input_gain
     << ";eta=" << config.feedback_gain << ";nl="
     << (config.nonlinearity == Nonlinearity::SinSquared ? "sin2" : "tanh")
     << ";f=" << config.filter_taps << ";t=" << config.filter_time_constant
     << ";acc=" << config.accumulate_prior_state << ";split=" << config.split
     << ";layers=" << config.layers << ";n2=" << config.layer2_n_nodes
     << ";seed=" << config.seed << ";norm=" << normalization
     << ";raw=" << raw_features;
  const std::string s = ss.str();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h = (h ^ c) * 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dlr
