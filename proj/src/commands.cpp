#include "dlr/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dlr/error.hpp"
#include "dlr/parallel.hpp"
#include "dlr/rng.hpp"

namespace fs = std::filesystem;

namespace dlr {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

double parse_double_token(const std::string& token, const std::string& what) {
  try {
    size_t pos = 0;
    double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad " + what + " value: " + token);
  }
}

std::vector<double> parse_list(const KvConfig& cfg, const std::string& key,
                               const std::string& fallback) {
  std::string text = cfg.get(key, fallback);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    size_t a = token.find_first_not_of(" \t");
    size_t b = token.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    out.push_back(parse_double_token(token.substr(a, b - a + 1), key));
  }
  if (out.empty()) throw InputError("empty list for " + key);
  return out;
}

std::string nonlinearity_name(Nonlinearity nl) {
  return nl == Nonlinearity::Tanh ? "tanh" : "sin_squared";
}

void echo_settings(std::ostream& os, const RunSettings& s) {
  const ReservoirConfig& r = s.reservoir;
  os << "  n_nodes " << r.n_nodes << "  input_gain " << r.input_gain
     << "  feedback_gain " << r.feedback_gain << "  nonlinearity "
     << nonlinearity_name(r.nonlinearity) << "\n"
     << "  filter_taps " << r.filter_taps << "  filter_time_constant "
     << r.filter_time_constant << "  accumulate "
     << (r.accumulate_prior_state ? 1 : 0) << "  split " << (r.split ? 1 : 0)
     << "  layers " << r.layers;
  if (r.layers > 1) os << "  layer2_n_nodes " << r.layer2_n_nodes;
  os << "\n  seed " << r.seed << "  normalization " << s.normalization
     << "  raw_features " << (s.raw_features ? 1 : 0) << "  lambda "
     << (s.lambda_auto ? std::string("auto") : std::to_string(s.lambda_fixed))
     << "\n";
}

void add_settings(KvReport& rep, const RunSettings& s) {
  const ReservoirConfig& r = s.reservoir;
  rep.add("n_nodes", r.n_nodes);
  rep.add("input_gain", r.input_gain);
  rep.add("feedback_gain", r.feedback_gain);
  rep.add("nonlinearity", nonlinearity_name(r.nonlinearity));
  rep.add("filter_taps", r.filter_taps);
  rep.add("filter_time_constant", r.filter_time_constant);
  rep.add("accumulate_prior_state", r.accumulate_prior_state ? 1 : 0);
  rep.add("split", r.split ? 1 : 0);
  rep.add("layers", r.layers);
  rep.add("layer2_n_nodes", r.layer2_n_nodes);
  rep.add("seed", r.seed);
  rep.add("normalization", s.normalization);
  rep.add("raw_features", s.raw_features ? 1 : 0);
  rep.add("train_fraction", s.train_fraction);
}

void add_eval(KvReport& rep, const EvalReport& ev) {
  rep.add("lambda", ev.lambda);
  rep.add("n_train", ev.n_train);
  rep.add("n_test", ev.n_test);
  rep.add("accuracy", ev.accuracy);
  rep.add("confusion", format_confusion(ev.confusion, ev.num_classes));
}

void print_eval(std::ostream& os, const EvalReport& ev) {
  os << std::left << std::setw(18) << "  train points" << ev.n_train << "\n"
     << std::setw(18) << "  test points" << ev.n_test << "\n"
     << std::setw(18) << "  lambda" << ev.lambda << "\n" << std::setw(18)
     << "  accuracy" << std::fixed << std::setprecision(2)
     << 100.0 * ev.accuracy << " %" << std::defaultfloat
     << std::setprecision(6) << "\n";
  if (ev.num_classes <= 12 && ev.n_test > 0) {
    os << "  confusion (rows = true class):\n";
    for (int r = 0; r < ev.num_classes; ++r) {
      os << "   ";
      for (int c = 0; c < ev.num_classes; ++c)
        os << std::setw(5) << ev.confusion[r * ev.num_classes + c];
      os << "\n";
    }
  }
}

EvalReport evaluate(const Matrix& x, const std::vector<int>& labels,
                    const ReadoutWeights& w, int num_classes) {
  EvalReport ev;
  ev.num_classes = num_classes;
  ev.confusion.assign((size_t)num_classes * num_classes, 0);
  ev.lambda = w.lambda;
  size_t correct = 0;
  std::vector<double> state(x.cols);
  for (size_t r = 0; r < x.rows; ++r) {
    std::copy(x.row(r), x.row(r) + x.cols, state.begin());
    Prediction p = infer(state, w);
    ev.confusion[(size_t)labels[r] * num_classes + p.label]++;
    if (p.label == labels[r]) correct++;
  }
  ev.n_test = (int)x.rows;
  ev.accuracy = x.rows ? (double)correct / (double)x.rows : 0.0;
  return ev;
}

std::vector<std::pair<int, IqCapture>> read_capture_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir);
  std::vector<std::pair<int, std::string>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("capture_", 0) != 0) continue;
    if (entry.path().extension() != ".dlrc") continue;
    std::string digits = name.substr(8, name.size() - 8 - 5);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos)
      continue;
    files.emplace_back(std::stoi(digits), entry.path().string());
  }
  if (files.empty())
    throw InputError("no capture_<label>.dlrc files in " + dir);
  std::sort(files.begin(), files.end());
  std::vector<std::pair<int, IqCapture>> out;
  out.reserve(files.size());
  for (const auto& [label, path] : files)
    out.emplace_back(label, read_capture(path));
  return out;
}

struct ExtractedBursts {
  std::vector<Burst> bursts;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::string> notes;
};

ExtractedBursts extract_all(const std::vector<std::pair<int, IqCapture>>& captures,
                            const ExtractionParams& p,
                            const CorruptionSpec* corruption) {
  ExtractedBursts out;
  for (const auto& [label, capture] : captures) {
    auto edges = detect_bursts(capture, p.detect);
    size_t kept = 0;
    for (size_t e = 0; e < edges.size(); ++e) {
      Burst b;
      try {
        b = extract_datapoint(capture, edges[e], p.k, p.pre_roll);
      } catch (const InputError&) {
        out.notes.push_back("capture " + std::to_string(label) + ": edge " +
                            std::to_string(e) + " too close to the boundary");
        continue;
      }
      if (corruption) {
        uint64_t idx = ((uint64_t)label << 20) + e;
        b = corrupt(b, *corruption, capture.sample_rate_hz, idx);
      }
      out.bursts.push_back(std::move(b));
      out.labels.push_back(label);
      kept++;
    }
    out.notes.push_back("capture " + std::to_string(label) + ": " +
                        std::to_string(kept) + " bursts");
    out.num_classes = std::max(out.num_classes, label + 1);
  }
  return out;
}

Dataset bursts_to_dataset(const ExtractedBursts& eb, const ExtractionParams& p) {
  Dataset ds;
  ds.num_classes = eb.num_classes;
  ds.length = p.sub_end - p.sub_start;
  ds.points.reserve(eb.bursts.size());
  for (size_t i = 0; i < eb.bursts.size(); ++i) {
    Datapoint dp = magnitude(sub_burst(eb.bursts[i], p.sub_start, p.sub_end));
    dp.label = eb.labels[i];
    ds.points.push_back(std::move(dp));
  }
  return ds;
}

int extract_like(const CommandContext& ctx, const std::string& in_dir,
                 const std::string& out_path, bool with_corruption) {
  KvConfig cfg = ctx.load_config();
  ExtractionParams p = parse_extraction(cfg);
  std::optional<CorruptionSpec> corr;
  if (with_corruption) {
    corr = parse_corruption(cfg).value_or(CorruptionSpec{});
    if (ctx.seed) corr->seed = *ctx.seed;
  }
  auto captures = read_capture_dir(in_dir);
  ExtractedBursts eb = extract_all(captures, p, corr ? &*corr : nullptr);
  if (eb.bursts.empty()) throw InputError("no bursts extracted from " + in_dir);
  Dataset ds = bursts_to_dataset(eb, p);
  write_dataset(out_path, ds);
  if (!ctx.quiet) {
    for (const auto& n : eb.notes) std::cout << "  " << n << "\n";
    std::cout << (with_corruption ? "corrupt: " : "extract: ")
              << ds.points.size() << " datapoints, L=" << ds.length << ", Q="
              << ds.num_classes << " -> " << out_path << "\n";
  }
  return 0;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir);
}

}  // namespace

KvConfig CommandContext::load_config() const {
  if (config_path.empty()) return KvConfig();
  return KvConfig::from_file(config_path);
}

RunSettings parse_run_settings(const KvConfig& cfg) {
  RunSettings s;
  ReservoirConfig& r = s.reservoir;
  r.n_nodes = cfg.get("n_nodes", r.n_nodes);
  r.input_gain = cfg.get("input_gain", r.input_gain);
  r.feedback_gain = cfg.get("feedback_gain", r.feedback_gain);
  std::string nl = cfg.get("nonlinearity", std::string("sin_squared"));
  if (nl == "sin_squared")
    r.nonlinearity = Nonlinearity::SinSquared;
  else if (nl == "tanh")
    r.nonlinearity = Nonlinearity::Tanh;
  else
    throw InputError("unknown nonlinearity: " + nl);
  r.filter_taps = cfg.get("filter_taps", r.filter_taps);
  r.filter_time_constant = cfg.get("filter_time_constant", r.filter_time_constant);
  r.accumulate_prior_state = cfg.get("accumulate_prior_state", false);
  r.split = cfg.get("split", false);
  r.layers = cfg.get("layers", 1);
  r.layer2_n_nodes = cfg.get("layer2_n_nodes", r.n_nodes);
  r.seed = cfg.get("seed", (uint64_t)1);
  s.normalization = cfg.get("normalization", std::string("global"));
  if (s.normalization != "global" && s.normalization != "per_datapoint" &&
      s.normalization != "none")
    throw InputError("unknown normalization: " + s.normalization);
  s.raw_features = cfg.get("raw_features", false);
  s.train_fraction = cfg.get("train_fraction", 0.8);
  if (!(s.train_fraction > 0.0 && s.train_fraction <= 1.0))
    throw InputError("train_fraction must be in (0, 1]");
  std::string lam = cfg.get("lambda", std::string("auto"));
  if (lam == "auto") {
    s.lambda_auto = true;
  } else {
    s.lambda_auto = false;
    s.lambda_fixed = parse_double_token(lam, "lambda");
    if (s.lambda_fixed < 0) throw InputError("lambda must be >= 0");
  }
  s.lambda_grid = parse_list(cfg, "lambda_grid", "1e-8,1e-6,1e-4,1e-2,1,1e2");
  return s;
}

uint64_t settings_fingerprint(const RunSettings& s) {
  return config_fingerprint(s.reservoir, s.normalization, s.raw_features);
}

TrainSplit stratified_split(const std::vector<Datapoint>& points, int num_classes,
                            double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw InputError("train_fraction must be in (0, 1]");
  std::vector<std::vector<size_t>> per_class(num_classes);
  for (size_t i = 0; i < points.size(); ++i) {
    int label = points[i].label;
    if (label < 0 || label >= num_classes)
      throw InputError("datapoint " + std::to_string(i) +
                       " has label outside [0, num_classes)");
    per_class[label].push_back(i);
  }
  CounterRng base = CounterRng(seed).derive("train-split");
  TrainSplit out;
  for (int c = 0; c < num_classes; ++c) {
    auto& idx = per_class[c];
    if (idx.empty())
      throw InputError("class " + std::to_string(c) + " absent from dataset");
    CounterRng rng = base.derive((uint64_t)c);
    for (size_t j = idx.size() - 1; j > 0; --j)
      std::swap(idx[j], idx[rng.below(j + 1)]);
    size_t n_train = (size_t)std::floor(train_fraction * (double)idx.size());
    if (n_train == 0)
      throw InputError("class " + std::to_string(c) +
                       " absent from the train part of the split");
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + n_train);
    out.test.insert(out.test.end(), idx.begin() + n_train, idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

double apply_normalization(std::vector<Datapoint>& points,
                           const std::string& mode) {
  if (mode == "none" || points.empty()) return 0.0;
  if (mode == "global") return normalize_global(points) ? 1.0 : 0.0;
  if (mode == "per_datapoint") {
    size_t done = 0;
    for (auto& p : points)
      if (normalize(p)) done++;
    return (double)done / (double)points.size();
  }
  throw InputError("unknown normalization: " + mode);
}

Matrix feature_matrix(const std::vector<Datapoint>& points,
                      const std::vector<size_t>& idx, const RunSettings& s,
                      const LoopMasks& masks, const FilterKernel& filter) {
  if (s.raw_features) {
    size_t cols = idx.empty() ? 0 : points[idx[0]].values.size();
    Matrix x(idx.size(), cols);
    for (size_t r = 0; r < idx.size(); ++r) {
      const auto& v = points[idx[r]].values;
      if (v.size() != cols) throw InputError("datapoint length mismatch");
      std::copy(v.begin(), v.end(), x.row(r));
    }
    return x;
  }
  std::vector<std::vector<double>> sub;
  sub.reserve(idx.size());
  for (size_t i : idx) sub.push_back(points[i].values);
  return collect_states(sub, s.reservoir, masks, filter);
}

TrainOutcome run_train(const Dataset& ds, const RunSettings& s) {
  if (ds.points.empty()) throw InputError("dataset is empty");
  if (ds.num_classes < 2) throw InputError("dataset needs at least 2 classes");
  for (const auto& p : ds.points)
    if ((int)p.values.size() != ds.length)
      throw InputError("datapoint length disagrees with the dataset header");
  s.reservoir.validate();

  if (!s.raw_features && s.warnings) {
    int per_loop = s.reservoir.split ? (ds.length + 1) / 2 : ds.length;
    int state_dim = s.reservoir.layers > 1 ? s.reservoir.layer2_n_nodes
                                           : s.reservoir.n_nodes;
    if (state_dim <= per_loop)
      std::cerr << "warning: n_nodes " << state_dim
                << " <= datapoint length " << per_loop
                << "; consider more virtual nodes\n";
  }

  std::vector<Datapoint> points = ds.points;
  apply_normalization(points, s.normalization);

  TrainSplit split =
      stratified_split(points, ds.num_classes, s.train_fraction, s.reservoir.seed);

  LoopMasks masks = make_loop_masks(s.reservoir);
  FilterKernel filter =
      make_filter(s.reservoir.filter_taps, s.reservoir.filter_time_constant);

  StateMatrix train_states;
  train_states.x = feature_matrix(points, split.train, s, masks, filter);
  train_states.labels.reserve(split.train.size());
  for (size_t i : split.train) train_states.labels.push_back(points[i].label);

  double lambda = s.lambda_fixed;
  if (s.lambda_auto)
    lambda = select_lambda(train_states, ds.num_classes, s.lambda_grid,
                           s.reservoir.seed);
  ReadoutWeights weights = ridge_train(train_states, ds.num_classes, lambda);

  TrainOutcome out;
  out.train_indices = split.train;
  out.test_indices = split.test;
  if (!split.test.empty()) {
    Matrix test_x = feature_matrix(points, split.test, s, masks, filter);
    std::vector<int> test_labels;
    test_labels.reserve(split.test.size());
    for (size_t i : split.test) test_labels.push_back(points[i].label);
    out.report = evaluate(test_x, test_labels, weights, ds.num_classes);
  } else {
    out.report.num_classes = ds.num_classes;
    out.report.confusion.assign((size_t)ds.num_classes * ds.num_classes, 0);
    out.report.lambda = lambda;
  }
  out.report.n_train = (int)split.train.size();
  out.report.lambda = lambda;
  out.report.seed = s.reservoir.seed;
  out.weights.w = std::move(weights.w);
  out.weights.lambda = lambda;
  out.weights.config_fingerprint = settings_fingerprint(s);
  return out;
}

EvalReport run_infer(const Dataset& ds, const RunSettings& s,
                     const WeightsArtifact& w) {
  if (settings_fingerprint(s) != w.config_fingerprint)
    throw ContractError("weights were trained under a different config "
                        "(fingerprint mismatch)");
  size_t state_dim;
  if (s.raw_features)
    state_dim = (size_t)ds.length;
  else
    state_dim = (size_t)(s.reservoir.layers > 1 ? s.reservoir.layer2_n_nodes
                                                : s.reservoir.n_nodes);
  if (w.w.rows != state_dim)
    throw ContractError("weights expect state dimension " +
                        std::to_string(w.w.rows) + ", config produces " +
                        std::to_string(state_dim));
  for (const auto& p : ds.points)
    if ((int)p.values.size() != ds.length)
      throw InputError("datapoint length disagrees with the dataset header");

  std::vector<Datapoint> points = ds.points;
  apply_normalization(points, s.normalization);
  std::vector<size_t> idx(points.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  LoopMasks masks = make_loop_masks(s.reservoir);
  FilterKernel filter =
      make_filter(s.reservoir.filter_taps, s.reservoir.filter_time_constant);
  Matrix x = feature_matrix(points, idx, s, masks, filter);
  std::vector<int> labels;
  labels.reserve(points.size());
  for (const auto& p : points) labels.push_back(p.label);
  ReadoutWeights rw{w.w, w.lambda};
  EvalReport ev = evaluate(x, labels, rw, ds.num_classes);
  ev.seed = s.reservoir.seed;
  return ev;
}

std::string format_confusion(const std::vector<int>& confusion,
                             int num_classes) {
  std::ostringstream os;
  for (int r = 0; r < num_classes; ++r) {
    if (r) os << ";";
    for (int c = 0; c < num_classes; ++c) {
      if (c) os << " ";
      os << confusion[(size_t)r * num_classes + c];
    }
  }
  return os.str();
}

SynthSpec parse_synth_spec(const KvConfig& cfg) {
  SynthSpec spec;
  spec.num_devices = cfg.get("num_devices", spec.num_devices);
  spec.bursts_per_device = cfg.get("bursts_per_device", spec.bursts_per_device);
  std::string payload = cfg.get("payload", std::string("fixed_preamble"));
  if (payload == "fixed_preamble")
    spec.payload = PayloadMode::FixedPreamble;
  else if (payload == "random_payload")
    spec.payload = PayloadMode::RandomPayload;
  else
    throw InputError("unknown payload mode: " + payload);
  spec.seed = cfg.get("seed", spec.seed);
  spec.sample_rate_hz = cfg.get("sample_rate_hz", spec.sample_rate_hz);
  spec.burst_len = cfg.get("burst_len", spec.burst_len);
  ImpairmentRanges& g = spec.ranges;
  g.a1_lo = cfg.get("a1_lo", g.a1_lo);
  g.a1_hi = cfg.get("a1_hi", g.a1_hi);
  g.cfo_hz = cfg.get("cfo_range_hz", g.cfo_hz);
  g.imb_db = cfg.get("imb_range_db", g.imb_db);
  g.skew_rad = cfg.get("skew_range_rad", g.skew_rad);
  g.a3_lo = cfg.get("a3_lo", g.a3_lo);
  g.a3_hi = cfg.get("a3_hi", g.a3_hi);
  g.a5_lo = cfg.get("a5_lo", g.a5_lo);
  g.a5_hi = cfg.get("a5_hi", g.a5_hi);
  g.ramp_lo = cfg.get("ramp_lo", g.ramp_lo);
  g.ramp_hi = cfg.get("ramp_hi", g.ramp_hi);
  g.min_separation = cfg.get("min_separation", g.min_separation);
  spec.noise_floor_amplitude =
      cfg.get("noise_floor_amplitude", spec.noise_floor_amplitude);
  spec.gap_min = cfg.get("gap_min", spec.gap_min);
  spec.gap_max = cfg.get("gap_max", spec.gap_max);
  spec.timing_jitter_samples =
      cfg.get("timing_jitter_samples", spec.timing_jitter_samples);
  spec.level_jitter_db = cfg.get("level_jitter_db", spec.level_jitter_db);
  if (spec.num_devices < 2) throw InputError("num_devices must be >= 2");
  if (spec.bursts_per_device < 1)
    throw InputError("bursts_per_device must be >= 1");
  return spec;
}

std::optional<CorruptionSpec> parse_corruption(const KvConfig& cfg) {
  if (!cfg.get("corrupt", false) && !cfg.has("snr_db_min") &&
      !cfg.has("snr_db_max") && !cfg.has("jitter_max_hz"))
    return std::nullopt;
  CorruptionSpec c;
  c.jitter_max_hz = cfg.get("jitter_max_hz", c.jitter_max_hz);
  c.snr_db_min = cfg.get("snr_db_min", c.snr_db_min);
  c.snr_db_max = cfg.get("snr_db_max", c.snr_db_max);
  c.seed = cfg.get("corrupt_seed", cfg.get("seed", c.seed));
  if (c.snr_db_min > c.snr_db_max)
    throw InputError("snr_db_min exceeds snr_db_max");
  return c;
}

ExtractionParams parse_extraction(const KvConfig& cfg) {
  ExtractionParams p;
  p.k = cfg.get("extract_k", p.k);
  p.pre_roll = cfg.get("pre_roll", p.pre_roll);
  p.sub_start = cfg.get("sub_start", p.sub_start);
  p.sub_end = cfg.get("sub_end", p.sub_end);
  p.detect.window = cfg.get("detect_window", p.detect.window);
  p.detect.threshold_factor =
      cfg.get("detect_threshold_factor", p.detect.threshold_factor);
  p.detect.floor_window = cfg.get("detect_floor_window", p.detect.floor_window);
  p.detect.merge_radius = cfg.get("detect_merge_radius", p.detect.merge_radius);
  if (p.sub_start < 0 || p.sub_end <= p.sub_start || p.sub_end > p.k)
    throw InputError("sub-burst window must satisfy 0 <= start < end <= k");
  return p;
}

MackeyGlassSpec parse_mackey_spec(const KvConfig& cfg) {
  MackeyGlassSpec m;
  m.beta = cfg.get("mg_beta", m.beta);
  m.gamma = cfg.get("mg_gamma", m.gamma);
  m.exponent = cfg.get("mg_exponent", m.exponent);
  m.delay_tau = cfg.get("mg_tau", m.delay_tau);
  m.step = cfg.get("mg_step", m.step);
  m.length = cfg.get("mg_length", 2800);
  m.transient_steps = cfg.get("mg_transient", m.transient_steps);
  return m;
}

int cmd_train(const CommandContext& ctx, const std::string& dataset_path) {
  set_worker_threads(ctx.threads);
  KvConfig cfg = ctx.load_config();
  RunSettings s = parse_run_settings(cfg);
  if (ctx.seed) s.reservoir.seed = *ctx.seed;
  s.warnings = !ctx.quiet;

  double t0 = now_seconds();
  Dataset ds = read_dataset(dataset_path);
  TrainOutcome out = run_train(ds, s);
  double t1 = now_seconds();

  ensure_out_dir(ctx.out_dir);
  std::string weights_path = join(ctx.out_dir, "weights.dlrw");
  write_weights(weights_path, out.weights);

  KvReport rep;
  rep.add("command", "train");
  rep.add("dataset", dataset_path);
  rep.add("n_points", (int)ds.points.size());
  rep.add("length", ds.length);
  rep.add("num_classes", ds.num_classes);
  add_settings(rep, s);
  rep.add("config_fingerprint", out.weights.config_fingerprint);
  add_eval(rep, out.report);
  std::string report_path = join(ctx.out_dir, "train_report.kv");
  rep.write(report_path);

  if (!ctx.quiet) {
    std::cout << "train " << dataset_path << " (" << ds.points.size()
              << " points, L=" << ds.length << ", Q=" << ds.num_classes
              << ")\n";
    echo_settings(std::cout, s);
    print_eval(std::cout, out.report);
    std::cout << "  weights -> " << weights_path << "\n  report  -> "
              << report_path << "\n  wall time " << std::fixed
              << std::setprecision(2) << (t1 - t0) << " s\n"
              << std::defaultfloat << std::setprecision(6);
  }
  return 0;
}

int cmd_infer(const CommandContext& ctx, const std::string& dataset_path,
              const std::string& weights_path) {
  set_worker_threads(ctx.threads);
  KvConfig cfg = ctx.load_config();
  RunSettings s = parse_run_settings(cfg);
  if (ctx.seed) s.reservoir.seed = *ctx.seed;
  s.warnings = !ctx.quiet;

  Dataset ds = read_dataset(dataset_path);
  WeightsArtifact w = read_weights(weights_path);
  EvalReport ev = run_infer(ds, s, w);

  ensure_out_dir(ctx.out_dir);
  KvReport rep;
  rep.add("command", "infer");
  rep.add("dataset", dataset_path);
  rep.add("weights", weights_path);
  rep.add("num_classes", ds.num_classes);
  add_settings(rep, s);
  rep.add("config_fingerprint", w.config_fingerprint);
  add_eval(rep, ev);
  std::string report_path = join(ctx.out_dir, "infer_report.kv");
  rep.write(report_path);

  if (!ctx.quiet) {
    std::cout << "infer " << dataset_path << " with " << weights_path << "\n";
    print_eval(std::cout, ev);
    std::cout << "  report -> " << report_path << "\n";
  }
  return 0;
}

namespace {

struct SweepCell {
  RunSettings settings;
  double accuracy = 0.0;
  double lambda_used = 0.0;
};

std::string cell_desc(const RunSettings& s) {
  std::ostringstream os;
  os << "nu=" << s.reservoir.input_gain << " eta=" << s.reservoir.feedback_gain
     << " N=" << s.reservoir.n_nodes << " F=" << s.reservoir.filter_taps
     << " lambda=" << s.lambda_fixed << " split=" << (s.reservoir.split ? 1 : 0)
     << " layers=" << s.reservoir.layers;
  return os.str();
}

Dataset reduce_per_class(const Dataset& ds, int cap) {
  Dataset out;
  out.length = ds.length;
  out.num_classes = ds.num_classes;
  std::vector<int> taken(ds.num_classes, 0);
  for (const auto& p : ds.points) {
    if (p.label < 0 || p.label >= ds.num_classes) continue;
    if (taken[p.label] >= cap) continue;
    out.points.push_back(p);
    taken[p.label]++;
  }
  return out;
}

}  // namespace

int cmd_sweep(const CommandContext& ctx, const std::string& dataset_path) {
  set_worker_threads(ctx.threads);
  KvConfig cfg = ctx.load_config();
  RunSettings base = parse_run_settings(cfg);
  if (ctx.seed) base.reservoir.seed = *ctx.seed;
  base.warnings = false;
  base.lambda_auto = false;

  auto nus = parse_list(cfg, "sweep_input_gain", "0.3,0.6");
  auto etas = parse_list(cfg, "sweep_feedback_gain", "0.3,0.6");
  auto ns = parse_list(cfg, "sweep_n_nodes", "300");
  auto fsz = parse_list(cfg, "sweep_filter_taps", "5");
  auto lambdas = parse_list(cfg, "sweep_lambda", "1e-4,1e-2");
  auto splits = parse_list(cfg, "sweep_split", "0");
  auto layers = parse_list(cfg, "sweep_layers", "1");
  int train_cap = cfg.get("sweep_train_per_class", 40);
  int test_cap = cfg.get("sweep_test_per_class", 20);
  if (train_cap < 1 || test_cap < 1)
    throw InputError("sweep per-class budgets must be >= 1");

  Dataset full = read_dataset(dataset_path);
  Dataset ds = reduce_per_class(full, train_cap + test_cap);

  std::vector<SweepCell> cells;
  for (double nu : nus)
    for (double eta : etas)
      for (double n : ns)
        for (double f : fsz)
          for (double lam : lambdas)
            for (double sp : splits)
              for (double ly : layers) {
                SweepCell cell;
                cell.settings = base;
                cell.settings.reservoir.input_gain = nu;
                cell.settings.reservoir.feedback_gain = eta;
                cell.settings.reservoir.n_nodes = (int)n;
                cell.settings.reservoir.layer2_n_nodes = (int)n;
                cell.settings.reservoir.filter_taps = (int)f;
                cell.settings.lambda_fixed = lam;
                cell.settings.reservoir.split = sp != 0.0;
                cell.settings.reservoir.layers = (int)ly;
                cell.settings.train_fraction =
                    (double)train_cap / (double)(train_cap + test_cap);
                cells.push_back(std::move(cell));
              }
  if (cells.empty()) throw InputError("empty sweep grid");

  for (auto& cell : cells) {
    TrainOutcome out = run_train(ds, cell.settings);
    cell.accuracy = out.report.accuracy;
    cell.lambda_used = out.report.lambda;
  }

  auto key = [](const SweepCell& c) {
    const ReservoirConfig& r = c.settings.reservoir;
    return std::make_tuple(-c.accuracy, r.input_gain, r.feedback_gain,
                           r.n_nodes, r.filter_taps, c.settings.lambda_fixed,
                           r.split ? 1 : 0, r.layers);
  };
  std::sort(cells.begin(), cells.end(),
            [&](const SweepCell& a, const SweepCell& b) { return key(a) < key(b); });

  ensure_out_dir(ctx.out_dir);
  KvReport rep;
  rep.add("command", "sweep");
  rep.add("dataset", dataset_path);
  rep.add("cells", (int)cells.size());
  rep.add("train_per_class", train_cap);
  rep.add("test_per_class", test_cap);
  rep.add("seed", base.reservoir.seed);
  for (size_t i = 0; i < cells.size(); ++i) {
    std::ostringstream line;
    line << cell_desc(cells[i].settings) << " accuracy="
         << std::setprecision(17) << cells[i].accuracy;
    rep.add("rank_" + std::to_string(i), line.str());
  }
  const RunSettings& best = cells.front().settings;
  rep.add("best_input_gain", best.reservoir.input_gain);
  rep.add("best_feedback_gain", best.reservoir.feedback_gain);
  rep.add("best_n_nodes", best.reservoir.n_nodes);
  rep.add("best_filter_taps", best.reservoir.filter_taps);
  rep.add("best_lambda", best.lambda_fixed);
  rep.add("best_split", best.reservoir.split ? 1 : 0);
  rep.add("best_layers", best.reservoir.layers);
  rep.add("best_accuracy", cells.front().accuracy);
  std::string report_path = join(ctx.out_dir, "sweep_report.kv");
  rep.write(report_path);

  if (!ctx.quiet) {
    std::cout << "sweep " << dataset_path << " (" << cells.size()
              << " cells, " << train_cap << "+" << test_cap
              << " per class)\n";
    for (size_t i = 0; i < cells.size(); ++i)
      std::cout << "  " << std::setw(3) << i + 1 << ". " << std::fixed
                << std::setprecision(2) << 100.0 * cells[i].accuracy << " %  "
                << std::defaultfloat << std::setprecision(6)
                << cell_desc(cells[i].settings) << "\n";
    std::cout << "  report -> " << report_path << "\n";
  }
  return 0;
}

SynthDatasetResult calibrated_gen_dataset(SynthSpec spec,
                                          const CorruptionSpec* corruption,
                                          const ExtractionParams& extraction,
                                          const CalibrationOptions& opts,
                                          std::vector<std::string>* log) {
  RunSettings raw;
  raw.raw_features = true;
  raw.lambda_auto = false;
  raw.lambda_fixed = opts.eval_lambda;
  raw.normalization = "global";
  raw.train_fraction = 0.8;
  raw.warnings = false;
  raw.reservoir.seed = spec.seed;

  auto note = [&](const std::string& line) {
    if (log) log->push_back(line);
  };

  SynthDatasetResult result;
  int max_rounds = opts.enabled ? opts.max_rounds : 1;
  for (int round = 0; round < max_rounds; ++round) {
    result = gen_dataset(spec, corruption, extraction);
    if (!opts.enabled) break;
    double acc = run_train(result.dataset, raw).report.accuracy;
    std::ostringstream line;
    line << "round " << round << ": raw-linear accuracy " << std::fixed
         << std::setprecision(4) << acc << " (band " << opts.band_lo << ".."
         << opts.band_hi << ")";
    note(line.str());
    if (acc >= opts.band_lo && acc <= opts.band_hi) break;
    if (round + 1 == max_rounds) {
      note("calibration did not converge; keeping the last draw");
      break;
    }
    ImpairmentRanges& g = spec.ranges;
    auto scale_span = [](double& lo, double& hi, double factor) {
      double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * factor;
      lo = mid - half;
      hi = mid + half;
    };
    if (acc > opts.band_hi) {
      scale_span(g.a1_lo, g.a1_hi, 0.75);
      scale_span(g.a3_lo, g.a3_hi, 0.75);
      scale_span(g.a5_lo, g.a5_hi, 0.75);
      g.imb_db *= 0.75;
      g.skew_rad *= 0.75;
      double ramp_mid = 0.5 * (g.ramp_lo + g.ramp_hi);
      g.ramp_lo = (int)(ramp_mid - 0.75 * (ramp_mid - g.ramp_lo));
      g.ramp_hi = (int)(ramp_mid + 0.75 * (g.ramp_hi - ramp_mid));
      g.min_separation *= 0.75;
      note("shrank impairment spans by 0.75");
    } else {
      scale_span(g.a1_lo, g.a1_hi, 1.25);
      g.a1_lo = std::max(g.a1_lo, 0.8);
      g.a1_hi = std::min(g.a1_hi, 1.2);
      scale_span(g.a3_lo, g.a3_hi, 1.25);
      g.a3_lo = std::max(g.a3_lo, -0.12);
      g.a3_hi = std::min(g.a3_hi, -0.01);
      scale_span(g.a5_lo, g.a5_hi, 1.25);
      g.a5_lo = std::max(g.a5_lo, -0.025);
      g.a5_hi = std::min(g.a5_hi, -0.002);
      g.imb_db = std::min(g.imb_db * 1.25, 2.0);
      g.skew_rad = std::min(g.skew_rad * 1.25, 0.1);
      note("widened impairment spans by 1.25");
    }
  }
  return result;
}

int cmd_synth(const CommandContext& ctx) {
  set_worker_threads(ctx.threads);
  KvConfig cfg = ctx.load_config();
  SynthSpec spec = parse_synth_spec(cfg);
  if (ctx.seed) spec.seed = *ctx.seed;
  ExtractionParams extraction = parse_extraction(cfg);
  std::optional<CorruptionSpec> corruption = parse_corruption(cfg);
  if (corruption && !cfg.has("corrupt_seed")) corruption->seed = spec.seed;

  CalibrationOptions opts;
  opts.enabled = cfg.get("calibrate", spec.num_devices >= 10);
  opts.band_lo = cfg.get("calibrate_lo", opts.band_lo);
  opts.band_hi = cfg.get("calibrate_hi", opts.band_hi);
  opts.max_rounds = cfg.get("calibrate_rounds", opts.max_rounds);

  std::vector<std::string> calibration_log;
  SynthDatasetResult result = calibrated_gen_dataset(
      spec, corruption ? &*corruption : nullptr, extraction, opts,
      &calibration_log);

  ensure_out_dir(ctx.out_dir);
  for (size_t d = 0; d < result.captures.size(); ++d)
    write_capture(join(ctx.out_dir, "capture_" + std::to_string(d) + ".dlrc"),
                  result.captures[d]);
  std::string dataset_path = join(ctx.out_dir, "dataset.dlrd");
  write_dataset(dataset_path, result.dataset);

  std::ofstream manifest(join(ctx.out_dir, "manifest.txt"));
  manifest << "seed " << spec.seed << "\n"
           << "num_devices " << spec.num_devices << "\n"
           << "bursts_per_device " << spec.bursts_per_device << "\n"
           << "payload "
           << (spec.payload == PayloadMode::FixedPreamble ? "fixed_preamble"
                                                          : "random_payload")
           << "\n"
           << "burst_len " << spec.burst_len << "\n"
           << "sample_rate_hz " << spec.sample_rate_hz << "\n"
           << "datapoints " << result.dataset.points.size() << "\n"
           << "datapoint_length " << result.dataset.length << "\n";
  if (corruption)
    manifest << "corruption jitter_max_hz " << corruption->jitter_max_hz
             << " snr_db " << corruption->snr_db_min << ".."
             << corruption->snr_db_max << "\n";
  for (const auto& e : result.emitters)
    manifest << "device " << e.device_id << " cfo_hz " << e.cfo_hz
             << " imb_db " << e.iq_gain_imbalance_db << " skew_rad "
             << e.iq_phase_skew_rad << " a1 " << e.pa_a1 << " a3 " << e.pa_a3
             << " a5 " << e.pa_a5 << " ramp " << e.ramp_samples << "\n";
  for (const auto& line : calibration_log) manifest << line << "\n";
  for (const auto& note : result.notes) manifest << "note " << note << "\n";
  manifest.close();

  if (!ctx.quiet) {
    std::cout << "synth: " << result.dataset.points.size() << " datapoints, L="
              << result.dataset.length << ", Q=" << result.dataset.num_classes
              << " -> " << dataset_path << "\n";
    for (const auto& line : calibration_log) std::cout << "  " << line << "\n";
    if (!result.notes.empty())
      std::cout << "  " << result.notes.size() << " extraction notes (see manifest)\n";
  }
  return 0;
}

int cmd_corrupt(const CommandContext& ctx, const std::string& in_dir,
                const std::string& out_path) {
  set_worker_threads(ctx.threads);
  return extract_like(ctx, in_dir, out_path, true);
}

int cmd_extract(const CommandContext& ctx, const std::string& in_dir,
                const std::string& out_path) {
  set_worker_threads(ctx.threads);
  return extract_like(ctx, in_dir, out_path, false);
}

int cmd_saliency(const CommandContext& ctx, const std::string& in_dir) {
  set_worker_threads(ctx.threads);
  KvConfig cfg = ctx.load_config();
  ExtractionParams p = parse_extraction(cfg);
  int step = cfg.get("saliency_step", 128);
  int min_window = cfg.get("saliency_min_window", 128);
  int per_class = cfg.get("saliency_per_class", 50);
  if (step < 1 || min_window < step)
    throw InputError("saliency needs step >= 1 and min_window >= step");

  RunSettings quick = parse_run_settings(cfg);
  quick.reservoir.n_nodes = cfg.get("saliency_n_nodes", 150);
  quick.reservoir.layers = 1;
  quick.reservoir.split = false;
  quick.lambda_auto = false;
  quick.lambda_fixed = cfg.get("saliency_lambda", 1e-4);
  quick.warnings = false;
  if (ctx.seed) quick.reservoir.seed = *ctx.seed;

  auto captures = read_capture_dir(in_dir);
  ExtractedBursts eb = extract_all(captures, p, nullptr);
  if (eb.bursts.empty()) throw InputError("no bursts extracted from " + in_dir);

  std::vector<Burst> bursts;
  std::vector<int> labels;
  std::vector<int> taken(eb.num_classes, 0);
  for (size_t i = 0; i < eb.bursts.size(); ++i) {
    if (taken[eb.labels[i]] >= per_class) continue;
    bursts.push_back(eb.bursts[i]);
    labels.push_back(eb.labels[i]);
    taken[eb.labels[i]]++;
  }

  int num_classes = eb.num_classes;
  TrainEvalFn train_fn = [&](const std::vector<Datapoint>& dps, int q) {
    Dataset ds;
    ds.num_classes = q;
    ds.length = (int)dps.front().values.size();
    ds.points = dps;
    return run_train(ds, quick).report.accuracy;
  };
  SaliencyMap map = saliency_sweep(bursts, labels, step, train_fn, min_window);

  ensure_out_dir(ctx.out_dir);
  KvReport rep;
  rep.add("command", "saliency");
  rep.add("input", in_dir);
  rep.add("num_classes", num_classes);
  rep.add("bursts", (int)bursts.size());
  rep.add("step", step);
  rep.add("min_window", min_window);
  rep.add("n_nodes", quick.reservoir.n_nodes);
  rep.add("lambda", quick.lambda_fixed);
  rep.add("seed", quick.reservoir.seed);
  for (const auto& cell : map.cells) {
    std::ostringstream key;
    key << "cell_" << cell.start << "_" << cell.end;
    rep.add(key.str(), cell.accuracy);
  }
  rep.add("best_start", map.best.start);
  rep.add("best_end", map.best.end);
  rep.add("best_accuracy", map.best.accuracy);
  std::string report_path = join(ctx.out_dir, "saliency_report.kv");
  rep.write(report_path);

  if (!ctx.quiet) {
    std::cout << "saliency over " << bursts.size() << " bursts, step " << step
              << "\n";
    for (const auto& cell : map.cells)
      std::cout << "  [" << std::setw(4) << cell.start << ", " << std::setw(4)
                << cell.end << ")  " << std::fixed << std::setprecision(2)
                << 100.0 * cell.accuracy << " %\n"
                << std::defaultfloat << std::setprecision(6);
    std::cout << "  best [" << map.best.start << ", " << map.best.end << ") at "
              << std::fixed << std::setprecision(2) << 100.0 * map.best.accuracy
              << " %\n" << std::defaultfloat << std::setprecision(6)
              << "  report -> " << report_path << "\n";
  }
  return 0;
}

namespace {

struct MackeyRun {
  double nrmse = 0.0;
  double nrmse_persistence = 0.0;
};

MackeyRun mackey_run(const std::vector<double>& series, int window, int n_train,
                     int n_test, const RunSettings& s, double lambda) {
  int needed = window + n_train + n_test;
  if ((int)series.size() < needed + 1)
    throw InputError("series shorter than window + train + test + 1");
  double peak = 0.0;
  for (double v : series) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0) peak = 1.0;

  std::vector<std::vector<double>> windows;
  std::vector<double> targets;
  windows.reserve(n_train + n_test);
  for (int i = 0; i < n_train + n_test; ++i) {
    int j = window - 1 + i;
    std::vector<double> w(series.begin() + (j - window + 1),
                          series.begin() + j + 1);
    for (double& v : w) v /= peak;
    windows.push_back(std::move(w));
    targets.push_back(series[j + 1]);
  }

  LoopMasks masks = make_loop_masks(s.reservoir);
  FilterKernel filter =
      make_filter(s.reservoir.filter_taps, s.reservoir.filter_time_constant);
  std::vector<std::vector<double>> train_w(windows.begin(),
                                           windows.begin() + n_train);
  Matrix x_train = collect_states(train_w, s.reservoir, masks, filter);
  Matrix y(n_train, 1);
  for (int i = 0; i < n_train; ++i) y(i, 0) = targets[i];
  Matrix w = ridge_solve(x_train, y, lambda);

  std::vector<std::vector<double>> test_w(windows.begin() + n_train,
                                          windows.end());
  Matrix x_test = collect_states(test_w, s.reservoir, masks, filter);

  double mean = 0.0;
  for (int i = 0; i < n_test; ++i) mean += targets[n_train + i];
  mean /= n_test;
  double var = 0.0, err = 0.0, err_persist = 0.0;
  for (int i = 0; i < n_test; ++i) {
    double truth = targets[n_train + i];
    double pred = 0.0;
    for (size_t c = 0; c < x_test.cols; ++c) pred += x_test(i, c) * w(c, 0);
    double last = test_w[i].back() * peak;  // persistence: x(t+1) = x(t)
    err += (pred - truth) * (pred - truth);
    err_persist += (last - truth) * (last - truth);
    var += (truth - mean) * (truth - mean);
  }
  MackeyRun out;
  if (var == 0.0) {
    out.nrmse = err == 0.0 ? 0.0 : INFINITY;
    out.nrmse_persistence = err_persist == 0.0 ? 0.0 : INFINITY;
  } else {
    out.nrmse = std::sqrt(err / var);
    out.nrmse_persistence = std::sqrt(err_persist / var);
  }
  return out;
}

}  // namespace

int cmd_mackey(const CommandContext& ctx) {
  set_worker_threads(ctx.threads);
  KvConfig cfg = ctx.load_config();
  MackeyGlassSpec mg = parse_mackey_spec(cfg);
  int window = cfg.get("mg_window", 200);
  int n_train = cfg.get("mg_train", 2000);
  int n_test = cfg.get("mg_test", 500);
  double lambda = cfg.get("mg_lambda", 1e-8);
  if (window < 1 || n_train < 2 || n_test < 1)
    throw InputError("mackey needs window >= 1, train >= 2, test >= 1");

  RunSettings s = parse_run_settings(cfg);
  s.reservoir.n_nodes = cfg.get("mg_n_nodes", 400);
  s.reservoir.layer2_n_nodes = cfg.get("mg_layer2_n_nodes", s.reservoir.n_nodes);
  if (ctx.seed) s.reservoir.seed = *ctx.seed;
  s.reservoir.validate();

  std::vector<double> series = gen_mackey_glass(mg);
  MackeyRun one = mackey_run(series, window, n_train, n_test, s, lambda);

  bool compare = cfg.get("mg_compare_layers", false);
  MackeyRun two;
  if (compare) {
    RunSettings s2 = s;
    s2.reservoir.layers = 2;
    two = mackey_run(series, window, n_train, n_test, s2, lambda);
  }

  ensure_out_dir(ctx.out_dir);
  KvReport rep;
  rep.add("command", "mackey");
  rep.add("beta", mg.beta);
  rep.add("gamma", mg.gamma);
  rep.add("exponent", mg.exponent);
  rep.add("tau", mg.delay_tau);
  rep.add("step", mg.step);
  rep.add("length", mg.length);
  rep.add("transient", mg.transient_steps);
  rep.add("window", window);
  rep.add("n_train", n_train);
  rep.add("n_test", n_test);
  rep.add("n_nodes", s.reservoir.n_nodes);
  rep.add("input_gain", s.reservoir.input_gain);
  rep.add("feedback_gain", s.reservoir.feedback_gain);
  rep.add("nonlinearity", nonlinearity_name(s.reservoir.nonlinearity));
  rep.add("lambda", lambda);
  rep.add("seed", s.reservoir.seed);
  rep.add("nrmse", one.nrmse);
  rep.add("nrmse_persistence", one.nrmse_persistence);
  rep.add("nrmse_ratio", one.nrmse_persistence > 0
                             ? one.nrmse / one.nrmse_persistence
                             : 0.0);
  if (compare) {
    rep.add("nrmse_two_layer", two.nrmse);
    rep.add("layer2_n_nodes", s.reservoir.layer2_n_nodes);
  }
  std::string report_path = join(ctx.out_dir, "mackey_report.kv");
  rep.write(report_path);

  if (!ctx.quiet) {
    std::cout << "mackey-glass one-step prediction (window " << window << ", "
              << n_train << " train / " << n_test << " test, N="
              << s.reservoir.n_nodes << ")\n"
              << "  reservoir NRMSE    " << one.nrmse << "\n"
              << "  persistence NRMSE  " << one.nrmse_persistence << "\n";
    if (one.nrmse_persistence > 0)
      std::cout << "  ratio              " << one.nrmse / one.nrmse_persistence
                << "\n";
    if (compare)
      std::cout << "  two-layer NRMSE    " << two.nrmse << "\n";
    std::cout << "  report -> " << report_path << "\n";
  }
  return 0;
}

int cmd_stability(const CommandContext& ctx, double eta, double alpha,
                  int traversals) {
  if (traversals < 1) throw InputError("traversals must be >= 1");
  if (eta < 0 || alpha < 0) throw InputError("gains must be >= 0");
  GainResult g = loop_gain({eta, traversals});
  GainResult ga = average_gain(alpha, traversals);

  ensure_out_dir(ctx.out_dir);
  KvReport rep;
  rep.add("command", "stability");
  rep.add("eta", eta);
  rep.add("alpha", alpha);
  rep.add("traversals", traversals);
  rep.add("loop_gain", g.gain);
  rep.add("loop_stable", g.stable ? 1 : 0);
  rep.add("average_gain", ga.gain);
  rep.add("average_stable", ga.stable ? 1 : 0);
  rep.write(join(ctx.out_dir, "stability_report.kv"));

  if (!ctx.quiet) {
    std::cout << "closed-loop gain, K=" << traversals << " traversals\n"
              << "  G = eta^K        = " << g.gain << "  ("
              << (g.stable ? "stable" : "UNSTABLE") << ")\n"
              << "  G_ave(alpha=" << alpha << ") = " << ga.gain << "  ("
              << (ga.stable ? "stable" : "UNSTABLE") << ")\n";
  }
  return 0;
}

int cmd_fom(const CommandContext& ctx, const FomInputs& in) {
  FomReport fom = compute_foms(in);
  LatencyReport lat = latency_model(in);

  ensure_out_dir(ctx.out_dir);
  KvReport rep;
  rep.add("command", "fom");
  rep.add("q", in.q);
  rep.add("n", in.n);
  rep.add("b", in.b);
  rep.add("m_rnn", in.m_rnn);
  rep.add("c_rnn", in.c_rnn);
  rep.add("delta_rnn", in.delta_rnn);
  rep.add("delta_d", in.delta_d);
  rep.add("f_bus", in.f_bus);
  rep.add("delta_rr", in.delta_rr);
  rep.add("m_dlr", fom.m_dlr);
  rep.add("c_dlr_train", fom.c_dlr_train);
  rep.add("c_dlr_infer", fom.c_dlr_infer);
  rep.add("srf", fom.srf);
  rep.add("hcrf", fom.hcrf);
  rep.add("lrf", fom.lrf);
  rep.add("delta_rc", lat.delta_rc);
  rep.add("delta_prime", lat.delta_prime);
  rep.add("delta_total", lat.delta_total);
  rep.write(join(ctx.out_dir, "fom_report.kv"));

  if (!ctx.quiet) {
    std::cout << "figures of merit (Q=" << in.q << ", N=" << in.n << ", B="
              << in.b << ")\n" << std::left << std::setw(26)
              << "  parameters M = Q*N" << fom.m_dlr << "\n" << std::setw(26)
              << "  train ops C = B*N^2" << fom.c_dlr_train << "\n"
              << std::setw(26) << "  infer ops C1 = Q*N^2" << fom.c_dlr_infer
              << "\n" << std::setw(26) << "  SRF" << fom.srf << "\n"
              << std::setw(26) << "  HCRF" << fom.hcrf << "\n";
    if (in.delta_rnn > 0)
      std::cout << std::setw(26) << "  LRF" << fom.lrf << "\n";
    std::cout << std::setw(26) << "  latency delta_RC" << lat.delta_rc << " s\n"
              << std::setw(26) << "  latency delta_prime" << lat.delta_prime
              << " s\n" << std::setw(26) << "  latency total" << lat.delta_total
              << " s\n";
  }
  return 0;
}

}  // namespace dlr
