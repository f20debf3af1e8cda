#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "carkit/array.hpp"
#include "carkit/decode.hpp"
#include "carkit/encode.hpp"
#include "carkit/error.hpp"
#include "carkit/loss.hpp"
#include "carkit/metrics.hpp"
#include "carkit/numfmt.hpp"
#include "carkit/rng.hpp"
#include "carkit/table.hpp"
#include "carkit/uncertainty.hpp"

namespace carkit {

// The seven strategy pairings: discretization + loss + decoder.
enum class StrategyKind {
  LiOnehotCe,
  CaoSmo3Wce,
  SornSmo2Wce,
  YangSmo1Mbce,
  DornOrdinal,
  DsSideSmoothL1,
  AdabinsSi,
};

inline const std::vector<StrategyKind>& all_strategies() {
  static const std::vector<StrategyKind> all = {
      StrategyKind::LiOnehotCe,     StrategyKind::CaoSmo3Wce,   StrategyKind::SornSmo2Wce,
      StrategyKind::YangSmo1Mbce,   StrategyKind::DornOrdinal,  StrategyKind::DsSideSmoothL1,
      StrategyKind::AdabinsSi,
  };
  return all;
}

inline const char* strategy_name(StrategyKind k) {
  switch (k) {
    case StrategyKind::LiOnehotCe: return "li-onehot-ce";
    case StrategyKind::CaoSmo3Wce: return "cao-smo3-wce";
    case StrategyKind::SornSmo2Wce: return "sorn-smo2-wce";
    case StrategyKind::YangSmo1Mbce: return "yang-smo1-mbce";
    case StrategyKind::DornOrdinal: return "dorn-ordinal";
    case StrategyKind::DsSideSmoothL1: return "ds-side-smoothl1";
    case StrategyKind::AdabinsSi: return "adabins-si";
  }
  return "unknown";
}

inline StrategyKind strategy_from_name(const std::string& name) {
  for (StrategyKind k : all_strategies())
    if (name == strategy_name(k)) return k;
  throw Error(ErrorKind::BadConfig, "unknown strategy '" + name + "'");
}

struct SynthConfig {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t k = 16;
  double a = 1.0;
  double b = 80.0;
  double noise_base = 0.03;
  double noise_scale = 0.30;
  std::size_t epochs = 300;
  double lr = 0.5;
  double step = 0.01;          // sparsification step for AUSE
  double omega = 10.0;         // scale-invariant loss weight
  double lambda = 0.85;        // scale-invariant variance term
  double gamma_smooth1 = 15.0;
  double gamma_smooth2 = 1.0;
  double gamma_smooth3 = 65.0;
  std::vector<StrategyKind> strategies = all_strategies();
  std::vector<std::uint64_t> seeds = {0, 1, 2};
};

inline void validate_config(const SynthConfig& c) {
  if (!(c.a > 0.0)) throw Error(ErrorKind::NonPositiveMin, "config needs a > 0");
  if (!(c.a < c.b)) throw Error(ErrorKind::BadConfig, "config needs a < b");
  if (c.k == 0) throw Error(ErrorKind::ZeroBins, "config needs k >= 1");
  if (c.width == 0 || c.height == 0) throw Error(ErrorKind::BadConfig, "empty scene");
  if (!(c.lr > 0.0) && c.epochs > 0) {
    // zero learning rate is allowed for no-op training runs
  }
  if (c.noise_base < 0.0 || c.noise_scale < 0.0)
    throw Error(ErrorKind::BadConfig, "noise scales must be nonnegative");
  if (!(c.step > 0.0) || c.step > 0.5) throw Error(ErrorKind::BadConfig, "step must be in (0, 0.5]");
  if (c.strategies.empty()) throw Error(ErrorKind::BadConfig, "no strategies selected");
  if (c.seeds.empty()) throw Error(ErrorKind::BadConfig, "no seeds selected");
}

// Resolved pairing for one strategy, mirroring the summary table the names
// come from.
struct StrategyConfig {
  StrategyKind kind;
  std::string name;
  std::string encoder;  // "onehot", "ordinal", "smooth1", ...
  double gamma = 0.0;
  std::string loss;     // "ce", "wce", "mbce", "ordinal", "smoothl1", "si"
  std::string decoder;  // "soft", "argmax", "ordinal", "adaptive"
  std::size_t channels = 0;
};

inline StrategyConfig strategy_config(StrategyKind kind, const SynthConfig& cfg) {
  StrategyConfig s;
  s.kind = kind;
  s.name = strategy_name(kind);
  s.channels = kind == StrategyKind::DornOrdinal ? 2 * cfg.k : cfg.k;
  switch (kind) {
    case StrategyKind::LiOnehotCe:
      s.encoder = "onehot"; s.loss = "ce"; s.decoder = "soft";
      break;
    case StrategyKind::CaoSmo3Wce:
      s.encoder = "smooth3"; s.gamma = cfg.gamma_smooth3; s.loss = "wce"; s.decoder = "soft";
      break;
    case StrategyKind::SornSmo2Wce:
      s.encoder = "smooth2"; s.gamma = cfg.gamma_smooth2; s.loss = "wce"; s.decoder = "argmax";
      break;
    case StrategyKind::YangSmo1Mbce:
      s.encoder = "smooth1"; s.gamma = cfg.gamma_smooth1; s.loss = "mbce"; s.decoder = "soft";
      break;
    case StrategyKind::DornOrdinal:
      s.encoder = "ordinal"; s.loss = "ordinal"; s.decoder = "ordinal";
      break;
    case StrategyKind::DsSideSmoothL1:
      s.encoder = "onehot"; s.loss = "smoothl1"; s.decoder = "soft";
      break;
    case StrategyKind::AdabinsSi:
      s.encoder = "none"; s.loss = "si"; s.decoder = "adaptive";
      break;
  }
  return s;
}

// Synthetic desk-scale scene. Ground truth is piecewise-planar in log depth;
// the feature basis is [x, y, x^2, x*y, y^2, observed log depth], with the
// observation carrying zero-mean Gaussian noise whose sigma grows linearly
// with depth.
struct SynthScene {
  std::size_t width = 0;
  std::size_t height = 0;
  GroundTruthDepth gt;
  Matrix features;  // N x 6
  std::vector<double> noise_sigma;
};

inline constexpr std::size_t kFeatureCount = 6;

inline SynthScene gen_scene(std::uint64_t seed, const SynthConfig& cfg) {
  validate_config(cfg);
  const std::size_t n = cfg.width * cfg.height;
  const double log_a = std::log(cfg.a);
  const double log_b = std::log(cfg.b);
  const double span = log_b - log_a;

  // one log-depth plane per quadrant
  CounterRng plane_rng(seed, 1);
  double intercept[4], slope_x[4], slope_y[4];
  for (int r = 0; r < 4; ++r) {
    intercept[r] = log_a + span * plane_rng.next_uniform(0.15, 0.55);
    slope_x[r] = span * plane_rng.next_uniform(-0.45, 0.45);
    slope_y[r] = span * plane_rng.next_uniform(-0.45, 0.45);
  }

  CounterRng noise_rng(seed, 2);
  SynthScene scene;
  scene.width = cfg.width;
  scene.height = cfg.height;
  scene.gt.values.resize(n);
  scene.gt.mask = full_mask(n);
  scene.noise_sigma.resize(n);
  scene.features = Matrix(n, kFeatureCount);

  for (std::size_t py = 0; py < cfg.height; ++py) {
    for (std::size_t px = 0; px < cfg.width; ++px) {
      const std::size_t j = py * cfg.width + px;
      const double x = (static_cast<double>(px) + 0.5) / static_cast<double>(cfg.width);
      const double y = (static_cast<double>(py) + 0.5) / static_cast<double>(cfg.height);
      const int region = (x >= 0.5) + 2 * (y >= 0.5);
      const double log_d =
          std::clamp(intercept[region] + slope_x[region] * x + slope_y[region] * y, log_a, log_b);
      const double d = std::exp(log_d);
      scene.gt.values[j] = d;

      const double sigma = cfg.noise_base + cfg.noise_scale * (d - cfg.a) / (cfg.b - cfg.a);
      scene.noise_sigma[j] = sigma;
      const double observed = log_d + sigma * noise_rng.next_gaussian();

      scene.features(j, 0) = x;
      scene.features(j, 1) = y;
      scene.features(j, 2) = x * x;
      scene.features(j, 3) = x * y;
      scene.features(j, 4) = y * y;
      scene.features(j, 5) = (observed - log_a) / span;
    }
  }
  return scene;
}

// Linear per-pixel head: logits = features * weights + bias.
struct Predictor {
  Matrix weights;             // F x C
  std::vector<double> bias;   // C

  Matrix logits(const Matrix& features) const {
    Matrix out(features.rows, bias.size());
    for (std::size_t j = 0; j < features.rows; ++j)
      for (std::size_t c = 0; c < bias.size(); ++c) {
        double acc = bias[c];
        for (std::size_t f = 0; f < features.cols; ++f)
          acc += features(j, f) * weights(f, c);
        out(j, c) = acc;
      }
    return out;
  }
};

struct TrainResult {
  Predictor predictor;
  std::vector<double> loss_trace;  // one entry per epoch, evaluated pre-update
};

namespace detail {

struct StrategyTables {
  DepthTable log_table;
  DepthTable adaptive_table;  // uniform widths, AdabinsSi only
};

inline StrategyTables make_tables(const SynthConfig& cfg) {
  StrategyTables t;
  t.log_table = make_uniform_log_table({cfg.a, cfg.b}, cfg.k);
  const WidthVector uniform = normalize_widths(std::vector<double>(cfg.k, 1.0), 0.0);
  t.adaptive_table = make_adaptive_table({cfg.a, cfg.b}, uniform);
  return t;
}

// Scale-invariant loss through the adaptive decode: the gradient with respect
// to each logit chains through the softmax and the weighted table sum.
inline LossResult si_loss_on_logits(const Matrix& logits, const DepthTable& ada,
                                    const GroundTruthDepth& gt, double omega, double lambda) {
  const ProbMap probs = softmax(logits);
  DepthMap pred = decode_adaptive(ada, probs);
  pred.mask = gt.mask;
  const LossResult si = scale_invariant_loss(pred, gt, omega, lambda);

  LossResult res;
  res.value = si.value;
  res.grad = Matrix(logits.rows, logits.cols);
  for (std::size_t j = 0; j < logits.rows; ++j) {
    if (!gt.mask[j]) continue;
    const double gd = si.grad(j, 0);
    if (gd == 0.0) continue;
    for (std::size_t q = 0; q < logits.cols; ++q)
      res.grad(j, q) = gd * probs.data(j, q) * (ada.values[q] - pred.values[j]);
  }
  return res;
}

inline std::vector<int> target_classes(const SynthScene& scene, const DepthTable& table) {
  std::vector<int> classes(scene.gt.size(), 0);
  for (std::size_t j = 0; j < scene.gt.size(); ++j)
    if (scene.gt.mask[j])
      classes[j] = static_cast<int>(class_index(table, scene.gt.values[j]));
  return classes;
}

}  // namespace detail

inline TrainResult train(const SynthScene& scene, StrategyKind kind, const SynthConfig& cfg,
                         double lr, std::size_t epochs, std::uint64_t seed) {
  if (lr < 0.0) throw Error(ErrorKind::BadConfig, "learning rate must be nonnegative");
  const detail::StrategyTables tables = detail::make_tables(cfg);
  const StrategyConfig strat = strategy_config(kind, cfg);
  const std::size_t channels = strat.channels;

  // fixed targets per strategy
  Matrix label_target;
  std::vector<int> class_target;
  switch (kind) {
    case StrategyKind::LiOnehotCe:
      label_target = encode_onehot(scene.gt, tables.log_table).data;
      break;
    case StrategyKind::CaoSmo3Wce:
      label_target = encode_smooth3(scene.gt, tables.log_table, cfg.gamma_smooth3).data;
      break;
    case StrategyKind::SornSmo2Wce:
      label_target = encode_smooth2(scene.gt, tables.log_table, cfg.gamma_smooth2).data;
      break;
    case StrategyKind::YangSmo1Mbce:
      label_target = encode_smooth1(scene.gt, tables.log_table, cfg.gamma_smooth1).data;
      break;
    case StrategyKind::DornOrdinal:
      label_target = encode_ordinal(scene.gt, tables.log_table).data;
      break;
    case StrategyKind::DsSideSmoothL1:
      class_target = detail::target_classes(scene, tables.log_table);
      break;
    case StrategyKind::AdabinsSi:
      break;
  }

  CounterRng init_rng(seed, 3);
  TrainResult out;
  out.predictor.weights = Matrix(kFeatureCount, channels);
  out.predictor.bias.assign(channels, 0.0);
  for (auto& w : out.predictor.weights.data) w = 0.01 * init_rng.next_gaussian();

  out.loss_trace.reserve(epochs);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const Matrix logits = out.predictor.logits(scene.features);
    LossResult loss;
    switch (kind) {
      case StrategyKind::LiOnehotCe:
        loss = ce_loss(logits, label_target, scene.gt.mask);
        break;
      case StrategyKind::CaoSmo3Wce:
      case StrategyKind::SornSmo2Wce:
        loss = weighted_ce_loss(logits, label_target, scene.gt.mask);
        break;
      case StrategyKind::YangSmo1Mbce:
        loss = multi_bce_loss(logits, label_target, scene.gt.mask);
        break;
      case StrategyKind::DornOrdinal:
        loss = ordinal_loss(logits, label_target, scene.gt.mask);
        break;
      case StrategyKind::DsSideSmoothL1:
        loss = smooth_l1_loss_logits(logits, class_target, scene.gt.mask);
        break;
      case StrategyKind::AdabinsSi:
        loss = detail::si_loss_on_logits(logits, tables.adaptive_table, scene.gt, cfg.omega,
                                         cfg.lambda);
        break;
    }
    if (!std::isfinite(loss.value))
      throw Error(ErrorKind::DivergedLoss, std::string("loss became non-finite for ") +
                                               strategy_name(kind));
    out.loss_trace.push_back(loss.value);

    if (lr == 0.0) continue;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      for (std::size_t c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < logits.rows; ++j)
          acc += scene.features(j, f) * loss.grad(j, c);
        out.predictor.weights(f, c) -= lr * acc;
      }
    for (std::size_t c = 0; c < channels; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < logits.rows; ++j) acc += loss.grad(j, c);
      out.predictor.bias[c] -= lr * acc;
    }
  }
  return out;
}

// Decoded prediction plus the probability map used for uncertainty scoring.
struct StrategyPrediction {
  ProbMap probs;
  DepthMap depth;
  std::map<std::string, UncertaintyMap> uncertainty;
};

inline StrategyPrediction predict(const SynthScene& scene, StrategyKind kind,
                                  const SynthConfig& cfg, const Predictor& predictor) {
  const detail::StrategyTables tables = detail::make_tables(cfg);
  const Matrix logits = predictor.logits(scene.features);

  StrategyPrediction out;
  if (kind == StrategyKind::DornOrdinal) {
    out.probs = paired_sigmoid(logits);
    out.depth = decode_ordinal(tables.log_table, out.probs);
    out.depth.mask = scene.gt.mask;
    out.uncertainty.emplace("e_dist_ordinal",
                            e_dist_ordinal(tables.log_table, out.probs, out.depth));
    return out;
  }

  out.probs = softmax(logits);
  switch (kind) {
    case StrategyKind::SornSmo2Wce:
      out.depth = decode_argmax(tables.log_table, out.probs);
      break;
    case StrategyKind::AdabinsSi:
      out.depth = decode_adaptive(tables.adaptive_table, out.probs);
      break;
    default:
      out.depth = decode_soft_weighted(tables.log_table, out.probs);
      break;
  }
  out.depth.mask = scene.gt.mask;
  out.uncertainty.emplace("s_entr", shannon_entropy(out.probs));
  out.uncertainty.emplace("one_minus_mcp", one_minus_mcp(out.probs));
  if (kind == StrategyKind::AdabinsSi) {
    out.uncertainty.emplace("e_dist",
                            e_dist_adaptive(tables.adaptive_table, out.probs, out.depth));
  } else {
    out.uncertainty.emplace("e_dist", e_dist(tables.log_table, out.probs, out.depth));
  }
  return out;
}

// --- config and report JSON ---------------------------------------------------

inline nlohmann::json config_to_json(const SynthConfig& c) {
  nlohmann::json j;
  j["width"] = c.width;
  j["height"] = c.height;
  j["k"] = c.k;
  j["a"] = c.a;
  j["b"] = c.b;
  j["noise_base"] = c.noise_base;
  j["noise_scale"] = c.noise_scale;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["step"] = c.step;
  j["omega"] = c.omega;
  j["lambda"] = c.lambda;
  j["gamma_smooth1"] = c.gamma_smooth1;
  j["gamma_smooth2"] = c.gamma_smooth2;
  j["gamma_smooth3"] = c.gamma_smooth3;
  std::vector<std::string> names;
  names.reserve(c.strategies.size());
  for (auto s : c.strategies) names.emplace_back(strategy_name(s));
  j["strategies"] = names;
  j["seeds"] = c.seeds;
  return j;
}

inline SynthConfig config_from_json(const nlohmann::json& j_in) {
  // accept either a bare config or a full report with an embedded one
  const nlohmann::json& j = j_in.contains("cells") && j_in.contains("config")
                                ? j_in.at("config")
                                : j_in;
  SynthConfig c;
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("width", c.width);
  get("height", c.height);
  get("k", c.k);
  get("a", c.a);
  get("b", c.b);
  get("noise_base", c.noise_base);
  get("noise_scale", c.noise_scale);
  get("epochs", c.epochs);
  get("lr", c.lr);
  get("step", c.step);
  get("omega", c.omega);
  get("lambda", c.lambda);
  get("gamma_smooth1", c.gamma_smooth1);
  get("gamma_smooth2", c.gamma_smooth2);
  get("gamma_smooth3", c.gamma_smooth3);
  if (j.contains("strategies")) {
    c.strategies.clear();
    for (const auto& name : j.at("strategies"))
      c.strategies.push_back(strategy_from_name(name.get<std::string>()));
  }
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  validate_config(c);
  return c;
}

namespace detail {

struct BenchmarkCell {
  nlohmann::json json;
  std::vector<double> loss_trace;
  std::string trace_name;
};

inline nlohmann::json metrics_to_json(const DepthMetrics& m) {
  nlohmann::json j;
  j["rmse"] = m.rmse;
  j["abs_rel"] = m.abs_rel;
  j["sq_rel"] = m.sq_rel;
  j["rmse_log"] = m.rmse_log;
  j["log10"] = m.log10;
  j["delta1"] = m.delta1;
  j["delta2"] = m.delta2;
  j["delta3"] = m.delta3;
  j["n_valid"] = m.n_valid;
  return j;
}

inline BenchmarkCell run_cell(const SynthConfig& cfg, StrategyKind kind, std::uint64_t seed) {
  BenchmarkCell cell;
  cell.trace_name = std::string("traces/") + strategy_name(kind) + "_seed" +
                    std::to_string(seed) + ".csv";
  cell.json["strategy"] = strategy_name(kind);
  cell.json["seed"] = seed;
  cell.json["loss_trace_file"] = cell.trace_name;
  try {
    const SynthScene scene = gen_scene(seed, cfg);
    TrainResult trained = train(scene, kind, cfg, cfg.lr, cfg.epochs, seed);
    cell.loss_trace = std::move(trained.loss_trace);
    const StrategyPrediction pred = predict(scene, kind, cfg, trained.predictor);
    cell.json["metrics"] = metrics_to_json(depth_metrics(pred.depth, scene.gt));
    nlohmann::json ause_json;
    for (const auto& [method, umap] : pred.uncertainty) {
      ause_json[method] = {
          {"rmse", ause(pred.depth, scene.gt, umap, MetricKind::RMSE, cfg.step)},
          {"abs_rel", ause(pred.depth, scene.gt, umap, MetricKind::AbsRel, cfg.step)},
      };
    }
    cell.json["ause"] = ause_json;
  } catch (const std::exception& e) {
    cell.json["error"] = e.what();
  }
  return cell;
}

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) r.mean += x;
  r.mean /= n;
  for (double x : xs) r.stddev += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(r.stddev / n);
  return r;
}

}  // namespace detail

// Runs every (strategy, seed) cell, each fully deterministic and independent.
// Cells may be spread over threads; the report is assembled in a fixed order,
// so the bytes do not depend on the thread count. Training failures are
// recorded in their cell without aborting the others. If `trace_dir` is
// nonempty, per-cell loss traces are written under `<trace_dir>/traces/`.
inline nlohmann::json run_benchmark(const SynthConfig& cfg, unsigned threads = 1,
                                    const std::string& trace_dir = "") {
  validate_config(cfg);
  struct Job {
    StrategyKind kind;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (StrategyKind kind : cfg.strategies)
    for (std::uint64_t seed : cfg.seeds) jobs.push_back({kind, seed});

  std::vector<detail::BenchmarkCell> cells(jobs.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      cells[i] = detail::run_cell(cfg, jobs[i].kind, jobs[i].seed);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
        cells[i] = detail::run_cell(cfg, jobs[i].kind, jobs[i].seed);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  nlohmann::json report;
  report["config"] = config_to_json(cfg);
  report["cells"] = nlohmann::json::array();
  for (const auto& cell : cells) report["cells"].push_back(cell.json);

  // per-strategy mean and population stddev over seeds, successful cells only
  nlohmann::json summary;
  for (StrategyKind kind : cfg.strategies) {
    std::map<std::string, std::vector<double>> ause_rmse, ause_abs_rel, metric_vals;
    for (const auto& cell : cells) {
      if (cell.json.value("strategy", "") != strategy_name(kind)) continue;
      if (cell.json.contains("error")) continue;
      for (const auto& [method, pair] : cell.json.at("ause").items()) {
        ause_rmse[method].push_back(pair.at("rmse").get<double>());
        ause_abs_rel[method].push_back(pair.at("abs_rel").get<double>());
      }
      for (const auto& [name, value] : cell.json.at("metrics").items())
        if (name != "n_valid") metric_vals[name].push_back(value.get<double>());
    }
    nlohmann::json s;
    if (ause_rmse.empty()) {
      s["error"] = "no successful cells";
    } else {
      auto pack = [](const std::map<std::string, std::vector<double>>& groups) {
        nlohmann::json out;
        for (const auto& [name, vals] : groups) {
          const detail::MeanStd ms = detail::mean_std(vals);
          out[name] = {{"mean", ms.mean}, {"stddev", ms.stddev}};
        }
        return out;
      };
      s["ause_rmse"] = pack(ause_rmse);
      s["ause_abs_rel"] = pack(ause_abs_rel);
      s["metrics"] = pack(metric_vals);
    }
    summary[strategy_name(kind)] = s;
  }
  report["summary"] = summary;

  if (!trace_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(trace_dir) / "traces");
    for (const auto& cell : cells) {
      if (cell.loss_trace.empty()) continue;
      std::ofstream os(fs::path(trace_dir) / cell.trace_name);
      if (!os) throw Error(ErrorKind::IoError, "cannot write " + cell.trace_name);
      os << "epoch,loss\n";
      for (std::size_t e = 0; e < cell.loss_trace.size(); ++e)
        os << e << "," << to_shortest(cell.loss_trace[e]) << "\n";
    }
  }
  return report;
}

}  // namespace carkit
