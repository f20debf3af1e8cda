// carkit command line: depth-table construction, target encoding, decoding,
// uncertainty scoring, metric evaluation, sparsification analysis, gradient
// checking, and the synthetic benchmark.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error. Human-facing
// numbers print with six digits after the decimal point; files carry full
// shortest-round-trip precision.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <carkit/carkit.hpp>
#include <carkit/gradcheck.hpp>

namespace {

using namespace carkit;
using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadConfig, path + " is not valid JSON: " + e.what());
  }
  return j;
}

void save_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
  if (!os) throw Error(ErrorKind::IoError, "write failed for " + path);
}

Mask load_mask_or_full(const std::string& path, std::size_t n) {
  if (path.empty()) return full_mask(n);
  Mask mask = as_mask(read_npy(path));
  if (mask.size() != n)
    throw Error(ErrorKind::ShapeMismatch, "mask length does not match data length");
  return mask;
}

GroundTruthDepth load_gt(const std::string& gt_path, const std::string& mask_path) {
  GroundTruthDepth gt;
  gt.values = as_vector(read_npy(gt_path));
  gt.mask = load_mask_or_full(mask_path, gt.values.size());
  validate_ground_truth(gt);
  return gt;
}

ProbMap load_probs(const std::string& path, ProbSemantics semantics) {
  ProbMap probs;
  probs.data = as_matrix(read_npy(path));
  probs.semantics = semantics;
  if (semantics == ProbSemantics::Softmax) {
    for (std::size_t j = 0; j < probs.data.rows; ++j) {
      const double s = chunked_sum(probs.data.row(j));
      if (std::abs(s - 1.0) > 1e-6)
        throw Error(ErrorKind::SemanticsMismatch,
                    "probs row " + std::to_string(j) + " does not sum to 1");
    }
  } else {
    for (double y : probs.data.data)
      if (y < 0.0 || y > 1.0)
        throw Error(ErrorKind::SemanticsMismatch, "sigmoid probs must lie in [0, 1]");
  }
  return probs;
}

constexpr const char* kMetricsHeader =
    "rmse,abs_rel,sq_rel,rmse_log,log10,delta1,delta2,delta3,n_valid";

void print_metrics_csv(const DepthMetrics& m) {
  std::cout << kMetricsHeader << "\n"
            << to_fixed6(m.rmse) << "," << to_fixed6(m.abs_rel) << "," << to_fixed6(m.sq_rel)
            << "," << to_fixed6(m.rmse_log) << "," << to_fixed6(m.log10) << ","
            << to_fixed6(m.delta1) << "," << to_fixed6(m.delta2) << "," << to_fixed6(m.delta3)
            << "," << m.n_valid << "\n";
}

void print_metrics_json(const DepthMetrics& m) {
  std::cout << "{\n"
            << "  \"rmse\": " << to_fixed6(m.rmse) << ",\n"
            << "  \"abs_rel\": " << to_fixed6(m.abs_rel) << ",\n"
            << "  \"sq_rel\": " << to_fixed6(m.sq_rel) << ",\n"
            << "  \"rmse_log\": " << to_fixed6(m.rmse_log) << ",\n"
            << "  \"log10\": " << to_fixed6(m.log10) << ",\n"
            << "  \"delta1\": " << to_fixed6(m.delta1) << ",\n"
            << "  \"delta2\": " << to_fixed6(m.delta2) << ",\n"
            << "  \"delta3\": " << to_fixed6(m.delta3) << ",\n"
            << "  \"n_valid\": " << m.n_valid << "\n"
            << "}\n";
}

MetricKind metric_from_name(const std::string& name) {
  if (name == "rmse") return MetricKind::RMSE;
  if (name == "absrel") return MetricKind::AbsRel;
  throw Error(ErrorKind::BadConfig, "unknown metric '" + name + "' (rmse|absrel)");
}

int run(int argc, char** argv) {
  CLI::App app{"carkit: classification-approaches-for-regression depth toolkit"};
  app.require_subcommand(1);

  // ---- bins -----------------------------------------------------------------
  auto* bins = app.add_subcommand("bins", "Build a depth table and write it as JSON");
  double bins_a = 1e-3, bins_b = 80.0, bins_eps = 1e-3;
  std::size_t bins_k = 0;
  std::string bins_widths, bins_out;
  bins->add_option("--a", bins_a, "Minimum depth in meters (default 1e-3)");
  bins->add_option("--b", bins_b, "Maximum depth in meters (default 80)");
  bins->add_option("--k", bins_k, "Number of bins")->required();
  bins->add_option("--adaptive-widths", bins_widths,
                   "npy file of K raw bin widths; builds a linear adaptive table");
  bins->add_option("--eps", bins_eps, "Additive width floor used during normalization");
  bins->add_option("-o,--output", bins_out, "Output table JSON path")->required();
  bins->callback([&] {
    DepthTable table;
    if (bins_widths.empty()) {
      table = make_uniform_log_table({bins_a, bins_b}, bins_k);
    } else {
      const std::vector<double> raw = as_vector(read_npy(bins_widths));
      if (raw.size() != bins_k)
        throw Error(ErrorKind::ShapeMismatch, "width file length does not match --k");
      table = make_adaptive_table({bins_a, bins_b}, normalize_widths(raw, bins_eps));
    }
    save_json(bins_out, table_to_json(table));
  });

  // ---- encode ---------------------------------------------------------------
  auto* enc = app.add_subcommand("encode", "Encode ground-truth depth into targets");
  std::string enc_table, enc_scheme, enc_gt, enc_mask, enc_out;
  std::string enc_index_mode = "round", enc_ordinal_mode = "literal";
  std::optional<double> enc_gamma;
  enc->add_option("--table", enc_table, "Depth table JSON")->required();
  enc->add_option("--scheme", enc_scheme, "onehot|ordinal|smooth1|smooth2|smooth3")->required();
  enc->add_option("--gamma", enc_gamma, "Smoothing coefficient (defaults: 15 / 1 / 65)");
  enc->add_option("--gt", enc_gt, "Ground-truth depth npy (N,)")->required();
  enc->add_option("--mask", enc_mask, "Validity mask npy (N,), bool");
  enc->add_option("--index-mode", enc_index_mode, "round|floor (default round)");
  enc->add_option("--ordinal-mode", enc_ordinal_mode, "literal|strict (default literal)");
  enc->add_option("-o,--output", enc_out, "Output labels npy (N,K)")->required();
  enc->callback([&] {
    const DepthTable table = table_from_json(load_json(enc_table));
    const GroundTruthDepth gt = load_gt(enc_gt, enc_mask);
    IndexMode imode;
    if (enc_index_mode == "round") imode = IndexMode::NearestEdge;
    else if (enc_index_mode == "floor") imode = IndexMode::IntervalFloor;
    else throw Error(ErrorKind::BadConfig, "--index-mode must be round|floor");

    LabelMap labels;
    if (enc_scheme == "onehot") {
      labels = encode_onehot(gt, table, imode);
    } else if (enc_scheme == "ordinal") {
      OrdinalEncodeMode om;
      if (enc_ordinal_mode == "literal") om = OrdinalEncodeMode::Literal;
      else if (enc_ordinal_mode == "strict") om = OrdinalEncodeMode::Strict;
      else throw Error(ErrorKind::BadConfig, "--ordinal-mode must be literal|strict");
      labels = encode_ordinal(gt, table, om, imode);
    } else if (enc_scheme == "smooth1") {
      labels = encode_smooth1(gt, table, enc_gamma.value_or(15.0));
    } else if (enc_scheme == "smooth2") {
      labels = encode_smooth2(gt, table, enc_gamma.value_or(1.0));
    } else if (enc_scheme == "smooth3") {
      labels = encode_smooth3(gt, table, enc_gamma.value_or(65.0), imode);
    } else {
      throw Error(ErrorKind::BadConfig, "unknown scheme '" + enc_scheme + "'");
    }
    write_npy_file(enc_out, labels.data);
  });

  // ---- decode ---------------------------------------------------------------
  auto* dec = app.add_subcommand("decode", "Restore continuous depth from a prediction map");
  std::string dec_table, dec_probs, dec_method, dec_out, dec_pgm;
  std::string dec_count_mode = "clamped";
  std::size_t dec_width = 0;
  dec->add_option("--table", dec_table, "Depth table JSON")->required();
  dec->add_option("--probs", dec_probs, "Prediction map npy (N,K)")->required();
  dec->add_option("--method", dec_method, "soft|argmax|ordinal|adaptive")->required();
  dec->add_option("--count-mode", dec_count_mode, "clamped|literal (ordinal decode)");
  dec->add_option("--pgm", dec_pgm, "Optional 16-bit PGM dump scaled to [a, b]");
  dec->add_option("--width", dec_width, "Image width for the PGM dump");
  dec->add_option("-o,--output", dec_out, "Output depth npy (N,)")->required();
  dec->callback([&] {
    const DepthTable table = table_from_json(load_json(dec_table));
    DepthMap depth;
    if (dec_method == "soft") {
      depth = decode_soft_weighted(table, load_probs(dec_probs, ProbSemantics::Softmax));
    } else if (dec_method == "argmax") {
      ProbMap probs;
      probs.data = as_matrix(read_npy(dec_probs));
      probs.semantics = ProbSemantics::Softmax;
      depth = decode_argmax(table, probs);
    } else if (dec_method == "ordinal") {
      OrdinalCountMode cm;
      if (dec_count_mode == "clamped") cm = OrdinalCountMode::Clamped;
      else if (dec_count_mode == "literal") cm = OrdinalCountMode::Literal;
      else throw Error(ErrorKind::BadConfig, "--count-mode must be clamped|literal");
      depth = decode_ordinal(table, load_probs(dec_probs, ProbSemantics::PerClassSigmoid), cm);
    } else if (dec_method == "adaptive") {
      depth = decode_adaptive(table, load_probs(dec_probs, ProbSemantics::Softmax));
    } else {
      throw Error(ErrorKind::BadConfig, "unknown method '" + dec_method + "'");
    }
    write_npy_file(dec_out, depth.values);
    if (!dec_pgm.empty()) {
      if (dec_width == 0) throw Error(ErrorKind::BadConfig, "--pgm needs --width");
      write_pgm16(dec_pgm, depth.values, dec_width, table.range.a, table.range.b);
    }
  });

  // ---- uncert ---------------------------------------------------------------
  auto* unc = app.add_subcommand("uncert", "Compute a per-pixel uncertainty map");
  std::string unc_table, unc_probs, unc_method, unc_out, unc_pgm, unc_mask;
  std::string unc_label_mode = "strict";
  std::vector<std::string> unc_depths;
  std::size_t unc_width = 0;
  unc->add_option("--table", unc_table, "Depth table JSON (E-Dist variants)");
  unc->add_option("--probs", unc_probs, "Prediction map npy (N,K)");
  unc->add_option("--depth", unc_depths,
                  "Decoded depth npy; repeat the flag for method=variance");
  unc->add_option("--method", unc_method,
                  "entropy|mcp|edist|edist-adaptive|edist-ordinal|variance")
      ->required();
  unc->add_option("--label-mode", unc_label_mode, "strict|literal (edist-ordinal)");
  unc->add_option("--mask", unc_mask, "Validity mask npy (variance only)");
  unc->add_option("--pgm", unc_pgm, "Optional 16-bit PGM dump normalized per map");
  unc->add_option("--width", unc_width, "Image width for the PGM dump");
  unc->add_option("-o,--output", unc_out, "Output uncertainty npy (N,)")->required();
  unc->callback([&] {
    auto need = [](const std::string& value, const char* flag) {
      if (value.empty())
        throw Error(ErrorKind::BadConfig, std::string("missing required flag ") + flag);
      return value;
    };
    UncertaintyMap u;
    if (unc_method == "entropy") {
      u = shannon_entropy(load_probs(need(unc_probs, "--probs"), ProbSemantics::Softmax));
    } else if (unc_method == "mcp") {
      u = one_minus_mcp(load_probs(need(unc_probs, "--probs"), ProbSemantics::Softmax));
    } else if (unc_method == "edist" || unc_method == "edist-adaptive" ||
               unc_method == "edist-ordinal") {
      const DepthTable table = table_from_json(load_json(need(unc_table, "--table")));
      if (unc_depths.empty())
        throw Error(ErrorKind::BadConfig, "missing required flag --depth");
      DepthMap depth;
      depth.values = as_vector(read_npy(unc_depths.front()));
      depth.mask = full_mask(depth.values.size());
      if (unc_method == "edist") {
        u = e_dist(table, load_probs(need(unc_probs, "--probs"), ProbSemantics::Softmax), depth);
      } else if (unc_method == "edist-adaptive") {
        u = e_dist_adaptive(table,
                            load_probs(need(unc_probs, "--probs"), ProbSemantics::Softmax),
                            depth);
      } else {
        OrdinalLabelMode lm;
        if (unc_label_mode == "strict") lm = OrdinalLabelMode::Strict;
        else if (unc_label_mode == "literal") lm = OrdinalLabelMode::Literal;
        else throw Error(ErrorKind::BadConfig, "--label-mode must be strict|literal");
        u = e_dist_ordinal(
            table, load_probs(need(unc_probs, "--probs"), ProbSemantics::PerClassSigmoid),
            depth, lm);
      }
    } else if (unc_method == "variance") {
      if (unc_depths.size() < 2)
        throw Error(ErrorKind::TooFewMembers, "variance needs --depth given at least twice");
      std::vector<DepthMap> maps;
      for (const auto& path : unc_depths) {
        DepthMap m;
        m.values = as_vector(read_npy(path));
        m.mask = load_mask_or_full(unc_mask, m.values.size());
        maps.push_back(std::move(m));
      }
      u = ensemble_variance(maps);
    } else {
      throw Error(ErrorKind::BadConfig, "unknown method '" + unc_method + "'");
    }
    write_npy_file(unc_out, u.values);
    if (!unc_pgm.empty()) {
      if (unc_width == 0) throw Error(ErrorKind::BadConfig, "--pgm needs --width");
      write_pgm16_normalized(unc_pgm, u.values, unc_width);
    }
  });

  // ---- eval -----------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "Depth accuracy metrics for a prediction");
  std::string ev_pred, ev_gt, ev_mask;
  bool ev_csv = false, ev_json = false;
  ev->add_option("--pred", ev_pred, "Predicted depth npy (N,)")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth depth npy (N,)")->required();
  ev->add_option("--mask", ev_mask, "Validity mask npy (N,), bool");
  ev->add_flag("--csv", ev_csv, "Print a one-row CSV (default)");
  ev->add_flag("--json", ev_json, "Print a JSON object instead");
  ev->callback([&] {
    const GroundTruthDepth gt = load_gt(ev_gt, ev_mask);
    DepthMap pred;
    pred.values = as_vector(read_npy(ev_pred));
    pred.mask = gt.mask;
    const DepthMetrics m = depth_metrics(pred, gt);
    if (ev_json) print_metrics_json(m);
    else print_metrics_csv(m);
  });

  // ---- sparsify ---------------------------------------------------------------
  auto* sp = app.add_subcommand("sparsify", "Sparsification curve for an uncertainty map");
  std::string sp_pred, sp_gt, sp_mask, sp_uncert, sp_metric = "rmse", sp_out;
  double sp_step = 0.01;
  bool sp_ause = false;
  sp->add_option("--pred", sp_pred, "Predicted depth npy (N,)")->required();
  sp->add_option("--gt", sp_gt, "Ground-truth depth npy (N,)")->required();
  sp->add_option("--mask", sp_mask, "Validity mask npy (N,), bool");
  sp->add_option("--uncert", sp_uncert, "Uncertainty npy (N,)")->required();
  sp->add_option("--metric", sp_metric, "rmse|absrel (default rmse)");
  sp->add_option("--step", sp_step, "Removal fraction per step (default 0.01)");
  sp->add_flag("--ause", sp_ause, "Also print the area under the sparsification error curve");
  sp->add_option("-o,--output", sp_out, "Output curve CSV (fraction,value)")->required();
  sp->callback([&] {
    const GroundTruthDepth gt = load_gt(sp_gt, sp_mask);
    DepthMap pred;
    pred.values = as_vector(read_npy(sp_pred));
    pred.mask = gt.mask;
    UncertaintyMap uncert;
    uncert.values = as_vector(read_npy(sp_uncert));
    if (uncert.values.size() != gt.values.size())
      throw Error(ErrorKind::ShapeMismatch, "uncertainty length does not match pixels");
    const MetricKind kind = metric_from_name(sp_metric);

    const std::vector<double> errors = oracle_ranking(pred, gt, kind);
    std::vector<double> uncert_valid;
    uncert_valid.reserve(errors.size());
    for (std::size_t j = 0; j < gt.values.size(); ++j)
      if (gt.mask[j]) uncert_valid.push_back(uncert.values[j]);
    const SparsificationCurve curve = sparsification_curve(errors, uncert_valid, kind, sp_step);

    std::ofstream os(sp_out);
    if (!os) throw Error(ErrorKind::IoError, "cannot open " + sp_out + " for writing");
    os << "fraction,value\n";
    for (std::size_t i = 0; i < curve.fractions.size(); ++i)
      os << to_shortest(curve.fractions[i]) << "," << to_shortest(curve.metric_values[i])
         << "\n";
    if (!os) throw Error(ErrorKind::IoError, "write failed for " + sp_out);

    if (sp_ause) std::cout << to_fixed6(ause(pred, gt, uncert, kind, sp_step)) << "\n";
  });

  // ---- gradcheck ---------------------------------------------------------------
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of analytic gradients");
  std::string gc_loss = "all";
  std::size_t gc_trials = 100;
  std::uint64_t gc_seed = 17;
  gc->add_option("--loss", gc_loss, "all|ce|wce|mbce|ordinal|smoothl1|si (default all)");
  gc->add_option("--trials", gc_trials, "Random points per loss (default 100)");
  gc->add_option("--seed", gc_seed, "PRNG seed (default 17)");
  gc->callback([&] {
    if (gc_loss != "all" && gc_loss != "ce" && gc_loss != "wce" && gc_loss != "mbce" &&
        gc_loss != "ordinal" && gc_loss != "smoothl1" && gc_loss != "si")
      throw Error(ErrorKind::BadConfig, "unknown loss '" + gc_loss + "'");
    const auto cases = gradient_check_suite(gc_loss, gc_trials, gc_seed);
    bool all_ok = true;
    for (const auto& c : cases) {
      std::printf("%-8s max relative error %.6e (tolerance %.0e) %s\n", c.name.c_str(),
                  c.max_error, c.tolerance, c.passed() ? "ok" : "FAIL");
      all_ok = all_ok && c.passed();
    }
    if (!all_ok) throw Error(ErrorKind::BadConfig, "gradient check failed");
  });

  // ---- synth ---------------------------------------------------------------
  auto* sy = app.add_subcommand("synth", "Run the synthetic end-to-end benchmark");
  std::string sy_config, sy_out;
  unsigned sy_threads = 1;
  sy->add_option("--config", sy_config,
                 "Config JSON (or a previous report; its embedded config is reused)");
  sy->add_option("--threads", sy_threads, "Worker threads for benchmark cells (default 1)");
  sy->add_option("-o,--output", sy_out, "Output report JSON")->required();
  sy->callback([&] {
    const SynthConfig cfg =
        sy_config.empty() ? SynthConfig{} : config_from_json(load_json(sy_config));
    const std::string out_dir =
        std::filesystem::path(sy_out).has_parent_path()
            ? std::filesystem::path(sy_out).parent_path().string()
            : ".";
    const json report = run_benchmark(cfg, sy_threads, out_dir);
    save_json(sy_out, report);

    std::cout << "strategy           ause_rmse(e_dist)  ause_rmse(s_entr)  ause_rmse(1-mcp)\n";
    for (const auto& [name, s] : report.at("summary").items()) {
      auto cell = [&](const char* method) -> std::string {
        if (!s.contains("ause_rmse") || !s.at("ause_rmse").contains(method)) return "-";
        return to_fixed6(s.at("ause_rmse").at(method).at("mean").get<double>());
      };
      std::printf("%-18s %-18s %-18s %s\n", name.c_str(), cell("e_dist").c_str(),
                  cell("s_entr").c_str(), cell("one_minus_mcp").c_str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) std::cerr << "\n" << sub->help();
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const carkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == carkit::ErrorKind::IoError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
