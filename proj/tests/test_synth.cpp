#include <cmath>

#include "test_util.hpp"

using namespace carkit;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.width = 16;
  cfg.height = 16;
  cfg.k = 8;
  cfg.epochs = 40;
  cfg.step = 0.05;
  cfg.seeds = {0};
  return cfg;
}

}  // namespace

TEST_CASE("scene generation is deterministic and in range") {
  const SynthConfig cfg = small_config();
  const SynthScene a = gen_scene(7, cfg);
  const SynthScene b = gen_scene(7, cfg);
  CHECK(a.gt.values == b.gt.values);
  CHECK(a.features.data == b.features.data);
  CHECK(a.noise_sigma == b.noise_sigma);

  const SynthScene c = gen_scene(8, cfg);
  CHECK(a.gt.values != c.gt.values);

  for (double d : a.gt.values) {
    CHECK(d >= cfg.a);
    CHECK(d <= cfg.b);
  }
}

TEST_CASE("noise-free scenes expose the true log depth") {
  SynthConfig cfg = small_config();
  cfg.noise_base = 0.0;
  cfg.noise_scale = 0.0;
  const SynthScene scene = gen_scene(3, cfg);
  const double log_a = std::log(cfg.a);
  const double span = std::log(cfg.b) - log_a;
  for (std::size_t j = 0; j < scene.gt.size(); ++j) {
    const double observed = scene.features(j, 5) * span + log_a;
    CHECK_THAT(observed, WithinAbs(std::log(scene.gt.values[j]), 1e-12));
    CHECK(scene.noise_sigma[j] == 0.0);
  }
}

TEST_CASE("noise sigma grows linearly with depth") {
  const SynthConfig cfg = small_config();
  const SynthScene scene = gen_scene(5, cfg);
  for (std::size_t j = 0; j < scene.gt.size(); ++j) {
    const double expect =
        cfg.noise_base + cfg.noise_scale * (scene.gt.values[j] - cfg.a) / (cfg.b - cfg.a);
    CHECK_THAT(scene.noise_sigma[j], WithinAbs(expect, 1e-12));
  }
}

TEST_CASE("training reduces the loss on a noiseless scene") {
  SynthConfig cfg = small_config();
  cfg.noise_base = 0.0;
  cfg.noise_scale = 0.0;
  const SynthScene scene = gen_scene(0, cfg);
  const TrainResult r = train(scene, StrategyKind::LiOnehotCe, cfg, 0.5, 200, 0);
  REQUIRE(r.loss_trace.size() == 200);
  CHECK(r.loss_trace.back() < r.loss_trace.front());
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  const SynthConfig cfg = small_config();
  const SynthScene scene = gen_scene(1, cfg);
  const TrainResult r = train(scene, StrategyKind::CaoSmo3Wce, cfg, 0.0, 10, 1);
  CHECK(r.loss_trace.front() == r.loss_trace.back());

  const TrainResult fresh = train(scene, StrategyKind::CaoSmo3Wce, cfg, 0.0, 1, 1);
  CHECK(r.predictor.weights.data == fresh.predictor.weights.data);
  CHECK(r.predictor.bias == fresh.predictor.bias);
}

TEST_CASE("ordinal strategy allocates paired channels") {
  const SynthConfig cfg = small_config();
  CHECK(strategy_config(StrategyKind::DornOrdinal, cfg).channels == 2 * cfg.k);
  CHECK(strategy_config(StrategyKind::LiOnehotCe, cfg).channels == cfg.k);

  const SynthScene scene = gen_scene(2, cfg);
  const TrainResult r = train(scene, StrategyKind::DornOrdinal, cfg, 0.3, 5, 2);
  CHECK(r.predictor.bias.size() == 2 * cfg.k);
}

TEST_CASE("every strategy trains, decodes in range, and scores uncertainty") {
  const SynthConfig cfg = small_config();
  const SynthScene scene = gen_scene(4, cfg);
  const DepthTable log_table = make_uniform_log_table({cfg.a, cfg.b}, cfg.k);

  for (StrategyKind kind : all_strategies()) {
    INFO(strategy_name(kind));
    const TrainResult r = train(scene, kind, cfg, cfg.lr, 30, 4);
    const StrategyPrediction pred = predict(scene, kind, cfg, r.predictor);

    const bool adaptive = kind == StrategyKind::AdabinsSi;
    const double lo = adaptive ? cfg.a : std::exp(log_table.values.front());
    const double hi = adaptive ? cfg.b : std::exp(log_table.values.back());
    for (double d : pred.depth.values) {
      CHECK(d >= lo - 1e-9);
      CHECK(d <= hi + 1e-9);
    }

    if (kind == StrategyKind::DornOrdinal) {
      CHECK(pred.uncertainty.count("e_dist_ordinal") == 1);
      CHECK(pred.uncertainty.count("s_entr") == 0);
    } else {
      CHECK(pred.uncertainty.count("e_dist") == 1);
      CHECK(pred.uncertainty.count("s_entr") == 1);
      CHECK(pred.uncertainty.count("one_minus_mcp") == 1);
    }
    for (const auto& [name, umap] : pred.uncertainty) {
      INFO(name);
      for (double u : umap.values) CHECK(u >= 0.0);
    }
  }
}

// The adabins strategy backpropagates the scale-invariant loss through the
// adaptive decode; check that composed gradient against central differences.
TEST_CASE("scale-invariant gradient through the adaptive decode") {
  const SynthConfig cfg = small_config();
  const DepthTable ada = make_adaptive_table(
      {cfg.a, cfg.b}, normalize_widths(std::vector<double>(cfg.k, 1.0), 0.0));
  CounterRng rng(109);
  GroundTruthDepth gt;
  gt.values.resize(6);
  for (auto& d : gt.values) d = rng.next_uniform(2.0, 70.0);
  gt.mask = full_mask(6);
  gt.mask[3] = 0;

  Matrix logits(6, cfg.k);
  for (auto& x : logits.data) x = rng.next_uniform(-2.0, 2.0);
  auto op = [&](const std::vector<double>& flat) {
    Matrix m(6, cfg.k);
    m.data = flat;
    return carkit::detail::si_loss_on_logits(m, ada, gt, cfg.omega, cfg.lambda);
  };
  CHECK(finite_diff_check(op, logits.data) <= 1e-4);
}

// With targets injected as saturated logits the only error left is the
// quantization of the table itself.
TEST_CASE("quantization floor bounds AbsRel for a perfect one-hot predictor") {
  SynthConfig cfg = small_config();
  cfg.noise_base = 0.0;
  cfg.noise_scale = 0.0;
  const SynthScene scene = gen_scene(6, cfg);
  const DepthTable table = make_uniform_log_table({cfg.a, cfg.b}, cfg.k);
  const LabelMap onehot = encode_onehot(scene.gt, table);

  Matrix logits(scene.gt.size(), cfg.k);
  for (std::size_t j = 0; j < logits.rows; ++j)
    for (std::size_t p = 0; p < cfg.k; ++p)
      logits(j, p) = onehot.data(j, p) > 0.5 ? 50.0 : -50.0;

  DepthMap pred = decode_soft_weighted(table, softmax(logits));
  pred.mask = scene.gt.mask;
  const DepthMetrics m = depth_metrics(pred, scene.gt);
  CHECK(m.abs_rel <= std::exp(table.q) - 1.0);
}

TEST_CASE("benchmark reports are deterministic and complete") {
  SynthConfig cfg = small_config();
  cfg.epochs = 20;
  cfg.seeds = {0, 1};
  cfg.strategies = {StrategyKind::LiOnehotCe, StrategyKind::DornOrdinal,
                    StrategyKind::AdabinsSi};

  const nlohmann::json r1 = run_benchmark(cfg, 1);
  const nlohmann::json r2 = run_benchmark(cfg, 1);
  const nlohmann::json r4 = run_benchmark(cfg, 4);
  CHECK(r1.dump() == r2.dump());
  CHECK(r1.dump() == r4.dump());

  REQUIRE(r1.at("cells").size() == 6);
  for (const auto& cell : r1.at("cells")) {
    REQUIRE(!cell.contains("error"));
    CHECK(cell.at("metrics").contains("rmse"));
    const auto& ause_block = cell.at("ause");
    if (cell.at("strategy") == "dorn-ordinal") {
      CHECK(ause_block.size() == 1);
      CHECK(ause_block.contains("e_dist_ordinal"));
    } else {
      CHECK(ause_block.size() == 3);
      CHECK(ause_block.contains("e_dist"));
    }
    for (const auto& [name, pair] : ause_block.items())
      CHECK((pair.contains("rmse") && pair.contains("abs_rel")));
  }

  SECTION("summary aggregates every selected strategy") {
    for (StrategyKind kind : cfg.strategies) {
      const auto& s = r1.at("summary").at(strategy_name(kind));
      REQUIRE(s.contains("ause_rmse"));
      for (const auto& [method, ms] : s.at("ause_rmse").items()) {
        CHECK(ms.contains("mean"));
        CHECK(ms.contains("stddev"));
      }
    }
  }

  SECTION("config embedding round trips") {
    const SynthConfig back = config_from_json(r1);
    const nlohmann::json r_again = run_benchmark(back, 1);
    CHECK(r_again.dump() == r1.dump());
  }
}

TEST_CASE("config json rejects unknown strategies") {
  nlohmann::json j;
  j["strategies"] = {"li-onehot-ce", "made-up"};
  CHECK_THROWS_MATCHES(config_from_json(j), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::BadConfig; }));
}
