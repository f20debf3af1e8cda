#include <cmath>

#include "test_util.hpp"

#include <carkit/gradcheck.hpp>

using namespace carkit;

namespace {

Matrix row2(double a, double b) {
  Matrix m(1, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("softmax") {
  const ProbMap p = softmax(row2(0.0, 0.0));
  CHECK(p.data(0, 0) == 0.5);
  CHECK(p.data(0, 1) == 0.5);
  CHECK(p.semantics == ProbSemantics::Softmax);

  SECTION("shift invariance") {
    Matrix m(1, 4);
    for (std::size_t p4 = 0; p4 < 4; ++p4) m(0, p4) = 123.75;
    const ProbMap u = softmax(m);
    for (std::size_t p4 = 0; p4 < 4; ++p4) CHECK_THAT(u.data(0, p4), WithinAbs(0.25, 1e-15));
  }

  SECTION("direct evaluation") {
    const ProbMap q = softmax(row2(0.0, std::log(3.0)));
    CHECK_THAT(q.data(0, 0), WithinAbs(0.25, 1e-15));
    CHECK_THAT(q.data(0, 1), WithinAbs(0.75, 1e-15));
  }

  SECTION("rejects non-finite input") {
    Matrix bad(1, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_MATCHES(softmax(bad), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::NonFinite; }));
  }
}

TEST_CASE("cross entropy") {
  const Mask one = full_mask(1);
  const LossResult r = ce_loss(row2(0.0, 0.0), row2(0.0, 1.0), one);
  CHECK_THAT(r.value, WithinAbs(0.693147, 1e-6));
  CHECK_THAT(r.grad(0, 0), WithinAbs(0.5, 1e-12));
  CHECK_THAT(r.grad(0, 1), WithinAbs(-0.5, 1e-12));

  CHECK(ce_loss(row2(-50.0, 50.0), row2(0.0, 1.0), one).value < 1e-20);
  CHECK_THAT(ce_loss(row2(0.0, std::log(3.0)), row2(1.0, 0.0), one).value,
             WithinAbs(1.386294, 1e-6));

  SECTION("shape mismatch") {
    Matrix target(2, 2);
    CHECK_THROWS_MATCHES(ce_loss(row2(0, 0), target, one), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::ShapeMismatch;
                         }));
  }
}

TEST_CASE("weighted cross entropy") {
  const Mask one = full_mask(1);
  CHECK_THAT(weighted_ce_loss(row2(0.0, 0.0), row2(0.5, 0.5), one).value,
             WithinAbs(0.693147, 1e-6));
  CHECK_THAT(weighted_ce_loss(row2(0.0, 0.0), row2(0.562175, 0.437825), one).value,
             WithinAbs(0.693147, 1e-6));

  SECTION("reduces to CE on one-hot targets") {
    CounterRng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix logits(4, 6);
      for (auto& x : logits.data) x = rng.next_uniform(-4.0, 4.0);
      Matrix target(4, 6);
      for (std::size_t j = 0; j < 4; ++j) target(j, rng.next_index(0, 5)) = 1.0;
      const Mask mask = full_mask(4);
      const LossResult ce = ce_loss(logits, target, mask);
      const LossResult wce = weighted_ce_loss(logits, target, mask);
      CHECK(ce.value == wce.value);
      CHECK(ce.grad.data == wce.grad.data);
    }
  }
}

TEST_CASE("multiple BCE") {
  const Mask one = full_mask(1);
  CHECK_THAT(multi_bce_loss(row2(0.0, 0.0), row2(1.0, 0.778801), one).value,
             WithinAbs(1.386294, 1e-6));

  Matrix single(1, 1);
  Matrix starget(1, 1);
  starget(0, 0) = 1.0;
  CHECK_THAT(multi_bce_loss(single, starget, one).value, WithinAbs(0.693147, 1e-6));

  SECTION("gradient is exactly zero when targets equal the sigmoid outputs") {
    Matrix logits(1, 3);
    logits(0, 0) = -1.3;
    logits(0, 1) = 0.4;
    logits(0, 2) = 2.2;
    Matrix target(1, 3);
    for (std::size_t p = 0; p < 3; ++p)
      target(0, p) = 1.0 / (1.0 + std::exp(-logits(0, p)));
    const LossResult r = multi_bce_loss(logits, target, one);
    for (double g : r.grad.data) CHECK(g == 0.0);
  }

  SECTION("rejects out-of-range targets") {
    CHECK_THROWS_MATCHES(multi_bce_loss(row2(0, 0), row2(1.2, 0.0), one), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::TargetOutOfRange;
                         }));
  }
}

TEST_CASE("ordinal loss") {
  const Mask one = full_mask(1);
  Matrix logits(1, 4);  // K = 2 pairs
  Matrix target = row2(1.0, 0.0);
  CHECK_THAT(ordinal_loss(logits, target, one).value, WithinAbs(1.386294, 1e-6));

  SECTION("K = 1 saturated pair") {
    Matrix l(1, 2);
    l(0, 0) = 0.0;
    l(0, 1) = 10.0;
    Matrix t(1, 1);
    t(0, 0) = 1.0;
    CHECK_THAT(ordinal_loss(l, t, one).value, WithinAbs(4.5399e-5, 1e-8));
  }

  SECTION("paired logits receive opposite gradients") {
    CounterRng rng(43);
    Matrix l(2, 6);
    for (auto& x : l.data) x = rng.next_uniform(-2.0, 2.0);
    Matrix t(2, 3);
    t(0, 0) = 1.0;
    t(1, 0) = 1.0;
    t(1, 1) = 1.0;
    const LossResult r = ordinal_loss(l, t, full_mask(2));
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t p = 0; p < 3; ++p)
        CHECK(r.grad(j, 2 * p) == -r.grad(j, 2 * p + 1));
  }

  SECTION("odd channel count is rejected") {
    Matrix l(1, 3);
    Matrix t(1, 1);
    CHECK_THROWS_MATCHES(ordinal_loss(l, t, one), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::OddChannels;
                         }));
  }
}

TEST_CASE("smooth L1 on probabilities") {
  const Mask one = full_mask(1);
  ProbMap probs;
  probs.semantics = ProbSemantics::Softmax;

  probs.data = row2(1.0, 0.0);
  CHECK(smooth_l1_loss(probs, {0}, one).value == 0.0);  // corrected target hits exactly
  CHECK_THAT(smooth_l1_loss(probs, {2}, one, SmoothL1Target::Literal).value,
             WithinAbs(0.5, 1e-12));  // |1-2| = 1 takes the linear branch

  probs.data = row2(0.0, 1.0);
  CHECK(smooth_l1_loss(probs, {1}, one).value == 0.0);  // expected index equals target

  SECTION("literal mode keeps the off-by-one penalty") {
    ProbMap onehot;
    onehot.semantics = ProbSemantics::Softmax;
    onehot.data = row2(1.0, 0.0);
    CHECK_THAT(smooth_l1_loss(onehot, {0}, one, SmoothL1Target::Literal).value,
               WithinAbs(0.5, 1e-12));
  }
}

TEST_CASE("smooth L1 probability gradient matches central differences") {
  CounterRng rng(131);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix probs(4, 5);
    for (std::size_t j = 0; j < 4; ++j) {
      double total = 0.0;
      for (std::size_t p = 0; p < 5; ++p) {
        probs(j, p) = rng.next_uniform(0.05, 1.0);
        total += probs(j, p);
      }
      for (std::size_t p = 0; p < 5; ++p) probs(j, p) /= total;
    }
    std::vector<int> classes(4);
    for (auto& c : classes) c = static_cast<int>(rng.next_index(0, 4));
    const Mask mask = full_mask(4);
    auto op = [&](const std::vector<double>& flat) {
      ProbMap p;
      p.semantics = ProbSemantics::Softmax;
      p.data.rows = 4;
      p.data.cols = 5;
      p.data.data = flat;
      return smooth_l1_loss(p, classes, mask);
    };
    // the loss is piecewise smooth in the probabilities themselves
    const LossResult at = op(probs.data);
    bool near_kink = false;
    for (std::size_t j = 0; j < 4; ++j) {
      double dhat = 0.0;
      for (std::size_t p = 0; p < 5; ++p) dhat += probs(j, p) * static_cast<double>(p + 1);
      near_kink |= std::abs(std::abs(dhat - (classes[j] + 1.0)) - 1.0) < 1e-3;
    }
    if (near_kink) continue;
    (void)at;
    CHECK(finite_diff_check(op, probs.data) <= 1e-6);
  }
}

TEST_CASE("paired sigmoid head") {
  Matrix logits(1, 4);
  logits(0, 0) = 0.0;
  logits(0, 1) = 10.0;
  logits(0, 2) = 1.0;
  logits(0, 3) = 1.0;
  const ProbMap p = paired_sigmoid(logits);
  CHECK(p.semantics == ProbSemantics::PerClassSigmoid);
  REQUIRE(p.data.cols == 2);
  CHECK_THAT(p.data(0, 0), WithinAbs(1.0 / (1.0 + std::exp(-10.0)), 1e-15));
  CHECK(p.data(0, 1) == 0.5);

  Matrix odd(1, 3);
  CHECK_THROWS_MATCHES(paired_sigmoid(odd), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::OddChannels; }));
}

TEST_CASE("scale-invariant loss") {
  GroundTruthDepth gt{{2.0, 5.0, 9.0}, full_mask(3)};
  DepthMap exact{{2.0, 5.0, 9.0}, full_mask(3)};
  CHECK(scale_invariant_loss(exact, gt).value == 0.0);

  SECTION("h = [0.1, -0.1] with omega 10") {
    GroundTruthDepth g{{1.0, 1.0}, full_mask(2)};
    DepthMap pred{{std::exp(0.1), std::exp(-0.1)}, full_mask(2)};
    CHECK_THAT(scale_invariant_loss(pred, g, 10.0, 0.85).value, WithinAbs(1.0, 1e-9));
  }

  SECTION("uniform scaling vanishes at lambda = 1") {
    DepthMap scaled{{2.0 * 1.7, 5.0 * 1.7, 9.0 * 1.7}, full_mask(3)};
    CHECK_THAT(scale_invariant_loss(scaled, gt, 10.0, 1.0).value, WithinAbs(0.0, 1e-9));
  }

  SECTION("nonpositive prediction") {
    DepthMap bad{{2.0, -5.0, 9.0}, full_mask(3)};
    CHECK_THROWS_MATCHES(scale_invariant_loss(bad, gt), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::NonPositiveDepth;
                         }));
  }
}

TEST_CASE("losses ignore masked-out pixels") {
  CounterRng rng(47);
  Matrix logits(6, 4);
  for (auto& x : logits.data) x = rng.next_uniform(-3.0, 3.0);
  Matrix target(6, 4);
  for (std::size_t j = 0; j < 6; ++j) target(j, rng.next_index(0, 3)) = 1.0;
  Mask mask(6, 1);
  mask[2] = 0;
  mask[5] = 0;

  const LossResult masked = ce_loss(logits, target, mask);
  for (std::size_t p = 0; p < 4; ++p) {
    CHECK(masked.grad(2, p) == 0.0);
    CHECK(masked.grad(5, p) == 0.0);
  }

  // the same pixels packed densely give the same value
  Matrix packed_logits(4, 4), packed_target(4, 4);
  std::size_t row = 0;
  for (std::size_t j = 0; j < 6; ++j) {
    if (!mask[j]) continue;
    for (std::size_t p = 0; p < 4; ++p) {
      packed_logits(row, p) = logits(j, p);
      packed_target(row, p) = target(j, p);
    }
    ++row;
  }
  CHECK(ce_loss(packed_logits, packed_target, full_mask(4)).value == masked.value);

  SECTION("empty mask is rejected") {
    CHECK_THROWS_MATCHES(ce_loss(logits, target, Mask(6, 0)), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.kind() == ErrorKind::EmptyMask; }));
  }
}

TEST_CASE("loss value is invariant to pixel order") {
  CounterRng rng(59);
  Matrix logits(8, 3), target(8, 3);
  for (auto& x : logits.data) x = rng.next_uniform(-3.0, 3.0);
  for (std::size_t j = 0; j < 8; ++j) target(j, rng.next_index(0, 2)) = 1.0;
  Matrix rev_logits(8, 3), rev_target(8, 3);
  for (std::size_t j = 0; j < 8; ++j)
    for (std::size_t p = 0; p < 3; ++p) {
      rev_logits(7 - j, p) = logits(j, p);
      rev_target(7 - j, p) = target(j, p);
    }
  const Mask mask = full_mask(8);
  CHECK_THAT(ce_loss(rev_logits, rev_target, mask).value,
             WithinRel(ce_loss(logits, target, mask).value, 1e-12));
  CHECK_THAT(multi_bce_loss(rev_logits, rev_target, mask).value,
             WithinRel(multi_bce_loss(logits, target, mask).value, 1e-12));
}

TEST_CASE("analytic gradients match central differences") {
  // short smoke run; the acceptance suite runs the full 100-trial version
  for (const auto& c : gradient_check_suite("all", 10, 101)) {
    INFO(c.name);
    CHECK(c.max_error <= c.tolerance);
  }
}

TEST_CASE("losses are nonnegative at random points") {
  CounterRng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix logits(5, 4);
    for (auto& x : logits.data) x = rng.next_uniform(-6.0, 6.0);
    Matrix onehot(5, 4), soft(5, 4);
    for (std::size_t j = 0; j < 5; ++j) {
      onehot(j, rng.next_index(0, 3)) = 1.0;
      for (std::size_t p = 0; p < 4; ++p) soft(j, p) = rng.next_unit();
    }
    const Mask mask = full_mask(5);
    CHECK(ce_loss(logits, onehot, mask).value >= 0.0);
    CHECK(weighted_ce_loss(logits, soft, mask).value >= 0.0);
    CHECK(multi_bce_loss(logits, soft, mask).value >= 0.0);
  }
}
