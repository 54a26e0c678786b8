#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "seqaug/augment.hpp"
#include "seqaug/errors.hpp"
#include "seqaug/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace seqaug;
using Eigen::MatrixXd;

namespace {

// DCG read off the view itself: the item at view position j carries its
// relevance (1-based source index, 0 for pads) and is discounted by its
// recency rank n - j.
double brute_dcg(const std::vector<ItemId>& view, std::size_t s_len, std::vector<double> rel_override = {}) {
  const std::size_t n = view.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (view[j] == kSentinel) continue;
    const auto src = static_cast<std::size_t>(view[j]);
    double rel = src < s_len ? static_cast<double>(src + 1) : 0.0;
    if (!rel_override.empty()) rel = rel_override[src];
    total += rel / std::log2(static_cast<double>(n - j) + 1.0);
  }
  return total;
}

double brute_ndcg(const TransformMatrix& m, std::size_t s_len) {
  std::vector<ItemId> source(m.size());
  std::iota(source.begin(), source.end(), 0);
  const std::vector<ItemId> view = apply_items(m, source);
  std::vector<ItemId> ideal(m.size(), kSentinel);
  for (std::size_t i = 0; i < s_len; ++i) ideal[i] = static_cast<ItemId>(i);
  return brute_dcg(view, s_len) / brute_dcg(ideal, s_len);
}

ObjectiveConfig objective(double eps = 20.0) {
  ObjectiveConfig c;
  c.epsilon = eps;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  ObjectiveConfig c;
  CHECK_NOTHROW(c.check());
  c.gamma = 0;
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c.gamma = 0.1;
  c.tau = 0;
  CHECK_THROWS_AS(c.check(), InvalidArgument);
  c.tau = 0.5;
  c.lambda_div = -1;
  CHECK_THROWS_AS(c.check(), InvalidArgument);
}

TEST_CASE("diversity loss examples") {
  ad::Tape t;
  const MatrixXd a = MatrixXd::Identity(6, 6);
  CHECK(diversity_loss(t.constant(a), t.constant(a), objective()).scalar() == 20.0);
  MatrixXd b = MatrixXd::Zero(6, 6);
  for (int i = 0; i < 5; ++i) b(i, i + 1) = 1;  // 11 differing entries
  CHECK(diversity_loss(t.constant(a), t.constant(b), objective()).scalar() == 9.0);
  // 16 and 25 differing entries
  MatrixXd c = MatrixXd::Zero(8, 8), d = MatrixXd::Zero(8, 8);
  for (int i = 0; i < 8; ++i) c(i, i) = 1, d(i, (i + 1) % 8) = 1;
  CHECK(diversity_loss(t.constant(c), t.constant(d), objective()).scalar() == 4.0);
  MatrixXd e = MatrixXd::Zero(13, 13), f = MatrixXd::Zero(13, 13);
  for (int i = 0; i < 12; ++i) e(i, i) = 1;
  for (int i = 0; i < 13; ++i) f(i, (i + 1) % 13) = 1;
  CHECK(diversity_loss(t.constant(e), t.constant(f), objective()).scalar() == 0.0);
}

TEST_CASE("diversity loss stays in [0, epsilon]") {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    ad::Tape t;
    const MatrixXd a = MatrixXd::Random(5, 5), b = MatrixXd::Random(5, 5);
    const double l = diversity_loss(t.constant(a), t.constant(b), objective(3.0)).scalar();
    CHECK(l >= 0.0);
    CHECK(l <= 3.0);
    const double gap = (a - b).squaredNorm();
    CHECK(l == doctest::Approx(std::max(0.0, 3.0 - gap)).epsilon(1e-12));
  }
}

TEST_CASE("seq_ndcg examples") {
  ad::Tape t;
  const RelevanceProfile p3 = make_profile(3, 3, 0.1);
  CHECK(seq_ndcg_value(MatrixXd::Identity(3, 3), p3) == 1.0);
  for (std::size_t n = 1; n <= 60; ++n) {
    for (std::size_t s_len = 1; s_len <= n; ++s_len) {
      MatrixXd id = MatrixXd::Zero(n, n);
      id.topLeftCorner(s_len, s_len).setIdentity();
      CHECK(seq_ndcg_value(id, make_profile(s_len, n, 0.1)) == 1.0);
    }
  }
  CHECK(seq_ndcg(t.constant(MatrixXd::Identity(3, 3)), p3).scalar() == doctest::Approx(1.0).epsilon(1e-15));
  const MatrixXd rev = MatrixXd::Identity(3, 3).rowwise().reverse();
  CHECK(std::abs(seq_ndcg_value(rev, p3) - 0.7900) < 1e-4);
  const double expected = (1.0 + 2.0 / std::log2(3.0) + 1.5) / (3.0 + 2.0 / std::log2(3.0) + 0.5);
  CHECK(std::abs(seq_ndcg_value(rev, p3) - expected) < 1e-15);
  CHECK(seq_ndcg_value(MatrixXd::Zero(3, 3), p3) == 0.0);
  CHECK_THROWS_AS(make_profile(0, 3, 0.1), DomainError);
}

TEST_CASE("seq_ndcg matches the brute-force oracle on every permutation up to n = 7") {
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 7; ++n) {
    std::vector<std::int64_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      const TransformMatrix m = TransformMatrix::from_targets(perm);
      for (std::size_t s_len = 1; s_len <= n; ++s_len) {
        const RelevanceProfile prof = make_profile(s_len, n, 0.1);
        CHECK(std::abs(seq_ndcg_value(m.dense(), prof) - brute_ndcg(m, s_len)) <= 1e-12);
        ++checked;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  CHECK(checked > 5000);
}

TEST_CASE("seq_ndcg matches the oracle on random semi-doubly-stochastic matrices") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t s_len = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    const std::size_t n = s_len + std::uniform_int_distribution<std::size_t>(0, 5)(rng);
    const TransformMatrix a = random_augmentation(kAllAugmentKinds[trial % 5], n, s_len, 0.3, rng);
    const TransformMatrix b = random_augmentation(kAllAugmentKinds[(trial + 2) % 5], n, s_len, 0.3, rng);
    const TransformMatrix m = compose(a, b);
    const RelevanceProfile prof = make_profile(s_len, n, 0.1);
    CHECK(std::abs(seq_ndcg_value(m.dense(), prof) - brute_ndcg(m, s_len)) <= 1e-12);
  }
}

TEST_CASE("seq_ndcg is linear in the matrix") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const RelevanceProfile prof = make_profile(6, 8, 0.1);
    const MatrixXd a = MatrixXd::Random(8, 8).cwiseAbs(), b = MatrixXd::Random(8, 8).cwiseAbs();
    const double alpha = u(rng);
    const double lhs = seq_ndcg_value(alpha * a + (1 - alpha) * b, prof) * prof.idcg;
    const double rhs = alpha * dcg(a, prof) + (1 - alpha) * dcg(b, prof);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("ndcg_star examples and monotonicity") {
  CHECK(std::abs(ndcg_star(4, 0.5) - 0.1954) < 1e-4);
  const double dcg_star = 2.0 / std::log2(4.0) + 1.0 / std::log2(5.0);
  const double idcg = 4.0 + 3.0 / std::log2(3.0) + 1.0 + 1.0 / std::log2(5.0);
  CHECK(std::abs(ndcg_star(4, 0.5) - dcg_star / idcg) < 1e-15);
  CHECK(ndcg_star(4, 1.0) == 0.0);
  CHECK(worst_case_count(50, 0.1) == 5);
  CHECK(worst_case_count(3, 0.1) == 1);
  for (std::size_t s = 1; s <= 40; ++s) {
    double prev = 1.0;
    for (double g = 0.05; g <= 1.0; g += 0.05) {
      const double v = ndcg_star(s, g);
      CHECK(v <= prev + 1e-15);
      CHECK(v >= 0.0);
      prev = v;
    }
  }
}

TEST_CASE("ndcg_star agrees with brute force after zeroing the most recent items") {
  for (std::size_t s = 1; s <= 20; ++s) {
    for (std::size_t extra = 0; extra <= 3; ++extra) {
      const std::size_t n = s + extra;
      const std::size_t c = worst_case_count(s, 0.1);
      std::vector<double> rel(n, 0.0);
      for (std::size_t i = 0; i + c < s; ++i) rel[i] = static_cast<double>(i + 1);
      std::vector<ItemId> view(n, kSentinel);
      for (std::size_t i = 0; i < s; ++i) view[i] = static_cast<ItemId>(i);
      const double expected = brute_dcg(view, s, rel) / brute_dcg(view, s);
      CHECK(std::abs(ndcg_star(s, n, 0.1) - expected) < 1e-12);
    }
  }
}

TEST_CASE("semantic loss examples") {
  ad::Tape t;
  const RelevanceProfile p = make_profile(4, 4, 0.5);
  const ad::Var id = t.constant(MatrixXd::Identity(4, 4));
  const ad::Var zero = t.constant(MatrixXd::Zero(4, 4));
  CHECK(semantic_loss(id, id, p).scalar() == 0.0);
  CHECK(std::abs(semantic_loss(zero, zero, p).scalar() - 0.3908) < 1e-4);
  CHECK(semantic_loss(zero, zero, p).scalar() == doctest::Approx(2 * p.ndcg_star).epsilon(1e-14));
  // a view scaled to land exactly on NDCG*
  const ad::Var boundary = t.constant(MatrixXd::Identity(4, 4) * p.ndcg_star);
  CHECK(semantic_loss(id, boundary, p).scalar() < 1e-15);
}

TEST_CASE("infonce values") {
  ad::Tape t;
  const ad::Var a = t.constant(MatrixXd::Identity(2, 2));
  const ad::Var b = t.constant(MatrixXd::Identity(2, 2));
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
  CHECK(std::abs(infonce(a, b, 1.0, Agreement::Maximize).scalar() - 0.3133) < 1e-4);
  CHECK(std::abs(infonce(a, b, 1.0, Agreement::Maximize).scalar() - expected) < 1e-12);

  for (std::size_t batch : {2u, 3u, 7u}) {
    for (double tau : {0.1, 0.5, 2.0}) {
      const ad::Var same = t.constant(MatrixXd::Ones(batch, 4));
      CHECK(std::abs(infonce(same, same, tau, Agreement::Maximize).scalar() - std::log(double(batch))) < 1e-9);
    }
  }

  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const ad::Var x = t.constant(MatrixXd::Random(6, 5));
    const ad::Var y = t.constant(MatrixXd::Random(6, 5));
    const double up = infonce(x, y, 0.5, Agreement::Maximize).scalar();
    CHECK(up >= 0.0);
    CHECK(infonce(x, y, 0.5, Agreement::Minimize).scalar() == -up);
  }
  CHECK_THROWS_AS(infonce(t.constant(MatrixXd::Zero(2, 3)), t.constant(MatrixXd::Ones(2, 3)), 1.0, Agreement::Maximize),
                  DomainError);
  CHECK_THROWS_AS(infonce(t.constant(MatrixXd::Ones(1, 3)), t.constant(MatrixXd::Ones(1, 3)), 1.0, Agreement::Maximize),
                  InvalidArgument);
}

TEST_CASE("infonce gradient passes a finite-difference check") {
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<MatrixXd> point{MatrixXd::Random(4, 3), MatrixXd::Random(4, 3)};
    for (Agreement dir : {Agreement::Maximize, Agreement::Minimize}) {
      const auto r = ad::grad_check(
          [dir](ad::Tape&, std::span<const ad::Var> in) { return infonce(in[0], in[1], 0.5, dir); }, point);
      CHECK(r.max_rel_error < 1e-5);
    }
  }
}

TEST_CASE("joint generator loss") {
  ad::Tape t;
  const auto s = [&t](double v) { return t.constant(MatrixXd::Constant(1, 1, v)); };
  ObjectiveConfig c;
  CHECK(joint_generator_loss(s(0.3), s(4.0), s(0.39), c).scalar() == doctest::Approx(4.69).epsilon(1e-14));
  c.lambda_div = c.lambda_ndcg = 0;
  CHECK(joint_generator_loss(s(0.3), s(4.0), s(0.39), c).scalar() == 0.3);
}
