#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "seqaug/autodiff.hpp"
#include "seqaug/errors.hpp"
#include "seqaug/harness.hpp"

#include <cmath>
#include <set>

using namespace seqaug;
using ad::Matrix;
using ad::Var;

TEST_CASE("row_softmax of equal entries is uniform") {
  ad::Tape t;
  const Var x = t.leaf(Matrix::Constant(1, 4, 3.7));
  const Var y = ad::row_softmax(x);
  for (int j = 0; j < 4; ++j) CHECK(y.value()(0, j) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("product rule: d(xy)/dx at (2,3) is 3") {
  ad::Tape t;
  const Var x = t.leaf(Matrix::Constant(1, 1, 2.0));
  const Var y = t.leaf(Matrix::Constant(1, 1, 3.0));
  t.backward(ad::hadamard(x, y));
  CHECK(x.grad()(0, 0) == 3.0);
  CHECK(y.grad()(0, 0) == 2.0);
}

TEST_CASE("gradients accumulate across consumers: x + x has gradient 2") {
  ad::Tape t;
  const Var x = t.leaf(Matrix::Random(2, 3));
  t.backward(ad::sum(ad::add(x, x)));
  CHECK(x.grad().isApprox(Matrix::Constant(2, 3, 2.0)));
}

TEST_CASE("backward resets gradients between passes") {
  ad::Tape t;
  const Var x = t.leaf(Matrix::Random(2, 2));
  const Var s = ad::sum(x);
  t.backward(s);
  t.backward(s);
  CHECK(x.grad().isApprox(Matrix::Ones(2, 2)));
}

TEST_CASE("row_softmax gradient matches finite differences on a random 5x5 input") {
  const std::vector<Matrix> point{Matrix::Random(5, 5) * 2.0};
  const Matrix w = Matrix::Random(5, 5);
  const auto r = ad::grad_check(
      [&w](ad::Tape& t, std::span<const Var> in) { return ad::sum(ad::hadamard(ad::row_softmax(in[0]), t.constant(w))); },
      point);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("grad_check on sum of squares") {
  const std::vector<Matrix> point{Matrix::Random(3, 3)};
  const auto r = ad::grad_check([](ad::Tape&, std::span<const Var> in) { return ad::l2_norm_sq(in[0]); }, point);
  CHECK(r.max_rel_error < 1e-8);
}

TEST_CASE("constant_view on the only input gives an exactly zero gradient") {
  ad::Tape t;
  const Var x = t.leaf(Matrix::Random(3, 2));
  t.backward(ad::l2_norm_sq(ad::constant_view(x)));
  CHECK(x.grad().isZero(0.0));
}

TEST_CASE("shape mismatch names both shapes") {
  ad::Tape t;
  const Var a = t.leaf(Matrix::Zero(2, 3));
  const Var b = t.leaf(Matrix::Zero(2, 3));
  try {
    ad::matmul(a, b);
    FAIL("expected a DimensionError");
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    CHECK(what.find("2x3") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::add(a, t.leaf(Matrix::Zero(3, 2))), DimensionError);
}

TEST_CASE("backward through a constant-only graph is a no-op") {
  ad::Tape t;
  const Var c = t.constant(Matrix::Ones(2, 2));
  CHECK_NOTHROW(t.backward(ad::sum(c)));
  CHECK(c.grad().isZero(0.0));
}

TEST_CASE("grad_check reports the op producing a non-finite value") {
  const std::vector<Matrix> point{Matrix::Constant(1, 1, -1.0)};
  try {
    ad::grad_check([](ad::Tape&, std::span<const Var> in) { return ad::sum(ad::log(in[0])); }, point);
    FAIL("expected a NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("log") != std::string::npos);
  }
}

TEST_CASE("broadcast_div guard keeps zero rows finite in both passes") {
  ad::Tape t;
  Matrix a = Matrix::Random(3, 3).cwiseAbs();
  a.row(1).setZero();
  const Var x = t.leaf(a);
  const Var y = ad::broadcast_div(x, ad::row_sum(x));
  t.backward(ad::sum(ad::hadamard(y, t.constant(Matrix::Random(3, 3)))));
  CHECK(y.value().allFinite());
  CHECK(y.value().row(1).isZero(0.0));
  CHECK(x.grad().allFinite());
}

TEST_CASE("gather_rows: sentinel ids give zero rows and receive no gradient") {
  ad::Tape t;
  const Var table = t.leaf(Matrix::Random(4, 2));
  const std::vector<std::int64_t> ids{2, -1, 2};
  const Var g = ad::gather_rows(table, ids);
  CHECK(g.value().row(1).isZero(0.0));
  t.backward(ad::sum(g));
  CHECK(table.grad().row(2).isApprox(Eigen::RowVector2d(2.0, 2.0)));
  CHECK(table.grad().row(0).isZero(0.0));
}

TEST_CASE("every primitive matches finite differences over 100 random trials") {
  // The registry also lists composite losses; the primitive entries are
  // checked here at the tighter tolerance.
  const std::set<std::string> primitives{"matmul",       "transpose",          "add",           "sub",
                                         "scalar_mul",   "hadamard",           "row_softmax",   "row_softmax_masked",
                                         "row_sum",      "col_sum",            "broadcast_div", "exp",
                                         "log",          "relu_hinge",         "l2_norm_sq",    "cosine_similarity",
                                         "mask_assign",  "constant_view",      "gather_rows",   "stack_rows"};
  std::vector<GradCheckItem> items;
  for (const GradCheckItem& item : gradcheck_registry()) {
    if (primitives.count(item.name)) items.push_back(item);
  }
  CHECK(items.size() == primitives.size());
  for (const GradCheckLine& line : run_gradchecks(items, 100, 1e-5, 7)) {
    INFO(line.name << " worst " << line.worst << " " << line.error);
    CHECK(line.pass);
  }
}
