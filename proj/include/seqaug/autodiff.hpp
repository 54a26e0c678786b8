#pragma once

// Reverse-mode differentiation over dense f64 matrices.
//
// A Tape records every node produced during a forward pass in creation
// order, which is already a topological order, so backward() walks the
// tape from the root towards the leaves exactly once. Vars are cheap
// handles (tape pointer + index) and become invalid when the tape is
// cleared.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqaug::ad {

using Matrix = Eigen::MatrixXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient after backward(); a zero matrix of value's shape if none flowed.
  Matrix grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }

  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

// Receives the gradient of the node's output and pushes contributions to
// its parents through Tape::accumulate.
using BackwardFn = std::function<void(Tape&, const Matrix& grad_out)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value, bool requires_grad = true);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  // Registers a node computed from `parents`. The backward closure is
  // dropped when no parent requires a gradient.
  Var record(std::string_view op, Matrix value, std::initializer_list<Var> parents,
             BackwardFn backward);

  // Seeds d(root)/d(root) = 1 (root must be 1x1) and propagates. Gradients
  // from any previous pass are discarded first.
  void backward(Var root);

  void accumulate(Var target, const Matrix& contribution);
  void accumulate(Var target, Matrix&& contribution);
  void accumulate_rows(Var target, std::span<const std::int64_t> rows, const Matrix& contribution);

  void clear();
  std::size_t size() const { return nodes_.size(); }

  const Matrix& value_of(std::size_t i) const { return nodes_[i].value; }
  const Matrix* grad_of(std::size_t i) const;
  bool requires_grad_of(std::size_t i) const { return nodes_[i].requires_grad; }
  std::string_view op_of(std::size_t i) const { return nodes_[i].op; }

  // Name of the first node holding a NaN/Inf value, empty if none.
  std::string first_non_finite_op() const;

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::string_view op;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Primitive set. Every primitive has a paired finite-difference test.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scalar_mul(Var a, double s);
Var hadamard(Var a, Var b);
// Softmax over each row. Entries where `keep` is false get probability 0;
// a row with nothing kept is all zeros.
Var row_softmax(Var a);
Var row_softmax(Var a, const Mask& keep);
Var row_sum(Var a);  // rows x 1
Var col_sum(Var a);  // 1 x cols
// Divides row i by v(i) when v is rows x 1, or column j by v(j) when v is
// 1 x cols. Denominators are clamped to at least kDivGuard in both passes.
Var broadcast_div(Var a, Var v);
Var exp(Var a);
Var log(Var a);
Var relu_hinge(Var a);
Var l2_norm_sq(Var a);  // 1 x 1, sum of squared entries
// Pairwise cosine similarity between the rows of a and the rows of b.
Var cosine_similarity(Var a, Var b);
// Zeroes flagged rows and columns; no gradient flows through them.
Var mask_assign(Var a, const std::vector<bool>& zero_rows, const std::vector<bool>& zero_cols);
// Forward passes the value; backward contributes nothing.
Var constant_view(Var a);
// Selects table rows by id; negative ids produce a zero row with no gradient.
Var gather_rows(Var table, std::span<const std::int64_t> ids);

inline constexpr double kDivGuard = 1e-12;

// ---------------------------------------------------------------------------
// Compositions of primitives.

Var sum(Var a);
Var mean(Var a);
Var add_scalar(Var a, double c);
// Stacks 1 x c rows into an r x c matrix (via selector products).
Var stack_rows(std::span<const Var> rows);
inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double s, Var a) { return scalar_mul(a, s); }

// ---------------------------------------------------------------------------

using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_analytic = 0.0;
};

// Central-difference check of every input entry:
//   max |analytic - fd| / max(1, |fd|).
// Throws NumericalError naming the op when a non-finite value shows up.
GradCheckResult grad_check(const ScalarFn& f, std::span<const Matrix> point, double h = 1e-5);

}  // namespace seqaug::ad
