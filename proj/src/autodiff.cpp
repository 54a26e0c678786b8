#include "seqaug/autodiff.hpp"

#include "seqaug/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seqaug::ad {

namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

void require_same_shape(std::string_view op, Var a, Var b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a.value()) + " vs " +
                         shape(b.value()));
  }
}

void require_same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw Error("operands recorded on different tapes");
}

}  // namespace

// ---------------------------------------------------------------------------
// Var

const Matrix& Var::value() const { return tape_->value_of(index_); }

Matrix Var::grad() const {
  const Matrix* g = tape_->grad_of(index_);
  if (g == nullptr) return Matrix::Zero(rows(), cols());
  return *g;
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw DimensionError("scalar(): node is " + shape(v));
  return v(0, 0);
}

bool Var::requires_grad() const { return tape_->requires_grad_of(index_); }

// ---------------------------------------------------------------------------
// Tape

Var Tape::leaf(Matrix value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, "leaf", nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Matrix value, std::initializer_list<Var> parents,
                 BackwardFn backward) {
  bool any = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw Error(std::string(op) + ": parent recorded on a different tape");
    any = any || nodes_[p.index()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), any, op, any ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw Error("backward: root recorded on a different tape");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  Node& r = nodes_[root.index()];
  if (r.value.size() != 1) throw DimensionError("backward: root must be 1x1, got " + shape(r.value));
  if (!r.requires_grad) return;
  r.grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.index() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

void Tape::accumulate(Var target, const Matrix& contribution) {
  Node& n = nodes_[target.index()];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = contribution;
  } else {
    n.grad += contribution;
  }
}

void Tape::accumulate(Var target, Matrix&& contribution) {
  Node& n = nodes_[target.index()];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = std::move(contribution);
  } else {
    n.grad += contribution;
  }
}

void Tape::accumulate_rows(Var target, std::span<const std::int64_t> rows,
                           const Matrix& contribution) {
  Node& n = nodes_[target.index()];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0) continue;
    n.grad.row(rows[r]) += contribution.row(static_cast<Eigen::Index>(r));
  }
}

void Tape::clear() { nodes_.clear(); }

const Matrix* Tape::grad_of(std::size_t i) const {
  const Node& n = nodes_[i];
  return n.grad.size() == 0 ? nullptr : &n.grad;
}

std::string Tape::first_non_finite_op() const {
  for (const Node& n : nodes_) {
    if (!n.value.allFinite()) return std::string(n.op);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Primitives

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + shape(a.value()) + " vs " + shape(b.value()));
  }
  return a.tape()->record("matmul", a.value() * b.value(), {a, b},
                          [a, b](Tape& t, const Matrix& g) {
                            if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
                            if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
                          });
}

Var transpose(Var a) {
  return a.tape()->record("transpose", a.value().transpose(), {a},
                          [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("add", a, b);
  return a.tape()->record("add", a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("sub", a, b);
  return a.tape()->record("sub", a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var scalar_mul(Var a, double s) {
  return a.tape()->record("scalar_mul", s * a.value(), {a},
                          [a, s](Tape& t, const Matrix& g) { t.accumulate(a, s * g); });
}

Var hadamard(Var a, Var b) {
  require_same_tape(a, b);
  require_same_shape("hadamard", a, b);
  return a.tape()->record("hadamard", a.value().cwiseProduct(b.value()), {a, b},
                          [a, b](Tape& t, const Matrix& g) {
                            if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
                            if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
                          });
}

namespace {

Matrix softmax_rows(const Matrix& x, const Mask* keep) {
  Matrix y = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (keep == nullptr || (*keep)(i, j)) mx = std::max(mx, x(i, j));
    }
    if (!std::isfinite(mx)) continue;
    double z = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (keep == nullptr || (*keep)(i, j)) {
        y(i, j) = std::exp(x(i, j) - mx);
        z += y(i, j);
      }
    }
    y.row(i) /= z;
  }
  return y;
}

Var row_softmax_impl(Var a, const Mask* keep) {
  if (keep != nullptr && (keep->rows() != a.rows() || keep->cols() != a.cols())) {
    throw DimensionError("row_softmax: mask shape does not match input " + shape(a.value()));
  }
  Matrix y = softmax_rows(a.value(), keep);
  return a.tape()->record("row_softmax", y, {a}, [a, y](Tape& t, const Matrix& g) {
    const Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
    t.accumulate(a, y.cwiseProduct(g.colwise() - dot));
  });
}

}  // namespace

Var row_softmax(Var a) { return row_softmax_impl(a, nullptr); }
Var row_softmax(Var a, const Mask& keep) { return row_softmax_impl(a, &keep); }

Var row_sum(Var a) {
  return a.tape()->record("row_sum", a.value().rowwise().sum(), {a},
                          [a](Tape& t, const Matrix& g) {
                            t.accumulate(a, g.replicate(1, a.cols()));
                          });
}

Var col_sum(Var a) {
  return a.tape()->record("col_sum", a.value().colwise().sum(), {a},
                          [a](Tape& t, const Matrix& g) {
                            t.accumulate(a, g.replicate(a.rows(), 1));
                          });
}

Var broadcast_div(Var a, Var v) {
  require_same_tape(a, v);
  const bool by_row = v.cols() == 1 && v.rows() == a.rows();
  const bool by_col = v.rows() == 1 && v.cols() == a.cols();
  if (!by_row && !by_col) {
    throw DimensionError("broadcast_div: divisor " + shape(v.value()) +
                         " is neither a row nor a column vector for " + shape(a.value()));
  }
  const Eigen::VectorXd guarded =
      Eigen::Map<const Eigen::VectorXd>(v.value().data(), v.value().size()).cwiseMax(kDivGuard);
  Matrix out = a.value();
  if (by_row) {
    out.array().colwise() /= guarded.array();
  } else {
    out.array().rowwise() /= guarded.transpose().array();
  }
  return a.tape()->record(
      "broadcast_div", std::move(out), {a, v}, [a, v, guarded, by_row](Tape& t, const Matrix& g) {
        const Eigen::VectorXd raw =
            Eigen::Map<const Eigen::VectorXd>(v.value().data(), v.value().size());
        if (by_row) {
          if (a.requires_grad()) {
            Matrix ga = g;
            ga.array().colwise() /= guarded.array();
            t.accumulate(a, std::move(ga));
          }
          if (v.requires_grad()) {
            Eigen::VectorXd gv = -(g.cwiseProduct(a.value()).rowwise().sum().array() /
                                   guarded.array().square())
                                      .matrix();
            for (Eigen::Index i = 0; i < gv.size(); ++i) {
              if (raw(i) < kDivGuard) gv(i) = 0.0;
            }
            t.accumulate(v, gv);
          }
        } else {
          if (a.requires_grad()) {
            Matrix ga = g;
            ga.array().rowwise() /= guarded.transpose().array();
            t.accumulate(a, std::move(ga));
          }
          if (v.requires_grad()) {
            Eigen::RowVectorXd gv = -(g.cwiseProduct(a.value()).colwise().sum().array() /
                                      guarded.transpose().array().square())
                                         .matrix();
            for (Eigen::Index j = 0; j < gv.size(); ++j) {
              if (raw(j) < kDivGuard) gv(j) = 0.0;
            }
            t.accumulate(v, gv);
          }
        }
      });
}

Var exp(Var a) {
  Matrix y = a.value().array().exp().matrix();
  return a.tape()->record("exp", y, {a}, [a, y](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(y));
  });
}

Var log(Var a) {
  return a.tape()->record("log", a.value().array().log().matrix(), {a},
                          [a](Tape& t, const Matrix& g) {
                            t.accumulate(a, g.cwiseQuotient(a.value()));
                          });
}

Var relu_hinge(Var a) {
  return a.tape()->record("relu_hinge", a.value().cwiseMax(0.0), {a},
                          [a](Tape& t, const Matrix& g) {
                            t.accumulate(a, (a.value().array() > 0.0).select(g, 0.0));
                          });
}

Var l2_norm_sq(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return a.tape()->record("l2_norm_sq", std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, (2.0 * g(0, 0)) * a.value());
  });
}

Var cosine_similarity(Var a, Var b) {
  require_same_tape(a, b);
  if (a.cols() != b.cols()) {
    throw DimensionError("cosine_similarity: shape mismatch " + shape(a.value()) + " vs " +
                         shape(b.value()));
  }
  const Eigen::VectorXd na = a.value().rowwise().norm();
  const Eigen::VectorXd nb = b.value().rowwise().norm();
  if ((na.array() == 0.0).any() || (nb.array() == 0.0).any()) {
    throw DomainError("cosine_similarity: degenerate zero-norm vector");
  }
  Matrix ua = a.value();
  ua.array().colwise() /= na.array();
  Matrix ub = b.value();
  ub.array().colwise() /= nb.array();
  Matrix c = ua * ub.transpose();
  return a.tape()->record(
      "cosine_similarity", c, {a, b}, [a, b, na, nb, ua, ub, c](Tape& t, const Matrix& g) {
        const Matrix gc = g.cwiseProduct(c);
        if (a.requires_grad()) {
          Matrix ga = g * ub;
          ga -= (ua.array().colwise() * gc.rowwise().sum().array()).matrix();
          ga.array().colwise() /= na.array();
          t.accumulate(a, std::move(ga));
        }
        if (b.requires_grad()) {
          Matrix gb = g.transpose() * ua;
          gb -= (ub.array().colwise() * gc.colwise().sum().transpose().array()).matrix();
          gb.array().colwise() /= nb.array();
          t.accumulate(b, std::move(gb));
        }
      });
}

Var mask_assign(Var a, const std::vector<bool>& zero_rows, const std::vector<bool>& zero_cols) {
  if (static_cast<Eigen::Index>(zero_rows.size()) != a.rows() ||
      static_cast<Eigen::Index>(zero_cols.size()) != a.cols()) {
    throw DimensionError("mask_assign: masks " + std::to_string(zero_rows.size()) + "/" +
                         std::to_string(zero_cols.size()) + " do not match " + shape(a.value()));
  }
  auto apply = [zero_rows, zero_cols](Matrix m) {
    for (std::size_t i = 0; i < zero_rows.size(); ++i) {
      if (zero_rows[i]) m.row(static_cast<Eigen::Index>(i)).setZero();
    }
    for (std::size_t j = 0; j < zero_cols.size(); ++j) {
      if (zero_cols[j]) m.col(static_cast<Eigen::Index>(j)).setZero();
    }
    return m;
  };
  return a.tape()->record("mask_assign", apply(a.value()), {a},
                          [a, apply](Tape& t, const Matrix& g) { t.accumulate(a, apply(g)); });
}

Var constant_view(Var a) { return a.tape()->constant(a.value()); }

Var gather_rows(Var table, std::span<const std::int64_t> ids) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0) continue;
    if (ids[r] >= table.rows()) {
      throw DimensionError("gather_rows: id " + std::to_string(ids[r]) + " out of range for " +
                           shape(table.value()));
    }
    out.row(static_cast<Eigen::Index>(r)) = table.value().row(ids[r]);
  }
  std::vector<std::int64_t> kept(ids.begin(), ids.end());
  return table.tape()->record("gather_rows", std::move(out), {table},
                              [table, kept = std::move(kept)](Tape& t, const Matrix& g) {
                                t.accumulate_rows(table, kept, g);
                              });
}

// ---------------------------------------------------------------------------
// Compositions

Var sum(Var a) { return col_sum(row_sum(a)); }

Var mean(Var a) { return scalar_mul(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var add_scalar(Var a, double c) {
  return add(a, a.tape()->constant(Matrix::Constant(a.rows(), a.cols(), c)));
}

Var stack_rows(std::span<const Var> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  Tape* tape = rows.front().tape();
  const auto r = static_cast<Eigen::Index>(rows.size());
  Var out;
  for (Eigen::Index i = 0; i < r; ++i) {
    if (rows[i].rows() != 1) throw DimensionError("stack_rows: expected 1 x c rows");
    Matrix e = Matrix::Zero(r, 1);
    e(i, 0) = 1.0;
    Var placed = matmul(tape->constant(std::move(e)), rows[i]);
    out = out.valid() ? add(out, placed) : placed;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult grad_check(const ScalarFn& f, std::span<const Matrix> point, double h) {
  auto evaluate = [&f](std::span<const Matrix> at, Tape& tape, std::vector<Var>& inputs) {
    inputs.clear();
    for (const Matrix& m : at) inputs.push_back(tape.leaf(m));
    Var out = f(tape, inputs);
    const std::string bad = tape.first_non_finite_op();
    if (!bad.empty()) throw NumericalError("grad_check: non-finite value produced by op '" + bad + "'");
    return out;
  };

  Tape tape;
  std::vector<Var> inputs;
  Var out = evaluate(point, tape, inputs);
  tape.backward(out);
  std::vector<Matrix> analytic;
  for (const Var& v : inputs) analytic.push_back(v.grad());
  for (const Matrix& g : analytic) {
    if (!g.allFinite()) throw NumericalError("grad_check: non-finite analytic gradient");
  }

  GradCheckResult result;
  std::vector<Matrix> probe(point.begin(), point.end());
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (Eigen::Index idx = 0; idx < probe[k].size(); ++idx) {
      const double x0 = probe[k](idx);
      probe[k](idx) = x0 + h;
      Tape tp;
      std::vector<Var> ip;
      const double fp = evaluate(probe, tp, ip).scalar();
      probe[k](idx) = x0 - h;
      Tape tm;
      std::vector<Var> im;
      const double fm = evaluate(probe, tm, im).scalar();
      probe[k](idx) = x0;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = analytic[k](idx);
      result.max_rel_error =
          std::max(result.max_rel_error, std::abs(an - fd) / std::max(1.0, std::abs(fd)));
      result.max_abs_analytic = std::max(result.max_abs_analytic, std::abs(an));
    }
  }
  return result;
}

}  // namespace seqaug::ad
