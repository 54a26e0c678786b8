#include "seqaug/sinkhorn.hpp"

#include "seqaug/errors.hpp"

#include <algorithm>
#include <tuple>

namespace seqaug {

void SinkhornConfig::check() const {
  if (!(delta >= 0.0)) throw InvalidArgument("sinkhorn delta must be nonnegative");
  if (iters < 1) throw InvalidArgument("sinkhorn iteration count must be at least 1");
}

bool ZeroMasks::any() const {
  return std::find(rows.begin(), rows.end(), true) != rows.end() ||
         std::find(cols.begin(), cols.end(), true) != cols.end();
}

std::size_t ZeroMasks::count() const {
  return static_cast<std::size_t>(std::count(rows.begin(), rows.end(), true) +
                                  std::count(cols.begin(), cols.end(), true));
}

namespace {

// Flags rows and columns of the freshly normalized `v` whose spread fell
// below delta. Both sweeps read the same state.
void flag_uniform(const Eigen::MatrixXd& v, double delta, ZeroMasks& zeroed) {
  const Eigen::VectorXd row_spread = v.rowwise().maxCoeff() - v.rowwise().minCoeff();
  const Eigen::RowVectorXd col_spread = v.colwise().maxCoeff() - v.colwise().minCoeff();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    if (row_spread(i) < delta) zeroed.rows[i] = true;
  }
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    if (col_spread(j) < delta) zeroed.cols[j] = true;
  }
}

void check_input(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("semi-sinkhorn: matrix must be square");
  if ((a.array() < 0.0).any()) throw DomainError("semi-sinkhorn: negative entry in input");
}

}  // namespace

ad::Var normalize_pass(ad::Var s, const SinkhornConfig& cfg, ZeroMasks& zeroed, int iteration) {
  if (iteration == 0) check_input(s.value());
  s = ad::broadcast_div(s, ad::row_sum(s));
  s = ad::broadcast_div(s, ad::col_sum(s));
  if (!s.value().allFinite()) {
    throw NumericalError("semi-sinkhorn: non-finite value at iteration " + std::to_string(iteration));
  }
  flag_uniform(s.value(), cfg.delta, zeroed);
  if (zeroed.any()) s = ad::mask_assign(s, zeroed.rows, zeroed.cols);
  return s;
}

TransformMatrix round_greedy(const Eigen::MatrixXd& s, const ZeroMasks& zeroed) {
  const Eigen::Index n = s.rows();
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> entries;
  entries.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (zeroed.rows[i]) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (zeroed.cols[j] || !(s(i, j) > 0.0)) continue;
      entries.emplace_back(s(i, j), i, j);
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  std::vector<std::int64_t> target(static_cast<std::size_t>(n), -1);
  std::vector<bool> col_claimed(static_cast<std::size_t>(n), false);
  std::size_t claimed = 0;
  for (const auto& [value, i, j] : entries) {
    if (target[i] >= 0 || col_claimed[j]) continue;
    target[i] = j;
    col_claimed[j] = true;
    if (++claimed == static_cast<std::size_t>(n)) break;
  }
  return TransformMatrix::from_targets(std::move(target));
}

ad::Var straight_through(const TransformMatrix& hard, ad::Var soft) {
  ad::Var h = soft.tape()->constant(hard.dense());
  return ad::add(ad::constant_view(ad::sub(h, soft)), soft);
}

Projection project(ad::Var a, const SinkhornConfig& cfg) {
  cfg.check();
  if (a.rows() != a.cols()) throw DimensionError("project: matrix must be square");
  const auto n = static_cast<std::size_t>(a.rows());
  Projection p;
  p.zeroed = ZeroMasks(n);
  ad::Var s = a;
  for (int t = 0; t < cfg.iters; ++t) {
    s = normalize_pass(s, cfg, p.zeroed, t);
    p.history.push_back(p.zeroed);
  }
  p.soft = s;
  p.hard = round_greedy(s.value(), p.zeroed);
  p.out = cfg.hard ? straight_through(p.hard, s) : s;
  return p;
}

TransformMatrix project_hard(const Eigen::MatrixXd& a, const SinkhornConfig& cfg) {
  cfg.check();
  check_input(a);
  // Same arithmetic as the taped passes, in place.
  Eigen::MatrixXd s = a;
  ZeroMasks zeroed(static_cast<std::size_t>(a.rows()));
  for (int t = 0; t < cfg.iters; ++t) {
    const Eigen::VectorXd rows = Eigen::VectorXd(s.rowwise().sum()).cwiseMax(ad::kDivGuard);
    s.array().colwise() /= rows.array();
    const Eigen::RowVectorXd cols = Eigen::RowVectorXd(s.colwise().sum()).cwiseMax(ad::kDivGuard);
    s.array().rowwise() /= cols.array();
    if (!s.allFinite()) throw NumericalError("semi-sinkhorn: non-finite value at iteration " + std::to_string(t));
    flag_uniform(s, cfg.delta, zeroed);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      if (zeroed.rows[i]) s.row(i).setZero();
      if (zeroed.cols[i]) s.col(i).setZero();
    }
  }
  return round_greedy(s, zeroed);
}

}  // namespace seqaug
