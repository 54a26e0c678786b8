#pragma once

// Differentiable projection of a nonnegative transition matrix onto a hard
// semi-doubly-stochastic matrix.
//
// Each pass normalizes rows, then columns, then zeroes every row and column
// whose spread (max - min) fell below delta. After `iters` passes the soft
// matrix S is rounded greedily: entries are visited in descending value
// (ties by smaller row, then smaller column) and (i, j) is accepted when
// both row i and column j are unclaimed and not zeroed. The returned node
// forward-equals the hard matrix and differentiates as S.

#include "seqaug/augment.hpp"
#include "seqaug/autodiff.hpp"

#include <vector>

namespace seqaug {

struct SinkhornConfig {
  double delta = 1e-2;
  int iters = 20;
  bool hard = true;

  void check() const;
};

// Rows and columns zeroed so far. Once set, a flag is never cleared.
struct ZeroMasks {
  std::vector<bool> rows;
  std::vector<bool> cols;

  explicit ZeroMasks(std::size_t n = 0) : rows(n, false), cols(n, false) {}
  bool any() const;
  std::size_t count() const;
};

// One normalization pass; updates `zeroed` in place.
ad::Var normalize_pass(ad::Var s, const SinkhornConfig& cfg, ZeroMasks& zeroed, int iteration = 0);

// Greedy conflict-free rounding of a soft matrix, skipping zeroed rows and
// columns and non-positive entries.
TransformMatrix round_greedy(const Eigen::MatrixXd& s, const ZeroMasks& zeroed);

struct Projection {
  ad::Var out;   // straight-through node (or S itself when cfg.hard is false)
  ad::Var soft;  // S after the last pass
  TransformMatrix hard;
  ZeroMasks zeroed;
  // Zero masks after every pass, for inspection.
  std::vector<ZeroMasks> history;
};

Projection project(ad::Var a, const SinkhornConfig& cfg);

// hard - S is detached and S added back: value == hard, gradient == dS.
ad::Var straight_through(const TransformMatrix& hard, ad::Var soft);

// Hard matrix only, without keeping a tape around.
TransformMatrix project_hard(const Eigen::MatrixXd& a, const SinkhornConfig& cfg);

}  // namespace seqaug
