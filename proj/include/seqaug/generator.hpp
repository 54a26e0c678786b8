#pragma once

// Per-user transition matrices from a shared projection and two independent
// single-layer attention heads:
//
//   h   = emb * w
//   a_z = row_softmax((h wq_z)(h wk_z)^T / sqrt(d'))     z in {1, 2}
//
// a_z(i, j) is the probability of moving item i of the padded sequence to
// position j. Each a_z is then projected to a hard transform matrix.

#include "seqaug/augment.hpp"
#include "seqaug/autodiff.hpp"
#include "seqaug/core_data.hpp"
#include "seqaug/params.hpp"
#include "seqaug/sinkhorn.hpp"

#include <array>

namespace seqaug {

struct GeneratorParams {
  Eigen::MatrixXd w;                 // d x d'
  std::array<Eigen::MatrixXd, 2> wq;  // d' x d'
  std::array<Eigen::MatrixXd, 2> wk;  // d' x d'

  // Entries uniform in (-1/sqrt(d'), 1/sqrt(d')).
  static GeneratorParams init(std::size_t d, std::size_t d_prime, Rng& rng);

  std::size_t d() const { return static_cast<std::size_t>(w.rows()); }
  std::size_t d_prime() const { return static_cast<std::size_t>(w.cols()); }
  std::vector<NamedMatrix> named();
};

struct GeneratorVars {
  ad::Var w;
  std::array<ad::Var, 2> wq;
  std::array<ad::Var, 2> wk;

  std::vector<ad::Var> all() const { return {w, wq[0], wk[0], wq[1], wk[1]}; }
};

GeneratorVars bind(ad::Tape& tape, const GeneratorParams& p, bool trainable);

// `emb` holds one row per padded-sequence item. It is read through
// constant_view, so no gradient reaches the recommender's embeddings.
std::array<ad::Var, 2> transition_matrices(ad::Var emb, const GeneratorVars& p);

struct ViewPair {
  std::array<ad::Var, 2> a;
  std::array<Projection, 2> proj;
  std::array<AugmentedView, 2> views;

  ad::Var m(int z) const { return proj[z].out; }
  const TransformMatrix& hard(int z) const { return proj[z].hard; }
};

ViewPair generate_views(const PaddedSequence& s, ad::Var emb, const GeneratorVars& p, const SinkhornConfig& cfg);

}  // namespace seqaug
