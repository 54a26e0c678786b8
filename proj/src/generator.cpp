#include "seqaug/generator.hpp"

#include "seqaug/errors.hpp"

#include <cmath>

namespace seqaug {

namespace {

Eigen::MatrixXd uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
  return m;
}

}  // namespace

GeneratorParams GeneratorParams::init(std::size_t d, std::size_t d_prime, Rng& rng) {
  if (d == 0 || d_prime == 0) throw InvalidArgument("generator dimensions must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_prime));
  GeneratorParams p;
  p.w = uniform(d, d_prime, bound, rng);
  for (int z = 0; z < 2; ++z) {
    p.wq[z] = uniform(d_prime, d_prime, bound, rng);
    p.wk[z] = uniform(d_prime, d_prime, bound, rng);
  }
  return p;
}

std::vector<NamedMatrix> GeneratorParams::named() {
  return {{"gen.w", &w}, {"gen.wq1", &wq[0]}, {"gen.wk1", &wk[0]}, {"gen.wq2", &wq[1]}, {"gen.wk2", &wk[1]}};
}

GeneratorVars bind(ad::Tape& tape, const GeneratorParams& p, bool trainable) {
  GeneratorVars v;
  v.w = tape.leaf(p.w, trainable);
  for (int z = 0; z < 2; ++z) {
    v.wq[z] = tape.leaf(p.wq[z], trainable);
    v.wk[z] = tape.leaf(p.wk[z], trainable);
  }
  return v;
}

std::array<ad::Var, 2> transition_matrices(ad::Var emb, const GeneratorVars& p) {
  if (emb.cols() != p.w.rows()) {
    throw DimensionError("transition_matrices: embeddings have " + std::to_string(emb.cols()) +
                         " columns but the projection expects " + std::to_string(p.w.rows()));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.w.cols()));
  const ad::Var h = ad::matmul(ad::constant_view(emb), p.w);
  std::array<ad::Var, 2> out;
  for (int z = 0; z < 2; ++z) {
    const ad::Var q = ad::matmul(h, p.wq[z]);
    const ad::Var k = ad::matmul(h, p.wk[z]);
    out[z] = ad::row_softmax(ad::scalar_mul(ad::matmul(q, ad::transpose(k)), scale));
  }
  return out;
}

ViewPair generate_views(const PaddedSequence& s, ad::Var emb, const GeneratorVars& p, const SinkhornConfig& cfg) {
  if (static_cast<std::size_t>(emb.rows()) != s.size()) {
    throw DimensionError("generate_views: " + std::to_string(emb.rows()) + " embedding rows for a padded sequence of " +
                         std::to_string(s.size()));
  }
  ViewPair vp;
  vp.a = transition_matrices(emb, p);
  for (int z = 0; z < 2; ++z) {
    vp.proj[z] = project(vp.a[z], cfg);
    vp.views[z] = apply(vp.proj[z].hard, s);
  }
  return vp;
}

}  // namespace seqaug
