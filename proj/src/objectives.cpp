#include "seqaug/objectives.hpp"

#include "seqaug/errors.hpp"

#include <algorithm>
#include <cmath>

namespace seqaug {

void ObjectiveConfig::check() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0, 1]");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (lambda_div < 0.0 || lambda_ndcg < 0.0) throw InvalidArgument("loss weights must be nonnegative");
}

ad::Var diversity_loss(ad::Var m1, ad::Var m2, const ObjectiveConfig& cfg) {
  return ad::relu_hinge(ad::add_scalar(ad::scalar_mul(ad::l2_norm_sq(ad::sub(m1, m2)), -1.0), cfg.epsilon));
}

std::size_t worst_case_count(std::size_t s_len, double gamma) {
  const auto c = static_cast<std::size_t>(std::floor(gamma * static_cast<double>(s_len) + 1e-9));
  return std::min(s_len, std::max<std::size_t>(1, c));
}

namespace {

Eigen::VectorXd discounts(std::size_t n) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) d(static_cast<Eigen::Index>(j)) = 1.0 / std::log2(static_cast<double>(n - j) + 1.0);
  return d;
}

// Shared by the ideal and by dcg() so the identity scores exactly 1.
double dcg_of(const Eigen::MatrixXd& m, const Eigen::VectorXd& rel, const Eigen::VectorXd& disc) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) total += m(i, j) * rel(i) * disc(j);
    }
  }
  return total;
}

double identity_dcg(const Eigen::VectorXd& rel, const Eigen::VectorXd& disc, std::size_t s_len) {
  Eigen::MatrixXd id = Eigen::MatrixXd::Zero(rel.size(), rel.size());
  id.topLeftCorner(static_cast<Eigen::Index>(s_len), static_cast<Eigen::Index>(s_len)).setIdentity();
  return dcg_of(id, rel, disc);
}

}  // namespace

RelevanceProfile make_profile(std::size_t s_len, std::size_t n, double gamma) {
  if (s_len == 0) throw DomainError("sequence-aware NDCG: empty sequence (IDCG = 0)");
  if (n < s_len) throw InvalidArgument("padded length shorter than the sequence");
  RelevanceProfile p;
  p.s_len = s_len;
  p.n = n;
  p.rel = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < s_len; ++i) p.rel(static_cast<Eigen::Index>(i)) = static_cast<double>(i + 1);
  p.discount = discounts(n);
  p.idcg = identity_dcg(p.rel, p.discount, s_len);
  p.weight = (p.rel * p.discount.transpose()) / p.idcg;
  p.ndcg_star = ndcg_star(s_len, n, gamma);
  return p;
}

double dcg(const Eigen::MatrixXd& m, const RelevanceProfile& profile) {
  return dcg_of(m, profile.rel, profile.discount);
}

double seq_ndcg_value(const Eigen::MatrixXd& m, const RelevanceProfile& profile) {
  return dcg(m, profile) / profile.idcg;
}

ad::Var seq_ndcg(ad::Var m, const RelevanceProfile& profile) {
  if (static_cast<std::size_t>(m.rows()) != profile.n || static_cast<std::size_t>(m.cols()) != profile.n) {
    throw DimensionError("seq_ndcg: matrix does not match the relevance profile");
  }
  return ad::sum(ad::hadamard(m, m.tape()->constant(profile.weight)));
}

double ndcg_star(std::size_t s_len, std::size_t n, double gamma) {
  if (s_len == 0) throw DomainError("ndcg_star: empty sequence");
  const Eigen::VectorXd disc = discounts(n);
  Eigen::VectorXd rel = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < s_len; ++i) rel(static_cast<Eigen::Index>(i)) = static_cast<double>(i + 1);
  const double ideal = identity_dcg(rel, disc, s_len);
  const std::size_t c = worst_case_count(s_len, gamma);
  for (std::size_t i = s_len - c; i < s_len; ++i) rel(static_cast<Eigen::Index>(i)) = 0.0;
  return identity_dcg(rel, disc, s_len) / ideal;
}

ad::Var semantic_loss(ad::Var m1, ad::Var m2, const RelevanceProfile& profile) {
  auto hinge = [&profile](ad::Var m) {
    return ad::relu_hinge(ad::add_scalar(ad::scalar_mul(seq_ndcg(m, profile), -1.0), profile.ndcg_star));
  };
  return ad::add(hinge(m1), hinge(m2));
}

ad::Var infonce(ad::Var anchors, ad::Var positives, double tau, Agreement direction, std::size_t negatives) {
  const Eigen::Index b = anchors.rows();
  if (b < 2) throw InvalidArgument("infonce: batch needs at least 2 pairs");
  if (positives.rows() != b) throw DimensionError("infonce: anchor and positive batches differ in size");
  if (!(tau > 0.0)) throw InvalidArgument("infonce: tau must be positive");

  const ad::Var logits = ad::scalar_mul(ad::cosine_similarity(anchors, positives), 1.0 / tau);
  ad::Var probs;
  if (negatives == 0 || negatives >= static_cast<std::size_t>(b - 1)) {
    probs = ad::row_softmax(logits);
  } else {
    ad::Mask keep = ad::Mask::Constant(b, b, false);
    for (Eigen::Index u = 0; u < b; ++u) {
      for (std::size_t k = 0; k <= negatives; ++k) keep(u, (u + static_cast<Eigen::Index>(k)) % b) = true;
    }
    probs = ad::row_softmax(logits, keep);
  }
  const ad::Var eye = anchors.tape()->constant(Eigen::MatrixXd::Identity(b, b));
  // Off-diagonal probabilities are multiplied by zero after the log; add the
  // identity's complement first so no log(0) appears for masked entries.
  const ad::Var safe = ad::add(ad::hadamard(probs, eye),
                               anchors.tape()->constant(Eigen::MatrixXd::Ones(b, b) - Eigen::MatrixXd::Identity(b, b)));
  const ad::Var log_ratio = ad::sum(ad::hadamard(ad::log(safe), eye));
  const double sign = direction == Agreement::Maximize ? -1.0 : 1.0;
  return ad::scalar_mul(log_ratio, sign / static_cast<double>(b));
}

ad::Var joint_generator_loss(ad::Var info, ad::Var div, ad::Var ndcg, const ObjectiveConfig& cfg) {
  return ad::add(info, ad::add(ad::scalar_mul(div, cfg.lambda_div), ad::scalar_mul(ndcg, cfg.lambda_ndcg)));
}

}  // namespace seqaug
