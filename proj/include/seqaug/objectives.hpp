#pragma once

#include "seqaug/autodiff.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace seqaug {

struct ObjectiveConfig {
  double epsilon = 20.0;    // diversity threshold
  double gamma = 0.10;      // perturbation budget
  double tau = 0.5;         // InfoNCE temperature
  double lambda_div = 1.0;
  double lambda_ndcg = 1.0;
  // In-batch negatives per anchor; 0 means all B - 1.
  std::size_t negatives = 0;

  void check() const;
};

// max(0, epsilon - ||m1 - m2||_F^2)
ad::Var diversity_loss(ad::Var m1, ad::Var m2, const ObjectiveConfig& cfg);

// Sequence-aware NDCG. Source row i < s_len has relevance i + 1 (oldest is
// 1), pad rows have relevance 0. View position j of an n-wide matrix is
// read most-recent-first with rank n - j, so DCG(m) is
//   sum_ij m(i, j) rel_i / log2(n - j + 1)
// and the normalizer is DCG of the identity placement of the original
// prefix.
struct RelevanceProfile {
  std::size_t s_len = 0;
  std::size_t n = 0;
  Eigen::VectorXd rel;       // n entries
  Eigen::VectorXd discount;  // n entries, 1 / log2(n - j + 1)
  Eigen::MatrixXd weight;    // rel * discount^T / idcg
  double idcg = 0.0;
  double ndcg_star = 0.0;
};

RelevanceProfile make_profile(std::size_t s_len, std::size_t n, double gamma);

double dcg(const Eigen::MatrixXd& m, const RelevanceProfile& profile);
double seq_ndcg_value(const Eigen::MatrixXd& m, const RelevanceProfile& profile);
ad::Var seq_ndcg(ad::Var m, const RelevanceProfile& profile);

// NDCG of the identity placement after zeroing the relevance of the
// max(1, floor(gamma * s_len)) most recent items.
double ndcg_star(std::size_t s_len, std::size_t n, double gamma);
inline double ndcg_star(std::size_t s_len, double gamma) { return ndcg_star(s_len, s_len, gamma); }
std::size_t worst_case_count(std::size_t s_len, double gamma);

// sum_z max(0, NDCG* - NDCG(m_z))
ad::Var semantic_loss(ad::Var m1, ad::Var m2, const RelevanceProfile& profile);

enum class Agreement { Maximize, Minimize };

// Per anchor u: ratio_u = exp(sim(a_u, p_u)/tau) / sum_j exp(sim(a_u, p_j)/tau)
// over the positive and the in-batch negatives, with cosine similarity.
// Maximize returns mean(-log ratio_u), Minimize returns mean(log ratio_u).
ad::Var infonce(ad::Var anchors, ad::Var positives, double tau, Agreement direction,
                std::size_t negatives = 0);

ad::Var joint_generator_loss(ad::Var info, ad::Var div, ad::Var ndcg, const ObjectiveConfig& cfg);

}  // namespace seqaug
