#pragma once

// Toy causal self-attention backbone: item + position embeddings, one
// single-head attention layer with a residual connection, one ReLU
// feed-forward layer with a residual connection, output tied to the item
// embeddings. Sentinel positions get a zero input row and are excluded from
// attention.

#include "seqaug/autodiff.hpp"
#include "seqaug/core_data.hpp"
#include "seqaug/params.hpp"

#include <array>
#include <span>
#include <vector>

namespace seqaug {

struct BackboneParams {
  Eigen::MatrixXd emb;  // |V| x d; the sentinel maps to an implicit zero row
  Eigen::MatrixXd pos;  // positions x d
  Eigen::MatrixXd wq, wk, wv;  // d x d
  Eigen::MatrixXd w1, w2;      // d x d feed-forward

  static BackboneParams init(std::size_t vocab, std::size_t positions, std::size_t d, double emb_std, Rng& rng);

  std::size_t vocab() const { return static_cast<std::size_t>(emb.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(emb.cols()); }
  std::size_t positions() const { return static_cast<std::size_t>(pos.rows()); }
  std::vector<NamedMatrix> named();
};

struct BackboneVars {
  ad::Var emb, pos, wq, wk, wv, w1, w2;
  ad::Var emb_t;  // transpose(emb), shared by every logits computation on the tape

  std::vector<ad::Var> all() const { return {emb, pos, wq, wk, wv, w1, w2}; }
};

BackboneVars bind(ad::Tape& tape, const BackboneParams& p, bool trainable);

// Input rows for a list of items (sentinels give zero rows).
ad::Var item_rows(std::span<const ItemId> items, const BackboneVars& p);

// Hidden states for an embedded input of L rows; valid[t] marks real items.
ad::Var hidden_states(ad::Var x_items, const std::vector<bool>& valid, const BackboneVars& p);

// Representation of a sequence: hidden state at the last real position.
// Throws InvalidArgument when every position is a sentinel.
ad::Var encode(std::span<const ItemId> items, const BackboneVars& p);
ad::Var encode_embedded(ad::Var x_items, const std::vector<bool>& valid, const BackboneVars& p);

// Sum over positions of -log softmax(hidden_t emb^T)[items[t + 1]], and the
// number of terms. Sequences shorter than 2 contribute nothing.
struct LossSum {
  ad::Var total;
  std::size_t terms = 0;
};
LossSum next_item_loss(std::span<const ItemId> items, const BackboneVars& p);

// Contrastive agreement between the two views of every pair, maximized
// (InfoNCE, recommender side). Pairs with an all-sentinel view are skipped;
// returns an invalid Var when fewer than two pairs remain.
ad::Var ssl_loss(const std::vector<std::array<std::vector<ItemId>, 2>>& views, const BackboneVars& p,
                 double tau, std::size_t negatives = 0);

// Scores over the full vocabulary for the next item after `items`.
Eigen::VectorXd score_next(std::span<const ItemId> items, const BackboneParams& p);

// 1-based rank of `target`; ties are broken by item id ascending.
std::size_t rank_of(const Eigen::VectorXd& scores, ItemId target);

struct RankingMetrics {
  double hr10 = 0.0, hr20 = 0.0, ndcg10 = 0.0, ndcg20 = 0.0;
  std::size_t users = 0;
};

RankingMetrics metrics_from_ranks(const std::vector<std::size_t>& ranks);

enum class EvalTarget { Valid, Test };

// Full-vocabulary ranking. Valid predicts from train; Test predicts from the
// last max_len items of train + valid.
RankingMetrics evaluate(const DatasetSplit& split, const BackboneParams& p, EvalTarget target);
std::vector<std::size_t> target_ranks(const DatasetSplit& split, const BackboneParams& p, EvalTarget target);

}  // namespace seqaug
