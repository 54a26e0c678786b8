#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace seqaug {

using ItemId = std::int64_t;
// Empty (masked or padded-out) position. Never appears in loaded data.
inline constexpr ItemId kSentinel = -1;

// Deterministic 64-bit source for every randomized operation.
using Rng = std::mt19937_64;

struct InteractionSequence {
  std::int64_t user = 0;
  std::vector<ItemId> items;
  std::vector<std::int64_t> timestamps;  // empty or same length as items

  std::size_t size() const { return items.size(); }
};

// A sequence followed by k fresh items not present in it.
struct PaddedSequence {
  InteractionSequence base;
  std::vector<ItemId> pad_items;

  std::size_t base_size() const { return base.items.size(); }
  std::size_t size() const { return base.items.size() + pad_items.size(); }
  // base.items followed by pad_items.
  std::vector<ItemId> items() const;
};

struct UserSplit {
  std::int64_t user = 0;
  std::vector<ItemId> train;
  ItemId valid = kSentinel;
  ItemId test = kSentinel;
};

struct DatasetSplit {
  std::vector<UserSplit> users;
  std::size_t max_len = 50;
};

struct Dataset {
  std::vector<InteractionSequence> sequences;
  std::size_t vocab_size = 0;
  // Original item and user tokens, indexed by dense id.
  std::vector<std::string> item_names;
  std::vector<std::string> user_names;
};

inline constexpr std::size_t kMinInteractions = 5;

// Reads `user<TAB>item<TAB>timestamp` lines. Items and users are remapped
// to dense ids in first-seen order, interactions are stably sorted by
// timestamp, and users with fewer than kMinInteractions are dropped.
Dataset load_tsv(const std::filesystem::path& path);
void write_tsv(const std::filesystem::path& path, const Dataset& data);

// test = last item, valid = second to last, train = the rest truncated to
// its most recent max_len items.
DatasetSplit leave_one_out_split(const std::vector<InteractionSequence>& seqs, std::size_t max_len);

// Replaces round-half-up(ratio * |items|) uniformly chosen positions with
// items drawn uniformly from vocab \ set(items).
InteractionSequence inject_noise(const InteractionSequence& seq, double ratio, std::size_t vocab,
                                 Rng& rng);
// Applies inject_noise to every training prefix; valid/test stay untouched.
DatasetSplit inject_noise(const DatasetSplit& split, double ratio, std::size_t vocab, Rng& rng);

std::size_t noise_count(double ratio, std::size_t n);

struct SyntheticSpec {
  std::size_t users = 100;
  std::size_t vocab = 200;
  std::size_t min_len = 10;
  std::size_t max_len = 30;
  int order = 1;
  std::size_t successors = 3;
  double successor_mass = 0.8;
};

// Sparse random Markov table: each state (previous item, or previous pair
// for order 2) has `successors` likely next items sharing `successor_mass`
// evenly; the remaining mass is uniform over the vocabulary.
class MarkovTable {
 public:
  MarkovTable(const SyntheticSpec& spec, Rng& rng);

  ItemId sample_first(Rng& rng) const;
  ItemId sample_next(ItemId prev2, ItemId prev1, Rng& rng) const;
  const std::vector<ItemId>& likely(ItemId prev2, ItemId prev1) const;

 private:
  std::size_t state(ItemId prev2, ItemId prev1) const;

  SyntheticSpec spec_;
  std::vector<std::vector<ItemId>> likely_;
};

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Appends k distinct items drawn uniformly from vocab \ set(items).
PaddedSequence pad_sequence(const InteractionSequence& seq, std::size_t k, std::size_t vocab, Rng& rng);

// Uniform sample of `count` distinct elements of [0, vocab) excluding `taken`.
std::vector<ItemId> sample_excluding(const std::vector<ItemId>& taken, std::size_t count,
                                     std::size_t vocab, Rng& rng);

}  // namespace seqaug
