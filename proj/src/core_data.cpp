#include "seqaug/core_data.hpp"

#include "seqaug/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace seqaug {

std::vector<ItemId> PaddedSequence::items() const {
  std::vector<ItemId> out = base.items;
  out.insert(out.end(), pad_items.begin(), pad_items.end());
  return out;
}

// ---------------------------------------------------------------------------
// TSV

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Dataset load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  Dataset data;
  std::unordered_map<std::string, std::size_t> user_ids;
  std::unordered_map<std::string, ItemId> item_ids;
  struct Event {
    ItemId item;
    std::int64_t ts;
  };
  std::vector<std::vector<Event>> events;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected user<TAB>item<TAB>timestamp", lineno);
    }
    std::int64_t ts = 0;
    std::size_t consumed = 0;
    try {
      ts = std::stoll(fields[2], &consumed);
    } catch (const std::exception&) {
      throw ParseError("bad timestamp '" + fields[2] + "'", lineno);
    }
    if (consumed != fields[2].size()) throw ParseError("bad timestamp '" + fields[2] + "'", lineno);

    auto [uit, new_user] = user_ids.try_emplace(fields[0], data.user_names.size());
    if (new_user) {
      data.user_names.push_back(fields[0]);
      events.emplace_back();
    }
    auto [iit, new_item] = item_ids.try_emplace(fields[1], static_cast<ItemId>(data.item_names.size()));
    if (new_item) data.item_names.push_back(fields[1]);
    events[uit->second].push_back({iit->second, ts});
  }

  data.vocab_size = data.item_names.size();
  for (std::size_t u = 0; u < events.size(); ++u) {
    auto& ev = events[u];
    if (ev.size() < kMinInteractions) continue;
    std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.ts < b.ts; });
    InteractionSequence seq;
    seq.user = static_cast<std::int64_t>(u);
    for (const Event& e : ev) {
      seq.items.push_back(e.item);
      seq.timestamps.push_back(e.ts);
    }
    data.sequences.push_back(std::move(seq));
  }
  if (data.sequences.empty()) {
    throw DataError("empty dataset: no user in " + path.string() + " has at least " +
                    std::to_string(kMinInteractions) + " interactions");
  }
  return data;
}

void write_tsv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const InteractionSequence& seq : data.sequences) {
    const std::string user = static_cast<std::size_t>(seq.user) < data.user_names.size()
                                 ? data.user_names[seq.user]
                                 : std::to_string(seq.user);
    for (std::size_t t = 0; t < seq.items.size(); ++t) {
      const ItemId it = seq.items[t];
      const std::string item = static_cast<std::size_t>(it) < data.item_names.size()
                                   ? data.item_names[it]
                                   : std::to_string(it);
      const std::int64_t ts = seq.timestamps.empty() ? static_cast<std::int64_t>(t + 1) : seq.timestamps[t];
      out << user << '\t' << item << '\t' << ts << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Split

DatasetSplit leave_one_out_split(const std::vector<InteractionSequence>& seqs, std::size_t max_len) {
  DatasetSplit split;
  split.max_len = max_len;
  split.users.reserve(seqs.size());
  for (const InteractionSequence& s : seqs) {
    const std::size_t n = s.items.size();
    if (n < 3) {
      throw DataError("user " + std::to_string(s.user) + " has " + std::to_string(n) +
                      " interactions; leave-one-out needs at least 3");
    }
    UserSplit u;
    u.user = s.user;
    u.test = s.items[n - 1];
    u.valid = s.items[n - 2];
    const std::size_t train_len = n - 2;
    const std::size_t first = train_len > max_len ? train_len - max_len : 0;
    u.train.assign(s.items.begin() + static_cast<std::ptrdiff_t>(first),
                   s.items.begin() + static_cast<std::ptrdiff_t>(train_len));
    split.users.push_back(std::move(u));
  }
  return split;
}

// ---------------------------------------------------------------------------
// Sampling helpers

std::vector<ItemId> sample_excluding(const std::vector<ItemId>& taken, std::size_t count,
                                     std::size_t vocab, Rng& rng) {
  std::vector<bool> used(vocab, false);
  for (ItemId it : taken) {
    if (it >= 0 && static_cast<std::size_t>(it) < vocab) used[it] = true;
  }
  std::vector<ItemId> pool;
  pool.reserve(vocab);
  for (std::size_t i = 0; i < vocab; ++i) {
    if (!used[i]) pool.push_back(static_cast<ItemId>(i));
  }
  if (pool.size() < count) {
    throw DataError("need " + std::to_string(count) + " items outside the sequence but only " +
                    std::to_string(pool.size()) + " are available");
  }
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

// ---------------------------------------------------------------------------
// Noise

std::size_t noise_count(double ratio, std::size_t n) {
  // Round half up; the epsilon absorbs representation error such as 0.35 * 10.
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5 + 1e-9));
}

InteractionSequence inject_noise(const InteractionSequence& seq, double ratio, std::size_t vocab,
                                 Rng& rng) {
  if (ratio < 0.0 || ratio > 1.0) throw InvalidArgument("noise ratio must lie in [0, 1]");
  const std::size_t count = noise_count(ratio, seq.items.size());
  InteractionSequence out = seq;
  if (count == 0) return out;

  std::vector<std::size_t> positions(seq.items.size());
  std::iota(positions.begin(), positions.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, positions.size() - 1);
    std::swap(positions[i], positions[pick(rng)]);
  }
  std::unordered_set<ItemId> original(seq.items.begin(), seq.items.end());
  std::vector<ItemId> pool;
  for (std::size_t i = 0; i < vocab; ++i) {
    if (!original.contains(static_cast<ItemId>(i))) pool.push_back(static_cast<ItemId>(i));
  }
  if (pool.empty()) throw DataError("noise impossible: every vocabulary item occurs in the sequence");
  std::uniform_int_distribution<std::size_t> draw(0, pool.size() - 1);
  for (std::size_t i = 0; i < count; ++i) out.items[positions[i]] = pool[draw(rng)];
  return out;
}

DatasetSplit inject_noise(const DatasetSplit& split, double ratio, std::size_t vocab, Rng& rng) {
  DatasetSplit out = split;
  for (UserSplit& u : out.users) {
    InteractionSequence s;
    s.user = u.user;
    s.items = u.train;
    u.train = inject_noise(s, ratio, vocab, rng).items;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

MarkovTable::MarkovTable(const SyntheticSpec& spec, Rng& rng) : spec_(spec) {
  const std::size_t v = spec.vocab;
  const std::size_t states = spec.order == 1 ? v : v * v + v;
  likely_.resize(states);
  for (auto& succ : likely_) succ = sample_excluding({}, spec.successors, v, rng);
}

std::size_t MarkovTable::state(ItemId prev2, ItemId prev1) const {
  const std::size_t v = spec_.vocab;
  if (spec_.order == 1 || prev2 < 0) {
    // Order-2 tables keep a first-order block after the pair block for the
    // second position of a sequence.
    return spec_.order == 1 ? static_cast<std::size_t>(prev1) : v * v + static_cast<std::size_t>(prev1);
  }
  return static_cast<std::size_t>(prev2) * v + static_cast<std::size_t>(prev1);
}

const std::vector<ItemId>& MarkovTable::likely(ItemId prev2, ItemId prev1) const {
  return likely_[state(prev2, prev1)];
}

ItemId MarkovTable::sample_first(Rng& rng) const {
  std::uniform_int_distribution<ItemId> uni(0, static_cast<ItemId>(spec_.vocab) - 1);
  return uni(rng);
}

ItemId MarkovTable::sample_next(ItemId prev2, ItemId prev1, Rng& rng) const {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < spec_.successor_mass) {
    const auto& succ = likely(prev2, prev1);
    std::uniform_int_distribution<std::size_t> pick(0, succ.size() - 1);
    return succ[pick(rng)];
  }
  return sample_first(rng);
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.vocab < 20) throw InvalidArgument("synthetic vocabulary must be at least 20 items");
  if (spec.order != 1 && spec.order != 2) throw InvalidArgument("Markov order must be 1 or 2");
  if (spec.min_len < kMinInteractions) {
    throw InvalidArgument("synthetic min length must be at least " + std::to_string(kMinInteractions));
  }
  if (spec.max_len < spec.min_len) throw InvalidArgument("synthetic length range is empty");
  if (spec.successors == 0 || spec.successors > spec.vocab) {
    throw InvalidArgument("successor count must lie in [1, vocab]");
  }

  Rng rng(seed);
  const MarkovTable table(spec, rng);
  Dataset data;
  data.vocab_size = spec.vocab;
  for (std::size_t i = 0; i < spec.vocab; ++i) data.item_names.push_back("i" + std::to_string(i));
  std::uniform_int_distribution<std::size_t> length(spec.min_len, spec.max_len);
  for (std::size_t u = 0; u < spec.users; ++u) {
    InteractionSequence seq;
    seq.user = static_cast<std::int64_t>(u);
    data.user_names.push_back("u" + std::to_string(u));
    const std::size_t len = length(rng);
    ItemId prev2 = kSentinel;
    ItemId prev1 = table.sample_first(rng);
    seq.items.push_back(prev1);
    while (seq.items.size() < len) {
      const ItemId next = table.sample_next(prev2, prev1, rng);
      seq.items.push_back(next);
      prev2 = prev1;
      prev1 = next;
    }
    for (std::size_t t = 0; t < len; ++t) seq.timestamps.push_back(static_cast<std::int64_t>(t + 1));
    data.sequences.push_back(std::move(seq));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Padding

PaddedSequence pad_sequence(const InteractionSequence& seq, std::size_t k, std::size_t vocab, Rng& rng) {
  PaddedSequence out;
  out.base = seq;
  if (k == 0) return out;
  try {
    out.pad_items = sample_excluding(seq.items, k, vocab, rng);
  } catch (const DataError& e) {
    throw DataError(std::string("pad impossible: ") + e.what());
  }
  return out;
}

}  // namespace seqaug
