#include "seqaug/augment.hpp"

#include "seqaug/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace seqaug {

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Entry:
      os << "entry (" << row << "," << col << ") = " << value;
      break;
    case Kind::Row:
      os << "row " << row << " sums to " << value;
      break;
    case Kind::Col:
      os << "col " << col << " sums to " << value;
      break;
  }
  return os.str();
}

std::string ValidationReport::describe() const {
  if (ok()) return "ok";
  std::ostringstream os;
  os << total << " violation(s):";
  for (const Violation& v : violations) os << ' ' << v.describe() << ';';
  return os.str();
}

// ---------------------------------------------------------------------------
// TransformMatrix

TransformMatrix::TransformMatrix(const Eigen::MatrixXd& dense) {
  const ValidationReport report = validate(dense);
  if (!report.ok()) throw InvalidArgument("invalid transform matrix: " + report.describe());
  const auto n = static_cast<std::size_t>(dense.rows());
  target_.assign(n, -1);
  source_.assign(n, -1);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) == 1.0) {
        target_[i] = j;
        source_[j] = i;
      }
    }
  }
}

TransformMatrix TransformMatrix::identity(std::size_t n) {
  std::vector<std::int64_t> t(n);
  std::iota(t.begin(), t.end(), 0);
  return from_targets(std::move(t));
}

TransformMatrix TransformMatrix::zero(std::size_t n) {
  return from_targets(std::vector<std::int64_t>(n, -1));
}

TransformMatrix TransformMatrix::from_targets(std::vector<std::int64_t> target) {
  TransformMatrix m;
  const std::size_t n = target.size();
  m.source_.assign(n, -1);
  std::vector<std::size_t> bad_rows;
  std::vector<std::size_t> bad_cols;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t j = target[i];
    if (j < 0) continue;
    if (static_cast<std::size_t>(j) >= n) {
      bad_rows.push_back(i);
      continue;
    }
    if (m.source_[j] >= 0) {
      bad_cols.push_back(static_cast<std::size_t>(j));
      continue;
    }
    m.source_[j] = static_cast<std::int64_t>(i);
  }
  if (!bad_rows.empty() || !bad_cols.empty()) {
    std::ostringstream os;
    os << "invalid transform matrix:";
    for (std::size_t r : bad_rows) os << " row " << r << " targets out-of-range column;";
    for (std::size_t c : bad_cols) os << " col " << c << " receives more than one row;";
    throw InvalidArgument(os.str());
  }
  m.target_ = std::move(target);
  return m;
}

Eigen::MatrixXd TransformMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < target_.size(); ++i) {
    if (target_[i] >= 0) m(static_cast<Eigen::Index>(i), target_[i]) = 1.0;
  }
  return m;
}

TransformMatrix compose(const TransformMatrix& first, const TransformMatrix& second) {
  if (first.size() != second.size()) throw DimensionError("compose: matrix sizes differ");
  std::vector<std::int64_t> t(first.size(), -1);
  for (std::size_t i = 0; i < first.size(); ++i) {
    const std::int64_t mid = first.target(i);
    if (mid >= 0) t[i] = second.target(static_cast<std::size_t>(mid));
  }
  return TransformMatrix::from_targets(std::move(t));
}

// ---------------------------------------------------------------------------
// Application

std::vector<ItemId> AugmentedView::compact() const {
  std::vector<ItemId> out;
  for (ItemId it : items) {
    if (it != kSentinel) out.push_back(it);
  }
  return out;
}

std::vector<ItemId> apply_items(const TransformMatrix& m, const std::vector<ItemId>& padded) {
  if (m.size() != padded.size()) {
    throw DimensionError("apply: matrix is " + std::to_string(m.size()) + "x" + std::to_string(m.size()) +
                         " but the padded sequence has " + std::to_string(padded.size()) + " items");
  }
  std::vector<ItemId> out(padded.size(), kSentinel);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::int64_t i = m.source(j);
    if (i >= 0) out[j] = padded[static_cast<std::size_t>(i)];
  }
  return out;
}

AugmentedView apply(const TransformMatrix& m, const PaddedSequence& s) {
  return AugmentedView{apply_items(m, s.items()), s, m};
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

void check_lengths(std::size_t n, std::size_t s_len) {
  if (s_len > n) throw InvalidArgument("original length exceeds padded length");
}

}  // namespace

TransformMatrix matrix_for_crop(std::size_t n, std::size_t s_len, std::size_t start, std::size_t crop_len) {
  check_lengths(n, s_len);
  if (crop_len == 0) throw InvalidArgument("crop: empty view (crop length 0)");
  if (start + crop_len > s_len) throw InvalidArgument("crop: window exceeds the original sequence");
  std::vector<std::int64_t> t(n, -1);
  for (std::size_t p = 0; p < crop_len; ++p) t[start + p] = static_cast<std::int64_t>(p);
  return TransformMatrix::from_targets(std::move(t));
}

TransformMatrix matrix_for_mask(std::size_t n, std::size_t s_len, const std::vector<std::size_t>& positions) {
  check_lengths(n, s_len);
  std::vector<bool> masked(s_len, false);
  for (std::size_t p : positions) {
    if (p >= s_len) throw InvalidArgument("mask: position " + std::to_string(p) + " out of range");
    masked[p] = true;
  }
  std::vector<std::int64_t> t(n, -1);
  std::int64_t next = 0;
  for (std::size_t i = 0; i < s_len; ++i) {
    if (!masked[i]) t[i] = next++;
  }
  return TransformMatrix::from_targets(std::move(t));
}

TransformMatrix matrix_for_reorder(std::size_t n, std::size_t s_len, std::size_t window_start,
                                   const std::vector<std::size_t>& perm) {
  check_lengths(n, s_len);
  const std::size_t w = perm.size();
  if (window_start + w > s_len) throw InvalidArgument("reorder: window exceeds the original sequence");
  std::vector<bool> seen(w, false);
  for (std::size_t p : perm) {
    if (p >= w || seen[p]) throw InvalidArgument("reorder: invalid permutation (not a bijection)");
    seen[p] = true;
  }
  std::vector<std::int64_t> t(n, -1);
  for (std::size_t i = 0; i < s_len; ++i) t[i] = static_cast<std::int64_t>(i);
  for (std::size_t p = 0; p < w; ++p) t[window_start + p] = static_cast<std::int64_t>(window_start + perm[p]);
  return TransformMatrix::from_targets(std::move(t));
}

TransformMatrix matrix_for_insert(std::size_t n, std::size_t s_len, std::size_t k_used,
                                  const std::vector<std::size_t>& slots) {
  check_lengths(n, s_len);
  if (k_used > n - s_len) throw InvalidArgument("insert: more insertions than pad items");
  if (slots.size() != k_used) throw InvalidArgument("insert: slot count differs from k_used");
  std::vector<bool> taken(n, false);
  for (std::size_t slot : slots) {
    if (slot >= s_len + k_used) throw InvalidArgument("insert: slot " + std::to_string(slot) + " out of range");
    if (taken[slot]) throw InvalidArgument("insert: invalid slots (collision at " + std::to_string(slot) + ")");
    taken[slot] = true;
  }
  std::vector<std::int64_t> t(n, -1);
  for (std::size_t q = 0; q < k_used; ++q) t[s_len + q] = static_cast<std::int64_t>(slots[q]);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < s_len; ++i) {
    while (pos < n && taken[pos]) ++pos;
    if (pos >= n) break;  // overflow: remaining originals are dropped
    t[i] = static_cast<std::int64_t>(pos++);
  }
  return TransformMatrix::from_targets(std::move(t));
}

TransformMatrix matrix_for_substitute(std::size_t n, std::size_t s_len,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& mapping) {
  check_lengths(n, s_len);
  std::vector<std::int64_t> t(n, -1);
  for (std::size_t i = 0; i < s_len; ++i) t[i] = static_cast<std::int64_t>(i);
  std::vector<bool> used_row(n, false);
  std::vector<bool> used_pos(s_len, false);
  for (const auto& [pos, row] : mapping) {
    if (pos >= s_len) throw InvalidArgument("substitute: position " + std::to_string(pos) + " out of range");
    if (row < s_len || row >= n) throw InvalidArgument("substitute: row " + std::to_string(row) + " is not a pad row");
    if (used_row[row]) throw InvalidArgument("substitute: invalid mapping (pad row " + std::to_string(row) + " reused)");
    if (used_pos[pos]) throw InvalidArgument("substitute: invalid mapping (position " + std::to_string(pos) + " reused)");
    used_row[row] = true;
    used_pos[pos] = true;
    t[pos] = -1;
    t[row] = static_cast<std::int64_t>(pos);
  }
  return TransformMatrix::from_targets(std::move(t));
}

std::string to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::Crop:
      return "crop";
    case AugmentKind::Mask:
      return "mask";
    case AugmentKind::Reorder:
      return "reorder";
    case AugmentKind::Insert:
      return "insert";
    case AugmentKind::Substitute:
      return "substitute";
  }
  return "?";
}

AugmentKind augment_kind_from_string(const std::string& name) {
  for (AugmentKind k : kAllAugmentKinds) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown augmentation '" + name + "'");
}

namespace {

std::vector<std::size_t> choose(std::size_t count, std::size_t from, Rng& rng) {
  std::vector<std::size_t> pool(from);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, from - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

TransformMatrix random_augmentation(AugmentKind kind, std::size_t n, std::size_t s_len, double gamma, Rng& rng) {
  check_lengths(n, s_len);
  if (s_len == 0) throw InvalidArgument("random_augmentation: empty sequence");
  const auto budget = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(gamma * static_cast<double>(s_len) + 1e-9)));
  const std::size_t pads = n - s_len;
  switch (kind) {
    case AugmentKind::Crop: {
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor((1.0 - gamma) * static_cast<double>(s_len) + 1e-9)));
      std::uniform_int_distribution<std::size_t> start(0, s_len - keep);
      return matrix_for_crop(n, s_len, start(rng), keep);
    }
    case AugmentKind::Mask: {
      const std::size_t c = std::min(budget, s_len - 1);
      return matrix_for_mask(n, s_len, choose(c, s_len, rng));
    }
    case AugmentKind::Reorder: {
      const std::size_t w = std::min(s_len, std::max<std::size_t>(2, budget));
      std::uniform_int_distribution<std::size_t> start(0, s_len - w);
      const std::size_t ws = start(rng);
      std::vector<std::size_t> perm(w);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      return matrix_for_reorder(n, s_len, ws, perm);
    }
    case AugmentKind::Insert: {
      const std::size_t c = std::min(budget, pads);
      return matrix_for_insert(n, s_len, c, choose(c, s_len + c, rng));
    }
    case AugmentKind::Substitute: {
      const std::size_t c = std::min({budget, pads, s_len});
      const auto positions = choose(c, s_len, rng);
      const auto rows = choose(c, pads, rng);
      std::vector<std::pair<std::size_t, std::size_t>> mapping;
      for (std::size_t q = 0; q < c; ++q) mapping.emplace_back(positions[q], s_len + rows[q]);
      return matrix_for_substitute(n, s_len, mapping);
    }
  }
  throw InvalidArgument("random_augmentation: unknown kind");
}

// ---------------------------------------------------------------------------
// Profile and serialization

std::size_t AugmentationProfile::placed() const {
  std::size_t total = 0;
  for (const auto& [d, c] : displacement) total += c;
  return total;
}

AugmentationProfile classify(const TransformMatrix& m, std::size_t s_len) {
  AugmentationProfile p;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::int64_t j = m.target(i);
    if (i < s_len) {
      if (j < 0) {
        ++p.masked;
      } else if (static_cast<std::size_t>(j) != i) {
        ++p.reordered;
      }
    } else if (j >= 0) {
      ++p.introduced;
    }
    if (j >= 0) {
      const auto d = static_cast<std::size_t>(std::llabs(j - static_cast<std::int64_t>(i)));
      ++p.displacement[d];
    }
  }
  return p;
}

std::string to_coordinates(const TransformMatrix& m) {
  std::ostringstream os;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.target(i) >= 0) os << i << ',' << m.target(i) << '\n';
  }
  return os.str();
}

TransformMatrix from_coordinates(const std::string& text, std::size_t n) {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected i,j", lineno);
    std::size_t i = 0;
    std::size_t j = 0;
    try {
      i = std::stoul(line.substr(0, comma));
      j = std::stoul(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("expected i,j", lineno);
    }
    if (i >= n || j >= n) throw ParseError("coordinate out of range", lineno);
    dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1.0;
  }
  return TransformMatrix(dense);
}

std::string to_coordinates(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) os << i << ',' << j << ',' << m(i, j) << '\n';
    }
  }
  return os.str();
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = std::clamp(m(i, j), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
    }
  }
}

}  // namespace seqaug
