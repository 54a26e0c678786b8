#pragma once

// Augmentations as hard semi-doubly-stochastic matrices.
//
// Index convention: m(i, j) == 1 means the item at source position i of the
// padded sequence is placed at view position j. A row summing to 0 drops
// the source item; a column summing to 0 leaves the view position empty.

#include "seqaug/core_data.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace seqaug {

struct Violation {
  enum class Kind { Entry, Row, Col } kind;
  Eigen::Index row = -1;
  Eigen::Index col = -1;
  double value = 0.0;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;  // first kMaxReported only
  std::size_t total = 0;

  bool ok() const { return total == 0; }
  std::string describe() const;
  static constexpr std::size_t kMaxReported = 10;
};

// Accepts iff the matrix is square, every entry is 0 or 1 and every row and
// column sums to 0 or 1.
template <typename Derived>
ValidationReport validate(const Eigen::MatrixBase<Derived>& m) {
  ValidationReport report;
  auto note = [&report](Violation v) {
    if (report.violations.size() < ValidationReport::kMaxReported) report.violations.push_back(v);
    ++report.total;
  };
  if (m.rows() != m.cols()) {
    note({Violation::Kind::Entry, m.rows(), m.cols(), 0.0});
    return report;
  }
  using Scalar = typename Derived::Scalar;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const Scalar x = m(i, j);
      if (x != Scalar(0) && x != Scalar(1)) note({Violation::Kind::Entry, i, j, static_cast<double>(x)});
    }
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Scalar s = m.row(i).sum();
    if (s != Scalar(0) && s != Scalar(1)) note({Violation::Kind::Row, i, -1, static_cast<double>(s)});
  }
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const Scalar s = m.col(j).sum();
    if (s != Scalar(0) && s != Scalar(1)) note({Violation::Kind::Col, -1, j, static_cast<double>(s)});
  }
  return report;
}

class TransformMatrix {
 public:
  TransformMatrix() = default;
  // Throws InvalidArgument listing the violations when `dense` is not a
  // hard semi-doubly-stochastic matrix.
  explicit TransformMatrix(const Eigen::MatrixXd& dense);

  static TransformMatrix identity(std::size_t n);
  static TransformMatrix zero(std::size_t n);
  // target[i] is the view position of source row i, or -1 when dropped.
  static TransformMatrix from_targets(std::vector<std::int64_t> target);

  std::size_t size() const { return target_.size(); }
  std::int64_t target(std::size_t row) const { return target_[row]; }
  // Source row placed at view position `col`, or -1.
  std::int64_t source(std::size_t col) const { return source_[col]; }
  const std::vector<std::int64_t>& targets() const { return target_; }
  Eigen::MatrixXd dense() const;

  bool operator==(const TransformMatrix& other) const { return target_ == other.target_; }

 private:
  std::vector<std::int64_t> target_;
  std::vector<std::int64_t> source_;
};

// Boolean product: source i -> first(i) -> second(first(i)).
TransformMatrix compose(const TransformMatrix& first, const TransformMatrix& second);

struct AugmentedView {
  std::vector<ItemId> items;  // length n, kSentinel at empty positions
  PaddedSequence source;
  TransformMatrix matrix;

  // Items with the sentinels removed, in view order.
  std::vector<ItemId> compact() const;
};

AugmentedView apply(const TransformMatrix& m, const PaddedSequence& s);
// Same as apply, on a raw padded item list.
std::vector<ItemId> apply_items(const TransformMatrix& m, const std::vector<ItemId>& padded);

// ---------------------------------------------------------------------------
// The five heuristic augmentations. `n` is the padded length, `s_len` the
// length of the original prefix; pad rows map nowhere unless an operation
// introduces them.

TransformMatrix matrix_for_crop(std::size_t n, std::size_t s_len, std::size_t start, std::size_t crop_len);
TransformMatrix matrix_for_mask(std::size_t n, std::size_t s_len, const std::vector<std::size_t>& positions);
// perm[p] is the window offset receiving the item at window offset p.
TransformMatrix matrix_for_reorder(std::size_t n, std::size_t s_len, std::size_t window_start,
                                   const std::vector<std::size_t>& perm);
// Pad row s_len + t goes to slots[t]; originals keep their order in the
// remaining positions. Slots must lie in [0, s_len + slots.size()).
TransformMatrix matrix_for_insert(std::size_t n, std::size_t s_len, std::size_t k_used,
                                  const std::vector<std::size_t>& slots);
// Each (position, pad_row) pair drops the original at `position` and puts
// the pad item from absolute row `pad_row` there.
TransformMatrix matrix_for_substitute(std::size_t n, std::size_t s_len,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& mapping);

enum class AugmentKind { Crop, Mask, Reorder, Insert, Substitute };
inline constexpr AugmentKind kAllAugmentKinds[] = {AugmentKind::Crop, AugmentKind::Mask, AugmentKind::Reorder,
                                                   AugmentKind::Insert, AugmentKind::Substitute};
std::string to_string(AugmentKind kind);
AugmentKind augment_kind_from_string(const std::string& name);

// Random instance of `kind` under perturbation budget gamma: crop keeps
// (1 - gamma)|s| items, the others touch max(1, floor(gamma |s|)) positions
// (insert/substitute are further capped by the pad count n - s_len).
TransformMatrix random_augmentation(AugmentKind kind, std::size_t n, std::size_t s_len, double gamma, Rng& rng);

// ---------------------------------------------------------------------------

struct AugmentationProfile {
  std::size_t masked = 0;      // original rows mapped nowhere
  std::size_t reordered = 0;   // original rows with target != row
  std::size_t introduced = 0;  // pad rows mapped somewhere
  std::map<std::size_t, std::size_t> displacement;  // |j - i| over placed rows

  std::size_t placed() const;
};

AugmentationProfile classify(const TransformMatrix& m, std::size_t s_len);

// `i,j` per line for every nonzero entry.
std::string to_coordinates(const TransformMatrix& m);
TransformMatrix from_coordinates(const std::string& text, std::size_t n);
// `i,j,value` per line for every nonzero entry of a real matrix.
std::string to_coordinates(const Eigen::MatrixXd& m);
// Binary greyscale image, entries clamped to [0, 1] and scaled to 255.
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& m);

}  // namespace seqaug
