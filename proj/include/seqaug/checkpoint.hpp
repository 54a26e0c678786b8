#pragma once

// Parameter container: the 8-byte magic "SEQAUGCK", a little-endian u64
// header length, a UTF-8 JSON header, then every tensor as little-endian
// f64 in row-major order. The header lists {name, rows, cols, offset}
// per tensor (offset in bytes from the start of the data block) plus a
// free-form "meta" object.

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace seqaug {

struct Checkpoint {
  std::map<std::string, Eigen::MatrixXd> tensors;
  nlohmann::json meta = nlohmann::json::object();

  const Eigen::MatrixXd& at(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace seqaug
