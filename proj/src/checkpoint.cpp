#include "seqaug/checkpoint.hpp"

#include "seqaug/errors.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace seqaug {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'E', 'Q', 'A', 'U', 'G', 'C', 'K'};

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

}  // namespace

const Eigen::MatrixXd& Checkpoint::at(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw Error("checkpoint has no tensor '" + name + "'");
  return it->second;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["format"] = "seqaug-checkpoint";
  header["version"] = 1;
  header["meta"] = ckpt.meta;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, m] : ckpt.tensors) {
    header["tensors"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * 8;
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(m(i, j)));
    }
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(path.string() + " is not a checkpoint (bad magic)");
  }
  const std::uint64_t header_len = get_u64(bytes.data() + 8);
  if (16 + header_len > bytes.size()) throw Error("truncated checkpoint header in " + path.string());
  const std::string text(reinterpret_cast<const char*>(bytes.data() + 16), header_len);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  const std::size_t data_start = 16 + header_len;

  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto& t : header.at("tensors")) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    const auto offset = t.at("offset").get<std::uint64_t>();
    const std::uint64_t need = static_cast<std::uint64_t>(rows * cols) * 8;
    if (data_start + offset + need > bytes.size()) throw Error("truncated tensor data in " + path.string());
    Eigen::MatrixXd m(rows, cols);
    const unsigned char* p = bytes.data() + data_start + offset;
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = std::bit_cast<double>(get_u64(p));
        p += 8;
      }
    }
    ckpt.tensors.emplace(t.at("name").get<std::string>(), std::move(m));
  }
  return ckpt;
}

}  // namespace seqaug
