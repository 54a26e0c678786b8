#include "seqaug/config.hpp"

#include "seqaug/augment.hpp"
#include "seqaug/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace seqaug {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidArgument("config " + key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("config " + key + ": expected a number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("config " + key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

struct Entry {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define SIZE_ENTRY(KEY, FIELD)                                                             \
  Entry {                                                                                  \
    KEY, [](const RunConfig& c) { return std::to_string(c.FIELD); },                       \
        [](RunConfig& c, const std::string& v) { c.FIELD = parse_int<decltype(c.FIELD)>(KEY, v); } \
  }
#define DOUBLE_ENTRY(KEY, FIELD)                                          \
  Entry {                                                                 \
    KEY, [](const RunConfig& c) { return format_double(c.FIELD); },       \
        [](RunConfig& c, const std::string& v) { c.FIELD = parse_double(KEY, v); } \
  }
#define STRING_ENTRY(KEY, FIELD)                                 \
  Entry {                                                        \
    KEY, [](const RunConfig& c) { return c.FIELD; },             \
        [](RunConfig& c, const std::string& v) { c.FIELD = v; }  \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      SIZE_ENTRY("run.seed", seed),
      STRING_ENTRY("run.out", out),
      STRING_ENTRY("data.source", data.source),
      STRING_ENTRY("data.path", data.path),
      SIZE_ENTRY("data.users", data.synthetic.users),
      SIZE_ENTRY("data.vocab", data.synthetic.vocab),
      SIZE_ENTRY("data.min_len", data.synthetic.min_len),
      SIZE_ENTRY("data.gen_max_len", data.synthetic.max_len),
      SIZE_ENTRY("data.order", data.synthetic.order),
      SIZE_ENTRY("data.successors", data.synthetic.successors),
      DOUBLE_ENTRY("data.successor_mass", data.synthetic.successor_mass),
      SIZE_ENTRY("data.seed", data.seed),
      SIZE_ENTRY("data.max_len", data.max_len),
      SIZE_ENTRY("model.d", model.d),
      SIZE_ENTRY("model.d_prime", model.d_prime),
      SIZE_ENTRY("model.pad_k", model.pad_k),
      DOUBLE_ENTRY("model.emb_std", model.emb_std),
      DOUBLE_ENTRY("sinkhorn.delta", sinkhorn.delta),
      SIZE_ENTRY("sinkhorn.iters", sinkhorn.iters),
      Entry{"sinkhorn.hard", [](const RunConfig& c) { return std::string(c.sinkhorn.hard ? "true" : "false"); },
            [](RunConfig& c, const std::string& v) { c.sinkhorn.hard = parse_bool("sinkhorn.hard", v); }},
      DOUBLE_ENTRY("objective.epsilon", objective.epsilon),
      DOUBLE_ENTRY("objective.gamma", objective.gamma),
      DOUBLE_ENTRY("objective.tau", objective.tau),
      DOUBLE_ENTRY("objective.lambda_div", objective.lambda_div),
      DOUBLE_ENTRY("objective.lambda_ndcg", objective.lambda_ndcg),
      SIZE_ENTRY("objective.negatives", objective.negatives),
      STRING_ENTRY("train.method", train.method),
      SIZE_ENTRY("train.epochs", train.epochs),
      SIZE_ENTRY("train.batch_size", train.batch_size),
      DOUBLE_ENTRY("train.lr_gen", train.lr_gen),
      DOUBLE_ENTRY("train.lr_rec", train.lr_rec),
      DOUBLE_ENTRY("train.momentum", train.momentum),
      DOUBLE_ENTRY("train.beta", train.beta),
      SIZE_ENTRY("train.warmup_gen_epochs", train.warmup_gen_epochs),
      DOUBLE_ENTRY("train.noise_ratio", train.noise_ratio),
      Entry{"sweep.ratios",
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.sweep.ratios.size(); ++i) {
                if (i) s += ", ";
                s += format_double(c.sweep.ratios[i]);
              }
              return s;
            },
            [](RunConfig& c, const std::string& v) {
              c.sweep.ratios.clear();
              for (const auto& part : split_list(v)) c.sweep.ratios.push_back(parse_double("sweep.ratios", part));
            }},
      SIZE_ENTRY("sweep.seeds", sweep.seeds),
      Entry{"sweep.methods",
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.sweep.methods.size(); ++i) {
                if (i) s += ", ";
                s += c.sweep.methods[i];
              }
              return s;
            },
            [](RunConfig& c, const std::string& v) { c.sweep.methods = split_list(v); }},
      SIZE_ENTRY("sweep.jobs", sweep.jobs),
  };
  return table;
}

#undef SIZE_ENTRY
#undef DOUBLE_ENTRY
#undef STRING_ENTRY

const Entry& find_entry(const std::string& key) {
  std::string full = key;
  if (key == "seed" || key == "out") full = "run." + key;
  for (const Entry& e : entries()) {
    if (e.key == full) return e;
  }
  throw InvalidArgument("unknown config key '" + key + "'");
}

}  // namespace

std::string format_double(double v) {
  // shortest representation that round-trips
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void RunConfig::set(const std::string& key, const std::string& value) { find_entry(key).set(*this, trim(value)); }

std::string RunConfig::get(const std::string& key) const { return find_entry(key).get(*this); }

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const Entry& e : entries()) out.push_back(e.key);
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  std::string section;
  for (const Entry& e : entries()) {
    const auto dot = e.key.find('.');
    const std::string sec = e.key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += e.key.substr(dot + 1) + " = " + e.get(*this) + "\n";
  }
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section = "run";
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    try {
      cfg.set(section + "." + key, line.substr(eq + 1));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config " + path.string());
  out << to_text();
}

void RunConfig::check() const {
  if (data.source != "synthetic" && data.source != "tsv") {
    throw InvalidArgument("data.source must be synthetic or tsv, got '" + data.source + "'");
  }
  if (data.source == "tsv" && data.path.empty()) throw InvalidArgument("data.path is required for tsv data");
  if (data.max_len < 2) throw InvalidArgument("data.max_len must be at least 2");
  if (model.d == 0 || model.d_prime == 0) throw InvalidArgument("model dimensions must be positive");
  if (model.emb_std <= 0.0) throw InvalidArgument("model.emb_std must be positive");
  if (train.batch_size < 2) throw InvalidArgument("train.batch_size must be at least 2");
  if (train.lr_gen < 0.0 || train.lr_rec < 0.0) throw InvalidArgument("learning rates must be nonnegative");
  if (train.momentum < 0.0 || train.momentum >= 1.0) throw InvalidArgument("train.momentum must be in [0, 1)");
  if (train.beta < 0.0) throw InvalidArgument("train.beta must be nonnegative");
  if (train.noise_ratio < 0.0 || train.noise_ratio > 1.0) throw InvalidArgument("train.noise_ratio must be in [0, 1]");
  for (double r : sweep.ratios) {
    if (r < 0.0 || r > 1.0) throw InvalidArgument("sweep ratios must lie in [0, 1]");
  }
  if (sweep.jobs == 0) throw InvalidArgument("sweep.jobs must be positive");
  sinkhorn.check();
  objective.check();
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw InvalidArgument("override '" + assignment + "' is not key=value");
  cfg.set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

}  // namespace seqaug
