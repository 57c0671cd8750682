#pragma once

// Instance files, tabulated penalty CSVs, and locale-independent CSV output.
//
// Instance file (JSON):
//   {
//     "num_sources": 1, "num_channels": 1, "discount": 0.9,
//     "horizon": 100, "aoi_cap": 200, "initial_aoi": 1,
//     "sources": [
//       {"compute_budget": 1,
//        "tasks": [{"channel_width": 1, "weight": 1.0,
//                   "penalty": {"type": "linear", "slope": 1.0}}]}
//     ],
//     "mgf": {"iterations": 100, "step_source": 1.0, "step_channel": 1.0,
//             "reoptimize_every": 1}
//   }
// Penalty types: linear{slope}, exponential{rate}, logarithmic{scale},
// tabulated{values: [...]} or tabulated{csv: "path"} (relative to the file).

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtri/model.hpp"
#include "mtri/policies.hpp"

namespace mtri {

// Malformed or invalid instance data.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::vector<std::string> violations = {})
      : std::runtime_error(what), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

// Shortest round-trip decimal form, independent of the global locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { add_row(header); }

  void add_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += fields[i];
    }
    text_ += '\n';
  }

  const std::string& str() const { return text_; }
  void save(const std::filesystem::path& path) const { write_file(path, text_); }

 private:
  std::string text_;
};

// Two-column CSV `aoi,error` with rows for aoi = 1..L in order.
inline TabulatedPenalty load_penalty_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty penalty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "aoi,error") throw ConfigError(path.string() + ": header must be `aoi,error`");
  TabulatedPenalty table;
  std::int64_t expected = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ": malformed row `" + line + "`");
    std::int64_t aoi = 0;
    double err = 0.0;
    const auto a = std::from_chars(line.data(), line.data() + comma, aoi);
    const auto e = std::from_chars(line.data() + comma + 1, line.data() + line.size(), err);
    if (a.ec != std::errc{} || a.ptr != line.data() + comma || e.ec != std::errc{} ||
        e.ptr != line.data() + line.size())
      throw ConfigError(path.string() + ": malformed row `" + line + "`");
    if (aoi != expected)
      throw ConfigError(path.string() + ": expected aoi " + std::to_string(expected) + ", found " +
                        std::to_string(aoi));
    table.values.push_back(err);
    ++expected;
  }
  if (table.values.empty()) throw ConfigError(path.string() + ": penalty table has no rows");
  return table;
}

namespace detail {

using nlohmann::json;

inline PenaltyFunction penalty_from_json(const json& j, const std::filesystem::path& base_dir) {
  const auto type = j.at("type").get<std::string>();
  if (type == "linear") return LinearPenalty{j.value("slope", 1.0)};
  if (type == "exponential") return ExponentialPenalty{j.value("rate", 0.5)};
  if (type == "logarithmic") return LogarithmicPenalty{j.value("scale", 10.0)};
  if (type == "tabulated") {
    if (j.contains("csv")) {
      std::filesystem::path p = j.at("csv").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return load_penalty_csv(p);
    }
    return TabulatedPenalty{j.at("values").get<std::vector<double>>()};
  }
  throw ConfigError("unknown penalty type `" + type + "`");
}

inline json penalty_to_json(const PenaltyFunction& p) {
  return std::visit(
      [](const auto& v) -> json {
        using P = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<P, LinearPenalty>) return {{"type", "linear"}, {"slope", v.slope}};
        else if constexpr (std::is_same_v<P, ExponentialPenalty>)
          return {{"type", "exponential"}, {"rate", v.rate}};
        else if constexpr (std::is_same_v<P, LogarithmicPenalty>)
          return {{"type", "logarithmic"}, {"scale", v.scale}};
        else return {{"type", "tabulated"}, {"values", v.values}};
      },
      p);
}

}  // namespace detail

inline SystemConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  SystemConfig c;
  try {
    c.num_sources = j.at("num_sources").get<std::int64_t>();
    c.num_channels = j.at("num_channels").get<std::int64_t>();
    c.discount = j.at("discount").get<double>();
    c.horizon = j.value("horizon", std::int64_t{100});
    c.aoi_cap = j.value("aoi_cap", std::int64_t{200});
    c.initial_aoi = j.value("initial_aoi", Aoi{1});
    for (const auto& sj : j.at("sources")) {
      SourceConfig s;
      s.compute_budget = sj.at("compute_budget").get<std::int64_t>();
      for (const auto& tj : sj.at("tasks")) {
        TaskConfig t;
        t.channel_width = tj.value("channel_width", std::int64_t{1});
        t.weight = tj.value("weight", 1.0);
        t.penalty = detail::penalty_from_json(tj.at("penalty"), base_dir);
        if (tj.contains("initial_aoi")) t.initial_aoi = tj.at("initial_aoi").get<Aoi>();
        s.tasks.push_back(std::move(t));
      }
      c.sources.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance: ") + e.what());
  }
  return c;
}

inline nlohmann::json config_to_json(const SystemConfig& c) {
  nlohmann::json j;
  j["num_sources"] = c.num_sources;
  j["num_channels"] = c.num_channels;
  j["discount"] = c.discount;
  j["horizon"] = c.horizon;
  j["aoi_cap"] = c.aoi_cap;
  j["initial_aoi"] = c.initial_aoi;
  j["sources"] = nlohmann::json::array();
  for (const auto& s : c.sources) {
    nlohmann::json sj{{"compute_budget", s.compute_budget}, {"tasks", nlohmann::json::array()}};
    for (const auto& t : s.tasks) {
      nlohmann::json tj{{"channel_width", t.channel_width},
                        {"weight", t.weight},
                        {"penalty", detail::penalty_to_json(t.penalty)}};
      if (t.initial_aoi) tj["initial_aoi"] = *t.initial_aoi;
      sj["tasks"].push_back(std::move(tj));
    }
    j["sources"].push_back(std::move(sj));
  }
  return j;
}

// Optional "mgf" block of an instance file.
inline MgfPolicy mgf_settings_from_json(const nlohmann::json& j) {
  MgfPolicy p;
  if (!j.contains("mgf")) return p;
  try {
    const auto& m = j.at("mgf");
    p.dual.iterations = m.value("iterations", p.dual.iterations);
    p.reoptimize_every = m.value("reoptimize_every", p.reoptimize_every);
    p.dual.base_step_channel = m.value("step_channel", p.dual.base_step_channel);
    if (m.contains("step_source")) {
      const auto& s = m.at("step_source");
      if (s.is_array()) p.dual.base_step_source = s.get<std::vector<double>>();
      else p.dual.base_step_source.assign(j.at("sources").size(), s.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed mgf settings: ") + e.what());
  }
  return p;
}

inline nlohmann::json parse_json_file(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

struct LoadedInstance {
  SystemConfig config;
  MgfPolicy mgf;
};

// Parses and validates; invalid instances raise ConfigError carrying every
// violation.
inline LoadedInstance load_instance(const std::filesystem::path& path) {
  const auto j = parse_json_file(path);
  LoadedInstance out{config_from_json(j, path.parent_path()), mgf_settings_from_json(j)};
  auto violations = validate_config(out.config);
  if (out.mgf.dual.iterations < 1) violations.push_back("mgf.iterations: must be at least 1");
  if (out.mgf.reoptimize_every < 1) violations.push_back("mgf.reoptimize_every: must be at least 1");
  if (!(out.mgf.dual.base_step_channel > 0.0)) violations.push_back("mgf.step_channel: must be positive");
  if (!out.mgf.dual.base_step_source.empty() &&
      out.mgf.dual.base_step_source.size() != out.config.sources.size())
    violations.push_back("mgf.step_source: needs one entry per source");
  for (double b : out.mgf.dual.base_step_source)
    if (!(b > 0.0)) violations.push_back("mgf.step_source: must be positive");
  if (!violations.empty()) throw ConfigError(path.string() + ": invalid configuration", std::move(violations));
  return out;
}

}  // namespace mtri
