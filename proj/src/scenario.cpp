#include "cosmo_rul/scenario.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include "cosmo_rul/error.hpp"
#include "text.hpp"

namespace cosmo_rul {

namespace {

using enum SubsetId;
using G = ScenarioGroup;

// Labels follow the supplementary scenario table. G2 is listed there as
// FD002->FD001, which contradicts its own fault/condition columns; FD003->FD002
// is the pair that matches "fewer fault and new OCs".
constexpr std::array<ScenarioInfo, 16> kScenarios{{
    {"A1", FD001, FD001, G::SamePopulation},
    {"A2", FD002, FD002, G::SamePopulation},
    {"A3", FD003, FD003, G::SamePopulation},
    {"A4", FD004, FD004, G::SamePopulation},
    {"B1", FD001, FD003, G::NewFault},
    {"B2", FD002, FD004, G::NewFault},
    {"C1", FD001, FD002, G::NewOcs},
    {"C2", FD003, FD004, G::NewOcs},
    {"D", FD001, FD004, G::NewFaultNewOcs},
    {"E1", FD003, FD001, G::FewerFault},
    {"E2", FD004, FD002, G::FewerFault},
    {"F1", FD002, FD001, G::FewerOcs},
    {"F2", FD004, FD003, G::FewerOcs},
    {"G1", FD002, FD003, G::NewFaultFewerOcs},
    {"G2", FD003, FD002, G::FewerFaultNewOcs},
    {"H", FD004, FD001, G::FewerFaultFewerOcs},
}};

std::vector<std::string> parse_list(std::string_view value, std::size_t line_no) {
  std::vector<std::string> out;
  value = text::trim(value);
  if (value.empty() || value.front() != '[') {
    for (auto tok : text::split_ws(value)) out.emplace_back(tok);
    return out;
  }
  if (value.back() != ']') throw ParseError(line_no, "unterminated list");
  value = value.substr(1, value.size() - 2);
  // Comma separated, items optionally double-quoted (quoted items may contain
  // commas, e.g. "ST,T").
  std::size_t i = 0;
  while (i < value.size()) {
    while (i < value.size() && (value[i] == ' ' || value[i] == '\t')) ++i;
    if (i >= value.size()) break;
    std::string item;
    if (value[i] == '"') {
      const auto end = value.find('"', i + 1);
      if (end == std::string_view::npos) throw ParseError(line_no, "unterminated string");
      item = std::string(value.substr(i + 1, end - i - 1));
      i = end + 1;
      while (i < value.size() && (value[i] == ' ' || value[i] == '\t')) ++i;
      if (i < value.size() && value[i] != ',') throw ParseError(line_no, "expected ','");
    } else {
      const auto end = value.find(',', i);
      item = std::string(text::trim(value.substr(i, end == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : end - i)));
      i = end == std::string_view::npos ? value.size() : end;
    }
    if (item.empty()) throw ParseError(line_no, "empty list item");
    out.push_back(std::move(item));
    ++i;  // skip ','
  }
  return out;
}

std::string unquote(std::string_view v) {
  v = text::trim(v);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return std::string(v);
}

long long parse_int_value(std::string_view key, std::string_view value, std::size_t line_no) {
  auto v = text::to_int(unquote(value));
  if (!v) throw ParseError(line_no, std::string(key) + " expects an integer");
  return *v;
}

}  // namespace

std::string_view to_string(ScenarioGroup group) {
  switch (group) {
    case G::SamePopulation: return "Same population";
    case G::NewFault: return "New fault";
    case G::FewerFault: return "Fewer fault";
    case G::NewOcs: return "New OCs";
    case G::FewerOcs: return "Fewer OCs";
    case G::NewFaultNewOcs: return "New fault & new OCs";
    case G::NewFaultFewerOcs: return "New fault & fewer OCs";
    case G::FewerFaultNewOcs: return "Fewer fault & new OCs";
    case G::FewerFaultFewerOcs: return "Fewer fault & fewer OCs";
  }
  return "?";
}

std::span<const ScenarioInfo> scenario_table() { return kScenarios; }

const ScenarioInfo& find_scenario(std::string_view label) {
  for (const auto& s : kScenarios) {
    if (s.label == label) return s;
  }
  fail(ErrorCode::InvalidArgument, "unknown scenario '" + std::string(label) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Raw: return "raw";
    case Method::Coral: return "coral";
    case Method::Cosmo: return "cosmo";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "raw") return Method::Raw;
  if (text == "coral") return Method::Coral;
  if (text == "cosmo") return Method::Cosmo;
  if (text == "tca" || text == "scl") {
    fail(ErrorCode::InvalidArgument, "method '" + std::string(text) + "' is not available");
  }
  fail(ErrorCode::InvalidArgument, "unknown method '" + std::string(text) + "'");
}

std::vector<int> ScenarioSpec::default_curve_limits() {
  std::vector<int> limits;
  for (int l = 10; l <= 130; l += 10) limits.push_back(l);
  return limits;
}

ScenarioSpec ScenarioSpec::for_scenario(std::string_view label) {
  const ScenarioInfo& info = find_scenario(label);
  ScenarioSpec spec;
  spec.label = std::string(info.label);
  spec.source = info.source;
  spec.target = info.target;
  return spec;
}

std::string ScenarioSpec::method_tag() const {
  if (method != Method::Cosmo) return std::string(to_string(method));
  return "cosmo_" + std::string(distance.name()) + "_" + mode.to_string('-');
}

std::string ScenarioSpec::canonical() const {
  std::ostringstream out;
  out << "label=" << label << ";source=" << to_string(source) << ";target=" << to_string(target)
      << ";eval_mode=" << to_string(eval_mode) << ";method=" << to_string(method);
  if (method == Method::Cosmo) {
    out << ";distance=" << distance.name() << ";k=" << distance.k
        << ";mode=" << mode.to_string() << ";ref_size=" << ref_size << ";tau=" << tau
        << ";n_conditions=" << n_conditions;
  }
  if (method == Method::Coral) out << ";coral_epsilon=" << text::format_double(coral_epsilon);
  out << ";repetitions=" << repetitions << ";seed=" << seed << ";folds=" << folds
      << ";tau_max=" << tau_max << ";rul_limit=" << rul_limit << ";curve_limits=";
  for (std::size_t i = 0; i < curve_limits.size(); ++i) {
    out << (i ? "," : "") << curve_limits[i];
  }
  out << ";trees=" << forest.n_trees << ";max_features=" << forest.max_features
      << ";min_leaf=" << forest.min_samples_leaf << ";max_depth=" << forest.max_depth
      << ";bootstrap=" << (forest.bootstrap ? 1 : 0);
  return out.str();
}

std::uint64_t ScenarioSpec::config_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ScenarioSpec::validate() const {
  const ScenarioInfo& info = find_scenario(label);
  if (info.source != source || info.target != target) {
    fail(ErrorCode::InvalidArgument, "scenario " + label + " is " +
                                         std::string(to_string(info.source)) + "->" +
                                         std::string(to_string(info.target)));
  }
  require(repetitions >= 1, "repetitions must be >= 1");
  require(folds >= 2, "folds must be >= 2");
  require(ref_size >= 1, "ref_size must be >= 1");
  require(tau >= 1, "tau must be >= 1");
  require(tau_max >= 1, "tau_max must be >= 1");
  require(rul_limit >= 1, "rul_limit must be >= 1");
  require(n_conditions >= 1, "n_conditions must be >= 1");
  require(coral_epsilon > 0.0, "coral_epsilon must be positive");
  if (method == Method::Cosmo && distance.kind != DistanceKind::Mcp) {
    require(distance.k >= 1, "k must be >= 1");
    require(static_cast<std::size_t>(distance.k) <= ref_size, "k must not exceed ref_size");
  }
  for (std::size_t i = 0; i < curve_limits.size(); ++i) {
    require(curve_limits[i] >= 1, "curve limits must be >= 1");
    require(i == 0 || curve_limits[i] > curve_limits[i - 1],
            "curve limits must be strictly ascending");
  }
  require(forest.n_trees >= 1, "trees must be >= 1");
  require(forest.min_samples_leaf >= 1, "min_leaf must be >= 1");
  require(forest.max_features >= 0 &&
              static_cast<std::size_t>(forest.max_features) <= kNumFeatures,
          "max_features must be in [0, 24]");
  require(forest.max_depth >= 0, "max_depth must be >= 0");
  require(forest.n_threads >= 1, "threads must be >= 1");
}

MatrixConfig parse_matrix_config(std::istream& in) {
  ScenarioSpec base;
  base.repetitions = 10;
  std::vector<std::string> scenarios;
  std::vector<std::string> methods{"raw"};
  std::vector<std::string> distances{"mknn"};
  std::vector<std::string> modes{"ST,ST"};
  MatrixConfig config;
  std::map<std::string, std::size_t> seen;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = text::trim(view);
    if (view.empty()) continue;
    if (view.front() == '[' && view.back() == ']') continue;  // section headers are ignored
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(text::trim(view.substr(0, eq)));
    const std::string_view value = text::trim(view.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (seen.count(key)) {
      throw ParseError(line_no, "duplicate key '" + key + "' (first on line " +
                                    std::to_string(seen[key]) + ")");
    }
    seen[key] = line_no;

    auto as_int = [&](long long lo) {
      const long long v = parse_int_value(key, value, line_no);
      if (v < lo || v > std::numeric_limits<int>::max()) {
        throw ParseError(line_no, key + " out of range");
      }
      return static_cast<int>(v);
    };

    try {
      if (key == "scenarios") {
        scenarios = parse_list(value, line_no);
      } else if (key == "methods") {
        methods = parse_list(value, line_no);
      } else if (key == "distances") {
        distances = parse_list(value, line_no);
      } else if (key == "modes") {
        modes = parse_list(value, line_no);
      } else if (key == "eval_mode") {
        base.eval_mode = parse_split(unquote(value));
      } else if (key == "repetitions") {
        base.repetitions = as_int(1);
      } else if (key == "seed") {
        auto v = text::to_uint64(unquote(value));
        if (!v) throw ParseError(line_no, "seed expects a nonnegative integer");
        base.seed = *v;
      } else if (key == "folds") {
        base.folds = as_int(2);
      } else if (key == "ref_size") {
        base.ref_size = static_cast<std::size_t>(as_int(1));
      } else if (key == "k") {
        base.distance.k = as_int(1);
      } else if (key == "tau") {
        base.tau = as_int(1);
      } else if (key == "tau_max") {
        base.tau_max = as_int(1);
      } else if (key == "rul_limit") {
        base.rul_limit = as_int(1);
      } else if (key == "n_conditions") {
        base.n_conditions = as_int(1);
      } else if (key == "curve_limits") {
        base.curve_limits.clear();
        for (const auto& item : parse_list(value, line_no)) {
          auto v = text::to_int(item);
          if (!v || *v < 1) throw ParseError(line_no, "curve_limits expects positive integers");
          base.curve_limits.push_back(static_cast<int>(*v));
        }
      } else if (key == "coral_epsilon") {
        auto v = text::to_double(unquote(value));
        if (!v || !(*v > 0.0)) throw ParseError(line_no, "coral_epsilon must be positive");
        base.coral_epsilon = *v;
      } else if (key == "trees") {
        base.forest.n_trees = as_int(1);
      } else if (key == "min_leaf") {
        base.forest.min_samples_leaf = as_int(1);
      } else if (key == "max_features") {
        base.forest.max_features = as_int(0);
      } else if (key == "max_depth") {
        base.forest.max_depth = as_int(0);
      } else if (key == "bootstrap") {
        const std::string v = unquote(value);
        if (v != "true" && v != "false") throw ParseError(line_no, "bootstrap expects true/false");
        base.forest.bootstrap = v == "true";
      } else if (key == "threads") {
        base.forest.n_threads = as_int(1);
      } else if (key == "data_root") {
        config.data_root = unquote(value);
      } else {
        throw ParseError(line_no, "unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }

  if (scenarios.empty()) throw ParseError(line_no, "missing 'scenarios'");
  if (scenarios.size() == 1 && scenarios[0] == "all") {
    scenarios.clear();
    for (const auto& s : kScenarios) scenarios.emplace_back(s.label);
  }
  const auto at = [&](const char* key) { return seen.count(key) ? seen[key] : line_no; };
  for (const auto& label : scenarios) {
    for (const auto& m : methods) {
      ScenarioSpec spec = base;
      try {
        const ScenarioInfo& info = find_scenario(label);
        spec.label = std::string(info.label);
        spec.source = info.source;
        spec.target = info.target;
      } catch (const Error& e) {
        throw ParseError(at("scenarios"), e.what());
      }
      try {
        spec.method = parse_method(m);
      } catch (const Error& e) {
        throw ParseError(at("methods"), e.what());
      }
      if (spec.method != Method::Cosmo) {
        spec.validate();
        config.specs.push_back(spec);
        continue;
      }
      for (const auto& d : distances) {
        for (const auto& md : modes) {
          ScenarioSpec c = spec;
          try {
            c.distance = DistanceMethod::parse(d, base.distance.k);
          } catch (const Error& e) {
            throw ParseError(at("distances"), e.what());
          }
          try {
            c.mode = ReferenceMode::parse(md);
          } catch (const Error& e) {
            throw ParseError(at("modes"), e.what());
          }
          c.validate();
          config.specs.push_back(c);
        }
      }
    }
  }
  return config;
}

MatrixConfig load_matrix_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
  try {
    return parse_matrix_config(in);
  } catch (const ParseError& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace cosmo_rul
