#include "cosmo_rul/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "cosmo_rul/error.hpp"
#include "text.hpp"

namespace cosmo_rul {

namespace {

constexpr std::size_t kColumns = 2 + kNumFeatures;
constexpr std::string_view kCacheMagic = "cosmo_rul-subset";
constexpr int kCacheVersion = 1;

void write_sample(std::ostream& out, const Sample& s) {
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    out << ' ' << text::format_double(s[j]);
  }
}

Sample parse_sample(std::span<const std::string_view> tokens, std::size_t line_no) {
  Sample s{};
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    auto v = text::to_double(tokens[j]);
    if (!v) {
      throw ParseError(line_no, "non-numeric token '" + std::string(tokens[j]) + "'");
    }
    if (!std::isfinite(*v)) {
      throw ParseError(line_no, "non-finite value '" + std::string(tokens[j]) + "'");
    }
    s[j] = *v;
  }
  return s;
}

}  // namespace

std::string_view to_string(SubsetId id) {
  switch (id) {
    case SubsetId::FD001: return "FD001";
    case SubsetId::FD002: return "FD002";
    case SubsetId::FD003: return "FD003";
    case SubsetId::FD004: return "FD004";
  }
  return "?";
}

std::string_view to_string(Split split) {
  return split == Split::Alpha ? "alpha" : "beta";
}

SubsetId parse_subset_id(std::string_view text) {
  std::string t(text);
  for (char& c : t) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (t == "FD001" || t == "1") return SubsetId::FD001;
  if (t == "FD002" || t == "2") return SubsetId::FD002;
  if (t == "FD003" || t == "3") return SubsetId::FD003;
  if (t == "FD004" || t == "4") return SubsetId::FD004;
  fail(ErrorCode::InvalidArgument, "unknown subset '" + std::string(text) + "'");
}

Split parse_split(std::string_view text) {
  if (text == "alpha" || text == "train") return Split::Alpha;
  if (text == "beta" || text == "test") return Split::Beta;
  fail(ErrorCode::InvalidArgument, "unknown split '" + std::string(text) + "'");
}

std::size_t Subset::num_samples() const noexcept {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.length();
  return n;
}

void Subset::validate() const {
  for (const auto& t : trajectories) {
    if (t.samples.empty()) {
      fail(ErrorCode::Structure, "unit " + std::to_string(t.unit_id) + " has no samples");
    }
    if (split == Split::Alpha && t.censored_rul) {
      fail(ErrorCode::Structure, "alpha trajectory " + std::to_string(t.unit_id) +
                                     " carries a censored RUL");
    }
    if (split == Split::Beta && !t.censored_rul) {
      fail(ErrorCode::Structure,
           "beta trajectory " + std::to_string(t.unit_id) + " lacks a censored RUL");
    }
  }
}

std::vector<Trajectory> parse_cmapss(std::istream& in) {
  std::vector<Trajectory> out;
  std::set<int> finished_units;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = text::split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != kColumns) {
      throw ParseError(line_no, "expected " + std::to_string(kColumns) + " fields, found " +
                                    std::to_string(tokens.size()));
    }
    auto unit = text::to_int(tokens[0]);
    auto cycle = text::to_int(tokens[1]);
    if (!unit || !cycle) {
      throw ParseError(line_no, "unit and cycle must be integers");
    }
    if (*unit <= 0) throw ParseError(line_no, "unit id must be positive");
    Sample s = parse_sample(std::span(tokens).subspan(2), line_no);

    const int unit_id = static_cast<int>(*unit);
    if (out.empty() || out.back().unit_id != unit_id) {
      if (!out.empty()) finished_units.insert(out.back().unit_id);
      if (finished_units.contains(unit_id)) {
        fail(ErrorCode::Structure,
             "unit " + std::to_string(unit_id) + ": rows are not contiguous (line " +
                 std::to_string(line_no) + ")");
      }
      out.push_back(Trajectory{unit_id, {}, std::nullopt});
    }
    Trajectory& t = out.back();
    const long long expected = static_cast<long long>(t.samples.size()) + 1;
    if (*cycle != expected) {
      fail(ErrorCode::Structure, "unit " + std::to_string(unit_id) + ": expected cycle " +
                                     std::to_string(expected) + ", found " +
                                     std::to_string(*cycle) + " (line " +
                                     std::to_string(line_no) + ")");
    }
    t.samples.push_back(s);
  }
  if (in.bad()) fail(ErrorCode::Io, "read error while parsing trajectories");
  return out;
}

std::vector<int> parse_rul_list(std::istream& in) {
  std::vector<int> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = text::split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 1) throw ParseError(line_no, "expected a single RUL value");
    auto v = text::to_int(tokens[0]);
    if (!v) throw ParseError(line_no, "RUL must be an integer");
    if (*v < 0) throw ParseError(line_no, "RUL must be nonnegative");
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

std::vector<Trajectory> attach_censored_rul(std::vector<Trajectory> trajectories,
                                            std::span<const int> ruls) {
  if (ruls.size() != trajectories.size()) {
    fail(ErrorCode::InvalidArgument,
         "RUL count " + std::to_string(ruls.size()) + " does not match trajectory count " +
             std::to_string(trajectories.size()));
  }
  for (std::size_t i = 0; i < ruls.size(); ++i) {
    if (ruls[i] < 0) {
      fail(ErrorCode::InvalidArgument,
           "negative RUL for unit " + std::to_string(trajectories[i].unit_id));
    }
    trajectories[i].censored_rul = ruls[i];
  }
  return trajectories;
}

RulTarget label_rul(const Trajectory& trajectory, int tau_max) {
  require(tau_max > 0, "tau_max must be positive");
  if (trajectory.censored_rul) {
    fail(ErrorCode::InvalidArgument,
         "unit " + std::to_string(trajectory.unit_id) +
             " is censored; use attach_censored_rul/truth_rul for its targets");
  }
  const auto l = static_cast<long long>(trajectory.length());
  RulTarget y{std::vector<int>(trajectory.length()), tau_max};
  for (long long t = 1; t <= l; ++t) {
    y.values[t - 1] = (l - tau_max <= t) ? static_cast<int>(l - t) : tau_max;
  }
  return y;
}

RulTarget truth_rul(const Trajectory& trajectory, int tau_max) {
  if (!trajectory.censored_rul) return label_rul(trajectory, tau_max);
  require(tau_max > 0, "tau_max must be positive");
  const auto l = static_cast<long long>(trajectory.length());
  const long long at_end = *trajectory.censored_rul;
  RulTarget y{std::vector<int>(trajectory.length()), tau_max};
  for (long long t = 1; t <= l; ++t) {
    y.values[t - 1] = static_cast<int>(std::min<long long>(at_end + (l - t), tau_max));
  }
  return y;
}

NominalPool extract_nominal(std::span<const Trajectory> trajectories, int tau) {
  require(tau >= 1, "nominal window tau must be >= 1");
  if (trajectories.empty()) {
    fail(ErrorCode::InvalidArgument, "cannot build a nominal pool from zero trajectories");
  }
  NominalPool pool{{}, tau};
  for (const auto& t : trajectories) {
    const std::size_t n = std::min<std::size_t>(t.length(), static_cast<std::size_t>(tau));
    pool.samples.insert(pool.samples.end(), t.samples.begin(), t.samples.begin() + n);
  }
  return pool;
}

void write_cmapss(std::ostream& out, std::span<const Trajectory> trajectories) {
  for (const auto& t : trajectories) {
    for (std::size_t c = 0; c < t.length(); ++c) {
      out << t.unit_id << ' ' << (c + 1);
      write_sample(out, t.samples[c]);
      out << '\n';
    }
  }
}

void write_rul_list(std::ostream& out, std::span<const Trajectory> trajectories) {
  for (const auto& t : trajectories) {
    require(t.censored_rul.has_value(), "write_rul_list needs censored trajectories");
    out << *t.censored_rul << '\n';
  }
}

void write_subset_cache(std::ostream& out, const Subset& subset) {
  out << kCacheMagic << ' ' << kCacheVersion << '\n';
  out << "subset " << to_string(subset.id) << '\n';
  out << "split " << to_string(subset.split) << '\n';
  out << "trajectories " << subset.trajectories.size() << '\n';
  for (const auto& t : subset.trajectories) {
    out << "unit " << t.unit_id << ' ' << t.length() << ' ';
    if (t.censored_rul) {
      out << *t.censored_rul;
    } else {
      out << '-';
    }
    out << '\n';
    for (std::size_t c = 0; c < t.length(); ++c) {
      out << (c + 1);
      write_sample(out, t.samples[c]);
      out << '\n';
    }
  }
}

Subset read_subset_cache(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::vector<std::string_view> {
    while (std::getline(in, line)) {
      ++line_no;
      auto tokens = text::split_ws(line);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(line_no, "unexpected end of cache file");
  };
  auto expect_key = [&](std::string_view key) {
    auto tokens = next();
    if (tokens.size() != 2 || tokens[0] != key) {
      throw ParseError(line_no, "expected '" + std::string(key) + " <value>'");
    }
    return std::string(tokens[1]);
  };

  {
    auto tokens = next();
    if (tokens.size() != 2 || tokens[0] != kCacheMagic || tokens[1] != "1") {
      throw ParseError(line_no, "not a cosmo_rul subset cache (version 1)");
    }
  }
  Subset subset;
  subset.id = parse_subset_id(expect_key("subset"));
  subset.split = parse_split(expect_key("split"));
  auto count = text::to_int(expect_key("trajectories"));
  if (!count || *count < 0) throw ParseError(line_no, "bad trajectory count");

  for (long long u = 0; u < *count; ++u) {
    auto header = next();
    if (header.size() != 4 || header[0] != "unit") {
      throw ParseError(line_no, "expected 'unit <id> <length> <rul|->'");
    }
    auto id = text::to_int(header[1]);
    auto length = text::to_int(header[2]);
    if (!id || !length || *id <= 0 || *length <= 0) {
      throw ParseError(line_no, "bad unit header");
    }
    Trajectory t{static_cast<int>(*id), {}, std::nullopt};
    if (header[3] != "-") {
      auto rul = text::to_int(header[3]);
      if (!rul || *rul < 0) throw ParseError(line_no, "bad censored RUL");
      t.censored_rul = static_cast<int>(*rul);
    }
    t.samples.reserve(static_cast<std::size_t>(*length));
    for (long long c = 1; c <= *length; ++c) {
      auto tokens = next();
      if (tokens.size() != 1 + kNumFeatures) {
        throw ParseError(line_no, "expected cycle plus 24 values");
      }
      auto cycle = text::to_int(tokens[0]);
      if (!cycle || *cycle != c) throw ParseError(line_no, "cycle out of order");
      t.samples.push_back(parse_sample(std::span(tokens).subspan(1), line_no));
    }
    subset.trajectories.push_back(std::move(t));
  }
  subset.validate();
  return subset;
}

std::filesystem::path trajectory_file(const std::filesystem::path& root, SubsetId id,
                                      Split split) {
  const std::string prefix = split == Split::Alpha ? "train_" : "test_";
  return root / (prefix + std::string(to_string(id)) + ".txt");
}

std::filesystem::path rul_file(const std::filesystem::path& root, SubsetId id) {
  return root / ("RUL_" + std::string(to_string(id)) + ".txt");
}

Subset load_subset(const std::filesystem::path& root, SubsetId id, Split split) {
  const auto path = trajectory_file(root, id, split);
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  Subset subset{id, split, {}};
  try {
    subset.trajectories = parse_cmapss(in);
  } catch (const ParseError& e) {
    fail(ErrorCode::Parse, path.filename().string() + ": " + e.what());
  }
  if (subset.trajectories.empty()) {
    fail(ErrorCode::Structure, path.string() + " contains no trajectories");
  }
  if (split == Split::Beta) {
    const auto rpath = rul_file(root, id);
    std::ifstream rin(rpath);
    if (!rin) fail(ErrorCode::Io, "cannot open " + rpath.string());
    auto ruls = parse_rul_list(rin);
    subset.trajectories = attach_censored_rul(std::move(subset.trajectories), ruls);
  }
  subset.validate();
  return subset;
}

}  // namespace cosmo_rul
