#include "cosmo_rul/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cosmo_rul/adapt.hpp"
#include "cosmo_rul/cosmo.hpp"
#include "cosmo_rul/error.hpp"
#include "cosmo_rul/forest.hpp"
#include "random.hpp"
#include "text.hpp"

namespace cosmo_rul {

namespace {

using Json = nlohmann::json;

constexpr std::uint64_t kFoldStream = 1;
constexpr std::uint64_t kGroupStream = 2;
constexpr std::uint64_t kForestStream = 3;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) { return text::format_double(v); }

std::string group_name(const std::string& label) {
  for (const auto& s : scenario_table()) {
    if (s.label == label) return std::string(to_string(s.group));
  }
  return "unknown";
}

std::vector<Sample> concat_samples(const std::vector<const Trajectory*>& trajs) {
  std::vector<Sample> out;
  for (const Trajectory* t : trajs) out.insert(out.end(), t->samples.begin(), t->samples.end());
  return out;
}

struct FoldData {
  FeatureMatrix train;
  std::vector<double> targets;
  FeatureMatrix target;
};

FoldData build_features(const ScenarioSpec& spec, const std::vector<const Trajectory*>& fit,
                        const std::vector<const Trajectory*>& target, std::uint64_t group_seed,
                        std::vector<std::string>& warnings) {
  FoldData d;
  const auto source_samples = concat_samples(fit);
  const auto target_samples = concat_samples(target);
  for (const Trajectory* t : fit) {
    const RulTarget y = label_rul(*t, spec.tau_max);
    d.targets.insert(d.targets.end(), y.values.begin(), y.values.end());
  }

  switch (spec.method) {
    case Method::Raw:
      d.train = raw_baseline(source_samples);
      d.target = raw_baseline(target_samples);
      break;
    case Method::Coral: {
      const FeatureMatrix source_raw = raw_baseline(source_samples);
      d.target = raw_baseline(target_samples);
      const CoralTransform t = fit_coral(source_raw, d.target, spec.coral_epsilon);
      for (const auto& w : t.warnings) warnings.push_back("CORAL: " + w);
      d.train = apply_coral(t, source_raw);
      break;
    }
    case Method::Cosmo: {
      std::vector<Trajectory> fit_copy;
      std::vector<Trajectory> target_copy;
      // Pools only need the first tau cycles of each trajectory.
      auto head = [&](const Trajectory* t) {
        Trajectory h;
        h.unit_id = t->unit_id;
        const auto n = std::min<std::size_t>(t->length(), static_cast<std::size_t>(spec.tau));
        h.samples.assign(t->samples.begin(), t->samples.begin() + static_cast<std::ptrdiff_t>(n));
        return h;
      };
      for (const Trajectory* t : fit) fit_copy.push_back(head(t));
      for (const Trajectory* t : target) target_copy.push_back(head(t));
      const NominalPool hs = extract_nominal(fit_copy, spec.tau);
      const NominalPool ht = extract_nominal(target_copy, spec.tau);
      const ModeGroups groups = build_mode_groups(spec.mode, hs, ht, spec.ref_size, group_seed);
      d.train = feature_matrix(source_samples, groups.fit, spec.distance);
      d.target = feature_matrix(target_samples, groups.predict, spec.distance);
      break;
    }
  }
  return d;
}

std::vector<UnitPrediction> unit_predictions(const std::vector<const Trajectory*>& target,
                                             std::span<const double> predictions, int tau_max) {
  std::vector<UnitPrediction> units;
  std::size_t row = 0;
  for (const Trajectory* t : target) {
    const RulTarget truth = truth_rul(*t, tau_max);
    UnitPrediction u;
    u.unit_id = t->unit_id;
    u.cycles.reserve(t->length());
    for (std::size_t i = 0; i < t->length(); ++i) {
      u.cycles.push_back({static_cast<int>(i + 1), static_cast<double>(truth.values[i]),
                          predictions[row++]});
    }
    units.push_back(std::move(u));
  }
  return units;
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + path.parent_path().string());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

constexpr const char* kSummaryFormat = "cosmo_rul-summary";

std::string summary_key(const ScenarioSpec& spec) {
  return spec.method_tag() + "@" + std::string(to_string(spec.eval_mode));
}

Json aggregate_json(const Aggregate& a) {
  return Json{{"mean", a.mean}, {"std", a.std}, {"n", a.n}};
}

Json result_json(const ExperimentResult& r) {
  const ScenarioSpec& s = r.spec;
  Json j{{"scenario", s.label},
         {"group", group_name(s.label)},
         {"source", std::string(to_string(s.source))},
         {"target", std::string(to_string(s.target))},
         {"eval_mode", std::string(to_string(s.eval_mode))},
         {"method", std::string(to_string(s.method))},
         {"method_tag", s.method_tag()},
         {"folds", s.folds},
         {"repetitions", s.repetitions},
         {"seed", s.seed},
         {"tau_max", s.tau_max},
         {"rul_limit", s.rul_limit},
         {"config_hash", hex64(s.config_hash())},
         {"config", s.canonical()},
         {"warnings", r.warnings}};
  if (s.method == Method::Cosmo) {
    j["distance"] = std::string(s.distance.name());
    j["k"] = s.distance.k;
    j["reference_mode"] = s.mode.to_string();
    j["ref_size"] = s.ref_size;
    j["tau"] = s.tau;
  }
  if (!r.ok()) {
    j["error"] = r.error;
    return j;
  }
  j["mape"] = aggregate_json(r.mape);
  j["rmse_last_cycle"] = aggregate_json(r.rmse_last_cycle);
  std::size_t excluded = 0;
  for (const auto& f : r.folds) excluded += f.report.n_units_excluded;
  j["n_units_excluded_total"] = excluded;
  Json curve = Json::array();
  for (const auto& [limit, mape] : r.mean_curve()) {
    curve.push_back(Json{{"limit", limit}, {"mape", std::isnan(mape) ? Json() : Json(mape)}});
  }
  j["curve"] = std::move(curve);
  return j;
}

// Minimal CSV row split; our own files never quote fields.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::size_t scenario_rank(const std::string& label) {
  const auto table = scenario_table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].label == label) return i;
  }
  return table.size();
}

}  // namespace

std::vector<int> cv_folds(std::size_t n_trajectories, int folds, std::uint64_t seed) {
  require(folds >= 2, "folds must be >= 2");
  if (n_trajectories < static_cast<std::size_t>(folds)) {
    fail(ErrorCode::InvalidArgument, std::to_string(n_trajectories) +
                                         " trajectories cannot fill " + std::to_string(folds) +
                                         " folds");
  }
  std::vector<std::size_t> order(n_trajectories);
  std::iota(order.begin(), order.end(), std::size_t{0});
  detail::Engine rng(seed);
  detail::shuffle(order, rng);
  std::vector<int> fold(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) {
    fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return fold;
}

std::shared_ptr<const Subset> DataCache::get(const std::filesystem::path& root, SubsetId id,
                                             Split split) {
  std::lock_guard lock(mutex_);
  auto key = std::make_tuple(root.string(), static_cast<int>(id), static_cast<int>(split));
  auto it = subsets_.find(key);
  if (it != subsets_.end()) return it->second;
  auto subset = std::make_shared<const Subset>(load_subset(root, id, split));
  subsets_.emplace(std::move(key), subset);
  return subset;
}

std::vector<std::pair<int, double>> ExperimentResult::mean_curve() const {
  std::vector<std::pair<int, double>> out;
  for (std::size_t i = 0; i < spec.curve_limits.size(); ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : folds) {
      if (i < f.curve.size() && !std::isnan(f.curve[i].second)) {
        sum += f.curve[i].second;
        ++n;
      }
    }
    out.emplace_back(spec.curve_limits[i],
                     n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

std::filesystem::path resolve_data_root(const std::filesystem::path& root) {
  if (!root.empty()) return root;
  if (const char* env = std::getenv("COSMO_RUL_DATA_ROOT"); env && *env) return env;
  fail(ErrorCode::InvalidArgument, "no data root given and COSMO_RUL_DATA_ROOT is not set");
}

ExperimentResult run_scenario(const ScenarioSpec& spec, const std::filesystem::path& data_root,
                              DataCache* cache) {
  spec.validate();
  const std::filesystem::path root = resolve_data_root(data_root);
  DataCache local;
  DataCache& data = cache ? *cache : local;

  const auto source = data.get(root, spec.source, Split::Alpha);
  const auto target = data.get(root, spec.target, spec.eval_mode);

  ExperimentResult result;
  result.spec = spec;
  if (spec.method == Method::Cosmo && spec.distance.kind != DistanceKind::Mcp &&
      !check_k_condition(spec.distance.k, spec.ref_size, spec.n_conditions)) {
    result.warnings.push_back("k-condition violated: k=" + std::to_string(spec.distance.k) +
                              " > " + std::to_string(spec.ref_size) + "/" +
                              std::to_string(spec.n_conditions));
  }
  // With the same subset on both sides in mode alpha the held-out fold is the
  // target, so no trajectory is both fitted and scored.
  const bool held_out_target = spec.eval_mode == Split::Alpha && spec.source == spec.target;

  const auto& src = source->trajectories;
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(rep));
    const auto fold_of = cv_folds(src.size(), spec.folds, derive_seed(rep_seed, kFoldStream));
    for (int f = 0; f < spec.folds; ++f) {
      std::vector<const Trajectory*> fit;
      std::vector<const Trajectory*> tgt;
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (fold_of[i] != f) {
          fit.push_back(&src[i]);
        } else if (held_out_target) {
          tgt.push_back(&src[i]);
        }
      }
      if (!held_out_target) {
        for (const auto& t : target->trajectories) tgt.push_back(&t);
      }
      require(!tgt.empty(), "scenario " + spec.label + " has no target trajectories");

      std::vector<std::string> fold_warnings;
      const FoldData d = build_features(spec, fit, tgt, derive_seed(rep_seed, kGroupStream),
                                        fold_warnings);
      for (auto& w : fold_warnings) {
        if (std::find(result.warnings.begin(), result.warnings.end(), w) ==
            result.warnings.end()) {
          result.warnings.push_back(std::move(w));
        }
      }

      ForestConfig fc = spec.forest;
      const std::uint64_t fold_seed = derive_seed(rep_seed, 100 + static_cast<std::uint64_t>(f));
      fc.seed = derive_seed(fold_seed, kForestStream);
      const Forest forest = fit_forest(d.train, d.targets, fc);
      const std::vector<double> pred = forest.predict(d.target);
      const auto units = unit_predictions(tgt, pred, spec.tau_max);

      FoldRecord rec;
      rec.repetition = rep;
      rec.fold = f;
      rec.seed = fc.seed;
      rec.report = mape_fleet(units, spec.rul_limit);
      for (int limit : spec.curve_limits) {
        double v = std::numeric_limits<double>::quiet_NaN();
        try {
          v = mape_fleet(units, limit).mape;
        } catch (const Error&) {
          // every unit excluded at this limit
        }
        rec.curve.emplace_back(limit, v);
      }
      rec.n_train_rows = d.train.rows();
      rec.n_target_units = tgt.size();
      result.folds.push_back(std::move(rec));
    }
  }

  std::vector<double> mapes;
  std::vector<double> rmses;
  for (const auto& f : result.folds) {
    mapes.push_back(f.report.mape);
    rmses.push_back(f.report.rmse_last_cycle);
  }
  result.mape = aggregate(mapes);
  result.rmse_last_cycle = aggregate(rmses);
  return result;
}

std::filesystem::path result_csv_path(const std::filesystem::path& out_dir,
                                      const ScenarioSpec& spec) {
  return out_dir / "results" / (spec.label + "_" + spec.method_tag() + ".csv");
}

std::filesystem::path curve_csv_path(const std::filesystem::path& out_dir,
                                     const ScenarioSpec& spec) {
  return out_dir / "curves" / (spec.label + "_" + spec.method_tag() + ".csv");
}

void write_result_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  const ScenarioSpec& s = result.spec;
  const bool cosmo = s.method == Method::Cosmo;
  std::ostringstream out;
  out << "scenario,group,source,target,eval_mode,method,method_tag,distance,reference_mode,k,"
         "ref_size,tau,tau_max,rul_limit,fold,repetition,seed,config_hash,mape,"
         "rmse_last_cycle,n_units_included,n_units_excluded,n_train_rows,n_target_units\n";
  for (const auto& f : result.folds) {
    out << s.label << ',' << group_name(s.label) << ','
        << to_string(s.source) << ',' << to_string(s.target) << ',' << to_string(s.eval_mode)
        << ',' << to_string(s.method) << ',' << s.method_tag() << ','
        << (cosmo ? std::string(s.distance.name()) : "none") << ','
        << (cosmo ? s.mode.to_string('-') : "none") << ','
        << (cosmo && s.distance.kind != DistanceKind::Mcp ? std::to_string(s.distance.k) : "")
        << ',' << (cosmo ? std::to_string(s.ref_size) : "") << ','
        << (cosmo ? std::to_string(s.tau) : "") << ',' << s.tau_max << ',' << s.rul_limit << ','
        << f.fold << ',' << f.repetition << ',' << f.seed << ',' << hex64(s.config_hash()) << ','
        << fmt(f.report.mape) << ',' << fmt(f.report.rmse_last_cycle) << ','
        << f.report.n_units_included << ',' << f.report.n_units_excluded << ','
        << f.n_train_rows << ',' << f.n_target_units << '\n';
  }
  write_atomically(path, out.str());
}

void write_curve_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  std::ostringstream out;
  out << "limit,mape\n";
  for (const auto& [limit, mape] : result.mean_curve()) {
    out << limit << ',' << (std::isnan(mape) ? "" : fmt(mape)) << '\n';
  }
  write_atomically(path, out.str());
}

void write_result_files(const std::filesystem::path& out_dir, const ExperimentResult& result) {
  require(result.ok(), "cannot write files for a failed scenario");
  write_result_csv(result_csv_path(out_dir, result.spec), result);
  write_curve_csv(curve_csv_path(out_dir, result.spec), result);
}

void write_summary_json(const std::filesystem::path& out_dir,
                        const std::vector<ExperimentResult>& results) {
  Json scenarios = Json::object();
  for (const auto& r : results) scenarios[r.spec.label][summary_key(r.spec)] = result_json(r);
  Json doc{{"format", kSummaryFormat}, {"version", 1}, {"scenarios", std::move(scenarios)}};
  write_atomically(out_dir / "summary.json", doc.dump(2) + "\n");
}

void merge_summary_json(const std::filesystem::path& out_dir, const ExperimentResult& result) {
  const auto path = out_dir / "summary.json";
  Json doc{{"format", kSummaryFormat}, {"version", 1}, {"scenarios", Json::object()}};
  if (std::ifstream in(path); in) {
    Json old = Json::parse(in, nullptr, false);
    if (!old.is_discarded() && old.is_object() && old.value("format", "") == kSummaryFormat &&
        old.contains("scenarios") && old["scenarios"].is_object()) {
      doc = std::move(old);
    }
  }
  doc["scenarios"][result.spec.label][summary_key(result.spec)] = result_json(result);
  write_atomically(path, doc.dump(2) + "\n");
}

std::vector<ExperimentResult> run_matrix(const std::vector<ScenarioSpec>& specs,
                                         const std::filesystem::path& data_root,
                                         const std::filesystem::path& out_dir,
                                         const ProgressCallback& progress) {
  require(!specs.empty(), "scenario matrix is empty");
  DataCache cache;
  std::vector<ExperimentResult> results;
  results.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ExperimentResult r;
    try {
      r = run_scenario(specs[i], data_root, &cache);
    } catch (const std::exception& e) {
      r = ExperimentResult{};
      r.spec = specs[i];
      r.error = e.what();
    }
    if (!out_dir.empty()) {
      if (r.ok()) write_result_files(out_dir, r);
      results.push_back(std::move(r));
      write_summary_json(out_dir, results);
    } else {
      results.push_back(std::move(r));
    }
    if (progress) progress(results.back(), i, specs.size());
  }
  return results;
}

std::string render_report(const std::filesystem::path& out_dir) {
  const auto dir = out_dir / "results";
  if (!std::filesystem::is_directory(dir)) {
    fail(ErrorCode::Io, "no results directory under " + out_dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::Io, "no result CSVs under " + dir.string());

  struct Cell {
    std::string group;
    std::vector<double> mape;
    std::vector<double> rmse;
  };
  // (eval_mode, method_tag) -> scenario -> cell
  std::map<std::pair<std::string, std::string>, std::map<std::string, Cell>> table;
  for (const auto& path : files) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::Parse, path.string() + ": empty file");
    const auto header = split_csv(line);
    auto col = [&](const char* name) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        fail(ErrorCode::Parse, path.string() + ": missing column '" + name + "'");
      }
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_scn = col("scenario"), c_grp = col("group"), c_mode = col("eval_mode"),
                      c_tag = col("method_tag"), c_mape = col("mape"),
                      c_rmse = col("rmse_last_cycle");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() != header.size()) {
        fail(ErrorCode::Parse,
             path.string() + ": line " + std::to_string(line_no) + ": wrong field count");
      }
      const auto mape = text::to_double(cells[c_mape]);
      const auto rmse = text::to_double(cells[c_rmse]);
      if (!mape || !rmse) {
        fail(ErrorCode::Parse,
             path.string() + ": line " + std::to_string(line_no) + ": bad metric value");
      }
      Cell& cell = table[{cells[c_mode], cells[c_tag]}][cells[c_scn]];
      cell.group = cells[c_grp];
      cell.mape.push_back(*mape);
      cell.rmse.push_back(*rmse);
    }
  }

  std::ostringstream out;
  char buf[256];
  for (const auto& [key, scenarios] : table) {
    out << "== " << key.second << " (mode " << key.first << ") ==\n";
    std::snprintf(buf, sizeof buf, "%-9s %-24s %5s %10s %10s %10s %10s\n", "scenario", "group",
                  "n", "mape", "mape_sd", "rmse", "rmse_sd");
    out << buf;
    std::vector<std::string> labels;
    for (const auto& [label, cell] : scenarios) labels.push_back(label);
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return std::make_pair(scenario_rank(a), a) < std::make_pair(scenario_rank(b), b);
    });
    std::map<std::string, std::vector<double>> group_means;
    std::vector<std::string> group_order;
    for (const auto& label : labels) {
      const Cell& cell = scenarios.at(label);
      const Aggregate m = aggregate(cell.mape);
      const Aggregate r = aggregate(cell.rmse);
      std::snprintf(buf, sizeof buf, "%-9s %-24s %5zu %10s %10s %10s %10s\n", label.c_str(),
                    cell.group.c_str(), m.n, fixed(m.mean).c_str(), fixed(m.std).c_str(),
                    fixed(r.mean, 3).c_str(), fixed(r.std, 3).c_str());
      out << buf;
      if (!group_means.count(cell.group)) group_order.push_back(cell.group);
      group_means[cell.group].push_back(m.mean);
    }
    out << "-- group means (scenario means averaged) --\n";
    for (const auto& g : group_order) {
      const Aggregate a = aggregate(group_means[g]);
      std::snprintf(buf, sizeof buf, "%-34s %5zu %10s\n", g.c_str(), a.n, fixed(a.mean).c_str());
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cosmo_rul
