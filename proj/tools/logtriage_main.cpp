// Command-line front end: synth, encode, run, sweep, compare, report.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "logtriage/cluster.hpp"
#include "logtriage/csv.hpp"
#include "logtriage/dimred.hpp"
#include "logtriage/errors.hpp"
#include "logtriage/ingest.hpp"
#include "logtriage/metrics.hpp"
#include "logtriage/pipeline.hpp"
#include "logtriage/report.hpp"
#include "logtriage/synth.hpp"
#include "logtriage/vectorize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIncompleteGrid = 3;

// Fills option values from a JSON config file for options that were not
// given on the command line.  Precedence: command line > config > default.
class JsonDefaults {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw logtriage::MissingFileError("config file not found: " + path);
    in >> doc_;
    if (!doc_.is_object()) {
      throw logtriage::Error("config file must contain a JSON object: " + path);
    }
  }

  template <typename T>
  void apply(const CLI::Option* opt, const char* key, T& target) const {
    if (opt != nullptr && opt->count() > 0) return;
    if (!doc_.contains(key)) return;
    try {
      target = doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw logtriage::Error(std::string("config key '") + key + "': " + e.what());
    }
  }

  // Accepts either a single string or an array of strings.
  void apply_list(const CLI::Option* opt, const char* key,
                  std::vector<std::string>& target) const {
    if (opt != nullptr && opt->count() > 0) return;
    if (!doc_.contains(key)) return;
    const json& v = doc_.at(key);
    if (v.is_string()) {
      target = {v.get<std::string>()};
    } else if (v.is_array()) {
      target = v.get<std::vector<std::string>>();
    } else {
      throw logtriage::Error(std::string("config key '") + key +
                             "': expected string or array of strings");
    }
  }

 private:
  json doc_ = json::object();
};

logtriage::RuleSet load_rules(const std::string& rules_path) {
  if (rules_path.empty()) return logtriage::RuleSet::defaults();
  return logtriage::RuleSet::from_json_file(rules_path);
}

std::vector<logtriage::Dataset> encode_manifests(
    const std::vector<std::string>& manifests, const logtriage::RuleSet& rules,
    bool merge_continuations) {
  const logtriage::DelineateConfig dcfg{merge_continuations};
  std::vector<logtriage::Dataset> datasets;
  datasets.reserve(manifests.size());
  for (const std::string& m : manifests) {
    datasets.push_back(logtriage::encode(m, rules, dcfg));
  }
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    for (std::size_t j = i + 1; j < datasets.size(); ++j) {
      if (datasets[i].name == datasets[j].name) {
        throw logtriage::Error("duplicate dataset name '" + datasets[i].name +
                               "' (derived from manifest paths); rename the "
                               "corpus directories so they are distinct");
      }
    }
  }
  return datasets;
}

void write_text_file(const fs::path& path, const std::string& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw logtriage::Error("cannot open for writing: " + path.string());
  out << body;
  if (!out) throw logtriage::Error("write failed: " + path.string());
}

struct GlobalOpts {
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 1;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_dir_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
};

int cmd_synth(const GlobalOpts& g, const std::string& spec_path) {
  logtriage::SynthSpec spec = logtriage::synth_spec_from_json_file(spec_path);
  if (spec.seed == 0) spec.seed = g.seed;
  const std::string manifest = logtriage::generate(spec, g.out_dir);
  std::cout << "wrote " << manifest << "\n";
  const int failing_min = spec.n_issues * spec.logs_per_issue_min;
  const int failing_max = spec.n_issues * spec.logs_per_issue_max;
  std::cout << "issues=" << spec.n_issues << " failing=" << failing_min;
  if (failing_max != failing_min) std::cout << ".." << failing_max;
  std::cout << " passing=" << spec.n_passing << " noise_rate=" << spec.noise_rate
            << " seed=" << spec.seed << "\n";
  return kExitOk;
}

int cmd_encode(const GlobalOpts& g, const std::string& manifest,
               const std::string& rules_path, bool merge_continuations) {
  const logtriage::RuleSet rules = load_rules(rules_path);
  const logtriage::Dataset ds =
      logtriage::encode(manifest, rules, logtriage::DelineateConfig{merge_continuations});

  std::string dict = "event_id,template\n";
  for (int e = 0; e < ds.dictionary.size(); ++e) {
    dict += std::to_string(e) + "," + logtriage::csv::escape(ds.dictionary.template_of(e)) + "\n";
  }
  write_text_file(fs::path(g.out_dir) / "dictionary.csv", dict);

  std::string seq = "log_id,outcome,truth_label,events\n";
  for (const logtriage::LogSequence& log : ds.sequences) {
    std::string events;
    for (std::size_t i = 0; i < log.events.size(); ++i) {
      if (i > 0) events += ' ';
      events += std::to_string(log.events[i]);
    }
    seq += logtriage::csv::escape(log.log_id) + "," + logtriage::to_string(log.outcome) +
           "," + logtriage::csv::escape(log.truth_label) + "," +
           logtriage::csv::escape(events) + "\n";
  }
  write_text_file(fs::path(g.out_dir) / "sequences.csv", seq);

  std::cout << "dataset=" << ds.name << " logs=" << ds.sequences.size()
            << " failing=" << ds.failing().size() << " events=" << ds.dictionary.size()
            << "\n";
  std::cout << "wrote " << (fs::path(g.out_dir) / "dictionary.csv").string() << "\n";
  std::cout << "wrote " << (fs::path(g.out_dir) / "sequences.csv").string() << "\n";
  return kExitOk;
}

struct RunFlags {
  std::string manifest;
  std::string rules;
  bool merge_continuations = false;
  std::string method = "pca";
  std::string criterion = "complete";
  double gamma = 0.5;
  double theta = 0.5;
  double target_evar = 0.80;
  std::string mode = "counts";
};

int cmd_run(const GlobalOpts& g, const RunFlags& f) {
  const logtriage::RuleSet rules = load_rules(f.rules);
  const logtriage::Dataset ds = logtriage::encode(
      f.manifest, rules, logtriage::DelineateConfig{f.merge_continuations});

  logtriage::RunConfig cfg;
  cfg.mode = logtriage::parse_weighting_mode(f.mode);
  cfg.gamma = f.gamma;
  cfg.theta = f.theta;
  cfg.criterion = logtriage::parse_linkage(f.criterion);
  cfg.method = logtriage::parse_reduction_method(f.method);
  cfg.target_evar = f.target_evar;
  cfg.seed = g.seed;

  const logtriage::RunResult res = logtriage::run_once(ds, cfg);
  write_text_file(fs::path(g.out_dir) / "clustering.json",
                  logtriage::clustering_to_json(res.clustering, res.row_ids));

  std::cout << "dataset=" << ds.name << " failing=" << res.row_ids.size()
            << " events=" << ds.dictionary.size() << "\n";
  std::cout << "method=" << f.method << " k=" << res.k
            << " achieved_evar=" << res.achieved_evar;
  if (cfg.method == logtriage::ReductionMethod::Nmf) {
    std::cout << " iters=" << res.iters;
  }
  std::cout << "\n";
  std::cout << "criterion=" << f.criterion << " gamma=" << f.gamma << " theta=" << f.theta
            << " clusters=" << res.n_clusters << "\n";
  if (res.has_truth) {
    std::cout << "ami=" << res.scores.ami << " nmi=" << res.scores.nmi
              << " homogeneity=" << res.scores.homogeneity
              << " completeness=" << res.scores.completeness << " er=" << res.scores.er
              << " ier=" << res.scores.ier << "\n";
  }
  std::cout << "runtime_ms=" << res.runtime_ms << "\n";
  std::cout << "wrote " << (fs::path(g.out_dir) / "clustering.json").string() << "\n";
  return kExitOk;
}

struct SweepFlags {
  std::vector<std::string> manifests;
  std::string rules;
  bool merge_continuations = false;
  std::string out;
  std::vector<std::string> methods;
  std::vector<std::string> criteria;
  double target_evar = 0.80;
  std::string mode = "counts";
};

int cmd_sweep(const GlobalOpts& g, const SweepFlags& f) {
  const logtriage::RuleSet rules = load_rules(f.rules);
  const std::vector<logtriage::Dataset> datasets =
      encode_manifests(f.manifests, rules, f.merge_continuations);

  logtriage::GridSpec grid = logtriage::default_grid();
  grid.target_evar = f.target_evar;
  grid.mode = logtriage::parse_weighting_mode(f.mode);
  grid.seed = g.seed;
  if (!f.methods.empty()) {
    grid.methods.clear();
    for (const std::string& m : f.methods) {
      grid.methods.push_back(logtriage::parse_reduction_method(m));
    }
  }
  if (!f.criteria.empty()) {
    grid.criteria.clear();
    for (const std::string& c : f.criteria) {
      grid.criteria.push_back(logtriage::parse_linkage(c));
    }
  }

  const fs::path out =
      f.out.empty() ? fs::path(g.out_dir) / "sweep.csv" : fs::path(f.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  const logtriage::SweepSummary s = logtriage::sweep(datasets, grid, out.string(), g.jobs);
  std::cout << "records total=" << s.total << " resumed=" << s.resumed
            << " computed=" << s.computed << "\n";
  std::cout << "wrote " << out.string() << "\n";
  return kExitOk;
}

int cmd_compare(const GlobalOpts& g, const std::string& records_path, double alpha) {
  const logtriage::SweepFile file = logtriage::load_sweep_file(records_path);

  const logtriage::ComparisonOutput rep = logtriage::compare_treatments(file, alpha);
  write_text_file(fs::path(g.out_dir) / "comparison.csv", rep.comparison_csv);
  write_text_file(fs::path(g.out_dir) / "groups.csv", rep.groups_csv);

  const std::size_t treatments = file.grid.methods.size() * file.grid.criteria.size();
  const std::size_t blocks =
      file.datasets.size() * file.grid.gammas.size() * file.grid.thetas.size();
  std::cout << "treatments=" << treatments << " blocks=" << blocks << "\n";
  std::cout << "friedman statistic=" << rep.friedman.statistic << " p=" << rep.friedman.p
            << "\n";
  std::cout << "wrote " << (fs::path(g.out_dir) / "comparison.csv").string() << "\n";
  std::cout << "wrote " << (fs::path(g.out_dir) / "groups.csv").string() << "\n";
  return kExitOk;
}

int cmd_report(const GlobalOpts& g, const std::string& records_path, double alpha) {
  const logtriage::SweepFile file = logtriage::load_sweep_file(records_path);
  const std::vector<std::string> written =
      logtriage::write_report_files(file, g.out_dir, alpha);
  for (const std::string& w : written) {
    std::cout << "wrote " << (fs::path(g.out_dir) / w).string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"log clustering toolkit: synthetic corpora, encoding, clustering runs,\n"
               "parameter sweeps and statistical comparison of configurations"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --seed/--out-dir/... appear after the subcommand
  app.set_version_flag("--version", "logtriage 0.1.0");

  GlobalOpts g;
  g.config_opt =
      app.add_option("--config", g.config, "JSON file supplying defaults for any option")
          ->envname("LOGTRIAGE_CONFIG");
  g.seed_opt = app.add_option("--seed", g.seed, "base RNG seed (default 0)");
  g.out_dir_opt = app.add_option("--out-dir", g.out_dir, "output directory (default .)");
  g.jobs_opt = app.add_option("--jobs", g.jobs, "worker threads for sweep (default 1)")
                   ->check(CLI::PositiveNumber);

  const std::vector<std::string> method_names = {"none", "pca", "lsi", "nmf"};
  const std::vector<std::string> criterion_names = {"single", "complete", "average",
                                                    "weighted"};
  const std::vector<std::string> mode_names = {"counts", "binary"};

  // synth
  CLI::App* synth = app.add_subcommand("synth", "generate a labelled synthetic corpus");
  std::string synth_spec_path;
  CLI::Option* synth_spec_opt =
      synth->add_option("--spec", synth_spec_path, "corpus spec (JSON)");

  // encode
  CLI::App* encode = app.add_subcommand(
      "encode", "abstract a corpus into event sequences (dictionary.csv, sequences.csv)");
  std::string encode_manifest, encode_rules;
  bool encode_merge = false;
  CLI::Option* encode_manifest_opt =
      encode->add_option("--manifest", encode_manifest, "corpus manifest.csv");
  CLI::Option* encode_rules_opt = encode->add_option(
      "--rules", encode_rules, "abstraction rules (JSON); built-in rules if omitted");
  CLI::Option* encode_merge_opt = encode->add_flag(
      "--merge-continuations", encode_merge, "fold indented lines into the previous event");

  // run
  CLI::App* run = app.add_subcommand("run", "single clustering run on one corpus");
  RunFlags rf;
  CLI::Option* run_manifest_opt = run->add_option("--manifest", rf.manifest, "corpus manifest.csv");
  CLI::Option* run_rules_opt = run->add_option("--rules", rf.rules, "abstraction rules (JSON)");
  CLI::Option* run_merge_opt =
      run->add_flag("--merge-continuations", rf.merge_continuations,
                    "fold indented lines into the previous event");
  CLI::Option* run_method_opt = run->add_option("--method", rf.method, "reduction method")
                                    ->check(CLI::IsMember(method_names));
  CLI::Option* run_criterion_opt =
      run->add_option("--criterion", rf.criterion, "linkage criterion")
          ->check(CLI::IsMember(criterion_names));
  CLI::Option* run_gamma_opt = run->add_option("--gamma", rf.gamma, "contrast blend in [0,1]")
                                   ->check(CLI::Range(0.0, 1.0));
  CLI::Option* run_theta_opt =
      run->add_option("--theta", rf.theta, "dendrogram cut distance (> 0)")
          ->check(CLI::PositiveNumber);
  CLI::Option* run_evar_opt =
      run->add_option("--target-evar", rf.target_evar, "explained-variance target in (0,1)")
          ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
  CLI::Option* run_mode_opt = run->add_option("--mode", rf.mode, "event weighting mode")
                                  ->check(CLI::IsMember(mode_names));

  // sweep
  CLI::App* sweep = app.add_subcommand(
      "sweep", "full (method, criterion, gamma, theta) grid over one or more corpora");
  SweepFlags sf;
  CLI::Option* sweep_manifest_opt =
      sweep->add_option("--manifest", sf.manifests, "corpus manifest.csv (repeatable)");
  CLI::Option* sweep_rules_opt =
      sweep->add_option("--rules", sf.rules, "abstraction rules (JSON)");
  CLI::Option* sweep_merge_opt =
      sweep->add_flag("--merge-continuations", sf.merge_continuations,
                      "fold indented lines into the previous event");
  CLI::Option* sweep_out_opt =
      sweep->add_option("--out", sf.out, "records file (default <out-dir>/sweep.csv); "
                                         "an existing file is resumed");
  CLI::Option* sweep_methods_opt =
      sweep->add_option("--methods", sf.methods, "restrict reduction methods")
          ->delimiter(',')
          ->check(CLI::IsMember(method_names));
  CLI::Option* sweep_criteria_opt =
      sweep->add_option("--criteria", sf.criteria, "restrict linkage criteria")
          ->delimiter(',')
          ->check(CLI::IsMember(criterion_names));
  CLI::Option* sweep_evar_opt =
      sweep->add_option("--target-evar", sf.target_evar, "explained-variance target in (0,1)")
          ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
  CLI::Option* sweep_mode_opt = sweep->add_option("--mode", sf.mode, "event weighting mode")
                                    ->check(CLI::IsMember(mode_names));

  // compare
  CLI::App* compare = app.add_subcommand(
      "compare", "rank (method, criterion) treatments from completed sweep records");
  std::string compare_records;
  double compare_alpha = 0.05;
  CLI::Option* compare_records_opt =
      compare->add_option("--records", compare_records, "sweep records CSV");
  CLI::Option* compare_alpha_opt =
      compare->add_option("--alpha", compare_alpha, "significance level (default 0.05)")
          ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));

  // report
  CLI::App* report = app.add_subcommand(
      "report", "render heatmaps and summary tables from completed sweep records");
  std::string report_records;
  double report_alpha = 0.05;
  CLI::Option* report_records_opt =
      report->add_option("--records", report_records, "sweep records CSV");
  CLI::Option* report_alpha_opt =
      report->add_option("--alpha", report_alpha, "significance level (default 0.05)")
          ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    JsonDefaults cfg;
    if (!g.config.empty()) cfg.load(g.config);
    cfg.apply(g.seed_opt, "seed", g.seed);
    cfg.apply(g.out_dir_opt, "out_dir", g.out_dir);
    cfg.apply(g.jobs_opt, "jobs", g.jobs);
    if (g.jobs < 1) throw logtriage::Error("jobs must be >= 1");

    if (app.got_subcommand(synth)) {
      cfg.apply(synth_spec_opt, "spec", synth_spec_path);
      if (synth_spec_path.empty()) {
        std::cerr << "synth requires --spec (or config key 'spec')\n";
        return kExitUsage;
      }
      return cmd_synth(g, synth_spec_path);
    }
    if (app.got_subcommand(encode)) {
      cfg.apply(encode_manifest_opt, "manifest", encode_manifest);
      cfg.apply(encode_rules_opt, "rules", encode_rules);
      cfg.apply(encode_merge_opt, "merge_continuations", encode_merge);
      if (encode_manifest.empty()) {
        std::cerr << "encode requires --manifest (or config key 'manifest')\n";
        return kExitUsage;
      }
      return cmd_encode(g, encode_manifest, encode_rules, encode_merge);
    }
    if (app.got_subcommand(run)) {
      cfg.apply(run_manifest_opt, "manifest", rf.manifest);
      cfg.apply(run_rules_opt, "rules", rf.rules);
      cfg.apply(run_merge_opt, "merge_continuations", rf.merge_continuations);
      cfg.apply(run_method_opt, "method", rf.method);
      cfg.apply(run_criterion_opt, "criterion", rf.criterion);
      cfg.apply(run_gamma_opt, "gamma", rf.gamma);
      cfg.apply(run_theta_opt, "theta", rf.theta);
      cfg.apply(run_evar_opt, "target_evar", rf.target_evar);
      cfg.apply(run_mode_opt, "mode", rf.mode);
      if (rf.manifest.empty()) {
        std::cerr << "run requires --manifest (or config key 'manifest')\n";
        return kExitUsage;
      }
      return cmd_run(g, rf);
    }
    if (app.got_subcommand(sweep)) {
      cfg.apply_list(sweep_manifest_opt, "manifest", sf.manifests);
      cfg.apply(sweep_rules_opt, "rules", sf.rules);
      cfg.apply(sweep_merge_opt, "merge_continuations", sf.merge_continuations);
      cfg.apply(sweep_out_opt, "out", sf.out);
      cfg.apply_list(sweep_methods_opt, "methods", sf.methods);
      cfg.apply_list(sweep_criteria_opt, "criteria", sf.criteria);
      cfg.apply(sweep_evar_opt, "target_evar", sf.target_evar);
      cfg.apply(sweep_mode_opt, "mode", sf.mode);
      if (sf.manifests.empty()) {
        std::cerr << "sweep requires at least one --manifest (or config key 'manifest')\n";
        return kExitUsage;
      }
      return cmd_sweep(g, sf);
    }
    if (app.got_subcommand(compare)) {
      cfg.apply(compare_records_opt, "records", compare_records);
      cfg.apply(compare_alpha_opt, "alpha", compare_alpha);
      if (compare_records.empty()) {
        std::cerr << "compare requires --records (or config key 'records')\n";
        return kExitUsage;
      }
      return cmd_compare(g, compare_records, compare_alpha);
    }
    if (app.got_subcommand(report)) {
      cfg.apply(report_records_opt, "records", report_records);
      cfg.apply(report_alpha_opt, "alpha", report_alpha);
      if (report_records.empty()) {
        std::cerr << "report requires --records (or config key 'records')\n";
        return kExitUsage;
      }
      return cmd_report(g, report_records, report_alpha);
    }
  } catch (const logtriage::IncompleteGridError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIncompleteGrid;
  } catch (const logtriage::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
