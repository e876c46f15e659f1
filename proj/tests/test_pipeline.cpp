#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logtriage/cluster.hpp"
#include "logtriage/csv.hpp"
#include "logtriage/errors.hpp"
#include "logtriage/ingest.hpp"
#include "logtriage/metrics.hpp"
#include "logtriage/pipeline.hpp"
#include "logtriage/report.hpp"
#include "logtriage/synth.hpp"
#include "logtriage/vectorize.hpp"

namespace fs = std::filesystem;
using namespace logtriage;
using doctest::Approx;

namespace {

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("logtriage_pipe_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Dataset small_corpus(const std::string& tag, std::uint64_t seed, double noise = 0.1) {
    SynthSpec spec;
    spec.n_issues = 3;
    spec.logs_per_issue_min = 4;
    spec.logs_per_issue_max = 5;
    spec.n_passing = 4;
    spec.vocab_size = 8;
    spec.noise_rate = noise;
    spec.signature_length = 2;
    spec.seed = seed;
    fs::path dir = fresh_dir(tag);
    return encode(generate(spec, dir.string()));
}

GridSpec tiny_grid() {
    GridSpec g;
    g.gammas = {0.0, 0.5, 1.0};
    g.thetas = {0.3, 0.5};
    g.methods = {ReductionMethod::None, ReductionMethod::Pca};
    g.criteria = {LinkageCriterion::Single, LinkageCriterion::Complete};
    g.target_evar = 0.80;
    g.mode = WeightingMode::Counts;
    g.seed = 11;
    return g;
}

std::string record_key(const SweepRecord& r) {
    std::ostringstream out;
    out << r.dataset << '|' << to_string(r.method) << '|' << to_string(r.criterion)
        << '|' << r.gamma << '|' << r.theta;
    return out.str();
}

// Record identity for determinism checks: everything except runtime_ms,
// which legitimately varies between runs.
std::string record_value(const SweepRecord& r) {
    std::ostringstream out;
    out.precision(17);
    out << record_key(r) << '|' << r.k << '|' << r.achieved_evar << '|' << r.ami
        << '|' << r.nmi << '|' << r.homogeneity << '|' << r.completeness << '|'
        << r.er << '|' << r.ier << '|' << r.n_clusters << '|' << r.seed;
    return out.str();
}

std::multiset<std::string> record_values(const std::vector<SweepRecord>& records) {
    std::multiset<std::string> out;
    for (const auto& r : records) out.insert(record_value(r));
    return out;
}

}  // namespace

TEST_CASE("run_once equals the hand-composed pipeline stages") {
    Dataset ds = small_corpus("compose", 21, 0.0);
    RunConfig cfg;
    cfg.method = ReductionMethod::None;
    cfg.criterion = LinkageCriterion::Average;
    cfg.gamma = 0.4;
    cfg.theta = 0.45;

    RunResult got = run_once(ds, cfg);

    VectorizeResult vec = vectorize(ds, cfg.gamma, cfg.mode);
    DistanceMatrix dist = cosine_distance_matrix(vec.matrix.values, &vec.matrix.row_ids);
    Dendrogram dg = hac(dist, cfg.criterion);
    Clustering manual = cut(dg, cfg.theta);
    select_representatives(manual, dist);

    CHECK(got.row_ids == vec.matrix.row_ids);
    CHECK(got.clustering.assignment == manual.assignment);
    CHECK(got.clustering.clusters == manual.clusters);
    CHECK(got.clustering.representatives == manual.representatives);
    CHECK(got.n_clusters == static_cast<int>(manual.clusters.size()));

    std::vector<int> truth = densify_labels(vec.matrix.truth_labels);
    QualityScores scores = score_clustering(truth, manual.assignment);
    CHECK(got.has_truth);
    CHECK(got.scores.ami == Approx(scores.ami).epsilon(1e-12));
    CHECK(got.scores.er == Approx(scores.er).epsilon(1e-12));
    CHECK(got.k == static_cast<int>(vec.matrix.values.cols()));
    CHECK(got.achieved_evar == 1.0);
    CHECK(got.runtime_ms >= 0.0);
}

TEST_CASE("a minuscule theta yields all-singleton clusters") {
    Dataset ds = small_corpus("singletons", 22, 0.2);
    RunConfig cfg;
    cfg.theta = 0.0001;
    cfg.gamma = 0.5;
    RunResult r = run_once(ds, cfg);
    // Noise makes same-issue logs differ, so nothing merges below 1e-4...
    CHECK(r.n_clusters == static_cast<int>(r.row_ids.size()));
    // ...and proposing one cluster per log reduces no effort.
    CHECK(r.scores.er == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("run_once is deterministic for a fixed seed") {
    Dataset ds = small_corpus("runs_det", 23, 0.3);
    RunConfig cfg;
    cfg.method = ReductionMethod::Nmf;
    cfg.criterion = LinkageCriterion::Weighted;
    cfg.gamma = 0.35;
    cfg.theta = 0.4;
    cfg.seed = 99;
    RunResult a = run_once(ds, cfg);
    RunResult b = run_once(ds, cfg);
    CHECK(a.clustering.assignment == b.clustering.assignment);
    CHECK(a.scores.ami == b.scores.ami);  // bitwise: same reduction, same distances
    CHECK(a.k == b.k);
    CHECK(a.achieved_evar == b.achieved_evar);
    CHECK(a.iters == b.iters);
}

TEST_CASE("truthless datasets run but report no scores") {
    // Strip the labels from a generated corpus.
    Dataset ds = small_corpus("truthless", 24, 0.1);
    for (auto& seq : ds.sequences) seq.truth_label.clear();
    RunConfig cfg;
    RunResult r = run_once(ds, cfg);
    CHECK_FALSE(r.has_truth);
    CHECK(r.n_clusters >= 1);
}

TEST_CASE("the default grid matches its documented shape") {
    GridSpec g = default_grid();
    CHECK(g.gammas.size() == 21);
    CHECK(g.thetas.size() == 17);
    CHECK(g.methods.size() == 4);
    CHECK(g.criteria.size() == 4);
    CHECK(g.gammas.front() == Approx(0.0).epsilon(1e-12));
    CHECK(g.gammas.back() == Approx(1.0).epsilon(1e-12));
    CHECK(g.thetas.front() == Approx(0.10).epsilon(1e-12));
    CHECK(g.thetas.back() == Approx(0.90).epsilon(1e-12));
    for (size_t i = 1; i < g.gammas.size(); ++i) {
        CHECK(g.gammas[i] - g.gammas[i - 1] == Approx(0.05).epsilon(1e-9));
    }
    for (size_t i = 1; i < g.thetas.size(); ++i) {
        CHECK(g.thetas[i] - g.thetas[i - 1] == Approx(0.05).epsilon(1e-9));
    }
}

TEST_CASE("sweep records survive a csv round-trip") {
    SweepRecord r;
    r.dataset = "name,with comma";
    r.method = ReductionMethod::Lsi;
    r.criterion = LinkageCriterion::Weighted;
    r.gamma = 0.65;
    r.theta = 0.15;
    r.k = 7;
    r.achieved_evar = 0.8251937281937485;
    r.ami = -0.03818371;
    r.nmi = 0.5;
    r.homogeneity = 0.25;
    r.completeness = 0.75;
    r.er = 0.125;
    r.ier = 0.4375;
    r.n_clusters = 12;
    r.runtime_ms = 1.25;
    r.seed = 12345678901234567ULL;
    SweepRecord back = parse_sweep_record(sweep_record_csv(r));
    CHECK(back.dataset == r.dataset);
    CHECK(back.method == r.method);
    CHECK(back.criterion == r.criterion);
    CHECK(back.gamma == r.gamma);
    CHECK(back.theta == r.theta);
    CHECK(back.k == r.k);
    CHECK(back.achieved_evar == r.achieved_evar);  // full precision
    CHECK(back.ami == r.ami);
    CHECK(back.nmi == r.nmi);
    CHECK(back.homogeneity == r.homogeneity);
    CHECK(back.completeness == r.completeness);
    CHECK(back.er == r.er);
    CHECK(back.ier == r.ier);
    CHECK(back.n_clusters == r.n_clusters);
    CHECK(back.runtime_ms == r.runtime_ms);
    CHECK(back.seed == r.seed);

    CHECK_THROWS_AS(parse_sweep_record("not,enough,fields"), Error);
}

TEST_CASE("fingerprints pin both the grid and the dataset set") {
    GridSpec g = tiny_grid();
    std::vector<std::string> names = {"a", "b"};
    std::uint64_t base = grid_fingerprint(g, names);
    CHECK(base == grid_fingerprint(g, names));  // stable

    GridSpec other = g;
    other.thetas.push_back(0.7);
    CHECK(grid_fingerprint(other, names) != base);

    GridSpec reseeded = g;
    reseeded.seed = 12;
    CHECK(grid_fingerprint(reseeded, names) != base);

    CHECK(grid_fingerprint(g, {"a"}) != base);
    CHECK(grid_fingerprint(g, {"b", "a"}) != base);  // order matters
}

TEST_CASE("sweep covers the grid exactly once and resumes cleanly") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("sweep_a", 31, 0.1));
    datasets.push_back(small_corpus("sweep_b", 32, 0.2));
    GridSpec grid = tiny_grid();
    const size_t expected =
        datasets.size() * grid.gammas.size() * grid.thetas.size() *
        grid.methods.size() * grid.criteria.size();

    fs::path dir = fresh_dir("sweep_out");
    std::string out = (dir / "sweep.csv").string();

    SweepSummary first = sweep(datasets, grid, out);
    CHECK(first.total == expected);
    CHECK(first.resumed == 0);
    CHECK(first.computed == expected);

    SweepFile file = load_sweep_file(out);
    CHECK(file.records.size() == expected);
    CHECK(file.datasets == std::vector<std::string>{datasets[0].name, datasets[1].name});
    CHECK(file.fingerprint == grid_fingerprint(grid, file.datasets));
    CHECK_NOTHROW(require_complete_grid(file));

    std::set<std::string> keys;
    for (const auto& r : file.records) keys.insert(record_key(r));
    CHECK(keys.size() == expected);  // no duplicates

    // A second invocation finds everything on disk and recomputes nothing.
    SweepSummary second = sweep(datasets, grid, out);
    CHECK(second.total == expected);
    CHECK(second.resumed == expected);
    CHECK(second.computed == 0);
    CHECK(load_sweep_file(out).records.size() == expected);
}

TEST_CASE("a truncated tail is dropped on resume and refilled") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("torn", 33, 0.15));
    GridSpec grid = tiny_grid();

    fs::path dir = fresh_dir("torn_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile full = load_sweep_file(out);

    // Tear the final record in half.
    auto size = fs::file_size(out);
    fs::resize_file(out, size - 9);
    CHECK_THROWS_AS(load_sweep_file(out), Error);              // strict loader
    CHECK_NOTHROW(load_sweep_file(out, /*tolerate=*/true));    // resume loader
    SweepFile torn = load_sweep_file(out, true);
    CHECK(torn.records.size() == full.records.size() - 1);

    SweepSummary repaired = sweep(datasets, grid, out);
    CHECK(repaired.resumed == full.records.size() - 1);
    CHECK(repaired.computed == 1);
    SweepFile after = load_sweep_file(out);
    CHECK(record_values(after.records) == record_values(full.records));
}

TEST_CASE("sweeping into a file from a different grid is refused") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("fpmismatch", 34, 0.1));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("fp_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);

    GridSpec other = grid;
    other.gammas = {0.25, 0.75};
    CHECK_THROWS_AS(sweep(datasets, other, out), FingerprintMismatchError);

    std::vector<Dataset> renamed = datasets;
    renamed[0].name = "somethingelse";
    CHECK_THROWS_AS(sweep(renamed, grid, out), FingerprintMismatchError);
}

TEST_CASE("parallel sweep produces the same record set as serial") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("par_a", 35, 0.1));
    datasets.push_back(small_corpus("par_b", 36, 0.25));
    GridSpec grid = tiny_grid();

    fs::path dir = fresh_dir("par_out");
    std::string serial = (dir / "serial.csv").string();
    std::string parallel = (dir / "parallel.csv").string();
    sweep(datasets, grid, serial, 1);
    sweep(datasets, grid, parallel, 4);

    SweepFile s = load_sweep_file(serial);
    SweepFile p = load_sweep_file(parallel);
    CHECK(record_values(s.records) == record_values(p.records));
    CHECK_NOTHROW(require_complete_grid(p));
}

TEST_CASE("require_complete_grid catches missing and duplicated cells") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("complete", 37, 0.1));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("complete_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);
    CHECK_NOTHROW(require_complete_grid(file));

    SweepFile missing = file;
    missing.records.pop_back();
    CHECK_THROWS_AS(require_complete_grid(missing), IncompleteGridError);

    SweepFile duplicated = file;
    duplicated.records.push_back(duplicated.records.front());
    CHECK_THROWS_AS(require_complete_grid(duplicated), IncompleteGridError);
}

TEST_CASE("the sweep header line is self-describing and parseable") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("header", 38, 0.1));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("header_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);

    std::ifstream in(out);
    std::string first, second;
    std::getline(in, first);
    std::getline(in, second);
    CHECK(first.rfind("# fingerprint=", 0) == 0);
    CHECK(first.find("seed=11") != std::string::npos);
    CHECK(second == kSweepHeader);

    // Tampering with the recorded grid invalidates the fingerprint.
    std::string tampered = first;
    auto pos = tampered.find("seed=11");
    tampered.replace(pos, 7, "seed=99");
    std::ofstream rewrite(out, std::ios::binary);
    rewrite << tampered << "\n" << second << "\n";
    rewrite.close();
    CHECK_THROWS_AS(load_sweep_file(out), FingerprintMismatchError);
}

TEST_CASE("heatmaps hold one row per theta and one column per gamma") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("heat", 39, 0.1));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("heat_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);

    std::string hm = heatmap_csv(file, ReductionMethod::Pca,
                                 LinkageCriterion::Complete, "ami");
    std::istringstream lines(hm);
    std::string header;
    std::getline(lines, header);
    auto cols = csv::split_line(header);
    REQUIRE(cols.size() == 1 + grid.gammas.size());
    CHECK(cols[0] == "theta");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        auto fields = csv::split_line(line);
        CHECK(fields.size() == 1 + grid.gammas.size());
        ++rows;
    }
    CHECK(rows == static_cast<int>(grid.thetas.size()));

    CHECK_THROWS_AS(heatmap_csv(file, ReductionMethod::Pca,
                                LinkageCriterion::Complete, "nonsense"),
                    Error);
}

TEST_CASE("difference heatmaps vanish when comparing none to itself") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("diff", 40, 0.1));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("diff_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);

    std::string diff = difference_heatmap_csv(file, ReductionMethod::None,
                                              LinkageCriterion::Single, "ami");
    std::istringstream lines(diff);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        auto fields = csv::split_line(line);
        for (size_t i = 1; i < fields.size(); ++i) {
            CHECK(std::stod(fields[i]) == Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("boxplot rows order their five-number summary") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("box", 41, 0.2));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("box_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);

    std::string box = boxplot_csv(file);
    std::istringstream lines(box);
    std::string header;
    std::getline(lines, header);
    CHECK(csv::split_line(header) ==
          std::vector<std::string>{"method", "criterion", "min", "q1", "median", "q3",
                                   "max"});
    int rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        auto f = csv::split_line(line);
        REQUIRE(f.size() == 7);
        double mn = std::stod(f[2]), q1 = std::stod(f[3]), md = std::stod(f[4]),
               q3 = std::stod(f[5]), mx = std::stod(f[6]);
        CHECK(mn <= q1 + 1e-12);
        CHECK(q1 <= md + 1e-12);
        CHECK(md <= q3 + 1e-12);
        CHECK(q3 <= mx + 1e-12);
        ++rows;
    }
    CHECK(rows == static_cast<int>(grid.methods.size() * grid.criteria.size()));
}

TEST_CASE("the variance summary reports every reducing method") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("evar", 42, 0.1));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("evar_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);

    std::string summary = evar_summary_csv(file);
    CHECK(summary.find("pca") != std::string::npos);
    std::istringstream lines(summary);
    std::string header;
    std::getline(lines, header);
    auto cols = csv::split_line(header);
    CHECK(std::find(cols.begin(), cols.end(), "method") != cols.end());
    CHECK(std::find(cols.begin(), cols.end(), "min_evar") != cols.end());
}

TEST_CASE("the block table pairs every treatment with every block") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("block_a", 43, 0.1));
    datasets.push_back(small_corpus("block_b", 44, 0.2));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("block_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);

    BlockTable table = block_table_from_records(file);
    CHECK(table.treatments.size() == grid.methods.size() * grid.criteria.size());
    CHECK(table.blocks.size() ==
          datasets.size() * grid.gammas.size() * grid.thetas.size());
    CHECK_NOTHROW(validate(table));
    // Spot-check a treatment name.
    CHECK(std::find(table.treatments.begin(), table.treatments.end(),
                    treatment_name(ReductionMethod::Pca, LinkageCriterion::Single)) !=
          table.treatments.end());
}

TEST_CASE("treatment comparison emits consistent csv artifacts") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("cmp", 45, 0.2));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("cmp_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);

    ComparisonOutput cmp = compare_treatments(file);
    const size_t t = grid.methods.size() * grid.criteria.size();
    CHECK(cmp.pairwise.size() == t * (t - 1) / 2);
    for (const auto& pc : cmp.pairwise) {
        CHECK(pc.result.adjusted_p >= pc.result.p - 1e-15);
        CHECK(pc.result.a12 + pc.result.a21 == Approx(1.0).epsilon(1e-9));
    }
    CHECK(cmp.friedman.p >= 0.0);
    CHECK(cmp.friedman.p <= 1.0);

    std::istringstream comparison(cmp.comparison_csv);
    std::string header;
    std::getline(comparison, header);
    CHECK(header ==
          "treatment_a,treatment_b,statistic,p,adjusted_p,a12,a21,significant");
    int rows = 0;
    std::string line;
    while (std::getline(comparison, line)) rows += !line.empty();
    CHECK(rows == static_cast<int>(t * (t - 1) / 2));

    std::istringstream groups(cmp.groups_csv);
    std::getline(groups, header);
    CHECK(header == "treatment,rank_sum,median_ami,mean_ami,group");
    rows = 0;
    while (std::getline(groups, line)) rows += !line.empty();
    CHECK(rows == static_cast<int>(t));
}

TEST_CASE("comparison refuses an incomplete grid") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("cmp_inc", 46, 0.1));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("cmp_inc_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);
    file.records.pop_back();
    CHECK_THROWS_AS(compare_treatments(file), IncompleteGridError);
}

TEST_CASE("write_report_files emits the full artifact set") {
    std::vector<Dataset> datasets;
    datasets.push_back(small_corpus("report", 47, 0.15));
    GridSpec grid = tiny_grid();
    fs::path dir = fresh_dir("report_out");
    std::string out = (dir / "sweep.csv").string();
    sweep(datasets, grid, out);
    SweepFile file = load_sweep_file(out);

    fs::path report_dir = dir / "report";
    auto written = write_report_files(file, report_dir.string());
    CHECK_FALSE(written.empty());
    for (const auto& name : written) {
        CAPTURE(name);
        CHECK(fs::exists(report_dir / name));
        CHECK(fs::file_size(report_dir / name) > 0);
    }
    // One AMI heatmap per (method, criterion), one difference heatmap per
    // reducing method x criterion, plus boxplot, variance summary, ranks.
    size_t methods = grid.methods.size(), criteria = grid.criteria.size();
    size_t expected = methods * criteria + (methods - 1) * criteria + 3;
    CHECK(written.size() == expected);
    CHECK(std::find(written.begin(), written.end(), "boxplot_ami.csv") != written.end());
    CHECK(std::find(written.begin(), written.end(), "rank_table.csv") != written.end());
    CHECK(std::find(written.begin(), written.end(), "evar_summary.csv") != written.end());
}
