#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logtriage/cluster.hpp"
#include "logtriage/dimred.hpp"
#include "logtriage/ingest.hpp"
#include "logtriage/metrics.hpp"
#include "logtriage/vectorize.hpp"

namespace logtriage {

struct RunConfig {
    ReductionMethod method = ReductionMethod::None;
    LinkageCriterion criterion = LinkageCriterion::Complete;
    double gamma = 0.5;
    double theta = 0.5;
    double target_evar = 0.80;
    WeightingMode mode = WeightingMode::Counts;
    std::uint64_t seed = 0;
    int nmf_max_iters = 500;
    double nmf_tolerance = 1e-5;
};

struct RunResult {
    Clustering clustering;
    std::vector<std::string> row_ids;  // failing logs, manifest order
    QualityScores scores;              // meaningful only when has_truth
    bool has_truth = false;
    int k = 0;
    double achieved_evar = 1.0;
    int iters = 0;
    int n_clusters = 0;
    double runtime_ms = 0.0;
};

// vectorize -> (reduce) -> distances -> clustering -> representatives ->
// scores, over the failing logs of the dataset.
RunResult run_once(const Dataset& dataset, const RunConfig& config);

struct GridSpec {
    std::vector<double> gammas;
    std::vector<double> thetas;
    std::vector<ReductionMethod> methods;
    std::vector<LinkageCriterion> criteria;
    double target_evar = 0.80;
    WeightingMode mode = WeightingMode::Counts;
    std::uint64_t seed = 0;
};

// gamma 0.00..1.00 step 0.05 (21), theta 0.10..0.90 step 0.05 (17),
// all four methods x all four criteria.
GridSpec default_grid();

struct SweepRecord {
    std::string dataset;
    ReductionMethod method = ReductionMethod::None;
    LinkageCriterion criterion = LinkageCriterion::Complete;
    double gamma = 0.0;
    double theta = 0.0;
    int k = 0;
    double achieved_evar = 1.0;
    double ami = 0.0;
    double nmi = 0.0;
    double homogeneity = 0.0;
    double completeness = 0.0;
    double er = 0.0;
    double ier = 0.0;
    int n_clusters = 0;
    double runtime_ms = 0.0;
    std::uint64_t seed = 0;
};

extern const char* const kSweepHeader;

std::string sweep_record_csv(const SweepRecord& record);
SweepRecord parse_sweep_record(const std::string& line);

// Hash pinning a results file to the grid and datasets that produced it.
std::uint64_t grid_fingerprint(const GridSpec& grid,
                               const std::vector<std::string>& dataset_names);

// Leading comment line carrying the fingerprint and the full grid, so a
// results file is self-describing and resumable.
std::string sweep_header_line(const GridSpec& grid,
                              const std::vector<std::string>& dataset_names);

struct SweepSummary {
    std::size_t total = 0;     // cells the grid calls for
    std::size_t resumed = 0;   // found already on disk
    std::size_t computed = 0;  // written by this invocation
};

// Run the grid over the datasets, appending to out_csv. An existing file is
// resumed: its fingerprint must match, a torn final line is dropped, and
// only missing cells are recomputed. jobs > 1 parallelizes across
// (dataset, method, gamma) units; output order stays deterministic.
SweepSummary sweep(const std::vector<Dataset>& datasets, const GridSpec& grid,
                   const std::string& out_csv, int jobs = 1);

struct SweepFile {
    GridSpec grid;
    std::vector<std::string> datasets;
    std::uint64_t fingerprint = 0;
    std::vector<SweepRecord> records;
};

// Parse a results file back, validating its fingerprint against the header's
// own grid description. tolerate_torn_tail permits (and drops) a truncated
// final line, for resume; loaders for analysis should leave it false.
SweepFile load_sweep_file(const std::string& path, bool tolerate_torn_tail = false);

// IncompleteGridError unless every (dataset x method x criterion x gamma x
// theta) cell is present exactly once.
void require_complete_grid(const SweepFile& file);

}  // namespace logtriage
