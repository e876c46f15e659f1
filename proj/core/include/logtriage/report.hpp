#pragma once

#include <string>
#include <vector>

#include "logtriage/pipeline.hpp"
#include "logtriage/stats.hpp"

namespace logtriage {

// "method/criterion", e.g. "nmf/average".
std::string treatment_name(ReductionMethod method, LinkageCriterion criterion);

// theta-by-gamma grid (rows ascending theta, columns ascending gamma) of the
// chosen metric for one configuration, averaged over datasets. metric is one
// of: ami, nmi, homogeneity, completeness, er, ier, achieved_evar.
std::string heatmap_csv(const SweepFile& file, ReductionMethod method,
                        LinkageCriterion criterion, const std::string& metric);

// Cell-wise (method - none) at the same criterion, highlighting where a
// reduction widens or narrows the performant parameter region.
std::string difference_heatmap_csv(const SweepFile& file, ReductionMethod method,
                                   LinkageCriterion criterion, const std::string& metric);

// Per configuration: min, q1, median, q3, max of AMI over all its records.
std::string boxplot_csv(const SweepFile& file);

// Per reduction method: achieved explained variance spread and how many runs
// fell short of the target. Surfaces shortfalls; asserts nothing about them.
std::string evar_summary_csv(const SweepFile& file);

// Treatments = configurations, blocks = (dataset, gamma, theta), scores = AMI.
BlockTable block_table_from_records(const SweepFile& file);

struct ComparisonOutput {
    TestResult friedman;
    std::vector<PairwiseComparison> pairwise;  // adjusted_p filled in
    std::string comparison_csv;  // treatment_a,treatment_b,statistic,p,adjusted_p,a12,a21,significant
    std::string groups_csv;      // treatment,rank_sum,median_ami,mean_ami,group
};

// Friedman omnibus plus all pairwise signed-rank tests with Holm adjustment
// and effect sizes. Requires a complete grid.
ComparisonOutput compare_treatments(const SweepFile& file, double alpha = 0.05);

// Emit the full report set (AMI heatmaps + difference heatmaps, boxplot,
// rank table, explained-variance summary) under out_dir; returns the file
// names written.
std::vector<std::string> write_report_files(const SweepFile& file,
                                             const std::string& out_dir,
                                             double alpha = 0.05);

}  // namespace logtriage
