#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace logtriage {

// Complete blocked design: scores[t][b] holds treatment t's score on block b.
struct BlockTable {
    std::vector<std::string> treatments;
    std::vector<std::string> blocks;
    std::vector<std::vector<double>> scores;
};

// IncompleteDesignError on ragged rows, NaN cells, or fewer than 2x2 cells.
void validate(const BlockTable& table);

struct TestResult {
    double statistic = 0.0;
    double p = 1.0;
    double adjusted_p = std::numeric_limits<double>::quiet_NaN();
    double a12 = 0.5;
    double a21 = 0.5;
};

// Mean ranks on ties (the position-average convention shared by every
// rank-based routine here).
std::vector<double> ranks_with_ties(const std::vector<double>& values);

// Chi-squared Friedman statistic over within-block ranks, with the standard
// tie-corrected denominator; df = treatments - 1.
TestResult friedman(const BlockTable& table);

enum class Sidedness { TwoSided, Less, Greater };
enum class WilcoxonMode { Auto, Exact, Normal };

// Paired signed-rank test, zeros handled per Pratt: zero differences are
// ranked with the rest, then dropped from both signed sums. Auto mode uses
// the exact null distribution below 10 pairs and the tie-corrected normal
// approximation (with continuity correction) otherwise. statistic is
// T = min(W+, W-).
TestResult wilcoxon_pratt(const std::vector<double>& a, const std::vector<double>& b,
                          Sidedness side = Sidedness::TwoSided,
                          WilcoxonMode mode = WilcoxonMode::Auto);

// Holm step-down family-wise adjustment; output aligned with the input order.
std::vector<double> holm(const std::vector<double>& pvalues);

// Vargha-Delaney effect size via rank sums; returns {A12, A21}, A12+A21 = 1.
std::pair<double, double> vargha_delaney(const std::vector<double>& a,
                                         const std::vector<double>& b);

struct PairwiseComparison {
    int a = 0;  // treatment indices into the BlockTable
    int b = 0;
    TestResult result;
};

struct RankGroupRow {
    std::string treatment;
    double rank_sum = 0.0;
    double median_score = 0.0;
    double mean_score = 0.0;
    std::string group;  // letter(s) shared by statistically indistinguishable runs
};

// Order treatments by rank sum (best first); adjacent treatments share a
// group letter iff their pairwise adjusted p >= alpha. Requires a result for
// every treatment pair.
std::vector<RankGroupRow> rank_groups(const BlockTable& table,
                                      const std::vector<PairwiseComparison>& pairwise,
                                      double alpha = 0.05);

}  // namespace logtriage
