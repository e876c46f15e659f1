#include "logtriage/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "logtriage/errors.hpp"

namespace logtriage {

void validate(const BlockTable& table) {
    const size_t k = table.treatments.size();
    const size_t n = table.blocks.size();
    if (k < 2 || n < 2) {
        throw IncompleteDesignError("blocked design needs >=2 treatments and >=2 blocks, got " +
                                    std::to_string(k) + "x" + std::to_string(n));
    }
    if (table.scores.size() != k) {
        throw IncompleteDesignError("score matrix has " + std::to_string(table.scores.size()) +
                                    " rows for " + std::to_string(k) + " treatments");
    }
    for (size_t t = 0; t < k; ++t) {
        if (table.scores[t].size() != n) {
            throw IncompleteDesignError("treatment '" + table.treatments[t] + "' has " +
                                        std::to_string(table.scores[t].size()) +
                                        " scores for " + std::to_string(n) + " blocks");
        }
        for (double score : table.scores[t]) {
            if (std::isnan(score)) {
                throw IncompleteDesignError("treatment '" + table.treatments[t] +
                                            "' has a missing (NaN) cell");
            }
        }
    }
}

std::vector<double> ranks_with_ties(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

TestResult friedman(const BlockTable& table) {
    validate(table);
    const size_t k = table.treatments.size();
    const size_t n = table.blocks.size();

    std::vector<double> rank_sums(k, 0.0);
    double tie_term = 0.0;  // sum over blocks of sum(t^3 - t) per tie group
    std::vector<double> block(k);
    for (size_t b = 0; b < n; ++b) {
        for (size_t t = 0; t < k; ++t) block[t] = table.scores[t][b];
        std::vector<double> ranks = ranks_with_ties(block);
        for (size_t t = 0; t < k; ++t) rank_sums[t] += ranks[t];

        std::vector<double> sorted(block);
        std::sort(sorted.begin(), sorted.end());
        size_t i = 0;
        while (i < k) {
            size_t j = i;
            while (j + 1 < k && sorted[j + 1] == sorted[i]) ++j;
            double t_size = static_cast<double>(j - i + 1);
            tie_term += t_size * t_size * t_size - t_size;
            i = j + 1;
        }
    }

    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    double statistic = 0.0;
    for (size_t t = 0; t < k; ++t) {
        double mean_rank = rank_sums[t] / nd;
        double dev = mean_rank - (kd + 1.0) / 2.0;
        statistic += dev * dev;
    }
    statistic *= 12.0 * nd / (kd * (kd + 1.0));

    double correction = 1.0 - tie_term / (nd * kd * (kd * kd - 1.0));
    TestResult result;
    if (correction <= 0.0) {
        // every block fully tied: no information, nothing to reject
        result.statistic = 0.0;
        result.p = 1.0;
        return result;
    }
    result.statistic = statistic / correction;
    boost::math::chi_squared dist(kd - 1.0);
    result.p = boost::math::cdf(boost::math::complement(dist, result.statistic));
    return result;
}

namespace {

struct SignedRanks {
    double w_plus = 0.0;
    double w_minus = 0.0;
    std::vector<double> nonzero_ranks;  // ranks of nonzero differences
    double tie_term = 0.0;              // sum(t^3 - t) over tie groups of ALL diffs
    size_t n_zero = 0;
    size_t n_total = 0;
};

SignedRanks signed_ranks_pratt(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw LengthMismatchError("paired test needs equal-length nonempty samples, got " +
                                  std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    const size_t n = a.size();
    std::vector<double> diff(n), abs_diff(n);
    for (size_t i = 0; i < n; ++i) {
        diff[i] = a[i] - b[i];
        abs_diff[i] = std::abs(diff[i]);
    }
    std::vector<double> ranks = ranks_with_ties(abs_diff);

    SignedRanks out;
    out.n_total = n;
    for (size_t i = 0; i < n; ++i) {
        if (diff[i] > 0.0) {
            out.w_plus += ranks[i];
            out.nonzero_ranks.push_back(ranks[i]);
        } else if (diff[i] < 0.0) {
            out.w_minus += ranks[i];
            out.nonzero_ranks.push_back(ranks[i]);
        } else {
            ++out.n_zero;
        }
    }

    std::vector<double> sorted(abs_diff);
    std::sort(sorted.begin(), sorted.end());
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        double t_size = static_cast<double>(j - i + 1);
        out.tie_term += t_size * t_size * t_size - t_size;
        i = j + 1;
    }
    return out;
}

// Exact null distribution of W+ over sign assignments of the nonzero
// differences. Ranks are halves at worst (mean-rank ties), so doubling them
// gives integers and the distribution folds into a subset-sum table.
double exact_wilcoxon_p(const SignedRanks& sr, Sidedness side) {
    std::vector<long long> doubled;
    doubled.reserve(sr.nonzero_ranks.size());
    long long total = 0;
    for (double r : sr.nonzero_ranks) {
        long long d = std::llround(2.0 * r);
        doubled.push_back(d);
        total += d;
    }
    std::vector<double> weight(static_cast<size_t>(total) + 1, 0.0);
    weight[0] = 1.0;
    long long reach = 0;
    for (long long d : doubled) {
        reach += d;
        for (long long s = reach; s >= d; --s) {
            weight[static_cast<size_t>(s)] += weight[static_cast<size_t>(s - d)];
        }
    }
    double denom = std::pow(2.0, static_cast<double>(doubled.size()));
    long long observed = std::llround(2.0 * sr.w_plus);
    double p_le = 0.0, p_ge = 0.0;
    for (long long s = 0; s <= total; ++s) {
        if (s <= observed) p_le += weight[static_cast<size_t>(s)];
        if (s >= observed) p_ge += weight[static_cast<size_t>(s)];
    }
    p_le /= denom;
    p_ge /= denom;
    switch (side) {
        case Sidedness::Greater: return std::min(1.0, p_ge);
        case Sidedness::Less: return std::min(1.0, p_le);
        case Sidedness::TwoSided: break;
    }
    return std::min(1.0, 2.0 * std::min(p_le, p_ge));
}

// Normal approximation with Pratt zero adjustment, tie correction, and
// continuity correction.
double normal_wilcoxon_p(const SignedRanks& sr, Sidedness side) {
    const double n = static_cast<double>(sr.n_total);
    const double z = static_cast<double>(sr.n_zero);
    double mean = n * (n + 1.0) / 4.0 - z * (z + 1.0) / 4.0;
    double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 -
                      z * (z + 1.0) * (2.0 * z + 1.0) / 24.0 - sr.tie_term / 48.0;
    if (variance <= 0.0) return 1.0;
    double sd = std::sqrt(variance);
    double centered = sr.w_plus - mean;
    auto upper_tail = [&](double value) {  // P(Z >= value) with continuity correction
        return 0.5 * std::erfc((value - 0.5) / (sd * std::sqrt(2.0)));
    };
    auto lower_tail = [&](double value) {  // P(Z <= value)
        return 0.5 * std::erfc(-(value + 0.5) / (sd * std::sqrt(2.0)));
    };
    switch (side) {
        case Sidedness::Greater: return std::min(1.0, upper_tail(centered));
        case Sidedness::Less: return std::min(1.0, lower_tail(centered));
        case Sidedness::TwoSided: break;
    }
    return std::min(1.0, 2.0 * std::min(lower_tail(centered), upper_tail(centered)));
}

}  // namespace

TestResult wilcoxon_pratt(const std::vector<double>& a, const std::vector<double>& b,
                          Sidedness side, WilcoxonMode mode) {
    SignedRanks sr = signed_ranks_pratt(a, b);
    TestResult result;
    result.statistic = std::min(sr.w_plus, sr.w_minus);
    if (sr.nonzero_ranks.empty()) {
        // every pair tied: the samples are indistinguishable
        result.statistic = 0.0;
        result.p = 1.0;
        return result;
    }
    bool exact = mode == WilcoxonMode::Exact ||
                 (mode == WilcoxonMode::Auto && sr.n_total < 10);
    result.p = exact ? exact_wilcoxon_p(sr, side) : normal_wilcoxon_p(sr, side);
    return result;
}

std::vector<double> holm(const std::vector<double>& pvalues) {
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw RangeError("p-values must lie in [0,1], got " + std::to_string(p));
        }
    }
    const size_t m = pvalues.size();
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return pvalues[a] < pvalues[b]; });
    std::vector<double> adjusted(m, 0.0);
    double running_max = 0.0;
    for (size_t i = 0; i < m; ++i) {
        double scaled = std::min(1.0, static_cast<double>(m - i) * pvalues[order[i]]);
        running_max = std::max(running_max, scaled);
        adjusted[order[i]] = running_max;
    }
    return adjusted;
}

std::pair<double, double> vargha_delaney(const std::vector<double>& a,
                                         const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw EmptySampleError("effect size needs two nonempty samples");
    }
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> ranks = ranks_with_ties(pooled);
    double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(a.size()), 0.0);
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    double a12 = (r1 / n1 - (n1 + 1.0) / 2.0) / n2;
    return {a12, 1.0 - a12};
}

std::vector<RankGroupRow> rank_groups(const BlockTable& table,
                                      const std::vector<PairwiseComparison>& pairwise,
                                      double alpha) {
    validate(table);
    const size_t k = table.treatments.size();
    const size_t n = table.blocks.size();

    std::map<std::pair<int, int>, double> adjusted;
    for (const auto& cmp : pairwise) {
        adjusted[{std::min(cmp.a, cmp.b), std::max(cmp.a, cmp.b)}] = cmp.result.adjusted_p;
    }
    for (int i = 0; i < static_cast<int>(k); ++i) {
        for (int j = i + 1; j < static_cast<int>(k); ++j) {
            if (!adjusted.count({i, j})) {
                throw MissingComparisonError("no pairwise result for '" +
                                             table.treatments[static_cast<size_t>(i)] +
                                             "' vs '" +
                                             table.treatments[static_cast<size_t>(j)] + "'");
            }
        }
    }

    std::vector<double> rank_sums(k, 0.0);
    std::vector<double> block(k);
    for (size_t b = 0; b < n; ++b) {
        for (size_t t = 0; t < k; ++t) block[t] = table.scores[t][b];
        std::vector<double> ranks = ranks_with_ties(block);
        for (size_t t = 0; t < k; ++t) rank_sums[t] += ranks[t];
    }

    std::vector<size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return rank_sums[a] > rank_sums[b];  // best (highest ranks) first
    });

    std::vector<RankGroupRow> rows(k);
    char letter = 'a';
    for (size_t pos = 0; pos < k; ++pos) {
        size_t t = order[pos];
        if (pos > 0) {
            size_t prev = order[pos - 1];
            auto key = std::make_pair(std::min<int>(static_cast<int>(prev), static_cast<int>(t)),
                                      std::max<int>(static_cast<int>(prev), static_cast<int>(t)));
            if (adjusted[key] < alpha) ++letter;  // distinguishable: next group
        }
        RankGroupRow& row = rows[pos];
        row.treatment = table.treatments[t];
        row.rank_sum = rank_sums[t];
        row.group = std::string(1, letter);

        std::vector<double> scores(table.scores[t]);
        row.mean_score = std::accumulate(scores.begin(), scores.end(), 0.0) /
                         static_cast<double>(scores.size());
        std::sort(scores.begin(), scores.end());
        size_t mid = scores.size() / 2;
        row.median_score = scores.size() % 2 == 1
                               ? scores[mid]
                               : 0.5 * (scores[mid - 1] + scores[mid]);
    }
    return rows;
}

}  // namespace logtriage
