#include "logtriage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "logtriage/errors.hpp"

namespace logtriage {

namespace {

std::vector<int> densify(const std::vector<int>& labels) {
    std::unordered_map<int, int> map;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int label : labels) {
        auto [it, inserted] = map.emplace(label, static_cast<int>(map.size()));
        out.push_back(it->second);
    }
    return out;
}

void check_lengths(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.empty() || truth.size() != predicted.size()) {
        throw LengthMismatchError("label lists must be nonempty and equal-length, got " +
                                  std::to_string(truth.size()) + " and " +
                                  std::to_string(predicted.size()));
    }
}

// Partitions equal as set-of-sets (labels themselves don't matter).
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    return densify(a) == densify(b);
}

}  // namespace

std::vector<int> densify_labels(const std::vector<std::string>& labels) {
    std::unordered_map<std::string, int> map;
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        auto [it, inserted] = map.emplace(label, static_cast<int>(map.size()));
        out.push_back(it->second);
    }
    return out;
}

ContingencyTable contingency(const std::vector<int>& truth,
                             const std::vector<int>& predicted) {
    check_lengths(truth, predicted);
    std::vector<int> u = densify(truth);
    std::vector<int> v = densify(predicted);
    int n_classes = *std::max_element(u.begin(), u.end()) + 1;
    int n_clusters = *std::max_element(v.begin(), v.end()) + 1;

    ContingencyTable table;
    table.n = static_cast<long long>(u.size());
    table.counts.assign(static_cast<size_t>(n_classes),
                        std::vector<long long>(static_cast<size_t>(n_clusters), 0));
    table.class_sizes.assign(static_cast<size_t>(n_classes), 0);
    table.cluster_sizes.assign(static_cast<size_t>(n_clusters), 0);
    for (size_t i = 0; i < u.size(); ++i) {
        ++table.counts[static_cast<size_t>(u[i])][static_cast<size_t>(v[i])];
        ++table.class_sizes[static_cast<size_t>(u[i])];
        ++table.cluster_sizes[static_cast<size_t>(v[i])];
    }
    return table;
}

double entropy_of_sizes(const std::vector<long long>& sizes, long long n) {
    double h = 0.0;
    for (long long size : sizes) {
        if (size <= 0) continue;
        double p = static_cast<double>(size) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(const ContingencyTable& table) {
    double mi = 0.0;
    const double n = static_cast<double>(table.n);
    for (size_t i = 0; i < table.counts.size(); ++i) {
        for (size_t j = 0; j < table.counts[i].size(); ++j) {
            long long nij = table.counts[i][j];
            if (nij <= 0) continue;
            double pij = static_cast<double>(nij) / n;
            mi += pij * std::log(n * static_cast<double>(nij) /
                                 (static_cast<double>(table.class_sizes[i]) *
                                  static_cast<double>(table.cluster_sizes[j])));
        }
    }
    return mi;
}

double expected_mutual_information(const ContingencyTable& table) {
    const long long n = table.n;
    std::vector<double> lf(static_cast<size_t>(n) + 1, 0.0);
    for (long long i = 2; i <= n; ++i) {
        lf[static_cast<size_t>(i)] = lf[static_cast<size_t>(i - 1)] + std::log(static_cast<double>(i));
    }
    auto log_fact = [&](long long value) { return lf[static_cast<size_t>(value)]; };

    double emi = 0.0;
    for (long long a : table.class_sizes) {
        for (long long b : table.cluster_sizes) {
            long long lo = std::max<long long>(1, a + b - n);
            long long hi = std::min(a, b);
            for (long long nij = lo; nij <= hi; ++nij) {
                double log_p = log_fact(a) + log_fact(b) + log_fact(n - a) + log_fact(n - b) -
                               log_fact(n) - log_fact(nij) - log_fact(a - nij) -
                               log_fact(b - nij) - log_fact(n - a - b + nij);
                double term = (static_cast<double>(nij) / static_cast<double>(n)) *
                              std::log(static_cast<double>(n) * static_cast<double>(nij) /
                                       (static_cast<double>(a) * static_cast<double>(b)));
                emi += term * std::exp(log_p);
            }
        }
    }
    return emi;
}

double ami(const std::vector<int>& truth, const std::vector<int>& predicted) {
    check_lengths(truth, predicted);
    ContingencyTable table = contingency(truth, predicted);
    double hu = entropy_of_sizes(table.class_sizes, table.n);
    double hv = entropy_of_sizes(table.cluster_sizes, table.n);
    double h_max = std::max(hu, hv);
    if (h_max <= 0.0) {
        // both sides single-class: one shared cluster each, identical partitions
        return same_partition(truth, predicted) ? 1.0 : 0.0;
    }
    double mi = mutual_information(table);
    double emi = expected_mutual_information(table);
    double denom = h_max - emi;
    if (std::abs(denom) < 1e-15) {
        return same_partition(truth, predicted) ? 1.0 : 0.0;
    }
    return (mi - emi) / denom;
}

double nmi(const std::vector<int>& truth, const std::vector<int>& predicted) {
    check_lengths(truth, predicted);
    ContingencyTable table = contingency(truth, predicted);
    double h_max = std::max(entropy_of_sizes(table.class_sizes, table.n),
                            entropy_of_sizes(table.cluster_sizes, table.n));
    if (h_max <= 0.0) {
        return same_partition(truth, predicted) ? 1.0 : 0.0;
    }
    return mutual_information(table) / h_max;
}

std::pair<double, double> homogeneity_completeness(const std::vector<int>& truth,
                                                   const std::vector<int>& predicted) {
    check_lengths(truth, predicted);
    ContingencyTable table = contingency(truth, predicted);
    const double n = static_cast<double>(table.n);
    double hu = entropy_of_sizes(table.class_sizes, table.n);
    double hv = entropy_of_sizes(table.cluster_sizes, table.n);

    double h_u_given_v = 0.0;  // H(truth | predicted)
    double h_v_given_u = 0.0;  // H(predicted | truth)
    for (size_t i = 0; i < table.counts.size(); ++i) {
        for (size_t j = 0; j < table.counts[i].size(); ++j) {
            long long nij = table.counts[i][j];
            if (nij <= 0) continue;
            double pij = static_cast<double>(nij) / n;
            h_u_given_v -= pij * std::log(static_cast<double>(nij) /
                                          static_cast<double>(table.cluster_sizes[j]));
            h_v_given_u -= pij * std::log(static_cast<double>(nij) /
                                          static_cast<double>(table.class_sizes[i]));
        }
    }
    double homogeneity = hu <= 0.0 ? 1.0 : 1.0 - h_u_given_v / hu;
    double completeness = hv <= 0.0 ? 1.0 : 1.0 - h_v_given_u / hv;
    return {homogeneity, completeness};
}

std::pair<double, double> effort_reduction(long long n, long long proposed_clusters,
                                           long long truth_classes) {
    if (n < 1 || proposed_clusters < 1 || proposed_clusters > n || truth_classes < 1 ||
        truth_classes > n) {
        throw RangeError("effort reduction needs 1 <= counts <= n, got n=" +
                         std::to_string(n) + " proposed=" + std::to_string(proposed_clusters) +
                         " truth=" + std::to_string(truth_classes));
    }
    double er = 1.0 - static_cast<double>(proposed_clusters) / static_cast<double>(n);
    double ier = 1.0 - static_cast<double>(truth_classes) / static_cast<double>(n);
    return {er, ier};
}

QualityScores score_clustering(const std::vector<int>& truth,
                               const std::vector<int>& predicted) {
    check_lengths(truth, predicted);
    QualityScores scores;
    scores.ami = ami(truth, predicted);
    scores.nmi = nmi(truth, predicted);
    auto [h, c] = homogeneity_completeness(truth, predicted);
    scores.homogeneity = h;
    scores.completeness = c;
    long long classes = static_cast<long long>(std::set<int>(truth.begin(), truth.end()).size());
    long long clusters =
        static_cast<long long>(std::set<int>(predicted.begin(), predicted.end()).size());
    auto [er, ier] = effort_reduction(static_cast<long long>(truth.size()), clusters, classes);
    scores.er = er;
    scores.ier = ier;
    return scores;
}

}  // namespace logtriage
