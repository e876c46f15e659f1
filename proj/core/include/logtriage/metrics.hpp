#pragma once

#include <string>
#include <utility>
#include <vector>

namespace logtriage {

// Class-by-cluster co-occurrence counts.
struct ContingencyTable {
    std::vector<std::vector<long long>> counts;  // class x cluster
    std::vector<long long> class_sizes;
    std::vector<long long> cluster_sizes;
    long long n = 0;
};

// Map arbitrary string labels to dense ints in first-seen order.
std::vector<int> densify_labels(const std::vector<std::string>& labels);

ContingencyTable contingency(const std::vector<int>& truth,
                             const std::vector<int>& predicted);

// Natural-log entropy of a size distribution.
double entropy_of_sizes(const std::vector<long long>& sizes, long long n);
double mutual_information(const ContingencyTable& table);

// Expected MI under the permutation (hypergeometric) null model,
// accumulated with log-factorials so counts up to ~10^4 stay stable.
double expected_mutual_information(const ContingencyTable& table);

// (MI - E[MI]) / (max(H(U),H(V)) - E[MI]); 1 for identical partitions.
double ami(const std::vector<int>& truth, const std::vector<int>& predicted);

// MI / max(H(U),H(V)).
double nmi(const std::vector<int>& truth, const std::vector<int>& predicted);

// h = 1 - H(U|V)/H(U), c = 1 - H(V|U)/H(V); each 1 when the conditioning
// entropy vanishes. Swapping the arguments swaps the pair.
std::pair<double, double> homogeneity_completeness(const std::vector<int>& truth,
                                                   const std::vector<int>& predicted);

// er = 1 - proposed/n, ier = 1 - truth/n.
std::pair<double, double> effort_reduction(long long n, long long proposed_clusters,
                                           long long truth_classes);

struct QualityScores {
    double ami = 0.0;
    double nmi = 0.0;
    double homogeneity = 0.0;
    double completeness = 0.0;
    double er = 0.0;
    double ier = 0.0;
};

QualityScores score_clustering(const std::vector<int>& truth,
                               const std::vector<int>& predicted);

}  // namespace logtriage
