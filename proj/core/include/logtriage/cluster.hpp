#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace logtriage {

// Condensed symmetric distance matrix (upper triangle, zero diagonal).
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(int n) : n_(n), d_(static_cast<size_t>(n) * (n - 1) / 2, 0.0) {}

    int size() const { return n_; }

    double at(int i, int j) const {
        if (i == j) return 0.0;
        return d_[index(i, j)];
    }
    void set(int i, int j, double value) { d_[index(i, j)] = value; }

private:
    size_t index(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<size_t>(i) * n_ - static_cast<size_t>(i) * (i + 1) / 2 +
               static_cast<size_t>(j - i - 1);
    }

    int n_ = 0;
    std::vector<double> d_;
};

// d(i,j) = 1 - cos(v_i, v_j), clamped into [0,2] against rounding.
// row_ids, when given, name offending logs in ZeroVectorError messages.
DistanceMatrix cosine_distance_matrix(const Eigen::MatrixXd& rows,
                                      const std::vector<std::string>* row_ids = nullptr);

enum class LinkageCriterion { Single, Complete, Average, Weighted };

LinkageCriterion parse_linkage(const std::string& text);
std::string to_string(LinkageCriterion criterion);

struct Merge {
    int a = 0;          // child cluster id, a < b
    int b = 0;
    double distance = 0.0;
    int size = 0;       // members in the merged cluster
};

// Full merge history: leaves are 0..n-1, the i-th merge creates id n+i.
struct Dendrogram {
    int n = 0;
    LinkageCriterion criterion = LinkageCriterion::Complete;
    std::vector<Merge> merges;  // n-1 entries, non-decreasing distances
};

// Agglomerative clustering by repeated best-pair merging; inter-cluster
// distances follow the criterion (Lance-Williams family). Ties go to the
// lexicographically smallest (min id, max id) pair.
Dendrogram hac(const DistanceMatrix& dist, LinkageCriterion criterion);

struct Clustering {
    double theta = 0.0;
    LinkageCriterion criterion = LinkageCriterion::Complete;
    std::vector<int> assignment;             // point -> label
    std::vector<std::vector<int>> clusters;  // label -> sorted member indices
    std::vector<int> representatives;        // label -> member; empty until selected
};

// Apply merges while distance <= theta; labels are numbered by each
// cluster's smallest member index.
Clustering cut(const Dendrogram& dendrogram, double theta);

// Per cluster, pick the member with the smallest mean distance to its
// co-members (ties: lowest index; singletons represent themselves).
void select_representatives(Clustering& clustering, const DistanceMatrix& dist);

// {theta, criterion, clusters: [{label, representative, members}]}
std::string clustering_to_json(const Clustering& clustering,
                               const std::vector<std::string>& row_ids);

}  // namespace logtriage
