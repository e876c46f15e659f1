#include "logtriage/cluster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "logtriage/errors.hpp"
#include "nlohmann/json.hpp"

namespace logtriage {

DistanceMatrix cosine_distance_matrix(const Eigen::MatrixXd& rows,
                                      const std::vector<std::string>* row_ids) {
    const int n = static_cast<int>(rows.rows());
    Eigen::VectorXd norms(n);
    for (int i = 0; i < n; ++i) {
        norms[i] = rows.row(i).norm();
        if (norms[i] == 0.0) {
            std::string who = row_ids && i < static_cast<int>(row_ids->size())
                                  ? (*row_ids)[static_cast<size_t>(i)]
                                  : std::to_string(i);
            throw ZeroVectorError("cosine distance undefined for all-zero vector: " + who);
        }
    }
    DistanceMatrix dist(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double cosine = rows.row(i).dot(rows.row(j)) / (norms[i] * norms[j]);
            cosine = std::clamp(cosine, -1.0, 1.0);
            dist.set(i, j, 1.0 - cosine);
        }
    }
    return dist;
}

LinkageCriterion parse_linkage(const std::string& text) {
    if (text == "single") return LinkageCriterion::Single;
    if (text == "complete") return LinkageCriterion::Complete;
    if (text == "average") return LinkageCriterion::Average;
    if (text == "weighted") return LinkageCriterion::Weighted;
    throw Error("linkage must be single|complete|average|weighted, got '" + text + "'");
}

std::string to_string(LinkageCriterion criterion) {
    switch (criterion) {
        case LinkageCriterion::Single: return "single";
        case LinkageCriterion::Complete: return "complete";
        case LinkageCriterion::Average: return "average";
        case LinkageCriterion::Weighted: return "weighted";
    }
    return "complete";
}

Dendrogram hac(const DistanceMatrix& dist, LinkageCriterion criterion) {
    const int n = dist.size();
    if (n < 2) throw Error("clustering needs at least 2 points, got " + std::to_string(n));

    // Slot-compacted working state: slot s holds cluster id[s] of size sz[s];
    // work[s][t] is the current criterion distance between slots.
    std::vector<int> id(n), sz(n, 1);
    std::iota(id.begin(), id.end(), 0);
    std::vector<std::vector<double>> work(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) work[i][j] = work[j][i] = dist.at(i, j);
    std::vector<char> alive(n, 1);

    Dendrogram out;
    out.n = n;
    out.criterion = criterion;
    out.merges.reserve(static_cast<size_t>(n) - 1);

    for (int step = 0; step < n - 1; ++step) {
        int best_i = -1, best_j = -1;
        double best_d = std::numeric_limits<double>::infinity();
        int best_lo = 0, best_hi = 0;
        for (int i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                double d = work[i][j];
                int lo = std::min(id[i], id[j]);
                int hi = std::max(id[i], id[j]);
                bool better = d < best_d ||
                              (d == best_d &&
                               (lo < best_lo || (lo == best_lo && hi < best_hi)));
                if (better) {
                    best_d = d;
                    best_i = i;
                    best_j = j;
                    best_lo = lo;
                    best_hi = hi;
                }
            }
        }

        const int new_id = n + step;
        const int size_a = sz[best_i];
        const int size_b = sz[best_j];
        out.merges.push_back({best_lo, best_hi, best_d, size_a + size_b});

        for (int t = 0; t < n; ++t) {
            if (!alive[t] || t == best_i || t == best_j) continue;
            double da = work[best_i][t];
            double db = work[best_j][t];
            double updated = 0.0;
            switch (criterion) {
                case LinkageCriterion::Single:
                    updated = std::min(da, db);
                    break;
                case LinkageCriterion::Complete:
                    updated = std::max(da, db);
                    break;
                case LinkageCriterion::Average:
                    updated = (size_a * da + size_b * db) / (size_a + size_b);
                    break;
                case LinkageCriterion::Weighted:
                    updated = 0.5 * (da + db);
                    break;
            }
            work[best_i][t] = work[t][best_i] = updated;
        }
        id[best_i] = new_id;
        sz[best_i] = size_a + size_b;
        alive[best_j] = 0;
    }
    return out;
}

Clustering cut(const Dendrogram& dendrogram, double theta) {
    const int n = dendrogram.n;
    Clustering out;
    out.theta = theta;
    out.criterion = dendrogram.criterion;

    // parent link per node; only merges at distance <= theta are applied
    std::vector<int> parent(static_cast<size_t>(2) * n - 1, -1);
    for (size_t m = 0; m < dendrogram.merges.size(); ++m) {
        const Merge& merge = dendrogram.merges[m];
        if (merge.distance > theta) break;
        int internal = n + static_cast<int>(m);
        parent[static_cast<size_t>(merge.a)] = internal;
        parent[static_cast<size_t>(merge.b)] = internal;
    }

    std::vector<int> root_label(static_cast<size_t>(2) * n - 1, -1);
    out.assignment.assign(static_cast<size_t>(n), -1);
    for (int leaf = 0; leaf < n; ++leaf) {
        int node = leaf;
        while (parent[static_cast<size_t>(node)] != -1) node = parent[static_cast<size_t>(node)];
        int& label = root_label[static_cast<size_t>(node)];
        if (label == -1) {
            label = static_cast<int>(out.clusters.size());
            out.clusters.emplace_back();
        }
        out.assignment[static_cast<size_t>(leaf)] = label;
        out.clusters[static_cast<size_t>(label)].push_back(leaf);
    }
    // walking leaves in order already yields labels ordered by smallest
    // member and sorted member lists
    return out;
}

void select_representatives(Clustering& clustering, const DistanceMatrix& dist) {
    clustering.representatives.clear();
    clustering.representatives.reserve(clustering.clusters.size());
    for (const auto& members : clustering.clusters) {
        int best = members.front();
        double best_sum = std::numeric_limits<double>::infinity();
        for (int candidate : members) {
            double sum = 0.0;
            for (int other : members) {
                if (other != candidate) sum += dist.at(candidate, other);
            }
            if (sum < best_sum) {
                best_sum = sum;
                best = candidate;
            }
        }
        clustering.representatives.push_back(best);
    }
}

std::string clustering_to_json(const Clustering& clustering,
                               const std::vector<std::string>& row_ids) {
    auto name_of = [&](int index) {
        return index < static_cast<int>(row_ids.size()) ? row_ids[static_cast<size_t>(index)]
                                                        : std::to_string(index);
    };
    nlohmann::json doc;
    doc["theta"] = clustering.theta;
    doc["criterion"] = to_string(clustering.criterion);
    doc["clusters"] = nlohmann::json::array();
    for (size_t label = 0; label < clustering.clusters.size(); ++label) {
        nlohmann::json entry;
        entry["label"] = label;
        if (label < clustering.representatives.size()) {
            entry["representative"] = name_of(clustering.representatives[label]);
        }
        entry["members"] = nlohmann::json::array();
        for (int member : clustering.clusters[label]) {
            entry["members"].push_back(name_of(member));
        }
        doc["clusters"].push_back(std::move(entry));
    }
    return doc.dump(2);
}

}  // namespace logtriage
