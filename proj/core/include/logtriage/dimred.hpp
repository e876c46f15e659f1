#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace logtriage {

enum class ReductionMethod { None, Pca, Lsi, Nmf };

ReductionMethod parse_reduction_method(const std::string& text);
std::string to_string(ReductionMethod method);

struct ReductionConfig {
    ReductionMethod method = ReductionMethod::None;
    double target_evar = 0.80;   // strictly inside (0,1)
    int nmf_max_iters = 500;
    double nmf_tolerance = 1e-5; // relative objective change
    std::uint64_t seed = 0;      // randomized initialization
};

struct ReducedMatrix {
    Eigen::MatrixXd values;      // rows x k, same row order as the input
    int k = 0;
    double achieved_evar = 1.0;
    ReductionMethod method = ReductionMethod::None;
    int iters = 0;               // NMF update count; 0 for closed-form methods
};

// Smallest k whose top-k PCA components reach the target cumulative
// explained-variance ratio. Throws RankDeficientError when the centered
// matrix carries no variance (all rows identical).
int estimate_components(const Eigen::MatrixXd& matrix, double target_evar);

// Center, project onto the top-k principal directions.
// achieved_evar = top-k eigenvalue share of total variance.
ReducedMatrix reduce_pca(const Eigen::MatrixXd& matrix, int k);

// Truncated SVD of the uncentered matrix; rows = U_k * Sigma_k.
// achieved_evar = top-k squared singular values over squared Frobenius norm.
ReducedMatrix reduce_lsi(const Eigen::MatrixXd& matrix, int k);

// Seeded multiplicative-update NMF minimizing squared Frobenius error;
// rows = W. achieved_evar = 1 - |X-WH|_F^2 / |X|_F^2. Running past
// nmf_max_iters is not an error: the factors reached so far are returned
// with the iteration count. `objective_trace`, when given, receives the
// objective after every update step.
ReducedMatrix reduce_nmf(const Eigen::MatrixXd& matrix, int k,
                         const ReductionConfig& config,
                         std::vector<double>* objective_trace = nullptr);

// Estimate k once via PCA at config.target_evar, then apply the configured
// method with that k. Method None passes the matrix through (evar 1).
ReducedMatrix reduce(const Eigen::MatrixXd& matrix, const ReductionConfig& config);

}  // namespace logtriage
