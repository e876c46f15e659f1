#include "logtriage/dimred.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "logtriage/errors.hpp"

namespace logtriage {

ReductionMethod parse_reduction_method(const std::string& text) {
    if (text == "none") return ReductionMethod::None;
    if (text == "pca") return ReductionMethod::Pca;
    if (text == "lsi") return ReductionMethod::Lsi;
    if (text == "nmf") return ReductionMethod::Nmf;
    throw Error("reduction method must be none|pca|lsi|nmf, got '" + text + "'");
}

std::string to_string(ReductionMethod method) {
    switch (method) {
        case ReductionMethod::None: return "none";
        case ReductionMethod::Pca: return "pca";
        case ReductionMethod::Lsi: return "lsi";
        case ReductionMethod::Nmf: return "nmf";
    }
    return "none";
}

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& matrix) {
    Eigen::RowVectorXd means = matrix.colwise().mean();
    return matrix.rowwise() - means;
}

// Guards against "identical rows whose floating mean does not cancel
// exactly": anything this far below the matrix's own energy is noise.
bool no_variance(double total_centered, const Eigen::MatrixXd& matrix) {
    return total_centered <= matrix.squaredNorm() * 1e-24 + 1e-300;
}

void check_k(const Eigen::MatrixXd& matrix, int k, int max_k) {
    if (k < 1 || k > max_k) {
        throw DomainError("component count k=" + std::to_string(k) +
                          " outside [1," + std::to_string(max_k) + "] for a " +
                          std::to_string(matrix.rows()) + "x" +
                          std::to_string(matrix.cols()) + " matrix");
    }
}

}  // namespace

int estimate_components(const Eigen::MatrixXd& matrix, double target_evar) {
    if (!(target_evar > 0.0 && target_evar < 1.0)) {
        throw DomainError("target explained variance must lie strictly in (0,1), got " +
                          std::to_string(target_evar));
    }
    if (matrix.rows() < 2 || matrix.cols() < 1) {
        throw DomainError("component estimation needs at least 2 rows and 1 column");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered(matrix));
    const Eigen::VectorXd& sv = svd.singularValues();
    double total = sv.squaredNorm();
    if (no_variance(total, matrix)) {
        throw RankDeficientError("all rows identical: total variance is zero");
    }
    const int max_k = static_cast<int>(std::min<Eigen::Index>(matrix.rows() - 1, matrix.cols()));
    double cumulative = 0.0;
    for (int k = 1; k <= max_k; ++k) {
        cumulative += sv[k - 1] * sv[k - 1];
        if (cumulative / total >= target_evar - 1e-12) return k;
    }
    return max_k;
}

ReducedMatrix reduce_pca(const Eigen::MatrixXd& matrix, int k) {
    check_k(matrix, k, static_cast<int>(std::min<Eigen::Index>(matrix.rows() - 1, matrix.cols())));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered(matrix), Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    double total = sv.squaredNorm();
    if (no_variance(total, matrix)) {
        throw RankDeficientError("all rows identical: total variance is zero");
    }
    ReducedMatrix out;
    out.method = ReductionMethod::Pca;
    out.k = k;
    out.values = svd.matrixU().leftCols(k) * sv.head(k).asDiagonal();
    out.achieved_evar = sv.head(k).squaredNorm() / total;
    return out;
}

ReducedMatrix reduce_lsi(const Eigen::MatrixXd& matrix, int k) {
    check_k(matrix, k, static_cast<int>(std::min(matrix.rows(), matrix.cols())));
    double total = matrix.squaredNorm();
    if (total <= 0.0) {
        throw RankDeficientError("matrix is all zeros, nothing to decompose");
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    ReducedMatrix out;
    out.method = ReductionMethod::Lsi;
    out.k = k;
    out.values = svd.matrixU().leftCols(k) * sv.head(k).asDiagonal();
    out.achieved_evar = sv.head(k).squaredNorm() / total;
    return out;
}

ReducedMatrix reduce_nmf(const Eigen::MatrixXd& matrix, int k,
                         const ReductionConfig& config,
                         std::vector<double>* objective_trace) {
    check_k(matrix, k, static_cast<int>(std::min(matrix.rows(), matrix.cols())));
    if ((matrix.array() < 0.0).any()) {
        throw NonNegativityError("NMF input contains negative entries");
    }
    double total = matrix.squaredNorm();
    if (total <= 0.0) {
        throw RankDeficientError("matrix is all zeros, nothing to factorize");
    }

    const auto rows = matrix.rows();
    const auto cols = matrix.cols();
    const double scale = std::sqrt(matrix.mean() / static_cast<double>(k));
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::MatrixXd W(rows, k), H(k, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (int j = 0; j < k; ++j) W(i, j) = unif(rng) * scale;
    for (int i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) H(i, j) = unif(rng) * scale;

    constexpr double kEps = 1e-12;
    double objective = (matrix - W * H).squaredNorm();
    if (objective_trace) objective_trace->push_back(objective);

    int iter = 0;
    while (iter < config.nmf_max_iters) {
        ++iter;
        H.array() *= (W.transpose() * matrix).array() /
                     (((W.transpose() * W) * H).array() + kEps);
        W.array() *= (matrix * H.transpose()).array() /
                     ((W * (H * H.transpose())).array() + kEps);
        double next = (matrix - W * H).squaredNorm();
        if (objective_trace) objective_trace->push_back(next);
        double denom = std::max(objective, kEps);
        bool converged = std::abs(objective - next) / denom < config.nmf_tolerance;
        objective = next;
        if (converged) break;
    }

    ReducedMatrix out;
    out.method = ReductionMethod::Nmf;
    out.k = k;
    out.values = std::move(W);
    out.achieved_evar = 1.0 - objective / total;
    out.iters = iter;
    return out;
}

ReducedMatrix reduce(const Eigen::MatrixXd& matrix, const ReductionConfig& config) {
    if (config.method == ReductionMethod::None) {
        ReducedMatrix out;
        out.method = ReductionMethod::None;
        out.k = static_cast<int>(matrix.cols());
        out.values = matrix;
        out.achieved_evar = 1.0;
        return out;
    }
    int k = estimate_components(matrix, config.target_evar);
    switch (config.method) {
        case ReductionMethod::Pca: return reduce_pca(matrix, k);
        case ReductionMethod::Lsi: return reduce_lsi(matrix, k);
        case ReductionMethod::Nmf: return reduce_nmf(matrix, k, config);
        case ReductionMethod::None: break;
    }
    throw Error("unreachable reduction dispatch");
}

}  // namespace logtriage
