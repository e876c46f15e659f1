#include "logtriage/vectorize.hpp"

#include <cmath>
#include <sstream>

#include "logtriage/csv.hpp"
#include "logtriage/errors.hpp"

namespace logtriage {

WeightingMode parse_weighting_mode(const std::string& text) {
    if (text == "counts") return WeightingMode::Counts;
    if (text == "binary") return WeightingMode::Binary;
    throw Error("weighting mode must be 'counts' or 'binary', got '" + text + "'");
}

std::string to_string(WeightingMode mode) {
    return mode == WeightingMode::Counts ? "counts" : "binary";
}

ContrastSet compute_contrast(const Dataset& dataset) {
    auto failing = dataset.failing();
    if (failing.empty()) {
        throw NoFailingLogsError("contrast set needs at least one failing log in dataset '" +
                                 dataset.name + "'");
    }
    std::set<int> fail_events;
    for (const auto* seq : failing) fail_events.insert(seq->events.begin(), seq->events.end());
    for (const auto* seq : dataset.passing()) {
        for (int e : seq->events) fail_events.erase(e);
    }
    return ContrastSet{std::move(fail_events)};
}

double event_frequency_weight(int n_logs, int doc_freq) {
    if (n_logs < 1 || doc_freq < 1 || doc_freq > n_logs) {
        throw DomainError("event frequency weight needs 1 <= n_e <= N, got N=" +
                          std::to_string(n_logs) + " n_e=" + std::to_string(doc_freq));
    }
    double x = std::log(static_cast<double>(n_logs) / static_cast<double>(doc_freq));
    return 1.0 / (1.0 + std::exp(-x));
}

double combine_weights(double w_con, double w_f, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw DomainError("gamma must lie in [0,1], got " + std::to_string(gamma));
    }
    if (gamma == 0.0) return w_f;   // keep the endpoints bit-exact
    if (gamma == 1.0) return w_con;
    return gamma * w_con + (1.0 - gamma) * w_f;
}

WeightVector build_weights(const Dataset& dataset, const ContrastSet& contrast,
                           double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw DomainError("gamma must lie in [0,1], got " + std::to_string(gamma));
    }
    auto failing = dataset.failing();
    if (failing.empty()) {
        throw NoFailingLogsError("weighting needs at least one failing log in dataset '" +
                                 dataset.name + "'");
    }
    const int n_events = dataset.dictionary.size();
    WeightVector wv;
    wv.n_logs = static_cast<int>(failing.size());
    wv.gamma = gamma;
    wv.doc_freq.assign(n_events, 0);
    wv.w_f.assign(n_events, 0.0);
    wv.w_con.assign(n_events, 0.0);
    wv.w.assign(n_events, 0.0);

    for (const auto* seq : failing) {
        std::set<int> distinct(seq->events.begin(), seq->events.end());
        for (int e : distinct) ++wv.doc_freq[e];
    }
    for (int e = 0; e < n_events; ++e) {
        if (contrast.contains(e)) wv.w_con[e] = 1.0;
        if (wv.doc_freq[e] > 0) {
            wv.w_f[e] = event_frequency_weight(wv.n_logs, wv.doc_freq[e]);
        }
        wv.w[e] = combine_weights(wv.w_con[e], wv.w_f[e], gamma);
    }
    return wv;
}

VectorizeResult vectorize(const Dataset& dataset, double gamma, WeightingMode mode) {
    auto failing = dataset.failing();
    if (failing.size() < 2) {
        throw NoFailingLogsError("clustering needs at least two failing logs, dataset '" +
                                 dataset.name + "' has " + std::to_string(failing.size()));
    }
    ContrastSet contrast = compute_contrast(dataset);
    WeightVector weights = build_weights(dataset, contrast, gamma);

    const int n_rows = static_cast<int>(failing.size());
    const int n_events = dataset.dictionary.size();

    WeightedMatrix matrix;
    matrix.mode = mode;
    matrix.values = Eigen::MatrixXd::Zero(n_rows, n_events);
    matrix.row_ids.reserve(failing.size());
    matrix.truth_labels.reserve(failing.size());

    for (int r = 0; r < n_rows; ++r) {
        const auto* seq = failing[static_cast<size_t>(r)];
        matrix.row_ids.push_back(seq->log_id);
        matrix.truth_labels.push_back(seq->truth_label);
        if (mode == WeightingMode::Counts) {
            for (int e : seq->events) matrix.values(r, e) += weights.w[e];
        } else {
            std::set<int> distinct(seq->events.begin(), seq->events.end());
            for (int e : distinct) matrix.values(r, e) = weights.w[e];
        }
    }

    std::string degenerate;
    for (int r = 0; r < n_rows; ++r) {
        if (matrix.values.row(r).isZero(0.0)) {
            if (!degenerate.empty()) degenerate += ", ";
            degenerate += matrix.row_ids[static_cast<size_t>(r)];
        }
    }
    if (!degenerate.empty()) {
        throw DegenerateRowError("rows are all-zero after weighting (gamma=" +
                                 std::to_string(gamma) + "): " + degenerate);
    }
    return VectorizeResult{std::move(matrix), std::move(weights)};
}

std::string weight_vector_csv(const WeightVector& weights,
                              const EventDictionary& dictionary) {
    std::ostringstream out;
    out << "event_id,template,n_e,w_f,w_con,w\n";
    for (int e = 0; e < dictionary.size(); ++e) {
        out << e << ',' << csv::escape(dictionary.template_of(e)) << ','
            << weights.doc_freq[e] << ',' << weights.w_f[e] << ','
            << weights.w_con[e] << ',' << weights.w[e] << '\n';
    }
    return out.str();
}

}  // namespace logtriage
