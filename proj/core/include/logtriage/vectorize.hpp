#pragma once

#include <Eigen/Core>
#include <set>
#include <string>
#include <vector>

#include "logtriage/ingest.hpp"

namespace logtriage {

// Events seen in at least one failing log and in no passing log.
struct ContrastSet {
    std::set<int> events;
    bool contains(int e) const { return events.count(e) != 0; }
};

enum class WeightingMode { Counts, Binary };

WeightingMode parse_weighting_mode(const std::string& text);
std::string to_string(WeightingMode mode);

// Per-event weights over the failing-log population:
//   w_f = sigmoid(ln(N/n_e)), w_con = [e in contrast set],
//   w   = gamma*w_con + (1-gamma)*w_f.
struct WeightVector {
    int n_logs = 0;               // N: failing logs
    std::vector<int> doc_freq;    // n_e per event, over failing logs
    std::vector<double> w_f;      // 0 for events absent from failing logs
    std::vector<double> w_con;    // 0 or 1
    std::vector<double> w;
    double gamma = 0.5;
};

struct WeightedMatrix {
    std::vector<std::string> row_ids;       // failing log ids, manifest order
    std::vector<std::string> truth_labels;  // aligned with row_ids
    Eigen::MatrixXd values;                 // rows x events, tf(e,l) * w[e]
    WeightingMode mode = WeightingMode::Counts;
};

ContrastSet compute_contrast(const Dataset& dataset);

// sigmoid(ln(N/n_e)); requires 1 <= n_e <= N.
double event_frequency_weight(int n_logs, int doc_freq);

double combine_weights(double w_con, double w_f, double gamma);

WeightVector build_weights(const Dataset& dataset, const ContrastSet& contrast,
                           double gamma);

struct VectorizeResult {
    WeightedMatrix matrix;
    WeightVector weights;
};

// Weighted bag-of-events matrix over the failing logs. Throws
// NoFailingLogsError (fewer than two failing logs) and DegenerateRowError
// (some row is all-zero after weighting, listing the offending log ids).
VectorizeResult vectorize(const Dataset& dataset, double gamma,
                          WeightingMode mode = WeightingMode::Counts);

// Debug dump: event_id,template,n_e,w_f,w_con,w
std::string weight_vector_csv(const WeightVector& weights,
                              const EventDictionary& dictionary);

}  // namespace logtriage
