#include "logtriage/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "logtriage/csv.hpp"
#include "logtriage/errors.hpp"

namespace fs = std::filesystem;

namespace logtriage {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string format_fixed2(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);  // bitwise round-trip
    return buf;
}

std::uint64_t fnv1a64(const std::string& text, std::uint64_t hash = 14695981039346656037ULL) {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

template <typename T, typename Fn>
std::string join_mapped(const std::vector<T>& values, Fn&& fn) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back(',');
        out += fn(values[i]);
    }
    return out;
}

std::string canonical_grid(const GridSpec& grid, const std::vector<std::string>& datasets) {
    std::string text = "gammas=" + join_mapped(grid.gammas, format_fixed2);
    text += ";thetas=" + join_mapped(grid.thetas, format_fixed2);
    text += ";methods=" +
            join_mapped(grid.methods, [](ReductionMethod m) { return to_string(m); });
    text += ";criteria=" +
            join_mapped(grid.criteria, [](LinkageCriterion c) { return to_string(c); });
    char evar[32];
    std::snprintf(evar, sizeof(evar), "%.6g", grid.target_evar);
    text += ";target_evar=";
    text += evar;
    text += ";mode=" + to_string(grid.mode);
    text += ";seed=" + std::to_string(grid.seed);
    text += ";datasets=";
    for (size_t i = 0; i < datasets.size(); ++i) {
        if (i) text.push_back('|');
        text += datasets[i];
    }
    return text;
}

// Cell identity within the results file: exact formatted strings, so float
// round-tripping can't split a key.
std::string record_key(const std::string& dataset, ReductionMethod method,
                       LinkageCriterion criterion, const std::string& gamma_str,
                       const std::string& theta_str) {
    return dataset + "\x1f" + to_string(method) + "\x1f" + to_string(criterion) + "\x1f" +
           gamma_str + "\x1f" + theta_str;
}

std::uint64_t cell_seed(const GridSpec& grid, const std::string& dataset,
                        ReductionMethod method, const std::string& gamma_str) {
    return fnv1a64(dataset + "|" + to_string(method) + "|" + gamma_str) ^ grid.seed;
}

std::vector<int> truth_of(const WeightedMatrix& matrix, const std::string& dataset_name) {
    for (const auto& label : matrix.truth_labels) {
        if (label.empty()) {
            throw Error("dataset '" + dataset_name +
                        "' lacks ground-truth labels on some failing logs; scoring needs them");
        }
    }
    return densify_labels(matrix.truth_labels);
}

}  // namespace

// Degenerate inputs (all rows identical) admit no principal directions; the
// reduction is skipped rather than failed, marked by k=0 and evar 1.
static ReducedMatrix reduce_or_passthrough(const Eigen::MatrixXd& values,
                                           const ReductionConfig& config) {
    try {
        return reduce(values, config);
    } catch (const RankDeficientError&) {
        ReducedMatrix out;
        out.values = values;
        out.k = 0;
        out.achieved_evar = 1.0;
        out.method = config.method;
        return out;
    }
}

RunResult run_once(const Dataset& dataset, const RunConfig& config) {
    if (!(config.theta > 0.0)) {
        throw DomainError("theta must be positive, got " + std::to_string(config.theta));
    }
    auto start = std::chrono::steady_clock::now();

    VectorizeResult vec = vectorize(dataset, config.gamma, config.mode);

    ReductionConfig reduction;
    reduction.method = config.method;
    reduction.target_evar = config.target_evar;
    reduction.nmf_max_iters = config.nmf_max_iters;
    reduction.nmf_tolerance = config.nmf_tolerance;
    reduction.seed = config.seed;
    ReducedMatrix reduced = reduce_or_passthrough(vec.matrix.values, reduction);

    DistanceMatrix dist = cosine_distance_matrix(reduced.values, &vec.matrix.row_ids);
    Dendrogram dendrogram = hac(dist, config.criterion);

    RunResult result;
    result.clustering = cut(dendrogram, config.theta);
    select_representatives(result.clustering, dist);
    result.row_ids = vec.matrix.row_ids;
    result.k = reduced.k;
    result.achieved_evar = reduced.achieved_evar;
    result.iters = reduced.iters;
    result.n_clusters = static_cast<int>(result.clustering.clusters.size());

    result.has_truth = !vec.matrix.truth_labels.empty();
    for (const auto& label : vec.matrix.truth_labels) {
        if (label.empty()) result.has_truth = false;
    }
    if (result.has_truth) {
        result.scores = score_clustering(densify_labels(vec.matrix.truth_labels),
                                         result.clustering.assignment);
    }
    result.runtime_ms = elapsed_ms(start);
    return result;
}

GridSpec default_grid() {
    GridSpec grid;
    for (int i = 0; i <= 20; ++i) grid.gammas.push_back(i / 20.0);
    for (int j = 2; j <= 18; ++j) grid.thetas.push_back(j / 20.0);
    grid.methods = {ReductionMethod::None, ReductionMethod::Pca, ReductionMethod::Lsi,
                    ReductionMethod::Nmf};
    grid.criteria = {LinkageCriterion::Single, LinkageCriterion::Complete,
                     LinkageCriterion::Average, LinkageCriterion::Weighted};
    return grid;
}

const char* const kSweepHeader =
    "dataset,method,criterion,gamma,theta,k,achieved_evar,ami,nmi,homogeneity,"
    "completeness,er,ier,n_clusters,runtime_ms,seed";

std::string sweep_record_csv(const SweepRecord& record) {
    char runtime[32];
    std::snprintf(runtime, sizeof(runtime), "%.3f", record.runtime_ms);
    std::ostringstream out;
    out << csv::escape(record.dataset) << ',' << to_string(record.method) << ','
        << to_string(record.criterion) << ',' << format_fixed2(record.gamma) << ','
        << format_fixed2(record.theta) << ',' << record.k << ','
        << format_double(record.achieved_evar) << ',' << format_double(record.ami) << ','
        << format_double(record.nmi) << ',' << format_double(record.homogeneity) << ','
        << format_double(record.completeness) << ',' << format_double(record.er) << ','
        << format_double(record.ier) << ',' << record.n_clusters << ',' << runtime << ','
        << record.seed;
    return out.str();
}

SweepRecord parse_sweep_record(const std::string& line) {
    std::vector<std::string> fields = csv::split_line(line);
    if (fields.size() != 16) {
        throw Error("sweep record has " + std::to_string(fields.size()) +
                    " fields, expected 16: " + line);
    }
    SweepRecord record;
    size_t i = 0;
    try {
        record.dataset = fields[i++];
        record.method = parse_reduction_method(fields[i++]);
        record.criterion = parse_linkage(fields[i++]);
        record.gamma = std::stod(fields[i++]);
        record.theta = std::stod(fields[i++]);
        record.k = std::stoi(fields[i++]);
        record.achieved_evar = std::stod(fields[i++]);
        record.ami = std::stod(fields[i++]);
        record.nmi = std::stod(fields[i++]);
        record.homogeneity = std::stod(fields[i++]);
        record.completeness = std::stod(fields[i++]);
        record.er = std::stod(fields[i++]);
        record.ier = std::stod(fields[i++]);
        record.n_clusters = std::stoi(fields[i++]);
        record.runtime_ms = std::stod(fields[i++]);
        record.seed = std::stoull(fields[i++]);
    } catch (const std::exception& e) {
        throw Error("sweep record field " + std::to_string(i) + " unparsable: " + line);
    }
    return record;
}

std::uint64_t grid_fingerprint(const GridSpec& grid,
                               const std::vector<std::string>& dataset_names) {
    return fnv1a64(canonical_grid(grid, dataset_names));
}

std::string sweep_header_line(const GridSpec& grid,
                              const std::vector<std::string>& dataset_names) {
    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016llx",
                  static_cast<unsigned long long>(grid_fingerprint(grid, dataset_names)));
    std::string canonical = canonical_grid(grid, dataset_names);
    for (char& c : canonical) {
        if (c == ';') c = ' ';
    }
    return std::string("# fingerprint=") + fp + ' ' + canonical;
}

namespace {

GridSpec grid_from_header(const std::string& line, std::vector<std::string>* datasets,
                          std::uint64_t* stored_fp) {
    std::map<std::string, std::string> kv;
    std::istringstream in(line);
    std::string token;
    in >> token;  // '#'
    while (in >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
    const char* needed[] = {"fingerprint", "gammas",      "thetas", "methods",
                            "criteria",    "target_evar", "mode",   "seed",
                            "datasets"};
    for (const char* key : needed) {
        if (!kv.count(key)) {
            throw FingerprintMismatchError("results header is missing '" + std::string(key) +
                                           "': " + line);
        }
    }
    auto split = [](const std::string& text, char sep) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : text) {
            if (c == sep) {
                out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };

    GridSpec grid;
    for (const auto& g : split(kv["gammas"], ',')) grid.gammas.push_back(std::stod(g));
    for (const auto& t : split(kv["thetas"], ',')) grid.thetas.push_back(std::stod(t));
    for (const auto& m : split(kv["methods"], ','))
        grid.methods.push_back(parse_reduction_method(m));
    for (const auto& c : split(kv["criteria"], ','))
        grid.criteria.push_back(parse_linkage(c));
    grid.target_evar = std::stod(kv["target_evar"]);
    grid.mode = parse_weighting_mode(kv["mode"]);
    grid.seed = std::stoull(kv["seed"]);
    *datasets = split(kv["datasets"], '|');
    *stored_fp = std::stoull(kv["fingerprint"], nullptr, 16);
    return grid;
}

struct ExistingFile {
    std::set<std::string> keys;
    std::uintmax_t valid_bytes = 0;  // content to keep; anything past is torn
    size_t records = 0;
};

ExistingFile scan_existing(const std::string& path, const GridSpec& grid,
                           const std::vector<std::string>& dataset_names) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();

    ExistingFile existing;
    size_t first_nl = content.find('\n');
    if (first_nl == std::string::npos) {
        throw FingerprintMismatchError("results file has no complete header line: " + path);
    }
    std::string header = content.substr(0, first_nl);
    std::vector<std::string> header_datasets;
    std::uint64_t stored_fp = 0;
    GridSpec header_grid = grid_from_header(header, &header_datasets, &stored_fp);
    std::uint64_t expected = grid_fingerprint(grid, dataset_names);
    std::uint64_t recomputed = grid_fingerprint(header_grid, header_datasets);
    if (stored_fp != expected || recomputed != expected) {
        throw FingerprintMismatchError(
            "results file was produced by a different grid/seed/datasets: " + path);
    }

    size_t pos = first_nl + 1;
    existing.valid_bytes = pos;
    while (pos < content.size()) {
        size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) break;  // torn tail, drop it
        std::string line = content.substr(pos, nl - pos);
        if (line.empty() || line == kSweepHeader) {
            pos = nl + 1;
            existing.valid_bytes = pos;
            continue;
        }
        SweepRecord record;
        try {
            record = parse_sweep_record(line);
        } catch (const Error&) {
            break;  // damaged record; drop it and everything after, then recompute
        }
        existing.keys.insert(record_key(record.dataset, record.method, record.criterion,
                                        format_fixed2(record.gamma),
                                        format_fixed2(record.theta)));
        ++existing.records;
        pos = nl + 1;
        existing.valid_bytes = pos;
    }
    return existing;
}

struct SweepUnit {
    size_t dataset = 0;
    size_t method = 0;
    size_t gamma = 0;
};

}  // namespace

SweepSummary sweep(const std::vector<Dataset>& datasets, const GridSpec& grid,
                   const std::string& out_csv, int jobs) {
    if (datasets.empty()) throw Error("sweep needs at least one dataset");
    if (grid.gammas.empty() || grid.thetas.empty() || grid.methods.empty() ||
        grid.criteria.empty()) {
        throw Error("sweep grid must have at least one value on every axis");
    }
    std::vector<std::string> names;
    for (const auto& d : datasets) names.push_back(d.name);

    SweepSummary summary;
    summary.total = datasets.size() * grid.methods.size() * grid.gammas.size() *
                    grid.criteria.size() * grid.thetas.size();

    std::set<std::string> existing_keys;
    bool fresh = !fs::exists(out_csv) || fs::file_size(out_csv) == 0;
    if (!fresh) {
        ExistingFile existing = scan_existing(out_csv, grid, names);
        existing_keys = std::move(existing.keys);
        summary.resumed = existing.records;
        fs::resize_file(out_csv, existing.valid_bytes);
    }

    std::ofstream out(out_csv, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot write results file: " + out_csv);
    if (fresh) {
        out << sweep_header_line(grid, names) << '\n';
        out << kSweepHeader << '\n';
        out.flush();
    }

    // precompute formatted axis values once
    std::vector<std::string> gamma_strs, theta_strs;
    for (double g : grid.gammas) gamma_strs.push_back(format_fixed2(g));
    for (double t : grid.thetas) theta_strs.push_back(format_fixed2(t));

    std::vector<SweepUnit> units;
    for (size_t d = 0; d < datasets.size(); ++d)
        for (size_t m = 0; m < grid.methods.size(); ++m)
            for (size_t g = 0; g < grid.gammas.size(); ++g) units.push_back({d, m, g});

    auto compute_unit = [&](const SweepUnit& unit) {
        std::vector<std::string> lines;
        const Dataset& dataset = datasets[unit.dataset];
        ReductionMethod method = grid.methods[unit.method];
        double gamma = grid.gammas[unit.gamma];
        const std::string& gamma_str = gamma_strs[unit.gamma];

        // anything left to do in this unit?
        size_t missing = 0;
        for (size_t c = 0; c < grid.criteria.size(); ++c)
            for (size_t t = 0; t < grid.thetas.size(); ++t)
                if (!existing_keys.count(record_key(dataset.name, method, grid.criteria[c],
                                                    gamma_str, theta_strs[t])))
                    ++missing;
        if (missing == 0) return lines;

        auto start = std::chrono::steady_clock::now();
        VectorizeResult vec = vectorize(dataset, gamma, grid.mode);
        std::vector<int> truth = truth_of(vec.matrix, dataset.name);

        ReductionConfig reduction;
        reduction.method = method;
        reduction.target_evar = grid.target_evar;
        reduction.seed = cell_seed(grid, dataset.name, method, gamma_str);
        ReducedMatrix reduced = reduce_or_passthrough(vec.matrix.values, reduction);
        DistanceMatrix dist = cosine_distance_matrix(reduced.values, &vec.matrix.row_ids);

        std::vector<SweepRecord> records;
        for (size_t c = 0; c < grid.criteria.size(); ++c) {
            Dendrogram dendrogram = hac(dist, grid.criteria[c]);
            for (size_t t = 0; t < grid.thetas.size(); ++t) {
                if (existing_keys.count(record_key(dataset.name, method, grid.criteria[c],
                                                   gamma_str, theta_strs[t]))) {
                    continue;
                }
                Clustering clustering = cut(dendrogram, grid.thetas[t]);
                QualityScores scores = score_clustering(truth, clustering.assignment);
                SweepRecord record;
                record.dataset = dataset.name;
                record.method = method;
                record.criterion = grid.criteria[c];
                record.gamma = gamma;
                record.theta = grid.thetas[t];
                record.k = reduced.k;
                record.achieved_evar = reduced.achieved_evar;
                record.ami = scores.ami;
                record.nmi = scores.nmi;
                record.homogeneity = scores.homogeneity;
                record.completeness = scores.completeness;
                record.er = scores.er;
                record.ier = scores.ier;
                record.n_clusters = static_cast<int>(clustering.clusters.size());
                record.seed = grid.seed;
                records.push_back(std::move(record));
            }
        }
        double share = elapsed_ms(start) / static_cast<double>(records.size());
        for (auto& record : records) {
            record.runtime_ms = share;
            lines.push_back(sweep_record_csv(record));
        }
        return lines;
    };

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(units.size())));
    if (workers == 1) {
        for (const auto& unit : units) {
            for (const auto& line : compute_unit(unit)) {
                out << line << '\n';
                ++summary.computed;
            }
            out.flush();
        }
        return summary;
    }

    std::atomic<size_t> next_unit{0};
    std::mutex mutex;
    std::condition_variable ready_cv;
    std::map<size_t, std::vector<std::string>> ready;
    std::exception_ptr failure;

    auto worker = [&]() {
        while (true) {
            size_t index = next_unit.fetch_add(1);
            if (index >= units.size()) return;
            std::vector<std::string> lines;
            try {
                lines = compute_unit(units[index]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mutex);
                if (!failure) failure = std::current_exception();
                next_unit.store(units.size());
                ready_cv.notify_all();
                return;
            }
            std::lock_guard<std::mutex> lock(mutex);
            ready.emplace(index, std::move(lines));
            ready_cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);

    size_t write_pos = 0;
    {
        std::unique_lock<std::mutex> lock(mutex);
        while (write_pos < units.size() && !failure) {
            ready_cv.wait(lock, [&] { return failure || ready.count(write_pos) != 0; });
            if (failure) break;
            std::vector<std::string> lines = std::move(ready[write_pos]);
            ready.erase(write_pos);
            lock.unlock();
            for (const auto& line : lines) {
                out << line << '\n';
                ++summary.computed;
            }
            out.flush();
            lock.lock();
            ++write_pos;
        }
    }
    for (auto& thread : pool) thread.join();
    if (failure) std::rethrow_exception(failure);
    return summary;
}

SweepFile load_sweep_file(const std::string& path, bool tolerate_torn_tail) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("results file not readable: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();

    size_t first_nl = content.find('\n');
    if (first_nl == std::string::npos) {
        throw FingerprintMismatchError("results file has no complete header line: " + path);
    }
    SweepFile file;
    GridSpec grid = grid_from_header(content.substr(0, first_nl), &file.datasets,
                                     &file.fingerprint);
    std::uint64_t recomputed = grid_fingerprint(grid, file.datasets);
    if (recomputed != file.fingerprint) {
        throw FingerprintMismatchError("results header fingerprint does not match its own "
                                       "grid description (file edited?): " + path);
    }
    file.grid = std::move(grid);

    size_t pos = first_nl + 1;
    while (pos < content.size()) {
        size_t nl = content.find('\n', pos);
        bool torn = nl == std::string::npos;
        std::string line = torn ? content.substr(pos) : content.substr(pos, nl - pos);
        if (torn) {
            if (tolerate_torn_tail) break;
            throw Error("results file ends mid-record (resume the sweep to repair): " + path);
        }
        if (!line.empty() && line != kSweepHeader) {
            file.records.push_back(parse_sweep_record(line));
        }
        pos = nl + 1;
    }
    return file;
}

void require_complete_grid(const SweepFile& file) {
    std::set<std::string> seen;
    for (const auto& record : file.records) {
        std::string key = record_key(record.dataset, record.method, record.criterion,
                                     format_fixed2(record.gamma), format_fixed2(record.theta));
        if (!seen.insert(key).second) {
            throw IncompleteGridError("duplicate record for dataset=" + record.dataset +
                                      " method=" + to_string(record.method) +
                                      " criterion=" + to_string(record.criterion) + " gamma=" +
                                      format_fixed2(record.gamma) + " theta=" +
                                      format_fixed2(record.theta));
        }
    }
    size_t missing = 0;
    std::string first_missing;
    for (const auto& dataset : file.datasets) {
        for (ReductionMethod method : file.grid.methods) {
            for (LinkageCriterion criterion : file.grid.criteria) {
                for (double gamma : file.grid.gammas) {
                    for (double theta : file.grid.thetas) {
                        std::string key = record_key(dataset, method, criterion,
                                                     format_fixed2(gamma), format_fixed2(theta));
                        if (!seen.count(key)) {
                            if (missing == 0) {
                                first_missing = "dataset=" + dataset + " method=" +
                                                to_string(method) + " criterion=" +
                                                to_string(criterion) + " gamma=" +
                                                format_fixed2(gamma) + " theta=" +
                                                format_fixed2(theta);
                            }
                            ++missing;
                        }
                    }
                }
            }
        }
    }
    if (missing > 0) {
        throw IncompleteGridError(std::to_string(missing) + " grid cells missing (first: " +
                                  first_missing + "); run the sweep to completion first");
    }
}

}  // namespace logtriage
