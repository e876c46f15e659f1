#include "logtriage/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "logtriage/errors.hpp"

namespace fs = std::filesystem;

namespace logtriage {

namespace {

std::string fixed2(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string compact(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

double metric_of(const SweepRecord& record, const std::string& metric) {
    if (metric == "ami") return record.ami;
    if (metric == "nmi") return record.nmi;
    if (metric == "homogeneity") return record.homogeneity;
    if (metric == "completeness") return record.completeness;
    if (metric == "er") return record.er;
    if (metric == "ier") return record.ier;
    if (metric == "achieved_evar") return record.achieved_evar;
    throw Error("unknown report metric '" + metric + "'");
}

// (method, criterion, gamma_str, theta_str) -> mean metric over datasets
using CellMeans = std::map<std::string, double>;

std::string cell_key(ReductionMethod method, LinkageCriterion criterion,
                     const std::string& gamma, const std::string& theta) {
    return to_string(method) + "|" + to_string(criterion) + "|" + gamma + "|" + theta;
}

CellMeans mean_over_datasets(const SweepFile& file, const std::string& metric) {
    std::map<std::string, std::pair<double, size_t>> sums;
    for (const auto& record : file.records) {
        std::string key = cell_key(record.method, record.criterion, fixed2(record.gamma),
                                   fixed2(record.theta));
        auto& slot = sums[key];
        slot.first += metric_of(record, metric);
        ++slot.second;
    }
    CellMeans means;
    for (const auto& [key, slot] : sums) {
        means[key] = slot.first / static_cast<double>(slot.second);
    }
    return means;
}

std::string render_heatmap(const SweepFile& file, const CellMeans& means,
                           ReductionMethod method, LinkageCriterion criterion,
                           const CellMeans* baseline) {
    std::ostringstream out;
    out << "theta";
    for (double gamma : file.grid.gammas) out << ',' << fixed2(gamma);
    out << '\n';
    for (double theta : file.grid.thetas) {
        out << fixed2(theta);
        for (double gamma : file.grid.gammas) {
            std::string key = cell_key(method, criterion, fixed2(gamma), fixed2(theta));
            auto it = means.find(key);
            if (it == means.end()) {
                throw IncompleteGridError("no records for " + key +
                                          "; cannot render a full heatmap");
            }
            double value = it->second;
            if (baseline) {
                std::string base_key = cell_key(ReductionMethod::None, criterion,
                                                fixed2(gamma), fixed2(theta));
                auto base = baseline->find(base_key);
                if (base == baseline->end()) {
                    throw IncompleteGridError("no baseline records for " + base_key);
                }
                value -= base->second;
            }
            out << ',' << compact(value);
        }
        out << '\n';
    }
    return out.str();
}

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) return sorted.front();
    double h = q * static_cast<double>(sorted.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(h));
    size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string treatment_name(ReductionMethod method, LinkageCriterion criterion) {
    return to_string(method) + "/" + to_string(criterion);
}

std::string heatmap_csv(const SweepFile& file, ReductionMethod method,
                        LinkageCriterion criterion, const std::string& metric) {
    CellMeans means = mean_over_datasets(file, metric);
    return render_heatmap(file, means, method, criterion, nullptr);
}

std::string difference_heatmap_csv(const SweepFile& file, ReductionMethod method,
                                   LinkageCriterion criterion, const std::string& metric) {
    CellMeans means = mean_over_datasets(file, metric);
    return render_heatmap(file, means, method, criterion, &means);
}

std::string boxplot_csv(const SweepFile& file) {
    std::ostringstream out;
    out << "method,criterion,min,q1,median,q3,max\n";
    for (ReductionMethod method : file.grid.methods) {
        for (LinkageCriterion criterion : file.grid.criteria) {
            std::vector<double> values;
            for (const auto& record : file.records) {
                if (record.method == method && record.criterion == criterion) {
                    values.push_back(record.ami);
                }
            }
            if (values.empty()) {
                throw IncompleteGridError("no records for configuration " +
                                          treatment_name(method, criterion));
            }
            std::sort(values.begin(), values.end());
            out << to_string(method) << ',' << to_string(criterion) << ','
                << compact(values.front()) << ',' << compact(quantile(values, 0.25)) << ','
                << compact(quantile(values, 0.5)) << ',' << compact(quantile(values, 0.75))
                << ',' << compact(values.back()) << '\n';
        }
    }
    return out.str();
}

std::string evar_summary_csv(const SweepFile& file) {
    std::ostringstream out;
    out << "method,records,min_evar,mean_evar,max_evar,target_evar,n_below_target\n";
    for (ReductionMethod method : file.grid.methods) {
        double lo = 1.0, hi = 0.0, sum = 0.0;
        size_t count = 0, below = 0;
        for (const auto& record : file.records) {
            if (record.method != method) continue;
            lo = std::min(lo, record.achieved_evar);
            hi = std::max(hi, record.achieved_evar);
            sum += record.achieved_evar;
            ++count;
            if (record.achieved_evar < file.grid.target_evar - 1e-9) ++below;
        }
        if (count == 0) {
            throw IncompleteGridError("no records for method " + to_string(method));
        }
        out << to_string(method) << ',' << count << ',' << compact(lo) << ','
            << compact(sum / static_cast<double>(count)) << ',' << compact(hi) << ','
            << compact(file.grid.target_evar) << ',' << below << '\n';
    }
    return out.str();
}

BlockTable block_table_from_records(const SweepFile& file) {
    require_complete_grid(file);

    BlockTable table;
    for (ReductionMethod method : file.grid.methods) {
        for (LinkageCriterion criterion : file.grid.criteria) {
            table.treatments.push_back(treatment_name(method, criterion));
        }
    }
    std::map<std::string, size_t> block_index;
    for (const auto& dataset : file.datasets) {
        for (double gamma : file.grid.gammas) {
            for (double theta : file.grid.thetas) {
                std::string block = dataset + "|g=" + fixed2(gamma) + "|t=" + fixed2(theta);
                block_index.emplace(block, table.blocks.size());
                table.blocks.push_back(block);
            }
        }
    }
    table.scores.assign(table.treatments.size(),
                        std::vector<double>(table.blocks.size(),
                                            std::numeric_limits<double>::quiet_NaN()));

    std::map<std::string, size_t> treatment_index;
    for (size_t t = 0; t < table.treatments.size(); ++t) {
        treatment_index.emplace(table.treatments[t], t);
    }
    for (const auto& record : file.records) {
        size_t t = treatment_index.at(treatment_name(record.method, record.criterion));
        std::string block =
            record.dataset + "|g=" + fixed2(record.gamma) + "|t=" + fixed2(record.theta);
        table.scores[t][block_index.at(block)] = record.ami;
    }
    return table;
}

ComparisonOutput compare_treatments(const SweepFile& file, double alpha) {
    BlockTable table = block_table_from_records(file);

    ComparisonOutput output;
    output.friedman = friedman(table);

    const int k = static_cast<int>(table.treatments.size());
    std::vector<double> pvalues;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            PairwiseComparison cmp;
            cmp.a = i;
            cmp.b = j;
            cmp.result = wilcoxon_pratt(table.scores[static_cast<size_t>(i)],
                                        table.scores[static_cast<size_t>(j)]);
            auto [a12, a21] = vargha_delaney(table.scores[static_cast<size_t>(i)],
                                             table.scores[static_cast<size_t>(j)]);
            cmp.result.a12 = a12;
            cmp.result.a21 = a21;
            output.pairwise.push_back(cmp);
            pvalues.push_back(cmp.result.p);
        }
    }
    std::vector<double> adjusted = holm(pvalues);
    for (size_t i = 0; i < output.pairwise.size(); ++i) {
        output.pairwise[i].result.adjusted_p = adjusted[i];
    }

    std::ostringstream cmp_csv;
    cmp_csv << "treatment_a,treatment_b,statistic,p,adjusted_p,a12,a21,significant\n";
    for (const auto& cmp : output.pairwise) {
        const TestResult& r = cmp.result;
        cmp_csv << table.treatments[static_cast<size_t>(cmp.a)] << ','
                << table.treatments[static_cast<size_t>(cmp.b)] << ','
                << compact(r.statistic) << ',' << compact(r.p) << ','
                << compact(r.adjusted_p) << ',' << compact(r.a12) << ',' << compact(r.a21)
                << ',' << (r.adjusted_p < alpha ? "true" : "false") << '\n';
    }
    output.comparison_csv = cmp_csv.str();

    std::vector<RankGroupRow> rows = rank_groups(table, output.pairwise, alpha);
    std::ostringstream groups;
    groups << "treatment,rank_sum,median_ami,mean_ami,group\n";
    for (const auto& row : rows) {
        groups << row.treatment << ',' << compact(row.rank_sum) << ','
               << compact(row.median_score) << ',' << compact(row.mean_score) << ','
               << row.group << '\n';
    }
    output.groups_csv = groups.str();
    return output;
}

std::vector<std::string> write_report_files(const SweepFile& file,
                                             const std::string& out_dir, double alpha) {
    require_complete_grid(file);
    fs::create_directories(out_dir);

    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        if (!out) throw Error("cannot write report file: " + name);
        out << content;
        written.push_back(name);
    };

    CellMeans means = mean_over_datasets(file, "ami");
    bool have_baseline =
        std::find(file.grid.methods.begin(), file.grid.methods.end(),
                  ReductionMethod::None) != file.grid.methods.end();
    for (ReductionMethod method : file.grid.methods) {
        for (LinkageCriterion criterion : file.grid.criteria) {
            std::string stem = to_string(method) + "_" + to_string(criterion);
            write("heatmap_ami_" + stem + ".csv",
                  render_heatmap(file, means, method, criterion, nullptr));
            if (have_baseline && method != ReductionMethod::None) {
                write("heatmap_diff_ami_" + stem + ".csv",
                      render_heatmap(file, means, method, criterion, &means));
            }
        }
    }
    write("boxplot_ami.csv", boxplot_csv(file));
    write("evar_summary.csv", evar_summary_csv(file));

    ComparisonOutput comparison = compare_treatments(file, alpha);
    write("rank_table.csv", comparison.groups_csv);
    return written;
}

}  // namespace logtriage
