#include "logtriage/ingest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "logtriage/csv.hpp"
#include "logtriage/errors.hpp"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;

namespace logtriage {

RuleSet::RuleSet(std::vector<AbstractionRule> rules) : rules_(std::move(rules)) {
    compiled_.reserve(rules_.size());
    for (const auto& rule : rules_) {
        try {
            compiled_.emplace_back(rule.pattern,
                                   std::regex::ECMAScript | std::regex::optimize);
        } catch (const std::regex_error& e) {
            throw Error("abstraction rule '" + rule.name + "': bad pattern: " + e.what());
        }
    }
}

RuleSet RuleSet::defaults() {
    // Order matters: composite tokens (timestamps, addresses) must be
    // consumed before the bare-number rule sees their digits.
    return RuleSet({
        {"iso_timestamp",
         R"(\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}(?:[.,]\d+)?(?:Z|[+-]\d{2}:?\d{2})?)",
         "<TIMESTAMP>"},
        {"syslog_timestamp",
         R"((?:Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec) {1,2}\d{1,2} \d{2}:\d{2}:\d{2})",
         "<TIMESTAMP>"},
        {"clock_time", R"(\b\d{1,2}:\d{2}:\d{2}(?:[.,]\d+)?\b)", "<TIME>"},
        {"duration",
         R"(\b\d+(?:\.\d+)? ?(?:ms|us|ns|s|sec|secs|seconds|min|mins|minutes|h|hr|hrs|hours)\b)",
         "<DURATION>"},
        {"uuid",
         R"(\b[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}\b)",
         "<UUID>"},
        {"ip", R"(\b\d{1,3}(?:\.\d{1,3}){3}\b)", "<IP>"},
        // 0x-prefixed, or a bare run of 8+ hex chars holding at least one
        // digit and one letter (so words and plain numbers stay untouched).
        {"hex_id",
         R"(\b0[xX][0-9a-fA-F]+\b|\b(?=[0-9a-fA-F]{8,}\b)(?=[0-9]*[a-fA-F])(?=[a-fA-F]*[0-9])[0-9a-fA-F]+\b)",
         "<HEX>"},
        // Absolute paths with at least two segments; the leading context
        // character is kept via $1.
        {"path", R"((^|[\s"'=(\[])((?:/[A-Za-z0-9._+-]+){2,}/?))", "$1<PATH>"},
        {"number", R"(\b\d+(?:\.\d+)?\b)", "<NUM>"},
    });
}

RuleSet RuleSet::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("rules file not readable: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error("rules file " + path + ": " + e.what());
    }
    if (!doc.is_array()) throw Error("rules file " + path + ": expected a JSON array");
    std::vector<AbstractionRule> rules;
    for (const auto& entry : doc) {
        if (!entry.is_object() || !entry.contains("name") || !entry.contains("pattern") ||
            !entry.contains("replacement")) {
            throw Error("rules file " + path +
                        ": each entry needs name, pattern, replacement");
        }
        rules.push_back({entry["name"].get<std::string>(),
                         entry["pattern"].get<std::string>(),
                         entry["replacement"].get<std::string>()});
    }
    return RuleSet(std::move(rules));
}

std::string RuleSet::abstract_line(const std::string& line) const {
    std::string out = line;
    for (size_t i = 0; i < compiled_.size(); ++i) {
        out = std::regex_replace(out, compiled_[i], rules_[i].replacement);
    }
    return out;
}

Outcome parse_outcome(const std::string& text) {
    if (text == "pass") return Outcome::Pass;
    if (text == "fail") return Outcome::Fail;
    throw std::invalid_argument("outcome must be 'pass' or 'fail', got '" + text + "'");
}

std::string to_string(Outcome outcome) {
    return outcome == Outcome::Pass ? "pass" : "fail";
}

int EventDictionary::intern(const std::string& tmpl) {
    auto it = index_.find(tmpl);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(templates_.size());
    templates_.push_back(tmpl);
    index_.emplace(tmpl, id);
    return id;
}

std::optional<int> EventDictionary::lookup(const std::string& tmpl) const {
    auto it = index_.find(tmpl);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& EventDictionary::template_of(int id) const {
    if (id < 0 || id >= size()) throw Error("event id out of range: " + std::to_string(id));
    return templates_[static_cast<size_t>(id)];
}

std::vector<const LogSequence*> Dataset::failing() const {
    std::vector<const LogSequence*> out;
    for (const auto& s : sequences)
        if (s.outcome == Outcome::Fail) out.push_back(&s);
    return out;
}

std::vector<const LogSequence*> Dataset::passing() const {
    std::vector<const LogSequence*> out;
    for (const auto& s : sequences)
        if (s.outcome == Outcome::Pass) out.push_back(&s);
    return out;
}

namespace {

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

std::vector<std::string> delineate(const std::string& raw, const DelineateConfig& config) {
    std::vector<std::string> reports;
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        bool continuation = config.merge_indented_continuations && !reports.empty() &&
                            (line.front() == ' ' || line.front() == '\t');
        if (continuation) {
            reports.back().push_back('\n');
            reports.back() += line;
        } else {
            reports.push_back(line);
        }
    }
    if (reports.empty()) throw EmptyLogError("log contains no non-blank content");
    return reports;
}

Dataset encode(const std::string& manifest_path, const RuleSet& rules,
               const DelineateConfig& config, std::string dataset_name) {
    std::ifstream manifest(manifest_path);
    if (!manifest) throw MissingFileError("manifest not readable: " + manifest_path);

    const fs::path base = fs::path(manifest_path).parent_path();
    if (dataset_name.empty()) {
        fs::path p(manifest_path);
        dataset_name = (p.stem() == "manifest" && p.has_parent_path())
                           ? p.parent_path().filename().string()
                           : p.stem().string();
        if (dataset_name.empty()) dataset_name = p.stem().string();
    }

    std::string line;
    if (!std::getline(manifest, line)) {
        throw MalformedManifestRowError("manifest is empty: " + manifest_path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "log_id,path,outcome,truth_label") {
        throw MalformedManifestRowError("manifest header must be "
                                        "'log_id,path,outcome,truth_label', got '" +
                                        line + "'");
    }

    Dataset dataset;
    dataset.name = std::move(dataset_name);
    std::unordered_map<std::string, bool> seen_ids;

    size_t row_no = 1;
    while (std::getline(manifest, line)) {
        ++row_no;
        if (is_blank(line)) continue;
        std::vector<std::string> fields;
        try {
            fields = csv::split_line(line);
        } catch (const std::invalid_argument& e) {
            throw MalformedManifestRowError("manifest row " + std::to_string(row_no) +
                                            ": " + e.what());
        }
        if (fields.size() != 4) {
            throw MalformedManifestRowError("manifest row " + std::to_string(row_no) +
                                            ": expected 4 fields, got " +
                                            std::to_string(fields.size()));
        }
        LogSequence seq;
        seq.log_id = fields[0];
        if (seq.log_id.empty()) {
            throw MalformedManifestRowError("manifest row " + std::to_string(row_no) +
                                            ": empty log_id");
        }
        if (seen_ids.count(seq.log_id)) {
            throw MalformedManifestRowError("manifest row " + std::to_string(row_no) +
                                            ": duplicate log_id '" + seq.log_id + "'");
        }
        seen_ids.emplace(seq.log_id, true);
        try {
            seq.outcome = parse_outcome(fields[2]);
        } catch (const std::invalid_argument& e) {
            throw MalformedManifestRowError("manifest row " + std::to_string(row_no) +
                                            ": " + e.what());
        }
        seq.truth_label = fields[3];

        fs::path log_path(fields[1]);
        if (log_path.is_relative()) log_path = base / log_path;
        std::ifstream log_file(log_path, std::ios::binary);
        if (!log_file) {
            throw MissingFileError("manifest row " + std::to_string(row_no) +
                                   ": cannot read '" + log_path.string() + "'");
        }
        std::ostringstream content;
        content << log_file.rdbuf();

        std::vector<std::string> reports;
        try {
            reports = delineate(content.str(), config);
        } catch (const EmptyLogError&) {
            throw EmptyLogError("log '" + seq.log_id + "' (" + log_path.string() +
                                ") contains no non-blank content");
        }
        seq.events.reserve(reports.size());
        for (const auto& report : reports) {
            seq.events.push_back(dataset.dictionary.intern(rules.abstract_line(report)));
        }
        dataset.sequences.push_back(std::move(seq));
    }
    return dataset;
}

}  // namespace logtriage
