#pragma once

#include <optional>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

namespace logtriage {

// One token-normalization rule. Patterns are ECMAScript regular expressions;
// the replacement may use $N capture references. Replacements must not be
// re-matchable by any rule in the set, so that applying the set twice is a
// no-op.
struct AbstractionRule {
    std::string name;
    std::string pattern;
    std::string replacement;
};

class RuleSet {
public:
    RuleSet() = default;
    explicit RuleSet(std::vector<AbstractionRule> rules);

    // Built-in rules: ISO/syslog timestamps, clock times, durations, UUIDs,
    // IPv4 addresses, hex ids, absolute file paths, decimal numbers — in that
    // order.
    static RuleSet defaults();

    // JSON array of {name, pattern, replacement}, applied in array order.
    static RuleSet from_json_file(const std::string& path);

    const std::vector<AbstractionRule>& rules() const { return rules_; }

    // Replace every match of every rule, in declared order. Lines matching
    // no rule come back unchanged.
    std::string abstract_line(const std::string& line) const;

private:
    std::vector<AbstractionRule> rules_;
    std::vector<std::regex> compiled_;
};

enum class Outcome { Pass, Fail };

// Accepts "pass" or "fail" only; throws std::invalid_argument otherwise.
Outcome parse_outcome(const std::string& text);
std::string to_string(Outcome outcome);

// Dense first-seen-order interning of abstracted event templates.
class EventDictionary {
public:
    int intern(const std::string& tmpl);
    std::optional<int> lookup(const std::string& tmpl) const;
    const std::string& template_of(int id) const;
    int size() const { return static_cast<int>(templates_.size()); }
    const std::vector<std::string>& templates() const { return templates_; }

private:
    std::vector<std::string> templates_;
    std::unordered_map<std::string, int> index_;
};

struct LogSequence {
    std::string log_id;
    std::vector<int> events;
    Outcome outcome = Outcome::Fail;
    std::string truth_label;  // empty when no ground truth is known
};

struct Dataset {
    std::string name;
    std::vector<LogSequence> sequences;
    EventDictionary dictionary;

    std::vector<const LogSequence*> failing() const;
    std::vector<const LogSequence*> passing() const;
};

struct DelineateConfig {
    // When set, a line starting with whitespace continues the previous
    // report (stack traces, wrapped messages).
    bool merge_indented_continuations = false;
};

// Split a raw log into event reports: one per non-blank line, with optional
// continuation handling. Throws EmptyLogError when nothing remains.
std::vector<std::string> delineate(const std::string& raw,
                                   const DelineateConfig& config = {});

// Load every log named by the manifest (CSV: log_id,path,outcome,truth_label;
// paths resolved relative to the manifest), abstract and intern its events,
// and assemble the Dataset. Event ids are assigned in first-seen order
// walking manifest rows top to bottom, so the result is deterministic.
Dataset encode(const std::string& manifest_path,
               const RuleSet& rules = RuleSet::defaults(),
               const DelineateConfig& config = {},
               std::string dataset_name = "");

}  // namespace logtriage
