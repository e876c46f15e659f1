#include "logtriage/synth.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "logtriage/errors.hpp"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;

namespace logtriage {

namespace {

// Letter-only identity code: digits would be eaten by abstraction.
std::string identity_code(int index) {
    std::string code(3, 'A');
    code[0] = static_cast<char>('A' + (index / 676) % 26);
    code[1] = static_cast<char>('A' + (index / 26) % 26);
    code[2] = static_cast<char>('A' + index % 26);
    return code;
}

int draw_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double draw_unit(std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::string draw_timestamp(std::mt19937_64& rng) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "2026-%02d-%02d %02d:%02d:%02d",
                  draw_int(rng, 1, 12), draw_int(rng, 1, 28), draw_int(rng, 0, 23),
                  draw_int(rng, 0, 59), draw_int(rng, 0, 59));
    return buf;
}

// Shared-vocabulary event: identity in the letter code, noise in the numbers.
std::string backbone_line(std::mt19937_64& rng, int event) {
    return draw_timestamp(rng) + " service step " + identity_code(event) +
           " completed in " + std::to_string(draw_int(rng, 1, 5000)) + " ms";
}

// Issue-signature event: hex payload varies per emission.
std::string signature_line(std::mt19937_64& rng, int vocab_size, int signature_index) {
    static const char hex_digits[] = "0123456789abcdef";
    std::string payload;
    for (int i = 0; i < 8; ++i) payload.push_back(hex_digits[draw_int(rng, 0, 15)]);
    return draw_timestamp(rng) + " module " + identity_code(vocab_size + signature_index) +
           " failed with code 0x" + payload;
}

}  // namespace

SynthSpec synth_spec_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("corpus spec not readable: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("corpus spec " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw SpecError("corpus spec " + path + ": expected a JSON object");

    SynthSpec spec;
    try {
        if (doc.contains("n_issues")) spec.n_issues = doc["n_issues"].get<int>();
        if (doc.contains("logs_per_issue")) {
            const auto& lpi = doc["logs_per_issue"];
            if (lpi.is_array()) {
                if (lpi.size() != 2) {
                    throw SpecError("logs_per_issue range must be [min,max]");
                }
                spec.logs_per_issue_min = lpi[0].get<int>();
                spec.logs_per_issue_max = lpi[1].get<int>();
            } else {
                spec.logs_per_issue_min = spec.logs_per_issue_max = lpi.get<int>();
            }
        }
        if (doc.contains("n_passing")) spec.n_passing = doc["n_passing"].get<int>();
        if (doc.contains("vocab_size")) spec.vocab_size = doc["vocab_size"].get<int>();
        if (doc.contains("noise_rate")) spec.noise_rate = doc["noise_rate"].get<double>();
        if (doc.contains("signature_length")) {
            spec.signature_length = doc["signature_length"].get<int>();
        }
        if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("corpus spec " + path + ": " + e.what());
    }
    validate(spec);
    return spec;
}

void validate(const SynthSpec& spec) {
    if (spec.n_issues < 1) throw SpecError("n_issues must be >= 1");
    if (spec.vocab_size < 1) throw SpecError("vocab_size must be >= 1");
    if (spec.signature_length < 1) throw SpecError("signature_length must be >= 1");
    if (spec.logs_per_issue_min < 1 || spec.logs_per_issue_min > spec.logs_per_issue_max) {
        throw SpecError("logs_per_issue range must satisfy 1 <= min <= max");
    }
    if (spec.n_passing < 0) throw SpecError("n_passing must be >= 0");
    if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0)) {
        throw SpecError("noise_rate must lie in [0,1)");
    }
    // 26^3 letter codes cover vocabulary plus all signatures
    if (spec.vocab_size + spec.n_issues * spec.signature_length > 17576) {
        throw SpecError("event universe too large for identity coding");
    }
}

std::string generate(const SynthSpec& spec, const std::string& out_dir) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);

    fs::create_directories(fs::path(out_dir) / "logs");

    struct PlannedLog {
        std::string log_id;
        std::string truth_label;
        bool failing = false;
        int issue = -1;
    };
    std::vector<PlannedLog> plan;
    for (int q = 0; q < spec.n_issues; ++q) {
        int count = draw_int(rng, spec.logs_per_issue_min, spec.logs_per_issue_max);
        for (int l = 0; l < count; ++l) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "fail_%02d_%03d", q, l);
            plan.push_back({buf, "issue_" + std::to_string(q), true, q});
        }
    }
    for (int l = 0; l < spec.n_passing; ++l) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "pass_%03d", l);
        plan.push_back({buf, "", false, -1});
    }

    std::ofstream manifest(fs::path(out_dir) / "manifest.csv", std::ios::binary);
    if (!manifest) throw Error("cannot write manifest under " + out_dir);
    manifest << "log_id,path,outcome,truth_label\n";

    for (const auto& planned : plan) {
        std::string rel = "logs/" + planned.log_id + ".log";
        std::ofstream log_file(fs::path(out_dir) / rel, std::ios::binary);
        if (!log_file) throw Error("cannot write " + rel + " under " + out_dir);

        // base sequence: full backbone, then the issue signature for failures
        std::vector<std::pair<bool, int>> base;  // {is_signature, index}
        for (int e = 0; e < spec.vocab_size; ++e) base.push_back({false, e});
        if (planned.failing) {
            for (int s = 0; s < spec.signature_length; ++s) {
                base.push_back({true, planned.issue * spec.signature_length + s});
            }
        }
        for (const auto& [is_signature, index] : base) {
            if (is_signature) {
                log_file << signature_line(rng, spec.vocab_size, index) << '\n';
            } else {
                log_file << backbone_line(rng, index) << '\n';
            }
            if (spec.noise_rate > 0.0 && draw_unit(rng) < spec.noise_rate) {
                log_file << backbone_line(rng, draw_int(rng, 0, spec.vocab_size - 1)) << '\n';
            }
        }
        manifest << planned.log_id << ',' << rel << ','
                 << (planned.failing ? "fail" : "pass") << ',' << planned.truth_label << '\n';
    }
    return (fs::path(out_dir) / "manifest.csv").string();
}

}  // namespace logtriage
