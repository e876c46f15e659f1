#pragma once

#include <cstdint>
#include <string>

namespace logtriage {

// Recipe for a labelled corpus with planted failure causes. Every log shares
// a fixed backbone of vocab_size events; each failing log additionally
// carries its issue's signature events (pairwise disjoint, disjoint from the
// backbone), and noise sprinkles extra backbone events between positions.
struct SynthSpec {
    int n_issues = 1;
    int logs_per_issue_min = 1;
    int logs_per_issue_max = 1;
    int n_passing = 0;
    int vocab_size = 1;
    double noise_rate = 0.0;  // insertion probability per position, in [0,1)
    int signature_length = 1;
    std::uint64_t seed = 0;
};

// JSON object with the field names above; logs_per_issue accepts either a
// number or a [min,max] pair.
SynthSpec synth_spec_from_json_file(const std::string& path);

// SpecError on inconsistent field combinations.
void validate(const SynthSpec& spec);

// Write logs/<id>.log files plus manifest.csv under out_dir; returns the
// manifest path. Same spec and seed produce a byte-identical tree. Log lines
// carry synthetic timestamps and numbers so template abstraction has real
// work to do.
std::string generate(const SynthSpec& spec, const std::string& out_dir);

}  // namespace logtriage
