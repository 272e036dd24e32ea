#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memoforge/fnn.hpp"
#include "memoforge/lang.hpp"
#include "memoforge/lift.hpp"
#include "memoforge/memorizability.hpp"
#include "memoforge/txmodel.hpp"

namespace memoforge::synth {

using lang::Language;
using lang::Sentence;
using lang::Symbol;

struct SynthOptions {
    int q = 3;
    PrecisionConfig cfg{256};
    std::uint64_t seed = 1;
    int max_escalations = 4;
    tx::Exec exec = tx::Exec::Serial;
    memo::CheckOptions check; // witness search options for CoT builds
};

// Everything the builder measured and chose; enough to audit the model
// against the closed-form feature definitions.
struct SynthesisPlan {
    int alpha = 1;              // position scale exponent (the scale is 10^alpha)
    long precision_bits = 256;  // final working precision after escalations
    int escalations = 0;
    std::vector<Symbol> active_symbols; // symbols occurring in the data, ascending

    int feature_layer = -1;        // model layer whose rows hold the feature state
    int feature_width = 0;         // 2*|active| + posenc bits
    std::vector<std::vector<BigReal>> feature_table; // one row per classifier point
    std::vector<int> feature_labels;                 // 1..T, T+1 = stop
    std::vector<Sentence> feature_reps;              // representative sentence per row
    BigReal separation; // min pairwise inf-norm gap of the table
    BigReal range;      // max |coordinate|

    long f1_points = 0;
    long f1_ratio = 0; // geometric ratio of the f1 targets
    long f1_scale = 0; // decimal down-scale applied after averaging

    std::uint64_t projector_seed = 0;
    int projector_retries = 0;
    long projector_digits = 0;
    std::vector<std::string> projector_entries; // exact decimal strings
    BigReal projected_gap;

    long classifier_points = 0;
    long long parameter_slots = 0;

    // CoT builds only
    std::vector<Sentence> witnesses;        // chosen continuation per sample
    std::optional<Language> prefix_language; // the augmented language (stop labels)
};

struct SynthResult {
    tx::TransformerModel model;
    SynthesisPlan plan;
};

// Unit-ish projection vector: seeded hypersphere sampling, rounded to a
// decimal grid fine enough to keep the projected pairwise gap above
// c / (8 N^2 n), retrying with fresh samples as needed.
struct Projector {
    std::vector<std::string> entries; // exact decimals, frac_digits places
    long frac_digits = 0;
    BigReal achieved_gap;
    int retries = 0;
};
Projector build_projector(const std::vector<std::vector<BigReal>>& points, std::uint64_t seed,
                          int q, const PrecisionConfig& cfg);

// No-CoT synthesis; requires the no-CoT memorizability condition.
SynthResult synth_no_cot(const Language& S, const SynthOptions& opts);

// Position-encoding variant: memorizes any finite language; inference is
// limited to max_positions = L.
SynthResult synth_no_cot_posenc(const Language& S, const SynthOptions& opts);

struct AugmentedLanguage {
    std::vector<Sentence> witnesses; // per sample, sample order
    Language prefix_language;        // labels may be the stop outcome (0)
};

// Chosen witness set plus the pruned prefix language whose plain memorizer
// acts as a CoT memorizer of S. Requires the CoT memorizability condition.
AugmentedLanguage build_augmented_language(const Language& S, const memo::CheckOptions& check = {});

// CoT synthesis: builds the augmented language and memorizes it.
SynthResult synth_cot(const Language& S, const SynthOptions& opts);

// Next-symbol lookup chain through the augmented language, the reference
// for trace replay: starting from x, repeatedly append the stored label.
std::vector<Symbol> replay_chain(const Language& prefix_language, const Sentence& x, int max_steps);

} // namespace memoforge::synth
