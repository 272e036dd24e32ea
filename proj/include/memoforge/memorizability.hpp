#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "memoforge/lang.hpp"

namespace memoforge::memo {

using lang::Language;
using lang::Sample;
using lang::Sentence;
using lang::Symbol;

// Verdict for the no-CoT memorizability condition: every pair of constant
// sentences over the same symbol must carry the same label.
struct NoCotReport {
    bool holds = false;
    struct Violation {
        Sentence x1, x2;
        Symbol y1 = 0, y2 = 0;
    };
    std::vector<Violation> violations; // holds <=> empty
};

// Admissible continuation witnesses for one sample: for each feasible first
// CoT symbol, one full witness sentence z (prefix x, ends in y, length
// <= max_len), found by exhaustive enumeration shortest-then-lex.
struct WitnessEntry {
    Sentence x;
    Symbol y = 0;
    std::vector<Symbol> first_symbols;          // sorted ascending
    std::map<Symbol, Sentence> witness_by_first; // one z per first symbol
};

struct CotWitnessSet {
    std::vector<WitnessEntry> entries; // one per sample, sample order
};

// Verdict for the CoT memorizability condition.
struct CotReport {
    bool holds = false;
    std::vector<Sentence> empty_sx;      // samples with no witness at all
    std::vector<Symbol> class_conflicts; // constant-sentence classes with empty intersection
    // smallest common first symbol per constant-sentence class (present when
    // the class intersection is nonempty)
    std::map<Symbol, Symbol> class_common_first;
    CotWitnessSet witnesses;
};

struct CotSufficiency {
    bool last_symbol_proper_subset = false;
    bool uniform_length = false;
};

struct CheckOptions {
    std::optional<int> max_witness_len;       // default L + 2
    std::uint64_t enumeration_budget = 4'000'000; // max candidate suffixes per sample
};

NoCotReport check_no_cot(const Language& S);

// Witness search for one sample. Conditions on a candidate z:
//   (1) z extends x and ends in y,
//   (2) the first len(x)+1 symbols of z use more than one distinct symbol,
//   (3) no longer dataset sentence that is a prefix of z carries a
//       different label.
// Throws Budget when the enumeration space exceeds the configured budget.
WitnessEntry compute_cot_witnesses(const Language& S, size_t sample_index,
                                   const CheckOptions& opts = {});

CotReport check_cot(const Language& S, const CheckOptions& opts = {});

// The two directly-checkable sufficient conditions for CoT memorizability.
CotSufficiency quick_cot_conditions(const Language& S);

// Re-verifies that z satisfies witness conditions (1)(2)(3) for (x,y).
bool witness_is_valid(const Language& S, const Sentence& x, Symbol y, const Sentence& z);

} // namespace memoforge::memo
