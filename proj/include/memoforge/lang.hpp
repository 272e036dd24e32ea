#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "memoforge/errors.hpp"

namespace memoforge::lang {

// Symbol indices are 1-based into an Alphabet; 0 is the reserved stop
// outcome and never appears inside a sentence or as a language label.
using Symbol = int;
constexpr Symbol kStop = 0;

struct Alphabet {
    std::vector<std::string> symbols; // order defines indices 1..T

    int size() const { return static_cast<int>(symbols.size()); }
    const std::string& name(Symbol s) const;
    Symbol index_of(const std::string& name) const; // throws BadSymbolIndex

    static Alphabet generic(int T); // a, b, c, ... (a1, a2, ... beyond 26)
};

using Sentence = std::vector<Symbol>;

struct Sample {
    Sentence x;
    Symbol y = 0;
    bool operator==(const Sample&) const = default;
};

struct Language {
    Alphabet alphabet;
    std::vector<Sample> samples;
    std::optional<std::uint64_t> subsample_seed; // set when a generator downsampled

    int sym_count() const { return alphabet.size(); }
    int sample_count() const { return static_cast<int>(samples.size()); }
    int max_len() const;
};

// Distinct-symbol set of a sentence.
std::set<Symbol> typ(const Sentence& x);

std::string sentence_to_string(const Alphabet& a, const Sentence& x, const std::string& sep = " ");

// Length-then-lexicographic order, the canonical order used everywhere a
// deterministic tie-break is needed.
bool sentence_less(const Sentence& a, const Sentence& b);

// Builds a Language after checking: nonempty, indices in range, labels in
// [1,T] (or kStop when allow_stop_labels), no duplicate pairs, functional
// consistency. Throws EmptyLanguage / BadSymbolIndex / DuplicateSample /
// InconsistentLabel.
Language validate_language(const Alphabet& alphabet, std::vector<Sample> samples,
                           bool allow_stop_labels = false);

enum class LcpVariant { All, Eq1, Gt1 };

// label index t(x) = ((len-1) mod T) + 1, i.e. len mod T mapped into (0,T].
Symbol lcp_label(int len, int T);

// All sentences of length <= n under the variant filter, labeled by length.
// Throws Budget when sum of T^k exceeds sample_budget, EmptyLanguage when
// the variant filter leaves nothing.
Language gen_lcp(const Alphabet& alphabet, int n, LcpVariant variant,
                 std::uint64_t sample_budget = 1'000'000);

// Two-sample family over {a,b}: x1 has length i+1 with symbol 2 at position
// i, x2 = a^i; labels by length.
Language gen_family_S(int i);
// Ten-sample family over four symbols, labels by length.
Language gen_family_Sprime(int i);

} // namespace memoforge::lang
