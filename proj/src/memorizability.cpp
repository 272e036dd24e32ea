#include "memoforge/memorizability.hpp"

#include <algorithm>
#include <set>

namespace memoforge::memo {

NoCotReport check_no_cot(const Language& S) {
    NoCotReport rep;
    const int T = S.sym_count();
    // per symbol, first constant sentence seen and its label
    std::vector<std::optional<std::pair<Sentence, Symbol>>> first(static_cast<size_t>(T + 1));
    for (const auto& s : S.samples) {
        auto t = lang::typ(s.x);
        if (t.size() != 1) continue;
        Symbol k = *t.begin();
        auto& slot = first[static_cast<size_t>(k)];
        if (!slot) {
            slot = {s.x, s.y};
        } else if (slot->second != s.y) {
            rep.violations.push_back({slot->first, s.x, slot->second, s.y});
        }
    }
    rep.holds = rep.violations.empty();
    return rep;
}

bool witness_is_valid(const Language& S, const Sentence& x, Symbol y, const Sentence& z) {
    const size_t n = x.size();
    if (z.size() < n + 1) return false;
    if (!std::equal(x.begin(), x.end(), z.begin())) return false; // (1) prefix
    if (z.back() != y) return false;                              // (1) ends in y
    std::set<Symbol> head(z.begin(), z.begin() + static_cast<long>(n + 1));
    if (head.size() <= 1) return false; // (2)
    for (const auto& s1 : S.samples) {  // (3)
        if (s1.x.size() <= n || s1.x.size() > z.size()) continue;
        if (std::equal(s1.x.begin(), s1.x.end(), z.begin()) && s1.y != y) return false;
    }
    return true;
}

WitnessEntry compute_cot_witnesses(const Language& S, size_t sample_index, const CheckOptions& opts) {
    const auto& sample = S.samples.at(sample_index);
    const int T = S.sym_count();
    const int L = S.max_len();
    const int n = static_cast<int>(sample.x.size());
    const int max_len = opts.max_witness_len.value_or(L + 2);

    WitnessEntry entry;
    entry.x = sample.x;
    entry.y = sample.y;
    if (max_len < n + 1) return entry;

    // enumeration budget: 1 candidate at length n+1, then T * T^middle per
    // longer length (first symbol choice times free middle positions)
    {
        long double total = 1, pw = 1;
        for (int len = n + 2; len <= max_len; ++len) {
            total += static_cast<long double>(T) * pw;
            pw *= T;
        }
        if (total > static_cast<long double>(opts.enumeration_budget))
            throw make_error("Budget", "witness enumeration exceeds budget");
    }

    for (Symbol g = 1; g <= T; ++g) {
        bool found = false;
        // length n+1: z = x || y, needs first CoT symbol = y
        if (g == sample.y) {
            Sentence z = sample.x;
            z.push_back(sample.y);
            if (witness_is_valid(S, sample.x, sample.y, z)) {
                entry.first_symbols.push_back(g);
                entry.witness_by_first[g] = std::move(z);
                found = true;
            }
        }
        // lengths n+2 .. max_len: z = x || g || middle || y, middle lex-ascending
        for (int len = n + 2; !found && len <= max_len; ++len) {
            int mid = len - n - 2;
            Sentence middle(static_cast<size_t>(mid), 1);
            while (true) {
                Sentence z = sample.x;
                z.push_back(g);
                z.insert(z.end(), middle.begin(), middle.end());
                z.push_back(sample.y);
                if (witness_is_valid(S, sample.x, sample.y, z)) {
                    entry.first_symbols.push_back(g);
                    entry.witness_by_first[g] = std::move(z);
                    found = true;
                    break;
                }
                int i = mid - 1;
                while (i >= 0 && middle[static_cast<size_t>(i)] == T) {
                    middle[static_cast<size_t>(i)] = 1;
                    --i;
                }
                if (i < 0) break;
                ++middle[static_cast<size_t>(i)];
            }
        }
    }
    return entry;
}

CotReport check_cot(const Language& S, const CheckOptions& opts) {
    CotReport rep;
    const int T = S.sym_count();

    rep.witnesses.entries.resize(S.samples.size());
    std::exception_ptr err = nullptr;
    #pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(S.samples.size()); ++i) {
        if (err) continue;
        try {
            rep.witnesses.entries[static_cast<size_t>(i)] =
                compute_cot_witnesses(S, static_cast<size_t>(i), opts);
        } catch (...) {
            #pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);

    // (1) every sample needs a nonempty witness set
    for (const auto& e : rep.witnesses.entries)
        if (e.first_symbols.empty()) rep.empty_sx.push_back(e.x);

    // (2) each constant-sentence class needs a common first symbol
    for (Symbol j = 1; j <= T; ++j) {
        std::optional<std::set<Symbol>> inter;
        bool class_nonempty = false;
        for (size_t i = 0; i < S.samples.size(); ++i) {
            auto t = lang::typ(S.samples[i].x);
            if (t.size() != 1 || *t.begin() != j) continue;
            class_nonempty = true;
            const auto& fs = rep.witnesses.entries[i].first_symbols;
            std::set<Symbol> cur(fs.begin(), fs.end());
            if (!inter) {
                inter = std::move(cur);
            } else {
                std::set<Symbol> keep;
                std::set_intersection(inter->begin(), inter->end(), cur.begin(), cur.end(),
                                      std::inserter(keep, keep.begin()));
                *inter = std::move(keep);
            }
        }
        if (!class_nonempty) continue;
        if (inter->empty()) rep.class_conflicts.push_back(j);
        else rep.class_common_first[j] = *inter->begin(); // smallest index tie-break
    }

    rep.holds = rep.empty_sx.empty() && rep.class_conflicts.empty();
    return rep;
}

CotSufficiency quick_cot_conditions(const Language& S) {
    CotSufficiency out;
    std::set<Symbol> lasts;
    for (const auto& s : S.samples) lasts.insert(s.x.back());
    out.last_symbol_proper_subset = static_cast<int>(lasts.size()) < S.sym_count();
    out.uniform_length = true;
    const size_t len0 = S.samples.front().x.size();
    for (const auto& s : S.samples)
        if (s.x.size() != len0) { out.uniform_length = false; break; }
    return out;
}

} // namespace memoforge::memo
