#include <doctest.h>

#include "memoforge/arith.hpp"
#include "memoforge/memorizability.hpp"
#include "memoforge/rng.hpp"

using namespace memoforge;
using namespace memoforge::lang;
using namespace memoforge::memo;

namespace {

Language lcp(int T, int n, LcpVariant v) { return gen_lcp(Alphabet::generic(T), n, v); }

// seeded random language over T symbols, sentences of length <= L
Language random_language(Rng& rng, int T, int L, int N, bool force_no_cot_condition) {
    while (true) {
        std::set<Sentence> xs;
        while (static_cast<int>(xs.size()) < N) {
            int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(L)));
            Sentence x;
            for (int i = 0; i < len; ++i) x.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T))));
            xs.insert(std::move(x));
            if (xs.size() > 64) break;
        }
        std::vector<Sample> samples;
        std::map<Symbol, Symbol> class_label; // constant-sentence class -> label
        for (const auto& x : xs) {
            Symbol y = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T)));
            auto t = typ(x);
            if (force_no_cot_condition && t.size() == 1) {
                auto it = class_label.find(*t.begin());
                if (it != class_label.end()) y = it->second;
                else class_label.emplace(*t.begin(), y);
            }
            samples.push_back({x, y});
        }
        try {
            return validate_language(Alphabet::generic(T), std::move(samples));
        } catch (const Error&) {
            continue;
        }
    }
}

} // namespace

TEST_CASE("no-CoT condition: the length-problem trichotomy anchors") {
    auto eq1 = check_no_cot(lcp(2, 3, LcpVariant::Eq1));
    CHECK(!eq1.holds);
    REQUIRE(!eq1.violations.empty());
    // a witness pair over one symbol with two labels, e.g. (a) and (a,a)
    const auto& v = eq1.violations.front();
    CHECK(typ(v.x1) == typ(v.x2));
    CHECK(typ(v.x1).size() == 1);
    CHECK(v.y1 != v.y2);

    CHECK(check_no_cot(lcp(2, 3, LcpVariant::Gt1)).holds);
    CHECK(!check_no_cot(lcp(2, 3, LcpVariant::All)).holds);

    // any single-sample language holds
    Language single = validate_language(Alphabet::generic(2), {{{1, 1}, 2}});
    CHECK(check_no_cot(single).holds);
}

TEST_CASE("witness search: constant-sentence sample of the eq1 language") {
    Language S = lcp(2, 3, LcpVariant::Eq1);
    size_t idx = 0;
    for (; idx < S.samples.size(); ++idx)
        if (S.samples[idx].x == Sentence{1}) break;
    REQUIRE(idx < S.samples.size());
    CHECK(S.samples[idx].y == 1);
    auto e = compute_cot_witnesses(S, idx);
    CHECK(e.first_symbols == std::vector<Symbol>{2});
    CHECK(e.witness_by_first.at(2) == Sentence{1, 2, 1});
}

TEST_CASE("witness search: short gt1 samples have empty witness sets") {
    Language S = lcp(2, 3, LcpVariant::Gt1);
    for (size_t i = 0; i < S.samples.size(); ++i) {
        if (S.samples[i].x.size() == 2) {
            auto e = compute_cot_witnesses(S, i);
            CHECK(e.first_symbols.empty());
        }
        if (S.samples[i].x.size() == 3) { // max length: witnesses always exist
            auto e = compute_cot_witnesses(S, i);
            CHECK(!e.first_symbols.empty());
        }
    }
}

TEST_CASE("emitted witnesses re-verify the three conditions verbatim") {
    for (auto variant : {LcpVariant::Eq1, LcpVariant::Gt1, LcpVariant::All}) {
        Language S = lcp(2, 3, variant);
        auto rep = check_cot(S);
        int L = S.max_len();
        for (const auto& e : rep.witnesses.entries) {
            for (const auto& [g, z] : e.witness_by_first) {
                CHECK(witness_is_valid(S, e.x, e.y, z));
                CHECK(static_cast<int>(z.size()) <= L + 2);
                CHECK(z[e.x.size()] == g);
            }
        }
    }
}

TEST_CASE("CoT condition: the trichotomy anchors") {
    auto eq1 = check_cot(lcp(2, 3, LcpVariant::Eq1));
    CHECK(eq1.holds);
    CHECK(eq1.class_common_first.at(1) == 2); // gamma1-class continues with gamma2
    CHECK(eq1.class_common_first.at(2) == 1);

    auto gt1 = check_cot(lcp(2, 3, LcpVariant::Gt1));
    CHECK(!gt1.holds);
    CHECK(!gt1.empty_sx.empty());

    auto full = check_cot(lcp(2, 3, LcpVariant::All));
    CHECK(!full.holds);
}

TEST_CASE("sufficient conditions evaluate directly") {
    Language arith = arith::gen_arith({5, 5});
    auto s = quick_cot_conditions(arith);
    CHECK(s.last_symbol_proper_subset); // operators cannot end an expression
    CHECK(!s.uniform_length);

    Language uniform = validate_language(Alphabet::generic(2), {{{1, 2}, 1}, {{2, 1}, 2}});
    CHECK(quick_cot_conditions(uniform).uniform_length);

    auto full = quick_cot_conditions(lcp(2, 3, LcpVariant::All));
    CHECK(!full.last_symbol_proper_subset);
    CHECK(!full.uniform_length);
}

TEST_CASE("either sufficient condition implies the CoT condition (random languages)") {
    Rng rng(21);
    int tested = 0;
    for (int round = 0; round < 60; ++round) {
        Language S = random_language(rng, 2 + static_cast<int>(rng.below(2)), 3, 2 + static_cast<int>(rng.below(5)), false);
        auto s = quick_cot_conditions(S);
        if (!s.last_symbol_proper_subset && !s.uniform_length) continue;
        CHECK(check_cot(S).holds);
        ++tested;
    }
    CHECK(tested >= 10);
}

TEST_CASE("uniform length implies the no-CoT condition (random languages)") {
    Rng rng(33);
    for (int round = 0; round < 20; ++round) {
        int T = 2 + static_cast<int>(rng.below(2));
        int len = 2 + static_cast<int>(rng.below(2));
        std::set<Sentence> xs;
        for (int i = 0; i < 5; ++i) {
            Sentence x;
            for (int k = 0; k < len; ++k) x.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T))));
            xs.insert(std::move(x));
        }
        std::vector<Sample> samples;
        for (const auto& x : xs) samples.push_back({x, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T)))});
        Language S = validate_language(Alphabet::generic(T), std::move(samples));
        CHECK(check_no_cot(S).holds); // constant sentences of one length are unique
    }
}

TEST_CASE("an unused symbol makes the CoT condition hold (random languages)") {
    Rng rng(55);
    for (int round = 0; round < 20; ++round) {
        // sentences over symbols {1,2} inside an alphabet of size 3
        Language S = [&] {
            std::set<Sentence> xs;
            int N = 2 + static_cast<int>(rng.below(4));
            while (static_cast<int>(xs.size()) < N) {
                int len = 1 + static_cast<int>(rng.below(3));
                Sentence x;
                for (int i = 0; i < len; ++i) x.push_back(1 + static_cast<int>(rng.below(2)));
                xs.insert(std::move(x));
            }
            std::vector<Sample> samples;
            std::map<Symbol, Symbol> class_label;
            for (const auto& x : xs) {
                Symbol y = 1 + static_cast<int>(rng.below(3));
                samples.push_back({x, y});
            }
            return validate_language(Alphabet::generic(3), std::move(samples));
        }();
        CHECK(check_cot(S).holds);
    }
}

TEST_CASE("reports are deterministic across runs") {
    Language S = lcp(2, 3, LcpVariant::All);
    auto r1 = check_cot(S);
    auto r2 = check_cot(S);
    CHECK(r1.holds == r2.holds);
    CHECK(r1.empty_sx == r2.empty_sx);
    CHECK(r1.class_conflicts == r2.class_conflicts);
    REQUIRE(r1.witnesses.entries.size() == r2.witnesses.entries.size());
    for (size_t i = 0; i < r1.witnesses.entries.size(); ++i) {
        CHECK(r1.witnesses.entries[i].first_symbols == r2.witnesses.entries[i].first_symbols);
        CHECK(r1.witnesses.entries[i].witness_by_first == r2.witnesses.entries[i].witness_by_first);
    }
}

TEST_CASE("enumeration budget guard is an explicit error") {
    Language S = lcp(3, 4, LcpVariant::All);
    CheckOptions opts;
    opts.enumeration_budget = 4;
    CHECK_THROWS_WITH_AS(compute_cot_witnesses(S, 0, opts), doctest::Contains("Budget"), Error);
}
