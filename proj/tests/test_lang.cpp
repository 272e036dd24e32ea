#include <doctest.h>

#include "memoforge/lang.hpp"
#include "memoforge/lang_io.hpp"

using namespace memoforge;
using namespace memoforge::lang;

namespace {

// enumeration oracle: all sentences of length <= n over T symbols
std::vector<Sentence> all_sentences(int T, int n) {
    std::vector<Sentence> out;
    for (int k = 1; k <= n; ++k) {
        Sentence cur(static_cast<size_t>(k), 1);
        while (true) {
            out.push_back(cur);
            int i = k - 1;
            while (i >= 0 && cur[static_cast<size_t>(i)] == T) { cur[static_cast<size_t>(i)] = 1; --i; }
            if (i < 0) break;
            ++cur[static_cast<size_t>(i)];
        }
    }
    return out;
}

} // namespace

TEST_CASE("typ collects distinct symbols") {
    CHECK(typ({1, 2, 1}) == std::set<Symbol>{1, 2});
    CHECK(typ({1}) == std::set<Symbol>{1});
    CHECK(typ({3, 3, 3}) == std::set<Symbol>{3});
}

TEST_CASE("validate_language accepts consistent samples") {
    Alphabet a = Alphabet::generic(2);
    Language L = validate_language(a, {{{1}, 1}, {{1, 2}, 2}});
    CHECK(L.sample_count() == 2);
    CHECK(L.max_len() == 2);
}

TEST_CASE("validate_language rejects label conflicts and empties") {
    Alphabet a = Alphabet::generic(2);
    CHECK_THROWS_WITH_AS(validate_language(a, {{{1}, 1}, {{1}, 2}}),
                         doctest::Contains("InconsistentLabel"), Error);
    CHECK_THROWS_WITH_AS(validate_language(a, {}), doctest::Contains("EmptyLanguage"), Error);
    CHECK_THROWS_WITH_AS(validate_language(a, {{{1, 3}, 1}}), doctest::Contains("BadSymbolIndex"),
                         Error);
    CHECK_THROWS_WITH_AS(validate_language(a, {{{1}, 1}, {{1}, 1}}),
                         doctest::Contains("DuplicateSample"), Error);
}

TEST_CASE("lcp labels map length into (0,T]") {
    // len 2 with T=2 maps to label 2, len 3 back to 1
    CHECK(lcp_label(1, 2) == 1);
    CHECK(lcp_label(2, 2) == 2);
    CHECK(lcp_label(3, 2) == 1);
    CHECK(lcp_label(4, 4) == 4);
}

TEST_CASE("gen_lcp T=2 n=2 full variant") {
    Language L = gen_lcp(Alphabet::generic(2), 2, LcpVariant::All);
    REQUIRE(L.sample_count() == 6);
    auto label_of = [&](const Sentence& x) {
        for (const auto& s : L.samples)
            if (s.x == x) return s.y;
        FAIL("missing sentence");
        return 0;
    };
    CHECK(label_of({1}) == 1);
    CHECK(label_of({2}) == 1);
    CHECK(label_of({1, 2}) == 2);
    CHECK(label_of({1, 1}) == 2);
}

TEST_CASE("gen_lcp variants partition the full language") {
    for (int T : {2, 3})
        for (int n : {2, 3}) {
            Alphabet a = Alphabet::generic(T);
            Language all = gen_lcp(a, n, LcpVariant::All);
            Language eq1 = gen_lcp(a, n, LcpVariant::Eq1);
            Language gt1 = gen_lcp(a, n, LcpVariant::Gt1);
            CHECK(all.sample_count() == eq1.sample_count() + gt1.sample_count());
            // disjoint union, and every piece agrees with the oracle labels
            std::set<Sentence> seen;
            for (const auto& s : eq1.samples) seen.insert(s.x);
            for (const auto& s : gt1.samples) CHECK(!seen.count(s.x));
            for (const auto& s : all.samples)
                CHECK(s.y == lcp_label(static_cast<int>(s.x.size()), T));
            CHECK(all.sample_count() == static_cast<int>(all_sentences(T, n).size()));
        }
}

TEST_CASE("gen_lcp eq1 T=2 n=3 has exactly the six constant sentences") {
    Language L = gen_lcp(Alphabet::generic(2), 3, LcpVariant::Eq1);
    CHECK(L.sample_count() == 6);
    for (const auto& s : L.samples) CHECK(typ(s.x).size() == 1);
}

TEST_CASE("gen_lcp gt1 with n=1 is empty") {
    CHECK_THROWS_WITH_AS(gen_lcp(Alphabet::generic(2), 1, LcpVariant::Gt1),
                         doctest::Contains("EmptyLanguage"), Error);
}

TEST_CASE("gen_lcp refuses to enumerate past the sample budget") {
    CHECK_THROWS_WITH_AS(gen_lcp(Alphabet::generic(3), 20, LcpVariant::All, 1000),
                         doctest::Contains("Budget"), Error);
}

TEST_CASE("family S_i matches its definition") {
    Language S2 = gen_family_S(2);
    REQUIRE(S2.sample_count() == 2);
    CHECK(S2.samples[0].x == Sentence{1, 2, 1});
    CHECK(S2.samples[0].y == 1);
    CHECK(S2.samples[1].x == Sentence{1, 1});
    CHECK(S2.samples[1].y == 2);
    for (int i = 2; i <= 12; ++i) CHECK(gen_family_S(i).sample_count() == 2);
}

TEST_CASE("family S'_i matches its definition") {
    Language S = gen_family_Sprime(2);
    REQUIRE(S.sample_count() == 10);
    CHECK(S.samples[0].x == Sentence{1, 1});
    CHECK(S.samples[0].y == 2);
    for (int i = 2; i <= 10; ++i) CHECK(gen_family_Sprime(i).sample_count() == 10);
    // labels agree with the length rule over T=4
    for (const auto& s : S.samples) CHECK(s.y == lcp_label(static_cast<int>(s.x.size()), 4));
}

TEST_CASE("language json round trip") {
    Language L = gen_lcp(Alphabet::generic(2), 3, LcpVariant::All);
    std::string j = language_to_json(L);
    Language L2 = language_from_json(j);
    CHECK(L2.samples == L.samples);
    CHECK(L2.alphabet.symbols == L.alphabet.symbols);
    CHECK(language_to_json(L2) == j);
}
