#include <doctest.h>

#include "memoforge/analysis.hpp"
#include "memoforge/arith.hpp"
#include "memoforge/synth.hpp"
#include "testutil.hpp"

using namespace memoforge;
using namespace memoforge::analysis;
using testutil::pow2_neg;

namespace {

const PrecisionConfig cfg{256};
const tx::EngineOpts eng{cfg, tx::Exec::Serial, 16};

} // namespace

TEST_CASE("param_count: worked examples and range errors") {
    CHECK(param_count(2, 1, 1, 3).dec == "44");  // 6 + 12 + 26
    CHECK(param_count(1, 1, 1, 1).dec == "12");  // 1 + 4 + 7
    CHECK_THROWS_AS(param_count(0, 1, 1, 1), Error);
    CHECK_THROWS_AS(param_count(1, 1, 1, 0), Error);
    // a big case stays exact
    CHECK(bigint_cmp(param_count(1000, 1000, 1000, 1000), param_count(999, 1000, 1000, 1000)) > 0);
}

TEST_CASE("counting bound: worked examples") {
    auto v = lower_bound_check(100, 3, 3, 5);
    CHECK(v.labelings.dec == "515377520732011331036461129765621272702107522001"); // 3^100
    CHECK(v.capacity.dec == "125000000000000000000000000000000");                 // 125 * 10^30
    CHECK(!v.sufficient_in_principle);
    CHECK(v.min_P_threshold == 7); // ceil(100 ln3 / 18)

    auto r = lower_bound_check(1, 3, 3, 1, true);
    CHECK(r.labelings.dec == "3");
    CHECK(r.capacity.dec == "1000000");
    CHECK(r.sufficient_in_principle);

    CHECK(lower_bound_check(1000, 3, 3, 1, true).min_P_threshold == 62);
    CHECK_THROWS_AS(lower_bound_check(2, 3, 3, 1), Error); // regime guard
}

TEST_CASE("counting bound threshold matches an independent evaluation on 20 triples") {
    // independent oracle: scan P upward comparing N ln T and 6qP at 768 bits
    auto oracle = [](long N, long T, long q) {
        BigReal lhs = BigReal::from_long(N, 768) * BigReal::from_long(T, 768).log();
        for (long P = 1;; ++P) {
            if (BigReal::from_long(6 * q * P, 768) >= lhs) return P;
        }
    };
    long Ns[] = {3, 10, 37, 100, 250, 500, 777, 1000, 1234, 2000,
                 3000, 4096, 5000, 6789, 8000, 9999, 12345, 20000, 50000, 100000};
    for (int i = 0; i < 20; ++i) {
        long N = Ns[i];
        long T = 3 + (i % 4);
        long q = 3 + (i % 3);
        auto v = lower_bound_check(N, T, q, 1);
        CHECK(v.min_P_threshold == oracle(N, T, q));
    }
}

TEST_CASE("convergence experiment matches the closed form of the averaging model") {
    auto m = testutil::averaging_model();
    std::vector<long> is{2, 8, 64, 1024};
    auto series = convergence_experiment(m, Family::S, is, eng);
    REQUIRE(series.distances.size() == 4);
    for (size_t k = 0; k < is.size(); ++k) {
        // d(i) = 1/(i+1): one symbol differs out of i+1 under the running mean
        BigReal want = BigReal::from_long(1, 256) / BigReal::from_long(is[k] + 1, 256);
        CHECK((series.distances[k] - want).abs() <= pow2_neg(100));
    }
    CHECK(series.distances[3] < series.distances[1] / BigReal::from_long(10, 256));
}

TEST_CASE("convergence experiment rejects misuse") {
    auto m = testutil::averaging_model();
    CHECK_THROWS_WITH_AS(convergence_experiment(m, Family::S, {8, 8}, eng),
                         doctest::Contains("Range"), Error);
    CHECK_THROWS_WITH_AS(convergence_experiment(m, Family::SPrime, {8, 16}, eng),
                         doctest::Contains("AlphabetMismatch"), Error);
}

TEST_CASE("bounded random models shrink the family gap between i=8 and i=1024") {
    // weights within +-0.5 keep the attention score range far below ln(1024),
    // where the dilution limit is empirically visible
    int shrunk = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto m = testutil::random_model(2, 2, 2, 2, 2, seed, /*mant_cap=*/50);
        auto series = convergence_experiment(m, Family::S, {8, 1024}, eng);
        if (series.distances[1] <= series.distances[0]) ++shrunk;
    }
    CHECK(shrunk >= 2);
}

TEST_CASE("repeated-addition confidence series on a synthesized model") {
    // a small functional slice of the p=5 arithmetic language containing the
    // first two repeated-addition prompts; sentences over one symbol are
    // unique here, so the plain synthesis applies
    using arith::digit_sym;
    const int p = 5;
    lang::Alphabet a = arith::arith_alphabet(p);
    auto expr = [&](const char* s) { return arith::parse_compact(s, p); };
    std::vector<lang::Sample> smp = {
        {expr("1"), digit_sym(1)},   {expr("1+1"), digit_sym(2)}, {expr("2+2"), digit_sym(4)},
        {expr("3*3"), digit_sym(4)}, {expr("4-1"), digit_sym(3)},
    };
    lang::Language S = lang::validate_language(a, smp);
    CHECK(memo::quick_cot_conditions(S).last_symbol_proper_subset);
    REQUIRE(memo::check_no_cot(S).holds);

    synth::SynthOptions opts;
    auto r = synth::synth_no_cot(S, opts);
    tx::EngineOpts e2{PrecisionConfig{r.plan.precision_bits}, tx::Exec::Serial, 16};
    auto pts = arith_confidence_experiment(r.model, p, 3, e2);
    REQUIRE(pts.size() == 3);
    // prompts inside the training set carry their labels with positive
    // confidence; i=1 is the single digit "1"
    CHECK(pts[0].i == 1);
    CHECK(pts[0].predicted == digit_sym(1));
    CHECK(pts[0].confidence.sign() > 0);
    CHECK(pts[1].predicted == digit_sym(2)); // "1+1"
    CHECK(pts[1].confidence.sign() > 0);
    CHECK(pts[1].dist_prev.sign() >= 0);
}

TEST_CASE("repeated-addition series eventually flattens for a bounded model") {
    auto m = testutil::random_model(12, 2, 2, 2, 2, 5);
    m.symbols = arith::arith_alphabet(5).symbols;
    auto pts = arith_confidence_experiment(m, 5, 24, eng);
    REQUIRE(pts.size() == 24);
    // consecutive logit distances decay: compare an early and a late window
    BigReal early = pts[2].dist_prev, late = pts[23].dist_prev;
    CHECK(late < early);
}

TEST_CASE("exhaustive micro search counts behaviors under the capacity bound") {
    // degenerate shape (width/depth/head 1, T=1): 12 parameters over a
    // two-value grid -> 4096 models, behaviors counted exactly
    std::vector<lang::Sentence> sentences{{1}, {1, 1}};
    tx::EngineOpts fast{PrecisionConfig{64}, tx::Exec::Serial, 4};
    auto r = exhaustive_micro_search(1, 1, {0, 10}, sentences, fast);
    CHECK(r.candidates == 4096);
    CHECK(r.distinct_behaviors >= 1);
    // at most 2^2 behaviors over two sentences with labels in {s1, stop},
    // and always at most the counting-argument capacity
    CHECK(r.distinct_behaviors <= 4);
    BigInt db{std::to_string(r.distinct_behaviors)};
    CHECK(bigint_cmp(db, r.capacity) < 0);

    // the cost guard refuses anything approaching a full q-digit grid
    std::vector<std::int64_t> grid;
    for (int i = -5; i <= 4; ++i) grid.push_back(i);
    CHECK_THROWS_WITH_AS(exhaustive_micro_search(1, 1, grid, sentences, fast),
                         doctest::Contains("Budget"), Error);
}

TEST_CASE("convergence series are bit-identical across reruns") {
    auto m = testutil::random_model(2, 2, 2, 2, 2, 31, 50);
    auto s1 = convergence_experiment(m, Family::S, {4, 16, 64}, eng);
    auto s2 = convergence_experiment(m, Family::S, {4, 16, 64}, eng);
    // and across execution policies
    tx::EngineOpts ser{cfg, tx::Exec::Serial, 16};
    auto s3 = convergence_experiment(m, Family::S, {4, 16, 64}, ser);
    for (size_t k = 0; k < s1.distances.size(); ++k) {
        CHECK(s1.distances[k].bit_equal(s2.distances[k]));
        CHECK(s1.distances[k].bit_equal(s3.distances[k]));
    }
}

TEST_CASE("the four-symbol family pair measures the same phenomenon") {
    auto m = testutil::random_model(4, 2, 2, 2, 2, 77, 50);
    auto s = convergence_experiment(m, Family::SPrime, {8, 512}, eng);
    REQUIRE(s.distances.size() == 2);
    CHECK(s.distances[1] <= s.distances[0]);
}

TEST_CASE("verify_memorization: zero model follows the tie rule; mismatches rejected") {
    lang::Language S = lang::gen_lcp(lang::Alphabet::generic(2), 2, lang::LcpVariant::All);
    auto zero = testutil::random_model(2, 2, 1, 1, 2, 1);
    for (auto& l : zero.layers) {
        l.w_res.nz.clear();
        for (auto& h : l.heads) { h.q.nz.clear(); h.k.nz.clear(); h.v.nz.clear(); }
        l.fnn.e1.nz.clear();
        l.fnn.e2.nz.clear();
        for (auto& b : l.fnn.b) b = fixed_from_int(0, 2);
    }
    for (auto& e : zero.embeddings)
        for (auto& w : e) w = fixed_from_int(0, 2);
    for (auto& r : zero.w_out)
        for (auto& w : r) w = fixed_from_int(0, 2);
    for (auto& b : zero.b_out) b = fixed_from_int(0, 2);
    auto rep = verify_memorization(zero, S, VerifyMode::NoCot, eng);
    // all logits zero -> tie rule predicts the first symbol
    int freq = 0;
    for (const auto& s : S.samples) freq += s.y == 1;
    CHECK(rep.correct == freq);
    CHECK(rep.accuracy == doctest::Approx(static_cast<double>(freq) / S.sample_count()));

    auto wrong = testutil::random_model(3, 2, 1, 1, 2, 2);
    CHECK_THROWS_WITH_AS(verify_memorization(wrong, S, VerifyMode::NoCot, eng),
                         doctest::Contains("AlphabetMismatch"), Error);
}

TEST_CASE("verify in CoT mode scores non-terminating runs as failures") {
    lang::Language S = lang::validate_language(lang::Alphabet::generic(2), {{{1}, 1}});
    // constant-logit model that always predicts symbol 1: never stops
    auto m = testutil::random_model(2, 2, 1, 1, 2, 3);
    for (auto& l : m.layers) {
        l.w_res.nz.clear();
        for (auto& h : l.heads) { h.q.nz.clear(); h.k.nz.clear(); h.v.nz.clear(); }
        l.fnn.e1.nz.clear();
        l.fnn.e2.nz.clear();
        for (auto& b : l.fnn.b) b = fixed_from_int(0, 2);
    }
    for (auto& e : m.embeddings)
        for (auto& w : e) w = fixed_from_int(0, 2);
    for (auto& r : m.w_out)
        for (auto& w : r) w = fixed_from_int(0, 2);
    m.b_out = {fixed_from_int(9, 2), fixed_from_int(0, 2), fixed_from_int(0, 2)};
    auto rep = verify_memorization(m, S, VerifyMode::Cot, eng);
    CHECK(rep.accuracy == 0.0);
    CHECK(!rep.results[0].ok);
}
