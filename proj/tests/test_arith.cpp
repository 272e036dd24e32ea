#include <doctest.h>

#include "memoforge/arith.hpp"

using namespace memoforge;
using namespace memoforge::arith;

namespace {

// independent oracle: a second recursive-descent evaluator, written against
// the grammar definition without reusing the library parser
int oracle_eval(const Sentence& x, size_t& pos, int p, int depth);

int oracle_factor(const Sentence& x, size_t& pos, int p, int depth) {
    REQUIRE(pos < x.size());
    Symbol s = x[pos];
    if (is_digit_sym(s, p)) {
        ++pos;
        return digit_value(s);
    }
    REQUIRE(s == sym_lp(p));
    ++pos;
    int v = oracle_eval(x, pos, p, depth + 1);
    REQUIRE(x[pos] == sym_rp(p));
    ++pos;
    return v;
}

int oracle_term(const Sentence& x, size_t& pos, int p, int depth) {
    long v = oracle_factor(x, pos, p, depth);
    while (pos < x.size() && (x[pos] == sym_times(p) || x[pos] == sym_div(p))) {
        Symbol op = x[pos++];
        long r = oracle_factor(x, pos, p, depth);
        if (op == sym_times(p)) v = (v * r) % p;
        else {
            REQUIRE(r % p != 0);
            long inv = 1;
            for (int i = 0; i < p - 2; ++i) inv = (inv * r) % p;
            v = (v * inv) % p;
        }
    }
    return static_cast<int>(v);
}

int oracle_eval(const Sentence& x, size_t& pos, int p, int depth) {
    long v = oracle_term(x, pos, p, depth);
    while (pos < x.size() && (x[pos] == sym_plus(p) || x[pos] == sym_minus(p))) {
        Symbol op = x[pos++];
        long r = oracle_term(x, pos, p, depth);
        v = op == sym_plus(p) ? (v + r) % p : ((v - r) % p + p) % p;
    }
    return static_cast<int>(v);
}

int oracle(const Sentence& x, int p) {
    size_t pos = 0;
    int v = oracle_eval(x, pos, p, 0);
    REQUIRE(pos == x.size());
    return v;
}

} // namespace

TEST_CASE("alphabet layout: digits then the seven operators") {
    Alphabet a = arith_alphabet(5);
    CHECK(a.size() == 12);
    CHECK(a.name(1) == "0");
    CHECK(a.name(5) == "4");
    CHECK(a.name(6) == "=");
    CHECK(a.name(12) == ")");
    CHECK_THROWS_AS(arith_alphabet(4), Error); // not prime
}

TEST_CASE("evaluator matches hand-computed examples") {
    CHECK(eval_expression(parse_compact("2*4", 5), 5) == 3);      // 8 mod 5
    CHECK(eval_expression(parse_compact("(1+1)/2", 5), 5) == 1);  // 2 * inv(2) = 2*3 = 6 = 1
    CHECK(eval_expression(parse_compact("3+(2-1)*5", 11), 11) == 8);
    CHECK_THROWS_WITH_AS(eval_expression(parse_compact("1/0", 5), 5),
                         doctest::Contains("DivisionByZero"), Error);
    CHECK_THROWS_WITH_AS(eval_expression(parse_compact("1+", 5), 5), doctest::Contains("Parse"),
                         Error);
}

TEST_CASE("gen_arith labels agree with the independent evaluator") {
    Language L = gen_arith({5, 5});
    CHECK(L.sym_count() == 12);
    CHECK(L.max_len() == 5);
    for (const auto& s : L.samples) {
        CHECK(s.y == digit_sym(oracle(s.x, 5)));
        // generated strings evaluate without division-by-zero
        CHECK_NOTHROW(eval_expression(s.x, 5));
    }
}

TEST_CASE("gen_arith excludes division by zero and honors the budget") {
    Language L = gen_arith({5, 3});
    for (const auto& s : L.samples) {
        for (size_t i = 0; i + 1 < s.x.size(); ++i)
            if (s.x[i] == sym_div(5)) CHECK(s.x[i + 1] != digit_sym(0));
    }
    Language sub = gen_arith({5, 4}, 12, 7);
    CHECK(sub.sample_count() == 12);
    CHECK(sub.subsample_seed == 7);
    // reproducible subsample
    Language sub2 = gen_arith({5, 4}, 12, 7);
    CHECK(sub.samples == sub2.samples);
    for (const auto& s : sub.samples) CHECK(s.y == digit_sym(oracle(s.x, 5)));
}

TEST_CASE("reduction chain reproduces the worked example") {
    // 3+(2-1)*5 -> 3+1*5 -> 3+5 -> 8 over Z_11
    auto chain = arith_cot_chain(parse_compact("3+(2-1)*5", 11), 11);
    REQUIRE(chain.size() == 3);
    CHECK(to_compact(chain[0], 11) == "3+1*5");
    CHECK(to_compact(chain[1], 11) == "3+5");
    CHECK(to_compact(chain[2], 11) == "8");
}

TEST_CASE("reduction chain edge cases") {
    auto single = arith_cot_chain(parse_compact("4", 5), 5);
    REQUIRE(single.size() == 1);
    CHECK(to_compact(single[0], 5) == "4");

    auto chain = arith_cot_chain(parse_compact("1+1+1", 5), 5);
    REQUIRE(chain.size() == 2);
    CHECK(to_compact(chain[0], 5) == "2+1");
    CHECK(to_compact(chain[1], 5) == "3");

    // parenthesized single digit unwraps as a step
    auto wrapped = arith_cot_chain(parse_compact("(2)", 5), 5);
    REQUIRE(wrapped.size() == 1);
    CHECK(to_compact(wrapped[0], 5) == "2");

    CHECK_THROWS_WITH_AS(arith_cot_chain(parse_compact("1/0", 5), 5),
                         doctest::Contains("DivisionByZero"), Error);
}

TEST_CASE("every chain step preserves the value and shrinks the sentence") {
    Language L = gen_arith({5, 5});
    int checked = 0;
    for (const auto& s : L.samples) {
        if (s.x.size() < 3) continue;
        auto chain = arith_cot_chain(s.x, 5);
        size_t prev_len = s.x.size();
        int want = oracle(s.x, 5);
        for (const auto& step : chain) {
            CHECK(step.size() < prev_len);
            prev_len = step.size();
            CHECK(oracle(step, 5) == want);
        }
        CHECK(chain.back().size() == 1);
        CHECK(chain.back()[0] == digit_sym(want));
        ++checked;
    }
    CHECK(checked > 2000);
}

TEST_CASE("compact parser round trips and rejects out-of-range digits") {
    Sentence x = parse_compact("3+(2-1)*5", 11);
    CHECK(to_compact(x, 11) == "3+(2-1)*5");
    CHECK_THROWS_AS(parse_compact("7", 5), Error);
    // maximal-run digits for p > 10
    Sentence y = parse_compact("10+1", 11);
    CHECK(y.size() == 3);
    CHECK(digit_value(y[0]) == 10);
}
