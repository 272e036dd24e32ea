#include <doctest.h>

#include "memoforge/posvalue.hpp"
#include "memoforge/rng.hpp"

using namespace memoforge;
using namespace memoforge::num;

namespace {

const PrecisionConfig cfg256{256};
const PrecisionConfig cfg512{512};

BigReal abs_diff(const BigReal& a, const BigReal& b) { return (a - b).abs(); }

BigReal pow2_neg(long e, long prec = 256) {
    BigReal r(prec);
    mpfr_set_ui_2exp(r.raw(), 1, -e, MPFR_RNDN);
    return r;
}

std::vector<FlagSeq> all_seqs(int len) {
    std::vector<FlagSeq> out;
    for (unsigned bits = 0; bits < (1u << len); ++bits) {
        FlagSeq s(static_cast<size_t>(len));
        for (int i = 0; i < len; ++i) s[static_cast<size_t>(i)] = (bits >> i) & 1;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

TEST_CASE("n_count counts flags in a prefix") {
    FlagSeq s{true, true, false, true, false};
    CHECK(n_count(s, 3) == std::pair<int, int>{2, 1});
    CHECK(n_count({false}, 1) == std::pair<int, int>{0, 1});
    auto [na, nb] = n_count(s, 5);
    CHECK(na + nb == 5);
    CHECK_THROWS_AS(n_count(s, 0), Error);
    CHECK_THROWS_AS(n_count(s, 6), Error);
}

TEST_CASE("qval endpoints and the e-formula") {
    CHECK(qval({true}, 1, 1, cfg256).bit_equal(BigReal::from_long(1, 256)));
    CHECK(qval({false, false}, 2, 1, cfg256).is_zero());
    // s=(a,b), k=2, alpha=1 -> 1/(e+1), checked against a direct evaluation
    BigReal e = BigReal::exp_of_long(1, 256);
    BigReal want = BigReal::from_long(1, 256) / (e + BigReal::from_long(1, 256));
    BigReal got = qval({true, false}, 2, 1, cfg256);
    CHECK(abs_diff(got, want) < pow2_neg(240));
    CHECK(got.to_decimal(6).substr(0, 7) == std::string("0.26894"));
}

TEST_CASE("posvalue is the running mean of qval") {
    CHECK(posvalue({true}, 1, 1, cfg256).bit_equal(BigReal::from_long(1, 256)));
    CHECK(posvalue({false}, 1, 1, cfg256).is_zero());
    BigReal e = BigReal::exp_of_long(1, 256);
    BigReal want = (BigReal::from_long(1, 256) +
                    BigReal::from_long(1, 256) / (e + BigReal::from_long(1, 256))) /
                   BigReal::from_long(2, 256);
    CHECK(abs_diff(posvalue({true, false}, 2, 1, cfg256), want) < pow2_neg(240));
    FlagSeq s{true, false, false, true};
    auto prof = posvalue_profile(s, 1, cfg256);
    for (int k = 1; k <= 4; ++k)
        CHECK(prof[static_cast<size_t>(k - 1)].bit_equal(posvalue(s, k, 1, cfg256)));
}

TEST_CASE("alpha_for: smallest a with e^(10^a) >= L^(3L)") {
    CHECK(alpha_for(1) == 1);
    CHECK(alpha_for(3) == 1); // e^10 ~ 22026 >= 3^9 = 19683
    CHECK(alpha_for(4) == 2); // e^10 < 4^12 ~ 1.68e7 <= e^100
    // cross-check against a direct high-precision evaluation of the logs
    for (int L = 2; L <= 8; ++L) {
        int a = alpha_for(L);
        BigReal lhs(512);
        mpfr_ui_pow_ui(lhs.raw(), 10, static_cast<unsigned long>(a), MPFR_RNDN);
        BigReal rhs = BigReal::from_long(3 * L, 512) * BigReal::from_long(L, 512).log();
        CHECK(lhs >= rhs);
        if (a > 1) {
            BigReal prev(512);
            mpfr_ui_pow_ui(prev.raw(), 10, static_cast<unsigned long>(a - 1), MPFR_RNDN);
            CHECK(prev < rhs);
        }
    }
}

TEST_CASE("separation audit matches the analytic floor") {
    // L=2, alpha'=10: bound = 1/(e^40 * 2^8)
    auto a2 = separation_audit(2, 10, cfg256);
    BigReal want2 = BigReal::from_long(1, 256) /
                    (BigReal::exp_of_long(40, 256) * BigReal::from_long(256, 256));
    CHECK(abs_diff(a2.bound, want2) < want2 * pow2_neg(200));
    REQUIRE(a2.empirical_min.has_value());
    CHECK(*a2.empirical_min >= a2.bound);
    CHECK(a2.holds);

    // L=3, alpha'=10: bound = e^-60 / 3^10
    auto a3 = separation_audit(3, 10, cfg512);
    BigReal want3 = BigReal::from_long(1, 512) /
                    (BigReal::exp_of_long(60, 512) * BigReal::from_long(59049, 512));
    CHECK(abs_diff(a3.bound, want3) < want3 * pow2_neg(400, 512));
    REQUIRE(a3.empirical_min.has_value());
    CHECK(*a3.empirical_min >= a3.bound);
    CHECK(a3.holds);

    // L=1: only values {0,1}; no empirical minimum
    auto a1 = separation_audit(1, 10, cfg256);
    CHECK(!a1.empirical_min.has_value());
    CHECK(a1.holds);

    // precondition e^alpha >= L^(2L+2)+1 enforced
    CHECK_THROWS_WITH_AS(separation_audit(4, 10, cfg256), doctest::Contains("Precondition"), Error);
}

TEST_CASE("cross-length distinctness of final position values (L <= 4, 512-bit)") {
    for (long alpha : {1L, 10L}) {
        std::vector<std::pair<int, BigReal>> finals;
        BigReal zero = BigReal::from_long(0, 512), one = BigReal::from_long(1, 512);
        for (int len = 1; len <= 4; ++len)
            for (const auto& s : all_seqs(len)) {
                BigReal v = posvalue(s, len, alpha, cfg512);
                if (v.bit_equal(zero) || v.bit_equal(one)) continue;
                finals.push_back({len, std::move(v)});
            }
        for (size_t i = 0; i < finals.size(); ++i)
            for (size_t j = i + 1; j < finals.size(); ++j) {
                if (finals[i].first == finals[j].first) continue;
                CHECK(!finals[i].second.bit_equal(finals[j].second));
                CHECK(abs_diff(finals[i].second, finals[j].second) > pow2_neg(400, 512));
            }
    }
}

TEST_CASE("equal-length equal-final-value implies equal counts of 0/1 prefix values") {
    BigReal zero = BigReal::from_long(0, 512), one = BigReal::from_long(1, 512);
    for (int len = 2; len <= 4; ++len) {
        auto seqs = all_seqs(len);
        std::vector<std::vector<BigReal>> profs;
        for (const auto& s : seqs) profs.push_back(posvalue_profile(s, 1, cfg512));
        for (size_t i = 0; i < seqs.size(); ++i)
            for (size_t j = i + 1; j < seqs.size(); ++j) {
                if (!profs[i].back().bit_equal(profs[j].back())) continue;
                int ones_i = 0, ones_j = 0, zeros_i = 0, zeros_j = 0;
                for (int k = 0; k < len; ++k) {
                    ones_i += profs[i][static_cast<size_t>(k)].bit_equal(one);
                    ones_j += profs[j][static_cast<size_t>(k)].bit_equal(one);
                    zeros_i += profs[i][static_cast<size_t>(k)].bit_equal(zero);
                    zeros_j += profs[j][static_cast<size_t>(k)].bit_equal(zero);
                }
                CHECK(ones_i == ones_j);
                CHECK(zeros_i == zeros_j);
            }
    }
}

TEST_CASE("same-length profiles are injective (L <= 4)") {
    for (int len = 2; len <= 4; ++len) {
        auto seqs = all_seqs(len);
        for (size_t i = 0; i < seqs.size(); ++i)
            for (size_t j = i + 1; j < seqs.size(); ++j) {
                auto pi = posvalue_profile(seqs[i], 1, cfg512);
                auto pj = posvalue_profile(seqs[j], 1, cfg512);
                bool differ = false;
                for (int k = 0; k < len && !differ; ++k)
                    differ = !pi[static_cast<size_t>(k)].bit_equal(pj[static_cast<size_t>(k)]);
                CHECK(differ);
            }
    }
}

TEST_CASE("round_to_fixed: nearest with ties away from zero") {
    BigReal x(256);
    mpfr_set_str(x.raw(), "0.123456", 10, MPFR_RNDN);
    CHECK(fixed_to_string(round_to_fixed(x, 3)) == "0.123");
    // exact tie: 0.5 is a binary-exact value; ties round away from zero
    BigReal half(256);
    mpfr_set_ui_2exp(half.raw(), 1, -1, MPFR_RNDN);
    CHECK(fixed_to_string(round_to_fixed(half, 0)) == "1");
    CHECK(fixed_to_string(round_to_fixed(half.neg(), 0)) == "-1");
    // the tie at the third digit: 0.0625 * 8 = 0.5 exactly after scaling by 10^1
    BigReal t(256);
    mpfr_set_ui_2exp(t.raw(), 5, -2, MPFR_RNDN); // 1.25
    CHECK(fixed_to_string(round_to_fixed(t, 1)) == "1.3"); // 12.5 -> 13 away from zero
    mpfr_set_str(x.raw(), "1001", 10, MPFR_RNDN);
    CHECK_THROWS_WITH_AS(round_to_fixed(x, 3), doctest::Contains("Saturation"), Error);
}

TEST_CASE("FixedDecimal reconstruction and round trips") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        int q = 1 + static_cast<int>(rng.below(6));
        std::int64_t cap = pow10_i64(2 * q);
        FixedDecimal f = make_fixed(rng.range(-cap, cap), q);
        FixedDecimal g = fixed_from_string(fixed_to_string(f), q);
        CHECK(f == g);
        BigReal v = BigReal::from_fixed(f, 256);
        CHECK(fixed_to_string(round_to_fixed(v, q)) == fixed_to_string(f));
    }
    CHECK_THROWS_WITH_AS(fixed_from_string("0.1234", 3), doctest::Contains("PrecisionViolation"),
                         Error);
    CHECK(fixed_to_string(fixed_from_string("-0.125", 3)) == "-0.125");
    CHECK(fixed_to_string(fixed_from_string("3", 3)) == "3.000");
    CHECK(fixed_to_string(fixed_from_string("0.2000", 3)) == "0.200");
}

TEST_CASE("BigReal determinism and hex round trip") {
    auto compute = [] {
        BigReal x = BigReal::exp_of_long(3, 256);
        return (x * x - BigReal::from_long(7, 256)).sqrt() / BigReal::from_long(3, 256);
    };
    CHECK(compute().bit_equal(compute()));
    BigReal v = compute();
    CHECK(BigReal::from_hex(v.to_hex(), 256).bit_equal(v));
    CHECK(BigReal::from_hex(BigReal(256).to_hex(), 256).is_zero());
}
