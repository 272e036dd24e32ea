#include "memoforge/posvalue.hpp"

#include <numeric>

namespace memoforge::num {

std::pair<int, int> n_count(const FlagSeq& s, int k) {
    if (k < 1 || k > static_cast<int>(s.size()))
        throw make_error("Range", "k=" + std::to_string(k) + " outside [1,|s|]");
    int na = 0;
    for (int i = 0; i < k; ++i) na += s[static_cast<size_t>(i)] ? 1 : 0;
    return {na, k - na};
}

// Computed from the gcd-reduced counts so that mathematically equal ratios
// produce bit-identical results regardless of the prefix they came from.
static BigReal qval_counts(int na, int nb, long alpha, const PrecisionConfig& cfg) {
    const long prec = cfg.mantissa_bits;
    if (na == 0) return BigReal::from_long(0, prec);
    if (nb == 0) return BigReal::from_long(1, prec);
    int g = std::gcd(na, nb);
    na /= g;
    nb /= g;
    BigReal e = BigReal::exp_of_long(alpha, prec);
    BigReal den = e * BigReal::from_long(nb, prec) + BigReal::from_long(na, prec);
    return BigReal::from_long(na, prec) / den;
}

BigReal qval(const FlagSeq& s, int k, long alpha, const PrecisionConfig& cfg) {
    if (alpha < 1) throw make_error("Range", "alpha must be >= 1");
    auto [na, nb] = n_count(s, k);
    return qval_counts(na, nb, alpha, cfg);
}

BigReal posvalue(const FlagSeq& s, int k, long alpha, const PrecisionConfig& cfg) {
    if (k < 1 || k > static_cast<int>(s.size()))
        throw make_error("Range", "k outside [1,|s|]");
    BigReal sum(cfg.mantissa_bits);
    int na = 0;
    for (int i = 1; i <= k; ++i) {
        na += s[static_cast<size_t>(i - 1)] ? 1 : 0;
        sum = sum + qval_counts(na, i - na, alpha, cfg);
    }
    return sum / BigReal::from_long(k, cfg.mantissa_bits);
}

std::vector<BigReal> posvalue_profile(const FlagSeq& s, long alpha, const PrecisionConfig& cfg) {
    std::vector<BigReal> out;
    out.reserve(s.size());
    BigReal sum(cfg.mantissa_bits);
    int na = 0;
    for (int k = 1; k <= static_cast<int>(s.size()); ++k) {
        na += s[static_cast<size_t>(k - 1)] ? 1 : 0;
        sum = sum + qval_counts(na, k - na, alpha, cfg);
        out.push_back(sum / BigReal::from_long(k, cfg.mantissa_bits));
    }
    return out;
}

int alpha_for(int L) {
    if (L < 1) throw make_error("Range", "L must be >= 1");
    if (L == 1) return 1; // e^10 >= 1
    const long prec = 256;
    // e^(10^a) >= L^(3L)  <=>  10^a >= 3L ln L
    BigReal target = BigReal::from_long(3L * L, prec) * BigReal::from_long(L, prec).log();
    int a = 1;
    while (BigReal::pow10(a, prec) < target) ++a;
    return a;
}

SeparationAudit separation_audit(int L, long alpha, const PrecisionConfig& cfg) {
    if (L < 1) throw make_error("Range", "L must be >= 1");
    const long prec = cfg.mantissa_bits;
    // precondition of the analytic floor: e^alpha >= L^(2L+2) + 1
    {
        BigReal ea = BigReal::exp_of_long(alpha, prec);
        BigReal lhs(prec);
        mpfr_ui_pow_ui(lhs.raw(), static_cast<unsigned long>(L), static_cast<unsigned long>(2 * L + 2),
                       MPFR_RNDN);
        lhs = lhs + BigReal::from_long(1, prec);
        if (ea < lhs)
            throw make_error("Precondition", "e^alpha < L^(2L+2)+1 for L=" + std::to_string(L));
    }

    std::vector<BigReal> finals;
    BigReal zero = BigReal::from_long(0, prec), one = BigReal::from_long(1, prec);
    for (int len = 1; len <= L; ++len) {
        for (unsigned bits = 0; bits < (1u << len); ++bits) {
            FlagSeq s(static_cast<size_t>(len));
            for (int i = 0; i < len; ++i) s[static_cast<size_t>(i)] = (bits >> i) & 1;
            BigReal v = posvalue(s, len, alpha, cfg);
            if (v.bit_equal(zero) || v.bit_equal(one)) continue;
            finals.push_back(std::move(v));
        }
    }

    SeparationAudit out{std::nullopt, BigReal(prec), false};
    {
        BigReal lpow(prec);
        mpfr_ui_pow_ui(lpow.raw(), static_cast<unsigned long>(L), static_cast<unsigned long>(2 * L + 4),
                       MPFR_RNDN);
        out.bound = BigReal::from_long(1, prec) / (BigReal::exp_of_long(2 * alpha * L, prec) * lpow);
    }
    for (size_t i = 0; i < finals.size(); ++i)
        for (size_t j = i + 1; j < finals.size(); ++j) {
            BigReal d = (finals[i] - finals[j]).abs();
            if (d.is_zero()) continue;
            if (!out.empirical_min || d < *out.empirical_min) out.empirical_min = d;
        }
    out.holds = !out.empirical_min || *out.empirical_min >= out.bound;
    return out;
}

} // namespace memoforge::num
