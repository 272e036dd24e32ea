#include "memoforge/bigreal.hpp"

#include <cstdio>
#include <cstring>

namespace memoforge {

BigReal BigReal::from_long(long x, long prec) {
    BigReal r(prec);
    mpfr_set_si(r.v_, x, MPFR_RNDN);
    return r;
}

BigReal BigReal::from_fixed(const FixedDecimal& f, long prec) {
    BigReal r(prec);
    mpfr_set_sj(r.v_, f.mantissa, MPFR_RNDN); // exact, |m| <= 10^18 < 2^63
    if (f.digits > 0) {
        mpfr_div_si(r.v_, r.v_, pow10_i64(f.digits), MPFR_RNDN);
    }
    return r;
}

BigReal BigReal::pow10(long e, long prec) {
    BigReal r(prec);
    mpfr_ui_pow_ui(r.v_, 10, static_cast<unsigned long>(e >= 0 ? e : -e), MPFR_RNDN);
    if (e < 0) mpfr_si_div(r.v_, 1, r.v_, MPFR_RNDN);
    return r;
}

BigReal BigReal::exp_of_long(long x, long prec) {
    BigReal r(prec);
    mpfr_set_si(r.v_, x, MPFR_RNDN);
    mpfr_exp(r.v_, r.v_, MPFR_RNDN);
    return r;
}

static long max_prec(const BigReal& a, const BigReal& b) {
    return a.prec() > b.prec() ? a.prec() : b.prec();
}

BigReal BigReal::add(const BigReal& o) const { BigReal r(max_prec(*this, o)); mpfr_add(r.raw(), v_, o.v_, MPFR_RNDN); return r; }
BigReal BigReal::sub(const BigReal& o) const { BigReal r(max_prec(*this, o)); mpfr_sub(r.raw(), v_, o.v_, MPFR_RNDN); return r; }
BigReal BigReal::mul(const BigReal& o) const { BigReal r(max_prec(*this, o)); mpfr_mul(r.raw(), v_, o.v_, MPFR_RNDN); return r; }
BigReal BigReal::div(const BigReal& o) const { BigReal r(max_prec(*this, o)); mpfr_div(r.raw(), v_, o.v_, MPFR_RNDN); return r; }
BigReal BigReal::neg() const { BigReal r(prec()); mpfr_neg(r.raw(), v_, MPFR_RNDN); return r; }
BigReal BigReal::abs() const { BigReal r(prec()); mpfr_abs(r.raw(), v_, MPFR_RNDN); return r; }
BigReal BigReal::exp() const { BigReal r(prec()); mpfr_exp(r.raw(), v_, MPFR_RNDN); return r; }
BigReal BigReal::log() const { BigReal r(prec()); mpfr_log(r.raw(), v_, MPFR_RNDN); return r; }
BigReal BigReal::sqrt() const { BigReal r(prec()); mpfr_sqrt(r.raw(), v_, MPFR_RNDN); return r; }

BigReal BigReal::relu() const {
    if (mpfr_sgn(v_) > 0) return *this;
    BigReal r(prec());
    mpfr_set_zero(r.raw(), 1);
    return r;
}

bool BigReal::bit_equal(const BigReal& o) const {
    if (mpfr_zero_p(v_) && mpfr_zero_p(o.v_)) return true;
    return mpfr_cmp(v_, o.v_) == 0;
}

std::string BigReal::to_hex() const {
    if (mpfr_zero_p(v_)) return "0";
    char* s = nullptr;
    // %Ra prints exact hexadecimal floating form (round-trips losslessly)
    if (mpfr_asprintf(&s, "%Ra", v_) < 0) throw make_error("Io", "mpfr_asprintf failed");
    std::string out(s);
    mpfr_free_str(s);
    return out;
}

BigReal BigReal::from_hex(const std::string& s, long prec) {
    BigReal r(prec);
    if (s == "0") { mpfr_set_zero(r.v_, 1); return r; }
    if (mpfr_set_str(r.v_, s.c_str(), 0, MPFR_RNDN) != 0)
        throw make_error("Parse", "bad BigReal literal '" + s + "'");
    return r;
}

std::string BigReal::to_decimal(int sig) const {
    char fmt[32];
    std::snprintf(fmt, sizeof fmt, "%%.%dRg", sig);
    char* s = nullptr;
    if (mpfr_asprintf(&s, fmt, v_) < 0) throw make_error("Io", "mpfr_asprintf failed");
    std::string out(s);
    mpfr_free_str(s);
    return out;
}

FixedDecimal round_to_fixed(const BigReal& x, int q) {
    long prec = x.prec() < 128 ? 128 : x.prec();
    mpfr_t t;
    mpfr_init2(t, prec + 64);
    mpfr_mul_si(t, x.raw(), pow10_i64(q), MPFR_RNDN);
    mpfr_round(t, t); // nearest, ties away from zero
    if (!mpfr_fits_intmax_p(t, MPFR_RNDN)) {
        mpfr_clear(t);
        throw make_error("Saturation", "value too large for q=" + std::to_string(q));
    }
    std::int64_t m = static_cast<std::int64_t>(mpfr_get_sj(t, MPFR_RNDN));
    mpfr_clear(t);
    std::int64_t cap = pow10_i64(2 * q);
    if (m > cap || m < -cap)
        throw make_error("Saturation", "|value| exceeds 10^" + std::to_string(q));
    return FixedDecimal{m, q};
}

} // namespace memoforge
