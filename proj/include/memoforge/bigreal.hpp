#pragma once

#include <cstdint>
#include <stdint.h>
#define MPFR_USE_INTMAX_T 1
#include <mpfr.h>
#include <string>
#include <utility>
#include <vector>

#include "memoforge/errors.hpp"
#include "memoforge/fixed_decimal.hpp"

namespace memoforge {

// Working-precision configuration for activations. Parameters stay exact
// q-digit decimals; everything computed from them lives in BigReal.
struct PrecisionConfig {
    long mantissa_bits = 256; // >= 64
    bool valid() const { return mantissa_bits >= 64; }
};

// Arbitrary-precision binary float (MPFR), one rounding per primitive op,
// round-to-nearest-even. Value semantics; precision is fixed per object and
// binary operations produce max(precision of operands).
class BigReal {
public:
    BigReal() { mpfr_init2(v_, 64); mpfr_set_zero(v_, 1); }
    explicit BigReal(long prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    BigReal(const BigReal& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    BigReal(BigReal&& o) noexcept { mpfr_init2(v_, 64); mpfr_swap(v_, o.v_); }
    BigReal& operator=(const BigReal& o) {
        if (this != &o) { mpfr_set_prec(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
        return *this;
    }
    BigReal& operator=(BigReal&& o) noexcept { mpfr_swap(v_, o.v_); return *this; }
    ~BigReal() { mpfr_clear(v_); }

    static BigReal from_long(long x, long prec);
    static BigReal from_fixed(const FixedDecimal& f, long prec); // set(m) then one rounded / 10^q
    static BigReal pow10(long e, long prec);                     // exact when representable
    static BigReal exp_of_long(long x, long prec);               // e^x at working precision

    long prec() const { return mpfr_get_prec(v_); }
    mpfr_srcptr raw() const { return v_; }
    mpfr_ptr raw() { return v_; }

    BigReal add(const BigReal& o) const;
    BigReal sub(const BigReal& o) const;
    BigReal mul(const BigReal& o) const;
    BigReal div(const BigReal& o) const;
    BigReal neg() const;
    BigReal abs() const;
    BigReal exp() const;
    BigReal log() const;
    BigReal sqrt() const;
    BigReal relu() const; // max(x, 0)

    int cmp(const BigReal& o) const { return mpfr_cmp(v_, o.v_); }
    int sign() const { return mpfr_sgn(v_); }
    bool is_zero() const { return mpfr_zero_p(v_); }
    bool bit_equal(const BigReal& o) const; // same value, compared exactly

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    // Exact round trip: hexadecimal significand/exponent form.
    std::string to_hex() const;
    static BigReal from_hex(const std::string& s, long prec);
    // Human-readable, correctly rounded to `sig` significant decimal digits.
    std::string to_decimal(int sig = 40) const;

private:
    mpfr_t v_;
};

inline BigReal operator+(const BigReal& a, const BigReal& b) { return a.add(b); }
inline BigReal operator-(const BigReal& a, const BigReal& b) { return a.sub(b); }
inline BigReal operator*(const BigReal& a, const BigReal& b) { return a.mul(b); }
inline BigReal operator/(const BigReal& a, const BigReal& b) { return a.div(b); }
inline bool operator<(const BigReal& a, const BigReal& b) { return a.cmp(b) < 0; }
inline bool operator>(const BigReal& a, const BigReal& b) { return a.cmp(b) > 0; }
inline bool operator<=(const BigReal& a, const BigReal& b) { return a.cmp(b) <= 0; }
inline bool operator>=(const BigReal& a, const BigReal& b) { return a.cmp(b) >= 0; }

// Nearest q-digit decimal, ties away from zero; Saturation when |x| > 10^q.
FixedDecimal round_to_fixed(const BigReal& x, int q);

} // namespace memoforge
