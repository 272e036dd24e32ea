#pragma once

#include <cstdint>
#include <string>

#include "memoforge/errors.hpp"

namespace memoforge {

// Exact q-digit decimal scalar: value = mantissa / 10^digits with
// |value| <= 10^digits, i.e. |mantissa| <= 10^(2*digits).
// This is the parameter type of every stored weight; q <= 9 keeps the
// mantissa inside int64 (10^18).
struct FixedDecimal {
    std::int64_t mantissa = 0;
    std::int32_t digits = 0;

    bool is_zero() const { return mantissa == 0; }

    bool operator==(const FixedDecimal& o) const = default;
};

std::int64_t pow10_i64(int e); // e in [0,18]

// Checked constructor; throws PrecisionViolation when |mantissa| > 10^(2q).
FixedDecimal make_fixed(std::int64_t mantissa, int q);

// Fixed from small integer value (mantissa = v*10^q).
FixedDecimal fixed_from_int(std::int64_t v, int q);

// Exact decimal rendering, e.g. "-0.125", "3", "0.200".
// Trailing zeros of the fractional part are kept so the string is the
// canonical q-digit form; round-trips bit-exactly.
std::string fixed_to_string(const FixedDecimal& f);

// Parse a decimal string into a q-digit value. Rejects strings with more
// than q fractional digits (PrecisionViolation) or out-of-range magnitude.
FixedDecimal fixed_from_string(const std::string& s, int q);

double fixed_to_double(const FixedDecimal& f);

} // namespace memoforge
