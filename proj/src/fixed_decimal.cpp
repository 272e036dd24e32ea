#include "memoforge/fixed_decimal.hpp"

#include <cctype>
#include <cmath>

namespace memoforge {

std::int64_t pow10_i64(int e) {
    if (e < 0 || e > 18) throw make_error("Range", "pow10_i64 exponent " + std::to_string(e));
    std::int64_t r = 1;
    while (e-- > 0) r *= 10;
    return r;
}

FixedDecimal make_fixed(std::int64_t mantissa, int q) {
    if (q < 0 || q > 9) throw make_error("Range", "precision q=" + std::to_string(q) + " outside [0,9]");
    std::int64_t cap = pow10_i64(2 * q);
    if (mantissa > cap || mantissa < -cap)
        throw make_error("PrecisionViolation",
                         "mantissa " + std::to_string(mantissa) + " exceeds 10^" + std::to_string(2 * q));
    return FixedDecimal{mantissa, q};
}

FixedDecimal fixed_from_int(std::int64_t v, int q) {
    return make_fixed(v * pow10_i64(q), q);
}

std::string fixed_to_string(const FixedDecimal& f) {
    std::int64_t m = f.mantissa;
    bool neg = m < 0;
    if (neg) m = -m;
    std::int64_t scale = pow10_i64(f.digits);
    std::int64_t ip = m / scale, fp = m % scale;
    std::string s = neg ? "-" : "";
    s += std::to_string(ip);
    if (f.digits > 0) {
        std::string frac = std::to_string(fp);
        frac.insert(0, static_cast<size_t>(f.digits) - frac.size(), '0');
        s += "." + frac;
    }
    return s;
}

FixedDecimal fixed_from_string(const std::string& s, int q) {
    if (s.empty()) throw make_error("Parse", "empty decimal string");
    size_t i = 0;
    bool neg = false;
    if (s[i] == '-' || s[i] == '+') { neg = s[i] == '-'; ++i; }
    std::string ip, fp;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) ip += s[i];
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) fp += s[i];
    }
    if (i != s.size() || (ip.empty() && fp.empty()))
        throw make_error("Parse", "bad decimal string '" + s + "'");
    // strip trailing zeros of fp beyond q only if they are zeros; a real
    // digit past q is a precision violation
    while (fp.size() > static_cast<size_t>(q)) {
        if (fp.back() != '0')
            throw make_error("PrecisionViolation",
                             "'" + s + "' has more than " + std::to_string(q) + " fractional digits");
        fp.pop_back();
    }
    fp.append(static_cast<size_t>(q) - fp.size(), '0');
    std::string all = ip + fp;
    if (all.size() > 19) throw make_error("PrecisionViolation", "'" + s + "' out of range for q=" + std::to_string(q));
    std::int64_t m = 0;
    for (char c : all) {
        m = m * 10 + (c - '0');
        if (m < 0) throw make_error("PrecisionViolation", "'" + s + "' overflows");
    }
    return make_fixed(neg ? -m : m, q);
}

double fixed_to_double(const FixedDecimal& f) {
    return static_cast<double>(f.mantissa) / static_cast<double>(pow10_i64(f.digits));
}

} // namespace memoforge
