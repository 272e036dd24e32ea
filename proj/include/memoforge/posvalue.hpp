#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "memoforge/bigreal.hpp"

namespace memoforge::num {

// Binary flag sequence: true = the tracked symbol ("a"), false = other.
using FlagSeq = std::vector<bool>;

// Counts of a-flags and b-flags among the first k elements.
std::pair<int, int> n_count(const FlagSeq& s, int k);

// n_a / (e^alpha * n_b + n_a) at working precision; alpha >= 1 integer.
BigReal qval(const FlagSeq& s, int k, long alpha, const PrecisionConfig& cfg);

// Running mean of qval over the first k prefixes.
BigReal posvalue(const FlagSeq& s, int k, long alpha, const PrecisionConfig& cfg);

// Full prefix profile (posvalue at every k <= |s|) computed in one pass.
std::vector<BigReal> posvalue_profile(const FlagSeq& s, long alpha, const PrecisionConfig& cfg);

// Smallest positive integer a with e^(10^a) >= L^(3L).
int alpha_for(int L);

struct SeparationAudit {
    std::optional<BigReal> empirical_min; // absent when only {0,1} occur
    BigReal bound;                        // 1 / (e^(2*alpha*L) * L^(2L+4))
    bool holds;                           // empirical_min >= bound (or vacuous)
};

// Enumerates every flag sequence of length <= L, takes the final position
// values outside {0,1}, and compares the minimum nonzero pairwise gap with
// the analytic floor. Precondition e^alpha >= L^(2L+2) + 1.
SeparationAudit separation_audit(int L, long alpha, const PrecisionConfig& cfg);

} // namespace memoforge::num
