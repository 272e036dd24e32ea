#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memoforge/lang.hpp"
#include "memoforge/txmodel.hpp"

namespace memoforge::analysis {

using lang::Language;
using lang::Sentence;
using lang::Symbol;

// Exact nonnegative integer as a decimal string (GMP behind the scenes).
struct BigInt {
    std::string dec = "0";
};
int bigint_cmp(const BigInt& a, const BigInt& b);

// para(W,D,H,T) = TW + (T+1)(W+1) + D((3H+3)W^2 + W), exact.
BigInt param_count(long W, long D, long H, long T);

struct BoundVerdict {
    long N = 0, T = 0, q = 0, P = 0;
    BigInt labelings;                   // T^N
    BigInt capacity;                    // P^3 * (10^(2q))^P
    bool sufficient_in_principle = false; // capacity >= labelings
    long min_P_threshold = 0;           // smallest P with N ln T <= 6 q P
};

// Counting bound: compares the number of labelings against the number of
// distinct bounded-precision models. `relaxed` lifts the N,T >= 3, q >= 3
// regime restriction.
BoundVerdict lower_bound_check(long N, long T, long q, long P, bool relaxed = false);

struct MicroSearchResult {
    long long candidates = 0;          // models actually enumerated
    long long distinct_behaviors = 0;  // distinct classification tuples seen
    BigInt capacity;                   // P^3 (10^2q)^P for the matching shape
};

// Exhaustive counterpart of the counting argument at degenerate size:
// enumerates every width-1 depth-1 single-head model whose 3T+9 parameters
// range over the given mantissa choices (values m/10^q), classifies the
// given sentences with each, and counts distinct behavior tuples. The cost
// guard refuses beyond 10^7 candidate models, which in particular covers
// every full q-digit grid.
MicroSearchResult exhaustive_micro_search(int T, int q, const std::vector<std::int64_t>& mantissas,
                                          const std::vector<Sentence>& sentences,
                                          const tx::EngineOpts& opts);

enum class Family { S, SPrime };

struct ConvergenceSeries {
    std::string family;
    std::vector<long> indices;
    std::vector<BigReal> distances; // L1 logit distance of the family pair
};

// Measures ||F(pair_1(i)) - F(pair_2(i))||_1 for each i; no verdict.
ConvergenceSeries convergence_experiment(const tx::TransformerModel& model, Family family,
                                         const std::vector<long>& i_list,
                                         const tx::EngineOpts& opts);

// The family pair sentences themselves (exposed for oracles and the CLI).
std::pair<Sentence, Sentence> family_pair(Family family, long i);

struct ConfidencePoint {
    long i = 0;
    Symbol predicted = 0;
    BigReal confidence;
    BigReal dist_prev; // L1 logit distance to the previous i (0 for the first)
};

// Runs the repeated-addition sentences 1+1+...+1 (i ones) through the model
// for i = 1..i_max and records prediction, confidence, and consecutive
// logit distances.
std::vector<ConfidencePoint> arith_confidence_experiment(const tx::TransformerModel& model, int p,
                                                         int i_max, const tx::EngineOpts& opts);

enum class VerifyMode { NoCot, Cot };

struct SampleResult {
    Sentence x;
    Symbol expected = 0;
    Symbol got = 0;
    bool ok = false;
    BigReal confidence; // CoT mode: minimum over the trace steps
    int steps = 0;      // CoT mode: trace length including the stop step
};

struct VerifyReport {
    int total = 0, correct = 0;
    double accuracy = 0.0;
    BigReal min_confidence;
    std::vector<SampleResult> results;
};

// Exact per-sample check of the model against a language.
VerifyReport verify_memorization(const tx::TransformerModel& model, const Language& S,
                                 VerifyMode mode, const tx::EngineOpts& opts);

} // namespace memoforge::analysis
