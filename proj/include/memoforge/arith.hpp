#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "memoforge/lang.hpp"

namespace memoforge::arith {

using lang::Alphabet;
using lang::Language;
using lang::Sentence;
using lang::Symbol;

// Modular arithmetic expressions over Z_p: symbols 1..p are the digits
// 0..p-1, then =, +, -, *, /, (, ). T = p+7.
struct ArithConfig {
    int p = 5; // prime modulus
    int n = 5; // max expression length
};

bool is_prime(int p);
Alphabet arith_alphabet(int p);

// Symbol classification relative to p.
inline bool is_digit_sym(Symbol s, int p) { return s >= 1 && s <= p; }
inline int digit_value(Symbol s) { return s - 1; }
inline Symbol digit_sym(int v) { return v + 1; }
inline Symbol sym_eq(int p) { return p + 1; }
inline Symbol sym_plus(int p) { return p + 2; }
inline Symbol sym_minus(int p) { return p + 3; }
inline Symbol sym_times(int p) { return p + 4; }
inline Symbol sym_div(int p) { return p + 5; }
inline Symbol sym_lp(int p) { return p + 6; }
inline Symbol sym_rp(int p) { return p + 7; }

// Grammar (single-digit operands, usual precedence, left associativity):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := digit | '(' expr ')'
// Division is multiplication by the modular inverse; expressions whose
// evaluation divides by zero are rejected (DivisionByZero).
int eval_expression(const Sentence& x, int p); // throws Parse / DivisionByZero

// Compact text form, e.g. "3+(2-1)*5"; digits use maximal-run parsing so
// p > 10 works on well-formed inputs.
Sentence parse_compact(const std::string& text, int p);
std::string to_compact(const Sentence& x, int p);

// All well-formed expressions of length <= n with labels (value mod p)+1;
// expressions dividing by zero are excluded. When the full set exceeds
// sample_budget a seeded uniform subsample is returned and the seed is
// recorded on the Language.
Language gen_arith(const ArithConfig& cfg, std::uint64_t sample_budget = 1'000'000,
                   std::uint64_t subsample_seed = 1);

// Canonical reduction chain: repeatedly rewrite the leftmost innermost
// binary operation (parenthesized groups first, then *,/ left-to-right,
// then +,- left-to-right); parentheses around a reduced single value drop
// in the same step. Returns the successive sentences ending in the value;
// an already-single expression returns itself.
std::vector<Sentence> arith_cot_chain(const Sentence& expr, int p);

} // namespace memoforge::arith
