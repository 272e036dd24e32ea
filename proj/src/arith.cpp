#include "memoforge/arith.hpp"

#include <algorithm>

#include "memoforge/rng.hpp"

namespace memoforge::arith {

bool is_prime(int p) {
    if (p < 2) return false;
    for (int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

Alphabet arith_alphabet(int p) {
    if (!is_prime(p)) throw make_error("Range", "p must be prime");
    Alphabet a;
    for (int v = 0; v < p; ++v) a.symbols.push_back(std::to_string(v));
    for (const char* s : {"=", "+", "-", "*", "/", "(", ")"}) a.symbols.push_back(s);
    return a;
}

namespace {

int mod_inverse(int a, int p) { // p prime, a != 0 mod p
    int r = 1, b = a % p, e = p - 2;
    while (e > 0) {
        if (e & 1) r = (r * b) % p;
        b = (b * b) % p;
        e >>= 1;
    }
    return r;
}

int apply_op(int lhs, Symbol op, int rhs, int p) {
    if (op == sym_plus(p)) return (lhs + rhs) % p;
    if (op == sym_minus(p)) return ((lhs - rhs) % p + p) % p;
    if (op == sym_times(p)) return (lhs * rhs) % p;
    if (op == sym_div(p)) {
        if (rhs % p == 0) throw make_error("DivisionByZero", "divisor is 0 mod p");
        return (lhs * mod_inverse(rhs, p)) % p;
    }
    throw make_error("Parse", "not a binary operator");
}

struct Parser {
    const Sentence& x;
    int p;
    size_t pos = 0;

    Symbol peek() const { return pos < x.size() ? x[pos] : -1; }
    Symbol take() { return x[pos++]; }

    int factor() {
        Symbol s = peek();
        if (is_digit_sym(s, p)) { take(); return digit_value(s); }
        if (s == sym_lp(p)) {
            take();
            int v = expr();
            if (peek() != sym_rp(p)) throw make_error("Parse", "missing ')'");
            take();
            return v;
        }
        throw make_error("Parse", "expected digit or '('");
    }

    int term() {
        int v = factor();
        while (peek() == sym_times(p) || peek() == sym_div(p)) {
            Symbol op = take();
            v = apply_op(v, op, factor(), p);
        }
        return v;
    }

    int expr() {
        int v = term();
        while (peek() == sym_plus(p) || peek() == sym_minus(p)) {
            Symbol op = take();
            v = apply_op(v, op, term(), p);
        }
        return v;
    }
};

} // namespace

int eval_expression(const Sentence& x, int p) {
    Parser parser{x, p};
    int v = parser.expr();
    if (parser.pos != x.size()) throw make_error("Parse", "trailing tokens");
    return v;
}

Sentence parse_compact(const std::string& text, int p) {
    Sentence out;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ') { ++i; continue; }
        if (c >= '0' && c <= '9') {
            size_t j = i;
            long v = 0;
            while (j < text.size() && text[j] >= '0' && text[j] <= '9') {
                v = v * 10 + (text[j] - '0');
                ++j;
            }
            if (v >= p) throw make_error("Parse", "digit " + std::to_string(v) + " >= p");
            out.push_back(digit_sym(static_cast<int>(v)));
            i = j;
            continue;
        }
        switch (c) {
            case '=': out.push_back(sym_eq(p)); break;
            case '+': out.push_back(sym_plus(p)); break;
            case '-': out.push_back(sym_minus(p)); break;
            case '*': out.push_back(sym_times(p)); break;
            case '/': out.push_back(sym_div(p)); break;
            case '(': out.push_back(sym_lp(p)); break;
            case ')': out.push_back(sym_rp(p)); break;
            default: throw make_error("Parse", std::string("bad character '") + c + "'");
        }
        ++i;
    }
    if (out.empty()) throw make_error("Parse", "empty expression");
    return out;
}

std::string to_compact(const Sentence& x, int p) {
    Alphabet a = arith_alphabet(p);
    std::string s;
    for (Symbol t : x) s += a.name(t);
    return s;
}

namespace {

struct Entry {
    Sentence toks;
    int value;
};

// strings generated once each: the top-level split at the rightmost
// operator of a production is unique for this grammar
struct Tables {
    std::vector<std::vector<Entry>> expr, term, factor;
};

void build_tables(Tables& t, int n, int p) {
    t.expr.assign(static_cast<size_t>(n + 1), {});
    t.term.assign(static_cast<size_t>(n + 1), {});
    t.factor.assign(static_cast<size_t>(n + 1), {});
    // hard memory cap on the enumeration itself; the sample budget only
    // controls subsampling of the finished set
    constexpr std::uint64_t kEnumCap = 8'000'000;
    std::uint64_t count = 0;
    auto bump = [&](std::uint64_t k) {
        count += k;
        if (count > kEnumCap)
            throw make_error("Budget", "expression enumeration exceeds the internal cap");
    };
    for (int len = 1; len <= n; ++len) {
        auto& fac = t.factor[static_cast<size_t>(len)];
        if (len == 1) {
            for (int v = 0; v < p; ++v) fac.push_back({{digit_sym(v)}, v});
        } else if (len >= 3) {
            for (const auto& e : t.expr[static_cast<size_t>(len - 2)]) {
                Sentence s;
                s.reserve(e.toks.size() + 2);
                s.push_back(sym_lp(p));
                s.insert(s.end(), e.toks.begin(), e.toks.end());
                s.push_back(sym_rp(p));
                fac.push_back({std::move(s), e.value});
            }
        }
        bump(fac.size());

        auto& trm = t.term[static_cast<size_t>(len)];
        trm = fac;
        for (int a = 1; a + 2 <= len; ++a) {
            int b = len - a - 1;
            for (const auto& lhs : t.term[static_cast<size_t>(a)])
                for (const auto& rhs : t.factor[static_cast<size_t>(b)])
                    for (Symbol op : {sym_times(p), sym_div(p)}) {
                        if (op == sym_div(p) && rhs.value % p == 0) continue;
                        Sentence s;
                        s.reserve(lhs.toks.size() + rhs.toks.size() + 1);
                        s.insert(s.end(), lhs.toks.begin(), lhs.toks.end());
                        s.push_back(op);
                        s.insert(s.end(), rhs.toks.begin(), rhs.toks.end());
                        trm.push_back({std::move(s), apply_op(lhs.value, op, rhs.value, p)});
                    }
        }
        bump(trm.size());

        auto& exp = t.expr[static_cast<size_t>(len)];
        exp = trm;
        for (int a = 1; a + 2 <= len; ++a) {
            int b = len - a - 1;
            for (const auto& lhs : t.expr[static_cast<size_t>(a)])
                for (const auto& rhs : t.term[static_cast<size_t>(b)])
                    for (Symbol op : {sym_plus(p), sym_minus(p)}) {
                        Sentence s;
                        s.reserve(lhs.toks.size() + rhs.toks.size() + 1);
                        s.insert(s.end(), lhs.toks.begin(), lhs.toks.end());
                        s.push_back(op);
                        s.insert(s.end(), rhs.toks.begin(), rhs.toks.end());
                        exp.push_back({std::move(s), apply_op(lhs.value, op, rhs.value, p)});
                    }
        }
        bump(exp.size());
    }
}

} // namespace

Language gen_arith(const ArithConfig& cfg, std::uint64_t sample_budget, std::uint64_t subsample_seed) {
    if (!is_prime(cfg.p)) throw make_error("Range", "p must be prime");
    if (cfg.n < 1) throw make_error("Range", "n must be >= 1");

    Tables t;
    build_tables(t, cfg.n, cfg.p);

    std::vector<lang::Sample> samples;
    for (int len = 1; len <= cfg.n; ++len)
        for (const auto& e : t.expr[static_cast<size_t>(len)])
            samples.push_back({e.toks, digit_sym(e.value)});

    std::sort(samples.begin(), samples.end(),
              [](const lang::Sample& a, const lang::Sample& b) { return lang::sentence_less(a.x, b.x); });

    std::optional<std::uint64_t> used_seed;
    if (samples.size() > sample_budget) {
        Rng rng(subsample_seed);
        // partial Fisher-Yates, then restore canonical order
        for (std::uint64_t i = 0; i < sample_budget; ++i) {
            std::uint64_t j = i + rng.below(samples.size() - i);
            std::swap(samples[i], samples[j]);
        }
        samples.resize(sample_budget);
        std::sort(samples.begin(), samples.end(),
                  [](const lang::Sample& a, const lang::Sample& b) { return lang::sentence_less(a.x, b.x); });
        used_seed = subsample_seed;
    }

    Language L = lang::validate_language(arith_alphabet(cfg.p), std::move(samples));
    L.subsample_seed = used_seed;
    return L;
}

std::vector<Sentence> arith_cot_chain(const Sentence& expr, int p) {
    eval_expression(expr, p); // validates well-formedness up front
    std::vector<Sentence> chain;
    Sentence cur = expr;
    if (cur.size() == 1) return {cur};

    while (cur.size() > 1) {
        // active region: leftmost innermost parenthesized group, else all
        size_t lo = 0, hi = cur.size(); // [lo, hi)
        bool in_group = false;
        for (size_t i = 0; i < cur.size(); ++i) {
            if (cur[i] == sym_lp(p)) {
                size_t j = i + 1;
                bool inner = true;
                while (j < cur.size() && cur[j] != sym_rp(p)) {
                    if (cur[j] == sym_lp(p)) { inner = false; break; }
                    ++j;
                }
                if (inner) { lo = i + 1; hi = j; in_group = true; break; }
            }
        }
        // leftmost *,/ in region, else leftmost +,-
        size_t op_at = cur.size();
        for (size_t i = lo; i < hi; ++i)
            if (cur[i] == sym_times(p) || cur[i] == sym_div(p)) { op_at = i; break; }
        if (op_at == cur.size())
            for (size_t i = lo; i < hi; ++i)
                if (cur[i] == sym_plus(p) || cur[i] == sym_minus(p)) { op_at = i; break; }
        if (op_at == cur.size()) {
            if (in_group && hi - lo == 1) { // "(d)": the unwrap is the step
                Sentence next;
                next.reserve(cur.size() - 2);
                next.insert(next.end(), cur.begin(), cur.begin() + static_cast<long>(lo - 1));
                next.push_back(cur[lo]);
                next.insert(next.end(), cur.begin() + static_cast<long>(hi + 1), cur.end());
                cur = std::move(next);
                chain.push_back(cur);
                continue;
            }
            throw make_error("Parse", "no reducible operation");
        }

        int v = apply_op(digit_value(cur[op_at - 1]), cur[op_at], digit_value(cur[op_at + 1]), p);
        Sentence next;
        next.reserve(cur.size() - 2);
        next.insert(next.end(), cur.begin(), cur.begin() + static_cast<long>(op_at - 1));
        next.push_back(digit_sym(v));
        next.insert(next.end(), cur.begin() + static_cast<long>(op_at + 2), cur.end());
        // a group reduced to a single value drops its parentheses now
        if (in_group && hi - lo == 3) {
            size_t at = op_at - 1; // value position in `next` still preceded by '('
            Sentence unwrapped;
            unwrapped.reserve(next.size() - 2);
            unwrapped.insert(unwrapped.end(), next.begin(), next.begin() + static_cast<long>(lo - 1));
            unwrapped.push_back(next[at]);
            unwrapped.insert(unwrapped.end(), next.begin() + static_cast<long>(at + 2), next.end());
            next = std::move(unwrapped);
        }
        cur = std::move(next);
        chain.push_back(cur);
    }
    return chain;
}

} // namespace memoforge::arith
