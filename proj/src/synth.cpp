#include "memoforge/synth.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "memoforge/posvalue.hpp"
#include "memoforge/rng.hpp"

namespace memoforge::synth {

using tx::Layer;
using tx::SparseMat;

namespace {

// internal escalation signal: retry the whole build at twice the precision
struct Escalate {
    std::string why;
};

FixedDecimal one(int q) { return fixed_from_int(1, q); }

Layer res_only(SparseMat w_res, int q) {
    Layer l;
    int w = w_res.cols;
    w_res.sort_entries();
    l.w_res = std::move(w_res);
    l.fnn.e1 = SparseMat::zero(w, w);
    l.fnn.e2 = SparseMat::zero(w, w);
    l.fnn.b.assign(static_cast<size_t>(w), fixed_from_int(0, q));
    return l;
}

fnn::FnnNet concat_nets(fnn::FnnNet a, const fnn::FnnNet& b) {
    if (a.output_width() != b.input_width) throw make_error("Schema", "net concat width mismatch");
    for (const auto& l : b.layers) a.layers.push_back(l);
    return a;
}

fnn::FnnNet direct_sum(const fnn::FnnNet& n, int copies) {
    fnn::FnnNet out{n.q, n.input_width * copies, {}};
    for (const auto& l : n.layers) {
        fnn::ReluLayer nl;
        nl.w = SparseMat::zero(l.w.rows * copies, l.w.cols * copies);
        for (int c = 0; c < copies; ++c)
            for (const auto& e : l.w.nz) nl.w.add(c * l.w.rows + e.r, c * l.w.cols + e.c, e.w);
        nl.w.sort_entries();
        nl.b.reserve(static_cast<size_t>(l.w.cols) * copies);
        for (int c = 0; c < copies; ++c) nl.b.insert(nl.b.end(), l.b.begin(), l.b.end());
        out.layers.push_back(std::move(nl));
    }
    return out;
}

int posenc_bits(int L) {
    int p = 0;
    while ((1 << p) <= L) ++p; // bit_width(L)
    return p;
}

struct FeatureData {
    int alpha = 1;
    long scale = 10; // 10^alpha
    int L = 0;
    int P = 0; // posenc bits (0 = disabled)
    std::vector<Symbol> active;
    std::vector<int> rank; // symbol -> active rank or -1

    fnn::FnnNet f1;
    long f1_points = 0;
    long G = 4;
    long sc = 0;

    std::vector<std::vector<BigReal>> rows;
    std::vector<int> labels; // 1..T+1
    std::vector<Sentence> reps;
    std::vector<size_t> row_of_sample;
    BigReal sep, range;
};

struct ValueLess {
    bool operator()(const BigReal& a, const BigReal& b) const { return a.cmp(b) < 0; }
};

// every V/feature comparison that decides structure goes through this guard
void guard_gap(const BigReal& gap, long bits, const char* what) {
    if (gap.sign() <= 0) return;
    mpfr_t t;
    mpfr_init2(t, 64);
    mpfr_set_ui_2exp(t, 1, -(bits / 2), MPFR_RNDN);
    bool too_small = mpfr_cmp(gap.raw(), t) < 0;
    mpfr_clear(t);
    if (too_small) throw Escalate{std::string(what) + ": gap below 2^-(bits/2)"};
}

FeatureData compute_features(const Language& S, int q, long bits, bool posenc, int alpha) {
    const int T = S.sym_count();
    const int L = S.max_len();
    const PrecisionConfig cfg{bits};

    FeatureData fd;
    fd.alpha = alpha;
    fd.scale = 1;
    for (int i = 0; i < alpha; ++i) fd.scale *= 10;
    fd.L = L;
    fd.P = posenc ? posenc_bits(L) : 0;

    fd.rank.assign(static_cast<size_t>(T + 1), -1);
    for (const auto& s : S.samples)
        for (Symbol t : s.x)
            if (fd.rank[static_cast<size_t>(t)] < 0) fd.rank[static_cast<size_t>(t)] = 0;
    for (Symbol t = 1; t <= T; ++t)
        if (fd.rank[static_cast<size_t>(t)] == 0) {
            fd.rank[static_cast<size_t>(t)] = static_cast<int>(fd.active.size());
            fd.active.push_back(t);
        }
    const int A = static_cast<int>(fd.active.size());

    // position-value profiles per (sample, active symbol)
    std::vector<std::vector<std::vector<BigReal>>> profiles(S.samples.size());
    for (size_t si = 0; si < S.samples.size(); ++si) {
        const auto& x = S.samples[si].x;
        profiles[si].reserve(static_cast<size_t>(A));
        for (Symbol sym : fd.active) {
            num::FlagSeq flags(x.size());
            for (size_t k = 0; k < x.size(); ++k) flags[k] = x[k] == sym;
            profiles[si].push_back(num::posvalue_profile(flags, fd.scale, cfg));
        }
    }

    // per-step value sets, codes, and the f1 target table
    BigReal zero = BigReal::from_long(0, bits), unit = BigReal::from_long(1, bits);
    std::vector<std::map<BigReal, long, ValueLess>> codes(static_cast<size_t>(L + 1));
    long zmax = 1;
    for (int j = 1; j <= L; ++j) {
        std::map<BigReal, long, ValueLess>& m = codes[static_cast<size_t>(j)];
        for (size_t si = 0; si < S.samples.size(); ++si) {
            if (static_cast<int>(S.samples[si].x.size()) < j) continue;
            for (int a = 0; a < A; ++a) {
                const BigReal& v = profiles[si][static_cast<size_t>(a)][static_cast<size_t>(j - 1)];
                if (v.bit_equal(zero) || v.bit_equal(unit)) continue;
                m.emplace(v, 0);
            }
        }
        long code = 1;
        for (auto& [v, c] : m) c = code++;
        zmax = std::max(zmax, code - 1);
        // escalation guard on adjacent sorted values
        const BigReal* prev = nullptr;
        for (const auto& [v, c] : m) {
            if (prev) guard_gap(v - *prev, bits, "value table");
            prev = &v;
        }
    }
    fd.G = std::max<long>(4, 2 * zmax + 2);
    if ((static_cast<double>(L - 1)) * std::log10(static_cast<double>(fd.G)) +
            std::log10(static_cast<double>(zmax)) >
        18.0)
        throw make_error("Budget", "f1 targets overflow the integer range");

    // f1: shift input by +1, then memorize value -> code * G^(j-1);
    // values 0 and 1 are pinned near zero output
    std::vector<std::pair<BigReal, long>> f1pts;
    {
        BigReal shift = BigReal::from_long(1, bits);
        f1pts.push_back({BigReal::from_long(1, bits), 0}); // value 0
        f1pts.push_back({BigReal::from_long(2, bits), 0}); // value 1
        long gpow = 1;
        for (int j = 1; j <= L; ++j) {
            for (const auto& [v, c] : codes[static_cast<size_t>(j)])
                f1pts.push_back({v + shift, c * gpow});
            gpow *= fd.G;
        }
    }
    fd.f1_points = static_cast<long>(f1pts.size());
    fnn::FnnNet shift_net{q, 1, {}};
    {
        fnn::ReluLayer sl;
        sl.w = SparseMat::zero(1, 1);
        sl.w.add(0, 0, one(q));
        sl.b = {one(q)};
        shift_net.layers.push_back(std::move(sl));
    }
    try {
        fd.f1 = concat_nets(shift_net, fnn::build_1d_memorizer(f1pts, q));
    } catch (const Error& e) {
        if (e.code() == "GapTooSmall") throw Escalate{e.what()};
        throw;
    }

    // per-sample averaged f1 features (memoized per distinct input value)
    std::map<BigReal, BigReal, ValueLess> f1memo;
    auto f1_eval = [&](const BigReal& v) {
        auto it = f1memo.find(v);
        if (it != f1memo.end()) return it->second;
        BigReal r = fnn::eval_fnn_scalar(fd.f1, v, cfg);
        return f1memo.emplace(v, std::move(r)).first->second;
    };
    std::vector<std::vector<BigReal>> favg(S.samples.size());
    BigReal maxF = zero;
    for (size_t si = 0; si < S.samples.size(); ++si) {
        const int n = static_cast<int>(S.samples[si].x.size());
        for (int a = 0; a < A; ++a) {
            BigReal sum(bits);
            for (int j = 1; j <= n; ++j)
                sum = sum + f1_eval(profiles[si][static_cast<size_t>(a)][static_cast<size_t>(j - 1)]);
            BigReal f = sum / BigReal::from_long(n, bits);
            if (f > maxF) maxF = f;
            favg[si].push_back(std::move(f));
        }
    }
    fd.sc = 0;
    {
        BigReal p = unit;
        while (maxF > p) {
            ++fd.sc;
            p = p * BigReal::from_long(10, bits);
        }
    }
    BigReal scale_down = BigReal::pow10(fd.sc, bits);

    // classifier rows; constant sentences collapse to their symbol unless
    // position encoding distinguishes them
    auto row_of = [&](size_t si) {
        std::vector<BigReal> row;
        const int n = static_cast<int>(S.samples[si].x.size());
        for (int a = 0; a < A; ++a)
            row.push_back(profiles[si][static_cast<size_t>(a)][static_cast<size_t>(n - 1)]);
        for (int a = 0; a < A; ++a) row.push_back(favg[si][static_cast<size_t>(a)] / scale_down);
        for (int b = fd.P - 1; b >= 0; --b)
            row.push_back((n >> b) & 1 ? unit : zero);
        return row;
    };

    std::map<std::pair<int, long>, size_t> row_index; // (kind, key) -> row
    fd.row_of_sample.assign(S.samples.size(), 0);
    const int T1 = S.sym_count() + 1;
    for (size_t si = 0; si < S.samples.size(); ++si) {
        const auto& smp = S.samples[si];
        auto t = lang::typ(smp.x);
        int label = smp.y == lang::kStop ? T1 : smp.y;
        std::pair<int, long> key{1, static_cast<long>(si)};
        Sentence rep = smp.x;
        if (!posenc && t.size() == 1) {
            key = {0, *t.begin()};
            rep = Sentence{*t.begin()};
        }
        auto it = row_index.find(key);
        if (it != row_index.end()) {
            if (fd.labels[it->second] != label)
                throw make_error("Precondition",
                                 "constant-sentence class carries two labels (condition violated)");
            fd.row_of_sample[si] = it->second;
            continue;
        }
        std::vector<BigReal> row;
        if (key.first == 0) {
            // representative single-symbol sentence
            std::vector<BigReal> r;
            for (int a = 0; a < A; ++a)
                r.push_back(fd.active[static_cast<size_t>(a)] == *t.begin() ? unit : zero);
            for (int a = 0; a < A; ++a) {
                BigReal f = f1_eval(fd.active[static_cast<size_t>(a)] == *t.begin() ? unit : zero);
                r.push_back(f / scale_down);
            }
            for (int b = fd.P - 1; b >= 0; --b) r.push_back((1 >> b) & 1 ? unit : zero);
            row = std::move(r);
        } else {
            row = row_of(si);
        }
        row_index.emplace(key, fd.rows.size());
        fd.row_of_sample[si] = fd.rows.size();
        fd.rows.push_back(std::move(row));
        fd.labels.push_back(label);
        fd.reps.push_back(std::move(rep));
    }

    // separation and range; identical rows with distinct labels mean the
    // precision could not tell two genuinely different features apart
    fd.sep = BigReal(bits);
    fd.range = zero;
    bool first = true;
    for (size_t i = 0; i < fd.rows.size(); ++i) {
        for (const auto& v : fd.rows[i])
            if (v.abs() > fd.range) fd.range = v.abs();
        for (size_t j = i + 1; j < fd.rows.size(); ++j) {
            BigReal g(bits);
            for (size_t c = 0; c < fd.rows[i].size(); ++c) {
                BigReal d = (fd.rows[i][c] - fd.rows[j][c]).abs();
                if (d > g) g = d;
            }
            if (g.is_zero()) throw Escalate{"two classifier rows collide at this precision"};
            guard_gap(g, bits, "feature rows");
            if (first || g < fd.sep) fd.sep = g;
            first = false;
        }
    }
    if (fd.rows.size() == 1) fd.sep = unit;
    return fd;
}

std::string decimal_entry(const std::string& digits, long frac, bool neg) {
    std::string d = digits;
    if (d.find_first_not_of('0') == std::string::npos) neg = false;
    if (static_cast<long>(d.size()) <= frac) d.insert(0, static_cast<size_t>(frac + 1) - d.size(), '0');
    std::string out = neg ? "-" : "";
    out += d.substr(0, d.size() - static_cast<size_t>(frac));
    out += ".";
    out += d.substr(d.size() - static_cast<size_t>(frac));
    return out;
}

} // namespace

Projector build_projector(const std::vector<std::vector<BigReal>>& points, std::uint64_t seed,
                          int q, const PrecisionConfig& cfg) {
    if (points.empty()) throw make_error("Range", "no points");
    const int dim = static_cast<int>(points[0].size());
    const long N = static_cast<long>(points.size());
    const long bits = cfg.mantissa_bits;

    Projector out;
    if (N == 1) {
        // no pairs to separate; any in-range direction works
        out.entries.assign(static_cast<size_t>(dim), "0.0");
        out.entries[0] = "0.1";
        out.frac_digits = 1;
        out.achieved_gap = BigReal::from_long(1, bits);
        return out;
    }

    BigReal c(bits);
    bool first = true;
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = i + 1; j < points.size(); ++j) {
            BigReal g(bits);
            for (int d = 0; d < dim; ++d) {
                BigReal dd = (points[i][static_cast<size_t>(d)] - points[j][static_cast<size_t>(d)]).abs();
                if (dd > g) g = dd;
            }
            if (g.is_zero()) throw make_error("IdenticalPoints", "projector points must be distinct");
            if (first || g < c) c = g;
            first = false;
        }

    // target projected gap c/(8 N^2 n) and a grid fine enough to keep it
    BigReal n2(bits);
    BigReal target = c / (BigReal::from_long(8 * N * N, bits) * BigReal::from_long(dim, bits));
    (void)n2;
    long du = fnn::pow10_scale_for(
        BigReal::from_long(16l * N * N * dim, bits) * BigReal::from_long(dim, bits) / c, q, bits,
        "projector grid");
    out.frac_digits = du;

    const long hi_prec = bits + du * 4 + 128;
    for (int attempt = 0; attempt < 64; ++attempt) {
        Rng rng(seed + static_cast<std::uint64_t>(attempt) * 0x9e3779b9ULL);
        // gaussian coordinates via Box-Muller on exact dyadic uniforms
        std::vector<BigReal> u;
        BigReal norm2(bits);
        for (int d = 0; d < dim; ++d) {
            BigReal u1(bits), u2(bits);
            mpfr_set_ui_2exp(u1.raw(), (rng.next() >> 11) | 1, -53, MPFR_RNDN);
            mpfr_set_ui_2exp(u2.raw(), (rng.next() >> 11) | 1, -53, MPFR_RNDN);
            BigReal r = (BigReal::from_long(-2, bits) * u1.log()).sqrt();
            BigReal ang(bits);
            mpfr_const_pi(ang.raw(), MPFR_RNDN);
            ang = ang * BigReal::from_long(2, bits) * u2;
            BigReal co(bits);
            mpfr_cos(co.raw(), ang.raw(), MPFR_RNDN);
            BigReal g = r * co;
            norm2 = norm2 + g * g;
            u.push_back(std::move(g));
        }
        BigReal norm = norm2.sqrt();
        if (norm.is_zero()) continue;
        for (auto& g : u) g = g / norm;

        // round to du decimal digits
        std::vector<std::string> entries;
        std::vector<BigReal> ur;
        for (const auto& g : u) {
            bool neg = g.sign() < 0;
            BigReal ag = g.abs();
            // round half away at the grid
            mpfr_t t;
            mpfr_init2(t, hi_prec);
            mpfr_ui_pow_ui(t, 10, static_cast<unsigned long>(du), MPFR_RNDN);
            mpfr_mul(t, t, ag.raw(), MPFR_RNDN);
            mpfr_round(t, t);
            mpz_t z, cap_z;
            mpz_init(z);
            mpz_init(cap_z);
            mpfr_get_z(z, t, MPFR_RNDN);
            mpz_ui_pow_ui(cap_z, 10, static_cast<unsigned long>(du));
            if (mpz_cmp(z, cap_z) >= 0) mpz_sub_ui(z, cap_z, 1); // clamp inside (-1, 1)
            char* s = mpz_get_str(nullptr, 10, z);
            std::string digits(s);
            void (*freefunc)(void*, size_t);
            mp_get_memory_functions(nullptr, nullptr, &freefunc);
            freefunc(s, digits.size() + 1);
            mpz_clear(z);
            mpz_clear(cap_z);
            mpfr_clear(t);
            std::string e = decimal_entry(digits, du, neg);
            BigReal exact(hi_prec);
            if (mpfr_set_str(exact.raw(), e.c_str(), 10, MPFR_RNDN) != 0)
                throw make_error("Internal", "bad projector entry");
            entries.push_back(std::move(e));
            ur.push_back(std::move(exact));
        }

        // projected pairwise gaps
        std::vector<BigReal> proj;
        for (const auto& p : points) {
            BigReal t(hi_prec);
            for (int d = 0; d < dim; ++d) t = t + ur[static_cast<size_t>(d)] * p[static_cast<size_t>(d)];
            proj.push_back(std::move(t));
        }
        BigReal got(bits);
        bool ok = true, gfirst = true;
        for (size_t i = 0; ok && i < proj.size(); ++i)
            for (size_t j = i + 1; ok && j < proj.size(); ++j) {
                BigReal g = (proj[i] - proj[j]).abs();
                if (g < target) { ok = false; break; }
                if (gfirst || g < got) got = g;
                gfirst = false;
            }
        if (ok) {
            out.entries = std::move(entries);
            out.achieved_gap = BigReal(bits); // report at working precision
            mpfr_set(out.achieved_gap.raw(), got.raw(), MPFR_RNDN);
            out.retries = attempt;
            return out;
        }
    }
    throw make_error("RetryExhausted", "projector could not reach the target gap");
}

namespace {

// ---- model assembly ----

struct Assembly {
    std::vector<Layer> layers;
    int feature_layer = -1;
    int fw = 0; // feature state width
};

Assembly assemble_layers(const FeatureData& fd, const fnn::FnnNet& classifier, int T, int q) {
    const int A = static_cast<int>(fd.active.size());
    const int P = fd.P;
    const int d0 = 4 * T + P;
    Assembly out;

    // part two, step one: expand the mismatch-indicator columns by 10^alpha
    {
        int rem = fd.alpha;
        while (rem > 0) {
            int e = std::min(rem, q);
            SparseMat w = SparseMat::zero(d0, d0);
            for (int c = 0; c < d0; ++c) {
                bool is_ind = c < 4 * T && c % 4 == 2;
                w.add(c, c, is_ind ? fixed_from_int(pow10_i64(e), q) : one(q));
            }
            out.layers.push_back(res_only(std::move(w), q));
            rem -= e;
        }
    }

    // step two: one attention layer turns indicators into the softmax ratios
    {
        Layer l = res_only(SparseMat::zero(d0, d0), q);
        SparseMat w = SparseMat::zero(d0, d0);
        for (int i = 0; i < T; ++i) {
            w.add(4 * i + 2, 4 * i + 2, one(q));
            w.add(4 * i + 3, 4 * i + 3, one(q));
        }
        for (int b = 0; b < P; ++b) w.add(4 * T + b, 4 * T + b, one(q));
        l.w_res = std::move(w);
        l.w_res.sort_entries();
        for (Symbol sym : fd.active) {
            int i = sym - 1;
            tx::HeadWeights h;
            h.q = SparseMat::zero(d0, d0);
            h.q.add(4 * i + 3, 4 * i + 2, one(q));
            h.k = SparseMat::ident(d0, q);
            h.v = SparseMat::zero(d0, d0);
            h.v.add(4 * i + 1, 4 * i + 1, one(q));
            l.heads.push_back(std::move(h));
        }
        out.layers.push_back(std::move(l));
    }

    // step three: zero-score heads average them into position values
    {
        Layer l = res_only(SparseMat::zero(d0, d0), q);
        SparseMat w = SparseMat::zero(d0, d0);
        for (int i = 0; i < T; ++i) {
            w.add(4 * i + 2, 4 * i + 2, one(q));
            w.add(4 * i + 3, 4 * i + 3, one(q));
        }
        for (int b = 0; b < P; ++b) w.add(4 * T + b, 4 * T + b, one(q));
        l.w_res = std::move(w);
        l.w_res.sort_entries();
        for (Symbol sym : fd.active) {
            int i = sym - 1;
            tx::HeadWeights h;
            h.q = SparseMat::zero(d0, d0);
            h.k = SparseMat::zero(d0, d0);
            h.v = SparseMat::zero(d0, d0);
            h.v.add(4 * i + 1, 4 * i + 1, one(q));
            l.heads.push_back(std::move(h));
        }
        out.layers.push_back(std::move(l));
    }

    // narrow to the active feature state [V_a | F_a(=0) | posenc]
    const int fw = 2 * A + P;
    out.fw = fw;
    {
        SparseMat w = SparseMat::zero(d0, fw);
        for (int a = 0; a < A; ++a) {
            int i = fd.active[static_cast<size_t>(a)] - 1;
            w.add(4 * i + 1, a, one(q));
        }
        for (int b = 0; b < P; ++b) w.add(4 * T + b, 2 * A + b, one(q));
        out.layers.push_back(res_only(std::move(w), q));
    }

    // part three: f1 on every V column, outputs into the F columns
    {
        fnn::FnnNet f1A = direct_sum(fd.f1, A);
        std::vector<int> in_cols, out_cols;
        for (int a = 0; a < A; ++a) in_cols.push_back(a);
        for (int a = 0; a < A; ++a) out_cols.push_back(A + a);
        auto lifted = lift_fnn_on_columns(f1A, fw, in_cols, out_cols);
        for (auto& l : lifted) out.layers.push_back(std::move(l));
    }

    // part four: average the f1 columns, then scale them below 1
    {
        Layer l = res_only(SparseMat::zero(fw, fw), q);
        SparseMat w = SparseMat::zero(fw, fw);
        for (int a = 0; a < A; ++a) w.add(a, a, one(q));
        for (int b = 0; b < P; ++b) w.add(2 * A + b, 2 * A + b, one(q));
        l.w_res = std::move(w);
        l.w_res.sort_entries();
        for (int a = 0; a < A; ++a) {
            tx::HeadWeights h;
            h.q = SparseMat::zero(fw, fw);
            h.k = SparseMat::zero(fw, fw);
            h.v = SparseMat::zero(fw, fw);
            h.v.add(A + a, A + a, one(q));
            l.heads.push_back(std::move(h));
        }
        out.layers.push_back(std::move(l));
    }
    {
        long rem = fd.sc;
        while (rem > 0) {
            int e = static_cast<int>(std::min<long>(rem, q));
            SparseMat w = SparseMat::zero(fw, fw);
            for (int c = 0; c < fw; ++c) {
                bool is_f = c >= A && c < 2 * A;
                w.add(c, c, is_f ? make_fixed(pow10_i64(q - e), q) : one(q));
            }
            out.layers.push_back(res_only(std::move(w), q));
            rem -= e;
        }
    }
    out.feature_layer = static_cast<int>(out.layers.size()) - 1;

    // part five: projector + classifier, output lands in column 0
    {
        std::vector<int> in_cols, out_cols{0};
        for (int c = 0; c < fw; ++c) in_cols.push_back(c);
        auto lifted = lift_fnn_on_columns(classifier, fw, in_cols, out_cols);
        for (auto& l : lifted) out.layers.push_back(std::move(l));
    }
    return out;
}

// classifier = Horner projection of the feature row onto u_r, shifted
// positive, composed with the 1-D memorizer of the projected points
fnn::FnnNet build_classifier_net(const Projector& proj, int dim, int q,
                                 const std::vector<std::pair<BigReal, long>>& pts,
                                 const BigReal* gap_promise) {
    fnn::FnnBuilder b(q, dim);
    std::vector<fnn::FnnBuilder::Reg> v;
    for (int i = 0; i < dim; ++i) v.push_back(b.input(i));

    // chunk each entry into base-10^q digits of its fractional part
    const long K = std::max<long>(1, (proj.frac_digits + q - 1) / q);
    std::vector<std::vector<std::int64_t>> chunk(static_cast<size_t>(dim));
    std::vector<bool> neg(static_cast<size_t>(dim));
    for (int c = 0; c < dim; ++c) {
        std::string e = proj.entries[static_cast<size_t>(c)];
        neg[static_cast<size_t>(c)] = !e.empty() && e[0] == '-';
        if (neg[static_cast<size_t>(c)]) e = e.substr(1);
        std::string ip, fp;
        auto dot = e.find('.');
        if (dot == std::string::npos) { ip = e; } else { ip = e.substr(0, dot); fp = e.substr(dot + 1); }
        fp.resize(static_cast<size_t>(K * q), '0');
        if (ip != "0" && !ip.empty() && ip.find_first_not_of('0') != std::string::npos)
            throw make_error("Internal", "projector entry not in [-1,1]");
        auto& ch = chunk[static_cast<size_t>(c)];
        for (long k = 0; k < K; ++k)
            ch.push_back(std::stoll(fp.substr(static_cast<size_t>(k * q), static_cast<size_t>(q))));
    }

    // acc <- acc/10^q + sum_c sign_c D_{c,k} v_c, from least significant chunk
    const FixedDecimal tenth_q = make_fixed(1, q);    // value 10^-q
    const FixedDecimal n_tenth_q = make_fixed(-1, q); // value -10^-q
    fnn::FnnBuilder::Reg accp, accm;
    for (long k = K - 1; k >= 0; --k) {
        fnn::FnnBuilder::Out op, om;
        if (accp.valid()) {
            op.terms.push_back({accp, tenth_q});
            op.terms.push_back({accm, n_tenth_q});
            om.terms.push_back({accp, n_tenth_q});
            om.terms.push_back({accm, tenth_q});
            b.kill(accp);
            b.kill(accm);
        }
        for (int c = 0; c < dim; ++c) {
            std::int64_t d = chunk[static_cast<size_t>(c)][static_cast<size_t>(k)];
            if (!d) continue;
            std::int64_t sd = neg[static_cast<size_t>(c)] ? -d : d;
            op.terms.push_back(b.term(v[static_cast<size_t>(c)], sd));
            om.terms.push_back(b.term(v[static_cast<size_t>(c)], -sd));
        }
        op.bias = b.fx(0);
        om.bias = b.fx(0);
        auto rr = b.emit({std::move(op), std::move(om)});
        accp = rr[0];
        accm = rr[1];
    }
    // t = Relu(acc/10^q + 2*dim) > 0
    for (auto& r : v) b.kill(r);
    b.kill(accp);
    b.kill(accm);
    fnn::FnnBuilder::Reg t = b.emit1(
        fnn::FnnBuilder::Out{{{accp, tenth_q}, {accm, n_tenth_q}}, b.fx(2 * dim)});
    fnn::FnnNet projection = b.finish({t});

    return concat_nets(std::move(projection), fnn::build_1d_memorizer(pts, q, gap_promise));
}

tx::TransformerModel pad_uniform(std::vector<Layer> layers, const FeatureData& fd,
                                 const Language& S, int q, int o_col) {
    const int T = S.sym_count();
    const int A = std::max<int>(1, static_cast<int>(fd.active.size()));
    int W = 4 * T + fd.P;
    for (const auto& l : layers) W = std::max({W, l.w_res.rows, l.w_res.cols});

    tx::TransformerModel m;
    m.shape.T = T;
    m.shape.d = W;
    m.shape.W = W;
    m.shape.H = A;
    m.shape.D = static_cast<int>(layers.size());
    m.shape.q = q;
    m.shape.use_posenc = fd.P > 0;
    m.shape.max_positions = fd.P > 0 ? fd.L : 0;
    m.symbols = S.alphabet.symbols;

    auto pad_mat = [&](SparseMat s) {
        s.rows = W;
        s.cols = W;
        return s;
    };
    for (auto& l : layers) {
        l.w_res = pad_mat(std::move(l.w_res));
        for (auto& h : l.heads) {
            h.q = pad_mat(std::move(h.q));
            h.k = pad_mat(std::move(h.k));
            h.v = pad_mat(std::move(h.v));
        }
        l.fnn.e1 = pad_mat(std::move(l.fnn.e1));
        l.fnn.e2 = pad_mat(std::move(l.fnn.e2));
        l.fnn.b.resize(static_cast<size_t>(W), fixed_from_int(0, q));
        while (static_cast<int>(l.heads.size()) < A) {
            tx::HeadWeights h;
            h.q = SparseMat::zero(W, W);
            h.k = SparseMat::zero(W, W);
            h.v = SparseMat::zero(W, W);
            l.heads.push_back(std::move(h));
        }
        m.layers.push_back(std::move(l));
    }

    // embeddings: per symbol block (0, is, isnt, 1), position bits appended
    for (int i = 1; i <= T; ++i) {
        tx::DenseVec e(static_cast<size_t>(W), fixed_from_int(0, q));
        for (int j = 1; j <= T; ++j) {
            e[static_cast<size_t>(4 * (j - 1) + 1)] = fixed_from_int(j == i ? 1 : 0, q);
            e[static_cast<size_t>(4 * (j - 1) + 2)] = fixed_from_int(j == i ? 0 : 1, q);
            e[static_cast<size_t>(4 * (j - 1) + 3)] = fixed_from_int(1, q);
        }
        m.embeddings.push_back(std::move(e));
    }
    if (fd.P > 0) {
        for (int pos = 1; pos <= fd.L; ++pos) {
            tx::DenseVec e(static_cast<size_t>(W), fixed_from_int(0, q));
            for (int b = 0; b < fd.P; ++b)
                e[static_cast<size_t>(4 * T + b)] =
                    fixed_from_int((pos >> (fd.P - 1 - b)) & 1, q);
            m.posenc.push_back(std::move(e));
        }
    }

    // readout: logit_j = 2 j o - j^2, so the argmax is the integer nearest o
    if (2 * (T + 1) > pow10_i64(q) || static_cast<std::int64_t>(T + 1) * (T + 1) > pow10_i64(q))
        throw make_error("PrecisionTooSmall", "T+1 readout constants exceed the q-digit bound");
    for (int j = 1; j <= T + 1; ++j) {
        tx::DenseVec r(static_cast<size_t>(W), fixed_from_int(0, q));
        r[static_cast<size_t>(o_col)] = fixed_from_int(2 * j, q);
        m.w_out.push_back(std::move(r));
        m.b_out.push_back(fixed_from_int(-static_cast<std::int64_t>(j) * j, q));
    }
    return m;
}

SynthResult synth_core(const Language& S, const SynthOptions& opts, bool posenc,
                       const char* mode_name) {
    const int T = S.sym_count();
    const int L = S.max_len();
    const int q = opts.q;
    if (q < 1 || q > 9) throw make_error("Range", "q must be in [1,9]");
    const int alpha = num::alpha_for(L);

    long bits = opts.cfg.mantissa_bits;
    std::string last_reason = "";
    for (int attempt = 0; attempt <= opts.max_escalations; ++attempt, bits *= 2) {
        try {
            FeatureData fd = compute_features(S, q, bits, posenc, alpha);
            const int dim = 2 * static_cast<int>(fd.active.size()) + fd.P;

            Projector proj;
            try {
                proj = build_projector(fd.rows, opts.seed, q, PrecisionConfig{bits});
            } catch (const Error& e) {
                if (e.code() == "RetryExhausted") throw Escalate{e.what()};
                throw;
            }

            // projected classifier points
            const long hi_prec = bits + proj.frac_digits * 4 + 128;
            std::vector<BigReal> ur;
            for (const auto& e : proj.entries) {
                BigReal x(hi_prec);
                if (mpfr_set_str(x.raw(), e.c_str(), 10, MPFR_RNDN) != 0)
                    throw make_error("Internal", "bad projector entry");
                ur.push_back(std::move(x));
            }
            std::vector<std::pair<BigReal, long>> pts;
            for (size_t i = 0; i < fd.rows.size(); ++i) {
                BigReal t(hi_prec);
                for (int c = 0; c < dim; ++c)
                    t = t + ur[static_cast<size_t>(c)] * fd.rows[i][static_cast<size_t>(c)];
                t = t + BigReal::from_long(2 * dim, hi_prec);
                BigReal tt(bits);
                mpfr_set(tt.raw(), t.raw(), MPFR_RNDN);
                pts.push_back({std::move(tt), fd.labels[i]});
            }

            // the gap promise handed to the memorizer is measured over the
            // rounded points themselves (rounding can nudge the elevated-
            // precision projector gap by an ulp)
            BigReal pts_gap(bits);
            {
                bool gfirst = true;
                for (size_t i = 0; i < pts.size(); ++i)
                    for (size_t j2 = i + 1; j2 < pts.size(); ++j2) {
                        BigReal g = (pts[i].first - pts[j2].first).abs();
                        if (gfirst || g < pts_gap) pts_gap = g;
                        gfirst = false;
                    }
                if (pts.size() > 1 && pts_gap.sign() <= 0)
                    throw Escalate{"projected points collide after rounding"};
            }
            fnn::FnnNet classifier;
            try {
                classifier = build_classifier_net(proj, dim, q, pts,
                                                  pts.size() > 1 ? &pts_gap : nullptr);
            } catch (const Error& e) {
                if (e.code() == "GapTooSmall") throw Escalate{e.what()};
                throw;
            }

            Assembly asmbl = assemble_layers(fd, classifier, T, q);
            tx::TransformerModel model =
                pad_uniform(std::move(asmbl.layers), fd, S, q, /*o_col=*/0);
            model.prov.mode = mode_name;
            model.prov.seed = opts.seed;
            model.prov.precision_bits = bits;
            model.prov.alpha = alpha;
            model.prov.max_len_hint = L;
            tx::validate_model(model);

            SynthesisPlan plan;
            plan.alpha = alpha;
            plan.precision_bits = bits;
            plan.escalations = attempt;
            plan.active_symbols = fd.active;
            plan.feature_layer = asmbl.feature_layer;
            plan.feature_width = asmbl.fw;
            plan.feature_table = fd.rows;
            plan.feature_labels = fd.labels;
            plan.feature_reps = fd.reps;
            plan.separation = fd.sep;
            plan.range = fd.range;
            plan.f1_points = fd.f1_points;
            plan.f1_ratio = fd.G;
            plan.f1_scale = fd.sc;
            plan.projector_seed = opts.seed;
            plan.projector_retries = proj.retries;
            plan.projector_digits = proj.frac_digits;
            plan.projector_entries = proj.entries;
            plan.projected_gap = proj.achieved_gap;
            plan.classifier_points = static_cast<long>(pts.size());
            plan.parameter_slots = model.declared_parameter_slots();

            // verification pass: every sample must classify to its label
            // with a solid margin, and the engine's feature rows must match
            // the plan's closed forms
            tx::EngineOpts eng{PrecisionConfig{bits}, opts.exec, 16};
            tx::ModelRuntime rt(model, eng.cfg);
            BigReal tol(bits);
            mpfr_set_ui_2exp(tol.raw(), 1, -(bits / 4), MPFR_RNDN);
            BigReal conf_floor(bits);
            mpfr_set_str(conf_floor.raw(), "0.3", 10, MPFR_RNDN);
            for (size_t si = 0; si < S.samples.size(); ++si) {
                tx::ForwardCapture cap;
                cap.capture_layer = plan.feature_layer;
                auto logits = tx::forward(rt, S.samples[si].x, eng, &cap);
                Symbol got = tx::classify_logits(logits);
                Symbol want = S.samples[si].y;
                if (got != want) throw Escalate{"verification miss on a sample"};
                if (tx::confidence(logits) < conf_floor) throw Escalate{"margin below floor"};
                const auto& row = cap.captured.back();
                const auto& planrow = fd.rows[fd.row_of_sample[si]];
                for (int c = 0; c < dim; ++c) {
                    BigReal d = (row[static_cast<size_t>(c)] - planrow[static_cast<size_t>(c)]).abs();
                    if (!(d <= tol)) throw Escalate{"feature row deviates from the plan"};
                }
            }
            return SynthResult{std::move(model), std::move(plan)};
        } catch (const Escalate& e) {
            last_reason = e.why;
            continue;
        }
    }
    throw make_error("EscalationExhausted",
                     "synthesis failed after precision escalation: " + last_reason);
}

} // namespace

SynthResult synth_no_cot(const Language& S, const SynthOptions& opts) {
    auto rep = memo::check_no_cot(S);
    if (!rep.holds) {
        std::string msg = "no-CoT memorizability condition fails";
        if (!rep.violations.empty()) {
            const auto& v = rep.violations.front();
            msg += ": constant sentences over one symbol with labels " + std::to_string(v.y1) +
                   " and " + std::to_string(v.y2);
        }
        throw make_error("Precondition", msg);
    }
    return synth_core(S, opts, false, "nocot");
}

SynthResult synth_no_cot_posenc(const Language& S, const SynthOptions& opts) {
    return synth_core(S, opts, true, "posenc");
}

AugmentedLanguage build_augmented_language(const Language& S, const memo::CheckOptions& check) {
    auto rep = memo::check_cot(S, check);
    if (!rep.holds)
        throw make_error("Precondition", "CoT memorizability condition fails (" +
                                             std::to_string(rep.empty_sx.size()) +
                                             " samples without witnesses, " +
                                             std::to_string(rep.class_conflicts.size()) +
                                             " class conflicts)");

    AugmentedLanguage out;

    // chosen witness per sample: constant-sentence classes use the shared
    // smallest first symbol, everything else the shortest-then-lex witness
    for (size_t si = 0; si < S.samples.size(); ++si) {
        const auto& e = rep.witnesses.entries[si];
        auto t = lang::typ(S.samples[si].x);
        Sentence best;
        if (t.size() == 1) {
            Symbol g = rep.class_common_first.at(*t.begin());
            best = e.witness_by_first.at(g);
        } else {
            bool first = true;
            for (const auto& [g, z] : e.witness_by_first) {
                if (first || lang::sentence_less(z, best)) best = z;
                first = false;
            }
        }
        out.witnesses.push_back(std::move(best));
    }

    // prefix samples: every (first k symbols of z, next symbol) pair, the
    // final one labeled with the stop outcome
    struct Entry {
        Sentence x;
        Symbol y;
        int origin_len;
    };
    std::vector<Entry> entries;
    for (size_t si = 0; si < S.samples.size(); ++si) {
        const Sentence& z = out.witnesses[si];
        const int n = static_cast<int>(S.samples[si].x.size());
        for (int k = n; k <= static_cast<int>(z.size()); ++k) {
            Sentence prefix(z.begin(), z.begin() + k);
            Symbol y = k < static_cast<int>(z.size()) ? z[static_cast<size_t>(k)] : lang::kStop;
            entries.push_back({std::move(prefix), y, n});
        }
    }
    // dedupe identical pairs, keeping the longest origin for tie-breaks
    std::map<std::pair<Sentence, Symbol>, int> uniq;
    for (const auto& e : entries) {
        auto key = std::make_pair(e.x, e.y);
        auto it = uniq.find(key);
        if (it == uniq.end()) uniq.emplace(key, e.origin_len);
        else it->second = std::max(it->second, e.origin_len);
    }
    entries.clear();
    for (const auto& [k, origin] : uniq) entries.push_back({k.first, k.second, origin});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.x != b.x) return lang::sentence_less(a.x, b.x);
        return a.y < b.y;
    });

    // removal loop: conflicting labels for one sentence drop the entries
    // that came from shorter original samples
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i + 1 < entries.size(); ++i) {
            size_t j = i + 1;
            if (entries[i].x != entries[j].x) continue;
            // group [i..j'] shares a sentence with conflicting labels
            size_t end = i;
            int maxlen = entries[i].origin_len;
            while (end + 1 < entries.size() && entries[end + 1].x == entries[i].x) {
                ++end;
                maxlen = std::max(maxlen, entries[end].origin_len);
            }
            if (end == i) continue;
            std::vector<Entry> keep;
            for (size_t k2 = i; k2 <= end; ++k2)
                if (entries[k2].origin_len == maxlen) keep.push_back(entries[k2]);
            if (keep.size() != 1)
                throw make_error("Internal", "conflicting prefix entries with equal origin length");
            entries.erase(entries.begin() + static_cast<long>(i), entries.begin() + static_cast<long>(end + 1));
            entries.insert(entries.begin() + static_cast<long>(i), keep.front());
            changed = true;
            break;
        }
    }

    std::vector<lang::Sample> samples;
    for (const auto& e : entries) samples.push_back({e.x, e.y});
    out.prefix_language = lang::validate_language(S.alphabet, std::move(samples), true);

    // the augmented language must satisfy the no-CoT condition
    auto nrep = memo::check_no_cot(out.prefix_language);
    if (!nrep.holds)
        throw make_error("Internal", "augmented language violates the no-CoT condition");
    return out;
}

std::vector<Symbol> replay_chain(const Language& prefix_language, const Sentence& x, int max_steps) {
    std::map<Sentence, Symbol> lut;
    for (const auto& s : prefix_language.samples) lut.emplace(s.x, s.y);
    std::vector<Symbol> out;
    Sentence cur = x;
    for (int step = 0; step < max_steps; ++step) {
        auto it = lut.find(cur);
        if (it == lut.end()) throw make_error("ReplayGap", "sentence not present in the prefix language");
        out.push_back(it->second);
        if (it->second == lang::kStop) return out;
        cur.push_back(it->second);
    }
    throw make_error("StepLimit", "replay chain did not stop");
}

SynthResult synth_cot(const Language& S, const SynthOptions& opts) {
    AugmentedLanguage aug = build_augmented_language(S, opts.check);
    SynthResult r = synth_core(aug.prefix_language, opts, false, "cot");
    const int L = S.max_len();
    r.model.prov.max_len_hint = L;
    r.plan.witnesses = aug.witnesses;
    r.plan.prefix_language = aug.prefix_language;

    // CoT verification: every original sample reproduces its label within
    // L+3 steps and replays the stored chain symbol for symbol
    tx::EngineOpts eng{PrecisionConfig{r.plan.precision_bits}, opts.exec, L + 3};
    tx::ModelRuntime rt(r.model, eng.cfg);
    for (const auto& smp : S.samples) {
        auto trace = tx::cot_generate(rt, smp.x, eng);
        if (!trace.terminated || trace.final_label != smp.y)
            throw make_error("VerifyFailed", "CoT trace does not reproduce the label");
        auto chain = replay_chain(aug.prefix_language, smp.x, L + 3);
        if (chain.size() != trace.steps.size())
            throw make_error("VerifyFailed", "trace length differs from the stored chain");
        for (size_t k = 0; k < chain.size(); ++k)
            if (trace.steps[k].symbol != chain[k])
                throw make_error("VerifyFailed", "trace deviates from the stored chain");
    }
    return r;
}

} // namespace memoforge::synth
