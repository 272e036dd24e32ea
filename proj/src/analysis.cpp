#include "memoforge/analysis.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>

#include "memoforge/arith.hpp"

namespace memoforge::analysis {

namespace {

std::string mpz_to_string(const mpz_t z) {
    char* s = mpz_get_str(nullptr, 10, z);
    std::string out(s);
    void (*freefunc)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(s, out.size() + 1);
    return out;
}

} // namespace

int bigint_cmp(const BigInt& a, const BigInt& b) {
    mpz_t za, zb;
    mpz_init_set_str(za, a.dec.c_str(), 10);
    mpz_init_set_str(zb, b.dec.c_str(), 10);
    int c = mpz_cmp(za, zb);
    mpz_clear(za);
    mpz_clear(zb);
    return c < 0 ? -1 : c > 0 ? 1 : 0;
}

BigInt param_count(long W, long D, long H, long T) {
    if (W < 1 || D < 1 || H < 1 || T < 1)
        throw make_error("Range", "param_count needs W,D,H,T >= 1");
    mpz_t acc, t, w;
    mpz_init(acc);
    mpz_init(t);
    mpz_init_set_si(w, W);
    mpz_set_si(acc, T);
    mpz_mul_si(acc, acc, W); // TW
    mpz_set_si(t, T + 1);
    mpz_mul_si(t, t, W + 1);
    mpz_add(acc, acc, t); // + (T+1)(W+1)
    mpz_set_si(t, 3 * H + 3);
    mpz_mul_si(t, t, W);
    mpz_mul_si(t, t, W);
    mpz_add(t, t, w); // (3H+3)W^2 + W
    mpz_mul_si(t, t, D);
    mpz_add(acc, acc, t);
    BigInt out{mpz_to_string(acc)};
    mpz_clear(acc);
    mpz_clear(t);
    mpz_clear(w);
    return out;
}

BoundVerdict lower_bound_check(long N, long T, long q, long P, bool relaxed) {
    if (!relaxed && (N < 3 || T < 3 || q < 3))
        throw make_error("Range", "counting bound regime needs N,T,q >= 3 (use relaxed mode)");
    if (N < 1 || T < 1 || q < 1 || P < 1) throw make_error("Range", "N,T,q,P must be >= 1");

    BoundVerdict v;
    v.N = N;
    v.T = T;
    v.q = q;
    v.P = P;

    mpz_t lab, cap, t;
    mpz_init(lab);
    mpz_init(cap);
    mpz_init(t);
    mpz_ui_pow_ui(lab, static_cast<unsigned long>(T), static_cast<unsigned long>(N));
    mpz_ui_pow_ui(cap, 10, static_cast<unsigned long>(2 * q * P));
    mpz_set_si(t, P);
    mpz_mul_si(t, t, P);
    mpz_mul_si(t, t, P);
    mpz_mul(cap, cap, t);
    v.labelings.dec = mpz_to_string(lab);
    v.capacity.dec = mpz_to_string(cap);
    v.sufficient_in_principle = mpz_cmp(cap, lab) >= 0;
    mpz_clear(lab);
    mpz_clear(cap);
    mpz_clear(t);

    // min P with N ln T <= 6 q P, i.e. ceil(N ln T / (6q)); ln T is
    // irrational for T >= 2 so the ceiling is unambiguous at 512 bits
    {
        const long prec = 512;
        BigReal lnT = BigReal::from_long(T, prec).log();
        BigReal val = BigReal::from_long(N, prec) * lnT / BigReal::from_long(6 * q, prec);
        mpfr_t c;
        mpfr_init2(c, prec);
        mpfr_set(c, val.raw(), MPFR_RNDN);
        mpfr_ceil(c, c);
        long p = mpfr_get_si(c, MPFR_RNDN);
        mpfr_clear(c);
        if (p < 1) p = 1;
        v.min_P_threshold = p;
    }
    return v;
}

MicroSearchResult exhaustive_micro_search(int T, int q, const std::vector<std::int64_t>& mantissas,
                                          const std::vector<Sentence>& sentences,
                                          const tx::EngineOpts& opts) {
    if (T < 1 || q < 1 || mantissas.empty() || sentences.empty())
        throw make_error("Range", "micro search needs T,q >= 1, choices, and sentences");
    const int n_params = 3 * T + 9; // W=D=H=1: embeddings T, layer 7, output 2(T+1)
    {
        long double total = 1;
        for (int i = 0; i < n_params; ++i) {
            total *= static_cast<long double>(mantissas.size());
            if (total > 1e7)
                throw make_error("Budget", "micro search beyond 10^7 candidate models");
        }
    }
    for (std::int64_t m : mantissas)
        (void)make_fixed(m, q); // range-check the grid itself

    MicroSearchResult out;
    out.capacity = [&] {
        // para(1,1,1,T) = 3T + 9 parameters
        mpz_t cap, t;
        mpz_init(cap);
        mpz_init(t);
        long P = n_params;
        mpz_ui_pow_ui(cap, 10, static_cast<unsigned long>(2 * q * P));
        mpz_set_si(t, P);
        mpz_mul_si(t, t, P);
        mpz_mul_si(t, t, P);
        mpz_mul(cap, cap, t);
        BigInt b{mpz_to_string(cap)};
        mpz_clear(cap);
        mpz_clear(t);
        return b;
    }();

    // template model; the enumeration rewrites its parameter slots in place
    tx::TransformerModel m;
    m.shape = {T, 1, 1, 1, 1, q, false, 0};
    for (int i = 0; i < T; ++i) m.symbols.push_back("s" + std::to_string(i + 1));
    for (int i = 0; i < T; ++i) m.embeddings.push_back({fixed_from_int(0, q)});
    {
        tx::Layer l;
        l.w_res = tx::SparseMat::zero(1, 1);
        l.w_res.nz.push_back({0, 0, fixed_from_int(0, q)});
        tx::HeadWeights h;
        for (auto* mat : {&h.q, &h.k, &h.v}) {
            *mat = tx::SparseMat::zero(1, 1);
            mat->nz.push_back({0, 0, fixed_from_int(0, q)});
        }
        l.heads.push_back(std::move(h));
        for (auto* mat : {&l.fnn.e1, &l.fnn.e2}) {
            *mat = tx::SparseMat::zero(1, 1);
            mat->nz.push_back({0, 0, fixed_from_int(0, q)});
        }
        l.fnn.b = {fixed_from_int(0, q)};
        m.layers.push_back(std::move(l));
    }
    for (int i = 0; i < T + 1; ++i) m.w_out.push_back({fixed_from_int(0, q)});
    m.b_out.assign(static_cast<size_t>(T + 1), fixed_from_int(0, q));

    std::vector<FixedDecimal*> slots;
    for (auto& e : m.embeddings) slots.push_back(&e[0]);
    auto& l = m.layers[0];
    slots.push_back(&l.w_res.nz[0].w);
    slots.push_back(&l.heads[0].q.nz[0].w);
    slots.push_back(&l.heads[0].k.nz[0].w);
    slots.push_back(&l.heads[0].v.nz[0].w);
    slots.push_back(&l.fnn.e1.nz[0].w);
    slots.push_back(&l.fnn.b[0]);
    slots.push_back(&l.fnn.e2.nz[0].w);
    for (auto& r : m.w_out) slots.push_back(&r[0]);
    for (auto& b : m.b_out) slots.push_back(&b);
    if (static_cast<int>(slots.size()) != n_params)
        throw make_error("Internal", "parameter slot count mismatch");

    std::set<std::vector<Symbol>> behaviors;
    std::vector<size_t> idx(slots.size(), 0);
    while (true) {
        for (size_t i = 0; i < slots.size(); ++i) *slots[i] = make_fixed(mantissas[idx[i]], q);
        // exact-zero entries are skipped by the engine either way
        tx::TransformerModel probe = m;
        for (auto& lay : probe.layers) {
            auto scrub = [](tx::SparseMat& s) {
                s.nz.erase(std::remove_if(s.nz.begin(), s.nz.end(),
                                          [](const tx::SparseMat::Nz& e) { return e.w.is_zero(); }),
                           s.nz.end());
            };
            scrub(lay.w_res);
            for (auto& h : lay.heads) { scrub(h.q); scrub(h.k); scrub(h.v); }
            scrub(lay.fnn.e1);
            scrub(lay.fnn.e2);
        }
        tx::ModelRuntime rt(probe, opts.cfg);
        std::vector<Symbol> tuple;
        for (const auto& x : sentences) tuple.push_back(tx::classify_logits(tx::forward(rt, x, opts)));
        behaviors.insert(std::move(tuple));
        ++out.candidates;

        size_t k = 0;
        while (k < idx.size() && ++idx[k] == mantissas.size()) idx[k++] = 0;
        if (k == idx.size()) break;
    }
    out.distinct_behaviors = static_cast<long long>(behaviors.size());
    return out;
}

std::pair<Sentence, Sentence> family_pair(Family family, long i) {
    if (i < 2) throw make_error("Range", "family index must be >= 2");
    if (family == Family::S) {
        Sentence x1(static_cast<size_t>(i + 1), 1);
        x1[static_cast<size_t>(i - 1)] = 2;
        Sentence x2(static_cast<size_t>(i), 1);
        return {x1, x2};
    }
    // four-symbol family: the two prompts whose logit gap must vanish
    Sentence z1(static_cast<size_t>(i + 1), 1);
    Sentence z2(static_cast<size_t>(i), 1);
    z2.push_back(4);
    z2.push_back(1);
    return {z1, z2};
}

ConvergenceSeries convergence_experiment(const tx::TransformerModel& model, Family family,
                                         const std::vector<long>& i_list,
                                         const tx::EngineOpts& opts) {
    const int needT = family == Family::S ? 2 : 4;
    if (model.shape.T != needT)
        throw make_error("AlphabetMismatch",
                         "family needs T=" + std::to_string(needT) + ", model has T=" +
                             std::to_string(model.shape.T));
    for (size_t k = 1; k < i_list.size(); ++k)
        if (i_list[k] <= i_list[k - 1])
            throw make_error("Range", "indices must be strictly increasing");
    ConvergenceSeries out;
    out.family = family == Family::S ? "S" : "S'";
    out.indices = i_list;
    out.distances.assign(i_list.size(), BigReal(opts.cfg.mantissa_bits));

    tx::ModelRuntime rt(model, opts.cfg);
    std::exception_ptr err = nullptr;
    #pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < static_cast<long>(i_list.size()); ++k) {
        if (err) continue;
        try {
            auto [x1, x2] = family_pair(family, i_list[static_cast<size_t>(k)]);
            auto l1 = tx::forward(rt, x1, opts);
            auto l2 = tx::forward(rt, x2, opts);
            BigReal d(opts.cfg.mantissa_bits);
            for (size_t j = 0; j < l1.size(); ++j) d = d + (l1[j] - l2[j]).abs();
            out.distances[static_cast<size_t>(k)] = std::move(d);
        } catch (...) {
            #pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

std::vector<ConfidencePoint> arith_confidence_experiment(const tx::TransformerModel& model, int p,
                                                         int i_max, const tx::EngineOpts& opts) {
    lang::Alphabet want = arith::arith_alphabet(p);
    if (model.symbols != want.symbols)
        throw make_error("AlphabetMismatch", "model alphabet is not the arithmetic alphabet for p");
    tx::ModelRuntime rt(model, opts.cfg);
    std::vector<ConfidencePoint> out;
    std::vector<BigReal> prev;
    for (int i = 1; i <= i_max; ++i) {
        Sentence x;
        for (int k = 0; k < i; ++k) {
            if (k) x.push_back(arith::sym_plus(p));
            x.push_back(arith::digit_sym(1));
        }
        auto logits = tx::forward(rt, x, opts);
        ConfidencePoint pt;
        pt.i = i;
        pt.predicted = tx::classify_logits(logits);
        pt.confidence = tx::confidence(logits);
        BigReal d(opts.cfg.mantissa_bits);
        if (!prev.empty())
            for (size_t j = 0; j < logits.size(); ++j) d = d + (logits[j] - prev[j]).abs();
        pt.dist_prev = std::move(d);
        prev = logits;
        out.push_back(std::move(pt));
    }
    return out;
}

VerifyReport verify_memorization(const tx::TransformerModel& model, const Language& S,
                                 VerifyMode mode, const tx::EngineOpts& opts) {
    if (model.symbols != S.alphabet.symbols)
        throw make_error("AlphabetMismatch", "model and language alphabets differ");

    tx::ModelRuntime rt(model, opts.cfg);
    VerifyReport rep;
    rep.total = S.sample_count();
    rep.results.assign(S.samples.size(), SampleResult{});

    tx::EngineOpts run = opts;
    if (mode == VerifyMode::Cot) {
        int L = model.prov.max_len_hint.value_or(S.max_len());
        run.max_steps = std::max(opts.max_steps, L + 3);
    }

    std::exception_ptr err = nullptr;
    #pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(S.samples.size()); ++i) {
        if (err) continue;
        const auto& smp = S.samples[static_cast<size_t>(i)];
        SampleResult r;
        r.x = smp.x;
        r.expected = smp.y;
        try {
            if (mode == VerifyMode::NoCot) {
                auto logits = tx::forward(rt, smp.x, run);
                r.got = tx::classify_logits(logits);
                r.confidence = tx::confidence(logits);
            } else {
                auto trace = tx::cot_generate(rt, smp.x, run);
                r.got = trace.final_label;
                r.steps = static_cast<int>(trace.steps.size());
                bool first = true;
                for (const auto& st : trace.steps) {
                    if (first || st.confidence < r.confidence) r.confidence = st.confidence;
                    first = false;
                }
            }
            r.ok = r.got == r.expected;
        } catch (const Error& e) {
            // a run that never stops (or stops immediately) fails the sample;
            // anything else is an operational error
            if (e.code() == "StepLimit" || e.code() == "EmptyCoT") {
                r.got = 0;
                r.ok = false;
                r.confidence = BigReal(run.cfg.mantissa_bits);
            } else {
                #pragma omp critical
                if (!err) err = std::current_exception();
            }
        } catch (...) {
            #pragma omp critical
            if (!err) err = std::current_exception();
        }
        rep.results[static_cast<size_t>(i)] = std::move(r);
    }
    if (err) std::rethrow_exception(err);

    bool first = true;
    for (const auto& r : rep.results) {
        if (r.ok) ++rep.correct;
        if (first || r.confidence < rep.min_confidence) rep.min_confidence = r.confidence;
        first = false;
    }
    rep.accuracy = rep.total ? static_cast<double>(rep.correct) / rep.total : 0.0;
    return rep;
}

} // namespace memoforge::analysis
