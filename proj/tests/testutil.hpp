#pragma once

#include "memoforge/rng.hpp"
#include "memoforge/txmodel.hpp"

namespace testutil {

using namespace memoforge;

// random dense model with moderate weights (mantissa within +-10^(q+1),
// so activations stay far from the rounding-error bound checks); pass an
// explicit mantissa cap for experiments that need a small score range
inline tx::TransformerModel random_model(int T, int W, int D, int H, int q, std::uint64_t seed,
                                         std::int64_t mant_cap = -1) {
    Rng rng(seed);
    std::int64_t cap = mant_cap > 0 ? mant_cap : pow10_i64(q + 1);
    auto rmat = [&](int r, int c) {
        tx::SparseMat m = tx::SparseMat::zero(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m.add(i, j, make_fixed(rng.range(-cap, cap), q));
        m.sort_entries();
        return m;
    };
    auto rvec = [&](int n) {
        tx::DenseVec v;
        for (int i = 0; i < n; ++i) v.push_back(make_fixed(rng.range(-cap, cap), q));
        return v;
    };
    tx::TransformerModel m;
    m.shape = {T, W, D, W, H, q, false, 0};
    for (int i = 0; i < T; ++i) m.symbols.push_back(std::string(1, static_cast<char>('a' + i)));
    for (int i = 0; i < T; ++i) m.embeddings.push_back(rvec(W));
    for (int l = 0; l < D; ++l) {
        tx::Layer lay;
        lay.w_res = rmat(W, W);
        for (int h = 0; h < H; ++h) lay.heads.push_back({rmat(W, W), rmat(W, W), rmat(W, W)});
        lay.fnn.e1 = rmat(W, W);
        lay.fnn.b = rvec(W);
        lay.fnn.e2 = rmat(W, W);
        m.layers.push_back(std::move(lay));
    }
    for (int i = 0; i < T + 1; ++i) m.w_out.push_back(rvec(W));
    m.b_out = rvec(T + 1);
    return m;
}

// the closed-form one-dimensional averaging model: a single zero-score head
// turns the last hidden row into the running mean of the embeddings
// (1 for symbol a, 0 for symbol b); the first logit reads it out
inline tx::TransformerModel averaging_model() {
    int q = 3;
    tx::TransformerModel m;
    m.shape = {2, 1, 1, 1, 1, q, false, 0};
    m.symbols = {"a", "b"};
    m.embeddings = {{fixed_from_int(1, q)}, {fixed_from_int(0, q)}};
    tx::Layer l;
    l.w_res = tx::SparseMat::zero(1, 1);
    tx::HeadWeights h;
    h.q = tx::SparseMat::zero(1, 1);
    h.k = tx::SparseMat::zero(1, 1);
    h.v = tx::SparseMat::ident(1, q);
    l.heads.push_back(std::move(h));
    l.fnn.e1 = tx::SparseMat::zero(1, 1);
    l.fnn.e2 = tx::SparseMat::zero(1, 1);
    l.fnn.b = {fixed_from_int(0, q)};
    m.layers.push_back(std::move(l));
    m.w_out = {{fixed_from_int(1, q)}, {fixed_from_int(0, q)}, {fixed_from_int(0, q)}};
    m.b_out = {fixed_from_int(0, q), fixed_from_int(0, q), fixed_from_int(0, q)};
    return m;
}

inline BigReal pow2_neg(long e, long prec = 256) {
    BigReal r(prec);
    mpfr_set_ui_2exp(r.raw(), 1, -e, MPFR_RNDN);
    return r;
}

} // namespace testutil
