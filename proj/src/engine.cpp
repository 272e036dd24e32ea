#include <omp.h>

#include <map>
#include <string>

#include "memoforge/txmodel.hpp"

namespace memoforge::tx {

namespace {

ModelRuntime::RtMat to_rt(const SparseMat& m, long prec) {
    ModelRuntime::RtMat r;
    r.rows = m.rows;
    r.cols = m.cols;
    r.nz.reserve(m.nz.size());
    for (const auto& e : m.nz) r.nz.push_back({e.r, e.c, BigReal::from_fixed(e.w, prec)});
    return r;
}

std::vector<BigReal> to_rt_vec(const DenseVec& v, long prec) {
    std::vector<BigReal> out;
    out.reserve(v.size());
    for (const auto& f : v) out.push_back(BigReal::from_fixed(f, prec));
    return out;
}

using Row = std::vector<BigReal>;

Row zero_row(int w, long prec) { return Row(static_cast<size_t>(w), BigReal(prec)); }

// acc += x * M (row vector times sparse matrix); entry order (r,c) fixes
// the accumulation order, so results are policy-independent.
void accum_vecmat(Row& acc, const Row& x, const ModelRuntime::RtMat& m) {
    for (const auto& e : m.nz)
        acc[static_cast<size_t>(e.c)] =
            acc[static_cast<size_t>(e.c)] + x[static_cast<size_t>(e.r)] * e.w;
}

// acc += M * x (sparse matrix times column vector)
void accum_matvec(Row& acc, const ModelRuntime::RtMat& m, const Row& x) {
    for (const auto& e : m.nz)
        acc[static_cast<size_t>(e.r)] =
            acc[static_cast<size_t>(e.r)] + e.w * x[static_cast<size_t>(e.c)];
}

// exp with a per-row memo; correctly rounded either way, the memo only
// avoids recomputing identical score differences
const BigReal& memo_exp(std::map<std::string, BigReal>& memo, const BigReal& x) {
    std::string key = x.to_hex();
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    return memo.emplace(std::move(key), x.exp()).first->second;
}

} // namespace

ModelRuntime::ModelRuntime(const TransformerModel& m, const PrecisionConfig& cfg)
    : model_(&m), cfg_(cfg) {
    if (!cfg.valid()) throw make_error("Range", "mantissa_bits must be >= 64");
    validate_model(m);
    const long prec = cfg.mantissa_bits;
    for (const auto& e : m.embeddings) embed.push_back(to_rt_vec(e, prec));
    for (const auto& e : m.posenc) pos.push_back(to_rt_vec(e, prec));
    for (const auto& l : m.layers) {
        RtLayer rl;
        rl.w_res = to_rt(l.w_res, prec);
        for (const auto& h : l.heads) rl.heads.push_back({to_rt(h.q, prec), to_rt(h.k, prec), to_rt(h.v, prec)});
        rl.e1 = to_rt(l.fnn.e1, prec);
        rl.e2 = to_rt(l.fnn.e2, prec);
        rl.b = to_rt_vec(l.fnn.b, prec);
        layers.push_back(std::move(rl));
    }
    for (const auto& r : m.w_out) w_out.push_back(to_rt_vec(r, prec));
    b_out = to_rt_vec(m.b_out, prec);
}

std::vector<BigReal> forward(const ModelRuntime& rt, const Sentence& x, const EngineOpts& opts,
                             ForwardCapture* cap) {
    const auto& shape = rt.model().shape;
    const long prec = rt.cfg().mantissa_bits;
    const int n = static_cast<int>(x.size());
    if (n < 1) throw make_error("EmptySentence", "forward needs a nonempty sentence");
    for (Symbol t : x)
        if (t < 1 || t > shape.T) throw make_error("BadSymbolIndex", "token " + std::to_string(t));
    if (shape.use_posenc && n > shape.max_positions)
        throw make_error("PositionOverflow",
                         "length " + std::to_string(n) + " > max_positions " +
                             std::to_string(shape.max_positions));

    const bool par = opts.exec == Exec::Parallel;

    // embedding rows (plus position encoding when enabled)
    std::vector<Row> X(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        X[static_cast<size_t>(k)] = rt.embed[static_cast<size_t>(x[static_cast<size_t>(k)] - 1)];
        if (shape.use_posenc) {
            Row& r = X[static_cast<size_t>(k)];
            const Row& p = rt.pos[static_cast<size_t>(k)];
            for (size_t c = 0; c < r.size(); ++c) r[c] = r[c] + p[c];
        }
    }
    if (cap && cap->capture_all) cap->all_states.push_back(X);

    for (size_t li = 0; li < rt.layers.size(); ++li) {
        const auto& L = rt.layers[li];
        const int w = L.w_res.cols;

        // residual transition, per row
        std::vector<Row> B(static_cast<size_t>(n));
        #pragma omp parallel for schedule(static) if (par)
        for (int k = 0; k < n; ++k) {
            Row acc = zero_row(w, prec);
            accum_vecmat(acc, X[static_cast<size_t>(k)], L.w_res);
            B[static_cast<size_t>(k)] = std::move(acc);
        }

        // attention heads, summed in head order
        for (const auto& head : L.heads) {
            if (head.v.empty()) continue; // exact-zero contribution

            std::vector<Row> Xv(static_cast<size_t>(n));
            #pragma omp parallel for schedule(static) if (par)
            for (int k = 0; k < n; ++k) {
                Row acc = zero_row(w, prec);
                accum_vecmat(acc, X[static_cast<size_t>(k)], head.v);
                Xv[static_cast<size_t>(k)] = std::move(acc);
            }

            if (head.q.empty() || head.k.empty()) {
                // scores are identically zero: softmax(0 + M) is the causal
                // running mean; exp(0)=1 and integer denominators keep this
                // bit-identical to the general path
                Row prefix = zero_row(w, prec);
                for (int k = 0; k < n; ++k) {
                    for (int c = 0; c < w; ++c)
                        prefix[static_cast<size_t>(c)] =
                            prefix[static_cast<size_t>(c)] + Xv[static_cast<size_t>(k)][static_cast<size_t>(c)];
                    BigReal denom = BigReal::from_long(k + 1, prec);
                    Row& out = B[static_cast<size_t>(k)];
                    for (int c = 0; c < w; ++c)
                        out[static_cast<size_t>(c)] =
                            out[static_cast<size_t>(c)] + prefix[static_cast<size_t>(c)] / denom;
                }
            } else {
                std::vector<Row> Y(static_cast<size_t>(n)), Z(static_cast<size_t>(n));
                #pragma omp parallel for schedule(static) if (par)
                for (int k = 0; k < n; ++k) {
                    Row y = zero_row(w, prec);
                    accum_vecmat(y, X[static_cast<size_t>(k)], head.q);
                    Y[static_cast<size_t>(k)] = std::move(y);
                    Row z = zero_row(w, prec);
                    accum_matvec(z, head.k, X[static_cast<size_t>(k)]);
                    Z[static_cast<size_t>(k)] = std::move(z);
                }
                #pragma omp parallel for schedule(dynamic) if (par)
                for (int k = 0; k < n; ++k) {
                    // scores for j <= k; -inf mask entries never enter
                    std::vector<BigReal> s(static_cast<size_t>(k + 1), BigReal(prec));
                    for (int j = 0; j <= k; ++j) {
                        BigReal dot(prec);
                        for (int c = 0; c < w; ++c)
                            dot = dot + Y[static_cast<size_t>(k)][static_cast<size_t>(c)] *
                                            Z[static_cast<size_t>(j)][static_cast<size_t>(c)];
                        s[static_cast<size_t>(j)] = std::move(dot);
                    }
                    const BigReal* mx = &s[0];
                    for (int j = 1; j <= k; ++j)
                        if (s[static_cast<size_t>(j)] > *mx) mx = &s[static_cast<size_t>(j)];
                    BigReal rowmax = *mx;
                    std::map<std::string, BigReal> memo;
                    Row wsum = zero_row(w, prec);
                    BigReal denom(prec);
                    for (int j = 0; j <= k; ++j) {
                        const BigReal& e = memo_exp(memo, s[static_cast<size_t>(j)] - rowmax);
                        denom = denom + e;
                        for (int c = 0; c < w; ++c)
                            wsum[static_cast<size_t>(c)] =
                                wsum[static_cast<size_t>(c)] +
                                e * Xv[static_cast<size_t>(j)][static_cast<size_t>(c)];
                    }
                    Row& out = B[static_cast<size_t>(k)];
                    for (int c = 0; c < w; ++c)
                        out[static_cast<size_t>(c)] =
                            out[static_cast<size_t>(c)] + wsum[static_cast<size_t>(c)] / denom;
                }
            }
        }

        // FNN on the post-attention state, then the residual sum
        std::vector<Row> Xn(static_cast<size_t>(n));
        #pragma omp parallel for schedule(static) if (par)
        for (int k = 0; k < n; ++k) {
            const Row& b = B[static_cast<size_t>(k)];
            Row t = L.b; // bias start, then accumulate B*E1 on top
            accum_vecmat(t, b, L.e1);
            for (int c = 0; c < w; ++c) t[static_cast<size_t>(c)] = t[static_cast<size_t>(c)].relu();
            Row f = zero_row(w, prec);
            accum_vecmat(f, t, L.e2);
            Row outr = zero_row(w, prec);
            for (int c = 0; c < w; ++c)
                outr[static_cast<size_t>(c)] = b[static_cast<size_t>(c)] + f[static_cast<size_t>(c)];
            Xn[static_cast<size_t>(k)] = std::move(outr);
        }
        X = std::move(Xn);

        if (cap && cap->capture_all) cap->all_states.push_back(X);
        if (cap && cap->capture_layer == static_cast<int>(li)) cap->captured = X;
    }

    auto readout = [&](const Row& row) {
        std::vector<BigReal> logits;
        logits.reserve(rt.w_out.size());
        for (size_t j = 0; j < rt.w_out.size(); ++j) {
            BigReal acc = rt.b_out[j];
            const auto& wr = rt.w_out[j];
            for (size_t c = 0; c < wr.size(); ++c) acc = acc + wr[c] * row[c];
            logits.push_back(std::move(acc));
        }
        return logits;
    };

    if (cap && cap->row_logits) {
        cap->logits_per_row.clear();
        for (int k = 0; k < n; ++k) cap->logits_per_row.push_back(readout(X[static_cast<size_t>(k)]));
    }
    return readout(X[static_cast<size_t>(n - 1)]);
}

std::vector<BigReal> forward(const TransformerModel& m, const Sentence& x, const EngineOpts& opts,
                             ForwardCapture* cap) {
    ModelRuntime rt(m, opts.cfg);
    return forward(rt, x, opts, cap);
}

Symbol classify_logits(const std::vector<BigReal>& logits) {
    size_t best = 0;
    for (size_t j = 1; j < logits.size(); ++j)
        if (logits[j] > logits[best]) best = j; // strict: smallest index wins ties
    return best + 1 == logits.size() ? lang::kStop : static_cast<Symbol>(best + 1);
}

Symbol classify(const TransformerModel& m, const Sentence& x, const EngineOpts& opts) {
    return classify_logits(forward(m, x, opts));
}

BigReal confidence(const std::vector<BigReal>& logits) {
    size_t best = 0;
    for (size_t j = 1; j < logits.size(); ++j)
        if (logits[j] > logits[best]) best = j;
    bool first = true;
    BigReal second;
    for (size_t j = 0; j < logits.size(); ++j) {
        if (j == best) continue;
        if (first || logits[j] > second) second = logits[j];
        first = false;
    }
    return logits[best] - second;
}

CoTTrace cot_generate(const ModelRuntime& rt, const Sentence& x, const EngineOpts& opts) {
    CoTTrace trace;
    Sentence cur = x;
    for (int step = 0;; ++step) {
        if (step >= opts.max_steps)
            throw make_error("StepLimit", "no stop symbol within " + std::to_string(opts.max_steps) + " steps");
        auto logits = forward(rt, cur, opts);
        Symbol y = classify_logits(logits);
        CoTStep st;
        st.symbol = y;
        st.confidence = confidence(logits);
        st.logits = std::move(logits);
        trace.steps.push_back(std::move(st));
        if (y == lang::kStop) {
            if (cur.size() == x.size())
                throw make_error("EmptyCoT", "first prediction is the stop symbol");
            trace.terminated = true;
            trace.final_label = cur.back();
            return trace;
        }
        cur.push_back(y);
    }
}

CoTTrace cot_generate(const TransformerModel& m, const Sentence& x, const EngineOpts& opts) {
    ModelRuntime rt(m, opts.cfg);
    return cot_generate(rt, x, opts);
}

} // namespace memoforge::tx
