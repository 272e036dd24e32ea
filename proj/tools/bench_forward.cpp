// Compares the serial reference engine against the OpenMP kernels on a
// synthetic workload and checks that the results are bit-identical.
#include <chrono>
#include <iostream>

#include "memoforge/rng.hpp"
#include "memoforge/txmodel.hpp"

using namespace memoforge;

namespace {

tx::TransformerModel random_model(int T, int W, int D, int H, int q, std::uint64_t seed) {
    Rng rng(seed);
    auto rmat = [&](int r, int c) {
        tx::SparseMat m = tx::SparseMat::zero(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                m.add(i, j, make_fixed(rng.range(-pow10_i64(q), pow10_i64(q)), q));
        m.sort_entries();
        return m;
    };
    auto rvec = [&](int n) {
        tx::DenseVec v;
        for (int i = 0; i < n; ++i) v.push_back(make_fixed(rng.range(-pow10_i64(q), pow10_i64(q)), q));
        return v;
    };
    tx::TransformerModel m;
    m.shape = {T, W, D, W, H, q, false, 0};
    for (int i = 0; i < T; ++i) m.symbols.push_back("s" + std::to_string(i + 1));
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

} // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 192;
    int W = argc > 2 ? std::atoi(argv[2]) : 8;
    int D = argc > 3 ? std::atoi(argv[3]) : 4;

    tx::TransformerModel m = random_model(3, W, D, 2, 2, 42);
    lang::Sentence x;
    Rng rng(7);
    for (int i = 0; i < n; ++i) x.push_back(1 + static_cast<int>(rng.below(3)));

    PrecisionConfig cfg{256};
    tx::ModelRuntime rt(m, cfg);

    auto time_policy = [&](tx::Exec exec) {
        tx::EngineOpts opts{cfg, exec, 16};
        auto t0 = std::chrono::steady_clock::now();
        auto logits = tx::forward(rt, x, opts);
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
        return std::make_pair(std::move(logits), ms);
    };

    auto [serial, t_serial] = time_policy(tx::Exec::Serial);
    auto [parallel, t_parallel] = time_policy(tx::Exec::Parallel);

    bool same = serial.size() == parallel.size();
    for (size_t i = 0; same && i < serial.size(); ++i) same = serial[i].bit_equal(parallel[i]);

    std::cout << "rows=" << n << " width=" << W << " depth=" << D << "\n"
              << "serial   " << t_serial << " ms\n"
              << "parallel " << t_parallel << " ms\n"
              << "bit-identical: " << (same ? "yes" : "NO") << "\n";
    return same ? 0 : 1;
}
