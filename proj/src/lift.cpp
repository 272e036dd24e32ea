#include "memoforge/lift.hpp"

namespace memoforge::synth {

using tx::Layer;
using tx::SparseMat;

namespace {

Layer plain_layer(SparseMat w_res, int q) {
    Layer l;
    int w = w_res.cols;
    l.w_res = std::move(w_res);
    l.w_res.sort_entries();
    l.fnn.e1 = SparseMat::zero(w, w);
    l.fnn.e2 = SparseMat::zero(w, w);
    l.fnn.b.assign(static_cast<size_t>(w), fixed_from_int(0, q));
    return l;
}

} // namespace

std::vector<Layer> lift_fnn(const fnn::FnnNet& net, int d_pass) {
    const int q = net.q;
    std::vector<Layer> out;
    int a = net.input_width; // width of the live net block
    for (const auto& nl : net.layers) {
        const int S = d_pass;
        const int b = nl.w.cols;
        if (nl.w.rows != a) throw make_error("Schema", "fnn layer width chain broken");

        // widen: [pass | a] -> [pass | a | 0^b]
        SparseMat w1 = SparseMat::zero(S + a, S + a + b);
        for (int i = 0; i < S + a; ++i) w1.add(i, i, fixed_from_int(1, q));
        out.push_back(plain_layer(std::move(w1), q));

        // compute: FNN block writes Relu(x*w + b) into the appended zeros
        Layer l2 = plain_layer(SparseMat::ident(S + a + b, q), q);
        l2.fnn.e1 = SparseMat::zero(S + a + b, S + a + b);
        for (const auto& e : nl.w.nz) l2.fnn.e1.add(S + e.r, S + a + e.c, e.w);
        l2.fnn.e1.sort_entries();
        l2.fnn.e2 = SparseMat::zero(S + a + b, S + a + b);
        for (int j = 0; j < b; ++j) l2.fnn.e2.add(S + a + j, S + a + j, fixed_from_int(1, q));
        l2.fnn.e2.sort_entries();
        for (int j = 0; j < b; ++j) l2.fnn.b[static_cast<size_t>(S + a + j)] = nl.b[static_cast<size_t>(j)];
        out.push_back(std::move(l2));

        // narrow: drop the consumed inputs
        SparseMat w3 = SparseMat::zero(S + a + b, S + b);
        for (int i = 0; i < S; ++i) w3.add(i, i, fixed_from_int(1, q));
        for (int j = 0; j < b; ++j) w3.add(S + a + j, S + j, fixed_from_int(1, q));
        out.push_back(plain_layer(std::move(w3), q));

        a = b;
    }
    return out;
}

std::vector<Layer> lift_fnn_on_columns(const fnn::FnnNet& net, int state_width,
                                       const std::vector<int>& in_cols,
                                       const std::vector<int>& out_cols) {
    const int q = net.q;
    if (static_cast<int>(in_cols.size()) != net.input_width)
        throw make_error("Schema", "in_cols size != net input width");
    if (static_cast<int>(out_cols.size()) != net.output_width())
        throw make_error("Schema", "out_cols size != net output width");

    std::vector<Layer> out;
    // gather: [state] -> [state | selected inputs]
    {
        SparseMat g = SparseMat::zero(state_width, state_width + net.input_width);
        for (int i = 0; i < state_width; ++i) g.add(i, i, fixed_from_int(1, q));
        for (size_t j = 0; j < in_cols.size(); ++j)
            g.add(in_cols[j], state_width + static_cast<int>(j), fixed_from_int(1, q));
        out.push_back(plain_layer(std::move(g), q));
    }
    auto body = lift_fnn(net, state_width);
    out.insert(out.end(), std::make_move_iterator(body.begin()), std::make_move_iterator(body.end()));
    // scatter: outputs overwrite out_cols, net block dropped
    {
        const int b = net.output_width();
        SparseMat s = SparseMat::zero(state_width + b, state_width);
        std::vector<bool> replaced(static_cast<size_t>(state_width), false);
        for (int c : out_cols) replaced[static_cast<size_t>(c)] = true;
        for (int i = 0; i < state_width; ++i)
            if (!replaced[static_cast<size_t>(i)]) s.add(i, i, fixed_from_int(1, q));
        for (size_t j = 0; j < out_cols.size(); ++j)
            s.add(state_width + static_cast<int>(j), out_cols[j], fixed_from_int(1, q));
        out.push_back(plain_layer(std::move(s), q));
    }
    return out;
}

} // namespace memoforge::synth
