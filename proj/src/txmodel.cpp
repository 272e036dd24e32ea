#include "memoforge/txmodel.hpp"

#include <algorithm>

namespace memoforge::tx {

SparseMat SparseMat::ident(int n, int q) {
    SparseMat m{n, n, {}};
    for (int i = 0; i < n; ++i) m.nz.push_back({i, i, fixed_from_int(1, q)});
    return m;
}

void SparseMat::add(int r, int c, const FixedDecimal& w) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
        throw make_error("Schema", "matrix entry out of bounds");
    if (w.is_zero()) return;
    nz.push_back({r, c, w});
}

void SparseMat::sort_entries() {
    std::sort(nz.begin(), nz.end(), [](const Nz& a, const Nz& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    for (size_t i = 1; i < nz.size(); ++i)
        if (nz[i].r == nz[i - 1].r && nz[i].c == nz[i - 1].c)
            throw make_error("Schema", "duplicate matrix entry");
}

lang::Alphabet TransformerModel::alphabet() const {
    lang::Alphabet a;
    a.symbols = symbols;
    return a;
}

long long TransformerModel::declared_parameter_slots(bool include_posenc) const {
    long long n = 0;
    for (const auto& e : embeddings) n += static_cast<long long>(e.size());
    if (include_posenc)
        for (const auto& e : posenc) n += static_cast<long long>(e.size());
    for (const auto& l : layers) {
        n += l.w_res.slot_count();
        for (const auto& h : l.heads) n += h.q.slot_count() + h.k.slot_count() + h.v.slot_count();
        n += l.fnn.e1.slot_count() + l.fnn.e2.slot_count() + static_cast<long long>(l.fnn.b.size());
    }
    for (const auto& r : w_out) n += static_cast<long long>(r.size());
    n += static_cast<long long>(b_out.size());
    return n;
}

bool TransformerModel::uniform_shape() const {
    if (shape.d != shape.W) return false;
    for (const auto& l : layers) {
        if (l.width_in() != shape.W || l.width_out() != shape.W) return false;
        if (static_cast<int>(l.heads.size()) != shape.H) return false;
    }
    return true;
}

static void check_fixed(const FixedDecimal& f, int q, const char* what) {
    if (f.digits != q)
        throw make_error("PrecisionViolation", std::string(what) + ": digits != q");
    std::int64_t cap = pow10_i64(2 * q);
    if (f.mantissa > cap || f.mantissa < -cap)
        throw make_error("PrecisionViolation", std::string(what) + ": |value| > 10^q");
}

static void check_mat(const SparseMat& m, int rows, int cols, int q, const char* what) {
    if (m.rows != rows || m.cols != cols)
        throw make_error("Schema", std::string(what) + ": expected " + std::to_string(rows) + "x" +
                                       std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                                       std::to_string(m.cols));
    for (const auto& e : m.nz) {
        if (e.r < 0 || e.r >= rows || e.c < 0 || e.c >= cols)
            throw make_error("Schema", std::string(what) + ": entry out of bounds");
        check_fixed(e.w, q, what);
    }
}

void validate_model(const TransformerModel& m) {
    const auto& s = m.shape;
    if (s.T < 1 || s.d < 1 || s.W < 1 || s.H < 1 || s.q < 1)
        throw make_error("Schema", "shape fields must be >= 1");
    if (static_cast<int>(m.symbols.size()) != s.T)
        throw make_error("Schema", "symbol table size != T");
    if (static_cast<int>(m.embeddings.size()) != s.T)
        throw make_error("Schema", "embedding count != T");
    for (const auto& e : m.embeddings) {
        if (static_cast<int>(e.size()) != s.d) throw make_error("Schema", "embedding width != d");
        for (const auto& w : e) check_fixed(w, s.q, "embedding");
    }
    if (s.use_posenc) {
        if (static_cast<int>(m.posenc.size()) != s.max_positions)
            throw make_error("Schema", "posenc rows != max_positions");
        for (const auto& e : m.posenc) {
            if (static_cast<int>(e.size()) != s.d) throw make_error("Schema", "posenc width != d");
            for (const auto& w : e) check_fixed(w, s.q, "posenc");
        }
    } else if (!m.posenc.empty()) {
        throw make_error("Schema", "posenc present but use_posenc is false");
    }
    if (static_cast<int>(m.layers.size()) != s.D)
        throw make_error("Schema", "layer count != D");

    int d_in = s.d;
    for (const auto& l : m.layers) {
        int w = l.w_res.cols;
        if (w < 1 || w > s.W) throw make_error("Schema", "layer width outside [1, W]");
        check_mat(l.w_res, d_in, w, s.q, "w_res");
        if (static_cast<int>(l.heads.size()) > s.H)
            throw make_error("Schema", "layer has more heads than shape.H");
        for (const auto& h : l.heads) {
            check_mat(h.q, d_in, w, s.q, "head.q");
            check_mat(h.k, w, d_in, s.q, "head.k");
            check_mat(h.v, d_in, w, s.q, "head.v");
        }
        check_mat(l.fnn.e1, w, w, s.q, "fnn.e1");
        check_mat(l.fnn.e2, w, w, s.q, "fnn.e2");
        if (static_cast<int>(l.fnn.b.size()) != w) throw make_error("Schema", "fnn.b size != width");
        for (const auto& b : l.fnn.b) check_fixed(b, s.q, "fnn.b");
        d_in = w;
    }
    if (static_cast<int>(m.w_out.size()) != s.T + 1)
        throw make_error("Schema", "output needs T+1 rows (stop row included)");
    for (const auto& r : m.w_out) {
        if (static_cast<int>(r.size()) != d_in) throw make_error("Schema", "output row width mismatch");
        for (const auto& w : r) check_fixed(w, s.q, "w_out");
    }
    if (static_cast<int>(m.b_out.size()) != s.T + 1)
        throw make_error("Schema", "output bias needs T+1 entries");
    for (const auto& b : m.b_out) check_fixed(b, s.q, "b_out");
}

} // namespace memoforge::tx
