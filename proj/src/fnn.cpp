#include "memoforge/fnn.hpp"

#include <gmp.h>

#include <algorithm>

namespace memoforge::fnn {

using Reg = FnnBuilder::Reg;

std::vector<BigReal> eval_fnn(const FnnNet& net, const std::vector<BigReal>& x,
                              const PrecisionConfig& cfg) {
    const long prec = cfg.mantissa_bits;
    if (static_cast<int>(x.size()) != net.input_width)
        throw make_error("Schema", "fnn input width mismatch");
    std::vector<BigReal> cur;
    cur.reserve(x.size());
    for (const auto& v : x) {
        BigReal b(prec);
        mpfr_set(b.raw(), v.raw(), MPFR_RNDN);
        cur.push_back(std::move(b));
    }
    for (const auto& l : net.layers) {
        std::vector<BigReal> next(static_cast<size_t>(l.w.cols), BigReal(prec));
        for (size_t c = 0; c < next.size(); ++c) next[c] = BigReal::from_fixed(l.b[c], prec);
        for (const auto& e : l.w.nz)
            next[static_cast<size_t>(e.c)] =
                next[static_cast<size_t>(e.c)] +
                cur[static_cast<size_t>(e.r)] * BigReal::from_fixed(e.w, prec);
        for (auto& v : next) v = v.relu();
        cur = std::move(next);
    }
    return cur;
}

BigReal eval_fnn_scalar(const FnnNet& net, const BigReal& x, const PrecisionConfig& cfg) {
    auto out = eval_fnn(net, {x}, cfg);
    if (out.size() != 1) throw make_error("Schema", "fnn output is not scalar");
    return out[0];
}

FnnBuilder::FnnBuilder(int q, int input_width) : q_(q), net_{q, input_width, {}} {
    for (int i = 0; i < input_width; ++i) {
        live_.push_back(i);
        order_.push_back(i);
    }
}

FnnBuilder::Reg FnnBuilder::input(int i) const {
    if (i < 0 || i >= net_.input_width) throw make_error("Range", "bad input index");
    return Reg{i};
}

int FnnBuilder::wire_of(Reg r) const {
    if (!r.valid() || r.id >= static_cast<int>(live_.size()) || live_[static_cast<size_t>(r.id)] < 0)
        throw make_error("Internal", "dead or invalid register");
    return live_[static_cast<size_t>(r.id)];
}

void FnnBuilder::kill(Reg r) {
    if (!r.valid() || r.id >= static_cast<int>(live_.size())) return;
    dying_.insert(r.id);
}

std::vector<FnnBuilder::Reg> FnnBuilder::emit(std::vector<Out> outs) {
    const int in_width = static_cast<int>(order_.size());
    // survivors pass through first, in wire order
    std::vector<int> survivors;
    for (int id : order_)
        if (live_[static_cast<size_t>(id)] >= 0 && !dying_.count(id)) survivors.push_back(id);

    ReluLayer l;
    l.w = tx::SparseMat::zero(in_width, static_cast<int>(survivors.size() + outs.size()));
    l.b.assign(survivors.size() + outs.size(), fixed_from_int(0, q_));
    int col = 0;
    for (int id : survivors) l.w.add(live_[static_cast<size_t>(id)], col++, fixed_from_int(1, q_));
    for (const auto& o : outs) {
        for (const auto& t : o.terms) l.w.add(wire_of(t.r), col, t.c);
        l.b[static_cast<size_t>(col)] = o.bias;
        ++col;
    }
    l.w.sort_entries();
    net_.layers.push_back(std::move(l));

    // renumber
    for (int id : order_)
        if (live_[static_cast<size_t>(id)] >= 0 && dying_.count(id)) live_[static_cast<size_t>(id)] = -1;
    dying_.clear();
    std::vector<int> new_order;
    int w = 0;
    for (int id : survivors) {
        live_[static_cast<size_t>(id)] = w++;
        new_order.push_back(id);
    }
    std::vector<Reg> created;
    for (size_t i = 0; i < outs.size(); ++i) {
        int id = static_cast<int>(live_.size());
        live_.push_back(w++);
        new_order.push_back(id);
        created.push_back(Reg{id});
    }
    order_ = std::move(new_order);
    return created;
}

namespace {

// decimal digit chunks of a nonnegative integer string, most significant
// chunk first, each chunk < 10^q
std::vector<std::int64_t> chunks_of(const std::string& digits, int q) {
    std::string d = digits;
    size_t nz = d.find_first_not_of('0');
    d = nz == std::string::npos ? "0" : d.substr(nz);
    size_t head = d.size() % static_cast<size_t>(q);
    std::vector<std::int64_t> out;
    size_t i = 0;
    if (head) {
        out.push_back(std::stoll(d.substr(0, head)));
        i = head;
    }
    for (; i < d.size(); i += static_cast<size_t>(q))
        out.push_back(std::stoll(d.substr(i, static_cast<size_t>(q))));
    if (out.empty()) out.push_back(0);
    return out;
}

} // namespace

FnnBuilder::Reg FnnBuilder::scale_pow10(Reg r, long e) {
    long mag = e >= 0 ? e : -e;
    long steps = (mag + q_ - 1) / q_;
    Reg cur = r;
    for (long s = 0; s < steps; ++s) {
        long this_e = std::min<long>(q_, mag - s * q_);
        FixedDecimal c = e >= 0 ? fx_scaled(pow10_i64(q_ + static_cast<int>(this_e)))
                                : fx_scaled(pow10_i64(q_ - static_cast<int>(this_e)));
        kill(cur);
        cur = emit1(Out{{{cur, c}}, fx(0)});
    }
    return cur;
}

FnnBuilder::Reg FnnBuilder::const_reg(const std::string& digits) {
    auto ch = chunks_of(digits, q_);
    Reg cur;
    for (size_t i = 0; i < ch.size(); ++i) {
        Out o;
        if (cur.valid()) {
            o.terms.push_back({cur, fx_scaled(pow10_i64(2 * q_))});
            kill(cur);
        }
        o.bias = fx(ch[i]);
        cur = emit1(std::move(o));
    }
    return cur;
}

FnnBuilder::Reg FnnBuilder::mul_bigint(Reg r, const std::string& digits) {
    auto ch = chunks_of(digits, q_);
    Reg cur;
    for (size_t i = 0; i < ch.size(); ++i) {
        Out o;
        if (cur.valid()) {
            o.terms.push_back({cur, fx_scaled(pow10_i64(2 * q_))});
            kill(cur);
        }
        if (ch[i] != 0) o.terms.push_back({r, fx(ch[i])});
        o.bias = fx(0);
        if (i + 1 == ch.size()) kill(r);
        cur = emit1(std::move(o));
    }
    return cur;
}

FnnNet FnnBuilder::finish(std::vector<Reg> outputs) {
    std::vector<Out> outs;
    for (Reg r : outputs) outs.push_back(Out{{{r, fx(1)}}, fx(0)});
    for (int id : order_)
        if (live_[static_cast<size_t>(id)] >= 0) dying_.insert(id);
    emit(std::move(outs));
    return std::move(net_);
}

FnnNet build_step_gadget(std::int64_t A, std::int64_t B, std::int64_t C, int q) {
    if (C < 0) throw make_error("Range", "C must be >= 0");
    FnnBuilder b(q, 1);
    const std::int64_t sA = A < 0 ? -1 : 1, sB = B < 0 ? -1 : 1;
    auto chA = chunks_of(std::to_string(A < 0 ? -A : A), q);
    auto chB = chunks_of(std::to_string(B < 0 ? -B : B), q);
    const size_t steps = std::max(chA.size(), chB.size());
    const long pad_a = static_cast<long>(steps - chA.size());
    const long pad_b = static_cast<long>(steps - chB.size());
    auto chunk_at = [](const std::vector<std::int64_t>& ch, long pad, size_t s, std::int64_t sgn) {
        return static_cast<long>(s) >= pad ? sgn * ch[s - static_cast<size_t>(pad)] : 0;
    };

    Reg x = b.input(0);
    b.kill(x);
    // p = Relu(x), m = Relu(-x), (pa, ma) = Relu(+-H_0(A) x), (pb, mb) = Relu(+-H_0(B))
    std::int64_t a0 = chunk_at(chA, pad_a, 0, sA);
    std::int64_t b0 = chunk_at(chB, pad_b, 0, sB);
    auto regs = b.emit({FnnBuilder::Out{{b.term(x, 1)}, b.fx(0)},
                        FnnBuilder::Out{{b.term(x, -1)}, b.fx(0)},
                        FnnBuilder::Out{{b.term(x, a0)}, b.fx(0)},
                        FnnBuilder::Out{{b.term(x, -a0)}, b.fx(0)},
                        FnnBuilder::Out{{}, b.fx(b0)},
                        FnnBuilder::Out{{}, b.fx(-b0)}});
    Reg p = regs[0], m = regs[1], pa = regs[2], ma = regs[3], pb = regs[4], mb = regs[5];

    const FixedDecimal ten_q = b.fx_scaled(pow10_i64(2 * q));
    const FixedDecimal nten_q = b.fx_scaled(-pow10_i64(2 * q));
    for (size_t s = 1; s < steps; ++s) {
        // H_s(A)x = 10^q H_{s-1}(A)x + d_s x; same for B through the bias
        std::int64_t da = chunk_at(chA, pad_a, s, sA);
        std::int64_t db = chunk_at(chB, pad_b, s, sB);
        b.kill(pa); b.kill(ma); b.kill(pb); b.kill(mb);
        auto nr = b.emit(
            {FnnBuilder::Out{{{pa, ten_q}, {ma, nten_q}, b.term(p, da), b.term(m, -da)}, b.fx(0)},
             FnnBuilder::Out{{{pa, nten_q}, {ma, ten_q}, b.term(p, -da), b.term(m, da)}, b.fx(0)},
             FnnBuilder::Out{{{pb, ten_q}, {mb, nten_q}}, b.fx(db)},
             FnnBuilder::Out{{{pb, nten_q}, {mb, ten_q}}, b.fx(-db)}});
        pa = nr[0]; ma = nr[1]; pb = nr[2]; mb = nr[3];
    }
    // combine: Relu(Ax + B) = Relu(pa - ma + pb - mb)
    b.kill(p); b.kill(m); b.kill(pa); b.kill(ma); b.kill(pb); b.kill(mb);
    Reg y = b.emit1(FnnBuilder::Out{
        {b.term(pa, 1), b.term(ma, -1), b.term(pb, 1), b.term(mb, -1)}, b.fx(0)});
    if (C > 0) y = b.scale_pow10(y, -static_cast<long>(C));
    return b.finish({y});
}

static std::string scaled_int_digits(const BigReal& x, long scale, mpfr_rnd_t rnd) {
    long prec = x.prec() + scale * 4 + 64;
    mpfr_t t;
    mpfr_init2(t, prec);
    mpfr_ui_pow_ui(t, 10, static_cast<unsigned long>(scale), MPFR_RNDN); // exact at this precision
    mpfr_mul(t, t, x.raw(), MPFR_RNDN);                                  // exact product of exact values
    mpz_t z;
    mpz_init(z);
    mpfr_get_z(z, t, rnd);
    char* s = mpz_get_str(nullptr, 10, z);
    std::string out(s);
    void (*freefunc)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(s, out.size() + 1);
    mpz_clear(z);
    mpfr_clear(t);
    if (!out.empty() && out[0] == '-') throw make_error("Range", "scaled value is negative");
    return out;
}

std::string scaled_ceil_digits(const BigReal& x, long scale) {
    return scaled_int_digits(x, scale, MPFR_RNDU);
}
std::string scaled_floor_digits(const BigReal& x, long scale) {
    return scaled_int_digits(x, scale, MPFR_RNDD);
}

long pow10_scale_for(const BigReal& need, int q, long prec, const char* what) {
    if (need.sign() <= 0) throw make_error("GapTooSmall", std::string(what) + ": degenerate gap");
    long s = 0;
    BigReal p = BigReal::from_long(1, prec);
    BigReal ten = BigReal::from_long(10, prec);
    while (p < need) {
        ++s;
        p = p * ten;
        if (s > 200000) throw make_error("GapTooSmall", std::string(what) + ": scale diverges");
    }
    long r = ((s + q - 1) / q) * q;
    if (static_cast<double>(r) * 3.33 + 96.0 > static_cast<double>(prec))
        throw make_error("GapTooSmall",
                         std::string(what) + ": scale 10^" + std::to_string(r) +
                             " exceeds working precision " + std::to_string(prec));
    return r;
}

FnnNet build_1d_memorizer(const std::vector<std::pair<BigReal, long>>& points_in, int q,
                          const BigReal* min_gap, const BigReal* max_abs) {
    if (points_in.empty()) throw make_error("Range", "no points");
    auto points = points_in;
    std::sort(points.begin(), points.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 0; i < points.size(); ++i) {
        if (points[i].second < 0) throw make_error("Range", "labels must be >= 0");
        if (points[i].first.sign() <= 0) throw make_error("Range", "points must be positive");
        if (i && points[i].first.bit_equal(points[i - 1].first))
            throw make_error("GapTooSmall", "identical points");
        if (i && min_gap && points[i].first - points[i - 1].first < *min_gap)
            throw make_error("GapTooSmall", "adjacent points violate the promised gap");
        if (max_abs && points[i].first.abs() > *max_abs)
            throw make_error("Range", "point outside the promised range");
    }
    const size_t N = points.size();
    const long prec = points[0].first.prec();
    long m = 1;
    for (const auto& p : points) m = std::max(m, p.second);

    FnnBuilder b(q, 1);
    Reg x_in = b.input(0);
    b.kill(x_in);
    auto init = b.emit({FnnBuilder::Out{{}, b.fx(0)}, FnnBuilder::Out{{b.term(x_in, 1)}, b.fx(0)}});
    Reg ACC = init[0], X = init[1];

    if (N == 1) {
        b.kill(ACC);
        b.kill(X);
        Reg c = b.const_reg(std::to_string(points[0].second));
        return b.finish({c});
    }

    for (size_t i = 0; i < N; ++i) {
        const BigReal& xi = points[i].first;
        const long yi = points[i].second;

        BigReal vi(prec), ui(prec); // remapped target point and runner-up
        Reg XX;
        if (i == 0) {
            XX = b.emit1(FnnBuilder::Out{{b.term(X, 1)}, b.fx(0)}); // copy, X survives
            vi = xi;
            ui = points[1].first;
        } else {
            // reflect around r = ceil(x_i 10^s)/10^s with r < x_i + gap/3,
            // which makes x_i the smallest remapped point
            BigReal gap = i + 1 < N ? (points[i + 1].first - xi < xi - points[i - 1].first
                                           ? points[i + 1].first - xi
                                           : xi - points[i - 1].first)
                                    : xi - points[i - 1].first;
            long s = pow10_scale_for(BigReal::from_long(3, prec) / gap, q, prec, "reflection");
            std::string r_digits = scaled_ceil_digits(xi, s);

            Reg Xup = b.emit1(FnnBuilder::Out{{b.term(X, 1)}, b.fx(0)});
            Xup = b.scale_pow10(Xup, s);
            Reg Cw = b.const_reg(r_digits);
            b.kill(Xup);
            b.kill(Cw);
            Reg W1 = b.emit1(FnnBuilder::Out{{b.term(Cw, 1), b.term(Xup, -1)}, b.fx(0)});
            Reg W1d = b.scale_pow10(W1, -s);
            b.kill(W1d);
            XX = b.emit1(FnnBuilder::Out{{b.term(W1d, 2), b.term(X, 1)}, b.fx(0)});

            // exact remapped values for threshold sizing
            long rprec = prec + s * 4 + 64;
            BigReal r(rprec);
            if (mpfr_set_str(r.raw(), r_digits.c_str(), 10, MPFR_RNDN) != 0)
                throw make_error("Internal", "bad ceil digits");
            r = r / BigReal::pow10(s, rprec);
            BigReal two = BigReal::from_long(2, prec);
            vi = two * r - xi;
            ui = two * r - points[i - 1].first;
            if (i + 1 < N && points[i + 1].first < ui) ui = points[i + 1].first;
        }

        // threshold test: F11 = Relu(floor(10^s2 u) - 10^s2 XX) lands in
        // [1, 2*10^q) exactly at the target point and at 0 elsewhere
        BigReal gap2 = ui - vi;
        long s2 = pow10_scale_for(BigReal::from_long(2, prec) / gap2, q, prec, "threshold");
        Reg XXup = b.scale_pow10(XX, s2);
        Reg Th = b.const_reg(scaled_floor_digits(ui, s2));
        b.kill(XXup);
        b.kill(Th);
        Reg F11 = b.emit1(FnnBuilder::Out{{b.term(Th, 1), b.term(XXup, -1)}, b.fx(0)});

        // spike in [y_i, y_i + 0.2]: F12a = Relu(1 + F11/10^q2) is within
        // 0.2/m of 1 at the target, F12b = Relu(5 - 10 F11) kills the rest
        long q2;
        {
            long s0 = 1;
            long double need = 100.0L * static_cast<long double>(m) * 2.0L *
                               static_cast<long double>(pow10_i64(q));
            long double pw = 10;
            while (pw <= need) { pw *= 10; ++s0; }
            q2 = ((s0 + q - 1) / q) * q;
        }
        Reg F12b = b.emit1(FnnBuilder::Out{{b.term(F11, -10)}, b.fx(5)});
        Reg Fd = b.scale_pow10(F11, -q2);
        b.kill(Fd);
        Reg F12a = b.emit1(FnnBuilder::Out{{b.term(Fd, 1)}, b.fx(1)});
        b.kill(F12a);
        b.kill(F12b);
        Reg SPIKE0 = b.emit1(FnnBuilder::Out{{b.term(F12a, 1), b.term(F12b, -1)}, b.fx(0)});
        Reg SPIKE = b.mul_bigint(SPIKE0, std::to_string(yi));
        b.kill(ACC);
        b.kill(SPIKE);
        ACC = b.emit1(FnnBuilder::Out{{b.term(ACC, 1), b.term(SPIKE, 1)}, b.fx(0)});
    }
    b.kill(X);
    return b.finish({ACC});
}

} // namespace memoforge::fnn
