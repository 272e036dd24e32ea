#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "memoforge/bigreal.hpp"
#include "memoforge/txmodel.hpp"

namespace memoforge::fnn {

// One layer: out = Relu(x * w + b); all scalars exact q-digit decimals.
struct ReluLayer {
    tx::SparseMat w;
    tx::DenseVec b;
};

struct FnnNet {
    int q = 3;
    int input_width = 1;
    std::vector<ReluLayer> layers;

    int output_width() const { return layers.empty() ? input_width : layers.back().w.cols; }
};

// Direct evaluation at working precision (the oracle path for lift tests
// and the plan-side feature computation).
std::vector<BigReal> eval_fnn(const FnnNet& net, const std::vector<BigReal>& x,
                              const PrecisionConfig& cfg);
BigReal eval_fnn_scalar(const FnnNet& net, const BigReal& x, const PrecisionConfig& cfg);

// Layer-by-layer assembly of ReLU networks from q-digit pieces. The builder
// tracks live registers: every emitted layer passes all live registers
// through (coefficient 1, valid because registers are ReLU outputs, hence
// nonnegative) and appends the newly computed ones. Constants larger than
// the q-digit bound are spread across base-10^q chunk layers.
class FnnBuilder {
public:
    struct Reg {
        int id = -1;
        bool valid() const { return id >= 0; }
    };
    struct Term {
        Reg r;
        FixedDecimal c;
    };
    struct Out {
        std::vector<Term> terms;
        FixedDecimal bias;
    };

    FnnBuilder(int q, int input_width);

    int q() const { return q_; }
    FixedDecimal fx(std::int64_t v) const { return fixed_from_int(v, q_); }
    FixedDecimal fx_scaled(std::int64_t mantissa) const { return make_fixed(mantissa, q_); }
    Term term(Reg r, std::int64_t v) const { return Term{r, fx(v)}; }

    Reg input(int i) const; // register holding raw input column i (pre-ReLU!)
    void kill(Reg r);       // stop carrying a register forward

    // emit one layer: all live registers pass, outs are appended
    std::vector<Reg> emit(std::vector<Out> outs);
    Reg emit1(Out o) { return emit({std::move(o)})[0]; }

    // r' = Relu(10^e * r), ceil(|e|/q) layers; consumes r
    Reg scale_pow10(Reg r, long e);
    // constant register for a nonnegative integer digit string
    Reg const_reg(const std::string& digits);
    // r' = Relu(Y * r), Y a nonnegative integer digit string; consumes r
    Reg mul_bigint(Reg r, const std::string& digits);

    FnnNet finish(std::vector<Reg> outputs); // final layer = the outputs, in order

private:
    int wire_of(Reg r) const;
    int q_;
    FnnNet net_;
    std::vector<int> live_;  // reg id -> current wire (-1 = dead)
    std::vector<int> order_; // reg ids in wire order
    std::set<int> dying_;    // killed; usable as layer inputs until next emit
};

// Relu((Ax + B) / 10^C) as a width-6 chain of q-digit layers (base-10^q
// digit recursion for A and B, then C/q down-scaling steps).
FnnNet build_step_gadget(std::int64_t A, std::int64_t B, std::int64_t C, int q);

// Memorizes 1-D points to within 0.2: |f(x_i) - y_i| < 0.2 on every given
// point, nothing promised off-sample. Points must be positive and pairwise
// distinct; labels are small nonnegative integers. The optional caller
// promises (min pairwise gap, max |x|) are validated against the points;
// the per-part threshold scales are sized from the actual adjacent gaps.
// Throws GapTooSmall when two points coincide at working precision or a
// threshold scale outgrows what the point precision supports.
FnnNet build_1d_memorizer(const std::vector<std::pair<BigReal, long>>& points, int q,
                          const BigReal* min_gap = nullptr, const BigReal* max_abs = nullptr);

// ceil/floor of x * 10^scale as an exact integer digit string (x is a
// binary float, so the scaled value is computed exactly).
std::string scaled_ceil_digits(const BigReal& x, long scale);
std::string scaled_floor_digits(const BigReal& x, long scale);

// smallest multiple of q with 10^s >= need; throws GapTooSmall when the
// scale outgrows the working precision `prec`
long pow10_scale_for(const BigReal& need, int q, long prec, const char* what);

} // namespace memoforge::fnn
