#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "memoforge/bigreal.hpp"
#include "memoforge/fixed_decimal.hpp"
#include "memoforge/lang.hpp"

namespace memoforge::tx {

using lang::Sentence;
using lang::Symbol;

// Sparse matrix of exact q-digit weights. Dimensions are declared (every
// slot is a parameter; zeros are simply not stored), entries sorted (r,c).
struct SparseMat {
    int rows = 0, cols = 0;
    struct Nz {
        int r = 0, c = 0;
        FixedDecimal w;
    };
    std::vector<Nz> nz;

    static SparseMat zero(int r, int c) { return SparseMat{r, c, {}}; }
    static SparseMat ident(int n, int q);
    void add(int r, int c, const FixedDecimal& w); // drops exact zeros
    void sort_entries();
    long long slot_count() const { return static_cast<long long>(rows) * cols; }
};

using DenseVec = std::vector<FixedDecimal>;

struct HeadWeights {
    SparseMat q; // d_in x W
    SparseMat k; // W x d_in
    SparseMat v; // d_in x W
};

struct FnnWeights {
    SparseMat e1; // W x W
    DenseVec b;   // W
    SparseMat e2; // W x W
};

struct Layer {
    SparseMat w_res; // d_in x W (residual transition; may change width)
    std::vector<HeadWeights> heads;
    FnnWeights fnn;

    int width_out() const { return w_res.cols; }
    int width_in() const { return w_res.rows; }
};

struct ModelShape {
    int T = 1;          // alphabet size
    int d = 1;          // embedding length
    int D = 0;          // depth
    int W = 1;          // width
    int H = 1;          // heads per layer
    int q = 3;          // parameter precision
    bool use_posenc = false;
    int max_positions = 0;
};

struct Provenance {
    std::string mode = "handmade"; // handmade | nocot | posenc | cot
    std::uint64_t seed = 0;
    long precision_bits = 256;
    int alpha = 0;                  // position-value scale exponent, 0 = n/a
    std::optional<int> max_len_hint; // L recorded at synthesis
    std::string source_sha;
    std::string tool = "memoforge 0.1.0";
};

struct TransformerModel {
    ModelShape shape;
    std::vector<std::string> symbols;  // alphabet names, size T
    std::vector<DenseVec> embeddings;  // T rows of length d
    std::vector<DenseVec> posenc;      // max_positions rows of length d (when enabled)
    std::vector<Layer> layers;         // size D
    std::vector<DenseVec> w_out;       // T+1 rows of length (last width)
    DenseVec b_out;                    // T+1
    Provenance prov;

    lang::Alphabet alphabet() const;
    int last_width() const { return layers.empty() ? shape.d : layers.back().width_out(); }
    // declared parameter slots per family (embeddings, output, layers; the
    // optional position table counted separately)
    long long declared_parameter_slots(bool include_posenc = true) const;
    bool uniform_shape() const; // every layer W x W with H heads, d == W
};

// Throws Schema on any dimension inconsistency or precision violation.
void validate_model(const TransformerModel& m);

struct CoTStep {
    Symbol symbol = 0; // 0 = stop
    std::vector<BigReal> logits;
    BigReal confidence;
};

struct CoTTrace {
    std::vector<CoTStep> steps;
    bool terminated = false;
    Symbol final_label = 0;
};

enum class Exec { Serial, Parallel };

struct EngineOpts {
    PrecisionConfig cfg;
    Exec exec = Exec::Serial;
    int max_steps = 16; // CoT step limit
};

// Weights converted once to working precision; reused across forwards.
class ModelRuntime {
public:
    ModelRuntime(const TransformerModel& m, const PrecisionConfig& cfg);

    const TransformerModel& model() const { return *model_; }
    const PrecisionConfig& cfg() const { return cfg_; }

    struct RtMat {
        int rows = 0, cols = 0;
        struct Nz {
            int r, c;
            BigReal w;
        };
        std::vector<Nz> nz;
        bool empty() const { return nz.empty(); }
    };
    struct RtHead { RtMat q, k, v; };
    struct RtLayer {
        RtMat w_res;
        std::vector<RtHead> heads;
        RtMat e1, e2;
        std::vector<BigReal> b;
    };

    std::vector<std::vector<BigReal>> embed; // T rows
    std::vector<std::vector<BigReal>> pos;   // max_positions rows
    std::vector<RtLayer> layers;
    std::vector<std::vector<BigReal>> w_out;
    std::vector<BigReal> b_out;

private:
    const TransformerModel* model_;
    PrecisionConfig cfg_;
};

struct ForwardCapture {
    int capture_layer = -1; // record rows after this layer (0-based; -1 = off)
    bool capture_all = false;
    bool row_logits = false; // output-layer readout of every row
    std::vector<std::vector<BigReal>> captured;
    std::vector<std::vector<std::vector<BigReal>>> all_states; // layer -> row -> col
    std::vector<std::vector<BigReal>> logits_per_row;
};

// Exact evaluation order per the model definition; see engine.cpp.
std::vector<BigReal> forward(const ModelRuntime& rt, const Sentence& x, const EngineOpts& opts,
                             ForwardCapture* cap = nullptr);
std::vector<BigReal> forward(const TransformerModel& m, const Sentence& x, const EngineOpts& opts,
                             ForwardCapture* cap = nullptr);

// argmax with smallest-index tie-break; returns 0 (stop) for index T+1.
Symbol classify_logits(const std::vector<BigReal>& logits);
Symbol classify(const TransformerModel& m, const Sentence& x, const EngineOpts& opts);

// top logit minus second under the tie rule (ties give exact 0).
BigReal confidence(const std::vector<BigReal>& logits);

CoTTrace cot_generate(const ModelRuntime& rt, const Sentence& x, const EngineOpts& opts);
CoTTrace cot_generate(const TransformerModel& m, const Sentence& x, const EngineOpts& opts);

} // namespace memoforge::tx
