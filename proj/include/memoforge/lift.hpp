#pragma once

#include "memoforge/fnn.hpp"
#include "memoforge/txmodel.hpp"

namespace memoforge::synth {

// Transformer layers applying `net` row-wise: three layers per FNN layer
// (widen with zeros, compute through the transformer FNN block, narrow away
// the consumed inputs). Attention weights are zero; residual transition
// matrices do the wiring. State layout is [pass-through | net values]: the
// first d_pass coordinates ride along untouched, the net consumes the next
// input_width coordinates and leaves its outputs in their place.
// Reading the last row of the result gives the "last row only" variant.
std::vector<tx::Layer> lift_fnn(const fnn::FnnNet& net, int d_pass);

// Column-selected variant used by the synthesizer: inputs are gathered from
// in_cols of a width-`state_width` state, outputs land in out_cols (their
// previous contents are dropped), everything else passes through. Adds one
// gather layer before and one scatter layer after the lifted block.
std::vector<tx::Layer> lift_fnn_on_columns(const fnn::FnnNet& net, int state_width,
                                           const std::vector<int>& in_cols,
                                           const std::vector<int>& out_cols);

} // namespace memoforge::synth
