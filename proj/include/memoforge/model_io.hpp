#pragma once

#include <string>

#include "memoforge/txmodel.hpp"

namespace memoforge::tx {

// Model JSON (schema memoforge.model.v1): decimal-string weights, sparse
// matrices as declared dims + nonzero triplets. Round-trips bit-exactly.
std::string model_to_json(const TransformerModel& m);
TransformerModel model_from_json(const std::string& text);

void save_model(const TransformerModel& m, const std::string& path);
TransformerModel load_model(const std::string& path);

// Trace JSON for the cot subcommand; logits carry both a readable decimal
// rendering and an exact hex form so reloads are bit-faithful.
std::string trace_to_json(const TransformerModel& m, const Sentence& input, const CoTTrace& t);
CoTTrace trace_from_json(const std::string& text, Sentence* input_out = nullptr,
                         std::vector<std::string>* symbols_out = nullptr);

} // namespace memoforge::tx
