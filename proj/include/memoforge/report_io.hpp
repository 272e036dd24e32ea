#pragma once

#include <string>

#include "memoforge/analysis.hpp"
#include "memoforge/memorizability.hpp"
#include "memoforge/synth.hpp"

namespace memoforge::io {

// Everything `check` decides about one language, as one artifact.
struct ReportBundle {
    lang::Alphabet alphabet;
    memo::NoCotReport no_cot;
    memo::CotReport cot;
    memo::CotSufficiency sufficient;
};

std::string report_to_json(const ReportBundle& r);
ReportBundle report_from_json(const std::string& text);

std::string bounds_to_json(const analysis::BoundVerdict& v);
analysis::BoundVerdict bounds_from_json(const std::string& text);

std::string plan_to_json(const synth::SynthesisPlan& p, const lang::Alphabet& a);
synth::SynthesisPlan plan_from_json(const std::string& text, lang::Alphabet* alphabet_out = nullptr);

} // namespace memoforge::io
