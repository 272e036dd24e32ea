#pragma once

#include <string>

#include "memoforge/lang.hpp"

namespace memoforge::lang {

// Language JSON:
// {"schema":"memoforge.lang.v1","symbols":["a","b"],
//  "samples":[{"x":["a","b"],"y":"a"}],"meta":{...}}
// Symbols are referenced by name; order defines indices.
std::string language_to_json(const Language& L);
Language language_from_json(const std::string& text);

void save_language(const Language& L, const std::string& path);
Language load_language(const std::string& path);

} // namespace memoforge::lang
