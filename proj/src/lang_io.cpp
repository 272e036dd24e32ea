#include "memoforge/lang_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace memoforge::lang {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string language_to_json(const Language& L) {
    ordered j;
    j["schema"] = "memoforge.lang.v1";
    j["symbols"] = L.alphabet.symbols;
    ordered samples = ordered::array();
    for (const auto& s : L.samples) {
        ordered e;
        ordered xs = ordered::array();
        for (Symbol t : s.x) xs.push_back(L.alphabet.name(t));
        e["x"] = std::move(xs);
        e["y"] = L.alphabet.name(s.y);
        samples.push_back(std::move(e));
    }
    j["samples"] = std::move(samples);
    ordered meta = ordered::object();
    meta["N"] = L.sample_count();
    meta["L"] = L.max_len();
    meta["T"] = L.sym_count();
    if (L.subsample_seed) meta["subsample_seed"] = *L.subsample_seed;
    j["meta"] = std::move(meta);
    return j.dump(2) + "\n";
}

Language language_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw make_error("Schema", std::string("bad JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("symbols") || !j.contains("samples"))
        throw make_error("Schema", "language JSON needs 'symbols' and 'samples'");
    if (j.contains("schema") && j["schema"] != "memoforge.lang.v1")
        throw make_error("Schema", "unsupported language schema");

    Alphabet a;
    for (const auto& s : j["symbols"]) a.symbols.push_back(s.get<std::string>());

    std::vector<Sample> samples;
    for (const auto& e : j["samples"]) {
        Sample smp;
        for (const auto& t : e.at("x")) smp.x.push_back(a.index_of(t.get<std::string>()));
        smp.y = a.index_of(e.at("y").get<std::string>());
        samples.push_back(std::move(smp));
    }
    Language L = validate_language(a, std::move(samples));
    if (j.contains("meta") && j["meta"].contains("subsample_seed"))
        L.subsample_seed = j["meta"]["subsample_seed"].get<std::uint64_t>();
    return L;
}

void save_language(const Language& L, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw make_error("Io", "cannot write " + path);
    out << language_to_json(L);
}

Language load_language(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw make_error("Io", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return language_from_json(ss.str());
}

} // namespace memoforge::lang
