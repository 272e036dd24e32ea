#include "memoforge/report_io.hpp"

#include <json.hpp>

namespace memoforge::io {

using nlohmann::json;
using ordered = nlohmann::ordered_json;
using lang::Alphabet;
using lang::Sentence;
using lang::Symbol;

namespace {

ordered sent_json(const Alphabet& a, const Sentence& x) {
    ordered arr = ordered::array();
    for (Symbol s : x) arr.push_back(a.name(s));
    return arr;
}

Sentence sent_parse(const Alphabet& a, const json& j) {
    Sentence x;
    for (const auto& t : j) x.push_back(a.index_of(t.get<std::string>()));
    return x;
}

} // namespace

std::string report_to_json(const ReportBundle& r) {
    const Alphabet& a = r.alphabet;
    ordered j;
    j["schema"] = "memoforge.report.v1";
    j["symbols"] = a.symbols;

    ordered n;
    n["holds"] = r.no_cot.holds;
    ordered viol = ordered::array();
    for (const auto& v : r.no_cot.violations) {
        ordered e;
        e["x1"] = sent_json(a, v.x1);
        e["x2"] = sent_json(a, v.x2);
        e["y1"] = a.name(v.y1);
        e["y2"] = a.name(v.y2);
        viol.push_back(std::move(e));
    }
    n["violations"] = std::move(viol);
    j["no_cot"] = std::move(n);

    ordered c;
    c["holds"] = r.cot.holds;
    ordered empty = ordered::array();
    for (const auto& x : r.cot.empty_sx) empty.push_back(sent_json(a, x));
    c["empty_witness_sets"] = std::move(empty);
    ordered confl = ordered::array();
    for (auto s : r.cot.class_conflicts) confl.push_back(a.name(s));
    c["class_conflicts"] = std::move(confl);
    ordered common = ordered::object();
    for (const auto& [cls, g] : r.cot.class_common_first) common[a.name(cls)] = a.name(g);
    c["class_common_first"] = std::move(common);
    ordered wits = ordered::array();
    for (const auto& e : r.cot.witnesses.entries) {
        ordered w;
        w["x"] = sent_json(a, e.x);
        w["y"] = a.name(e.y);
        ordered fs = ordered::array();
        for (auto s : e.first_symbols) fs.push_back(a.name(s));
        w["first_symbols"] = std::move(fs);
        ordered zs = ordered::object();
        for (const auto& [g, z] : e.witness_by_first) zs[a.name(g)] = sent_json(a, z);
        w["witness"] = std::move(zs);
        wits.push_back(std::move(w));
    }
    c["witnesses"] = std::move(wits);
    j["cot"] = std::move(c);

    ordered s;
    s["last_symbol_proper_subset"] = r.sufficient.last_symbol_proper_subset;
    s["uniform_length"] = r.sufficient.uniform_length;
    j["sufficient_conditions"] = std::move(s);
    return j.dump(2) + "\n";
}

ReportBundle report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw make_error("Schema", std::string("bad report JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "memoforge.report.v1")
        throw make_error("Schema", "unsupported report schema");
    ReportBundle r;
    r.alphabet.symbols = j.at("symbols").get<std::vector<std::string>>();
    const Alphabet& a = r.alphabet;

    const auto& n = j.at("no_cot");
    r.no_cot.holds = n.at("holds").get<bool>();
    for (const auto& e : n.at("violations"))
        r.no_cot.violations.push_back({sent_parse(a, e.at("x1")), sent_parse(a, e.at("x2")),
                                       a.index_of(e.at("y1").get<std::string>()),
                                       a.index_of(e.at("y2").get<std::string>())});

    const auto& c = j.at("cot");
    r.cot.holds = c.at("holds").get<bool>();
    for (const auto& e : c.at("empty_witness_sets")) r.cot.empty_sx.push_back(sent_parse(a, e));
    for (const auto& e : c.at("class_conflicts"))
        r.cot.class_conflicts.push_back(a.index_of(e.get<std::string>()));
    for (const auto& [cls, g] : c.at("class_common_first").items())
        r.cot.class_common_first[a.index_of(cls)] = a.index_of(g.get<std::string>());
    for (const auto& w : c.at("witnesses")) {
        memo::WitnessEntry e;
        e.x = sent_parse(a, w.at("x"));
        e.y = a.index_of(w.at("y").get<std::string>());
        for (const auto& fs : w.at("first_symbols"))
            e.first_symbols.push_back(a.index_of(fs.get<std::string>()));
        for (const auto& [g, z] : w.at("witness").items())
            e.witness_by_first[a.index_of(g)] = sent_parse(a, z);
        r.cot.witnesses.entries.push_back(std::move(e));
    }

    const auto& s = j.at("sufficient_conditions");
    r.sufficient.last_symbol_proper_subset = s.at("last_symbol_proper_subset").get<bool>();
    r.sufficient.uniform_length = s.at("uniform_length").get<bool>();
    return r;
}

std::string bounds_to_json(const analysis::BoundVerdict& v) {
    ordered j;
    j["schema"] = "memoforge.bounds.v1";
    j["N"] = v.N;
    j["T"] = v.T;
    j["q"] = v.q;
    j["P"] = v.P;
    j["labelings"] = v.labelings.dec;
    j["capacity"] = v.capacity.dec;
    j["sufficient_in_principle"] = v.sufficient_in_principle;
    j["min_P_threshold"] = v.min_P_threshold;
    return j.dump(2) + "\n";
}

analysis::BoundVerdict bounds_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw make_error("Schema", std::string("bad bounds JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "memoforge.bounds.v1")
        throw make_error("Schema", "unsupported bounds schema");
    analysis::BoundVerdict v;
    v.N = j.at("N").get<long>();
    v.T = j.at("T").get<long>();
    v.q = j.at("q").get<long>();
    v.P = j.at("P").get<long>();
    v.labelings.dec = j.at("labelings").get<std::string>();
    v.capacity.dec = j.at("capacity").get<std::string>();
    v.sufficient_in_principle = j.at("sufficient_in_principle").get<bool>();
    v.min_P_threshold = j.at("min_P_threshold").get<long>();
    return v;
}

std::string plan_to_json(const synth::SynthesisPlan& p, const Alphabet& a) {
    ordered j;
    j["schema"] = "memoforge.plan.v1";
    j["symbols"] = a.symbols;
    j["alpha"] = p.alpha;
    j["precision_bits"] = p.precision_bits;
    j["escalations"] = p.escalations;
    ordered act = ordered::array();
    for (auto s : p.active_symbols) act.push_back(a.name(s));
    j["active_symbols"] = std::move(act);
    j["feature_layer"] = p.feature_layer;
    j["feature_width"] = p.feature_width;
    ordered rows = ordered::array();
    for (const auto& r : p.feature_table) {
        ordered row = ordered::array();
        for (const auto& v : r) row.push_back(v.to_hex());
        rows.push_back(std::move(row));
    }
    j["feature_table"] = std::move(rows);
    j["feature_labels"] = p.feature_labels;
    ordered reps = ordered::array();
    for (const auto& r : p.feature_reps) reps.push_back(sent_json(a, r));
    j["feature_reps"] = std::move(reps);
    j["separation_hex"] = p.separation.to_hex();
    j["separation"] = p.separation.to_decimal(40);
    j["range_hex"] = p.range.to_hex();
    j["range"] = p.range.to_decimal(40);
    j["f1_points"] = p.f1_points;
    j["f1_ratio"] = p.f1_ratio;
    j["f1_scale"] = p.f1_scale;
    j["projector_seed"] = p.projector_seed;
    j["projector_retries"] = p.projector_retries;
    j["projector_digits"] = p.projector_digits;
    j["projector_entries"] = p.projector_entries;
    j["projected_gap_hex"] = p.projected_gap.to_hex();
    j["projected_gap"] = p.projected_gap.to_decimal(40);
    j["classifier_points"] = p.classifier_points;
    j["parameter_slots"] = p.parameter_slots;
    if (p.prefix_language) {
        ordered aug;
        ordered wits = ordered::array();
        for (const auto& z : p.witnesses) wits.push_back(sent_json(a, z));
        aug["witnesses"] = std::move(wits);
        ordered samples = ordered::array();
        for (const auto& s : p.prefix_language->samples) {
            ordered e;
            e["x"] = sent_json(a, s.x);
            e["y"] = s.y == lang::kStop ? std::string("<stop>") : a.name(s.y);
            samples.push_back(std::move(e));
        }
        aug["prefix_language"] = std::move(samples);
        j["augmented"] = std::move(aug);
    }
    return j.dump(1) + "\n";
}

synth::SynthesisPlan plan_from_json(const std::string& text, Alphabet* alphabet_out) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw make_error("Schema", std::string("bad plan JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "memoforge.plan.v1")
        throw make_error("Schema", "unsupported plan schema");
    synth::SynthesisPlan p;
    Alphabet a;
    a.symbols = j.at("symbols").get<std::vector<std::string>>();
    p.alpha = j.at("alpha").get<int>();
    p.precision_bits = j.at("precision_bits").get<long>();
    p.escalations = j.at("escalations").get<int>();
    long bits = p.precision_bits;
    for (const auto& s : j.at("active_symbols"))
        p.active_symbols.push_back(a.index_of(s.get<std::string>()));
    p.feature_layer = j.at("feature_layer").get<int>();
    p.feature_width = j.at("feature_width").get<int>();
    for (const auto& row : j.at("feature_table")) {
        std::vector<BigReal> r;
        for (const auto& v : row) r.push_back(BigReal::from_hex(v.get<std::string>(), bits));
        p.feature_table.push_back(std::move(r));
    }
    p.feature_labels = j.at("feature_labels").get<std::vector<int>>();
    for (const auto& r : j.at("feature_reps")) p.feature_reps.push_back(sent_parse(a, r));
    p.separation = BigReal::from_hex(j.at("separation_hex").get<std::string>(), bits);
    p.range = BigReal::from_hex(j.at("range_hex").get<std::string>(), bits);
    p.f1_points = j.at("f1_points").get<long>();
    p.f1_ratio = j.at("f1_ratio").get<long>();
    p.f1_scale = j.at("f1_scale").get<long>();
    p.projector_seed = j.at("projector_seed").get<std::uint64_t>();
    p.projector_retries = j.at("projector_retries").get<int>();
    p.projector_digits = j.at("projector_digits").get<long>();
    p.projector_entries = j.at("projector_entries").get<std::vector<std::string>>();
    p.projected_gap = BigReal::from_hex(j.at("projected_gap_hex").get<std::string>(), bits);
    p.classifier_points = j.at("classifier_points").get<long>();
    p.parameter_slots = j.at("parameter_slots").get<long long>();
    if (j.contains("augmented")) {
        const auto& aug = j["augmented"];
        for (const auto& z : aug.at("witnesses")) p.witnesses.push_back(sent_parse(a, z));
        std::vector<lang::Sample> samples;
        for (const auto& e : aug.at("prefix_language")) {
            lang::Sample s;
            s.x = sent_parse(a, e.at("x"));
            std::string y = e.at("y").get<std::string>();
            s.y = y == "<stop>" ? lang::kStop : a.index_of(y);
            samples.push_back(std::move(s));
        }
        p.prefix_language = lang::validate_language(a, std::move(samples), true);
    }
    if (alphabet_out) *alphabet_out = a;
    return p;
}

} // namespace memoforge::io
