#include "memoforge/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace memoforge::tx {

using ordered = nlohmann::ordered_json;
using nlohmann::json;

namespace {

ordered mat_to_json(const SparseMat& m) {
    ordered j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    ordered nz = ordered::array();
    for (const auto& e : m.nz) nz.push_back(ordered::array({e.r, e.c, fixed_to_string(e.w)}));
    j["nz"] = std::move(nz);
    return j;
}

SparseMat mat_from_json(const json& j, int q) {
    SparseMat m;
    m.rows = j.at("rows").get<int>();
    m.cols = j.at("cols").get<int>();
    for (const auto& e : j.at("nz")) {
        if (!e.is_array() || e.size() != 3) throw make_error("Schema", "bad nz entry");
        m.add(e[0].get<int>(), e[1].get<int>(), fixed_from_string(e[2].get<std::string>(), q));
    }
    m.sort_entries();
    return m;
}

ordered vec_to_json(const DenseVec& v) {
    ordered a = ordered::array();
    for (const auto& f : v) a.push_back(fixed_to_string(f));
    return a;
}

DenseVec vec_from_json(const json& j, int q) {
    DenseVec v;
    for (const auto& e : j) v.push_back(fixed_from_string(e.get<std::string>(), q));
    return v;
}

} // namespace

std::string model_to_json(const TransformerModel& m) {
    ordered j;
    j["schema"] = "memoforge.model.v1";
    ordered shape;
    shape["T"] = m.shape.T;
    shape["d"] = m.shape.d;
    shape["D"] = m.shape.D;
    shape["W"] = m.shape.W;
    shape["H"] = m.shape.H;
    shape["q"] = m.shape.q;
    shape["use_posenc"] = m.shape.use_posenc;
    shape["max_positions"] = m.shape.max_positions;
    j["shape"] = std::move(shape);
    j["symbols"] = m.symbols;
    j["precision"] = {{"mantissa_bits", m.prov.precision_bits}};
    ordered emb = ordered::array();
    for (const auto& e : m.embeddings) emb.push_back(vec_to_json(e));
    j["embeddings"] = std::move(emb);
    if (m.shape.use_posenc) {
        ordered pe = ordered::array();
        for (const auto& e : m.posenc) pe.push_back(vec_to_json(e));
        j["posenc"] = std::move(pe);
    }
    ordered layers = ordered::array();
    for (const auto& l : m.layers) {
        ordered lj;
        lj["w_res"] = mat_to_json(l.w_res);
        ordered heads = ordered::array();
        for (const auto& h : l.heads) {
            ordered hj;
            hj["q"] = mat_to_json(h.q);
            hj["k"] = mat_to_json(h.k);
            hj["v"] = mat_to_json(h.v);
            heads.push_back(std::move(hj));
        }
        lj["heads"] = std::move(heads);
        ordered fj;
        fj["e1"] = mat_to_json(l.fnn.e1);
        fj["b"] = vec_to_json(l.fnn.b);
        fj["e2"] = mat_to_json(l.fnn.e2);
        lj["fnn"] = std::move(fj);
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    ordered out;
    ordered wout = ordered::array();
    for (const auto& r : m.w_out) wout.push_back(vec_to_json(r));
    out["w"] = std::move(wout);
    out["b"] = vec_to_json(m.b_out);
    j["output"] = std::move(out);
    ordered prov;
    prov["mode"] = m.prov.mode;
    prov["seed"] = m.prov.seed;
    prov["precision_bits"] = m.prov.precision_bits;
    prov["alpha"] = m.prov.alpha;
    if (m.prov.max_len_hint) prov["max_len_hint"] = *m.prov.max_len_hint;
    prov["source_sha"] = m.prov.source_sha;
    prov["tool"] = m.prov.tool;
    j["provenance"] = std::move(prov);
    return j.dump(1) + "\n";
}

TransformerModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw make_error("Schema", std::string("bad JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "memoforge.model.v1")
        throw make_error("Schema", "unsupported model schema");

    TransformerModel m;
    const auto& sj = j.at("shape");
    m.shape.T = sj.at("T").get<int>();
    m.shape.d = sj.at("d").get<int>();
    m.shape.D = sj.at("D").get<int>();
    m.shape.W = sj.at("W").get<int>();
    m.shape.H = sj.at("H").get<int>();
    m.shape.q = sj.at("q").get<int>();
    m.shape.use_posenc = sj.value("use_posenc", false);
    m.shape.max_positions = sj.value("max_positions", 0);
    const int q = m.shape.q;

    m.symbols = j.at("symbols").get<std::vector<std::string>>();
    for (const auto& e : j.at("embeddings")) m.embeddings.push_back(vec_from_json(e, q));
    if (j.contains("posenc"))
        for (const auto& e : j["posenc"]) m.posenc.push_back(vec_from_json(e, q));
    for (const auto& lj : j.at("layers")) {
        Layer l;
        l.w_res = mat_from_json(lj.at("w_res"), q);
        for (const auto& hj : lj.at("heads"))
            l.heads.push_back({mat_from_json(hj.at("q"), q), mat_from_json(hj.at("k"), q),
                               mat_from_json(hj.at("v"), q)});
        const auto& fj = lj.at("fnn");
        l.fnn.e1 = mat_from_json(fj.at("e1"), q);
        l.fnn.b = vec_from_json(fj.at("b"), q);
        l.fnn.e2 = mat_from_json(fj.at("e2"), q);
        m.layers.push_back(std::move(l));
    }
    const auto& oj = j.at("output");
    for (const auto& r : oj.at("w")) m.w_out.push_back(vec_from_json(r, q));
    m.b_out = vec_from_json(oj.at("b"), q);

    if (j.contains("precision"))
        m.prov.precision_bits = j["precision"].value("mantissa_bits", 256L);
    if (j.contains("provenance")) {
        const auto& pj = j["provenance"];
        m.prov.mode = pj.value("mode", "handmade");
        m.prov.seed = pj.value("seed", std::uint64_t{0});
        m.prov.alpha = pj.value("alpha", 0);
        if (pj.contains("max_len_hint")) m.prov.max_len_hint = pj["max_len_hint"].get<int>();
        m.prov.source_sha = pj.value("source_sha", "");
        m.prov.tool = pj.value("tool", "");
    }

    validate_model(m);
    return m;
}

void save_model(const TransformerModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw make_error("Io", "cannot write " + path);
    out << model_to_json(m);
}

TransformerModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw make_error("Io", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

std::string trace_to_json(const TransformerModel& m, const Sentence& input, const CoTTrace& t) {
    ordered j;
    j["schema"] = "memoforge.trace.v1";
    lang::Alphabet a = m.alphabet();
    j["symbols"] = a.symbols;
    j["precision_bits"] = m.prov.precision_bits;
    ordered in = ordered::array();
    for (Symbol s : input) in.push_back(a.name(s));
    j["input"] = std::move(in);
    ordered steps = ordered::array();
    for (const auto& st : t.steps) {
        ordered sj;
        sj["symbol"] = st.symbol == lang::kStop ? std::string("<stop>") : a.name(st.symbol);
        sj["confidence"] = st.confidence.to_decimal(50);
        sj["confidence_hex"] = st.confidence.to_hex();
        ordered lg = ordered::array(), lgh = ordered::array();
        for (const auto& l : st.logits) {
            lg.push_back(l.to_decimal(50));
            lgh.push_back(l.to_hex());
        }
        sj["logits"] = std::move(lg);
        sj["logits_hex"] = std::move(lgh);
        steps.push_back(std::move(sj));
    }
    j["steps"] = std::move(steps);
    j["terminated"] = t.terminated;
    j["final_label"] = t.final_label == 0 ? std::string("") : a.name(t.final_label);
    return j.dump(1) + "\n";
}

CoTTrace trace_from_json(const std::string& text, Sentence* input_out,
                         std::vector<std::string>* symbols_out) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw make_error("Schema", std::string("bad trace JSON: ") + e.what());
    }
    if (!j.contains("schema") || j["schema"] != "memoforge.trace.v1")
        throw make_error("Schema", "unsupported trace schema");
    lang::Alphabet a;
    a.symbols = j.at("symbols").get<std::vector<std::string>>();
    long bits = j.value("precision_bits", 256L);
    CoTTrace t;
    for (const auto& sj : j.at("steps")) {
        CoTStep st;
        std::string sym = sj.at("symbol").get<std::string>();
        st.symbol = sym == "<stop>" ? lang::kStop : a.index_of(sym);
        st.confidence = BigReal::from_hex(sj.at("confidence_hex").get<std::string>(), bits);
        for (const auto& l : sj.at("logits_hex"))
            st.logits.push_back(BigReal::from_hex(l.get<std::string>(), bits));
        t.steps.push_back(std::move(st));
    }
    t.terminated = j.at("terminated").get<bool>();
    std::string fl = j.at("final_label").get<std::string>();
    t.final_label = fl.empty() ? 0 : a.index_of(fl);
    if (input_out) {
        input_out->clear();
        for (const auto& s : j.at("input")) input_out->push_back(a.index_of(s.get<std::string>()));
    }
    if (symbols_out) *symbols_out = a.symbols;
    return t;
}

} // namespace memoforge::tx
