#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "memoforge/lang_io.hpp"
#include "memoforge/manifest.hpp"
#include "memoforge/model_io.hpp"
#include "memoforge/report_io.hpp"
#include "memoforge/sha256.hpp"
#include "testutil.hpp"

using namespace memoforge;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/memoforge_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
    void write(const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
};

} // namespace

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("model JSON round-trips byte for byte") {
    auto m = testutil::random_model(2, 3, 2, 2, 3, 99);
    std::string j1 = tx::model_to_json(m);
    tx::TransformerModel m2 = tx::model_from_json(j1);
    std::string j2 = tx::model_to_json(m2);
    CHECK(j1 == j2);
    CHECK(m2.shape.W == m.shape.W);
    CHECK(m2.declared_parameter_slots() == m.declared_parameter_slots());
    // weights reload to identical values
    tx::EngineOpts eng{PrecisionConfig{256}, tx::Exec::Serial, 16};
    auto l1 = tx::forward(m, {1, 2, 1}, eng);
    auto l2 = tx::forward(m2, {1, 2, 1}, eng);
    for (size_t i = 0; i < l1.size(); ++i) CHECK(l1[i].bit_equal(l2[i]));
}

TEST_CASE("model JSON rejects precision violations and schema breaks") {
    auto m = testutil::random_model(2, 2, 1, 1, 3, 7);
    std::string good = tx::model_to_json(m);

    // a weight with more fractional digits than q
    std::string bad = good;
    auto pos = bad.find("\"q\": 3");
    REQUIRE(pos != std::string::npos);
    // inject a 4-digit weight into the first nz triple
    auto nzpos = bad.find("\"nz\"");
    auto valpos = bad.find("\"", bad.find("[", bad.find("[", nzpos) + 1) + 1);
    REQUIRE(valpos != std::string::npos);
    auto endpos = bad.find("\"", valpos + 1);
    bad.replace(valpos, endpos - valpos + 1, "\"0.1234\"");
    CHECK_THROWS_WITH_AS(tx::model_from_json(bad), doctest::Contains("PrecisionViolation"), Error);

    // missing stop row in the output map
    std::string noout = good;
    auto wpos = noout.find("\"output\"");
    REQUIRE(wpos != std::string::npos);
    tx::TransformerModel m3 = tx::model_from_json(good);
    m3.w_out.pop_back();
    m3.b_out.pop_back();
    CHECK_THROWS_WITH_AS(tx::model_to_json(m3).empty() ? void() : void(tx::validate_model(m3)),
                         doctest::Contains("Schema"), Error);
}

TEST_CASE("language JSON by-name references and field order") {
    std::string text = R"({
      "samples": [{"y": "b", "x": ["a", "b"]}],
      "symbols": ["a", "b"],
      "schema": "memoforge.lang.v1"
    })";
    lang::Language L = lang::language_from_json(text);
    CHECK(L.samples[0].x == lang::Sentence{1, 2});
    CHECK(L.samples[0].y == 2);
    CHECK_THROWS_WITH_AS(lang::language_from_json("{\"symbols\": []}"), doctest::Contains("Schema"),
                         Error);
}

TEST_CASE("manifest hashes verify and mismatches are caught") {
    TempFile f("artifact.json");
    f.write("{\"x\": 1}\n");
    RunManifest m;
    m.command = {"memoforge", "test"};
    m.outputs[f.path] = sha256_file(f.path);
    m.tool_version = "memoforge test";
    TempFile mf("artifact.manifest.json");
    save_manifest(m, mf.path);
    RunManifest loaded = load_manifest(mf.path);
    CHECK_NOTHROW(verify_manifest(loaded));
    f.write("{\"x\": 2}\n");
    CHECK_THROWS_WITH_AS(verify_manifest(loaded), doctest::Contains("HashMismatch"), Error);
}

TEST_CASE("report, bounds, plan, and trace artifacts reload to equal values") {
    // report round trip on the full length language
    lang::Language L = lang::gen_lcp(lang::Alphabet::generic(2), 3, lang::LcpVariant::All);
    io::ReportBundle rb{L.alphabet, memo::check_no_cot(L), memo::check_cot(L),
                        memo::quick_cot_conditions(L)};
    std::string rj = io::report_to_json(rb);
    io::ReportBundle rb2 = io::report_from_json(rj);
    CHECK(io::report_to_json(rb2) == rj);
    CHECK(rb2.no_cot.holds == rb.no_cot.holds);
    CHECK(rb2.cot.witnesses.entries.size() == rb.cot.witnesses.entries.size());

    // bounds round trip
    auto v = analysis::lower_bound_check(100, 3, 3, 5);
    std::string bj = io::bounds_to_json(v);
    auto v2 = io::bounds_from_json(bj);
    CHECK(io::bounds_to_json(v2) == bj);
    CHECK(v2.labelings.dec == v.labelings.dec);

    // plan round trip (CoT build so the augmented block is exercised)
    lang::Language E = lang::gen_lcp(lang::Alphabet::generic(2), 2, lang::LcpVariant::Eq1);
    synth::SynthOptions sopts;
    auto sr = synth::synth_cot(E, sopts);
    std::string pj = io::plan_to_json(sr.plan, E.alphabet);
    auto p2 = io::plan_from_json(pj);
    CHECK(io::plan_to_json(p2, E.alphabet) == pj);
    REQUIRE(p2.feature_table.size() == sr.plan.feature_table.size());
    for (size_t i = 0; i < p2.feature_table.size(); ++i)
        for (size_t c = 0; c < p2.feature_table[i].size(); ++c)
            CHECK(p2.feature_table[i][c].bit_equal(sr.plan.feature_table[i][c]));
    CHECK(p2.separation.bit_equal(sr.plan.separation));
    REQUIRE(p2.prefix_language.has_value());
    CHECK(p2.prefix_language->samples == sr.plan.prefix_language->samples);
}

TEST_CASE("trace JSON is well formed") {
    auto m = testutil::averaging_model();
    tx::CoTTrace t;
    tx::CoTStep st;
    st.symbol = 2;
    st.confidence = BigReal::from_long(1, 256);
    st.logits = {BigReal::from_long(1, 256), BigReal::from_long(0, 256), BigReal::from_long(0, 256)};
    t.steps.push_back(std::move(st));
    tx::CoTStep stop;
    stop.symbol = lang::kStop;
    stop.confidence = BigReal::from_long(2, 256);
    stop.logits = {BigReal::from_long(0, 256), BigReal::from_long(0, 256), BigReal::from_long(2, 256)};
    t.steps.push_back(std::move(stop));
    t.terminated = true;
    t.final_label = 2;
    std::string j = tx::trace_to_json(m, {1, 1}, t);
    CHECK(j.find("\"final_label\": \"b\"") != std::string::npos);
    CHECK(j.find("<stop>") != std::string::npos);
    // reload is bit-faithful through the hex fields
    lang::Sentence in;
    tx::CoTTrace t2 = tx::trace_from_json(j, &in);
    CHECK(in == lang::Sentence{1, 1});
    REQUIRE(t2.steps.size() == t.steps.size());
    for (size_t k = 0; k < t.steps.size(); ++k) {
        CHECK(t2.steps[k].symbol == t.steps[k].symbol);
        CHECK(t2.steps[k].confidence.bit_equal(t.steps[k].confidence));
        for (size_t c = 0; c < t.steps[k].logits.size(); ++c)
            CHECK(t2.steps[k].logits[c].bit_equal(t.steps[k].logits[c]));
    }
    CHECK(tx::trace_to_json(m, in, t2) == j);
}
