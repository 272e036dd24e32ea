#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

#include "memoforge/analysis.hpp"
#include "memoforge/arith.hpp"
#include "memoforge/lang_io.hpp"
#include "memoforge/manifest.hpp"
#include "memoforge/memorizability.hpp"
#include "memoforge/model_io.hpp"
#include "memoforge/report_io.hpp"
#include "memoforge/sha256.hpp"
#include "memoforge/synth.hpp"

using namespace memoforge;
using ordered = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "memoforge 0.1.0";

struct Global {
    long precision_bits = 256;
    std::uint64_t seed = 1;
    std::uint64_t budget = 1'000'000;
    std::vector<std::string> argv;
};

// verdict-false exits with 2 so scripts can branch on it
struct VerdictFalse {};

class ManifestScope {
public:
    ManifestScope(const Global& g, std::string primary_output)
        : g_(g), primary_(std::move(primary_output)), start_(std::chrono::steady_clock::now()) {}
    void input(const std::string& path) { m_.inputs[path] = sha256_file(path); }
    void output(const std::string& path) { outputs_.push_back(path); }
    void finalize() {
        for (const auto& p : outputs_) m_.outputs[p] = sha256_file(p);
        m_.command = g_.argv;
        m_.seed = g_.seed;
        m_.precision_bits = g_.precision_bits;
        m_.budget = g_.budget;
        m_.tool_version = kVersion;
        m_.wall_ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                           std::chrono::steady_clock::now() - start_)
                                           .count());
        save_manifest(m_, primary_ + ".manifest.json");
    }

private:
    const Global& g_;
    std::string primary_;
    std::chrono::steady_clock::time_point start_;
    RunManifest m_;
    std::vector<std::string> outputs_;
};

// loads an artifact, honoring a sibling manifest when present
void check_sibling_manifest(const std::string& path) {
    std::ifstream probe(path + ".manifest.json");
    if (!probe) return;
    verify_manifest(load_manifest(path + ".manifest.json"));
}

lang::Sentence parse_input(const lang::Alphabet& a, const std::string& text) {
    lang::Sentence out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(a.index_of(cur));
            cur.clear();
        }
    };
    for (char c : text) {
        if (c == ' ') flush();
        else cur += c;
    }
    flush();
    if (out.empty()) throw make_error("Parse", "empty input sentence");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw make_error("Io", "cannot write " + path);
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"memoforge: dataset-to-weights compiler and verifier for "
                 "bounded-precision autoregressive transformers"};
    app.require_subcommand(1);

    Global g;
    for (int i = 0; i < argc; ++i) g.argv.push_back(argv[i]);
    app.add_option("--precision-bits", g.precision_bits, "working precision for activations");
    app.add_option("--seed", g.seed, "seed for randomized steps");
    app.add_option("--budget", g.budget, "sample/enumeration budget");

    // ---- lang ----
    auto* lang_cmd = app.add_subcommand("lang", "generate or validate languages");
    auto* gen = lang_cmd->add_subcommand("gen", "generate a language");
    std::string kind, out_path;
    int Tn = 2, nn = 3, pp = 5, fam_i = 2;
    gen->add_option("--kind", kind, "lcp|lcp-eq1|lcp-gt1|arith|family-s|family-sprime")->required();
    gen->add_option("-T", Tn, "alphabet size (lcp kinds)");
    gen->add_option("-n", nn, "max sentence length");
    gen->add_option("-p", pp, "prime modulus (arith)");
    gen->add_option("-i", fam_i, "family index");
    gen->add_option("-o", out_path, "output language JSON")->required();
    auto* validate = lang_cmd->add_subcommand("validate", "validate a language file");
    std::string val_path;
    validate->add_option("file", val_path)->required();

    // ---- check ----
    auto* check = app.add_subcommand("check", "decide the memorizability conditions");
    std::string check_lang, check_out;
    int max_wlen = -1;
    check->add_option("lang", check_lang)->required();
    check->add_option("--max-witness-len", max_wlen, "witness length cap (default L+2)");
    check->add_option("-o", check_out, "write the report JSON here");

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "construct a memorizing transformer");
    std::string synth_lang, synth_mode = "nocot", synth_out, plan_out;
    int synth_q = 3;
    synth_cmd->add_option("lang", synth_lang)->required();
    synth_cmd->add_option("--mode", synth_mode, "nocot|cot|posenc");
    synth_cmd->add_option("-q", synth_q, "parameter precision (decimal digits)");
    synth_cmd->add_option("-o", synth_out, "output model JSON")->required();
    synth_cmd->add_option("--plan", plan_out, "write the synthesis plan here");

    // ---- run / cot ----
    auto* run = app.add_subcommand("run", "single forward pass classification");
    std::string run_model, run_input;
    run->add_option("model", run_model)->required();
    run->add_option("--input", run_input, "space-separated symbols")->required();

    auto* cot = app.add_subcommand("cot", "autoregressive generation until the stop symbol");
    std::string cot_model, cot_input, trace_out;
    int cot_max_steps = -1;
    cot->add_option("model", cot_model)->required();
    cot->add_option("--input", cot_input)->required();
    cot->add_option("--max-steps", cot_max_steps);
    cot->add_option("--trace", trace_out, "write the trace JSON here");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "check a model against a language");
    std::string v_model, v_lang, v_mode = "nocot";
    verify->add_option("--model", v_model)->required();
    verify->add_option("--lang", v_lang)->required();
    verify->add_option("--mode", v_mode, "nocot|cot");

    // ---- bounds ----
    auto* bounds = app.add_subcommand("bounds", "counting lower-bound calculator");
    long b_N = 0, b_T = 0, b_q = 0, b_P = 0;
    bool b_relaxed = false;
    std::string bounds_out;
    bounds->add_option("-N", b_N)->required();
    bounds->add_option("-T", b_T)->required();
    bounds->add_option("-q", b_q)->required();
    bounds->add_option("-P", b_P)->required();
    bounds->add_flag("--relaxed", b_relaxed, "lift the N,T,q >= 3 regime restriction");
    bounds->add_option("-o", bounds_out, "write the verdict JSON here");

    // ---- experiment ----
    auto* exp = app.add_subcommand("experiment", "convergence and confidence measurements");
    auto* conv = exp->add_subcommand("converge", "family logit-distance series");
    std::string c_model, c_family = "S", c_is = "8,1024", c_csv;
    conv->add_option("--model", c_model)->required();
    conv->add_option("--family", c_family, "S|Sprime");
    conv->add_option("--i", c_is, "comma-separated indices");
    conv->add_option("--csv", c_csv, "output CSV")->required();
    auto* confx = exp->add_subcommand("confidence", "repeated-addition confidence series");
    std::string f_model, f_csv;
    int f_p = 5, f_imax = 8;
    confx->add_option("--model", f_model)->required();
    confx->add_option("-p", f_p, "prime modulus");
    confx->add_option("--imax", f_imax);
    confx->add_option("--csv", f_csv, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // usage text on the error stream
        return 1;
    }

    try {
        PrecisionConfig cfg{g.precision_bits};
        tx::EngineOpts eng{cfg, tx::Exec::Parallel, 16};

        if (gen->parsed()) {
            ManifestScope ms(g, out_path);
            lang::Language L = [&] {
                if (kind == "lcp") return lang::gen_lcp(lang::Alphabet::generic(Tn), nn, lang::LcpVariant::All, g.budget);
                if (kind == "lcp-eq1") return lang::gen_lcp(lang::Alphabet::generic(Tn), nn, lang::LcpVariant::Eq1, g.budget);
                if (kind == "lcp-gt1") return lang::gen_lcp(lang::Alphabet::generic(Tn), nn, lang::LcpVariant::Gt1, g.budget);
                if (kind == "arith") return arith::gen_arith({pp, nn}, g.budget, g.seed);
                if (kind == "family-s") return lang::gen_family_S(fam_i);
                if (kind == "family-sprime") return lang::gen_family_Sprime(fam_i);
                throw make_error("Usage", "unknown language kind '" + kind + "'");
            }();
            lang::save_language(L, out_path);
            ms.output(out_path);
            ms.finalize();
            std::cout << "wrote " << out_path << " (N=" << L.sample_count() << ", T=" << L.sym_count()
                      << ", L=" << L.max_len() << ")\n";
            return 0;
        }
        if (validate->parsed()) {
            lang::Language L = lang::load_language(val_path);
            std::cout << "valid language: N=" << L.sample_count() << " T=" << L.sym_count()
                      << " L=" << L.max_len() << "\n";
            return 0;
        }
        if (check->parsed()) {
            check_sibling_manifest(check_lang);
            lang::Language L = lang::load_language(check_lang);
            memo::CheckOptions copts;
            if (max_wlen > 0) copts.max_witness_len = max_wlen;
            copts.enumeration_budget = g.budget;
            auto r1 = memo::check_no_cot(L);
            auto r2 = memo::check_cot(L, copts);
            auto suff = memo::quick_cot_conditions(L);
            if (!check_out.empty()) {
                ManifestScope ms(g, check_out);
                ms.input(check_lang);
                write_text(check_out, io::report_to_json({L.alphabet, r1, r2, suff}));
                ms.output(check_out);
                ms.finalize();
            }
            std::cout << "no-CoT condition: " << (r1.holds ? "holds" : "fails") << "\n"
                      << "CoT condition:    " << (r2.holds ? "holds" : "fails") << "\n";
            if (!r1.holds || !r2.holds) throw VerdictFalse{};
            return 0;
        }
        if (synth_cmd->parsed()) {
            check_sibling_manifest(synth_lang);
            lang::Language L = lang::load_language(synth_lang);
            synth::SynthOptions sopts;
            sopts.q = synth_q;
            sopts.cfg = cfg;
            sopts.seed = g.seed;
            sopts.exec = tx::Exec::Parallel;
            sopts.check.enumeration_budget = g.budget;
            ManifestScope ms(g, synth_out);
            ms.input(synth_lang);
            synth::SynthResult r = [&] {
                if (synth_mode == "nocot") return synth::synth_no_cot(L, sopts);
                if (synth_mode == "cot") return synth::synth_cot(L, sopts);
                if (synth_mode == "posenc") return synth::synth_no_cot_posenc(L, sopts);
                throw make_error("Usage", "unknown mode '" + synth_mode + "'");
            }();
            r.model.prov.source_sha = sha256_file(synth_lang);
            tx::save_model(r.model, synth_out);
            ms.output(synth_out);
            if (!plan_out.empty()) {
                write_text(plan_out, io::plan_to_json(r.plan, L.alphabet));
                ms.output(plan_out);
            }
            ms.finalize();
            std::cout << "wrote " << synth_out << " (D=" << r.model.shape.D << ", W=" << r.model.shape.W
                      << ", H=" << r.model.shape.H << ", q=" << r.model.shape.q
                      << ", bits=" << r.plan.precision_bits << ", slots=" << r.plan.parameter_slots
                      << ")\n";
            return 0;
        }
        if (run->parsed()) {
            check_sibling_manifest(run_model);
            tx::TransformerModel m = tx::load_model(run_model);
            if (g.precision_bits == 256 && m.prov.precision_bits > 256)
                eng.cfg.mantissa_bits = m.prov.precision_bits;
            lang::Sentence x = parse_input(m.alphabet(), run_input);
            auto logits = tx::forward(m, x, eng);
            lang::Symbol y = tx::classify_logits(logits);
            std::cout << (y == lang::kStop ? std::string("<stop>") : m.alphabet().name(y)) << "  confidence="
                      << tx::confidence(logits).to_decimal(12) << "\n";
            return 0;
        }
        if (cot->parsed()) {
            check_sibling_manifest(cot_model);
            tx::TransformerModel m = tx::load_model(cot_model);
            if (g.precision_bits == 256 && m.prov.precision_bits > 256)
                eng.cfg.mantissa_bits = m.prov.precision_bits;
            lang::Sentence x = parse_input(m.alphabet(), cot_input);
            eng.max_steps = cot_max_steps > 0 ? cot_max_steps : m.prov.max_len_hint.value_or(13) + 3;
            tx::CoTTrace t = tx::cot_generate(m, x, eng);
            if (!trace_out.empty()) {
                ManifestScope ms(g, trace_out);
                ms.input(cot_model);
                write_text(trace_out, tx::trace_to_json(m, x, t));
                ms.output(trace_out);
                ms.finalize();
            }
            std::cout << "cot:";
            for (const auto& st : t.steps)
                std::cout << " " << (st.symbol == lang::kStop ? std::string("<stop>") : m.alphabet().name(st.symbol));
            std::cout << "\nfinal=" << m.alphabet().name(t.final_label) << "\n";
            return 0;
        }
        if (verify->parsed()) {
            check_sibling_manifest(v_model);
            check_sibling_manifest(v_lang);
            tx::TransformerModel m = tx::load_model(v_model);
            if (g.precision_bits == 256 && m.prov.precision_bits > 256)
                eng.cfg.mantissa_bits = m.prov.precision_bits;
            lang::Language L = lang::load_language(v_lang);
            auto mode = v_mode == "cot" ? analysis::VerifyMode::Cot : analysis::VerifyMode::NoCot;
            auto rep = analysis::verify_memorization(m, L, mode, eng);
            std::cout << "accuracy " << rep.correct << "/" << rep.total << " = " << rep.accuracy
                      << ", min confidence " << rep.min_confidence.to_decimal(12) << "\n";
            if (rep.accuracy < 1.0) throw VerdictFalse{};
            return 0;
        }
        if (bounds->parsed()) {
            auto v = analysis::lower_bound_check(b_N, b_T, b_q, b_P, b_relaxed);
            if (!bounds_out.empty()) {
                ManifestScope ms(g, bounds_out);
                write_text(bounds_out, io::bounds_to_json(v));
                ms.output(bounds_out);
                ms.finalize();
            }
            std::cout << "labelings T^N = " << v.labelings.dec << "\ncapacity P^3 10^(2qP) = "
                      << v.capacity.dec << "\n"
                      << (v.sufficient_in_principle ? "sufficient in principle" : "insufficient")
                      << ", min P threshold = " << v.min_P_threshold << "\n";
            if (!v.sufficient_in_principle) throw VerdictFalse{};
            return 0;
        }
        if (conv->parsed()) {
            check_sibling_manifest(c_model);
            tx::TransformerModel m = tx::load_model(c_model);
            std::vector<long> is;
            std::string cur;
            for (char ch : c_is + ",") {
                if (ch == ',') {
                    if (!cur.empty()) is.push_back(std::stol(cur));
                    cur.clear();
                } else cur += ch;
            }
            auto fam = c_family == "Sprime" ? analysis::Family::SPrime : analysis::Family::S;
            auto series = analysis::convergence_experiment(m, fam, is, eng);
            ManifestScope ms(g, c_csv);
            ms.input(c_model);
            std::string csv = "family,i,distance\n";
            for (size_t k = 0; k < series.indices.size(); ++k)
                csv += series.family + "," + std::to_string(series.indices[k]) + "," +
                       series.distances[k].to_decimal(40) + "\n";
            write_text(c_csv, csv);
            ms.output(c_csv);
            ms.finalize();
            std::cout << "wrote " << c_csv << " (" << series.indices.size() << " rows)\n";
            return 0;
        }
        if (confx->parsed()) {
            check_sibling_manifest(f_model);
            tx::TransformerModel m = tx::load_model(f_model);
            auto pts = analysis::arith_confidence_experiment(m, f_p, f_imax, eng);
            ManifestScope ms(g, f_csv);
            ms.input(f_model);
            std::string csv = "i,predicted,confidence,dist_prev\n";
            lang::Alphabet a = m.alphabet();
            for (const auto& pt : pts)
                csv += std::to_string(pt.i) + "," +
                       (pt.predicted == lang::kStop ? std::string("<stop>") : a.name(pt.predicted)) + "," +
                       pt.confidence.to_decimal(40) + "," + pt.dist_prev.to_decimal(40) + "\n";
            write_text(f_csv, csv);
            ms.output(f_csv);
            ms.finalize();
            std::cout << "wrote " << f_csv << " (" << pts.size() << " rows)\n";
            return 0;
        }
        throw make_error("Usage", "no subcommand matched");
    } catch (const VerdictFalse&) {
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
