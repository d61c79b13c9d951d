#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kgraph/crmod.hpp"
#include "kgraph/graphs.hpp"
#include "kgraph/kengine.hpp"
#include "kgraph/lessolver.hpp"

using namespace kgraph;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kChecksFailed = 1;
constexpr int kInputError = 2;
constexpr int kAmbiguous = 3;
constexpr int kNotStabilized = 4;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw GraphError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool looks_like_module(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    return j.is_object() && j.contains("ko") && j.contains("ku");
}

json group_json(const AbGroup& g) {
    json j;
    j["rank"] = g.free_rank;
    json t = json::array();
    for (const Int& d : g.torsion) t.push_back(d.get_si());
    j["torsion"] = t;
    return j;
}

std::string ko_line(const std::array<AbGroup, 8>& ko) {
    std::string s = "KO = (";
    for (int j = 0; j < 8; ++j) s += ko[j].str() + (j < 7 ? ", " : ")");
    return s;
}

void print_log(const std::string& title, const std::vector<std::string>& lines) {
    if (lines.empty()) return;
    std::cout << title << ":\n";
    for (const auto& l : lines) std::cout << "  " << l << "\n";
}

struct KOPipeline {
    KUResult ku;
    RealRows rows;
    AssembledKO asmko;
    SolveResult solve;
};

/** Rank-1 KO pipeline: complex groups, real rows, extension assembly,
 *  completion through the long exact sequence. */
KOPipeline run_rank1(const GraphFile& g, long window, long les_bound, long torsion_cap) {
    KOPipeline p;
    p.ku = complex_k(g, window);
    p.rows = real_rows(g, window);
    p.asmko = assemble_rank1(p.rows);
    PartialKO partial;
    for (int j = 0; j < 8; ++j) {
        if (p.asmko.ko[j].known)
            partial.fixed[j] = p.asmko.ko[j].value;
        else if (!p.asmko.choices[j].empty())
            partial.choices[j] = p.asmko.choices[j];
    }
    partial.filter = [&rows = p.rows](int j, const AbGroup& cand) {
        return row_candidate_ok(rows, j, cand);
    };
    SolveOptions opts;
    opts.les_bound = les_bound;
    opts.torsion_cap = torsion_cap;
    p.solve = solve_ko({p.ku.k0, p.ku.k1}, partial, opts);
    return p;
}

int cmd_check(const std::string& path, bool require_simplicity) {
    GraphFile g = parse_graph_json(slurp(path));
    std::cout << "PASS parse: rank " << g.rank() << (g.periodic ? ", eventually periodic" : "")
              << (g.inv || g.ep_inv ? ", with involution" : "") << "\n";
    ValidationReport rep = validate(g);
    for (const auto& w : rep.warnings) std::cout << "WARN " << w.code << ": " << w.message << "\n";
    for (const auto& e : rep.errors) std::cout << "FAIL " << e.code << ": " << e.message << "\n";
    if (rep.ok())
        std::cout << "PASS structure: colors commute, source-free, involution consistent\n";

    bool simple_ok = true;
    if (g.rank() == 1) {
        SimplicityCert cert = simplicity_certificate(g);
        simple_ok = cert.simple();
        std::string tag = cert.truncation_based ? " (checked on a finite window)" : "";
        if (cert.simple()) {
            std::cout << "PASS simplicity: hereditary closure trivial, every cycle has an entrance"
                      << tag << "\n";
        } else {
            std::cout << "FAIL simplicity" << tag << ":";
            for (const auto& n : cert.notes) std::cout << " " << n << ";";
            std::cout << "\n";
        }
    } else {
        std::cout << "SKIP simplicity: certificate covers rank 1 only\n";
    }
    if (!rep.ok()) return kChecksFailed;
    if (require_simplicity && !simple_ok) return kChecksFailed;
    return kOk;
}

int cmd_ku(const std::string& path, long window, const std::string& format) {
    GraphFile g = parse_graph_json(slurp(path));
    KUResult r = complex_k(g, window);
    if (format == "json") {
        json j;
        j["k0"] = group_json(r.k0);
        j["k1"] = group_json(r.k1);
        j["stabilized"] = r.stabilized;
        j["window"] = r.window_used;
        j["coker_log"] = r.coker_log;
        j["ker_log"] = r.ker_log;
        j["coker_survivors"] = r.coker_survivors;
        j["ker_survivors"] = r.ker_survivors;
        j["notes"] = r.notes;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "K_0 = " << r.k0.str() << "\n";
        std::cout << "K_1 = " << r.k1.str() << "\n";
        if (g.periodic)
            std::cout << (r.stabilized ? "stabilized with window " : "NOT stabilized at window ")
                      << r.window_used << "\n";
        print_log("derivation log (cokernel)", r.coker_log);
        print_log("derivation log (kernel)", r.ker_log);
        if (!r.ker_survivors.empty()) {
            std::cout << "kernel survivors:";
            for (const auto& s : r.ker_survivors) std::cout << " " << s;
            std::cout << "\n";
            for (size_t c = 0; c < r.ker_basis.cols(); ++c) {
                std::cout << "kernel solution " << c + 1 << ":";
                for (size_t i = 0; i < r.ker_basis.rows(); ++i)
                    std::cout << " " << r.ker_survivors[i] << "=" << r.ker_basis(i, c).get_str();
                std::cout << "\n";
            }
        }
        print_log("notes", r.notes);
    }
    if (!r.stabilized) return kNotStabilized;
    if (r.k0_ambiguous || r.k1_ambiguous) return kAmbiguous;
    return kOk;
}

int cmd_ko(const std::string& path, long window, long les_bound, long torsion_cap,
           const std::string& format) {
    GraphFile g = parse_graph_json(slurp(path));
    if (g.rank() == 2) {
        RealRows rows = real_rows(g, window);
        if (format == "json") {
            json j;
            j["rank"] = 2;
            j["rows"] = render_rows(rows);
            j["notes"] = rows.notes;
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << render_rows(rows);
            print_log("notes", rows.notes);
            std::cout << "rank-2 input: row systems only, no long exact sequence completion\n";
        }
        return kOk;
    }
    if (g.rank() != 1) throw GraphError("ko supports rank 1 and rank 2 inputs");

    KOPipeline p = run_rank1(g, window, les_bound, torsion_cap);
    json j;
    if (format == "json") {
        j["k0"] = group_json(p.ku.k0);
        j["k1"] = group_json(p.ku.k1);
        j["rows"] = render_rows(p.rows);
        j["assembly_notes"] = p.asmko.notes;
        j["solver_notes"] = p.solve.notes;
    } else {
        std::cout << render_rows(p.rows);
        std::cout << "KU = (" << p.ku.k0.str() << ", " << p.ku.k1.str() << ")\n";
        print_log("assembly", p.asmko.notes);
    }
    if (!p.ku.stabilized || !p.rows.stabilized) {
        std::cerr << "not stabilized within window " << window << "\n";
        if (format == "json") std::cout << j.dump(2) << "\n";
        return kNotStabilized;
    }
    if (p.solve.solutions.size() == 1 && !p.solve.bound_exhausted) {
        const GradedCRModule& m = p.solve.solutions[0];
        std::array<std::optional<AbGroup>, 8> t;
        for (int i = 0; i < 8; ++i) t[i] = m.ko[i];
        DeduceResult ded = deduce(t, m.ku);
        if (format == "json") {
            j["module"] = json::parse(module_to_json(m));
            j["trace"] = ded.trace;
            std::cout << j.dump(2) << "\n";
        } else {
            print_log("long exact sequence trace", ded.trace);
            std::cout << render_module(m);
            std::cout << ko_line(m.ko) << "\n";
        }
        return kOk;
    }
    // No unique completion: list what survived.
    json cands = json::array();
    if (format != "json")
        std::cout << "candidate completions: " << p.solve.solutions.size() << "\n";
    for (size_t i = 0; i < p.solve.solutions.size(); ++i) {
        if (format == "json")
            cands.push_back(json::parse(module_to_json(p.solve.solutions[i])));
        else
            std::cout << "candidate " << i + 1 << ": " << ko_line(p.solve.solutions[i].ko) << "\n";
    }
    if (format == "json") {
        j["candidates"] = cands;
        j["bound_exhausted"] = p.solve.bound_exhausted;
        std::cout << j.dump(2) << "\n";
    } else {
        print_log("solver notes", p.solve.notes);
    }
    return p.solve.bound_exhausted ? kNotStabilized : kAmbiguous;
}

void print_module_verdicts(const GradedCRModule& m, long max_n, const std::string& format) {
    auto match = identify(m, max_n);
    Rank1Obstruction r1 = rank1_obstruction(m);
    Rank2Obstruction r2 = rank2_obstruction(m);
    const char* r2name = r2.status == R2Status::Obstructed     ? "obstructed"
                         : r2.status == R2Status::Unobstructed ? "unobstructed"
                                                               : "inapplicable";
    if (format == "json") {
        json j;
        j["match"] = match ? json(*match) : json(nullptr);
        j["rank1_obstructed"] = r1.obstructed;
        j["rank1_reason"] = r1.reason;
        j["rank2_status"] = r2name;
        j["rank2_trace"] = r2.trace;
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::cout << render_module(m);
    if (match)
        std::cout << "match: " << *match << "\n";
    else
        std::cout << "no catalog match up to E(" << max_n << ")\n";
    if (r1.obstructed)
        std::cout << "rank-1 obstruction: " << r1.reason << "\n";
    else
        std::cout << "rank-1 obstruction: none\n";
    std::cout << "rank-2 obstruction: " << r2name << "\n";
    for (const auto& l : r2.trace) std::cout << "  " << l << "\n";
}

int cmd_identify(const std::string& path, long max_n, long window, long les_bound,
                 long torsion_cap, const std::string& format) {
    std::string text = slurp(path);
    if (looks_like_module(text)) {
        print_module_verdicts(module_from_json(text), max_n, format);
        return kOk;
    }
    GraphFile g = parse_graph_json(text);
    if (g.rank() != 1) throw GraphError("identify needs a rank-1 graph or a module file");
    KOPipeline p = run_rank1(g, window, les_bound, torsion_cap);
    if (!p.ku.stabilized || !p.rows.stabilized) {
        std::cerr << "not stabilized within window " << window << "\n";
        return kNotStabilized;
    }
    if (p.solve.bound_exhausted) {
        std::cerr << "search bound exhausted; completion undecided\n";
        return kNotStabilized;
    }
    if (p.solve.solutions.size() != 1) {
        std::cerr << "no unique completion (" << p.solve.solutions.size() << " candidates)\n";
        for (const auto& s : p.solve.solutions) std::cerr << "  " << ko_line(s.ko) << "\n";
        return kAmbiguous;
    }
    print_module_verdicts(p.solve.solutions[0], max_n, format);
    return kOk;
}

int cmd_product(const std::vector<std::string>& paths, const std::string& out) {
    std::vector<GraphFile> gs;
    for (const auto& p : paths) {
        GraphFile g = parse_graph_json(slurp(p));
        if (g.periodic)
            throw GraphError("product factors must be finite; compute the module of '" + p +
                             "' and use kunneth instead");
        gs.push_back(std::move(g));
    }
    GraphFile prod = gs[0];
    for (size_t i = 1; i < gs.size(); ++i) prod = product(prod, gs[i]);
    std::ofstream os(out);
    if (!os.good()) throw GraphError("cannot write '" + out + "'");
    os << graph_to_json(prod);
    std::cout << "wrote rank-" << prod.rank() << " product with " << prod.finite.n()
              << " vertices to " << out << "\n";
    return kOk;
}

/** `--with` specifier: R@i, C@i, E(n)@i, or a module file path with an
 *  optional @i suffix. */
GradedCRModule parse_with(const std::string& spec) {
    std::string name = spec;
    long shift = 0;
    if (auto at = spec.rfind('@'); at != std::string::npos) {
        name = spec.substr(0, at);
        try {
            shift = std::stol(spec.substr(at + 1));
        } catch (...) {
            throw GraphError("bad shift in '" + spec + "'");
        }
    }
    GradedCRModule base;
    if (name == "R") {
        base = standard_R();
    } else if (name == "C") {
        base = standard_C();
    } else if (name.size() > 3 && name.rfind("E(", 0) == 0 && name.back() == ')') {
        long n = 0;
        try {
            n = std::stol(name.substr(2, name.size() - 3));
        } catch (...) {
            throw GraphError("bad family index in '" + spec + "'");
        }
        base = standard_E(n);
    } else {
        base = module_from_json(slurp(name));
    }
    return suspend(base, shift);
}

int cmd_kunneth(const std::vector<long>& shifts, const std::string& with_spec, long max_n,
                const std::string& format) {
    GradedCRModule right = parse_with(with_spec);
    GradedCRModule result = tensor_free(shifts, right);
    auto match = identify(result, max_n);
    if (format == "json") {
        json j;
        j["module"] = json::parse(module_to_json(result));
        j["match"] = match ? json(*match) : json(nullptr);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << render_module(result);
        std::cout << ko_line(result.ko) << "\n";
        if (match) std::cout << "match: " << *match << "\n";
    }
    return kOk;
}

// -------------------------------------------------------------------------
// Regression corpus: each fixture in <dir>/expected names an input file and
// the values to check. Only the fields present are compared.
// -------------------------------------------------------------------------

struct FixtureRun {
    bool pass = true;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

void run_graph_fixture(const json& fx, const GraphFile& g, long window, long les_bound,
                       long torsion_cap, long max_n, FixtureRun& out) {
    if (fx.contains("simple")) {
        bool simple = simplicity_certificate(g).simple();
        out.expect(simple == fx["simple"].get<bool>(),
                   "simplicity certificate disagrees with fixture");
    }
    if (fx.contains("ku")) {
        KUResult r = complex_k(g, window);
        out.expect(r.stabilized, "complex side did not stabilize");
        out.expect(r.k0.str() == fx["ku"][0].get<std::string>(),
                   "K_0 = " + r.k0.str() + ", expected " + fx["ku"][0].get<std::string>());
        out.expect(r.k1.str() == fx["ku"][1].get<std::string>(),
                   "K_1 = " + r.k1.str() + ", expected " + fx["ku"][1].get<std::string>());
    }
    if (fx.contains("ko") || fx.contains("identify")) {
        KOPipeline p = run_rank1(g, window, les_bound, torsion_cap);
        out.expect(p.solve.solutions.size() == 1 && !p.solve.bound_exhausted,
                   "no unique KO completion");
        if (p.solve.solutions.size() == 1) {
            const GradedCRModule& m = p.solve.solutions[0];
            if (fx.contains("ko"))
                for (int j = 0; j < 8; ++j)
                    out.expect(m.ko[j].str() == fx["ko"][j].get<std::string>(),
                               "KO_" + std::to_string(j) + " = " + m.ko[j].str() + ", expected " +
                                   fx["ko"][j].get<std::string>());
            if (fx.contains("identify")) {
                auto id = identify(m, max_n);
                out.expect(id.has_value() && *id == fx["identify"].get<std::string>(),
                           "identify gave " + (id ? *id : std::string("no match")));
            }
        }
    }
}

void run_module_fixture(const json& fx, const GradedCRModule& m, long max_n, FixtureRun& out) {
    if (fx.contains("identify")) {
        auto id = identify(m, max_n);
        out.expect(id.has_value() && *id == fx["identify"].get<std::string>(),
                   "identify gave " + (id ? *id : std::string("no match")));
    }
    if (fx.contains("rank1_obstructed"))
        out.expect(rank1_obstruction(m).obstructed == fx["rank1_obstructed"].get<bool>(),
                   "rank-1 obstruction flag disagrees");
    if (fx.contains("rank2_obstructed"))
        out.expect((rank2_obstruction(m).status == R2Status::Obstructed) ==
                       fx["rank2_obstructed"].get<bool>(),
                   "rank-2 obstruction flag disagrees");
    if (fx.contains("verify")) {
        VerifyStatus st = verify_module(m).status;
        const char* name = st == VerifyStatus::Consistent     ? "consistent"
                           : st == VerifyStatus::Inconsistent ? "inconsistent"
                                                              : "unknown";
        out.expect(fx["verify"].get<std::string>() == name,
                   std::string("verifier returned ") + name);
    }
}

int cmd_corpus(const std::string& dir, long window, long les_bound, long torsion_cap,
               long max_n) {
    fs::path expected = fs::path(dir) / "expected";
    if (!fs::is_directory(expected))
        throw GraphError("no fixture directory at '" + expected.string() + "'");
    std::vector<fs::path> fixtures;
    for (const auto& e : fs::directory_iterator(expected))
        if (e.path().extension() == ".json") fixtures.push_back(e.path());
    std::sort(fixtures.begin(), fixtures.end());
    if (fixtures.empty()) throw GraphError("no fixtures in '" + expected.string() + "'");

    int passed = 0;
    for (const auto& fpath : fixtures) {
        FixtureRun run;
        std::string label = fpath.stem().string();
        try {
            json fx = json::parse(slurp(fpath.string()));
            std::string text = slurp((fs::path(dir) / fx["file"].get<std::string>()).string());
            if (looks_like_module(text))
                run_module_fixture(fx, module_from_json(text), max_n, run);
            else
                run_graph_fixture(fx, parse_graph_json(text), window, les_bound, torsion_cap,
                                  max_n, run);
        } catch (const std::exception& ex) {
            run.pass = false;
            run.detail = ex.what();
        }
        if (run.pass) {
            ++passed;
            std::cout << "PASS " << label << "\n";
        } else {
            std::cout << "FAIL " << label << ": " << run.detail << "\n";
        }
    }
    std::cout << passed << " of " << fixtures.size() << " fixtures passed\n";
    return passed == (int)fixtures.size() ? kOk : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"K-theory invariants of rank-k graphs with involution"};
    app.require_subcommand(1);

    long window = 16, les_bound = 8, torsion_cap = 16, max_n = 15;
    std::string format = "text";
    std::string path, out = "product.json", with_spec;
    std::vector<std::string> paths;
    std::vector<long> shifts;
    bool require_simplicity = false;

    auto add_common = [&](CLI::App* c, bool kth) {
        c->add_option("--stabilize-window", window, "window bound for periodic stabilization");
        if (kth) {
            c->add_option("--les-bound", les_bound, "entry bound for the hom search");
            c->add_option("--torsion-cap", torsion_cap, "order cap for candidate torsion");
            c->add_option("--catalog-max-n", max_n, "largest family index tried by identify");
        }
        c->add_option("--format", format, "text or json")
            ->check(CLI::IsMember({"text", "json"}));
    };

    auto* check = app.add_subcommand("check", "validate a graph file");
    check->add_option("path", path, "graph file")->required();
    check->add_flag("--simplicity", require_simplicity,
                    "fail unless the simplicity certificate is granted");

    auto* ku = app.add_subcommand("ku", "complex K-theory of a graph");
    ku->add_option("path", path, "graph file")->required();
    add_common(ku, false);

    auto* ko = app.add_subcommand("ko", "real K-theory of a rank-1 graph with involution");
    ko->add_option("path", path, "graph file")->required();
    add_common(ko, true);

    auto* ident = app.add_subcommand("identify", "match a result against the catalog");
    ident->add_option("path", path, "graph or module file")->required();
    add_common(ident, true);

    auto* prod = app.add_subcommand("product", "cartesian product of finite graphs");
    prod->add_option("paths", paths, "factor graph files")->required()->expected(-2);
    prod->add_option("-o,--output", out, "output graph file");

    auto* kun = app.add_subcommand("kunneth", "tensor a free module chain against a table");
    kun->add_option("--shifts", shifts, "comma-separated suspension degrees of the free factors")
        ->required()
        ->delimiter(',');
    kun->add_option("--with", with_spec, "right factor: R@i, C@i, E(n)@i, or a module file")
        ->required();
    kun->add_option("--catalog-max-n", max_n, "largest family index tried by identify");
    kun->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* corp = app.add_subcommand("corpus", "run the regression corpus");
    corp->add_option("--dir", path, "corpus directory with an expected/ subdirectory")
        ->required();
    add_common(corp, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(path, require_simplicity);
        if (ku->parsed()) return cmd_ku(path, window, format);
        if (ko->parsed()) return cmd_ko(path, window, les_bound, torsion_cap, format);
        if (ident->parsed())
            return cmd_identify(path, max_n, window, les_bound, torsion_cap, format);
        if (prod->parsed()) return cmd_product(paths, out);
        if (kun->parsed()) return cmd_kunneth(shifts, with_spec, max_n, format);
        if (corp->parsed()) return cmd_corpus(path, window, les_bound, torsion_cap, max_n);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
