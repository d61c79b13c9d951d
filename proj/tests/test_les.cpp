#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "kgraph/crmod.hpp"
#include "kgraph/kengine.hpp"
#include "kgraph/lessolver.hpp"

using namespace kgraph;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

static GraphFile load(const std::string& name) {
    return parse_graph_json(slurp(std::string(KGRAPH_CORPUS_DIR) + "/" + name));
}

static AbGroup Z(long r = 1) { return AbGroup::free_group(r); }
static AbGroup Zn(long n) { return AbGroup::cyclic(n); }

static std::array<std::optional<AbGroup>, 8> full_table(const GradedCRModule& m) {
    std::array<std::optional<AbGroup>, 8> t;
    for (int j = 0; j < 8; ++j) t[j] = m.ko[j];
    return t;
}

TEST_CASE("deduction engine on complete true tables") {
    for (const auto& [name, mod] : catalog(9)) {
        CAPTURE(name);
        DeduceResult d = deduce(full_table(mod), mod.ku);
        CHECK(d.consistent);
        CHECK_FALSE(d.trace.empty());
        for (const auto& line : d.trace) CHECK(line.rfind("RULE ", 0) == 0);
    }
    for (long i = 1; i < 8; ++i) {
        GradedCRModule s = suspend(standard_R(), i);
        CAPTURE(i);
        CHECK(deduce(full_table(s), s.ku).consistent);
    }
}

TEST_CASE("deduction engine finds contradictions with a cited rule") {
    GradedCRModule m = standard_R();
    m.ko[1] = AbGroup::zero();
    DeduceResult d = deduce(full_table(m), m.ku);
    REQUIRE_FALSE(d.consistent);
    REQUIRE_FALSE(d.trace.empty());
    CHECK(d.trace.back().find("contradiction") != std::string::npos);

    GradedCRModule w = standard_R();
    w.ko[0] = Zn(2);
    CHECK_FALSE(deduce(full_table(w), w.ku).consistent);

    GradedCRModule e = standard_E(5);
    e.ko[1] = AbGroup::zero();
    CHECK_FALSE(deduce(full_table(e), e.ku).consistent);
}

TEST_CASE("deduction is usable on partial tables") {
    GradedCRModule m = standard_R();
    std::array<std::optional<AbGroup>, 8> t;
    t[0] = m.ko[0];
    t[4] = m.ko[4];
    CHECK(deduce(t, m.ku).consistent);

    // Two entries suffice for a contradiction when the complex side
    // vanishes in even degrees: the image of eta_1 must then be all of
    // KO_2 yet also a quotient of KO_1.
    std::array<std::optional<AbGroup>, 8> u;
    u[1] = Zn(2);
    u[2] = AbGroup{0, {2, 2}};
    std::array<AbGroup, 2> ku = {AbGroup::zero(), Z()};
    DeduceResult d = deduce(u, ku);
    CHECK_FALSE(d.consistent);
}

TEST_CASE("verifier accepts the standard modules with a witness") {
    auto mods = catalog(9);
    mods.emplace_back("suspension of K(R)", suspend(standard_R(), 1));
    mods.emplace_back("suspension of K(C)", suspend(standard_C(), 1));
    for (const auto& [name, mod] : mods) {
        CAPTURE(name);
        VerifyResult r = verify_module(mod);
        REQUIRE(r.status == VerifyStatus::Consistent);
        CHECK(r.witness.size() == 24);
        CHECK(r.witness[0].first == "eta_0");
        CHECK(r.witness[1].first == "c_1");
        CHECK(r.witness[2].first == "partial_1");
    }
}

TEST_CASE("verifier rejects corrupted tables") {
    SUBCASE("dropping the order-2 torsion from KO_1 of K(R)") {
        GradedCRModule m = standard_R();
        m.ko[1] = AbGroup::zero();
        VerifyResult r = verify_module(m);
        CHECK(r.status == VerifyStatus::Inconsistent);
        CHECK_FALSE(r.certificate.empty());
    }
    SUBCASE("shrinking KO_0 of K(R) to Z_2") {
        GradedCRModule m = standard_R();
        m.ko[0] = Zn(2);
        VerifyResult r = verify_module(m);
        CHECK(r.status == VerifyStatus::Inconsistent);
        CHECK_FALSE(r.certificate.empty());
    }
    SUBCASE("dropping KO_1 of K(E(5))") {
        GradedCRModule m = standard_E(5);
        m.ko[1] = AbGroup::zero();
        VerifyResult r = verify_module(m);
        CHECK(r.status == VerifyStatus::Inconsistent);
        CHECK_FALSE(r.certificate.empty());
    }
    SUBCASE("halving KU_0 of K(C) breaks the rank count") {
        GradedCRModule m = standard_C();
        m.ku[0] = Z();
        VerifyResult r = verify_module(m);
        CHECK(r.status == VerifyStatus::Inconsistent);
        REQUIRE_FALSE(r.certificate.empty());
        CHECK(r.certificate[0].find("rank") != std::string::npos);
    }
    SUBCASE("planting torsion in a free degree of a suspension") {
        GradedCRModule m = suspend(standard_R(), 1);
        m.ko[3] = Zn(2);
        VerifyResult r = verify_module(m);
        CHECK(r.status == VerifyStatus::Inconsistent);
        CHECK_FALSE(r.certificate.empty());
    }
}

TEST_CASE("solver with vanishing complex K-theory") {
    SolveResult r = solve_ko({AbGroup::zero(), AbGroup::zero()}, PartialKO{});
    REQUIRE(r.solutions.size() == 1);
    CHECK_FALSE(r.bound_exhausted);
    for (int j = 0; j < 8; ++j) CHECK(r.solutions[0].ko[j].is_zero());
}

static SolveResult solve_graph(const std::string& file, const char* expect_name) {
    GraphFile g = load(file);
    KUResult ku = complex_k(g);
    REQUIRE(ku.stabilized);
    RealRows rows = real_rows(g);
    REQUIRE(rows.stabilized);
    AssembledKO asmko = assemble_rank1(rows);

    PartialKO partial;
    for (int j = 0; j < 8; ++j) {
        if (asmko.ko[j].known)
            partial.fixed[j] = asmko.ko[j].value;
        else if (!asmko.choices[j].empty())
            partial.choices[j] = asmko.choices[j];
    }
    partial.filter = [&rows](int j, const AbGroup& cand) {
        return row_candidate_ok(rows, j, cand);
    };
    SolveResult r = solve_ko({ku.k0, ku.k1}, partial);
    CHECK_FALSE(r.bound_exhausted);
    REQUIRE_FALSE(r.solutions.empty());
    for (const auto& s : r.solutions) {
        auto id = identify(s);
        CAPTURE(render_module(s));
        REQUIRE(id.has_value());
        CHECK(*id == expect_name);
    }
    return r;
}

TEST_CASE("twisted periodic graph: KO groups are pinned uniquely") {
    SolveResult r = solve_graph("lambda.json", "Sigma^1 K(R)");
    CHECK(r.solutions.size() == 1);
    const GradedCRModule& s = r.solutions[0];
    CHECK(s == suspend(standard_R(), 1));
    CHECK(s.ko[0] == Zn(2));
    CHECK(s.ko[1] == Zn(2));
    CHECK(s.ko[3] == Z());
    CHECK(s.ko[7] == Z());
}

TEST_CASE("point modules from the involution corpus") {
    SUBCASE("identity involution point") {
        SolveResult r = solve_graph("appendix-i0.json", "K(R)");
        CHECK(r.solutions.size() == 1);
        CHECK(r.solutions[0].ko[2] == Zn(2));
    }
    SUBCASE("one-step twist") {
        SolveResult r = solve_graph("appendix-im1.json", "Sigma^7 K(R)");
        CHECK(r.solutions.size() == 1);
    }
    SUBCASE("two-step twist") {
        SolveResult r = solve_graph("appendix-im2.json", "Sigma^6 K(R)");
        CHECK(r.solutions.size() == 1);
        CHECK(r.solutions[0].ko[3] == Zn(2));
        CHECK(r.solutions[0].ko[4] == Zn(2));
    }
}

TEST_CASE("verifier confirms the solved tables") {
    GradedCRModule m = suspend(standard_R(), 1);
    VerifyResult r = verify_module(m);
    REQUIRE(r.status == VerifyStatus::Consistent);
    // The witness realizes the connecting map degree pairing: eta_0 is an
    // isomorphism Z_2 -> Z_2 here, so its single entry is odd.
    for (const auto& [name, mat] : r.witness) {
        if (name == "eta_0") {
            REQUIRE(mat.rows() == 1);
            REQUIRE(mat.cols() == 1);
            CHECK(mat(0, 0) % 2 != 0);
        }
    }
}
