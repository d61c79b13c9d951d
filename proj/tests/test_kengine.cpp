#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "kgraph/kengine.hpp"

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

static AbGroup z2n(size_t n) { return AbGroup{0, std::vector<Int>(n, 2)}; }

TEST_CASE("complex K-theory of the corpus rank-1 graphs") {
    SUBCASE("twisted periodic graph") {
        KUResult r = complex_k(load("lambda.json"));
        REQUIRE(r.stabilized);
        CHECK(r.window_used == 6);
        CHECK(r.k0.is_zero());
        CHECK(r.k1 == AbGroup::free_group(1));
        CHECK(r.ker_survivors.size() == 6);
        CHECK_FALSE(r.coker_log.empty());
        CHECK_FALSE(r.ker_log.empty());
    }
    SUBCASE("i0") {
        KUResult r = complex_k(load("appendix-i0.json"));
        REQUIRE(r.stabilized);
        CHECK(r.k0 == AbGroup::free_group(1));
        CHECK(r.k1.is_zero());
    }
    SUBCASE("im1") {
        KUResult r = complex_k(load("appendix-im1.json"));
        REQUIRE(r.stabilized);
        CHECK(r.k0.is_zero());
        CHECK(r.k1 == AbGroup::free_group(1));
    }
    SUBCASE("im2") {
        KUResult r = complex_k(load("appendix-im2.json"));
        REQUIRE(r.stabilized);
        CHECK(r.k0 == AbGroup::free_group(1));
        CHECK(r.k1.is_zero());
    }
    SUBCASE("one loop / two loops") {
        KUResult circle = complex_k(load("one-loop.json"));
        CHECK(circle.k0 == AbGroup::free_group(1));
        CHECK(circle.k1 == AbGroup::free_group(1));
        KUResult cuntz2 = complex_k(load("two-loops.json"));
        CHECK(cuntz2.k0.is_zero());
        CHECK(cuntz2.k1.is_zero());
    }
}

TEST_CASE("rank-2 and rank-3 Koszul homology") {
    GraphFile torus = load("torus.json");
    KUResult r2 = complex_k(torus);
    CHECK(r2.k0 == AbGroup::free_group(2));
    CHECK(r2.k1 == AbGroup::free_group(2));
    CHECK_FALSE(r2.k0_ambiguous);

    GraphFile loop = load("one-loop.json");
    GraphFile three = product(torus, loop);
    REQUIRE(three.rank() == 3);
    KUResult r3 = complex_k(three);
    CHECK(r3.k0 == AbGroup::free_group(4));
    CHECK(r3.k1 == AbGroup::free_group(4));
}

TEST_CASE("products of free-K rank-1 graphs satisfy the Kunneth formula") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<size_t> size(1, 5);
    std::uniform_int_distribution<int> entry(-1, 2);
    std::uniform_int_distribution<size_t> pickmul(1, 2);

    auto random_free_graph = [&]() {
        for (;;) {
            size_t n = size(rng);
            KGraph k;
            k.rank = 1;
            for (size_t i = 0; i < n; ++i) k.vertices.push_back("v" + std::to_string(i));
            IMat M(n, n);
            for (size_t i = 0; i < n; ++i) {
                bool any = false;
                for (size_t j = 0; j < n; ++j) {
                    int e = std::max(0, entry(rng));
                    M(i, j) = e;
                    any = any || e > 0;
                }
                if (!any) M(i, i % n) = (long)pickmul(rng);
            }
            k.adj = {M};
            GraphFile g;
            g.finite = k;
            KUResult r = complex_k(g);
            if (r.k0.torsion.empty()) return std::make_pair(g, r);
        }
    };

    for (int trial = 0; trial < 12; ++trial) {
        CAPTURE(trial);
        auto [ga, ra] = random_free_graph();
        auto [gb, rb] = random_free_graph();
        long a0 = ra.k0.free_rank, a1 = ra.k1.free_rank;
        long b0 = rb.k0.free_rank, b1 = rb.k1.free_rank;
        KUResult rp = complex_k(product(ga, gb));
        CHECK(rp.k0 == AbGroup::free_group(a0 * b0 + a1 * b1));
        CHECK(rp.k1 == AbGroup::free_group(a0 * b1 + a1 * b0));
        CHECK_FALSE(rp.k0_ambiguous);
    }
}

TEST_CASE("real rows of the twisted periodic graph") {
    RealRows rows = real_rows(load("lambda.json"));
    REQUIRE(rows.stabilized);
    CHECK(rows.E[0][1].known);
    CHECK(rows.E[0][1].value == AbGroup::cyclic(2));
    CHECK(rows.E[1][1].value.is_zero());
    CHECK(rows.E[0][0].value == AbGroup::cyclic(2));
    CHECK(rows.E[1][0].value.is_zero());
    for (int q : {3, 5, 7}) {
        CHECK(rows.E[0][q].known);
        CHECK(rows.E[0][q].value.is_zero());
    }
    for (int q : {2, 4, 6}) CHECK_FALSE(rows.E[0][q].known);

    AssembledKO a = assemble_rank1(rows);
    CHECK(a.ko[0].known);
    CHECK(a.ko[0].value == AbGroup::cyclic(2));
    CHECK(a.ko[1].value == AbGroup::cyclic(2));
    for (int j : {2, 3, 4, 5, 6, 7}) CHECK_FALSE(a.ko[j].known);
}

TEST_CASE("real rows of the coreless graphs") {
    SUBCASE("i0: the four determined degrees") {
        RealRows rows = real_rows(load("appendix-i0.json"));
        REQUIRE(rows.stabilized);
        CHECK(rows.E[0][1].value == AbGroup::cyclic(2));
        CHECK(rows.E[1][1].value.is_zero());
        CHECK(rows.E[0][0].value == AbGroup::free_group(1));
        CHECK(rows.E[1][0].value.is_zero());
        CHECK(rows.E[0][6].known);  // no swapped pairs anywhere

        AssembledKO a = assemble_rank1(rows);
        CHECK(a.ko[0].value == AbGroup::free_group(1));
        CHECK(a.ko[1].value == AbGroup::cyclic(2));
        CHECK(a.ko[6].value.is_zero());
        CHECK(a.ko[7].value.is_zero());
        for (int j : {2, 3, 4, 5}) CHECK_FALSE(a.ko[j].known);
    }
    SUBCASE("im1") {
        RealRows rows = real_rows(load("appendix-im1.json"));
        REQUIRE(rows.stabilized);
        CHECK(rows.E[0][1].value.is_zero());
        CHECK(rows.E[1][1].value == AbGroup::cyclic(2));
        CHECK(rows.E[0][0].value.is_zero());
        CHECK(rows.E[1][0].value == AbGroup::free_group(1));

        AssembledKO a = assemble_rank1(rows);
        CHECK(a.ko[0].value.is_zero());
        CHECK(a.ko[1].value == AbGroup::free_group(1));
        CHECK(a.ko[6].value.is_zero());
        CHECK(a.ko[7].value.is_zero());
    }
    SUBCASE("im2: paired rays leave degree 6 open") {
        RealRows rows = real_rows(load("appendix-im2.json"));
        REQUIRE(rows.stabilized);
        CHECK(rows.E[0][1].value.is_zero());
        CHECK(rows.E[1][1].value == AbGroup::cyclic(2));
        CHECK(rows.E[0][0].value.is_zero());
        CHECK(rows.E[1][0].value.is_zero());
        CHECK_FALSE(rows.E[0][6].known);

        AssembledKO a = assemble_rank1(rows);
        CHECK(a.ko[0].value.is_zero());
        CHECK(a.ko[1].value.is_zero());
        for (int j : {2, 3, 4, 5, 6, 7}) CHECK_FALSE(a.ko[j].known);
    }
}

TEST_CASE("rank-2 real rows of the torus") {
    RealRows rows = real_rows(load("torus.json"));
    REQUIRE(rows.E.size() == 3);
    CHECK(rows.E[0][0].value == AbGroup::free_group(1));
    CHECK(rows.E[1][0].value == AbGroup::free_group(2));
    CHECK(rows.E[2][0].value == AbGroup::free_group(1));
    CHECK(rows.E[0][1].value == z2n(1));
    CHECK(rows.E[1][1].value == z2n(2));
    CHECK(rows.E[2][1].value == z2n(1));
    CHECK(rows.E[0][6].known);  // trivial involution: no swapped pairs
    CHECK_FALSE(rows.E[0][2].known);
    std::string grid = render_rows(rows);
    CHECK(grid.find("E_2") != std::string::npos);
    CHECK(grid.find("?") != std::string::npos);
}

TEST_CASE("candidate filter uses whichever row entries are known") {
    RealRows rows = real_rows(load("lambda.json"));
    CHECK(row_candidate_ok(rows, 0, AbGroup::cyclic(2)));
    CHECK_FALSE(row_candidate_ok(rows, 0, AbGroup::zero()));
    CHECK_FALSE(row_candidate_ok(rows, 0, AbGroup::free_group(1)));
    // degree 2 is fully open
    CHECK(row_candidate_ok(rows, 2, AbGroup::free_group(3)));
}
