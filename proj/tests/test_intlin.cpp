#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>
#include <vector>

#include "kgraph/intlin.hpp"

using namespace kgraph;

static IMat mat(const std::vector<std::vector<long>>& v) {
    IMat m(v.size(), v.empty() ? 0 : v[0].size());
    for (size_t i = 0; i < v.size(); ++i)
        for (size_t j = 0; j < v[i].size(); ++j) m(i, j) = v[i][j];
    return m;
}

static void subsets(size_t n, size_t k, std::vector<size_t>& cur, size_t start,
                    const std::function<void(const std::vector<size_t>&)>& f) {
    if (cur.size() == k) {
        f(cur);
        return;
    }
    for (size_t i = start; i + (k - cur.size()) <= n; ++i) {
        cur.push_back(i);
        subsets(n, k, cur, i + 1, f);
        cur.pop_back();
    }
}

// gcd of all k x k minors; 0 when every minor vanishes
static Int det_divisor(const IMat& M, size_t k) {
    Int g = 0;
    std::vector<size_t> rsel;
    subsets(M.rows(), k, rsel, 0, [&](const std::vector<size_t>& rs) {
        std::vector<size_t> csel;
        subsets(M.cols(), k, csel, 0, [&](const std::vector<size_t>& cs) {
            IMat sub(k, k);
            for (size_t i = 0; i < k; ++i)
                for (size_t j = 0; j < k; ++j) sub(i, j) = M(rs[i], cs[j]);
            g = gcd(g, det(sub));
        });
    });
    return abs(g);
}

static size_t minor_rank(const IMat& M) {
    size_t r = 0;
    for (size_t k = 1; k <= std::min(M.rows(), M.cols()); ++k)
        if (det_divisor(M, k) != 0) r = k;
    return r;
}

TEST_CASE("smith normal form against determinantal divisor oracle") {
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> dim(1, 4), ent(-4, 4);
    for (int trial = 0; trial < 200; ++trial) {
        IMat M(dim(rng), dim(rng));
        for (size_t i = 0; i < M.rows(); ++i)
            for (size_t j = 0; j < M.cols(); ++j) M(i, j) = ent(rng);

        auto s = smith_normal_form(M);
        CHECK(s.U.mul(M).mul(s.V) == s.D);
        CHECK(abs(det(s.U)) == 1);
        CHECK(abs(det(s.V)) == 1);

        size_t lim = std::min(M.rows(), M.cols());
        for (size_t i = 0; i < lim; ++i) {
            CHECK(s.D(i, i) >= 0);
            if (i + 1 < lim && s.D(i + 1, i + 1) != 0) {
                REQUIRE(s.D(i, i) != 0);
                CHECK(s.D(i + 1, i + 1) % s.D(i, i) == 0);
            }
        }
        for (size_t i = 0; i < lim; ++i)
            for (size_t j = 0; j < lim; ++j)
                if (i != j) CHECK(s.D(i, j) == 0);

        CHECK(s.rank == minor_rank(M));
        Int prod = 1;
        for (size_t k = 1; k <= s.rank; ++k) {
            prod *= s.D(k - 1, k - 1);
            CHECK(prod == det_divisor(M, k));
        }
    }
}

TEST_CASE("kernel basis: annihilation, dimension, saturation") {
    std::mt19937 rng(777);
    std::uniform_int_distribution<int> dim(1, 4), ent(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
        IMat M(dim(rng), dim(rng));
        for (size_t i = 0; i < M.rows(); ++i)
            for (size_t j = 0; j < M.cols(); ++j) M(i, j) = ent(rng);

        IMat K = kernel_basis(M);
        CHECK(M.mul(K).is_zero());
        CHECK(K.cols() == M.cols() - minor_rank(M));
        if (K.cols() > 0) {
            // full column rank and gcd of maximal minors 1 <=> saturated
            CHECK(det_divisor(K, K.cols()) == 1);
        }
        CHECK(hnf_cols(K) == K);
    }
}

TEST_CASE("lattice_eq invariant under unimodular column operations") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> ent(-3, 3), pick(0, 2);
    for (int trial = 0; trial < 100; ++trial) {
        IMat M(4, 3);
        for (size_t i = 0; i < 4; ++i)
            for (size_t j = 0; j < 3; ++j) M(i, j) = ent(rng);
        IMat N = M;
        for (int op = 0; op < 6; ++op) {
            size_t a = pick(rng), b = pick(rng);
            if (a == b) continue;
            for (size_t i = 0; i < 4; ++i) N(i, a) += 2 * N(i, b);
        }
        N.swap_cols(0, 2);
        CHECK(lattice_eq(M, N));
    }
    CHECK_FALSE(lattice_eq(mat({{2}, {0}}), mat({{1}, {0}})));
}

TEST_CASE("cokernel on pinned examples") {
    CHECK(cokernel(mat({{2}})) == AbGroup::cyclic(2));
    CHECK(cokernel(mat({{0}})) == AbGroup::free_group(1));
    CHECK(cokernel(mat({{2, 0}, {0, 4}})) == AbGroup::from_cyclic_factors({2, 4}));
    CHECK(cokernel(mat({{2, 1}, {1, 2}})) == AbGroup::cyclic(3));
    CHECK(cokernel(IMat(3, 0)) == AbGroup::free_group(3));
    // unimodular presentation of the trivial group
    CHECK(cokernel(mat({{1, 2}, {3, 7}})).is_zero());
}

TEST_CASE("solve_integer roundtrip and infeasible cases") {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> ent(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
        IMat K(3, 2), X(2, 2);
        for (size_t i = 0; i < 3; ++i)
            for (size_t j = 0; j < 2; ++j) K(i, j) = ent(rng);
        for (size_t i = 0; i < 2; ++i)
            for (size_t j = 0; j < 2; ++j) X(i, j) = ent(rng);
        IMat B = K.mul(X);
        auto sol = solve_integer(K, B);
        REQUIRE(sol.has_value());
        CHECK(K.mul(*sol) == B);
    }
    CHECK_FALSE(solve_integer(mat({{2}}), mat({{1}})).has_value());
    CHECK_FALSE(solve_integer(mat({{0}}), mat({{1}})).has_value());
}

TEST_CASE("homology of small complexes") {
    // bottom of a complex: H_0 = coker
    IMat d1 = mat({{-1, -1}, {1, 1}});
    CHECK(homology(IMat(0, 2), d1) == AbGroup::free_group(1));
    // top of a complex: H_top = ker
    CHECK(homology(d1, IMat(2, 0)) == AbGroup::free_group(1));
    // torsion from a degree-2 attaching map
    CHECK(homology(IMat(0, 1), mat({{2}})) == AbGroup::cyclic(2));
    // middle homology killed by an exact pairing
    CHECK(homology(mat({{0, 2}}), mat({{1}, {0}})).is_zero());
}

TEST_CASE("abelian group canonical forms") {
    CHECK(AbGroup::from_cyclic_factors({6, 4}) == AbGroup::from_cyclic_factors({2, 12}));
    CHECK(AbGroup::from_cyclic_factors({6, 4}).torsion == std::vector<Int>{2, 12});
    CHECK(AbGroup::from_cyclic_factors({0, 2, 1}) ==
          AbGroup{1, {2}});
    CHECK(AbGroup::cyclic(1).is_zero());
    CHECK(AbGroup::cyclic(0) == AbGroup::free_group(1));
    CHECK(AbGroup{0, {2, 4}}.order() == 8);
    CHECK(AbGroup{0, {2, 4}}.exponent() == 4);
    CHECK(AbGroup{1, {2}}.mod2() == AbGroup::from_cyclic_factors({2, 2}));
    CHECK(AbGroup{0, {3}}.mod2().is_zero());
    CHECK(AbGroup{0, {2, 2}}.elementary_2());
    CHECK_FALSE(AbGroup{0, {4}}.elementary_2());
    CHECK(AbGroup{0, {2}}.direct_sum(AbGroup{0, {4}}) == AbGroup::from_cyclic_factors({2, 4}));
    CHECK(AbGroup{2, {}}.str() == "Z^2");
    CHECK(AbGroup{1, {2}}.str() == "Z + Z_2");
    CHECK(AbGroup::zero().str() == "0");
}

TEST_CASE("embedding and quotient feasibility") {
    auto Z = AbGroup::free_group(1);
    auto Z2 = AbGroup::cyclic(2);
    auto Z4 = AbGroup::cyclic(4);
    auto Z2Z2 = AbGroup::from_cyclic_factors({2, 2});

    CHECK(Z2.embeds_in(Z4));
    CHECK_FALSE(Z4.embeds_in(Z2Z2));
    CHECK_FALSE(Z2Z2.embeds_in(Z4));
    CHECK(Z2Z2.embeds_in(AbGroup::from_cyclic_factors({2, 4})));
    CHECK_FALSE(Z2.embeds_in(Z));
    CHECK(Z.embeds_in(AbGroup{1, {2}}));

    CHECK(Z2.quotient_of(Z));
    CHECK(Z4.quotient_of(AbGroup{1, {2}}));
    CHECK_FALSE(AbGroup::from_cyclic_factors({4, 4}).quotient_of(AbGroup{1, {2}}));
    CHECK(Z2Z2.quotient_of(AbGroup{2, {}}));
    CHECK_FALSE(Z2Z2.quotient_of(Z));
    CHECK_FALSE(Z.quotient_of(Z4));
    CHECK(AbGroup::cyclic(6).quotient_of(AbGroup::cyclic(12)));
    CHECK_FALSE(AbGroup::cyclic(5).quotient_of(AbGroup::cyclic(12)));
}

TEST_CASE("ext groups and extension middles") {
    auto Z = AbGroup::free_group(1);
    auto Z2 = AbGroup::cyclic(2);
    auto Z3 = AbGroup::cyclic(3);

    CHECK(ext1(Z2, Z) == Z2);
    CHECK(ext1(Z, Z2).is_zero());
    CHECK(ext1(AbGroup::cyclic(4), AbGroup::cyclic(6)) == Z2);
    CHECK(ext1(AbGroup::from_cyclic_factors({2, 2}), Z) ==
          AbGroup::from_cyclic_factors({2, 2}));

    // 0 -> Z -> X -> Z_2 -> 0
    auto mid = extension_middles(Z, Z2);
    REQUIRE(mid.has_value());
    REQUIRE(mid->size() == 2);
    CHECK((*mid)[0] == AbGroup::free_group(1));
    CHECK((*mid)[1] == AbGroup{1, {2}});

    // 0 -> Z_2 -> X -> Z -> 0 splits
    auto mid2 = extension_middles(Z2, Z);
    REQUIRE(mid2.has_value());
    REQUIRE(mid2->size() == 1);
    CHECK((*mid2)[0] == AbGroup{1, {2}});

    // 0 -> Z_3 -> X -> Z_3 -> 0
    auto mid3 = extension_middles(Z3, Z3);
    REQUIRE(mid3.has_value());
    REQUIRE(mid3->size() == 2);
    CHECK((*mid3)[0] == AbGroup::from_cyclic_factors({3, 3}));
    CHECK((*mid3)[1] == AbGroup::cyclic(9));
}

TEST_CASE("gf2 rank and dimensions") {
    GF2Mat m(3, 3);
    m(0, 0) = 1;
    m(0, 1) = 1;
    m(1, 1) = 1;
    m(1, 2) = 1;
    m(2, 0) = 1;
    m(2, 2) = 1;  // rows sum to zero
    CHECK(gf2_rank(m) == 2);
    auto ck = gf2_coker_ker(m);
    CHECK(ck.coker_dim == 1);
    CHECK(ck.ker_dim == 1);

    CHECK(gf2_rank(to_gf2(mat({{2, 1}, {4, 3}}))) == 1);

    std::mt19937 rng(31337);
    std::uniform_int_distribution<int> ent(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        IMat M(3, 4);
        for (size_t i = 0; i < 3; ++i)
            for (size_t j = 0; j < 4; ++j) M(i, j) = ent(rng);
        // mod-2 rank never exceeds integer rank
        CHECK(gf2_rank(to_gf2(M)) <= minor_rank(M));
    }
}
