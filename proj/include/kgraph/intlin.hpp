#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kgraph {

using Int = mpz_class;

/** Dense integer matrix, row-major. Sizes in this library stay small
 *  (hundreds of rows at most) but entries can grow during elimination,
 *  hence GMP. */
class IMat {
public:
    IMat() = default;
    IMat(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static IMat identity(size_t n) {
        IMat m(n, n);
        for (size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    Int& operator()(size_t r, size_t c) { return a_[r * cols_ + c]; }
    const Int& operator()(size_t r, size_t c) const { return a_[r * cols_ + c]; }

    bool operator==(const IMat&) const = default;

    IMat transpose() const;
    IMat mul(const IMat& o) const;
    IMat operator-() const;

    /** [this | o] side by side. Row counts must match. */
    IMat hstack(const IMat& o) const;
    /** [this; o] stacked. Column counts must match. */
    IMat vstack(const IMat& o) const;

    IMat col(size_t c) const;
    bool is_zero() const;

    void swap_rows(size_t i, size_t j);
    void swap_cols(size_t i, size_t j);

    std::string str() const;

private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<Int> a_;
};

/** U * M * V = D with U, V unimodular and D diagonal, d_i | d_{i+1}, d_i >= 0. */
struct SmithResult {
    IMat U, D, V;
    size_t rank = 0;  // number of nonzero diagonal entries
};

SmithResult smith_normal_form(const IMat& M);

/** Finitely generated abelian group in canonical form: Z^free_rank + sum of
 *  Z/d_i with 2 <= d_1 | d_2 | ... Equality of the struct is isomorphism. */
struct AbGroup {
    long free_rank = 0;
    std::vector<Int> torsion;

    static AbGroup zero() { return {}; }
    static AbGroup free_group(long r) { return {r, {}}; }
    static AbGroup cyclic(const Int& n);
    /** Arbitrary cyclic orders (0 means Z, 1 dropped); canonicalized. */
    static AbGroup from_cyclic_factors(const std::vector<Int>& orders);

    bool is_zero() const { return free_rank == 0 && torsion.empty(); }
    bool is_finite() const { return free_rank == 0; }
    Int order() const;                 // finite groups only
    Int exponent() const;              // finite groups only (0 -> exponent 1)
    long mu() const { return free_rank + (long)torsion.size(); }
    long even_factors() const;         // number of invariant factors divisible by 2
    bool elementary_2() const;         // finite with exponent dividing 2
    AbGroup direct_sum(const AbGroup& o) const;
    AbGroup mod2() const;              // G / 2G

    /** Does a subgroup of H isomorphic to *this exist? Exact criterion for
     *  finitely generated abelian groups (per-prime Ulm invariants). */
    bool embeds_in(const AbGroup& H) const;
    /** Does a surjection H -> *this exist? */
    bool quotient_of(const AbGroup& H) const;

    bool operator==(const AbGroup&) const = default;
    std::string str() const;
};

struct CokerKer {
    AbGroup coker;  // Z^rows / column span
    IMat ker;       // columns form a saturated basis of the integer kernel
};

/** Cokernel and kernel of M viewed as a map Z^cols -> Z^rows. */
CokerKer coker_ker(const IMat& M);

AbGroup cokernel(const IMat& M);

/** Saturated integer kernel basis, Hermite-reduced columns. */
IMat kernel_basis(const IMat& M);

/** Canonical column Hermite form of the lattice spanned by the columns.
 *  Zero columns dropped; equal outputs iff equal lattices. */
IMat hnf_cols(const IMat& M);

bool lattice_eq(const IMat& A, const IMat& B);

/** Solve K * X = B over the integers. nullopt when no integral solution. */
std::optional<IMat> solve_integer(const IMat& K, const IMat& B);

/** ker(A) / im(B) for a complex (A * B = 0 is asserted).
 *  Pass A with zero rows for the bottom of a complex. */
AbGroup homology(const IMat& A, const IMat& B);

Int det(const IMat& M);  // Bareiss; square only

/** Ext^1(B, A) = sum over torsion factors d of B of A/dA. */
AbGroup ext1(const AbGroup& B, const AbGroup& A);

/** Isomorphism classes of X fitting 0 -> A -> X -> B -> 0, deduplicated.
 *  Enumerates Ext classes by brute force; nullopt when the class count
 *  exceeds `limit`. */
std::optional<std::vector<AbGroup>> extension_middles(const AbGroup& A, const AbGroup& B,
                                                      size_t limit = 4096);

/** Dense matrix over GF(2). */
class GF2Mat {
public:
    GF2Mat() = default;
    GF2Mat(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    uint8_t& operator()(size_t r, size_t c) { return a_[r * cols_ + c]; }
    uint8_t operator()(size_t r, size_t c) const { return a_[r * cols_ + c]; }

private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<uint8_t> a_;
};

GF2Mat to_gf2(const IMat& M);
size_t gf2_rank(GF2Mat M);
GF2Mat gf2_mul(const GF2Mat& A, const GF2Mat& B);

struct GF2CokerKer {
    size_t coker_dim = 0;
    size_t ker_dim = 0;
};

GF2CokerKer gf2_coker_ker(const GF2Mat& M);

}  // namespace kgraph
