#include "kgraph/intlin.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace kgraph {

IMat IMat::transpose() const {
    IMat t(cols_, rows_);
    for (size_t r = 0; r < rows_; ++r)
        for (size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

IMat IMat::mul(const IMat& o) const {
    assert(cols_ == o.rows_);
    IMat p(rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t k = 0; k < cols_; ++k) {
            const Int& v = (*this)(i, k);
            if (v == 0) continue;
            for (size_t j = 0; j < o.cols_; ++j) p(i, j) += v * o(k, j);
        }
    return p;
}

IMat IMat::operator-() const {
    IMat n(rows_, cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) n(i, j) = -(*this)(i, j);
    return n;
}

IMat IMat::hstack(const IMat& o) const {
    assert(rows_ == o.rows_);
    IMat h(rows_, cols_ + o.cols_);
    for (size_t i = 0; i < rows_; ++i) {
        for (size_t j = 0; j < cols_; ++j) h(i, j) = (*this)(i, j);
        for (size_t j = 0; j < o.cols_; ++j) h(i, cols_ + j) = o(i, j);
    }
    return h;
}

IMat IMat::vstack(const IMat& o) const {
    assert(cols_ == o.cols_);
    IMat v(rows_ + o.rows_, cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) v(i, j) = (*this)(i, j);
    for (size_t i = 0; i < o.rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) v(rows_ + i, j) = o(i, j);
    return v;
}

IMat IMat::col(size_t c) const {
    IMat v(rows_, 1);
    for (size_t i = 0; i < rows_; ++i) v(i, 0) = (*this)(i, c);
    return v;
}

bool IMat::is_zero() const {
    for (const Int& v : a_)
        if (v != 0) return false;
    return true;
}

void IMat::swap_rows(size_t i, size_t j) {
    if (i == j) return;
    for (size_t c = 0; c < cols_; ++c) std::swap((*this)(i, c), (*this)(j, c));
}

void IMat::swap_cols(size_t i, size_t j) {
    if (i == j) return;
    for (size_t r = 0; r < rows_; ++r) std::swap((*this)(r, i), (*this)(r, j));
}

std::string IMat::str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < rows_; ++i) {
        if (i) os << "; ";
        for (size_t j = 0; j < cols_; ++j) {
            if (j) os << " ";
            os << (*this)(i, j);
        }
    }
    os << "]";
    return os.str();
}

SmithResult smith_normal_form(const IMat& M) {
    const size_t m = M.rows(), n = M.cols();
    SmithResult r{IMat::identity(m), M, IMat::identity(n), 0};
    IMat &U = r.U, &D = r.D, &V = r.V;

    auto row_op = [&](size_t dst, size_t src, const Int& q) {
        for (size_t j = 0; j < n; ++j) D(dst, j) -= q * D(src, j);
        for (size_t j = 0; j < m; ++j) U(dst, j) -= q * U(src, j);
    };
    auto col_op = [&](size_t dst, size_t src, const Int& q) {
        for (size_t i = 0; i < m; ++i) D(i, dst) -= q * D(i, src);
        for (size_t i = 0; i < n; ++i) V(i, dst) -= q * V(i, src);
    };

    const size_t lim = std::min(m, n);
    size_t t = 0;
    while (t < lim) {
        // smallest |entry| in the trailing block, lowest (row, col) on ties
        size_t pi = 0, pj = 0;
        bool found = false;
        Int best;
        for (size_t i = t; i < m; ++i)
            for (size_t j = t; j < n; ++j) {
                if (D(i, j) == 0) continue;
                Int a = abs(D(i, j));
                if (!found || a < best) {
                    found = true;
                    best = a;
                    pi = i;
                    pj = j;
                }
            }
        if (!found) break;
        D.swap_rows(t, pi);
        U.swap_rows(t, pi);
        D.swap_cols(t, pj);
        V.swap_cols(t, pj);
        if (D(t, t) < 0) {
            for (size_t j = 0; j < n; ++j) D(t, j) = -D(t, j);
            for (size_t j = 0; j < m; ++j) U(t, j) = -U(t, j);
        }

        bool dirty = false;
        for (size_t i = t + 1; i < m; ++i) {
            if (D(i, t) == 0) continue;
            Int q = D(i, t) / D(t, t);
            if (q != 0) row_op(i, t, q);
            if (D(i, t) != 0) dirty = true;
        }
        for (size_t j = t + 1; j < n; ++j) {
            if (D(t, j) == 0) continue;
            Int q = D(t, j) / D(t, t);
            if (q != 0) col_op(j, t, q);
            if (D(t, j) != 0) dirty = true;
        }
        if (dirty) continue;  // remainders left; reselect a smaller pivot

        bool fixed = false;
        for (size_t i = t + 1; i < m && !fixed; ++i)
            for (size_t j = t + 1; j < n && !fixed; ++j)
                if (D(i, j) % D(t, t) != 0) {
                    row_op(t, i, Int(-1));  // fold row i in, then redo pivot t
                    fixed = true;
                }
        if (fixed) continue;
        ++t;
    }
    r.rank = t;
    return r;
}

AbGroup AbGroup::cyclic(const Int& n) {
    Int a = abs(n);
    if (a == 0) return free_group(1);
    if (a == 1) return zero();
    return {0, {a}};
}

static std::map<Int, int> factorize(Int n) {
    assert(n >= 1);
    std::map<Int, int> f;
    for (Int p = 2; p * p <= n; ++p)
        while (n % p == 0) {
            ++f[p];
            n /= p;
        }
    if (n > 1) ++f[n];
    return f;
}

// prime -> exponents of that prime across the factors, descending
static std::map<Int, std::vector<int>> prime_profile(const std::vector<Int>& factors) {
    std::map<Int, std::vector<int>> prof;
    for (const Int& d : factors)
        for (auto& [p, e] : factorize(d)) prof[p].push_back(e);
    for (auto& [p, v] : prof) std::sort(v.rbegin(), v.rend());
    return prof;
}

AbGroup AbGroup::from_cyclic_factors(const std::vector<Int>& orders) {
    AbGroup g;
    std::vector<Int> tors;
    for (const Int& o : orders) {
        Int a = abs(o);
        if (a == 0)
            ++g.free_rank;
        else if (a > 1)
            tors.push_back(a);
    }
    auto prof = prime_profile(tors);
    size_t len = 0;
    for (auto& [p, v] : prof) len = std::max(len, v.size());
    std::vector<Int> inv(len, 1);
    for (auto& [p, v] : prof)
        for (size_t k = 0; k < v.size(); ++k) {
            Int pk;
            mpz_pow_ui(pk.get_mpz_t(), p.get_mpz_t(), v[k]);
            inv[k] *= pk;
        }
    std::reverse(inv.begin(), inv.end());  // ascending divisibility
    g.torsion = std::move(inv);
    return g;
}

Int AbGroup::order() const {
    assert(is_finite());
    Int o = 1;
    for (const Int& d : torsion) o *= d;
    return o;
}

Int AbGroup::exponent() const {
    assert(is_finite());
    return torsion.empty() ? Int(1) : torsion.back();
}

long AbGroup::even_factors() const {
    long c = 0;
    for (const Int& d : torsion)
        if (d % 2 == 0) ++c;
    return c;
}

bool AbGroup::elementary_2() const {
    if (free_rank != 0) return false;
    for (const Int& d : torsion)
        if (d != 2) return false;
    return true;
}

AbGroup AbGroup::direct_sum(const AbGroup& o) const {
    std::vector<Int> all = torsion;
    all.insert(all.end(), o.torsion.begin(), o.torsion.end());
    AbGroup g = from_cyclic_factors(all);
    g.free_rank = free_rank + o.free_rank;
    return g;
}

AbGroup AbGroup::mod2() const {
    AbGroup g;
    long n = free_rank + even_factors();
    g.torsion.assign(n, Int(2));
    return g;
}

bool AbGroup::embeds_in(const AbGroup& H) const {
    if (free_rank > H.free_rank) return false;
    auto mine = prime_profile(torsion);
    auto theirs = prime_profile(H.torsion);
    for (auto& [p, ve] : mine) {
        auto it = theirs.find(p);
        if (it == theirs.end()) return false;
        const auto& vh = it->second;
        if (ve.size() > vh.size()) return false;
        for (size_t i = 0; i < ve.size(); ++i)
            if (ve[i] > vh[i]) return false;
    }
    return true;
}

bool AbGroup::quotient_of(const AbGroup& H) const {
    if (free_rank > H.free_rank) return false;
    size_t s = (size_t)(H.free_rank - free_rank);
    auto mine = prime_profile(torsion);
    auto theirs = prime_profile(H.torsion);
    for (auto& [p, ve] : mine) {
        const std::vector<int>* vh = nullptr;
        auto it = theirs.find(p);
        if (it != theirs.end()) vh = &it->second;
        for (size_t i = s; i < ve.size(); ++i) {
            size_t j = i - s;
            if (!vh || j >= vh->size() || ve[i] > (*vh)[j]) return false;
        }
    }
    return true;
}

std::string AbGroup::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    if (free_rank > 0) {
        os << "Z";
        if (free_rank > 1) os << "^" << free_rank;
        first = false;
    }
    for (const Int& d : torsion) {
        if (!first) os << " + ";
        os << "Z_" << d;
        first = false;
    }
    return os.str();
}

CokerKer coker_ker(const IMat& M) {
    auto s = smith_normal_form(M);
    CokerKer out;
    out.coker.free_rank = (long)(M.rows() - s.rank);
    for (size_t i = 0; i < s.rank; ++i)
        if (s.D(i, i) >= 2) out.coker.torsion.push_back(s.D(i, i));
    IMat K(M.cols(), M.cols() - s.rank);
    for (size_t j = s.rank; j < M.cols(); ++j)
        for (size_t i = 0; i < M.cols(); ++i) K(i, j - s.rank) = s.V(i, j);
    out.ker = hnf_cols(K);
    return out;
}

AbGroup cokernel(const IMat& M) { return coker_ker(M).coker; }

IMat kernel_basis(const IMat& M) { return coker_ker(M).ker; }

// canonical row Hermite form; zero rows dropped
static IMat hnf_rows(IMat H) {
    const size_t m = H.rows(), n = H.cols();
    size_t r = 0;
    for (size_t c = 0; c < n && r < m; ++c) {
        // gcd the column below r into one entry
        while (true) {
            size_t piv = m;
            Int best;
            for (size_t i = r; i < m; ++i) {
                if (H(i, c) == 0) continue;
                Int a = abs(H(i, c));
                if (piv == m || a < best) {
                    piv = i;
                    best = a;
                }
            }
            if (piv == m) break;
            H.swap_rows(r, piv);
            bool clean = true;
            for (size_t i = r + 1; i < m; ++i) {
                if (H(i, c) == 0) continue;
                Int q = H(i, c) / H(r, c);
                for (size_t j = 0; j < n; ++j) H(i, j) -= q * H(r, j);
                if (H(i, c) != 0) clean = false;
            }
            if (clean) break;
        }
        if (H(r, c) == 0) continue;
        if (H(r, c) < 0)
            for (size_t j = 0; j < n; ++j) H(r, j) = -H(r, j);
        for (size_t i = 0; i < r; ++i) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), H(i, c).get_mpz_t(), H(r, c).get_mpz_t());
            if (q != 0)
                for (size_t j = 0; j < n; ++j) H(i, j) -= q * H(r, j);
        }
        ++r;
    }
    IMat out(r, n);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < n; ++j) out(i, j) = H(i, j);
    return out;
}

IMat hnf_cols(const IMat& M) { return hnf_rows(M.transpose()).transpose(); }

bool lattice_eq(const IMat& A, const IMat& B) {
    assert(A.rows() == B.rows());
    return hnf_cols(A) == hnf_cols(B);
}

std::optional<IMat> solve_integer(const IMat& K, const IMat& B) {
    assert(K.rows() == B.rows());
    auto s = smith_normal_form(K);
    IMat UB = s.U.mul(B);
    const size_t n = K.cols(), m = K.rows();
    IMat Y(n, B.cols());
    for (size_t i = 0; i < m; ++i) {
        Int d = (i < std::min(m, n)) ? s.D(i, i) : Int(0);
        for (size_t c = 0; c < B.cols(); ++c) {
            if (d == 0) {
                if (UB(i, c) != 0) return std::nullopt;
            } else {
                if (UB(i, c) % d != 0) return std::nullopt;
                if (i < n) Y(i, c) = UB(i, c) / d;
            }
        }
    }
    return s.V.mul(Y);
}

AbGroup homology(const IMat& A, const IMat& B) {
    assert(A.cols() == B.rows());
    assert(A.mul(B).is_zero());
    IMat K = kernel_basis(A);
    if (K.cols() == 0) return AbGroup::zero();
    auto X = solve_integer(K, B);
    assert(X.has_value());  // im B lies in ker A, which K spans saturated
    return cokernel(*X);
}

Int det(const IMat& M) {
    assert(M.rows() == M.cols());
    const size_t n = M.rows();
    if (n == 0) return 1;
    IMat A = M;
    Int sign = 1, prev = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (A(k, k) == 0) {
            size_t piv = n;
            for (size_t i = k + 1; i < n; ++i)
                if (A(i, k) != 0) {
                    piv = i;
                    break;
                }
            if (piv == n) return 0;
            A.swap_rows(k, piv);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j) {
                Int v = A(i, j) * A(k, k) - A(i, k) * A(k, j);
                assert(v % prev == 0);
                A(i, j) = v / prev;
            }
        prev = A(k, k);
    }
    return sign * A(n - 1, n - 1);
}

AbGroup ext1(const AbGroup& B, const AbGroup& A) {
    std::vector<Int> cyc;
    for (const Int& d : B.torsion) {
        for (long i = 0; i < A.free_rank; ++i) cyc.push_back(d);
        for (const Int& e : A.torsion) cyc.push_back(gcd(d, e));
    }
    return AbGroup::from_cyclic_factors(cyc);
}

std::optional<std::vector<AbGroup>> extension_middles(const AbGroup& A, const AbGroup& B,
                                                      size_t limit) {
    const size_t af = (size_t)A.free_rank, at = A.torsion.size();
    const size_t bt = B.torsion.size();

    // coordinate moduli for a representative of A / d A
    std::vector<std::vector<Int>> moduli(bt);
    Int classes = 1;
    for (size_t j = 0; j < bt; ++j) {
        const Int& d = B.torsion[j];
        for (size_t i = 0; i < af; ++i) moduli[j].push_back(d);
        for (const Int& e : A.torsion) moduli[j].push_back(gcd(d, e));
        for (const Int& m : moduli[j]) classes *= m;
        if (classes > (long)limit) return std::nullopt;
    }

    std::vector<std::vector<Int>> lift(bt);
    for (size_t j = 0; j < bt; ++j) lift[j].assign(moduli[j].size(), 0);

    std::vector<AbGroup> found;
    while (true) {
        const size_t gens = af + at + bt + B.free_rank;
        IMat rel(gens, at + bt);
        for (size_t i = 0; i < at; ++i) rel(af + i, i) = A.torsion[i];
        for (size_t j = 0; j < bt; ++j) {
            rel(af + at + j, at + j) = B.torsion[j];
            for (size_t i = 0; i < af + at; ++i) rel(i, at + j) = -lift[j][i];
        }
        AbGroup X = cokernel(rel);
        if (std::find(found.begin(), found.end(), X) == found.end()) found.push_back(X);

        // odometer over all lift tuples
        size_t j = 0, i = 0;
        bool carried = false;
        for (j = 0; j < bt && !carried; ++j)
            for (i = 0; i < lift[j].size(); ++i) {
                lift[j][i] += 1;
                if (lift[j][i] < moduli[j][i]) {
                    carried = true;
                    break;
                }
                lift[j][i] = 0;
            }
        if (!carried) break;
    }
    std::sort(found.begin(), found.end(), [](const AbGroup& x, const AbGroup& y) {
        if (x.free_rank != y.free_rank) return x.free_rank < y.free_rank;
        return x.torsion < y.torsion;
    });
    return found;
}

GF2Mat to_gf2(const IMat& M) {
    GF2Mat g(M.rows(), M.cols());
    for (size_t i = 0; i < M.rows(); ++i)
        for (size_t j = 0; j < M.cols(); ++j) g(i, j) = (M(i, j) % 2 != 0) ? 1 : 0;
    return g;
}

size_t gf2_rank(GF2Mat M) {
    size_t r = 0;
    for (size_t c = 0; c < M.cols() && r < M.rows(); ++c) {
        size_t piv = M.rows();
        for (size_t i = r; i < M.rows(); ++i)
            if (M(i, c)) {
                piv = i;
                break;
            }
        if (piv == M.rows()) continue;
        for (size_t j = 0; j < M.cols(); ++j) std::swap(M(r, j), M(piv, j));
        for (size_t i = 0; i < M.rows(); ++i)
            if (i != r && M(i, c))
                for (size_t j = 0; j < M.cols(); ++j) M(i, j) ^= M(r, j);
        ++r;
    }
    return r;
}

GF2Mat gf2_mul(const GF2Mat& A, const GF2Mat& B) {
    assert(A.cols() == B.rows());
    GF2Mat P(A.rows(), B.cols());
    for (size_t i = 0; i < A.rows(); ++i)
        for (size_t k = 0; k < A.cols(); ++k)
            if (A(i, k))
                for (size_t j = 0; j < B.cols(); ++j) P(i, j) ^= B(k, j);
    return P;
}

GF2CokerKer gf2_coker_ker(const GF2Mat& M) {
    size_t r = gf2_rank(M);
    return {M.rows() - r, M.cols() - r};
}

}  // namespace kgraph
