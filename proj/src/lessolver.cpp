#include "kgraph/lessolver.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>

namespace kgraph {

namespace {

Int torsion_exponent(const AbGroup& g) {
    return g.torsion.empty() ? Int(1) : g.torsion.back();
}

bool power_of_two(const Int& v) {
    return v > 0 && mpz_popcount(v.get_mpz_t()) == 1;
}

bool divides(const Int& d, const Int& n) {
    if (d == 0) return n == 0;
    return mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t()) != 0;
}

// ---------------------------------------------------------------------------
// Deduction engine. Three slot families per degree i:
//   A[i] = im eta_{i-1} = ker c_i      (subgroup of KO_i, elementary 2)
//   B[i] = im c_i       = ker partial_i (subgroup of KU_i)
//   C[i] = im partial_{i+2} = ker eta_i (subgroup of KO_i, contains 2 KO_i)
// ---------------------------------------------------------------------------

struct Slot {
    bool zero = false, full = false;
    std::optional<Int> order;
    std::optional<AbGroup> iso;
};

struct Engine {
    const std::array<std::optional<AbGroup>, 8>& ko;
    const std::array<AbGroup, 2>& ku;
    std::vector<std::string>* trace;
    std::array<Slot, 8> A, B, C;
    bool changed = false;
    bool contra = false;

    Engine(const std::array<std::optional<AbGroup>, 8>& k,
           const std::array<AbGroup, 2>& u, std::vector<std::string>* t)
        : ko(k), ku(u), trace(t) {}

    static int wrap(int i) { return ((i % 8) + 8) % 8; }
    const AbGroup* KO(int i) const {
        const auto& o = ko[wrap(i)];
        return o ? &*o : nullptr;
    }
    const AbGroup& KU(int i) const { return ku[wrap(i) % 2]; }

    Slot& slot(char k, int i) {
        i = wrap(i);
        return k == 'A' ? A[i] : k == 'B' ? B[i] : C[i];
    }
    static std::string sname(char k, int i) {
        return std::string(1, k) + "[" + std::to_string(wrap(i)) + "]";
    }

    void note(const char* rule, int deg, const std::string& what) {
        if (trace)
            trace->push_back("RULE " + std::string(rule) + " AT i=" +
                             std::to_string(wrap(deg)) + ": " + what);
    }
    void fail(const char* rule, int deg, const std::string& what) {
        if (contra) return;
        contra = true;
        if (trace)
            trace->push_back("RULE " + std::string(rule) + " AT i=" +
                             std::to_string(wrap(deg)) +
                             ": contradiction, " + what);
    }

    void s_order(char k, int i, const Int& v, const char* rule, int deg);
    void s_iso(char k, int i, const AbGroup& g, const char* rule, int deg);

    void s_zero(char k, int i, const char* rule, int deg) {
        Slot& s = slot(k, i);
        if (s.zero) return;
        s.zero = true;
        changed = true;
        note(rule, deg, sname(k, i) + " = 0");
        s_order(k, i, Int(1), rule, deg);
        if (!s.iso)
            s.iso = AbGroup::zero();
        else if (!s.iso->is_zero())
            fail(rule, deg, sname(k, i) + " = 0 but already " + s.iso->str());
    }
    void s_full(char k, int i, const char* rule, int deg) {
        Slot& s = slot(k, i);
        if (s.full) return;
        s.full = true;
        changed = true;
        note(rule, deg, sname(k, i) + " is everything");
    }

    void o1(char k1, int i1, char k2, int i2, const Int& N, int deg);
    void sweep();
    void run() {
        int guard = 0;
        do {
            changed = false;
            sweep();
        } while (changed && !contra && ++guard < 64);
    }
};

void Engine::s_order(char k, int i, const Int& v, const char* rule, int deg) {
    Slot& s = slot(k, i);
    if (s.order) {
        if (*s.order != v)
            fail(rule, deg, sname(k, i) + " has order " + s.order->get_str() +
                                " and " + v.get_str());
        return;
    }
    s.order = v;
    changed = true;
    note(rule, deg, "|" + sname(k, i) + "| = " + v.get_str());
    if (v == 1) s_zero(k, i, rule, deg);
}

void Engine::s_iso(char k, int i, const AbGroup& g, const char* rule, int deg) {
    Slot& s = slot(k, i);
    if (s.iso) {
        if (*s.iso != g)
            fail(rule, deg, sname(k, i) + " is both " + s.iso->str() + " and " + g.str());
        return;
    }
    s.iso = g;
    changed = true;
    note(rule, deg, sname(k, i) + " = " + g.str());
    if (g.is_finite()) s_order(k, i, g.order(), rule, deg);
}

/** |s| * |t| = N for finite N; derive the missing order or check. */
void Engine::o1(char k1, int i1, char k2, int i2, const Int& N, int deg) {
    Slot& s = slot(k1, i1);
    Slot& t = slot(k2, i2);
    if (s.order && t.order) {
        if (*s.order * *t.order != N)
            fail("O1", deg, "|" + sname(k1, i1) + "| |" + sname(k2, i2) + "| = " +
                                Int(*s.order * *t.order).get_str() + ", expected " + N.get_str());
        return;
    }
    if (s.order) {
        if (!divides(*s.order, N))
            fail("O1", deg, "|" + sname(k1, i1) + "| = " + s.order->get_str() +
                                " does not divide " + N.get_str());
        else
            s_order(k2, i2, N / *s.order, "O1", deg);
    } else if (t.order) {
        if (!divides(*t.order, N))
            fail("O1", deg, "|" + sname(k2, i2) + "| = " + t.order->get_str() +
                                " does not divide " + N.get_str());
        else
            s_order(k1, i1, N / *t.order, "O1", deg);
    }
}

void Engine::sweep() {
    for (int i = 0; i < 8 && !contra; ++i) {
        const AbGroup* koi = KO(i);
        const AbGroup* kom1 = KO(i - 1);
        const AbGroup& kui = KU(i);
        int ip1 = wrap(i + 1), im2 = wrap(i + 6);

        // Z1: KU_i = 0 kills c_i and partial_i.
        if (kui.is_zero()) {
            s_zero('B', i, "Z1", i);
            s_full('B', i, "Z1", i);
        }
        // Z2: KO_i = 0.
        if (koi && koi->is_zero()) {
            s_zero('A', i, "Z2", i);
            s_full('A', i, "Z2", i);
            s_zero('C', i, "Z2", i);
            s_full('C', i, "Z2", i);
        }

        // EQ: a map is zero iff its image is zero iff its kernel is full.
        if (B[i].zero) s_full('A', i, "EQ", i);          // c_i = 0
        if (A[i].full) s_zero('B', i, "EQ", i);
        if (B[i].full) s_zero('C', im2, "EQ", i);        // partial_i = 0
        if (C[im2].zero) s_full('B', i, "EQ", i);
        if (C[i].full) s_zero('A', ip1, "EQ", i);        // eta_i = 0
        if (A[ip1].zero) s_full('C', i, "EQ", i);

        // F1: full slot with known parent is the parent.
        if (A[i].full && koi) s_iso('A', i, *koi, "F1", i);
        if (C[i].full && koi) s_iso('C', i, *koi, "F1", i);
        if (B[i].full) s_iso('B', i, kui, "F1", i);

        // F2: order equal to the finite parent order means full.
        if (koi && koi->is_finite()) {
            Int po = koi->order();
            if (A[i].order && *A[i].order == po) s_full('A', i, "F2", i);
            if (C[i].order && *C[i].order == po) s_full('C', i, "F2", i);
            // Lagrange
            if (A[i].order && !divides(*A[i].order, po))
                fail("F2", i, "|" + sname('A', i) + "| does not divide |KO_" +
                                  std::to_string(i) + "|");
            if (C[i].order && !divides(*C[i].order, po))
                fail("F2", i, "|" + sname('C', i) + "| does not divide |KO_" +
                                  std::to_string(i) + "|");
        }
        if (kui.is_finite()) {
            if (B[i].order && *B[i].order == kui.order()) s_full('B', i, "F2", i);
            if (B[i].order && !divides(*B[i].order, kui.order()))
                fail("F2", i, "|" + sname('B', i) + "| does not divide |KU_" +
                                  std::to_string(i) + "|");
        }

        // F3: zero and full together force the parent to vanish.
        if (koi && !koi->is_zero()) {
            if ((A[i].zero && A[i].full) || (C[i].zero && C[i].full))
                fail("F3", i, "KO_" + std::to_string(i) + " = " + koi->str() +
                                  " but a full subgroup is zero");
        }
        if (!kui.is_zero() && B[i].zero && B[i].full)
            fail("F3", i, "KU_" + std::to_string(i) + " = " + kui.str() +
                              " but a full subgroup is zero");

        // I1: c_i injective identifies KO_i with its image.
        if (A[i].zero && koi) s_iso('B', i, *koi, "I1", i);
        // I2: c_i = 0 forces 2 KO_i = 0 (rc = 2) and makes partial_i injective.
        if (B[i].zero) {
            if (koi && (koi->free_rank > 0 || torsion_exponent(*koi) > 2))
                fail("RC1", i, "c_" + std::to_string(i) + " = 0 needs 2 KO_" +
                                   std::to_string(i) + " = 0, impossible for " + koi->str());
            s_iso('C', im2, kui, "I2", i);
        }
        // I3: eta_i injective identifies KO_i with A[i+1].
        if (C[i].zero && koi) s_iso('A', ip1, *koi, "I3", i);
        // I4: a finite group maps to a torsion-free group only by zero.
        if (koi && koi->is_finite() && kui.torsion.empty()) s_zero('B', i, "I4", i);

        // E1/E2/E3: A slots are elementary 2, sit inside the 2-torsion of
        // KO_i, and are quotients of KO_{i-1} / 2 KO_{i-1}.
        if (A[i].iso && !(A[i].iso->is_zero() || A[i].iso->elementary_2()))
            fail("E1", i, sname('A', i) + " = " + A[i].iso->str() +
                              " is not elementary abelian 2");
        if (A[i].order && !power_of_two(*A[i].order))
            fail("E1", i, "|" + sname('A', i) + "| = " + A[i].order->get_str());
        if (koi) {
            long ef = koi->even_factors();
            if (ef == 0)
                s_zero('A', i, "E2", i);
            else if (A[i].order && *A[i].order > (Int(1) << (unsigned long)ef))
                fail("E2", i, "|" + sname('A', i) + "| exceeds the 2-torsion of KO_" +
                                  std::to_string(i));
        }
        if (kom1) {
            Int b = kom1->mod2().order();
            if (b == 1)
                s_zero('A', i, "E3", i);
            else if (A[i].order && *A[i].order > b)
                fail("E3", i, "|" + sname('A', i) + "| exceeds |KO_" +
                                  std::to_string(wrap(i - 1)) + " / 2|");
        }

        // X1: images embed in their target and are quotients of their source.
        if (A[i].iso) {
            if (koi && !A[i].iso->embeds_in(*koi))
                fail("X1", i, sname('A', i) + " = " + A[i].iso->str() +
                                  " does not embed in KO_" + std::to_string(i) + " = " + koi->str());
            if (kom1 && !A[i].iso->quotient_of(*kom1))
                fail("X1", i, sname('A', i) + " = " + A[i].iso->str() +
                                  " is not a quotient of KO_" + std::to_string(wrap(i - 1)) +
                                  " = " + kom1->str());
        }
        if (B[i].iso) {
            if (!B[i].iso->embeds_in(kui))
                fail("X1", i, sname('B', i) + " = " + B[i].iso->str() +
                                  " does not embed in KU_" + std::to_string(i) + " = " + kui.str());
            if (koi && !B[i].iso->quotient_of(*koi))
                fail("X1", i, sname('B', i) + " = " + B[i].iso->str() +
                                  " is not a quotient of KO_" + std::to_string(i) + " = " + koi->str());
        }
        if (C[i].iso) {
            if (koi && !C[i].iso->embeds_in(*koi))
                fail("X1", i, sname('C', i) + " = " + C[i].iso->str() +
                                  " does not embed in KO_" + std::to_string(i) + " = " + koi->str());
            if (!C[i].iso->quotient_of(KU(i + 2)))
                fail("X1", i, sname('C', i) + " = " + C[i].iso->str() +
                                  " is not a quotient of KU_" + std::to_string(wrap(i + 2)));
        }

        // C1: quotients of a cyclic KU are cyclic.
        if (KU(i + 2).mu() <= 1 && C[i].order && !C[i].iso)
            s_iso('C', i, AbGroup::cyclic(*C[i].order), "C1", i);

        // RC2: c_i surjective forces im partial_{i+2} = 2 KO_i exactly.
        if (B[i].full && koi) {
            if (C[i].full && !koi->mod2().is_zero())
                fail("RC2", i, "c_" + std::to_string(i) +
                                   " onto makes ker eta_" + std::to_string(i) + " = 2 KO_" +
                                   std::to_string(i) + ", which is proper in " + koi->str());
            if (koi->is_finite())
                s_order('C', i, koi->order() / koi->mod2().order(), "RC2", i);
        }

        // O1: orders multiply along exact pieces.
        if (koi && koi->is_finite()) {
            o1('C', i, 'A', ip1, koi->order(), i);
            o1('A', i, 'B', i, koi->order(), i);
        }
        if (kui.is_finite()) o1('B', i, 'C', im2, kui.order(), i);

        // R3: three consecutive surjective etas compose to zero and onto.
        if (A[i].full && A[wrap(i - 1)].full && A[im2].full && koi && !koi->is_zero())
            fail("R3", i, "eta^3 = 0 forces KO_" + std::to_string(i) + " = 0, got " + koi->str());

        // R3B/R3C: eta_{i+1} injective makes A[i] land inside C[i], and then
        // ker eta_i contains 2 KO_i + A[i] (a direct sum when the torsion of
        // KO_i is elementary 2, since 2 KO_i is then torsion free).
        if (C[ip1].zero) {
            if (C[i].zero && A[i].order && *A[i].order > 1)
                fail("R3B", i, sname('A', i) + " must land in " + sname('C', i) + " = 0");
            if (C[i].order && A[i].order && *A[i].order > *C[i].order)
                fail("R3B", i, sname('A', i) + " cannot exceed " + sname('C', i));
            if (koi && torsion_exponent(*koi) <= 2 && A[i].order) {
                Int m2 = koi->mod2().order();
                if (!divides(*A[i].order, m2)) {
                    fail("R3C", i, sname('A', i) + " does not fit in KO_" +
                                       std::to_string(i) + " / 2");
                } else {
                    Int bound = m2 / *A[i].order;
                    if (bound == 1)
                        s_zero('A', ip1, "R3C", i);
                    else if (A[ip1].order && *A[ip1].order > bound)
                        fail("R3C", i, "|" + sname('A', ip1) + "| exceeds |KO_" +
                                           std::to_string(i) + " / (2 KO + A)| = " + bound.get_str());
                }
            }
        }

        // RCR1: KO_i = Z and KU_i = Z pin the whole rank-one block, since
        // c_i is then injective and partial_{i+2} c_i = 2.
        if (koi && *koi == AbGroup::free_group(1) && kui == AbGroup::free_group(1)) {
            Slot& img = slot('C', im2);  // im partial_i = KU_i / im c_i
            if (img.order) {
                if (*img.order > 2)
                    fail("RCR1", i, "im partial_" + std::to_string(i) +
                                        " has order " + img.order->get_str() +
                                        " but index of c_" + std::to_string(i) + " divides 2");
                else if (*img.order == 2)
                    s_full('C', i, "RCR1", i);
                else
                    s_order('A', ip1, Int(2), "RCR1", i);
            }
        }
    }
}

}  // namespace

DeduceResult deduce(const std::array<std::optional<AbGroup>, 8>& ko,
                    const std::array<AbGroup, 2>& ku, bool want_trace) {
    DeduceResult out;
    Engine e(ko, ku, want_trace ? &out.trace : nullptr);
    e.run();
    out.consistent = !e.contra;
    if (!want_trace) out.trace.clear();
    return out;
}

// ---------------------------------------------------------------------------
// Verifier: explicit matrices for the 24 arrows, depth-first with
// conflict-directed backjumping.
// ---------------------------------------------------------------------------

namespace {

struct Shape {
    long rank = 0;
    std::vector<Int> tor;
    size_t gens() const { return (size_t)rank + tor.size(); }
};

Shape shape_of(const AbGroup& g) { return {g.free_rank, g.torsion}; }

IMat rel_lattice(const Shape& s) {
    IMat L(s.gens(), s.tor.size());
    for (size_t k = 0; k < s.tor.size(); ++k) L((size_t)s.rank + k, k) = s.tor[k];
    return L;
}

/** Allowed values for one matrix entry: domain generator of order d (0 for
 *  free), codomain generator of order e. Eta arrows also satisfy 2m = 0. */
std::vector<Int> entry_options(const Int& d, const Int& e, bool eta, long bound,
                               bool& truncated) {
    std::vector<Int> v;
    if (e == 0) {
        v.push_back(0);
        if (d == 0 && !eta) {
            truncated = true;
            for (long k = 1; k <= bound; ++k) {
                v.push_back(Int(k));
                v.push_back(Int(-k));
            }
        }
        return v;
    }
    Int step(1);
    if (d != 0) step = e / gcd(e, d);
    if (eta) step = lcm(step, e / gcd(e, Int(2)));
    for (Int m(0); m < e; m += step) v.push_back(m);
    return v;
}

struct Arrow {
    std::string name;
    bool eta = false;
    Shape dom, cod;
    std::string dom_name, cod_name;
    std::vector<std::vector<Int>> opts;  // row-major cod.gens x dom.gens
    bool truncated = false;
};

struct Check {
    std::string name;
    int type;  // 0 node, 1 eta3, 2 rc2
    uint32_t mask = 0;
    int a0 = -1, a1 = -1, a2 = -1;
    Shape obj;  // rc2: the KO_j both composites act on
};

/** Columns of M all zero in the group with relation lattice of `s`. */
bool zero_in_group(const IMat& M, const Shape& s) {
    for (size_t c = 0; c < M.cols(); ++c)
        for (size_t r = 0; r < M.rows(); ++r) {
            if (r < (size_t)s.rank) {
                if (M(r, c) != 0) return false;
            } else if (!divides(s.tor[r - s.rank], M(r, c))) {
                return false;
            }
        }
    return true;
}

struct Verifier {
    std::vector<Arrow> arrows;
    std::vector<Check> checks;
    std::array<std::vector<size_t>, 24> closing;
    std::array<IMat, 24> assign;
    std::set<std::string> failed;
    uint32_t trunc_mask = 0;
    bool poisoned = false;
    bool found = false;

    void build(const GradedCRModule& m, long bound);
    bool run_check(const Check& c) const;
    uint32_t dfs(size_t k);
};

void Verifier::build(const GradedCRModule& m, long bound) {
    Shape koS[8], kuS[2];
    for (int j = 0; j < 8; ++j) koS[j] = shape_of(m.ko[j]);
    for (int j = 0; j < 2; ++j) kuS[j] = shape_of(m.ku[j]);
    auto ko_name = [](int j) { return "KO_" + std::to_string(((j % 8) + 8) % 8); };
    auto ku_name = [](int j) { return "KU_" + std::to_string(((j % 8) + 8) % 8); };

    auto add = [&](const std::string& name, bool eta, const Shape& dom, const Shape& cod,
                   const std::string& dn, const std::string& cn) {
        Arrow a{name, eta, dom, cod, dn, cn, {}, false};
        a.opts.reserve(dom.gens() * cod.gens());
        for (size_t r = 0; r < cod.gens(); ++r)
            for (size_t cidx = 0; cidx < dom.gens(); ++cidx) {
                Int d = cidx < (size_t)dom.rank ? Int(0) : dom.tor[cidx - dom.rank];
                Int e = r < (size_t)cod.rank ? Int(0) : cod.tor[r - cod.rank];
                bool tr = false;
                a.opts.push_back(entry_options(d, e, eta, bound, tr));
                a.truncated = a.truncated || tr;
            }
        arrows.push_back(std::move(a));
    };

    // Cycle order: blocks of eta_d, c_{d+1}, partial_{d+1} for d = 0,7,6,...,1.
    for (int t = 0; t < 8; ++t) {
        int d = (8 - t) % 8;
        int n = (d + 1) % 8;
        add("eta_" + std::to_string(d), true, koS[d], koS[(d + 1) % 8], ko_name(d), ko_name(d + 1));
        add("c_" + std::to_string(n), false, koS[n], kuS[n % 2], ko_name(n), ku_name(n));
        add("partial_" + std::to_string(n), false, kuS[n % 2], koS[(n + 6) % 8], ku_name(n),
            ko_name(n + 6));
    }

    auto arrow_pos_eta = [](int d) { return 3 * ((8 - d) % 8); };
    auto arrow_pos_c = [](int d) { return 3 * (((1 - d) % 8 + 8) % 8) + 1; };
    auto arrow_pos_partial = [](int d) { return 3 * (((1 - d) % 8 + 8) % 8) + 2; };

    // Exactness at the object between consecutive arrows.
    for (int k = 0; k < 24; ++k) {
        int in = (k + 23) % 24;
        Check c;
        c.type = 0;
        c.a0 = in;
        c.a1 = k;
        c.name = "exactness at " + arrows[k].dom_name + ": ker " + arrows[k].name +
                 " = im " + arrows[in].name;
        c.mask = (1u << in) | (1u << k);
        checks.push_back(c);
    }
    // eta^3 = 0.
    for (int j = 0; j < 8; ++j) {
        Check c;
        c.type = 1;
        c.a0 = arrow_pos_eta(j);
        c.a1 = arrow_pos_eta((j + 1) % 8);
        c.a2 = arrow_pos_eta((j + 2) % 8);
        c.name = "eta_" + std::to_string((j + 2) % 8) + " eta_" + std::to_string((j + 1) % 8) +
                 " eta_" + std::to_string(j) + " = 0";
        c.mask = (1u << c.a0) | (1u << c.a1) | (1u << c.a2);
        checks.push_back(c);
    }
    // partial_{j+2} c_j = 2.
    for (int j = 0; j < 8; ++j) {
        Check c;
        c.type = 2;
        c.a0 = arrow_pos_c(j);
        c.a1 = arrow_pos_partial((j + 2) % 8);
        c.obj = koS[j];
        c.name = "partial_" + std::to_string((j + 2) % 8) + " c_" + std::to_string(j) +
                 " = 2 on KO_" + std::to_string(j);
        c.mask = (1u << c.a0) | (1u << c.a1);
        checks.push_back(c);
    }
    for (size_t ci = 0; ci < checks.size(); ++ci) {
        const Check& c = checks[ci];
        int close = std::max(c.a0, std::max(c.a1, c.a2));
        closing[close].push_back(ci);
    }
    for (size_t k = 0; k < 24; ++k)
        if (arrows[k].truncated) trunc_mask |= 1u << k;
}

bool Verifier::run_check(const Check& c) const {
    if (c.type == 0) {
        const IMat& Mf = assign[c.a0];
        const IMat& Mg = assign[c.a1];
        const Shape& X = arrows[c.a1].dom;
        const Shape& Y = arrows[c.a1].cod;
        IMat LX = rel_lattice(X);
        IMat im = hnf_cols(Mf.hstack(LX));
        IMat K = kernel_basis(Mg.hstack(rel_lattice(Y)));
        IMat ktop(X.gens(), K.cols());
        for (size_t r = 0; r < X.gens(); ++r)
            for (size_t cc = 0; cc < K.cols(); ++cc) ktop(r, cc) = K(r, cc);
        IMat ker = hnf_cols(ktop.hstack(LX));
        return im == ker;
    }
    if (c.type == 1) {
        IMat P = assign[c.a2].mul(assign[c.a1].mul(assign[c.a0]));
        return zero_in_group(P, arrows[c.a2].cod);
    }
    IMat D = assign[c.a1].mul(assign[c.a0]);
    for (size_t i = 0; i < D.rows(); ++i) D(i, i) -= 2;
    return zero_in_group(D, c.obj);
}

uint32_t Verifier::dfs(size_t k) {
    if (k == 24) {
        found = true;
        return 0;
    }
    const Arrow& ar = arrows[k];
    size_t n = ar.opts.size();
    std::vector<size_t> idx(n, 0);
    uint32_t S = 0;
    while (true) {
        IMat M(ar.cod.gens(), ar.dom.gens());
        for (size_t t = 0; t < n; ++t)
            M(t / std::max<size_t>(ar.dom.gens(), 1), t % std::max<size_t>(ar.dom.gens(), 1)) =
                ar.opts[t][idx[t]];
        assign[k] = M;
        // Among failing checks prefer one not involving a truncated arrow,
        // so conflicts stay conclusive whenever possible.
        uint32_t failmask = 0;
        std::string failname;
        for (size_t ci : closing[k]) {
            if (run_check(checks[ci])) continue;
            if (!failmask || (failmask & trunc_mask) != 0) {
                failmask = checks[ci].mask;
                failname = checks[ci].name;
            }
            if (!(failmask & trunc_mask)) break;
        }
        if (failmask) {
            failed.insert(failname);
            S |= failmask;
        } else {
            uint32_t child = dfs(k + 1);
            if (found) return 0;
            if (!(child & (1u << k))) return child;  // independent of arrow k
            S |= child;
        }
        size_t p = 0;
        while (p < n && ++idx[p] == ar.opts[p].size()) {
            idx[p] = 0;
            ++p;
        }
        if (p == n) break;
    }
    if (ar.truncated && (S & (1u << k))) poisoned = true;
    return S & ~(1u << k);
}

}  // namespace

VerifyResult verify_module(const GradedCRModule& m, long les_bound) {
    VerifyResult out;
    // Rank arithmetic: rank KU_j = rank KO_j + rank KO_{j-2} (A and C slots
    // carry no free rank, so c_j and partial_j account for all of it).
    for (int j = 0; j < 8; ++j) {
        long need = m.ko[j].free_rank + m.ko[(j + 6) % 8].free_rank;
        long have = m.ku[j % 2].free_rank;
        if (need != have) {
            out.status = VerifyStatus::Inconsistent;
            out.certificate.push_back(
                "rank KU_" + std::to_string(j) + " = " + std::to_string(have) +
                " but rank KO_" + std::to_string(j) + " + rank KO_" +
                std::to_string((j + 6) % 8) + " = " + std::to_string(need));
            return out;
        }
    }
    // Torsion exponent: partial_{j+2} c_j = 2 bounds exp T(KO_j) by
    // 2 exp T(KU_j).
    for (int j = 0; j < 8; ++j) {
        Int e = torsion_exponent(m.ko[j]);
        if (e > 1 && !divides(e, 2 * torsion_exponent(m.ku[j % 2]))) {
            out.status = VerifyStatus::Inconsistent;
            out.certificate.push_back("exp T(KO_" + std::to_string(j) + ") = " + e.get_str() +
                                      " does not divide 2 exp T(KU_" + std::to_string(j) + ")");
            return out;
        }
    }
    std::array<std::optional<AbGroup>, 8> kopt;
    for (int j = 0; j < 8; ++j) kopt[j] = m.ko[j];
    DeduceResult ded = deduce(kopt, m.ku, true);
    out.trace = ded.trace;
    if (!ded.consistent) {
        out.status = VerifyStatus::Inconsistent;
        if (!ded.trace.empty()) out.certificate.push_back(ded.trace.back());
        return out;
    }

    Verifier v;
    v.build(m, les_bound);
    uint32_t conflict = v.dfs(0);
    (void)conflict;
    if (v.found) {
        out.status = VerifyStatus::Consistent;
        for (size_t k = 0; k < 24; ++k)
            out.witness.emplace_back(v.arrows[k].name, v.assign[k]);
        return out;
    }
    out.status = v.poisoned ? VerifyStatus::Unknown : VerifyStatus::Inconsistent;
    for (const auto& name : v.failed) {
        if (out.certificate.size() >= 8) {
            out.certificate.push_back("...");
            break;
        }
        out.certificate.push_back(name);
    }
    if (v.poisoned)
        out.certificate.push_back("search hit the matrix entry bound " +
                                  std::to_string(les_bound) + "; not conclusive");
    return out;
}

// ---------------------------------------------------------------------------
// Solver.
// ---------------------------------------------------------------------------

namespace {

/** All torsion groups (as invariant factor chains) with exponent dividing
 *  `expbound` and order at most `cap`. */
void gen_torsion(const Int& expbound, const Int& cap, std::vector<Int>& cur, const Int& prod,
                 std::vector<std::vector<Int>>& out) {
    out.push_back(cur);
    for (Int d = 2; d <= expbound; ++d) {
        if (!divides(d, expbound)) continue;
        if (!cur.empty() && !divides(cur.back(), d)) continue;
        if (prod * d > cap) continue;
        cur.push_back(d);
        gen_torsion(expbound, cap, cur, prod * d, out);
        cur.pop_back();
    }
}

bool group_less(const AbGroup& x, const AbGroup& y) {
    if (x.free_rank != y.free_rank) return x.free_rank < y.free_rank;
    Int ox(1), oy(1);
    for (const auto& t : x.torsion) ox *= t;
    for (const auto& t : y.torsion) oy *= t;
    if (ox != oy) return ox < oy;
    return x.torsion < y.torsion;
}

}  // namespace

SolveResult solve_ko(const std::array<AbGroup, 2>& ku, const PartialKO& partial,
                     const SolveOptions& opts) {
    SolveResult out;
    std::array<std::vector<std::vector<Int>>, 2> pool;
    for (int p = 0; p < 2; ++p) {
        std::vector<Int> cur;
        gen_torsion(2 * torsion_exponent(ku[p]), Int(opts.torsion_cap), cur, Int(1), pool[p]);
    }
    long R0 = ku[0].free_rank, R1 = ku[1].free_rank;

    for (long a = 0; a <= R0; ++a) {
        for (long b = 0; b <= R1; ++b) {
            std::array<long, 8> rk = {a, b, R0 - a, R1 - b, a, b, R0 - a, R1 - b};
            std::array<std::vector<AbGroup>, 8> cand;
            bool feasible = true;
            for (int j = 0; j < 8 && feasible; ++j) {
                if (partial.fixed[j]) {
                    if (partial.fixed[j]->free_rank != rk[j]) {
                        feasible = false;
                        break;
                    }
                    cand[j] = {*partial.fixed[j]};
                    continue;
                }
                const std::vector<AbGroup>* src = nullptr;
                std::vector<AbGroup> gen;
                if (!partial.choices[j].empty()) {
                    src = &partial.choices[j];
                } else {
                    for (const auto& t : pool[j % 2]) gen.push_back(AbGroup{rk[j], t});
                    src = &gen;
                }
                for (const auto& g : *src) {
                    if (g.free_rank != rk[j]) continue;
                    if (partial.filter && !partial.filter(j, g)) continue;
                    cand[j].push_back(g);
                }
                std::sort(cand[j].begin(), cand[j].end(), group_less);
                cand[j].erase(std::unique(cand[j].begin(), cand[j].end()), cand[j].end());
                if (cand[j].empty()) feasible = false;
            }
            if (!feasible) continue;

            std::array<std::optional<AbGroup>, 8> cur;
            auto rec = [&](auto&& self, int d) -> void {
                if (d == 8) {
                    ++out.candidates;
                    GradedCRModule mod;
                    for (int j = 0; j < 8; ++j) mod.ko[j] = *cur[j];
                    mod.ku = ku;
                    VerifyResult vr = verify_module(mod, opts.les_bound);
                    if (vr.status == VerifyStatus::Consistent) {
                        out.solutions.push_back(mod);
                    } else if (vr.status == VerifyStatus::Unknown) {
                        out.bound_exhausted = true;
                        std::string t = "undecided at the search bound:";
                        for (int j = 0; j < 8; ++j) t += " " + mod.ko[j].str() + (j < 7 ? "," : "");
                        out.notes.push_back(t);
                    }
                    return;
                }
                for (const auto& g : cand[d]) {
                    cur[d] = g;
                    if (deduce(cur, ku, false).consistent) self(self, d + 1);
                }
                cur[d].reset();
            };
            rec(rec, 0);
        }
    }
    out.notes.push_back("examined " + std::to_string(out.candidates) + " full tables, " +
                        std::to_string(out.solutions.size()) + " consistent");
    return out;
}

}  // namespace kgraph
