#include "kgraph/relprop.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>

namespace kgraph {

size_t RelationSystem::find(const VAddr& a) const {
    auto it = std::lower_bound(gens.begin(), gens.end(), a);
    if (it == gens.end() || !(*it == a)) throw std::out_of_range("no such generator");
    return (size_t)(it - gens.begin());
}

namespace {

Int norm_coeff(Int c, Ring ring) {
    if (ring == Ring::GF2) {
        c %= 2;
        if (c < 0) c += 2;
    }
    return c;
}

std::string ray_vertex_name(const Ray& ray, long block, size_t off) {
    return ray.name + ":" + std::to_string(block) + ":" + ray.period[off];
}

/** Shared sparse-row assembly. Rows are stored with zero coefficients
 *  dropped and terms in generator order. */
struct RowBuilder {
    std::map<size_t, Int> acc;

    void add(size_t g, const Int& c) {
        if (c != 0) acc[g] += c;
    }
    std::vector<std::pair<size_t, Int>> take(Ring ring) {
        std::vector<std::pair<size_t, Int>> row;
        for (auto& [g, c] : acc) {
            Int n = norm_coeff(c, ring);
            if (n != 0) row.emplace_back(g, n);
        }
        acc.clear();
        return row;
    }
};

/** Relation terms at ray vertex (block b, offset j), excluding the +1 on the
 *  vertex itself and excluding core attachments (those only exist at b = 0
 *  and are handled by the window builder). add(block, off, coeff). */
template <typename F>
void ray_tail_terms(const Ray& ray, Mode mode, long b, size_t j, F&& add) {
    size_t p = ray.p();
    for (size_t j2 = 0; j2 < p; ++j2) {
        if (mode == Mode::Coker) {
            add(b, j2, -ray.intra(j, j2));
            if (b >= 1) add(b - 1, j2, -ray.fwd(j, j2));
            add(b + 1, j2, -ray.bwd(j, j2));
        } else {
            add(b, j2, -ray.intra(j2, j));
            add(b + 1, j2, -ray.fwd(j2, j));
            if (b >= 1) add(b - 1, j2, -ray.bwd(j2, j));
        }
    }
}

struct Saturator {
    RelationSystem& s;
    std::vector<std::vector<size_t>> gen_rels;
    std::vector<std::vector<size_t>> expr_back;
    std::deque<size_t> queue;
    std::vector<char> queued;
    bool allow_subst;

    Saturator(RelationSystem& sys, bool subst) : s(sys), allow_subst(subst) {
        gen_rels.resize(s.gens.size());
        expr_back.resize(s.gens.size());
        queued.assign(s.rels.size(), 0);
        for (size_t r = 0; r < s.rels.size(); ++r)
            for (auto& [g, c] : s.rels[r]) {
                (void)c;
                gen_rels[g].push_back(r);
            }
    }

    void push_rel(size_t r) {
        if (!queued[r]) {
            queued[r] = 1;
            queue.push_back(r);
        }
    }

    /** Requeue every relation whose reduced form can mention g, following
     *  substitution chains backwards. */
    void push_affected(size_t g0) {
        std::vector<size_t> stack{g0};
        std::vector<char> seen(s.gens.size(), 0);
        seen[g0] = 1;
        while (!stack.empty()) {
            size_t g = stack.back();
            stack.pop_back();
            for (size_t r : gen_rels[g]) push_rel(r);
            for (size_t a : expr_back[g])
                if (!seen[a]) {
                    seen[a] = 1;
                    stack.push_back(a);
                }
        }
    }

    std::optional<std::pair<size_t, Int>> resolve(size_t g, Int c) const {
        size_t cur = g;
        size_t steps = 0;
        while (!s.dead[cur] && s.expr[cur]) {
            c *= s.expr[cur]->coeff;
            cur = s.expr[cur]->target;
            if (++steps > s.gens.size()) throw std::logic_error("substitution cycle");
        }
        if (s.dead[cur]) return std::nullopt;
        return std::make_pair(cur, std::move(c));
    }

    std::map<size_t, Int> reduce(size_t r) const {
        std::map<size_t, Int> acc;
        for (auto& [g, c] : s.rels[r])
            if (auto t = resolve(g, c)) acc[t->first] += t->second;
        for (auto it = acc.begin(); it != acc.end();) {
            it->second = norm_coeff(it->second, s.ring);
            if (it->second == 0)
                it = acc.erase(it);
            else
                ++it;
        }
        return acc;
    }

    void mark_dead(size_t g, const std::string& by) {
        if (s.dead[g]) return;
        s.dead[g] = 1;
        s.log.push_back("MARK " + s.names[g] + (s.mode == Mode::Coker ? " ZERO BY " : " NULL BY ") + by);
        push_affected(g);
        // anything substituted as a multiple of g vanishes with it
        for (size_t a : expr_back[g])
            if (!s.dead[a]) mark_dead(a, s.names[s.rel_home[s.expr[a]->rel]]);
    }

    void record_torsion(size_t g, const Int& n, size_t r) {
        Int& d = s.torsion_gcd[g];
        Int nd = d == 0 ? n : gcd(d, n);
        if (d != 0 && nd == d) return;
        d = nd;
        if (d == 1) {
            s.torsion_gcd.erase(g);
            mark_dead(g, s.names[s.rel_home[r]]);
        } else {
            s.log.push_back("MARK " + s.names[g] + " TORSION(" + d.get_str() + ") BY " +
                            s.names[s.rel_home[r]]);
        }
    }

    void run() {
        for (size_t r = 0; r < s.rels.size(); ++r) push_rel(r);
        while (!queue.empty()) {
            size_t r = queue.front();
            queue.pop_front();
            queued[r] = 0;
            auto acc = reduce(r);
            if (acc.empty()) continue;
            if (acc.size() == 1) {
                auto& [g, c] = *acc.begin();
                if (abs(c) == 1 || s.mode == Mode::Ker)
                    mark_dead(g, s.names[s.rel_home[r]]);
                else
                    record_torsion(g, abs(c), r);
                continue;
            }
            if (acc.size() == 2 && allow_subst && s.ring == Ring::Z) {
                for (auto it = acc.begin(); it != acc.end(); ++it) {
                    auto& [g, c] = *it;
                    if (abs(c) != 1 || s.torsion_gcd.count(g)) continue;
                    auto ot = it == acc.begin() ? std::next(acc.begin()) : acc.begin();
                    s.expr[g] = Subst{ot->first, -ot->second * c, r};
                    expr_back[ot->first].push_back(g);
                    push_affected(g);
                    break;
                }
            }
        }
    }
};

/** Reduction used for the residual matrix: dead generators drop out but
 *  substitutions are NOT applied, so each substituted generator keeps its
 *  column and its defining relation keeps eliminating it in the quotient. */
std::vector<std::pair<size_t, Int>> residual_row(const RelationSystem& s, size_t r) {
    RowBuilder rb;
    for (auto& [g, c] : s.rels[r])
        if (!s.dead[g]) rb.add(g, c);
    return rb.take(s.ring);
}

}  // namespace

void saturate(RelationSystem& s, bool allow_subst) {
    Saturator sat(s, allow_subst);
    sat.run();
}

PropResult finish(const RelationSystem& s) {
    PropResult out;
    out.log = s.log;
    std::vector<long> colof(s.gens.size(), -1);
    for (size_t g = 0; g < s.gens.size(); ++g)
        if (!s.dead[g]) {
            colof[g] = (long)out.survivors.size();
            out.survivors.push_back(s.gens[g]);
            out.survivor_names.push_back(s.names[g]);
        }
    std::vector<std::vector<std::pair<size_t, Int>>> rows;
    for (size_t r = 0; r < s.rels.size(); ++r) {
        auto row = residual_row(s, r);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    IMat R(rows.size(), out.survivors.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (auto& [g, c] : rows[i]) R(i, (size_t)colof[g]) = c;
    out.residual = R;
    if (s.ring == Ring::Z) {
        if (s.mode == Mode::Coker) {
            out.group = cokernel(R.transpose());
        } else {
            out.ker_basis = kernel_basis(R);
            out.group = AbGroup::free_group((long)out.ker_basis.cols());
        }
    } else {
        size_t rk = gf2_rank(to_gf2(R));
        size_t dim = out.survivors.size() - rk;
        out.group = AbGroup{0, std::vector<Int>(dim, 2)};
    }
    return out;
}

RelationSystem finite_system(const KGraph& g, Mode mode, Ring ring) {
    if (g.rank != 1) throw GraphError("relation propagation works on rank-1 graphs");
    RelationSystem s;
    s.ring = ring;
    s.mode = mode;
    const size_t n = g.n();
    const IMat& M = g.adj[0];
    for (size_t i = 0; i < n; ++i) {
        s.gens.push_back(VAddr{0, 0, (int)i});
        s.names.push_back(g.vertices[i]);
    }
    for (size_t v = 0; v < n; ++v) {
        RowBuilder rb;
        rb.add(v, 1);
        for (size_t w = 0; w < n; ++w)
            rb.add(w, mode == Mode::Coker ? -M(v, w) : -M(w, v));
        s.rels.push_back(rb.take(ring));
        s.rel_home.push_back(v);
    }
    s.dead.assign(n, 0);
    s.expr.assign(n, std::nullopt);
    return s;
}

RelationSystem window_system(const EPGraph& g, long blocks, Mode mode, Ring ring) {
    if (blocks < 2) throw GraphError("window needs at least 2 blocks");
    RelationSystem s;
    s.ring = ring;
    s.mode = mode;
    const size_t nc = g.core.n();
    for (size_t i = 0; i < nc; ++i) {
        s.gens.push_back(VAddr{0, 0, (int)i});
        s.names.push_back(g.core.vertices[i]);
    }
    std::vector<size_t> base(g.rays.size());
    for (size_t ri = 0; ri < g.rays.size(); ++ri) {
        base[ri] = s.gens.size();
        const Ray& ray = g.rays[ri];
        for (long b = 0; b < blocks; ++b)
            for (size_t j = 0; j < ray.p(); ++j) {
                s.gens.push_back(VAddr{(int)ri + 1, b, (int)j});
                s.names.push_back(ray_vertex_name(ray, b, j));
            }
    }
    auto ridx = [&](size_t ri, long b, size_t j) {
        return base[ri] + (size_t)b * g.rays[ri].p() + j;
    };

    for (size_t u = 0; u < nc; ++u) {
        RowBuilder rb;
        rb.add(u, 1);
        for (size_t w = 0; w < nc; ++w)
            rb.add(w, mode == Mode::Coker ? -g.core.adj[0](u, w) : -g.core.adj[0](w, u));
        for (size_t ri = 0; ri < g.rays.size(); ++ri) {
            const Ray& ray = g.rays[ri];
            for (size_t j = 0; j < ray.p(); ++j)
                rb.add(ridx(ri, 0, j), mode == Mode::Coker ? -ray.a2c(u, j) : -ray.afc(j, u));
        }
        s.rels.push_back(rb.take(ring));
        s.rel_home.push_back(u);
    }
    for (size_t ri = 0; ri < g.rays.size(); ++ri) {
        const Ray& ray = g.rays[ri];
        for (long b = 0; b + 2 <= blocks; ++b)
            for (size_t j = 0; j < ray.p(); ++j) {
                RowBuilder rb;
                rb.add(ridx(ri, b, j), 1);
                ray_tail_terms(ray, mode, b, j, [&](long b2, size_t j2, const Int& c) {
                    rb.add(ridx(ri, b2, j2), c);
                });
                if (b == 0) {
                    for (size_t u = 0; u < nc; ++u)
                        rb.add(u, mode == Mode::Coker ? -ray.afc(j, u) : -ray.a2c(u, j));
                }
                s.rels.push_back(rb.take(ring));
                s.rel_home.push_back(ridx(ri, b, j));
            }
    }
    s.dead.assign(s.gens.size(), 0);
    s.expr.assign(s.gens.size(), std::nullopt);
    return s;
}

PropResult finite_coker_ker(const KGraph& g, Mode mode, Ring ring) {
    RelationSystem s = finite_system(g, mode, ring);
    saturate(s, true);
    return finish(s);
}

namespace {

/** Induction step behind the tail certificate: with blocks a and a+1 assumed
 *  zero at an abstract position a >= 1, the relations of blocks a+1..a+R
 *  (pure period relations, no core attachments) must force block a+2 to
 *  zero by the marking rules alone. Generators are blocks a..a+R+1, stored
 *  with block indices 0..R+1. */
bool step_certificate(const Ray& ray, Mode mode, Ring ring, long R) {
    RelationSystem s;
    s.ring = ring;
    s.mode = mode;
    const size_t p = ray.p();
    for (long b = 0; b <= R + 1; ++b)
        for (size_t j = 0; j < p; ++j) {
            s.gens.push_back(VAddr{1, b, (int)j});
            s.names.push_back(ray_vertex_name(ray, b, j));
        }
    auto idx = [&](long b, size_t j) { return (size_t)b * p + j; };
    for (long k = 1; k <= R; ++k)
        for (size_t j = 0; j < p; ++j) {
            RowBuilder rb;
            rb.add(idx(k, j), 1);
            ray_tail_terms(ray, mode, k, j, [&](long b2, size_t j2, const Int& c) {
                rb.add(idx(b2, j2), c);
            });
            s.rels.push_back(rb.take(ring));
            s.rel_home.push_back(idx(k, j));
        }
    s.dead.assign(s.gens.size(), 0);
    s.expr.assign(s.gens.size(), std::nullopt);
    for (size_t j = 0; j < 2 * p; ++j) s.dead[j] = 1;  // blocks a, a+1
    saturate(s, false);
    if (!s.torsion_gcd.empty()) return false;
    for (size_t j = 0; j < p; ++j)
        if (!s.dead[idx(2, j)]) return false;
    return true;
}

}  // namespace

EPResult ep_coker_ker(const EPGraph& g, Mode mode, Ring ring, long max_window) {
    EPResult out;
    for (long blocks = 4; blocks <= max_window; blocks += 2) {
        RelationSystem s = window_system(g, blocks, mode, ring);
        saturate(s, false);

        std::vector<long> cut(g.rays.size(), -1);
        bool ok = true;
        for (size_t ri = 0; ri < g.rays.size() && ok; ++ri) {
            const Ray& ray = g.rays[ri];
            auto block_dead = [&](long b) {
                for (size_t j = 0; j < ray.p(); ++j)
                    if (!s.dead[s.find(VAddr{(int)ri + 1, b, (int)j})]) return false;
                return true;
            };
            for (long p = 1; p + 1 <= blocks - 1; ++p)
                if (block_dead(p) && block_dead(p + 1)) {
                    cut[ri] = p;
                    break;
                }
            if (cut[ri] < 0) {
                ok = false;
                break;
            }
            bool cert = false;
            for (long R = 2; R <= blocks - 2; ++R)
                if (step_certificate(ray, mode, ring, R)) {
                    cert = true;
                    break;
                }
            if (!cert) ok = false;
        }
        if (!ok) continue;

        // the certificate extends the two dead blocks to the whole tail
        for (size_t ri = 0; ri < g.rays.size(); ++ri) {
            const Ray& ray = g.rays[ri];
            for (long b = cut[ri]; b < blocks; ++b)
                for (size_t j = 0; j < ray.p(); ++j) {
                    size_t gi = s.find(VAddr{(int)ri + 1, b, (int)j});
                    if (s.dead[gi]) continue;
                    s.dead[gi] = 1;
                    s.log.push_back("MARK " + s.names[gi] +
                                    (mode == Mode::Coker ? " ZERO BY " : " NULL BY ") +
                                    "cert:" + ray.name);
                }
        }
        // relations strictly beyond the cut must be vacuous now
        for (size_t r = 0; r < s.rels.size(); ++r) {
            const VAddr& home = s.gens[s.rel_home[r]];
            if (home.part > 0 && home.block > cut[(size_t)home.part - 1] &&
                !residual_row(s, r).empty())
                throw std::logic_error("tail relation survived past the certified cut");
        }

        out.stabilized = true;
        out.window_used = blocks;
        out.cut = cut;
        out.res = finish(s);
        return out;
    }
    return out;
}

}  // namespace kgraph
