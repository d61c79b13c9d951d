#include "kgraph/kengine.hpp"

#include <algorithm>
#include <sstream>

namespace kgraph {

namespace {

GraphFile ensure_involution(GraphFile g) {
    if (g.periodic) {
        if (!g.ep_inv) {
            EPInvolution inv;
            inv.core = Involution::trivial(g.ep.core.n());
            inv.ray_perm.resize(g.ep.rays.size());
            for (size_t i = 0; i < g.ep.rays.size(); ++i) inv.ray_perm[i] = (int)i;
            inv.ray_cls.assign(g.ep.rays.size(), Involution::F);
            g.ep_inv = inv;
        }
    } else if (!g.inv) {
        g.inv = Involution::trivial(g.finite.n());
    }
    return g;
}

bool no_vertices(const GraphFile& g) {
    return g.periodic ? g.ep.core.n() == 0 && g.ep.rays.empty() : g.finite.n() == 0;
}

bool paired_part_empty(const GraphFile& g) {
    if (g.periodic) {
        if (!g.ep_inv->core.part(Involution::G).empty()) return false;
        for (int c : g.ep_inv->ray_cls)
            if (c == Involution::G) return false;
        return true;
    }
    return g.inv->part(Involution::G).empty();
}

IMat i_minus_mt(const IMat& M) {
    IMat B(M.rows(), M.cols());
    for (size_t i = 0; i < M.rows(); ++i)
        for (size_t j = 0; j < M.cols(); ++j) B(i, j) = (i == j ? 1 : 0) - M(j, i);
    return B;
}

struct SysOut {
    bool stabilized = true;
    long window = 0;
    AbGroup coker, ker;
    std::vector<std::string> coker_log, ker_log;
    std::vector<std::string> coker_survivors, ker_survivors;
    IMat ker_basis;
};

SysOut run_system(const GraphFile& gf, Ring ring, long max_window) {
    SysOut o;
    if (no_vertices(gf)) return o;
    if (gf.periodic) {
        EPResult co = ep_coker_ker(gf.ep, Mode::Coker, ring, max_window);
        EPResult ke = ep_coker_ker(gf.ep, Mode::Ker, ring, max_window);
        o.stabilized = co.stabilized && ke.stabilized;
        if (!o.stabilized) return o;
        o.window = std::max(co.window_used, ke.window_used);
        o.coker = co.res.group;
        o.ker = ke.res.group;
        o.coker_log = co.res.log;
        o.ker_log = ke.res.log;
        o.coker_survivors = co.res.survivor_names;
        o.ker_survivors = ke.res.survivor_names;
        o.ker_basis = ke.res.ker_basis;
    } else {
        PropResult co = finite_coker_ker(gf.finite, Mode::Coker, ring);
        PropResult ke = finite_coker_ker(gf.finite, Mode::Ker, ring);
        o.coker = co.group;
        o.ker = ke.group;
        o.coker_log = co.log;
        o.ker_log = ke.log;
        o.coker_survivors = co.survivor_names;
        o.ker_survivors = ke.survivor_names;
        o.ker_basis = ke.ker_basis;
    }
    return o;
}

}  // namespace

KUResult complex_k(const GraphFile& g, long max_window) {
    KUResult out;
    if (g.rank() == 1) {
        SysOut o = run_system(g, Ring::Z, max_window);
        out.stabilized = o.stabilized;
        if (!out.stabilized) return out;
        out.window_used = o.window;
        out.k0 = o.coker;
        out.k1 = o.ker;
        out.coker_log = o.coker_log;
        out.ker_log = o.ker_log;
        out.coker_survivors = o.coker_survivors;
        out.ker_survivors = o.ker_survivors;
        out.ker_basis = o.ker_basis;
        return out;
    }

    const KGraph& k = g.finite;
    std::vector<IMat> B;
    for (const IMat& M : k.adj) B.push_back(i_minus_mt(M));
    const size_t n = k.n();
    IMat Z(n, n);

    if (g.rank() == 2) {
        IMat d1 = B[0].hstack(B[1]);
        IMat d2 = (-B[1]).vstack(B[0]);
        AbGroup h0 = cokernel(d1);
        AbGroup h1 = homology(d1, d2);
        AbGroup h2 = AbGroup::free_group((long)kernel_basis(d2).cols());
        out.k0 = h0.direct_sum(h2);
        out.k1 = h1;
        out.k0_ambiguous = !h0.torsion.empty() && !h2.is_zero();
        if (out.k0_ambiguous)
            out.notes.push_back("K_0 reported as H_0 + H_2; the filtration extension is not computed");
        return out;
    }
    if (g.rank() == 3) {
        IMat d1 = B[0].hstack(B[1]).hstack(B[2]);
        IMat c12 = (-B[1]).vstack(B[0]).vstack(Z);
        IMat c13 = (-B[2]).vstack(Z).vstack(B[0]);
        IMat c23 = Z.vstack(-B[2]).vstack(B[1]);
        IMat d2 = c12.hstack(c13).hstack(c23);
        IMat d3 = B[2].vstack(-B[1]).vstack(B[0]);
        AbGroup h0 = cokernel(d1);
        AbGroup h1 = homology(d1, d2);
        AbGroup h2 = homology(d2, d3);
        AbGroup h3 = AbGroup::free_group((long)kernel_basis(d3).cols());
        out.k0 = h0.direct_sum(h2);
        out.k1 = h1.direct_sum(h3);
        out.k0_ambiguous = !h0.torsion.empty() && !h2.is_zero();
        out.k1_ambiguous = !h1.torsion.empty() && !h3.is_zero();
        if (out.k0_ambiguous || out.k1_ambiguous)
            out.notes.push_back("graded pieces reported as direct sums; filtration extensions not computed");
        return out;
    }
    throw GraphError("complex K-theory supports ranks 1 to 3");
}

RealRows real_rows(const GraphFile& g0, long max_window) {
    GraphFile g = ensure_involution(g0);
    RealRows out;
    out.rank = (int)g.rank();

    auto set_zero = [&](int q) {
        for (auto& col : out.E) col[q] = RowEntry{true, AbGroup::zero()};
    };

    if (out.rank == 1) {
        out.E.resize(2);

        SysOut fx = run_system(fixed_subgraph(g), Ring::GF2, max_window);
        SysOut fd = run_system(degree0_graph(g), Ring::Z, max_window);
        out.stabilized = fx.stabilized && fd.stabilized;
        if (!out.stabilized) return out;
        out.window_used = std::max(fx.window, fd.window);
        out.E[0][1] = RowEntry{true, fx.coker};
        out.E[1][1] = RowEntry{true, fx.ker};
        out.E[0][0] = RowEntry{true, fd.coker};
        out.E[1][0] = RowEntry{true, fd.ker};
        out.q1_log = fx.coker_log;
        out.q1_log.insert(out.q1_log.end(), fx.ker_log.begin(), fx.ker_log.end());
        out.q0_log = fd.coker_log;
        out.q0_log.insert(out.q0_log.end(), fd.ker_log.begin(), fd.ker_log.end());

        for (int q : {3, 5, 7}) set_zero(q);
        if (no_vertices(g))
            for (int q : {2, 4}) set_zero(q);
        if (paired_part_empty(g)) set_zero(6);
        return out;
    }

    if (out.rank == 2) {
        out.E.resize(3);
        const KGraph& k = g.finite;
        const Involution& inv = *g.inv;

        // per-color collapsed rows: degree-0 fold over Z, fixed block mod 2
        std::vector<IMat> rho0, rho1;
        for (const IMat& M : k.adj) {
            KGraph one;
            one.rank = 1;
            one.vertices = k.vertices;
            one.adj = {M};
            GraphFile wrap;
            wrap.finite = one;
            wrap.inv = inv;
            GraphFile folded = degree0_graph(wrap);
            rho0.push_back(i_minus_mt(folded.finite.adj[0]));
            auto f = inv.part(Involution::F);
            IMat b11(f.size(), f.size());
            for (size_t i = 0; i < f.size(); ++i)
                for (size_t j = 0; j < f.size(); ++j)
                    b11(i, j) = (i == j ? 1 : 0) - M(f[j], f[i]);
            rho1.push_back(b11);
        }

        IMat d1 = rho0[0].hstack(rho0[1]);
        IMat d2 = (-rho0[1]).vstack(rho0[0]);
        out.E[0][0] = RowEntry{true, cokernel(d1)};
        out.E[1][0] = RowEntry{true, homology(d1, d2)};
        out.E[2][0] = RowEntry{true, AbGroup::free_group((long)kernel_basis(d2).cols())};

        GF2Mat e1 = to_gf2(rho1[0].hstack(rho1[1]));
        GF2Mat e2 = to_gf2((-rho1[1]).vstack(rho1[0]));
        size_t d = rho1[0].rows();
        size_t r1 = gf2_rank(e1), r2 = gf2_rank(e2);
        auto elem2 = [](size_t dim) { return AbGroup{0, std::vector<Int>(dim, 2)}; };
        out.E[0][1] = RowEntry{true, elem2(d - r1)};
        out.E[1][1] = RowEntry{true, elem2(2 * d - r1 - r2)};
        out.E[2][1] = RowEntry{true, elem2(d - r2)};

        for (int q : {3, 5, 7}) set_zero(q);
        if (no_vertices(g))
            for (int q : {2, 4}) set_zero(q);
        if (paired_part_empty(g)) set_zero(6);
        out.notes.push_back("E_2 entries in degrees 0, 4, 6 are torsion-free");
        out.notes.push_back("page-2 differentials are not computed");
        return out;
    }
    throw GraphError("real rows support ranks 1 and 2");
}

AssembledKO assemble_rank1(const RealRows& rows) {
    if (rows.rank != 1) throw GraphError("assembly applies to rank-1 rows");
    AssembledKO out;
    for (int j = 0; j < 8; ++j) {
        const RowEntry& e0 = rows.E[0][j];
        const RowEntry& e1 = rows.E[1][(j + 7) % 8];
        if (!e0.known || !e1.known) continue;
        auto mids = extension_middles(e0.value, e1.value);
        if (!mids) {
            out.notes.push_back("degree " + std::to_string(j) + ": too many extension classes");
            continue;
        }
        if (mids->size() == 1) {
            out.ko[j] = RowEntry{true, (*mids)[0]};
        } else {
            out.choices[j] = *mids;
            out.notes.push_back("degree " + std::to_string(j) + ": " +
                                std::to_string(mids->size()) + " possible extensions");
        }
    }
    return out;
}

bool row_candidate_ok(const RealRows& rows, int j, const AbGroup& cand) {
    const RowEntry& e0 = rows.E[0][j];
    const RowEntry& e1 = rows.E[1][(j + 7) % 8];
    if (e0.known && !e0.value.embeds_in(cand)) return false;
    if (e1.known && !e1.value.quotient_of(cand)) return false;
    if (e0.known && e1.known) {
        auto mids = extension_middles(e0.value, e1.value);
        if (mids && std::find(mids->begin(), mids->end(), cand) == mids->end()) return false;
    }
    return true;
}

std::string render_rows(const RealRows& rows) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> head{"q"};
    for (int q = 0; q < 8; ++q) head.push_back(std::to_string(q));
    cells.push_back(head);
    for (size_t p = 0; p < rows.E.size(); ++p) {
        std::vector<std::string> line{"E_" + std::to_string(p)};
        for (int q = 0; q < 8; ++q)
            line.push_back(rows.E[p][q].known ? rows.E[p][q].value.str() : "?");
        cells.push_back(line);
    }
    std::vector<size_t> width(cells[0].size(), 0);
    for (auto& line : cells)
        for (size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    std::ostringstream out;
    for (auto& line : cells) {
        std::string row;
        for (size_t i = 0; i < line.size(); ++i)
            row += line[i] + std::string(width[i] - line[i].size() + 2, ' ');
        while (!row.empty() && row.back() == ' ') row.pop_back();
        out << row << "\n";
    }
    return out.str();
}

}  // namespace kgraph
