#include "kgraph/graphs.hpp"

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace kgraph {

using nlohmann::json;

long KGraph::vindex(const std::string& name) const {
    for (size_t i = 0; i < vertices.size(); ++i)
        if (vertices[i] == name) return (long)i;
    return -1;
}

Involution Involution::trivial(size_t n) {
    Involution inv;
    inv.perm.resize(n);
    inv.cls.assign(n, F);
    for (size_t i = 0; i < n; ++i) inv.perm[i] = (int)i;
    return inv;
}

std::vector<size_t> Involution::part(int which) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < cls.size(); ++i)
        if (cls[i] == which) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------- parsing

static void check_keys(const json& o, std::initializer_list<const char*> allowed,
                       const std::string& where) {
    for (auto& [k, v] : o.items()) {
        (void)v;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return k == a; }) == allowed.end())
            throw GraphError("unknown field '" + k + "' in " + where);
    }
}

static std::vector<std::string> parse_names(const json& a, const std::string& where) {
    if (!a.is_array()) throw GraphError(where + " must be an array of strings");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& e : a) {
        if (!e.is_string()) throw GraphError(where + " must contain only strings");
        std::string s = e.get<std::string>();
        if (s.empty()) throw GraphError("empty name in " + where);
        if (s.find(':') != std::string::npos || s.find(',') != std::string::npos)
            throw GraphError("name '" + s + "' in " + where + " must not contain ':' or ','");
        if (!seen.insert(s).second) throw GraphError("duplicate name '" + s + "' in " + where);
        out.push_back(s);
    }
    return out;
}

static IMat parse_matrix(const json& a, size_t rows, size_t cols, const std::string& where) {
    if (!a.is_array()) throw GraphError(where + " must be an array of rows");
    if (a.size() != rows)
        throw GraphError(where + " must have " + std::to_string(rows) + " rows, got " +
                         std::to_string(a.size()));
    IMat m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        const auto& row = a[i];
        if (!row.is_array() || row.size() != cols)
            throw GraphError(where + " row " + std::to_string(i) + " must have " +
                             std::to_string(cols) + " entries");
        for (size_t j = 0; j < cols; ++j) {
            if (!row[j].is_number_integer() || row[j].get<long long>() < 0)
                throw GraphError(where + " entries must be nonnegative integers");
            m(i, j) = (long)row[j].get<long long>();
        }
    }
    return m;
}

static void parse_edges(const json& a, KGraph& g, const std::string& where) {
    if (!a.is_array() || a.size() != (size_t)g.rank)
        throw GraphError(where + ": 'edges' must be an array with one entry per color");
    for (int c = 0; c < g.rank; ++c) {
        g.adj.emplace_back(g.n(), g.n());
        const auto& color = a[c];
        if (!color.is_array())
            throw GraphError(where + ": color " + std::to_string(c) + " must be an array");
        for (const auto& t : color) {
            if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string() ||
                !t[2].is_number_integer())
                throw GraphError(where + ": edges are [source, range, multiplicity] triples");
            long src = g.vindex(t[0].get<std::string>());
            long rng = g.vindex(t[1].get<std::string>());
            if (src < 0 || rng < 0)
                throw GraphError(where + ": edge references unknown vertex '" +
                                 (src < 0 ? t[0] : t[1]).get<std::string>() + "'");
            long long mult = t[2].get<long long>();
            if (mult < 1) throw GraphError(where + ": edge multiplicity must be >= 1");
            g.adj[c](rng, src) += (long)mult;
        }
    }
}

struct NamePairing {
    std::vector<int> perm, cls;
};

static NamePairing parse_pairing(const json& inv, const char* fixed_key, const char* pairs_key,
                                 const char* section_key, const std::vector<std::string>& names,
                                 const std::string& what) {
    auto index_of = [&](const std::string& s) -> long {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == s) return (long)i;
        return -1;
    };

    NamePairing np;
    size_t n = names.size();
    np.perm.assign(n, -1);
    np.cls.assign(n, -1);

    if (inv.contains(fixed_key))
        for (const std::string& s : parse_names(inv[fixed_key], what + " fixed list")) {
            long i = index_of(s);
            if (i < 0) throw GraphError("unknown " + what + " '" + s + "' in involution");
            np.perm[i] = (int)i;
            np.cls[i] = Involution::F;
        }

    if (inv.contains(pairs_key)) {
        const auto& pairs = inv[pairs_key];
        if (!pairs.is_array()) throw GraphError(what + " pairs must be an array");
        for (const auto& pr : pairs) {
            if (!pr.is_array() || pr.size() != 2 || !pr[0].is_string() || !pr[1].is_string())
                throw GraphError(what + " pairs must be two-element name arrays");
            long a = index_of(pr[0].get<std::string>());
            long b = index_of(pr[1].get<std::string>());
            if (a < 0 || b < 0) throw GraphError("unknown " + what + " in involution pair");
            if (a == b)
                throw GraphError(what + " '" + names[a] +
                                 "' paired with itself; a nontrivial self-map of a single " +
                                 what + " is not supported");
            if (np.perm[a] != -1 || np.perm[b] != -1)
                throw GraphError(what + " listed twice in involution");
            np.perm[a] = (int)b;
            np.perm[b] = (int)a;
            // default section: the earlier-listed element of each pair
            np.cls[std::min(a, b)] = Involution::G;
            np.cls[std::max(a, b)] = Involution::H;
        }
    }

    for (size_t i = 0; i < n; ++i)
        if (np.perm[i] == -1)
            throw GraphError(what + " '" + names[i] + "' missing from involution");

    if (inv.contains(section_key))
        for (const std::string& s : parse_names(inv[section_key], what + " section")) {
            long i = index_of(s);
            if (i < 0) throw GraphError("unknown " + what + " '" + s + "' in section");
            if (np.cls[i] == Involution::F)
                throw GraphError("section lists fixed " + what + " '" + s + "'");
            np.cls[i] = Involution::G;
            np.cls[np.perm[i]] = Involution::H;
        }

    return np;
}

GraphFile parse_graph_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw GraphError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw GraphError("graph file must be a JSON object");
    check_keys(j, {"rank", "vertices", "edges", "involution", "rays"}, "graph");

    GraphFile g;
    if (!j.contains("rank") || !j["rank"].is_number_integer())
        throw GraphError("'rank' must be an integer");
    int rank = j["rank"].get<int>();
    if (rank < 1 || rank > 3) throw GraphError("'rank' must be 1, 2 or 3");

    if (!j.contains("vertices")) throw GraphError("'vertices' is required");
    KGraph base;
    base.rank = rank;
    base.vertices = parse_names(j["vertices"], "'vertices'");
    if (!j.contains("edges")) throw GraphError("'edges' is required");
    parse_edges(j["edges"], base, "graph");

    g.periodic = j.contains("rays");
    if (g.periodic) {
        if (rank != 1) throw GraphError("eventually-periodic graphs must have rank 1");
        g.ep.core = base;
        const auto& rays = j["rays"];
        if (!rays.is_array() || rays.empty()) throw GraphError("'rays' must be a nonempty array");
        std::set<std::string> ray_names;
        for (const auto& rj : rays) {
            if (!rj.is_object()) throw GraphError("each ray must be an object");
            check_keys(rj,
                       {"name", "period", "intra", "forward", "backward", "attach_to_core",
                        "attach_from_core"},
                       "ray");
            Ray r;
            if (!rj.contains("name") || !rj["name"].is_string())
                throw GraphError("ray 'name' must be a string");
            r.name = rj["name"].get<std::string>();
            if (r.name.empty() || r.name.find(':') != std::string::npos)
                throw GraphError("ray name must be nonempty without ':'");
            if (!ray_names.insert(r.name).second)
                throw GraphError("duplicate ray name '" + r.name + "'");
            if (!rj.contains("period")) throw GraphError("ray 'period' is required");
            r.period = parse_names(rj["period"], "ray '" + r.name + "' period");
            if (r.period.empty()) throw GraphError("ray period must be nonempty");
            size_t p = r.period.size(), nc = g.ep.core.n();
            auto want = [&](const char* key, size_t rows, size_t cols) -> IMat {
                if (!rj.contains(key)) {
                    if (rows == 0 || cols == 0) return IMat(rows, cols);
                    throw GraphError("ray '" + r.name + "' missing '" + key + "'");
                }
                return parse_matrix(rj[key], rows, cols, "ray '" + r.name + "' " + key);
            };
            r.intra = want("intra", p, p);
            r.fwd = want("forward", p, p);
            r.bwd = want("backward", p, p);
            r.a2c = want("attach_to_core", nc, p);
            r.afc = want("attach_from_core", p, nc);
            g.ep.rays.push_back(std::move(r));
        }
    } else {
        g.finite = base;
    }

    if (j.contains("involution")) {
        const auto& ij = j["involution"];
        if (!ij.is_object()) throw GraphError("'involution' must be an object");
        check_keys(ij, {"fixed", "pairs", "section", "ray_fixed", "ray_pairs", "ray_section"},
                   "involution");
        const auto& verts = g.periodic ? g.ep.core.vertices : g.finite.vertices;
        auto vp = parse_pairing(ij, "fixed", "pairs", "section", verts, "vertex");
        Involution inv;
        inv.perm = vp.perm;
        inv.cls = vp.cls;
        if (g.periodic) {
            std::vector<std::string> rnames;
            for (const auto& r : g.ep.rays) rnames.push_back(r.name);
            auto rp = parse_pairing(ij, "ray_fixed", "ray_pairs", "ray_section", rnames, "ray");
            EPInvolution ei;
            ei.core = inv;
            ei.ray_perm = rp.perm;
            ei.ray_cls = rp.cls;
            g.ep_inv = ei;
        } else {
            if (ij.contains("ray_fixed") || ij.contains("ray_pairs") || ij.contains("ray_section"))
                throw GraphError("ray involution fields on a graph without rays");
            g.inv = inv;
        }
    }
    return g;
}

static json names_json(const std::vector<std::string>& v) {
    json a = json::array();
    for (const auto& s : v) a.push_back(s);
    return a;
}

static json edges_json(const KGraph& g) {
    json colors = json::array();
    for (int c = 0; c < g.rank; ++c) {
        json es = json::array();
        for (size_t w = 0; w < g.n(); ++w)
            for (size_t v = 0; v < g.n(); ++v)
                if (g.adj[c](v, w) != 0)
                    es.push_back(json::array(
                        {g.vertices[w], g.vertices[v], (long)g.adj[c](v, w).get_si()}));
        colors.push_back(es);
    }
    return colors;
}

static json matrix_json(const IMat& m) {
    json rows = json::array();
    for (size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (size_t j = 0; j < m.cols(); ++j) row.push_back((long)m(i, j).get_si());
        rows.push_back(row);
    }
    return rows;
}

static json pairing_json(const Involution& inv, const std::vector<std::string>& names) {
    json fixed = json::array(), pairs = json::array(), section = json::array();
    for (size_t i = 0; i < names.size(); ++i) {
        if (inv.cls[i] == Involution::F)
            fixed.push_back(names[i]);
        else if (inv.cls[i] == Involution::G) {
            pairs.push_back(json::array({names[i], names[inv.perm[i]]}));
            section.push_back(names[i]);
        }
    }
    return json{{"fixed", fixed}, {"pairs", pairs}, {"section", section}};
}

std::string graph_to_json(const GraphFile& g) {
    json j;
    const KGraph& base = g.periodic ? g.ep.core : g.finite;
    j["rank"] = base.rank;
    j["vertices"] = names_json(base.vertices);
    j["edges"] = edges_json(base);
    if (g.periodic) {
        json rays = json::array();
        for (const auto& r : g.ep.rays) {
            json rj;
            rj["name"] = r.name;
            rj["period"] = names_json(r.period);
            rj["intra"] = matrix_json(r.intra);
            rj["forward"] = matrix_json(r.fwd);
            rj["backward"] = matrix_json(r.bwd);
            rj["attach_to_core"] = matrix_json(r.a2c);
            rj["attach_from_core"] = matrix_json(r.afc);
            rays.push_back(rj);
        }
        j["rays"] = rays;
    }
    if (g.periodic && g.ep_inv) {
        json ij = pairing_json(g.ep_inv->core, base.vertices);
        std::vector<std::string> rnames;
        for (const auto& r : g.ep.rays) rnames.push_back(r.name);
        Involution rinv;
        rinv.perm = g.ep_inv->ray_perm;
        rinv.cls = g.ep_inv->ray_cls;
        json rj = pairing_json(rinv, rnames);
        ij["ray_fixed"] = rj["fixed"];
        ij["ray_pairs"] = rj["pairs"];
        ij["ray_section"] = rj["section"];
        j["involution"] = ij;
    } else if (!g.periodic && g.inv) {
        j["involution"] = pairing_json(*g.inv, base.vertices);
    }
    return j.dump(2) + "\n";
}

std::string addr_str(const GraphFile& g, const VAddr& a) {
    if (!g.periodic) return g.finite.vertices[a.off];
    if (a.part == 0) return g.ep.core.vertices[a.off];
    const Ray& r = g.ep.rays[a.part - 1];
    return r.name + ":" + std::to_string(a.block) + ":" + r.period[a.off];
}

// ---------------------------------------------------------------- validate

static void check_involution_core(const KGraph& g, const Involution& inv,
                                  ValidationReport& rep) {
    size_t n = g.n();
    for (size_t v = 0; v < n; ++v) {
        size_t gv = inv.perm[v];
        if (inv.perm[gv] != (int)v)
            rep.errors.push_back({"involution", "perm is not an involution at " + g.vertices[v]});
        bool fixed = gv == v;
        if (fixed != (inv.cls[v] == Involution::F))
            rep.errors.push_back({"involution", "class/perm mismatch at " + g.vertices[v]});
        if (!fixed && inv.cls[v] != Involution::F && inv.cls[gv] == inv.cls[v])
            rep.errors.push_back({"involution", "pair in one class at " + g.vertices[v]});
    }
    for (int c = 0; c < g.rank; ++c)
        for (size_t v = 0; v < n; ++v)
            for (size_t w = 0; w < n; ++w)
                if (g.adj[c](inv.perm[v], inv.perm[w]) != g.adj[c](v, w)) {
                    rep.errors.push_back(
                        {"equivariance", "color " + std::to_string(c) + " not equivariant at (" +
                                             g.vertices[v] + ", " + g.vertices[w] + ")"});
                    return;
                }
}

ValidationReport validate(const GraphFile& g) {
    ValidationReport rep;
    if (!g.periodic) {
        const KGraph& f = g.finite;
        if (f.n() == 0) {
            rep.errors.push_back({"empty", "graph has no vertices"});
            return rep;
        }
        for (int a = 0; a < f.rank; ++a)
            for (int b = a + 1; b < f.rank; ++b)
                if (f.adj[a].mul(f.adj[b]) != f.adj[b].mul(f.adj[a]))
                    rep.errors.push_back({"commutation", "adjacency matrices of colors " +
                                                             std::to_string(a) + " and " +
                                                             std::to_string(b) +
                                                             " do not commute"});
        for (int c = 0; c < f.rank; ++c)
            for (size_t v = 0; v < f.n(); ++v) {
                bool hit = false;
                for (size_t w = 0; w < f.n() && !hit; ++w) hit = f.adj[c](v, w) != 0;
                if (!hit)
                    rep.errors.push_back({"source", "vertex " + f.vertices[v] +
                                                        " receives no color-" +
                                                        std::to_string(c) + " edge"});
            }
        if (g.inv) check_involution_core(f, *g.inv, rep);
        return rep;
    }

    const EPGraph& ep = g.ep;
    if (ep.core.n() == 0 && ep.rays.empty()) {
        rep.errors.push_back({"empty", "graph has no vertices"});
        return rep;
    }
    // source-freeness: core rows may also draw from block 0 of each ray
    for (size_t v = 0; v < ep.core.n(); ++v) {
        bool hit = false;
        for (size_t w = 0; w < ep.core.n() && !hit; ++w) hit = ep.core.adj[0](v, w) != 0;
        for (const auto& r : ep.rays)
            for (size_t j = 0; j < r.p() && !hit; ++j) hit = r.a2c(v, j) != 0;
        if (!hit)
            rep.errors.push_back({"source", "core vertex " + ep.core.vertices[v] +
                                                " receives no edge"});
    }
    for (const auto& r : ep.rays)
        for (size_t j = 0; j < r.p(); ++j) {
            auto row_hit = [&](const IMat& m) {
                for (size_t k = 0; k < m.cols(); ++k)
                    if (m(j, k) != 0) return true;
                return false;
            };
            bool deep = row_hit(r.intra) || row_hit(r.fwd) || row_hit(r.bwd);
            if (!deep)
                rep.errors.push_back({"source", "ray vertex " + r.name + ":b:" + r.period[j] +
                                                    " receives no edge for blocks b >= 1"});
            bool first = row_hit(r.intra) || row_hit(r.bwd) || row_hit(r.afc);
            if (!first)
                rep.errors.push_back({"source", "ray vertex " + r.name + ":0:" + r.period[j] +
                                                    " receives no edge"});
        }

    if (g.ep_inv) {
        const EPInvolution& ei = *g.ep_inv;
        if (ep.core.n() > 0) check_involution_core(ep.core, ei.core, rep);
        for (size_t a = 0; a < ep.rays.size(); ++a) {
            size_t b = ei.ray_perm[a];
            if ((size_t)ei.ray_perm[b] != a) {
                rep.errors.push_back({"involution", "ray perm is not an involution"});
                continue;
            }
            const Ray &ra = ep.rays[a], &rb = ep.rays[b];
            if (ra.p() != rb.p()) {
                rep.errors.push_back(
                    {"involution", "paired rays " + ra.name + ", " + rb.name +
                                       " have different period sizes"});
                continue;
            }
            if (ra.intra != rb.intra || ra.fwd != rb.fwd || ra.bwd != rb.bwd)
                rep.errors.push_back({"equivariance", "paired rays " + ra.name + ", " + rb.name +
                                                          " have different block matrices"});
            for (size_t v = 0; v < ep.core.n(); ++v)
                for (size_t j = 0; j < ra.p(); ++j) {
                    if (rb.a2c((size_t)ei.core.perm[v], j) != ra.a2c(v, j))
                        rep.errors.push_back(
                            {"equivariance", "attach_to_core of rays " + ra.name + ", " +
                                                 rb.name + " not equivariant at core vertex " +
                                                 ep.core.vertices[v]});
                    if (rb.afc(j, (size_t)ei.core.perm[v]) != ra.afc(j, v))
                        rep.errors.push_back(
                            {"equivariance", "attach_from_core of rays " + ra.name + ", " +
                                                 rb.name + " not equivariant at core vertex " +
                                                 ep.core.vertices[v]});
                    if (!rep.errors.empty() && rep.errors.size() > 8) return rep;
                }
        }
    }
    return rep;
}

// ------------------------------------------------------- derived graphs

static KGraph sub_graph(const KGraph& g, const std::vector<size_t>& keep) {
    KGraph s;
    s.rank = g.rank;
    for (size_t i : keep) s.vertices.push_back(g.vertices[i]);
    for (int c = 0; c < g.rank; ++c) {
        IMat m(keep.size(), keep.size());
        for (size_t i = 0; i < keep.size(); ++i)
            for (size_t j = 0; j < keep.size(); ++j) m(i, j) = g.adj[c](keep[i], keep[j]);
        s.adj.push_back(std::move(m));
    }
    return s;
}

GraphFile fixed_subgraph(const GraphFile& g) {
    GraphFile out;
    if (!g.periodic) {
        if (!g.inv) throw GraphError("fixed_subgraph needs an involution");
        out.finite = sub_graph(g.finite, g.inv->part(Involution::F));
        return out;
    }
    if (!g.ep_inv) throw GraphError("fixed_subgraph needs an involution");
    const EPInvolution& ei = *g.ep_inv;
    auto keep = ei.core.part(Involution::F);
    out.periodic = true;
    out.ep.core = sub_graph(g.ep.core, keep);
    for (size_t r = 0; r < g.ep.rays.size(); ++r) {
        if (ei.ray_cls[r] != Involution::F) continue;
        Ray nr = g.ep.rays[r];
        IMat a2c(keep.size(), nr.p()), afc(nr.p(), keep.size());
        for (size_t i = 0; i < keep.size(); ++i)
            for (size_t j = 0; j < nr.p(); ++j) {
                a2c(i, j) = nr.a2c(keep[i], j);
                afc(j, i) = nr.afc(j, keep[i]);
            }
        nr.a2c = std::move(a2c);
        nr.afc = std::move(afc);
        out.ep.rays.push_back(std::move(nr));
    }
    if (out.ep.rays.empty() && out.ep.core.n() > 0) {
        // no rays left: the fixed part is a finite graph
        GraphFile fin;
        fin.finite = out.ep.core;
        return fin;
    }
    return out;
}

// M'(u, v) = M(u, v) + [u in g] M(gamma u, v) over the kept vertex set
static KGraph fold_graph(const KGraph& g, const Involution& inv) {
    std::vector<size_t> keep;
    for (size_t i = 0; i < g.n(); ++i)
        if (inv.cls[i] != Involution::H) keep.push_back(i);
    KGraph s;
    s.rank = g.rank;
    for (size_t i : keep) s.vertices.push_back(g.vertices[i]);
    for (int c = 0; c < g.rank; ++c) {
        IMat m(keep.size(), keep.size());
        for (size_t i = 0; i < keep.size(); ++i)
            for (size_t j = 0; j < keep.size(); ++j) {
                m(i, j) = g.adj[c](keep[i], keep[j]);
                if (inv.cls[keep[i]] == Involution::G)
                    m(i, j) += g.adj[c]((size_t)inv.perm[keep[i]], keep[j]);
            }
        s.adj.push_back(std::move(m));
    }
    return s;
}

GraphFile degree0_graph(const GraphFile& g) {
    GraphFile out;
    if (!g.periodic) {
        if (!g.inv) throw GraphError("degree0_graph needs an involution");
        out.finite = fold_graph(g.finite, *g.inv);
        return out;
    }
    if (!g.ep_inv) throw GraphError("degree0_graph needs an involution");
    const EPInvolution& ei = *g.ep_inv;
    std::vector<size_t> keep;
    for (size_t i = 0; i < g.ep.core.n(); ++i)
        if (ei.core.cls[i] != Involution::H) keep.push_back(i);

    out.periodic = true;
    out.ep.core = fold_graph(g.ep.core, ei.core);
    for (size_t r = 0; r < g.ep.rays.size(); ++r) {
        if (ei.ray_cls[r] == Involution::H) continue;
        const Ray& src = g.ep.rays[r];
        Ray nr = src;  // intra/fwd/bwd carry over: rays have no cross-ray edges
        IMat a2c(keep.size(), nr.p()), afc(nr.p(), keep.size());
        for (size_t i = 0; i < keep.size(); ++i)
            for (size_t j = 0; j < nr.p(); ++j) {
                a2c(i, j) = src.a2c(keep[i], j);
                if (ei.core.cls[keep[i]] == Involution::G)
                    a2c(i, j) += src.a2c((size_t)ei.core.perm[keep[i]], j);
                afc(j, i) = src.afc(j, keep[i]);
                if (ei.ray_cls[r] == Involution::G)
                    afc(j, i) += g.ep.rays[(size_t)ei.ray_perm[r]].afc(j, keep[i]);
            }
        nr.a2c = std::move(a2c);
        nr.afc = std::move(afc);
        out.ep.rays.push_back(std::move(nr));
    }
    if (out.ep.rays.empty()) {
        GraphFile fin;
        fin.finite = out.ep.core;
        return fin;
    }
    return out;
}

GraphFile product(const GraphFile& ga, const GraphFile& gb) {
    if (ga.periodic || gb.periodic)
        throw GraphError("product of eventually-periodic graphs is not supported");
    const KGraph &a = ga.finite, &b = gb.finite;
    KGraph p;
    p.rank = a.rank + b.rank;
    size_t na = a.n(), nb = b.n();
    for (size_t i = 0; i < na; ++i)
        for (size_t j = 0; j < nb; ++j) p.vertices.push_back(a.vertices[i] + "." + b.vertices[j]);

    auto kron = [&](const IMat& x, const IMat& y) {
        IMat m(na * nb, na * nb);
        for (size_t i1 = 0; i1 < na; ++i1)
            for (size_t j1 = 0; j1 < na; ++j1) {
                if (x(i1, j1) == 0) continue;
                for (size_t i2 = 0; i2 < nb; ++i2)
                    for (size_t j2 = 0; j2 < nb; ++j2)
                        m(i1 * nb + i2, j1 * nb + j2) = x(i1, j1) * y(i2, j2);
            }
        return m;
    };
    IMat ia = IMat::identity(na), ib = IMat::identity(nb);
    for (int c = 0; c < a.rank; ++c) p.adj.push_back(kron(a.adj[c], ib));
    for (int c = 0; c < b.rank; ++c) p.adj.push_back(kron(ia, b.adj[c]));

    GraphFile out;
    out.finite = p;
    if (ga.inv || gb.inv) {
        Involution va = ga.inv ? *ga.inv : Involution::trivial(na);
        Involution vb = gb.inv ? *gb.inv : Involution::trivial(nb);
        Involution pi;
        pi.perm.resize(na * nb);
        pi.cls.assign(na * nb, -1);
        for (size_t i = 0; i < na; ++i)
            for (size_t j = 0; j < nb; ++j)
                pi.perm[i * nb + j] = va.perm[i] * (int)nb + vb.perm[j];
        for (size_t v = 0; v < na * nb; ++v) {
            if ((size_t)pi.perm[v] == v)
                pi.cls[v] = Involution::F;
            else if (pi.cls[v] == -1) {
                pi.cls[v] = Involution::G;
                pi.cls[pi.perm[v]] = Involution::H;
            }
        }
        out.inv = pi;
    }
    return out;
}

KGraph truncate(const EPGraph& g, long blocks) {
    if (blocks < 1) throw GraphError("truncation needs at least one block");
    KGraph t;
    t.rank = 1;
    t.vertices = g.core.vertices;
    std::vector<size_t> ray_base;
    for (const auto& r : g.rays) {
        ray_base.push_back(t.vertices.size());
        for (long b = 0; b < blocks; ++b)
            for (const auto& pv : r.period)
                t.vertices.push_back(r.name + ":" + std::to_string(b) + ":" + pv);
    }
    size_t n = t.vertices.size(), nc = g.core.n();
    IMat m(n, n);
    for (size_t v = 0; v < nc; ++v)
        for (size_t w = 0; w < nc; ++w) m(v, w) = g.core.adj[0](v, w);
    for (size_t ri = 0; ri < g.rays.size(); ++ri) {
        const Ray& r = g.rays[ri];
        size_t base = ray_base[ri], p = r.p();
        auto at = [&](long b, size_t j) { return base + (size_t)b * p + j; };
        for (size_t j = 0; j < p; ++j) {
            for (size_t v = 0; v < nc; ++v) {
                m(v, at(0, j)) += r.a2c(v, j);
                m(at(0, j), v) += r.afc(j, v);
            }
            for (size_t k = 0; k < p; ++k)
                for (long b = 0; b < blocks; ++b) {
                    m(at(b, j), at(b, k)) += r.intra(j, k);
                    if (b + 1 < blocks) {
                        m(at(b + 1, j), at(b, k)) += r.fwd(j, k);
                        m(at(b, j), at(b + 1, k)) += r.bwd(j, k);
                    }
                }
        }
    }
    t.adj.push_back(std::move(m));
    return t;
}

SimplicityCert simplicity_certificate(const GraphFile& g, long periods) {
    if (g.rank() != 1) throw GraphError("simplicity certificate supports rank 1 only");
    SimplicityCert cert;
    KGraph k = g.periodic ? truncate(g.ep, periods) : g.finite;
    if (g.periodic) {
        cert.truncation_based = true;
        cert.notes.push_back("checked on a " + std::to_string(periods) +
                             "-block truncation; truncation-based, not a proof");
    }
    size_t n = k.n();
    if (n == 0) return cert;
    const IMat& M = k.adj[0];

    auto bfs = [&](bool fwd) {
        std::vector<char> seen(n, 0);
        std::queue<size_t> q;
        q.push(0);
        seen[0] = 1;
        size_t cnt = 1;
        while (!q.empty()) {
            size_t u = q.front();
            q.pop();
            for (size_t v = 0; v < n; ++v) {
                bool edge = fwd ? M(v, u) != 0 : M(u, v) != 0;
                if (edge && !seen[v]) {
                    seen[v] = 1;
                    ++cnt;
                    q.push(v);
                }
            }
        }
        return cnt == n;
    };
    cert.hereditary_trivial = bfs(true) && bfs(false);

    // a cycle without an entrance lives entirely on vertices of in-degree 1
    std::vector<long> pred(n, -1);
    for (size_t v = 0; v < n; ++v) {
        Int deg = 0;
        long p = -1;
        for (size_t w = 0; w < n; ++w) {
            deg += M(v, w);
            if (M(v, w) != 0) p = (long)w;
        }
        if (deg == 1) pred[v] = p;
    }
    std::vector<char> state(n, 0);  // 0 fresh, 1 on path, 2 done
    bool bad = false;
    for (size_t v = 0; v < n && !bad; ++v) {
        if (state[v] || pred[v] < 0) continue;
        size_t u = v;
        std::vector<size_t> path;
        while (pred[u] >= 0 && state[u] == 0) {
            state[u] = 1;
            path.push_back(u);
            u = (size_t)pred[u];
        }
        if (pred[u] >= 0 && state[u] == 1) bad = true;  // closed a cycle of in-degree-1 vertices
        for (size_t x : path) state[x] = 2;
        state[u] = state[u] == 1 ? 2 : state[u];
    }
    cert.cycles_have_entrances = !bad;
    if (bad) cert.notes.push_back("found a cycle whose vertices all have in-degree 1");
    return cert;
}

IMat BlockDecomposition::block(int bi, int bj) const {
    size_t off_r = bi == 1 ? 0 : bi == 2 ? nf : nf + ng;
    size_t sz_r = bi == 1 ? nf : bi == 2 ? ng : nh;
    size_t off_c = bj == 1 ? 0 : bj == 2 ? nf : nf + ng;
    size_t sz_c = bj == 1 ? nf : bj == 2 ? ng : nh;
    IMat m(sz_r, sz_c);
    for (size_t i = 0; i < sz_r; ++i)
        for (size_t j = 0; j < sz_c; ++j) m(i, j) = B(off_r + i, off_c + j);
    return m;
}

ValidationReport BlockDecomposition::check() const {
    ValidationReport rep;
    auto expect = [&](int ai, int aj, int bi, int bj) {
        if (block(ai, aj) != block(bi, bj))
            rep.errors.push_back(
                {"blocks", "B" + std::to_string(ai) + std::to_string(aj) + " != B" +
                               std::to_string(bi) + std::to_string(bj) +
                               "; involution is not equivariant"});
    };
    expect(1, 3, 1, 2);
    expect(3, 1, 2, 1);
    expect(3, 2, 2, 3);
    expect(3, 3, 2, 2);
    return rep;
}

BlockDecomposition block_decomposition(const KGraph& g, const Involution& inv) {
    if (g.rank != 1) throw GraphError("block decomposition is for rank-1 graphs");
    auto f = inv.part(Involution::F), gg = inv.part(Involution::G);
    std::vector<size_t> order = f;
    order.insert(order.end(), gg.begin(), gg.end());
    for (size_t v : gg) order.push_back((size_t)inv.perm[v]);  // h aligned with g

    size_t n = g.n();
    BlockDecomposition bd;
    bd.nf = f.size();
    bd.ng = gg.size();
    bd.nh = gg.size();
    bd.B = IMat(n, n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            Int v = -g.adj[0](order[j], order[i]);  // transpose
            if (i == j) v += 1;
            bd.B(i, j) = v;
        }
    return bd;
}

}  // namespace kgraph
