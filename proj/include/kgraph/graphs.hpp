#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgraph/intlin.hpp"

namespace kgraph {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Finite higher-rank graph skeleton: one adjacency matrix per color,
 *  adj[i](v, w) = number of color-i edges with source w and range v.
 *  Factorization rules are not modeled; commuting adjacency matrices are
 *  checked as a necessary condition. */
struct KGraph {
    int rank = 1;
    std::vector<std::string> vertices;
    std::vector<IMat> adj;

    size_t n() const { return vertices.size(); }
    long vindex(const std::string& name) const;
};

/** Involutive vertex map gamma with gamma^2 = id, plus the partition of the
 *  vertex set into fixed points f and a chosen section g of the swapped
 *  pairs (h = gamma(g)). */
struct Involution {
    enum Cls { F = 0, G = 1, H = 2 };
    std::vector<int> perm;
    std::vector<int> cls;

    static Involution trivial(size_t n);
    std::vector<size_t> part(int which) const;
};

/** One eventually-periodic ray: an N-indexed strip of identical blocks of
 *  `period.size()` vertices. All matrices are [range][source].
 *    intra : edges within block b
 *    fwd   : edges from block b into block b+1
 *    bwd   : edges from block b+1 into block b
 *    a2c   : edges from block 0 into the core (rows = core)
 *    afc   : edges from the core into block 0 (rows = period)  */
struct Ray {
    std::string name;
    std::vector<std::string> period;
    IMat intra, fwd, bwd, a2c, afc;

    size_t p() const { return period.size(); }
};

/** Rank-1 graph with finite core and finitely many pairwise disjoint rays. */
struct EPGraph {
    KGraph core;
    std::vector<Ray> rays;
};

/** Involution of an eventually-periodic graph. Every ray is either pointwise
 *  fixed or swapped with a partner ray by the identity map on block offsets;
 *  anything else is rejected at validation. */
struct EPInvolution {
    Involution core;
    std::vector<int> ray_perm;
    std::vector<int> ray_cls;  // Involution::Cls per ray
};

/** Address of a vertex: part 0 is the core (or a finite graph), part k >= 1
 *  is ray k-1; block is the block number within the ray. */
struct VAddr {
    int part = 0;
    long block = 0;
    int off = 0;
    auto operator<=>(const VAddr&) const = default;
};

struct GraphFile {
    bool periodic = false;
    KGraph finite;
    EPGraph ep;
    std::optional<Involution> inv;
    std::optional<EPInvolution> ep_inv;

    size_t rank() const { return periodic ? 1 : (size_t)finite.rank; }
};

GraphFile parse_graph_json(const std::string& text);
std::string graph_to_json(const GraphFile& g);

std::string addr_str(const GraphFile& g, const VAddr& a);

struct Diagnostic {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Diagnostic> errors;
    std::vector<Diagnostic> warnings;
    bool ok() const { return errors.empty(); }
};

/** Structural checks: commuting colors, source-freeness (every vertex
 *  receives at least one edge of each color), involution consistency and
 *  equivariance, ray shape restrictions. */
ValidationReport validate(const GraphFile& g);

/** Subgraph on the gamma-fixed vertices (finite) / fixed core vertices and
 *  pointwise fixed rays (periodic). Input must have an involution. */
GraphFile fixed_subgraph(const GraphFile& g);

/** Degree-0 fold: vertex set f + g, adjacency
 *  M'(u, v) = M(u, v) + [u in g] M(gamma u, v). The result has no
 *  involution; it presents the degree-0 part over Z. */
GraphFile degree0_graph(const GraphFile& g);

/** Cartesian product of finite graphs: colors of a, then colors of b, with
 *  Kronecker adjacency. Involutions combine coordinatewise when both inputs
 *  carry one; the section of the product is re-derived. */
GraphFile product(const GraphFile& a, const GraphFile& b);

struct SimplicityCert {
    bool hereditary_trivial = false;   // only hereditary vertex sets are {} and all
    bool cycles_have_entrances = false;
    bool truncation_based = false;     // periodic input checked on a finite window
    std::vector<std::string> notes;
    bool simple() const { return hereditary_trivial && cycles_have_entrances; }
};

/** Rank-1 only. For periodic graphs the check runs on a truncation of
 *  `periods` blocks and is evidence, not a proof. */
SimplicityCert simplicity_certificate(const GraphFile& g, long periods = 3);

/** Finite window of an eventually-periodic graph containing the core and
 *  blocks 0..blocks-1 of every ray. Edges leaving the window are dropped.
 *  Vertex names are "<ray>:<block>:<period vertex>". */
KGraph truncate(const EPGraph& g, long blocks);

/** I - M^t of a finite rank-1 graph, rows and columns reordered to
 *  (f, g, h). Equivariance makes the h-blocks repeat the g-blocks; the
 *  sanity report lists any violated identity. */
struct BlockDecomposition {
    IMat B;
    size_t nf = 0, ng = 0, nh = 0;
    IMat block(int bi, int bj) const;  // 1-based part indices
    ValidationReport check() const;
};

BlockDecomposition block_decomposition(const KGraph& g, const Involution& inv);

}  // namespace kgraph
