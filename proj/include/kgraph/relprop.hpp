#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgraph/graphs.hpp"
#include "kgraph/intlin.hpp"

namespace kgraph {

enum class Ring { Z, GF2 };
enum class Mode { Coker, Ker };

/** Sparse presentation of a cokernel or kernel problem attached to the
 *  vertices of a rank-1 graph. In Coker mode the relation at u says
 *  [u] = sum of [w] over incoming edges w -> u; in Ker mode the relation at
 *  v says a(v) = sum of a(w) over outgoing edges v -> w. Rows are kept in
 *  original form; reductions consult the marking state. */
struct Subst {
    size_t target = 0;  // g = coeff * target
    Int coeff;
    size_t rel = 0;     // index of the relation that produced the substitution
};

struct RelationSystem {
    Ring ring = Ring::Z;
    Mode mode = Mode::Coker;

    std::vector<VAddr> gens;              // sorted: core, then rays by block
    std::vector<std::string> names;       // printable address per generator
    std::vector<std::vector<std::pair<size_t, Int>>> rels;
    std::vector<size_t> rel_home;         // generator whose relation each row is

    std::vector<char> dead;               // marked zero (coker) / null (ker)
    std::vector<std::optional<Subst>> expr;
    std::map<size_t, Int> torsion_gcd;    // coker only: accumulated n with n[g]=0
    std::vector<std::string> log;

    size_t find(const VAddr& a) const;
};

RelationSystem finite_system(const KGraph& g, Mode mode, Ring ring);

/** Window of an eventually-periodic graph: generators at the core and
 *  blocks 0..blocks-1, relations at the core and blocks 0..blocks-2 (the
 *  relations of the last block would reference edges outside the window). */
RelationSystem window_system(const EPGraph& g, long blocks, Mode mode, Ring ring);

/** Run the marking rules to a fixpoint.
 *    - empty reduced relation: discard
 *    - single unit term: the generator is zero / null
 *    - single term n*g, |n| >= 2: Ker marks g null (integral solutions);
 *      Coker records the torsion relation and keeps g
 *    - two terms with a unit coefficient: substitution, only when
 *      allow_subst (finite graphs; disabled inside periodic windows)
 *  Every marking is logged as "MARK <addr> ZERO|NULL|TORSION(n) BY <addr>"
 *  where the right side names the vertex whose relation justified it. */
void saturate(RelationSystem& s, bool allow_subst);

struct PropResult {
    AbGroup group;
    std::vector<VAddr> survivors;   // unmarked generators, address order
    std::vector<std::string> survivor_names;
    IMat residual;                  // reduced relation rows over survivors
    IMat ker_basis;                 // Ker/Z only: solution basis over survivors
    std::vector<std::string> log;
};

/** Residual group of a saturated system: SNF of the surviving relation rows
 *  (Coker) or the integer solution space (Ker). */
PropResult finish(const RelationSystem& s);

PropResult finite_coker_ker(const KGraph& g, Mode mode, Ring ring);

struct EPResult {
    bool stabilized = false;
    long window_used = 0;
    std::vector<long> cut;          // per ray: first certified-zero block p
    PropResult res;
};

/** Saturate growing windows (4, 6, ... up to max_window blocks) and, per
 *  ray, certify the tail by an induction step: assuming two consecutive
 *  blocks vanish at an abstract position a >= 1, the marking rules with a
 *  runway of R further blocks must force block a+2 to vanish. On success
 *  every block >= p is zero and the residual system is finite; otherwise
 *  the outcome reports stabilized = false. */
EPResult ep_coker_ker(const EPGraph& g, Mode mode, Ring ring, long max_window = 16);

}  // namespace kgraph
