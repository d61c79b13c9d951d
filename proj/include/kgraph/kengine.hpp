#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kgraph/graphs.hpp"
#include "kgraph/intlin.hpp"
#include "kgraph/relprop.hpp"

namespace kgraph {

/** Complex K-theory of a graph algebra via the Koszul complex of
 *  B_i = I - M_i^t. Rank 1 runs the relation-propagation engine (which
 *  also provides a derivation log and, for periodic graphs, the window
 *  machinery); ranks 2 and 3 compute Koszul homology directly. */
struct KUResult {
    AbGroup k0, k1;
    bool stabilized = true;       // periodic rank-1 inputs only
    long window_used = 0;
    bool k0_ambiguous = false;    // filtration extension not determined
    bool k1_ambiguous = false;    // (rank 3 only)
    std::vector<std::string> coker_log, ker_log;          // rank 1
    std::vector<std::string> coker_survivors, ker_survivors;
    IMat ker_basis;               // rank 1: solutions over ker survivors
    std::vector<std::string> notes;
};

KUResult complex_k(const GraphFile& g, long max_window = 16);

/** One entry of the real-row page. Rows 2, 4 and 6 mix coefficient groups
 *  the row systems here do not model; they stay unknown unless the
 *  relevant vertex classes are empty. */
struct RowEntry {
    bool known = false;
    AbGroup value;
};

struct RealRows {
    int rank = 1;
    // E[p][q]: p = 0..rank filtration column, q = 0..7 coefficient degree
    std::vector<std::array<RowEntry, 8>> E;
    bool stabilized = true;
    long window_used = 0;
    std::vector<std::string> q0_log, q1_log;   // rank 1: fold / fixed systems
    std::vector<std::string> notes;
};

/** Row systems: q = 1 is the fixed subgraph over GF(2), q = 0 the degree-0
 *  fold over Z, q in {3,5,7} vanishes with its coefficients. Rank 2 builds
 *  the two-color three-term complexes from the per-color collapsed rows. */
RealRows real_rows(const GraphFile& g, long max_window = 16);

/** Rank-1 assembly along 0 -> E_{0,j} -> KO_j -> E_{1,j-1} -> 0.
 *  A degree is Known when both row entries are known and the extension has
 *  a unique middle; when several middles exist they are listed in choices. */
struct AssembledKO {
    std::array<RowEntry, 8> ko;
    std::array<std::vector<AbGroup>, 8> choices;
    std::vector<std::string> notes;
};

AssembledKO assemble_rank1(const RealRows& rows);

/** Partial-information filter: can `cand` sit in the extension for degree j
 *  given whichever row entries are known? (E_{0,j} must embed, KO_j must
 *  surject onto E_{1,j-1}.) */
bool row_candidate_ok(const RealRows& rows, int j, const AbGroup& cand);

std::string render_rows(const RealRows& rows);

}  // namespace kgraph
