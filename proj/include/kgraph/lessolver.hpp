#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kgraph/crmod.hpp"
#include "kgraph/intlin.hpp"

namespace kgraph {

/** The long exact sequence machinery works on the 24-arrow cycle
 *    KO_j --eta_j--> KO_j+1 --c_j+1--> KU_j+1 --partial_j+1--> KO_j-1
 *  together with the relations 2 eta = 0, eta^3 = 0 and
 *  partial_{j+2} . c_j = multiplication by 2 (KU is kept 2-periodic, so the
 *  composite is defined). The multiplicative shift psi is not modeled. */

struct DeduceResult {
    bool consistent = true;
    std::vector<std::string> trace;
};

/** Sound consequences of exactness on a possibly partial KO table with both
 *  KU groups known. Rules fire only off known entries, so extending a
 *  partial table can only add contradictions, never remove them. */
DeduceResult deduce(const std::array<std::optional<AbGroup>, 8>& ko,
                    const std::array<AbGroup, 2>& ku, bool want_trace = true);

enum class VerifyStatus { Consistent, Inconsistent, Unknown };

struct VerifyResult {
    VerifyStatus status = VerifyStatus::Unknown;
    std::vector<std::string> certificate;  // failed invariants or checks
    std::vector<std::pair<std::string, IMat>> witness;  // arrow name -> matrix
    std::vector<std::string> trace;
};

/** Search for explicit structure maps realizing the table. Torsion
 *  components are enumerated exactly; free-to-free matrix entries only up
 *  to |entry| <= les_bound, so a failed search that leaned on such an arrow
 *  reports Unknown instead of Inconsistent (tracked by conflict sets). */
VerifyResult verify_module(const GradedCRModule& m, long les_bound = 8);

struct PartialKO {
    std::array<std::optional<AbGroup>, 8> fixed;
    std::array<std::vector<AbGroup>, 8> choices;  // nonempty: exhaustive list
    std::function<bool(int, const AbGroup&)> filter;  // extra per-degree test
};

struct SolveOptions {
    long les_bound = 8;
    long torsion_cap = 16;  // bound on |torsion part| of enumerated candidates
};

struct SolveResult {
    std::vector<GradedCRModule> solutions;  // verified consistent
    bool bound_exhausted = false;  // some candidate was Unknown at the bound
    long candidates = 0;           // full tables that reached verification
    std::vector<std::string> notes;
};

/** Enumerate KO tables compatible with the KU groups and the partial
 *  information, prune by deduction degree by degree, and keep the tables
 *  the verifier confirms. Free ranks come from rank KU_j = rank KO_j +
 *  rank KO_j-2; torsion exponents divide twice the KU torsion exponent. */
SolveResult solve_ko(const std::array<AbGroup, 2>& ku, const PartialKO& partial,
                     const SolveOptions& opts = {});

}  // namespace kgraph
