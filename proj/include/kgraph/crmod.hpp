#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kgraph/intlin.hpp"

namespace kgraph {

/** United K-theory table of a real C*-algebra: the eight KO groups and the
 *  two KU groups (KU is 2-periodic). Only the groups are stored; the
 *  structure maps are consulted through the long exact sequence machinery. */
struct GradedCRModule {
    std::array<AbGroup, 8> ko;
    std::array<AbGroup, 2> ku;

    bool operator==(const GradedCRModule&) const = default;
};

GradedCRModule standard_R();
GradedCRModule standard_C();
/** The table for the family E(n), n odd >= 3:
 *  KO = (Z_2(n-1), Z_2, Z_2, 0, Z_(n-1)/2, 0, Z_2, Z_2), KU = (Z_n-1, 0). */
GradedCRModule standard_E(long n);

/** Degree shift: suspend(m, i) has group j equal to m's group (j + i) mod 8.
 *  Any integer i is accepted. */
GradedCRModule suspend(const GradedCRModule& m, long i);

/** Tensor chain of invertible rank-one free factors against m: each shift s
 *  contributes a degree-s suspension, so the result is the suspension of m
 *  by the sum of the shifts. */
GradedCRModule tensor_free(const std::vector<long>& shifts, const GradedCRModule& m);

/** Match against the catalog of suspensions of K(R), K(C) and K(E(n)) for
 *  odd n up to max_n. Names look like "K(R)", "Sigma^3 K(R)", "K(E(5))". */
std::optional<std::string> identify(const GradedCRModule& m, long max_n = 15);

std::vector<std::pair<std::string, GradedCRModule>> catalog(long max_n = 15);

struct Rank1Obstruction {
    bool obstructed = false;
    int witness = -1;  // degree with offending torsion (7 or 5)
    std::string reason;
};

/** A module with torsion in KO_7 or KO_5 cannot come from a rank-1 graph. */
Rank1Obstruction rank1_obstruction(const GradedCRModule& m);

enum class R2Status { Inapplicable, Obstructed, Unobstructed };

struct Rank2Obstruction {
    R2Status status = R2Status::Unobstructed;
    std::vector<std::string> trace;
};

/** Rank-2 test for modules with all KO groups finite: vanishing odd KU
 *  together with nonzero KO_7 is impossible, because exactness forces
 *  eta_6 onto KO_7 (and, when the orders agree, makes it bijective). */
Rank2Obstruction rank2_obstruction(const GradedCRModule& m);

GradedCRModule module_from_json(const std::string& text);
std::string module_to_json(const GradedCRModule& m);

/** Degree-indexed two-row text table (KU repeated with period 2). */
std::string render_module(const GradedCRModule& m);

}  // namespace kgraph
