#include "kgraph/crmod.hpp"

#include <json.hpp>

#include <sstream>
#include <stdexcept>

#include "kgraph/graphs.hpp"

namespace kgraph {

using nlohmann::json;

GradedCRModule standard_R() {
    GradedCRModule m;
    m.ko = {AbGroup::free_group(1), AbGroup::cyclic(2), AbGroup::cyclic(2), AbGroup::zero(),
            AbGroup::free_group(1), AbGroup::zero(),    AbGroup::zero(),    AbGroup::zero()};
    m.ku = {AbGroup::free_group(1), AbGroup::zero()};
    return m;
}

GradedCRModule standard_C() {
    GradedCRModule m;
    for (int j = 0; j < 8; ++j)
        m.ko[j] = (j % 2 == 0) ? AbGroup::free_group(1) : AbGroup::zero();
    m.ku = {AbGroup::free_group(2), AbGroup::zero()};
    return m;
}

GradedCRModule standard_E(long n) {
    if (n < 3 || n % 2 == 0) throw GraphError("E(n) needs odd n >= 3");
    GradedCRModule m;
    m.ko = {AbGroup::cyclic(2 * (n - 1)), AbGroup::cyclic(2), AbGroup::cyclic(2),
            AbGroup::zero(),              AbGroup::cyclic((n - 1) / 2), AbGroup::zero(),
            AbGroup::cyclic(2),           AbGroup::cyclic(2)};
    m.ku = {AbGroup::cyclic(n - 1), AbGroup::zero()};
    return m;
}

GradedCRModule suspend(const GradedCRModule& m, long i) {
    long s = ((i % 8) + 8) % 8;
    GradedCRModule out;
    for (int j = 0; j < 8; ++j) out.ko[j] = m.ko[(j + s) % 8];
    for (int j = 0; j < 2; ++j) out.ku[j] = m.ku[(j + s) % 2];
    return out;
}

GradedCRModule tensor_free(const std::vector<long>& shifts, const GradedCRModule& m) {
    long total = 0;
    for (long s : shifts) total += s;
    return suspend(m, total);
}

std::vector<std::pair<std::string, GradedCRModule>> catalog(long max_n) {
    std::vector<std::pair<std::string, GradedCRModule>> out;
    auto add = [&](const std::string& base, const GradedCRModule& m, int periods) {
        for (int i = 0; i < periods; ++i) {
            std::string name = i == 0 ? base : "Sigma^" + std::to_string(i) + " " + base;
            out.emplace_back(name, suspend(m, i));
        }
    };
    add("K(R)", standard_R(), 8);
    add("K(C)", standard_C(), 2);
    for (long n = 3; n <= max_n; n += 2) add("K(E(" + std::to_string(n) + "))", standard_E(n), 8);
    return out;
}

std::optional<std::string> identify(const GradedCRModule& m, long max_n) {
    for (auto& [name, entry] : catalog(max_n))
        if (entry == m) return name;
    return std::nullopt;
}

Rank1Obstruction rank1_obstruction(const GradedCRModule& m) {
    Rank1Obstruction out;
    for (int j : {7, 5}) {
        if (!m.ko[j].torsion.empty()) {
            out.obstructed = true;
            out.witness = j;
            out.reason = "KO_" + std::to_string(j) + " = " + m.ko[j].str() +
                         " has torsion, which no rank-1 presentation produces";
            return out;
        }
    }
    out.reason = "KO_7 and KO_5 are torsion-free";
    return out;
}

Rank2Obstruction rank2_obstruction(const GradedCRModule& m) {
    Rank2Obstruction out;
    for (const AbGroup& g : m.ko)
        if (!g.is_finite()) {
            out.status = R2Status::Inapplicable;
            out.trace.push_back("criterion needs all KO groups finite; KO has a free part");
            return out;
        }
    if (!m.ku[1].is_zero()) {
        out.status = R2Status::Unobstructed;
        out.trace.push_back("KU_7 = " + m.ku[1].str() + " is nonzero; criterion does not apply");
        return out;
    }
    out.trace.push_back("RULE R1 AT i=6: KU_7 = 0 forces eta_6 surjective onto KO_7");
    Int o6 = m.ko[6].order(), o7 = m.ko[7].order();
    out.trace.push_back("RULE R5 AT i=6: |KO_6| = " + o6.get_str() + ", |KO_7| = " + o7.get_str() +
                        ", so |ker eta_6| = " + Int(o6 / o7).get_str());
    if (o6 == o7)
        out.trace.push_back("RULE R5 AT i=6: equal orders force eta_6 injective, hence bijective");
    if (m.ko[7].is_zero()) {
        out.status = R2Status::Unobstructed;
        out.trace.push_back("KO_7 = 0; nothing obstructs a rank-2 presentation");
        return out;
    }
    out.status = R2Status::Obstructed;
    out.trace.push_back("KO_7 = " + m.ko[7].str() +
                        " is nonzero and exhausted by eta multiples; a rank-2 presentation "
                        "leaves no room for it");
    return out;
}

namespace {

AbGroup group_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw GraphError(where + " must be an object");
    for (auto& [k, v] : j.items()) {
        (void)v;
        if (k != "rank" && k != "torsion") throw GraphError("unknown field '" + k + "' in " + where);
    }
    if (!j.contains("rank") || !j["rank"].is_number_integer())
        throw GraphError(where + " needs an integer rank");
    long rank = j["rank"].get<long>();
    if (rank < 0) throw GraphError(where + " rank must be nonnegative");
    std::vector<Int> orders;
    if (j.contains("torsion")) {
        if (!j["torsion"].is_array()) throw GraphError(where + " torsion must be an array");
        for (const auto& t : j["torsion"]) {
            if (!t.is_number_integer() || t.get<long>() < 2)
                throw GraphError(where + " torsion entries must be integers >= 2");
            orders.push_back(t.get<long>());
        }
    }
    AbGroup g = AbGroup::from_cyclic_factors(orders);
    g.free_rank = rank;
    return g;
}

json group_to_json(const AbGroup& g) {
    json j;
    j["rank"] = g.free_rank;
    json t = json::array();
    for (const Int& d : g.torsion) t.push_back(d.get_si());
    j["torsion"] = t;
    return j;
}

}  // namespace

GradedCRModule module_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw GraphError(std::string("bad JSON: ") + e.what());
    }
    if (!j.is_object()) throw GraphError("module file must be an object");
    for (auto& [k, v] : j.items()) {
        (void)v;
        if (k != "ko" && k != "ku") throw GraphError("unknown field '" + k + "' in module");
    }
    if (!j.contains("ko") || !j["ko"].is_array() || j["ko"].size() != 8)
        throw GraphError("module needs a ko array with 8 entries");
    if (!j.contains("ku") || !j["ku"].is_array() || j["ku"].size() != 2)
        throw GraphError("module needs a ku array with 2 entries");
    GradedCRModule m;
    for (int i = 0; i < 8; ++i) m.ko[i] = group_from_json(j["ko"][i], "ko[" + std::to_string(i) + "]");
    for (int i = 0; i < 2; ++i) m.ku[i] = group_from_json(j["ku"][i], "ku[" + std::to_string(i) + "]");
    return m;
}

std::string module_to_json(const GradedCRModule& m) {
    json j;
    j["ko"] = json::array();
    for (const AbGroup& g : m.ko) j["ko"].push_back(group_to_json(g));
    j["ku"] = json::array();
    for (const AbGroup& g : m.ku) j["ku"].push_back(group_to_json(g));
    return j.dump(2) + "\n";
}

std::string render_module(const GradedCRModule& m) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> head{"*"};
    for (int j = 0; j < 8; ++j) head.push_back(std::to_string(j));
    cells.push_back(head);
    std::vector<std::string> ko{"KO_*"}, ku{"KU_*"};
    for (int j = 0; j < 8; ++j) {
        ko.push_back(m.ko[j].str());
        ku.push_back(m.ku[j % 2].str());
    }
    cells.push_back(ko);
    cells.push_back(ku);
    std::vector<size_t> width(head.size(), 0);
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
