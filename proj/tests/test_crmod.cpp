#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "kgraph/crmod.hpp"
#include "kgraph/graphs.hpp"

using namespace kgraph;

static std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

static GradedCRModule load_module(const std::string& name) {
    return module_from_json(slurp(std::string(KGRAPH_CORPUS_DIR) + "/modules/" + name));
}

TEST_CASE("standard tables match the corpus module files") {
    CHECK(load_module("R.json") == standard_R());
    CHECK(load_module("C.json") == standard_C());
    CHECK(load_module("E3.json") == standard_E(3));
    CHECK(load_module("E5.json") == standard_E(5));
    CHECK(load_module("E7.json") == standard_E(7));
    CHECK(load_module("E9.json") == standard_E(9));
    CHECK_THROWS_AS(standard_E(4), GraphError);
    CHECK_THROWS_AS(standard_E(1), GraphError);
}

TEST_CASE("suspension shifts degrees") {
    GradedCRModule r1 = suspend(standard_R(), 1);
    std::array<AbGroup, 8> expect = {AbGroup::cyclic(2), AbGroup::cyclic(2), AbGroup::zero(),
                                     AbGroup::free_group(1), AbGroup::zero(), AbGroup::zero(),
                                     AbGroup::zero(), AbGroup::free_group(1)};
    CHECK(r1.ko == expect);
    CHECK(r1.ku[0].is_zero());
    CHECK(r1.ku[1] == AbGroup::free_group(1));

    CHECK(suspend(standard_E(5), 8) == standard_E(5));
    CHECK(suspend(suspend(standard_E(7), 3), 5) == standard_E(7));
    CHECK(suspend(standard_R(), -1) == suspend(standard_R(), 7));
    CHECK(suspend(standard_C(), 2) == standard_C());
}

TEST_CASE("tensor chains of free factors compose as suspensions") {
    for (long n : {3, 5, 7, 9}) {
        GradedCRModule m = standard_E(n);
        CHECK(tensor_free({1, 1}, suspend(m, 6)) == m);
    }
    CHECK(tensor_free({}, standard_R()) == standard_R());
    CHECK(tensor_free({3, 2, 3}, standard_R()) == standard_R());
    CHECK(tensor_free({-1, 2}, standard_C()) == suspend(standard_C(), 1));
}

TEST_CASE("catalog identification") {
    CHECK(identify(standard_R()) == std::optional<std::string>("K(R)"));
    CHECK(identify(suspend(standard_R(), 1)) == std::optional<std::string>("Sigma^1 K(R)"));
    CHECK(identify(standard_C()) == std::optional<std::string>("K(C)"));
    CHECK(identify(suspend(standard_C(), 3)) == std::optional<std::string>("Sigma^1 K(C)"));
    CHECK(identify(standard_E(5)) == std::optional<std::string>("K(E(5))"));
    CHECK(identify(suspend(standard_E(7), 3)) == std::optional<std::string>("Sigma^3 K(E(7))"));

    GradedCRModule junk;
    for (auto& g : junk.ko) g = AbGroup::free_group(5);
    CHECK_FALSE(identify(junk).has_value());

    // n beyond the catalog bound is not found
    CHECK_FALSE(identify(standard_E(17), 15).has_value());
    CHECK(identify(standard_E(17), 17).has_value());
}

TEST_CASE("rank-1 obstruction: torsion in KO_7 or KO_5") {
    for (int i = 0; i < 8; ++i) {
        CAPTURE(i);
        bool expect = i == 2 || i == 3 || i == 4 || i == 5;
        Rank1Obstruction o = rank1_obstruction(suspend(standard_R(), i));
        CHECK(o.obstructed == expect);
        if (o.obstructed) CHECK((o.witness == 7 || o.witness == 5));
    }
    for (long n : {3, 5, 7, 9}) {
        Rank1Obstruction o = rank1_obstruction(standard_E(n));
        CHECK(o.obstructed);
        CHECK(o.witness == 7);
    }
    CHECK_FALSE(rank1_obstruction(standard_C()).obstructed);
}

TEST_CASE("rank-2 obstruction") {
    for (long n : {3, 5, 7, 9}) {
        CAPTURE(n);
        Rank2Obstruction o = rank2_obstruction(standard_E(n));
        CHECK(o.status == R2Status::Obstructed);
        bool surj = false, bij = false;
        for (auto& line : o.trace) {
            if (line.find("KU_7 = 0") != std::string::npos &&
                line.find("surjective") != std::string::npos)
                surj = true;
            if (line.find("bijective") != std::string::npos) bij = true;
        }
        CHECK(surj);
        CHECK(bij);
    }
    CHECK(rank2_obstruction(standard_R()).status == R2Status::Inapplicable);
    CHECK(rank2_obstruction(suspend(standard_E(5), 1)).status == R2Status::Unobstructed);
    GradedCRModule zero;
    CHECK(rank2_obstruction(zero).status == R2Status::Unobstructed);
}

TEST_CASE("module JSON round trip and strict parsing") {
    for (const GradedCRModule& m :
         {standard_R(), standard_C(), standard_E(3), standard_E(9), suspend(standard_E(5), 3)})
        CHECK(module_from_json(module_to_json(m)) == m);

    CHECK_THROWS_AS(module_from_json("{\"ko\":[]}"), GraphError);
    CHECK_THROWS_AS(module_from_json("not json"), GraphError);
    std::string good = module_to_json(standard_R());
    // a 7-entry ko array
    GradedCRModule r = standard_R();
    nlohmann::json j = nlohmann::json::parse(module_to_json(r));
    j["ko"].erase(7);
    CHECK_THROWS_AS(module_from_json(j.dump()), GraphError);
    j = nlohmann::json::parse(good);
    j["extra"] = 1;
    CHECK_THROWS_AS(module_from_json(j.dump()), GraphError);
    j = nlohmann::json::parse(good);
    j["ko"][0]["torsion"] = {0};
    CHECK_THROWS_AS(module_from_json(j.dump()), GraphError);
    j = nlohmann::json::parse(good);
    j["ko"][0]["rank"] = -1;
    CHECK_THROWS_AS(module_from_json(j.dump()), GraphError);
}

TEST_CASE("module renderer") {
    std::string s = render_module(standard_E(5));
    CHECK(s.find("KO_*") != std::string::npos);
    CHECK(s.find("KU_*") != std::string::npos);
    CHECK(s.find("Z_8") != std::string::npos);
    CHECK(s.find("Z_4") != std::string::npos);
}
