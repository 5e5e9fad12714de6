#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "resonance/resonance.hpp"

using namespace resonance;
using nlohmann::json;

namespace {

json minimal_scenario() {
    return json{
        {"units", "natural"},
        {"levels", {1.0, -1.0}},
        {"channels", {{{"type", "wideband"}, {"density", 1.0}}}},
        {"coupling", {{1.0}, {1.0}}},
    };
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << text;
    return path;
}

} // namespace

TEST_CASE("a minimal scenario parses with documented defaults") {
    const Scenario sc = parse_scenario(minimal_scenario());

    REQUIRE(sc.sys.levels() == 2);
    REQUIRE(sc.sys.channel_count() == 1);
    REQUIRE(sc.sys.hbar == 1.0);
    REQUIRE(sc.sys.coupling.alpha == 1.0);
    REQUIRE(sc.sys.system.internal_coupling.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(sc.probe_energy == 0.0);
    REQUIRE(std::holds_alternative<Scattering>(sc.excitation));
    REQUIRE(std::get<Scattering>(sc.excitation).channel == 0);
    REQUIRE_FALSE(sc.energy_grid.has_value());
    REQUIRE_FALSE(sc.time_grid.has_value());
    REQUIRE_FALSE(sc.alpha_grid.has_value());
    REQUIRE_FALSE(sc.ep_search.has_value());
    REQUIRE(sc.fixed_point.e0 == 0.0);
    REQUIRE(sc.fixed_point.state == 0);
    REQUIRE(sc.oracle.bins == 2000);
    REQUIRE(sc.oracle.state == 0);
}

TEST_CASE("a fully specified scenario lands in the right fields") {
    json j = minimal_scenario();
    j["hbar"] = 2.0;
    j["alpha"] = 0.5;
    j["probe_energy"] = 0.25;
    j["internal_coupling"] = {{0.0, 0.1}, {0.1, 0.0}};
    j["channels"] = {{{"type", "wideband"}, {"density", 0.8}},
                     {{"type", "chain"}, {"hopping", 1.5}, {"center", -0.3}}};
    j["coupling"] = {{1.0, 0.2}, {0.9, 0.4}};
    j["excitation"] = {{"type", "source"},
                       {"f_real", {1.0, 0.0}},
                       {"f_imag", {0.0, 0.5}}};
    j["energy_grid"] = {{"min", -2.0}, {"max", 2.0}, {"count", 5}};
    j["time_grid"] = {{"max", 10.0}, {"count", 11}};
    j["alpha_grid"] = {{"min", 0.0}, {"max", 1.0}, {"count", 3}};
    j["fixed_point"] = {{"e0", 0.9}, {"state", 1}};
    j["ep_search"] = {
        {"param_a",
         {{"kind", "internal_coupling"}, {"i", 0}, {"j", 1}, {"min", -1.0}, {"max", 1.0}}},
        {"param_b", {{"kind", "pi_alpha_sq"}, {"min", 0.0}, {"max", 2.0}}},
        {"grid", 21}};
    j["oracle"] = {{"bins", 500},
                   {"state", 1},
                   {"window", {{"min", -4.0}, {"max", 4.0}}},
                   {"fit", {{"min", 1.0}, {"max", 9.0}}}};

    const Scenario sc = parse_scenario(j);
    REQUIRE(sc.sys.hbar == 2.0);
    REQUIRE(sc.sys.coupling.alpha == 0.5);
    REQUIRE(sc.probe_energy == 0.25);
    REQUIRE(sc.sys.system.internal_coupling(0, 1) == 0.1);
    REQUIRE(sc.sys.channel_count() == 2);
    REQUIRE(std::get<Chain>(sc.sys.channels[1]).center == -0.3);

    const auto& src = std::get<Source>(sc.excitation);
    REQUIRE(src.F[1] == Complex(0.0, 0.5));

    REQUIRE(sc.energy_grid->count == 5);
    REQUIRE(sc.time_grid->max == 10.0);
    REQUIRE(sc.alpha_grid->max == 1.0);
    REQUIRE(sc.fixed_point.e0 == 0.9);
    REQUIRE(sc.fixed_point.state == 1);

    REQUIRE(sc.ep_search.has_value());
    REQUIRE(sc.ep_search->param_a.name == "u_0_1");
    REQUIRE(sc.ep_search->param_b.name == "pi_alpha_sq");
    REQUIRE(sc.ep_search->grid == 21);

    REQUIRE(sc.oracle.bins == 500);
    REQUIRE(sc.oracle.state == 1);
    REQUIRE(sc.oracle.window->second == 4.0);
    REQUIRE(sc.oracle.fit->first == 1.0);
}

TEST_CASE("unknown fields are rejected wherever they appear") {
    auto expect_unknown = [](json j, const std::string& fragment) {
        try {
            parse_scenario(j);
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring("unknown field"));
            REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring(fragment));
        }
    };

    json top = minimal_scenario();
    top["extra"] = 1;
    expect_unknown(top, "scenario");

    json channel = minimal_scenario();
    channel["channels"][0]["width"] = 2.0;
    expect_unknown(channel, "channels[0]");

    json mixed_channel = minimal_scenario();
    mixed_channel["channels"][0]["hopping"] = 2.0;
    expect_unknown(mixed_channel, "channels[0]");

    json exc = minimal_scenario();
    exc["excitation"] = {{"type", "scattering"}, {"channel", 0}, {"f_real", {1, 1}}};
    expect_unknown(exc, "excitation");

    json grid = minimal_scenario();
    grid["energy_grid"] = {{"min", 0.0}, {"max", 1.0}, {"count", 3}, {"step", 0.1}};
    expect_unknown(grid, "energy_grid");

    json fp = minimal_scenario();
    fp["fixed_point"] = {{"e0", 0.0}, {"tolerance", 1e-10}};
    expect_unknown(fp, "fixed_point");

    json ep = minimal_scenario();
    ep["ep_search"] = {
        {"param_a", {{"kind", "alpha"}, {"min", 0.0}, {"max", 1.0}, {"seed", 3}}},
        {"param_b", {{"kind", "pi_alpha_sq"}, {"min", 0.0}, {"max", 2.0}}}};
    expect_unknown(ep, "ep_search.param_a");

    json oracle = minimal_scenario();
    oracle["oracle"] = {{"bins", 200}, {"dt", 0.1}};
    expect_unknown(oracle, "oracle");

    json window = minimal_scenario();
    window["oracle"] = {{"window", {{"min", -1.0}, {"max", 1.0}, {"pad", 0.1}}}};
    expect_unknown(window, "oracle.window");
}

TEST_CASE("missing required fields are reported by name") {
    for (const char* key : {"units", "levels", "channels", "coupling"}) {
        json j = minimal_scenario();
        j.erase(key);
        try {
            parse_scenario(j);
            FAIL("expected ScenarioError");
        } catch (const ScenarioError& e) {
            REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring(key));
        }
    }

    json no_type = minimal_scenario();
    no_type["channels"][0].erase("type");
    REQUIRE_THROWS_AS(parse_scenario(no_type), ScenarioError);

    json no_density = minimal_scenario();
    no_density["channels"][0].erase("density");
    REQUIRE_THROWS_AS(parse_scenario(no_density), ScenarioError);
}

TEST_CASE("unit system and physical signs are enforced") {
    json units = minimal_scenario();
    units["units"] = "eV";
    REQUIRE_THROWS_AS(parse_scenario(units), ScenarioError);

    json hbar = minimal_scenario();
    hbar["hbar"] = 0.0;
    REQUIRE_THROWS_AS(parse_scenario(hbar), ScenarioError);

    json alpha = minimal_scenario();
    alpha["alpha"] = -0.1;
    REQUIRE_THROWS_AS(parse_scenario(alpha), ScenarioError);

    json density = minimal_scenario();
    density["channels"][0]["density"] = 0.0;
    REQUIRE_THROWS_AS(parse_scenario(density), ScenarioError);

    json kind = minimal_scenario();
    kind["channels"][0] = {{"type", "square_well"}, {"density", 1.0}};
    REQUIRE_THROWS_AS(parse_scenario(kind), ScenarioError);

    json hopping = minimal_scenario();
    hopping["channels"][0] = {{"type", "chain"}, {"hopping", -1.0}};
    REQUIRE_THROWS_AS(parse_scenario(hopping), ScenarioError);
}

TEST_CASE("coupling and internal coupling shapes are checked") {
    json rows = minimal_scenario();
    rows["coupling"] = {{1.0}};
    REQUIRE_THROWS_AS(parse_scenario(rows), ScenarioError);

    json cols = minimal_scenario();
    cols["coupling"] = {{1.0, 2.0}, {1.0, 2.0}};
    REQUIRE_THROWS_AS(parse_scenario(cols), ScenarioError);

    json ragged = minimal_scenario();
    ragged["coupling"] = json::array({json::array({1.0, 2.0}), json::array({1.0})});
    REQUIRE_THROWS_AS(parse_scenario(ragged), ScenarioError);

    json nan = minimal_scenario();
    nan["coupling"] = {{std::nan("")}, {1.0}};
    REQUIRE_THROWS_AS(parse_scenario(nan), ScenarioError);

    json skew = minimal_scenario();
    skew["internal_coupling"] = {{0.0, 0.3}, {-0.3, 0.0}};
    REQUIRE_THROWS_AS(parse_scenario(skew), AsymmetryError);
}

TEST_CASE("excitation blocks are validated against the system") {
    json channel = minimal_scenario();
    channel["excitation"] = {{"type", "scattering"}, {"channel", 1}};
    REQUIRE_THROWS_AS(parse_scenario(channel), ScenarioError);

    json negative = minimal_scenario();
    negative["excitation"] = {{"type", "scattering"}, {"channel", -1}};
    REQUIRE_THROWS_AS(parse_scenario(negative), ScenarioError);

    json source = minimal_scenario();
    source["excitation"] = {{"type", "source"}, {"f_real", {1.0, 0.0, 0.0}}};
    REQUIRE_THROWS_AS(parse_scenario(source), ScenarioError);

    json imag = minimal_scenario();
    imag["excitation"] = {{"type", "source"},
                          {"f_real", {1.0, 0.0}},
                          {"f_imag", {0.0, 0.0, 1.0}}};
    REQUIRE_THROWS_AS(parse_scenario(imag), ScenarioError);

    json kind = minimal_scenario();
    kind["excitation"] = {{"type", "laser"}};
    REQUIRE_THROWS_AS(parse_scenario(kind), ScenarioError);
}

TEST_CASE("grid blocks are validated") {
    json count = minimal_scenario();
    count["energy_grid"] = {{"min", 0.0}, {"max", 1.0}, {"count", 1}};
    REQUIRE_THROWS_AS(parse_scenario(count), ScenarioError);

    json order = minimal_scenario();
    order["energy_grid"] = {{"min", 1.0}, {"max", 1.0}, {"count", 5}};
    REQUIRE_THROWS_AS(parse_scenario(order), ScenarioError);

    json alpha = minimal_scenario();
    alpha["alpha_grid"] = {{"min", -0.5}, {"max", 1.0}, {"count", 5}};
    REQUIRE_THROWS_AS(parse_scenario(alpha), ScenarioError);

    json tmax = minimal_scenario();
    tmax["time_grid"] = {{"max", 0.0}, {"count", 5}};
    REQUIRE_THROWS_AS(parse_scenario(tmax), ScenarioError);

    json fp = minimal_scenario();
    fp["fixed_point"] = {{"state", 2}};
    REQUIRE_THROWS_AS(parse_scenario(fp), ScenarioError);
}

TEST_CASE("exceptional point search blocks are validated") {
    auto base = []() {
        json j = minimal_scenario();
        j["ep_search"] = {
            {"param_a",
             {{"kind", "internal_coupling"}, {"i", 0}, {"j", 1}, {"min", -1.0}, {"max", 1.0}}},
            {"param_b", {{"kind", "pi_alpha_sq"}, {"min", 0.0}, {"max", 2.0}}}};
        return j;
    };

    REQUIRE_NOTHROW(parse_scenario(base()));

    json same = base();
    same["ep_search"]["param_b"] =
        {{"kind", "pi_alpha_sq"}, {"name", "u_0_1"}, {"min", 0.0}, {"max", 2.0}};
    REQUIRE_THROWS_AS(parse_scenario(same), ScenarioError);

    json stray = base();
    stray["ep_search"]["param_b"] =
        {{"kind", "alpha"}, {"i", 0}, {"min", 0.0}, {"max", 1.0}};
    REQUIRE_THROWS_AS(parse_scenario(stray), ScenarioError);

    json missing = base();
    missing["ep_search"]["param_a"] =
        {{"kind", "internal_coupling"}, {"min", -1.0}, {"max", 1.0}};
    REQUIRE_THROWS_AS(parse_scenario(missing), ScenarioError);

    json diagonal = base();
    diagonal["ep_search"]["param_a"] =
        {{"kind", "internal_coupling"}, {"i", 1}, {"j", 1}, {"min", -1.0}, {"max", 1.0}};
    REQUIRE_THROWS_AS(parse_scenario(diagonal), InvalidArgument);

    json reversed = base();
    reversed["ep_search"]["param_b"] = {{"kind", "pi_alpha_sq"}, {"min", 2.0}, {"max", 0.0}};
    REQUIRE_THROWS_AS(parse_scenario(reversed), InvalidArgument);

    json negative = base();
    negative["ep_search"]["param_b"] = {{"kind", "alpha"}, {"min", -1.0}, {"max", 1.0}};
    REQUIRE_THROWS_AS(parse_scenario(negative), InvalidArgument);

    json coarse = base();
    coarse["ep_search"]["grid"] = 1;
    REQUIRE_THROWS_AS(parse_scenario(coarse), ScenarioError);
}

TEST_CASE("oracle blocks are validated") {
    json bins = minimal_scenario();
    bins["oracle"] = {{"bins", 99}};
    REQUIRE_THROWS_AS(parse_scenario(bins), ScenarioError);

    json state = minimal_scenario();
    state["oracle"] = {{"state", 2}};
    REQUIRE_THROWS_AS(parse_scenario(state), ScenarioError);

    json window = minimal_scenario();
    window["oracle"] = {{"window", {{"min", 3.0}, {"max", -3.0}}}};
    REQUIRE_THROWS_AS(parse_scenario(window), ScenarioError);

    json fit = minimal_scenario();
    fit["oracle"] = {{"fit", {{"min", 5.0}, {"max", 5.0}}}};
    REQUIRE_THROWS_AS(parse_scenario(fit), ScenarioError);
}

TEST_CASE("scenario files load from disk with clear failure modes") {
    const auto good = write_temp("scenario_ok.json", minimal_scenario().dump());
    const Scenario sc = load_scenario(good.string());
    REQUIRE(sc.sys.levels() == 2);
    std::filesystem::remove(good);

    REQUIRE_THROWS_AS(load_scenario("/nonexistent/path/scenario.json"), ScenarioError);

    const auto bad = write_temp("scenario_bad.json", "{ not json");
    REQUIRE_THROWS_AS(load_scenario(bad.string()), ScenarioError);
    std::filesystem::remove(bad);
}

TEST_CASE("linspace hits both endpoints exactly") {
    const auto grid = linspace(-1.3, 2.7, 9);
    REQUIRE(grid.front() == -1.3);
    REQUIRE(grid.back() == 2.7);
    REQUIRE(grid.size() == 9);
    for (std::size_t i = 1; i < grid.size(); ++i)
        REQUIRE(grid[i] > grid[i - 1]);

    REQUIRE_THROWS_AS(linspace(0.0, 1.0, 1), InvalidArgument);
    REQUIRE_THROWS_AS(linspace(1.0, 0.0, 5), InvalidArgument);
}
