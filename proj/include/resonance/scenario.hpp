#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resonance/dynamics.hpp"
#include "resonance/errors.hpp"
#include "resonance/model.hpp"
#include "resonance/spectra.hpp"

namespace resonance {

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    int count = 0;
};

struct TimeGridSpec {
    double max = 0.0;
    int count = 0;
};

struct FixedPointSpec {
    double e0 = 0.0;
    int state = 0;
};

struct EPSearchSpec {
    EPParameter param_a;
    EPParameter param_b;
    int grid = 41;
};

struct OracleSpec {
    int bins = 2000;
    int state = 0;
    std::optional<std::pair<double, double>> window;
    std::optional<std::pair<double, double>> fit;
};

// A fully validated run configuration: the open system plus probe energy,
// excitation, and the optional per-command blocks. Loading rejects unknown
// fields at every nesting level so that typos fail loudly instead of silently
// reverting to defaults.
struct Scenario {
    OpenSystem sys;
    double probe_energy = 0.0;
    Excitation excitation = Scattering{0};
    std::optional<GridSpec> energy_grid;
    std::optional<TimeGridSpec> time_grid;
    std::optional<GridSpec> alpha_grid;
    FixedPointSpec fixed_point;
    std::optional<EPSearchSpec> ep_search;
    OracleSpec oracle;
};

inline std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 2)
        throw InvalidArgument("grid count must be at least 2");
    if (!(lo < hi))
        throw InvalidArgument("grid requires min < max");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    grid.back() = hi;
    return grid;
}

namespace detail {

using Json = nlohmann::json;

[[noreturn]] inline void scenario_fail(const std::string& message) {
    throw ScenarioError(message);
}

inline void check_keys(const Json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        scenario_fail(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            scenario_fail("unknown field \"" + it.key() + "\" in " + where);
    }
}

inline const Json& require_field(const Json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end())
        scenario_fail(where + " is missing required field \"" + std::string(key) + "\"");
    return *it;
}

inline double as_number(const Json& j, const std::string& where) {
    if (!j.is_number())
        scenario_fail(where + " must be a number");
    return j.get<double>();
}

inline int as_int(const Json& j, const std::string& where) {
    if (!j.is_number_integer())
        scenario_fail(where + " must be an integer");
    return j.get<int>();
}

inline std::string as_string(const Json& j, const std::string& where) {
    if (!j.is_string())
        scenario_fail(where + " must be a string");
    return j.get<std::string>();
}

inline double number_or(const Json& j, const char* key, double fallback,
                        const std::string& where) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : as_number(*it, where + "." + key);
}

inline int int_or(const Json& j, const char* key, int fallback, const std::string& where) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : as_int(*it, where + "." + key);
}

inline Eigen::VectorXd as_vector(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        scenario_fail(where + " must be a nonempty array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = as_number(j[i], where + " entry");
    return v;
}

inline Eigen::MatrixXd as_matrix(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        scenario_fail(where + " must be a nonempty array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    Eigen::MatrixXd m;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].empty())
            scenario_fail(where + " rows must be nonempty arrays");
        if (r == 0) {
            cols = j[r].size();
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (j[r].size() != cols) {
            scenario_fail(where + " rows must all have the same length");
        }
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(j[r][c], where + " entry");
    }
    return m;
}

inline ChannelModel parse_channel(const Json& j, const std::string& where) {
    check_keys(j, where, {"type", "density", "hopping", "center"});
    const std::string type = as_string(require_field(j, "type", where), where + ".type");
    if (type == "wideband") {
        check_keys(j, where, {"type", "density"});
        Wideband ch;
        ch.density = as_number(require_field(j, "density", where), where + ".density");
        if (!(ch.density > 0.0))
            scenario_fail(where + ".density must be positive");
        return ch;
    }
    if (type == "chain") {
        check_keys(j, where, {"type", "hopping", "center"});
        Chain ch;
        ch.hopping = as_number(require_field(j, "hopping", where), where + ".hopping");
        ch.center = number_or(j, "center", 0.0, where);
        if (!(ch.hopping > 0.0))
            scenario_fail(where + ".hopping must be positive");
        return ch;
    }
    scenario_fail(where + ".type must be \"wideband\" or \"chain\"");
}

inline Excitation parse_excitation(const Json& j, Eigen::Index n_levels) {
    const std::string where = "excitation";
    check_keys(j, where, {"type", "channel", "f_real", "f_imag"});
    const std::string type = as_string(require_field(j, "type", where), where + ".type");
    if (type == "scattering") {
        check_keys(j, where, {"type", "channel"});
        Scattering exc;
        exc.channel = int_or(j, "channel", 0, where);
        return exc;
    }
    if (type == "source") {
        check_keys(j, where, {"type", "f_real", "f_imag"});
        const Eigen::VectorXd re =
            as_vector(require_field(j, "f_real", where), where + ".f_real");
        Eigen::VectorXd im = Eigen::VectorXd::Zero(re.size());
        if (j.contains("f_imag"))
            im = as_vector(j["f_imag"], where + ".f_imag");
        if (re.size() != n_levels || im.size() != n_levels)
            scenario_fail("excitation source vector length must match levels");
        Source exc;
        exc.F = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
        return exc;
    }
    scenario_fail(where + ".type must be \"scattering\" or \"source\"");
}

inline GridSpec parse_grid(const Json& j, const std::string& where) {
    check_keys(j, where, {"min", "max", "count"});
    GridSpec grid;
    grid.min = as_number(require_field(j, "min", where), where + ".min");
    grid.max = as_number(require_field(j, "max", where), where + ".max");
    grid.count = as_int(require_field(j, "count", where), where + ".count");
    if (grid.count < 2)
        scenario_fail(where + ".count must be at least 2");
    if (!(grid.min < grid.max))
        scenario_fail(where + " requires min < max");
    return grid;
}

inline TimeGridSpec parse_time_grid(const Json& j) {
    const std::string where = "time_grid";
    check_keys(j, where, {"max", "count"});
    TimeGridSpec grid;
    grid.max = as_number(require_field(j, "max", where), where + ".max");
    grid.count = as_int(require_field(j, "count", where), where + ".count");
    if (!(grid.max > 0.0))
        scenario_fail(where + ".max must be positive");
    if (grid.count < 2)
        scenario_fail(where + ".count must be at least 2");
    return grid;
}

inline EPParameter parse_ep_parameter(const Json& j, const std::string& where,
                                      const OpenSystem& sys) {
    check_keys(j, where, {"kind", "name", "min", "max", "i", "j"});
    EPParameter p;
    const std::string kind = as_string(require_field(j, "kind", where), where + ".kind");
    if (kind == "alpha") {
        p.kind = EPParameter::Kind::Alpha;
        p.name = "alpha";
    } else if (kind == "pi_alpha_sq") {
        p.kind = EPParameter::Kind::PiAlphaSq;
        p.name = "pi_alpha_sq";
    } else if (kind == "internal_coupling") {
        p.kind = EPParameter::Kind::InternalCoupling;
        p.i = as_int(require_field(j, "i", where), where + ".i");
        p.j = as_int(require_field(j, "j", where), where + ".j");
        p.name = "u_" + std::to_string(p.i) + "_" + std::to_string(p.j);
    } else {
        scenario_fail(where + ".kind must be \"alpha\", \"pi_alpha_sq\", or "
                              "\"internal_coupling\"");
    }
    if (j.contains("name"))
        p.name = as_string(j["name"], where + ".name");
    if (p.kind != EPParameter::Kind::InternalCoupling && (j.contains("i") || j.contains("j")))
        scenario_fail(where + ": i/j apply to internal_coupling parameters only");
    p.lo = as_number(require_field(j, "min", where), where + ".min");
    p.hi = as_number(require_field(j, "max", where), where + ".max");
    detail::validate_ep_parameter(sys, p);
    return p;
}

inline std::pair<double, double> parse_window(const Json& j, const std::string& where) {
    check_keys(j, where, {"min", "max"});
    const double lo = as_number(require_field(j, "min", where), where + ".min");
    const double hi = as_number(require_field(j, "max", where), where + ".max");
    if (!(lo < hi))
        scenario_fail(where + " requires min < max");
    return {lo, hi};
}

} // namespace detail

inline Scenario parse_scenario(const nlohmann::json& root) {
    using detail::as_int;
    using detail::as_number;
    using detail::as_string;
    using detail::check_keys;
    using detail::require_field;
    using detail::scenario_fail;

    check_keys(root, "scenario",
               {"units", "hbar", "levels", "internal_coupling", "channels", "coupling",
                "alpha", "probe_energy", "excitation", "energy_grid", "time_grid",
                "alpha_grid", "fixed_point", "ep_search", "oracle"});

    const std::string units =
        as_string(require_field(root, "units", "scenario"), "scenario.units");
    if (units != "natural")
        scenario_fail("units must be \"natural\" (energies in a common unit, times in "
                      "hbar/energy)");

    Scenario sc;
    sc.sys.hbar = detail::number_or(root, "hbar", 1.0, "scenario");
    if (!(sc.sys.hbar > 0.0))
        scenario_fail("hbar must be positive");

    const Eigen::VectorXd levels =
        detail::as_vector(require_field(root, "levels", "scenario"), "levels");
    Eigen::MatrixXd internal = Eigen::MatrixXd::Zero(levels.size(), levels.size());
    if (root.contains("internal_coupling"))
        internal = detail::as_matrix(root["internal_coupling"], "internal_coupling");
    sc.sys.system = build_discrete_hamiltonian(levels, internal);

    const auto& channels_json = require_field(root, "channels", "scenario");
    if (!channels_json.is_array() || channels_json.empty())
        scenario_fail("channels must be a nonempty array");
    for (std::size_t c = 0; c < channels_json.size(); ++c)
        sc.sys.channels.push_back(detail::parse_channel(
            channels_json[c], "channels[" + std::to_string(c) + "]"));

    sc.sys.coupling.W = detail::as_matrix(require_field(root, "coupling", "scenario"),
                                          "coupling");
    if (sc.sys.coupling.W.rows() != levels.size())
        scenario_fail("coupling must have one row per level");
    if (sc.sys.coupling.W.cols() != static_cast<Eigen::Index>(sc.sys.channels.size()))
        scenario_fail("coupling must have one column per channel");
    if (!sc.sys.coupling.W.allFinite())
        scenario_fail("coupling entries must be finite");
    sc.sys.coupling.alpha = detail::number_or(root, "alpha", 1.0, "scenario");
    if (!(sc.sys.coupling.alpha >= 0.0))
        scenario_fail("alpha must be nonnegative");

    sc.probe_energy = detail::number_or(root, "probe_energy", 0.0, "scenario");
    if (!std::isfinite(sc.probe_energy))
        scenario_fail("probe_energy must be finite");

    if (root.contains("excitation"))
        sc.excitation = detail::parse_excitation(root["excitation"], levels.size());
    if (const auto* exc = std::get_if<Scattering>(&sc.excitation))
        if (exc->channel < 0 || exc->channel >= sc.sys.channel_count())
            scenario_fail("excitation channel index out of range");

    if (root.contains("energy_grid"))
        sc.energy_grid = detail::parse_grid(root["energy_grid"], "energy_grid");
    if (root.contains("time_grid"))
        sc.time_grid = detail::parse_time_grid(root["time_grid"]);
    if (root.contains("alpha_grid")) {
        sc.alpha_grid = detail::parse_grid(root["alpha_grid"], "alpha_grid");
        if (sc.alpha_grid->min < 0.0)
            scenario_fail("alpha_grid.min must be nonnegative");
    }

    sc.fixed_point.e0 = sc.probe_energy;
    sc.fixed_point.state = 0;
    if (root.contains("fixed_point")) {
        const auto& j = root["fixed_point"];
        check_keys(j, "fixed_point", {"e0", "state"});
        sc.fixed_point.e0 = detail::number_or(j, "e0", sc.probe_energy, "fixed_point");
        sc.fixed_point.state = detail::int_or(j, "state", 0, "fixed_point");
        if (sc.fixed_point.state < 0 || sc.fixed_point.state >= sc.sys.levels())
            scenario_fail("fixed_point.state index out of range");
    }

    if (root.contains("ep_search")) {
        const auto& j = root["ep_search"];
        check_keys(j, "ep_search", {"param_a", "param_b", "grid"});
        EPSearchSpec spec;
        spec.param_a = detail::parse_ep_parameter(require_field(j, "param_a", "ep_search"),
                                                  "ep_search.param_a", sc.sys);
        spec.param_b = detail::parse_ep_parameter(require_field(j, "param_b", "ep_search"),
                                                  "ep_search.param_b", sc.sys);
        spec.grid = detail::int_or(j, "grid", 41, "ep_search");
        if (spec.grid < 2)
            scenario_fail("ep_search.grid must be at least 2");
        if (spec.param_a.name == spec.param_b.name)
            scenario_fail("ep_search parameters must have distinct names");
        sc.ep_search = spec;
    }

    if (root.contains("oracle")) {
        const auto& j = root["oracle"];
        check_keys(j, "oracle", {"bins", "state", "window", "fit"});
        sc.oracle.bins = detail::int_or(j, "bins", 2000, "oracle");
        if (sc.oracle.bins < 100)
            scenario_fail("oracle.bins must be at least 100");
        sc.oracle.state = detail::int_or(j, "state", 0, "oracle");
        if (sc.oracle.state < 0 || sc.oracle.state >= sc.sys.levels())
            scenario_fail("oracle.state index out of range");
        if (j.contains("window"))
            sc.oracle.window = detail::parse_window(j["window"], "oracle.window");
        if (j.contains("fit"))
            sc.oracle.fit = detail::parse_window(j["fit"], "oracle.fit");
    }

    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open scenario file: " + path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError("scenario file is not valid JSON: " + std::string(e.what()));
    }
    return parse_scenario(root);
}

} // namespace resonance
