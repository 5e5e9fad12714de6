#pragma once

#include <cmath>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "resonance/dynamics.hpp"
#include "resonance/errors.hpp"
#include "resonance/model.hpp"
#include "resonance/oracle.hpp"
#include "resonance/output.hpp"
#include "resonance/scattering.hpp"
#include "resonance/scenario.hpp"
#include "resonance/spectra.hpp"

namespace resonance {

// One CLI invocation: a command, the scenario file, the output format and
// destination, plus optional grid overrides that take precedence over the
// scenario's own grid blocks.
struct RunOptions {
    std::string command;
    std::string scenario_path;
    std::string format = "csv";
    std::string out;
    std::optional<double> e_min;
    std::optional<double> e_max;
    std::optional<int> e_count;
    std::optional<double> t_max;
    std::optional<int> t_count;
    std::optional<double> a_min;
    std::optional<double> a_max;
    std::optional<int> a_count;
    std::optional<int> bins;
};

namespace detail {

using OrderedJson = nlohmann::ordered_json;

inline std::vector<double> resolve_energy_grid(const Scenario& sc, const RunOptions& opt) {
    std::optional<double> lo, hi;
    std::optional<int> count;
    if (sc.energy_grid) {
        lo = sc.energy_grid->min;
        hi = sc.energy_grid->max;
        count = sc.energy_grid->count;
    }
    if (opt.e_min)
        lo = opt.e_min;
    if (opt.e_max)
        hi = opt.e_max;
    if (opt.e_count)
        count = opt.e_count;
    if (!lo || !hi || !count)
        throw ScenarioError("energy grid required: set energy_grid in the scenario or pass "
                            "--e-min/--e-max/--e-count");
    return linspace(*lo, *hi, *count);
}

inline std::vector<double> resolve_time_grid(const Scenario& sc, const RunOptions& opt) {
    std::optional<double> t_max;
    std::optional<int> count;
    if (sc.time_grid) {
        t_max = sc.time_grid->max;
        count = sc.time_grid->count;
    }
    if (opt.t_max)
        t_max = opt.t_max;
    if (opt.t_count)
        count = opt.t_count;
    if (!t_max || !count)
        throw ScenarioError("time grid required: set time_grid in the scenario or pass "
                            "--t-max/--t-count");
    if (!(*t_max > 0.0))
        throw ScenarioError("time grid max must be positive");
    return linspace(0.0, *t_max, *count);
}

inline std::vector<double> resolve_alpha_grid(const Scenario& sc, const RunOptions& opt) {
    std::optional<double> lo, hi;
    std::optional<int> count;
    if (sc.alpha_grid) {
        lo = sc.alpha_grid->min;
        hi = sc.alpha_grid->max;
        count = sc.alpha_grid->count;
    }
    if (opt.a_min)
        lo = opt.a_min;
    if (opt.a_max)
        hi = opt.a_max;
    if (opt.a_count)
        count = opt.a_count;
    if (!lo || !hi || !count)
        throw ScenarioError("alpha grid required: set alpha_grid in the scenario or pass "
                            "--alpha-min/--alpha-max/--alpha-count");
    return linspace(*lo, *hi, *count);
}

inline std::string render(const Table& table, const OrderedJson& json,
                          const std::string& format) {
    if (format == "csv")
        return table.csv();
    if (format == "json")
        return json.dump(2) + "\n";
    throw ScenarioError("format must be \"csv\" or \"json\"");
}

inline std::string bool_cell(bool v) { return v ? "true" : "false"; }

inline std::string run_spectrum(const Scenario& sc, const RunOptions& opt) {
    const auto states = eigendecompose(sc.sys.effective_hamiltonian(sc.probe_energy));
    const PhaseRigidityReport report = phase_rigidity_report(states);

    Table table;
    table.header = {"index", "re_z", "im_z", "gamma", "a_norm", "rigidity"};
    OrderedJson json;
    json["probe_energy"] = sc.probe_energy;
    json["states"] = OrderedJson::array();
    for (std::size_t lam = 0; lam < states.size(); ++lam) {
        const auto& st = states[lam];
        table.rows.push_back({std::to_string(lam), format_double(st.z.real()),
                              format_double(st.z.imag()), format_double(st.width()),
                              format_double(st.a_norm), format_double(st.rigidity)});
        OrderedJson row;
        row["index"] = lam;
        row["re_z"] = st.z.real();
        row["im_z"] = st.z.imag();
        row["gamma"] = st.width();
        row["a_norm"] = st.a_norm;
        row["rigidity"] = st.rigidity;
        json["states"].push_back(row);
    }
    OrderedJson ov_re = OrderedJson::array(), ov_im = OrderedJson::array();
    for (Eigen::Index a = 0; a < report.overlap.rows(); ++a) {
        OrderedJson row_re = OrderedJson::array(), row_im = OrderedJson::array();
        for (Eigen::Index b = 0; b < report.overlap.cols(); ++b) {
            row_re.push_back(report.overlap(a, b).real());
            row_im.push_back(report.overlap(a, b).imag());
        }
        ov_re.push_back(row_re);
        ov_im.push_back(row_im);
    }
    json["overlap_re"] = ov_re;
    json["overlap_im"] = ov_im;
    return render(table, json, opt.format);
}

inline std::string run_fixedpoint(const Scenario& sc, const RunOptions& opt) {
    const FixedPointResult r =
        solve_fixed_point(sc.sys, sc.fixed_point.e0, sc.fixed_point.state);
    if (!r.converged) {
        if (sc.sys.total_density(r.E_star) == 0.0)
            throw NotConverged("fixed point at E = " + format_double(r.E_star) +
                               " lies outside every open band (bound state, not a "
                               "resonance)");
        throw NotConverged("fixed point did not converge within " +
                           std::to_string(r.iterations) + " iterations (best E = " +
                           format_double(r.E_star) + ")");
    }

    Table table;
    table.header = {"e_star", "gamma_star", "iterations", "converged"};
    table.rows.push_back({format_double(r.E_star), format_double(r.Gamma_star),
                          std::to_string(r.iterations), bool_cell(r.converged)});
    OrderedJson json;
    json["e_star"] = r.E_star;
    json["gamma_star"] = r.Gamma_star;
    json["iterations"] = r.iterations;
    json["converged"] = r.converged;
    return render(table, json, opt.format);
}

inline std::string run_sweep(const Scenario& sc, const RunOptions& opt) {
    const std::vector<double> grid = resolve_alpha_grid(sc, opt);
    const Trajectory traj = sweep_eigenvalues(sc.sys, sc.probe_energy, grid);
    const std::size_t n = traj.steps.front().size();

    Table table;
    table.header = {"alpha"};
    for (std::size_t lam = 0; lam < n; ++lam) {
        table.header.push_back("re_z_" + std::to_string(lam));
        table.header.push_back("im_z_" + std::to_string(lam));
        table.header.push_back("gamma_" + std::to_string(lam));
    }
    table.header.push_back("matched");

    OrderedJson json;
    json["probe_energy"] = sc.probe_energy;
    json["steps"] = OrderedJson::array();
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        std::vector<std::string> row = {format_double(traj.parameters[i])};
        OrderedJson jstates = OrderedJson::array();
        for (const auto& st : traj.steps[i]) {
            row.push_back(format_double(st.z.real()));
            row.push_back(format_double(st.z.imag()));
            row.push_back(format_double(st.width()));
            OrderedJson js;
            js["re_z"] = st.z.real();
            js["im_z"] = st.z.imag();
            js["gamma"] = st.width();
            jstates.push_back(js);
        }
        row.push_back(bool_cell(traj.matched[i]));
        table.rows.push_back(row);
        OrderedJson step;
        step["alpha"] = traj.parameters[i];
        step["states"] = jstates;
        step["matched"] = traj.matched[i];
        json["steps"].push_back(step);
    }
    return render(table, json, opt.format);
}

inline std::string run_ep_locate(const Scenario& sc, const RunOptions& opt) {
    if (!sc.ep_search)
        throw ScenarioError("ep-locate requires an ep_search block in the scenario");
    const auto& spec = *sc.ep_search;
    const EPResult r = locate_exceptional_point(sc.sys, spec.param_a, spec.param_b,
                                                sc.probe_energy, spec.grid);
    if (!r.found)
        throw NotFound("no exceptional point inside the search box (best residual " +
                       format_double(r.residual) + ")");

    Table table;
    table.header = {spec.param_a.name, spec.param_b.name,     "re_z",
                    "im_z",            "residual",            "self_orthogonality"};
    table.rows.push_back({format_double(r.param_a), format_double(r.param_b),
                          format_double(r.z.real()), format_double(r.z.imag()),
                          format_double(r.residual), format_double(r.self_orthogonality)});
    OrderedJson json;
    json[spec.param_a.name] = r.param_a;
    json[spec.param_b.name] = r.param_b;
    json["re_z"] = r.z.real();
    json["im_z"] = r.z.imag();
    json["residual"] = r.residual;
    json["self_orthogonality"] = r.self_orthogonality;
    return render(table, json, opt.format);
}

inline std::string run_smatrix(const Scenario& sc, const RunOptions& opt) {
    const std::vector<double> grid = resolve_energy_grid(sc, opt);
    const int k = sc.sys.channel_count();

    Table table;
    table.header = {"e"};
    for (int c = 0; c < k; ++c)
        for (int d = 0; d < k; ++d) {
            table.header.push_back("re_s_" + std::to_string(c) + "_" + std::to_string(d));
            table.header.push_back("im_s_" + std::to_string(c) + "_" + std::to_string(d));
        }
    table.header.push_back("unitarity");

    OrderedJson json;
    json["channels"] = k;
    json["samples"] = OrderedJson::array();
    for (double e : grid) {
        const SMatrixSample sample = smatrix(sc.sys, e);
        std::vector<std::string> row = {format_double(e)};
        OrderedJson s_re = OrderedJson::array(), s_im = OrderedJson::array();
        for (int c = 0; c < k; ++c) {
            OrderedJson row_re = OrderedJson::array(), row_im = OrderedJson::array();
            for (int d = 0; d < k; ++d) {
                row.push_back(format_double(sample.S(c, d).real()));
                row.push_back(format_double(sample.S(c, d).imag()));
                row_re.push_back(sample.S(c, d).real());
                row_im.push_back(sample.S(c, d).imag());
            }
            s_re.push_back(row_re);
            s_im.push_back(row_im);
        }
        row.push_back(format_double(sample.unitarity_residual));
        table.rows.push_back(row);
        OrderedJson js;
        js["e"] = e;
        js["s_re"] = s_re;
        js["s_im"] = s_im;
        js["unitarity"] = sample.unitarity_residual;
        json["samples"].push_back(js);
    }
    return render(table, json, opt.format);
}

inline std::string run_decay(const Scenario& sc, const RunOptions& opt) {
    const std::vector<double> times = resolve_time_grid(sc, opt);
    const ExcitedEnsemble ens = excite(sc.sys, sc.probe_energy, sc.excitation);
    const DecayTrace trace = decay_trace(ens, times);

    Table table;
    table.header = {"t", "p"};
    OrderedJson json;
    json["probe_energy"] = trace.E;
    json["t"] = OrderedJson::array();
    json["p"] = OrderedJson::array();
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        table.rows.push_back({format_double(trace.times[i]), format_double(trace.P[i])});
        json["t"].push_back(trace.times[i]);
        json["p"].push_back(trace.P[i]);
    }
    return render(table, json, opt.format);
}

inline std::string run_rates(const Scenario& sc, const RunOptions& opt) {
    const std::vector<double> times = resolve_time_grid(sc, opt);
    const ExcitedEnsemble ens = excite(sc.sys, sc.probe_energy, sc.excitation);
    const std::size_t n = ens.states.size();

    Table table;
    table.header = {"t", "k_gr"};
    for (std::size_t lam = 0; lam < n; ++lam)
        table.header.push_back("k_" + std::to_string(lam));

    OrderedJson json;
    json["probe_energy"] = sc.probe_energy;
    json["rows"] = OrderedJson::array();
    for (double t : times) {
        std::vector<std::string> row = {format_double(t)};
        OrderedJson jrow;
        jrow["t"] = t;
        const double k_gr = decay_rate_group(ens, t);
        row.push_back(format_double(k_gr));
        jrow["k_gr"] = k_gr;
        OrderedJson jk = OrderedJson::array();
        for (std::size_t lam = 0; lam < n; ++lam) {
            const double k_lam = decay_rate_individual(ens, static_cast<int>(lam), t);
            row.push_back(format_double(k_lam));
            jk.push_back(k_lam);
        }
        jrow["k"] = jk;
        table.rows.push_back(row);
        json["rows"].push_back(jrow);
    }
    return render(table, json, opt.format);
}

inline std::string run_trap(const Scenario& sc, const RunOptions& opt) {
    const std::vector<double> grid = resolve_alpha_grid(sc, opt);
    const TrappingReport report = trapping_analysis(sc.sys, grid, sc.probe_energy);
    const std::size_t n = report.widths.empty() ? 0 : report.widths.front().size();

    Table table;
    table.header = {"alpha"};
    for (std::size_t lam = 0; lam < n; ++lam)
        table.header.push_back("gamma_" + std::to_string(lam));
    table.header.push_back("gamma_av");
    table.header.push_back("k_av");
    table.header.push_back("saturated");

    OrderedJson json;
    json["broad_count"] = report.broad_count;
    json["partition_valid"] = report.partition_valid;
    if (std::isnan(report.saturation_alpha))
        json["saturation_alpha"] = nullptr;
    else
        json["saturation_alpha"] = report.saturation_alpha;
    json["rows"] = OrderedJson::array();

    for (std::size_t i = 0; i < report.alpha.size(); ++i) {
        const bool saturated = report.partition_valid &&
                               !std::isnan(report.saturation_alpha) &&
                               report.alpha[i] >= report.saturation_alpha;
        std::vector<std::string> row = {format_double(report.alpha[i])};
        OrderedJson jrow;
        jrow["alpha"] = report.alpha[i];
        OrderedJson jw = OrderedJson::array();
        for (std::size_t lam = 0; lam < n; ++lam) {
            row.push_back(format_double(report.widths[i][lam]));
            jw.push_back(report.widths[i][lam]);
        }
        jrow["gamma"] = jw;
        row.push_back(format_double(report.gamma_av[i]));
        row.push_back(format_double(report.k_av[i]));
        row.push_back(bool_cell(saturated));
        if (std::isnan(report.gamma_av[i])) {
            jrow["gamma_av"] = nullptr;
            jrow["k_av"] = nullptr;
        } else {
            jrow["gamma_av"] = report.gamma_av[i];
            jrow["k_av"] = report.k_av[i];
        }
        jrow["saturated"] = saturated;
        table.rows.push_back(row);
        json["rows"].push_back(jrow);
    }
    return render(table, json, opt.format);
}

inline std::string run_oracle_compare(const Scenario& sc, const RunOptions& opt) {
    const FixedPointResult fp =
        solve_fixed_point(sc.sys, sc.fixed_point.e0, sc.fixed_point.state);
    if (!fp.converged)
        throw NotConverged("fixed point did not converge; no reference width to compare");
    if (!(fp.Gamma_star > 0.0))
        throw InvalidArgument("fixed-point width is zero; nothing to fit");

    const int bins = opt.bins ? *opt.bins : sc.oracle.bins;
    const FullSpaceModel model = discretize_full(sc.sys, bins, sc.oracle.window);
    const Eigen::VectorXcd psi0 =
        default_initial_state(sc.sys, sc.probe_energy, sc.oracle.state);

    double fit_lo = 0.2 * sc.sys.hbar / fp.Gamma_star;
    double fit_hi = 2.0 * sc.sys.hbar / fp.Gamma_star;
    if (sc.oracle.fit) {
        fit_lo = sc.oracle.fit->first;
        fit_hi = sc.oracle.fit->second;
    }
    const SurvivalCurve curve =
        survival_probability_full(model, psi0, linspace(fit_lo, fit_hi, 201));
    const WidthFit fit = extract_width(curve, fit_lo, fit_hi);
    const double rel = std::abs(fit.gamma - fp.Gamma_star) / std::abs(fp.Gamma_star);

    Table table;
    table.header = {"gamma_fixed_point", "gamma_fit", "relative_error", "fit_residual",
                    "horizon"};
    table.rows.push_back({format_double(fp.Gamma_star), format_double(fit.gamma),
                          format_double(rel), format_double(fit.residual),
                          format_double(curve.horizon)});
    OrderedJson json;
    json["gamma_fixed_point"] = fp.Gamma_star;
    json["gamma_fit"] = fit.gamma;
    json["relative_error"] = rel;
    json["fit_residual"] = fit.residual;
    json["horizon"] = curve.horizon;
    return render(table, json, opt.format);
}

} // namespace detail

inline std::string execute(const RunOptions& opt) {
    if (opt.format != "csv" && opt.format != "json")
        throw ScenarioError("format must be \"csv\" or \"json\"");
    const Scenario sc = load_scenario(opt.scenario_path);
    if (opt.command == "spectrum")
        return detail::run_spectrum(sc, opt);
    if (opt.command == "fixedpoint")
        return detail::run_fixedpoint(sc, opt);
    if (opt.command == "sweep")
        return detail::run_sweep(sc, opt);
    if (opt.command == "ep-locate")
        return detail::run_ep_locate(sc, opt);
    if (opt.command == "smatrix")
        return detail::run_smatrix(sc, opt);
    if (opt.command == "decay")
        return detail::run_decay(sc, opt);
    if (opt.command == "rates")
        return detail::run_rates(sc, opt);
    if (opt.command == "trap")
        return detail::run_trap(sc, opt);
    if (opt.command == "oracle-compare")
        return detail::run_oracle_compare(sc, opt);
    throw ScenarioError("unknown command: " + opt.command);
}

// Full CLI behavior around execute(): deliver output on success, print the
// stable error name to stderr and map the error family to the exit code
// otherwise (2 = validation, 3 = numerical).
inline int run_cli(const RunOptions& opt) {
    try {
        deliver_output(opt.out, execute(opt));
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << e.name() << ": " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << e.name() << ": " << e.what() << '\n';
        return 3;
    }
}

} // namespace resonance
