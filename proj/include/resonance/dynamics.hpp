#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "resonance/errors.hpp"
#include "resonance/model.hpp"
#include "resonance/scattering.hpp"
#include "resonance/spectra.hpp"

namespace resonance {

// How the interior states get populated at t = 0: either through an open
// channel (the scattering wave dominates near resonance) or by a direct source
// vector switched on as a step at t = 0.
struct Scattering {
    int channel = 0;
};

struct Source {
    Eigen::VectorXcd F;
};

using Excitation = std::variant<Scattering, Source>;

// Per-state excitation data: c0 is the t = 0 expansion coefficient, d its
// conjugate partner, and w = c0 * d the nonnegative real weight that enters
// every population formula.
struct ExcitationWeight {
    Complex c0;
    Complex d;
    double w = 0.0;
};

namespace detail {

inline Eigen::VectorXcd excitation_numerators(const OpenSystem& sys,
                                              const std::vector<ResonanceState>& states,
                                              double E, const Excitation& exc) {
    const auto n = static_cast<Eigen::Index>(states.size());
    Eigen::VectorXcd num(n);
    if (const auto* sc = std::get_if<Scattering>(&exc)) {
        if (sc->channel < 0 || sc->channel >= sys.channel_count())
            throw InvalidArgument("excitation channel index out of range");
        const double rho =
            channel_density(sys.channels[static_cast<std::size_t>(sc->channel)], E);
        const Eigen::VectorXd w_col = sys.coupling.scaled().col(sc->channel);
        for (Eigen::Index lam = 0; lam < n; ++lam)
            num[lam] = std::sqrt(rho) *
                       (w_col.cast<Complex>().dot(states[static_cast<std::size_t>(lam)].phi));
    } else {
        const auto& src = std::get<Source>(exc);
        if (src.F.size() != sys.levels())
            throw DimensionMismatch("source vector length must match the level count");
        if (!src.F.allFinite())
            throw InvalidArgument("source vector must be finite");
        for (Eigen::Index lam = 0; lam < n; ++lam)
            num[lam] = states[static_cast<std::size_t>(lam)].phi.transpose() * src.F;
    }
    return num;
}

} // namespace detail

// Expansion coefficients of the excited interior state over the resonance
// basis. d is the complex conjugate of c0 (real probe energy), so each weight
// w = c0 * d = |numerator|^2 / |E - z|^2 is real and nonnegative.
inline std::vector<ExcitationWeight> excitation_coefficients(
    const OpenSystem& sys, const std::vector<ResonanceState>& states, double E,
    const Excitation& exc) {
    if (!std::isfinite(E))
        throw InvalidArgument("probe energy must be finite");
    const Eigen::VectorXcd num = detail::excitation_numerators(sys, states, E, exc);
    std::vector<ExcitationWeight> weights(states.size());
    bool any = false;
    for (std::size_t lam = 0; lam < states.size(); ++lam) {
        const Complex den = E - states[lam].z;
        if (den == Complex(0.0, 0.0))
            throw SingularResolvent("probe energy coincides with a real eigenvalue");
        ExcitationWeight ew;
        ew.c0 = num[static_cast<Eigen::Index>(lam)] / den;
        ew.d = std::conj(ew.c0);
        ew.w = (ew.c0 * ew.d).real();
        any = any || ew.w != 0.0;
        weights[lam] = ew;
    }
    if (!any)
        throw AllZero("excitation populates no resonance state");
    return weights;
}

inline std::vector<ExcitationWeight> excitation_coefficients(const OpenSystem& sys, double E,
                                                             const Excitation& exc) {
    const auto states = eigendecompose(sys.effective_hamiltonian(E));
    return excitation_coefficients(sys, states, E, exc);
}

// Everything the time-dependent formulas need, precomputed once per (E, exc):
// the resonance states, their weights, the norms A_lambda, and the Hermitian
// overlaps <phi_mu|phi_lambda> driving the cross terms.
struct ExcitedEnsemble {
    double E = 0.0;
    double hbar = 1.0;
    std::vector<ResonanceState> states;
    std::vector<ExcitationWeight> weights;
    std::vector<double> a_norm;
    Eigen::MatrixXcd overlap;
};

inline ExcitedEnsemble excite(const OpenSystem& sys, double E, const Excitation& exc) {
    ExcitedEnsemble ens;
    ens.E = E;
    ens.hbar = sys.hbar;
    ens.states = eigendecompose(sys.effective_hamiltonian(E));
    ens.weights = excitation_coefficients(sys, ens.states, E, exc);
    const PhaseRigidityReport report = phase_rigidity_report(ens.states);
    ens.a_norm = report.a_norm;
    ens.overlap = report.overlap;
    return ens;
}

// Population probability P(t) = sum_lambda w_lambda e^{-Gamma_lambda t / hbar}.
// The representation is meaningful for t >= 0 only; negative times are a
// domain error, not an extrapolation.
inline double population_probability(const ExcitedEnsemble& ens, double t) {
    if (!(t >= 0.0))
        throw DomainError("population is defined for t >= 0 only");
    double p = 0.0;
    for (std::size_t lam = 0; lam < ens.states.size(); ++lam)
        p += ens.weights[lam].w * std::exp(-ens.states[lam].width() * t / ens.hbar);
    return p;
}

inline double population_probability(const OpenSystem& sys, double E, const Excitation& exc,
                                     double t) {
    return population_probability(excite(sys, E, exc), t);
}

// Group decay rate k_gr(t) = -d/dt ln P(t), evaluated in closed form as the
// width-weighted softmin average. Monotone nonincreasing, bounded by the
// extreme widths over hbar, and drifting toward the smallest width.
inline double decay_rate_group(const ExcitedEnsemble& ens, double t) {
    if (!(t >= 0.0))
        throw DomainError("decay rate is defined for t >= 0 only");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t lam = 0; lam < ens.states.size(); ++lam) {
        const double gamma = ens.states[lam].width();
        const double term = ens.weights[lam].w * std::exp(-gamma * t / ens.hbar);
        num += gamma * term;
        den += term;
    }
    if (den < 1e-300)
        throw Underflow("population underflowed below 1e-300");
    return num / den / ens.hbar;
}

inline double decay_rate_group(const OpenSystem& sys, double E, const Excitation& exc,
                               double t) {
    return decay_rate_group(excite(sys, E, exc), t);
}

namespace detail {

// Norm N_lambda(t) of one resonance component and its analytic time
// derivative: the diagonal piece w A e^{-Gamma t/hbar} plus, per partner mu,
// an oscillating cross term damped by the mean width and weighted by the
// Hermitian overlap <phi_mu|phi_lambda>.
inline void state_norm_terms(const ExcitedEnsemble& ens, std::size_t lam, double t,
                             bool cross_terms, double& value, double& derivative) {
    const double hbar = ens.hbar;
    const double gam_l = ens.states[lam].width();
    const double e_l = ens.states[lam].energy();
    const double diag =
        ens.weights[lam].w * ens.a_norm[lam] * std::exp(-gam_l * t / hbar);
    value = diag;
    derivative = -(gam_l / hbar) * diag;
    if (!cross_terms)
        return;

    for (std::size_t mu = 0; mu < ens.states.size(); ++mu) {
        if (mu == lam)
            continue;
        const double gam_m = ens.states[mu].width();
        const double e_m = ens.states[mu].energy();
        const double damp = std::exp(-(gam_l + gam_m) * t / (2.0 * hbar));
        const double phase = (e_m - e_l) / hbar;
        const Complex fwd = ens.weights[lam].c0 * ens.weights[mu].d *
                            std::exp(Complex(0.0, phase * t));
        const Complex bwd = ens.weights[mu].c0 * ens.weights[lam].d *
                            std::exp(Complex(0.0, -phase * t));
        const Complex b =
            ens.overlap(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(lam));
        const Complex osc = fwd - bwd;
        const Complex osc_dot = Complex(0.0, phase) * (fwd + bwd);
        value += (damp * osc * b).real();
        derivative +=
            (damp * (osc_dot - (gam_l + gam_m) / (2.0 * hbar) * osc) * b).real();
    }
}

} // namespace detail

// Individual decay rate k_lambda(t) = -d/dt ln N_lambda(t) with the derivative
// taken termwise analytically. Oscillates when resonance states overlap;
// negative excursions are reported as data, not clamped. cross_terms = false
// keeps only the diagonal norm, collapsing the rate to Gamma_lambda/hbar.
inline double decay_rate_individual(const ExcitedEnsemble& ens, int lam, double t,
                                    bool cross_terms = true) {
    if (lam < 0 || lam >= static_cast<int>(ens.states.size()))
        throw InvalidArgument("state index out of range");
    if (!(t >= 0.0))
        throw DomainError("decay rate is defined for t >= 0 only");
    double value = 0.0;
    double derivative = 0.0;
    detail::state_norm_terms(ens, static_cast<std::size_t>(lam), t, cross_terms, value,
                             derivative);
    if (value < 1e-300)
        throw Underflow("state norm underflowed below 1e-300");
    return -derivative / value;
}

inline double decay_rate_individual(const OpenSystem& sys, int lam, double E,
                                    const Excitation& exc, double t) {
    return decay_rate_individual(excite(sys, E, exc), lam, t);
}

// A sampled decay history at fixed probe energy: population P(t) and group
// rate k(t) on a shared time grid starting at t = 0.
struct DecayTrace {
    double E = 0.0;
    std::vector<double> times;
    std::vector<double> P;
    std::vector<double> k;
};

inline DecayTrace decay_trace(const ExcitedEnsemble& ens, const std::vector<double>& times) {
    if (times.empty())
        throw InvalidArgument("time grid must not be empty");
    if (times.front() != 0.0)
        throw InvalidArgument("time grid must start at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw InvalidArgument("time grid must be strictly increasing");

    DecayTrace trace;
    trace.E = ens.E;
    trace.times = times;
    trace.P.reserve(times.size());
    trace.k.reserve(times.size());
    for (double t : times) {
        const double p = population_probability(ens, t);
        if (p < 1e-300)
            throw Underflow("population underflowed below 1e-300");
        trace.P.push_back(p);
        trace.k.push_back(decay_rate_group(ens, t));
    }
    return trace;
}

// Width bifurcation summary over a coupling sweep: at every alpha the K
// broadest states (K = open channels at the probe energy) form the broad set,
// the remaining N - K the trapped set whose average width Gamma_av and rate
// k_av = Gamma_av/hbar are tracked. Saturation onset is the first grid point
// where Gamma_av turns decreasing. K >= N leaves no trapped set; the report is
// returned with partition_valid = false and NaN averages.
struct TrappingReport {
    std::vector<double> alpha;
    std::vector<std::vector<double>> widths;
    int broad_count = 0;
    bool partition_valid = true;
    std::vector<double> gamma_av;
    std::vector<double> k_av;
    double saturation_alpha = std::numeric_limits<double>::quiet_NaN();
};

inline TrappingReport trapping_analysis(const OpenSystem& sys,
                                        const std::vector<double>& alpha_grid,
                                        double E_probe) {
    const Trajectory traj = sweep_eigenvalues(sys, E_probe, alpha_grid);
    const int n = sys.levels();
    int k_open = 0;
    for (const auto& ch : sys.channels)
        if (channel_density(ch, E_probe) > 0.0)
            ++k_open;

    TrappingReport report;
    report.alpha = traj.parameters;
    report.broad_count = k_open;
    report.partition_valid = k_open < n;
    report.widths.reserve(traj.steps.size());
    report.gamma_av.reserve(traj.steps.size());
    report.k_av.reserve(traj.steps.size());

    for (const auto& step : traj.steps) {
        std::vector<double> widths(step.size());
        for (std::size_t lam = 0; lam < step.size(); ++lam)
            widths[lam] = step[lam].width();
        report.widths.push_back(widths);

        if (!report.partition_valid) {
            report.gamma_av.push_back(std::numeric_limits<double>::quiet_NaN());
            report.k_av.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        std::sort(widths.begin(), widths.end(), std::greater<>());
        double acc = 0.0;
        for (std::size_t lam = static_cast<std::size_t>(k_open); lam < widths.size(); ++lam)
            acc += widths[lam];
        const double gamma_av = acc / static_cast<double>(n - k_open);
        report.gamma_av.push_back(gamma_av);
        report.k_av.push_back(gamma_av / sys.hbar);
    }

    if (report.partition_valid)
        for (std::size_t i = 1; i < report.gamma_av.size(); ++i)
            if (report.gamma_av[i] < report.gamma_av[i - 1]) {
                report.saturation_alpha = report.alpha[i];
                break;
            }
    return report;
}

} // namespace resonance
