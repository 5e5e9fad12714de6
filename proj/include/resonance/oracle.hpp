#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "resonance/errors.hpp"
#include "resonance/model.hpp"
#include "resonance/spectra.hpp"

namespace resonance {

// Fixed-step 4th-order Runge-Kutta integration of i hbar dpsi/dt = H psi for a
// frozen effective Hamiltonian. The stability bound is 0.01 hbar/|H|
// (Frobenius); a requested step above it is refused, step <= 0 selects the
// default 1e-3 hbar/|H|. Output states are sampled exactly at the requested
// times, which must be nonnegative and strictly increasing.
inline std::vector<Eigen::VectorXcd> propagate_direct(const EffectiveHamiltonian& h,
                                                      const Eigen::VectorXcd& psi0,
                                                      const std::vector<double>& times,
                                                      double hbar = 1.0, double step = 0.0) {
    if (psi0.size() != h.matrix.rows())
        throw DimensionMismatch("initial state length must match the Hamiltonian dimension");
    if (!(hbar > 0.0))
        throw InvalidArgument("hbar must be positive");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0))
            throw DomainError("propagation times must be nonnegative");
        if (i > 0 && times[i] <= times[i - 1])
            throw InvalidArgument("propagation times must be strictly increasing");
    }

    const double h_norm = h.matrix.norm();
    std::vector<Eigen::VectorXcd> out;
    out.reserve(times.size());
    if (h_norm == 0.0) {
        for (std::size_t i = 0; i < times.size(); ++i)
            out.push_back(psi0);
        return out;
    }
    const double bound = 0.01 * hbar / h_norm;
    if (step <= 0.0)
        step = 1e-3 * hbar / h_norm;
    else if (step > bound)
        throw StepTooLarge("step exceeds the stability bound 0.01*hbar/|H|");

    const Eigen::MatrixXcd gen = Complex(0.0, -1.0 / hbar) * h.matrix;
    Eigen::VectorXcd psi = psi0;
    double t_now = 0.0;
    for (double t : times) {
        const double span = t - t_now;
        if (span > 0.0) {
            const auto n_sub = static_cast<long>(std::ceil(span / step));
            const double dt = span / static_cast<double>(n_sub);
            for (long s = 0; s < n_sub; ++s) {
                const Eigen::VectorXcd k1 = gen * psi;
                const Eigen::VectorXcd k2 = gen * (psi + (dt / 2.0) * k1);
                const Eigen::VectorXcd k3 = gen * (psi + (dt / 2.0) * k2);
                const Eigen::VectorXcd k4 = gen * (psi + dt * k3);
                psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            t_now = t;
        }
        out.push_back(psi);
    }
    return out;
}

// The Hermitian full-space reference: discrete block plus one uniformly binned
// band per channel, coupled through sqrt(local density x bin width). Finite
// bins mean finite recurrence time; horizon() is the latest trustworthy time.
struct FullSpaceModel {
    Eigen::MatrixXd H_full;
    int n_discrete = 0;
    std::vector<int> bins_per_channel;
    std::vector<double> bin_widths;
    double hbar = 1.0;

    double horizon() const {
        double widest = 0.0;
        for (double w : bin_widths)
            widest = std::max(widest, w);
        if (widest == 0.0)
            return std::numeric_limits<double>::infinity();
        return 2.0 * kPi * hbar / widest;
    }
};

// Survival probability of an initially localized state under the full
// Hermitian model, sampled inside the recurrence horizon.
struct SurvivalCurve {
    std::vector<double> times;
    std::vector<double> P;
    double horizon = 0.0;
    double hbar = 1.0;
};

struct WidthFit {
    double gamma = 0.0;
    double residual = 0.0;
};

// Assemble the full-space Hamiltonian with M bins per channel. Chain channels
// discretize their own band; wideband channels have no intrinsic edges and
// require an explicit energy window.
inline FullSpaceModel discretize_full(const OpenSystem& sys, int bins,
                                      std::optional<std::pair<double, double>> window = {}) {
    if (bins < 100)
        throw InvalidArgument("full-space discretization needs at least 100 bins per channel");
    const Eigen::Index n = sys.levels();
    const Eigen::Index k = sys.channel_count();
    for (const auto& ch : sys.channels)
        if (std::holds_alternative<Wideband>(ch) && !window)
            throw WindowRequired("wideband channels need an explicit energy window");
    if (window && !(window->first < window->second))
        throw InvalidArgument("energy window must satisfy min < max");

    const Eigen::Index dim = n + k * bins;
    FullSpaceModel model;
    model.H_full = Eigen::MatrixXd::Zero(dim, dim);
    model.n_discrete = static_cast<int>(n);
    model.hbar = sys.hbar;

    model.H_full.topLeftCorner(n, n) = sys.system.hamiltonian();
    const Eigen::MatrixXd aw = sys.coupling.scaled();
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto& ch = sys.channels[static_cast<std::size_t>(c)];
        double lo, hi;
        if (const auto* chain = std::get_if<Chain>(&ch)) {
            lo = chain->center - 2.0 * chain->hopping;
            hi = chain->center + 2.0 * chain->hopping;
        } else {
            lo = window->first;
            hi = window->second;
        }
        const double de = (hi - lo) / bins;
        const Eigen::Index off = n + c * bins;
        for (Eigen::Index m = 0; m < bins; ++m) {
            const double e_m = lo + (static_cast<double>(m) + 0.5) * de;
            model.H_full(off + m, off + m) = e_m;
            const double weight = std::sqrt(channel_density(ch, e_m) * de);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v = aw(i, c) * weight;
                model.H_full(i, off + m) = v;
                model.H_full(off + m, i) = v;
            }
        }
        model.bins_per_channel.push_back(bins);
        model.bin_widths.push_back(de);
    }
    return model;
}

// Default initial state for survival runs: the normalized real part of the
// chosen resonance eigenvector at the probe energy, supported on the discrete
// block.
inline Eigen::VectorXcd default_initial_state(const OpenSystem& sys, double E_probe,
                                              int state) {
    const auto states = eigendecompose(sys.effective_hamiltonian(E_probe));
    if (state < 0 || state >= static_cast<int>(states.size()))
        throw InvalidArgument("initial-state index out of range");
    const Eigen::VectorXd re = states[static_cast<std::size_t>(state)].phi.real();
    const double norm = re.norm();
    if (norm == 0.0)
        throw InvalidArgument("eigenvector real part vanishes; no default initial state");
    return (re / norm).cast<Complex>();
}

// Exact survival probability P(t) = |<psi0|e^{-iHt/hbar}|psi0>|^2 through one
// Hermitian eigendecomposition of the full model. psi0 lives on the discrete
// block and is normalized internally.
inline SurvivalCurve survival_probability_full(const FullSpaceModel& model,
                                               const Eigen::VectorXcd& psi0,
                                               const std::vector<double>& times) {
    if (psi0.size() != model.n_discrete)
        throw DimensionMismatch("initial state must live on the discrete block");
    const double norm = psi0.norm();
    if (norm == 0.0)
        throw InvalidArgument("initial state must be nonzero");
    const double t_max = model.horizon();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0))
            throw DomainError("survival times must be nonnegative");
        if (i > 0 && times[i] <= times[i - 1])
            throw InvalidArgument("survival times must be strictly increasing");
        if (times[i] > t_max)
            throw HorizonExceeded("requested time exceeds the recurrence horizon");
    }

    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(model.H_full.rows());
    full.head(model.n_discrete) = psi0 / norm;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.H_full);
    if (es.info() != Eigen::Success)
        throw NotConverged("full-space eigensolver failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    const Eigen::VectorXcd coeff = es.eigenvectors().transpose() * full;
    const Eigen::VectorXd prob = coeff.cwiseAbs2();

    SurvivalCurve curve;
    curve.times = times;
    curve.horizon = t_max;
    curve.hbar = model.hbar;
    curve.P.reserve(times.size());
    for (double t : times) {
        Complex amp(0.0, 0.0);
        for (Eigen::Index j = 0; j < ev.size(); ++j)
            amp += prob[j] * std::exp(Complex(0.0, -ev[j] * t / model.hbar));
        curve.P.push_back(std::norm(amp));
    }
    return curve;
}

// Least-squares exponential fit on a time window: slope of ln P against t,
// reported as a width Gamma = -hbar * slope together with the RMS residual of
// the fit.
inline WidthFit extract_width(const SurvivalCurve& curve, double t_lo, double t_hi) {
    if (!(t_lo < t_hi) || !std::isfinite(t_lo) || !std::isfinite(t_hi))
        throw InvalidArgument("fit window must be finite with t_lo < t_hi");
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const double t = curve.times[i];
        if (t < t_lo || t > t_hi)
            continue;
        if (!(curve.P[i] > 0.0))
            throw WindowEmpty("fit window contains nonpositive populations");
        ts.push_back(t);
        ys.push_back(std::log(curve.P[i]));
    }
    if (ts.size() < 2)
        throw WindowEmpty("fit window contains fewer than two samples");

    const double n = static_cast<double>(ts.size());
    double t_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        t_mean += ts[i];
        y_mean += ys[i];
    }
    t_mean /= n;
    y_mean /= n;
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        cov += (ts[i] - t_mean) * (ys[i] - y_mean);
        var += (ts[i] - t_mean) * (ts[i] - t_mean);
    }
    const double slope = cov / var;
    const double intercept = y_mean - slope * t_mean;

    WidthFit fit;
    fit.gamma = -curve.hbar * slope;
    double ss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (intercept + slope * ts[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

} // namespace resonance
