#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <variant>
#include <vector>

#include "resonance/errors.hpp"

namespace resonance {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Closed system: level energies plus a real symmetric internal coupling with
// zero diagonal (diagonal energy lives in the levels).
struct DiscreteSystem {
    Eigen::VectorXd levels;
    Eigen::MatrixXd internal_coupling;

    int size() const { return static_cast<int>(levels.size()); }

    Eigen::MatrixXd hamiltonian() const {
        Eigen::MatrixXd h = internal_coupling;
        h.diagonal() = levels;
        return h;
    }
};

// Continuum with constant density of states; the self-energy is -i*pi*rho at
// every energy (no real part: symmetric infinite band).
struct Wideband {
    double density = 1.0;
};

// Semi-infinite nearest-neighbor chain with hopping tau centered at epsilon_c.
// Band covers [center - 2*hopping, center + 2*hopping].
struct Chain {
    double hopping = 1.0;
    double center = 0.0;
};

using ChannelModel = std::variant<Wideband, Chain>;

// Bound-continuum coupling: rows are discrete states, columns are channels.
// The dimensionless scale alpha is applied as alpha*W everywhere.
struct CouplingMatrix {
    Eigen::MatrixXd W;
    double alpha = 1.0;

    Eigen::MatrixXd scaled() const { return alpha * W; }
};

// Complex symmetric N x N matrix at a probe energy, with a negative
// semidefinite anti-Hermitian part.
struct EffectiveHamiltonian {
    double energy = 0.0;
    Eigen::MatrixXcd matrix;
};

inline DiscreteSystem build_discrete_hamiltonian(const Eigen::VectorXd& levels,
                                                 const Eigen::MatrixXd& internal) {
    const auto n = levels.size();
    if (n < 1)
        throw DimensionMismatch("levels must contain at least one entry");
    if (internal.rows() != n || internal.cols() != n)
        throw DimensionMismatch("internal coupling must be " + std::to_string(n) + "x" +
                                std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i)
        if (!std::isfinite(levels[i]))
            throw DimensionMismatch("levels must be finite");
    if (!internal.allFinite())
        throw DimensionMismatch("internal coupling must be finite");

    const double scale = internal.cwiseAbs().maxCoeff();
    const double asym = (internal - internal.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw AsymmetryError("internal coupling asymmetry " + std::to_string(asym) +
                             " exceeds 1e-12 relative tolerance");

    DiscreteSystem sys;
    sys.levels = levels;
    sys.internal_coupling.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sys.internal_coupling(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (internal(i, j) + internal(j, i)) / 2.0;
            sys.internal_coupling(i, j) = v;
            sys.internal_coupling(j, i) = v;
        }
    }
    return sys;
}

// Scalar self-energy kernel g_c(E): (H_eff)_ij = (H_B)_ij + sum_c W_ic g_c(E) W_jc.
// Wideband: -i*pi*rho. Chain: surface Green's function of the semi-infinite
// chain, complex inside the band and purely real outside. Im g <= 0 always.
inline Complex channel_self_energy(const ChannelModel& channel, double E) {
    if (const auto* wb = std::get_if<Wideband>(&channel))
        return Complex(0.0, -kPi * wb->density);
    const auto& ch = std::get<Chain>(channel);
    const double tau = ch.hopping;
    const double et = E - ch.center;
    const double half_bw = 2.0 * tau;
    if (std::abs(et) < half_bw) {
        const double root = std::sqrt(half_bw * half_bw - et * et);
        return Complex(et / (2.0 * tau * tau), -root / (2.0 * tau * tau));
    }
    const double root = std::sqrt(et * et - half_bw * half_bw);
    const double sign = et >= 0.0 ? 1.0 : -1.0;
    return Complex((et - sign * root) / (2.0 * tau * tau), 0.0);
}

// Local density of states of channel c, rho_c(E) = -Im g_c(E) / pi.
// Zero outside a chain band (closed channel).
inline double channel_density(const ChannelModel& channel, double E) {
    return -channel_self_energy(channel, E).imag() / kPi;
}

inline EffectiveHamiltonian build_effective_hamiltonian(const DiscreteSystem& sys,
                                                        const CouplingMatrix& coupling,
                                                        const std::vector<ChannelModel>& channels,
                                                        double E) {
    const Eigen::Index n = sys.size();
    const Eigen::Index k = static_cast<Eigen::Index>(channels.size());
    if (coupling.W.rows() != n)
        throw DimensionMismatch("coupling matrix must have one row per level");
    if (coupling.W.cols() != k)
        throw DimensionMismatch("coupling matrix must have one column per channel");
    if (!std::isfinite(E))
        throw InvalidArgument("probe energy must be finite");

    std::vector<Complex> g(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c)
        g[c] = channel_self_energy(channels[c], E);

    const Eigen::MatrixXd aw = coupling.scaled();
    EffectiveHamiltonian h;
    h.energy = E;
    h.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            Complex self(0.0, 0.0);
            for (Eigen::Index c = 0; c < k; ++c)
                self += g[static_cast<std::size_t>(c)] * (aw(i, c) * aw(j, c));
            const double hb = i == j ? sys.levels[i] : sys.internal_coupling(i, j);
            h.matrix(i, j) = hb + self;
            h.matrix(j, i) = h.matrix(i, j);
        }
    }
    return h;
}

// A discrete system embedded in its channels: the full open-system model that
// the spectra, scattering, dynamics, and oracle operations consume.
struct OpenSystem {
    DiscreteSystem system;
    CouplingMatrix coupling;
    std::vector<ChannelModel> channels;
    double hbar = 1.0;

    int levels() const { return system.size(); }
    int channel_count() const { return static_cast<int>(channels.size()); }

    EffectiveHamiltonian effective_hamiltonian(double E) const {
        return build_effective_hamiltonian(system, coupling, channels, E);
    }

    // Sum of the open-channel densities at E; zero means every channel is closed.
    double total_density(double E) const {
        double rho = 0.0;
        for (const auto& ch : channels)
            rho += channel_density(ch, E);
        return rho;
    }
};

} // namespace resonance
