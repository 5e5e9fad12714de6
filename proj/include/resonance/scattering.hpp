#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>
#include <cmath>
#include <utility>
#include <vector>

#include "resonance/errors.hpp"
#include "resonance/model.hpp"
#include "resonance/spectra.hpp"

namespace resonance {

// One energy sample of the K x K scattering matrix. Closed channels (zero
// local density) carry identity rows and columns and are excluded from the
// unitarity residual, which is the Frobenius norm of S'S - I over the open
// sub-block.
struct SMatrixSample {
    double E = 0.0;
    Eigen::MatrixXcd S;
    double unitarity_residual = 0.0;
    std::vector<bool> open;
};

// Channel decay amplitudes a_{lambda c} = sqrt(2 pi rho_c(E)) ((alpha W)^T
// phi_lambda)_c, rows = states, columns = channels. Zero whenever channel c is
// closed at E.
inline Eigen::MatrixXcd channel_amplitudes(const OpenSystem& sys,
                                           const std::vector<ResonanceState>& states,
                                           double E) {
    const auto n = static_cast<Eigen::Index>(states.size());
    const Eigen::Index k = sys.channel_count();
    const Eigen::MatrixXd aw = sys.coupling.scaled();
    Eigen::MatrixXcd a(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double rho = channel_density(sys.channels[static_cast<std::size_t>(c)], E);
        const double weight = std::sqrt(2.0 * kPi * rho);
        for (Eigen::Index lam = 0; lam < n; ++lam) {
            const Complex proj =
                aw.col(c).cast<Complex>().dot(states[static_cast<std::size_t>(lam)].phi);
            a(lam, c) = weight * proj;
        }
    }
    return a;
}

// Resonance part of the S-matrix as the explicit spectral sum over resonance
// states, S_res = -i sum_lambda a_lambda a_lambda^T / (E - z_lambda), with the
// decomposition taken at the probe energy so the full energy dependence of the
// eigenvalues enters.
inline Eigen::MatrixXcd resonance_amplitude(const OpenSystem& sys, double E) {
    if (!std::isfinite(E))
        throw InvalidArgument("probe energy must be finite");
    const auto states = eigendecompose(sys.effective_hamiltonian(E));
    const Eigen::MatrixXcd a = channel_amplitudes(sys, states, E);
    const Eigen::Index k = sys.channel_count();
    Eigen::MatrixXcd s_res = Eigen::MatrixXcd::Zero(k, k);
    const Complex minus_i(0.0, -1.0);
    for (std::size_t lam = 0; lam < states.size(); ++lam) {
        const Complex den = E - states[lam].z;
        if (den == Complex(0.0, 0.0))
            throw SingularResolvent("probe energy coincides with a real eigenvalue");
        const Eigen::RowVectorXcd row = a.row(static_cast<Eigen::Index>(lam));
        s_res += (minus_i / den) * (row.transpose() * row);
    }
    return s_res;
}

// Full S-matrix through the resolvent form S = I - 2 pi i V^T (E - H_eff)^-1 V
// with V_ic = sqrt(rho_c(E)) (alpha W)_ic. Valid at exceptional points, exactly
// unitary for wideband channels, and identity on closed channels.
inline SMatrixSample smatrix(const OpenSystem& sys, double E) {
    if (!std::isfinite(E))
        throw InvalidArgument("probe energy must be finite");
    const Eigen::Index n = sys.levels();
    const Eigen::Index k = sys.channel_count();

    const Eigen::MatrixXd aw = sys.coupling.scaled();
    Eigen::MatrixXd v(n, k);
    std::vector<bool> open(static_cast<std::size_t>(k), false);
    for (Eigen::Index c = 0; c < k; ++c) {
        const double rho = channel_density(sys.channels[static_cast<std::size_t>(c)], E);
        open[static_cast<std::size_t>(c)] = rho > 0.0;
        v.col(c) = std::sqrt(rho) * aw.col(c);
    }

    Eigen::MatrixXcd resolvent_arg =
        E * Eigen::MatrixXcd::Identity(n, n) - sys.effective_hamiltonian(E).matrix;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(resolvent_arg);
    if (!lu.isInvertible())
        throw SingularResolvent("E - H_eff is singular at the probe energy");

    const Eigen::MatrixXcd vc = v.cast<Complex>();
    SMatrixSample sample;
    sample.E = E;
    sample.S = Eigen::MatrixXcd::Identity(k, k) -
               Complex(0.0, 2.0 * kPi) * (vc.transpose() * lu.solve(vc));
    sample.open = open;

    Eigen::Index n_open = 0;
    for (bool o : open)
        n_open += o ? 1 : 0;
    if (n_open > 0) {
        Eigen::MatrixXcd s_open(n_open, n_open);
        Eigen::Index ci = 0;
        for (Eigen::Index c = 0; c < k; ++c) {
            if (!open[static_cast<std::size_t>(c)])
                continue;
            Eigen::Index cj = 0;
            for (Eigen::Index d = 0; d < k; ++d) {
                if (!open[static_cast<std::size_t>(d)])
                    continue;
                s_open(ci, cj) = sample.S(c, d);
                ++cj;
            }
            ++ci;
        }
        sample.unitarity_residual =
            (s_open.adjoint() * s_open - Eigen::MatrixXcd::Identity(n_open, n_open)).norm();
    }
    return sample;
}

// Dimensionless line shape sigma_{cc'}(E) = |delta_{cc'} - S_{cc'}(E)|^2 over an
// energy grid; no flux prefactors.
inline std::vector<std::pair<double, double>> cross_section(const OpenSystem& sys, int c,
                                                            int c_prime,
                                                            const std::vector<double>& grid) {
    if (c < 0 || c >= sys.channel_count() || c_prime < 0 || c_prime >= sys.channel_count())
        throw InvalidArgument("cross-section channel index out of range");
    std::vector<std::pair<double, double>> sigma;
    sigma.reserve(grid.size());
    const Complex delta = c == c_prime ? 1.0 : 0.0;
    for (double E : grid) {
        const SMatrixSample sample = smatrix(sys, E);
        sigma.emplace_back(E, std::norm(delta - sample.S(c, c_prime)));
    }
    return sigma;
}

} // namespace resonance
