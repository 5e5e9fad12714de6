#pragma once

#include <cmath>
#include <random>

#include "resonance/resonance.hpp"

namespace fixtures {

// Two levels at +-1, one wideband channel of unit density, unit coupling
// column, alpha = sqrt(x/pi) so that the effective coupling strength
// pi*(alpha*W)^2 equals x. Closed form: z = -ix +- sqrt(1 - x^2) at u = 0.
inline resonance::OpenSystem two_level(double x, double u = 0.0) {
    resonance::OpenSystem sys;
    Eigen::VectorXd levels(2);
    levels << 1.0, -1.0;
    Eigen::MatrixXd internal = Eigen::MatrixXd::Zero(2, 2);
    internal(0, 1) = internal(1, 0) = u;
    sys.system = resonance::build_discrete_hamiltonian(levels, internal);
    sys.channels = {resonance::Wideband{1.0}};
    sys.coupling.W = Eigen::MatrixXd::Ones(2, 1);
    sys.coupling.alpha = std::sqrt(x / resonance::kPi);
    return sys;
}

// One level at e0 coupled to a unit-density wideband channel with width gamma
// = 2 pi rho (alpha W)^2.
inline resonance::OpenSystem single_level(double e0, double gamma) {
    resonance::OpenSystem sys;
    Eigen::VectorXd levels(1);
    levels << e0;
    sys.system =
        resonance::build_discrete_hamiltonian(levels, Eigen::MatrixXd::Zero(1, 1));
    sys.channels = {resonance::Wideband{1.0}};
    sys.coupling.W = Eigen::MatrixXd::Constant(1, 1, std::sqrt(gamma / (2.0 * resonance::kPi)));
    sys.coupling.alpha = 1.0;
    return sys;
}

// One level at e0 coupled to a semi-infinite chain (hopping 1, centered at 0)
// with coupling element w.
inline resonance::OpenSystem chain_level(double e0, double w) {
    resonance::OpenSystem sys;
    Eigen::VectorXd levels(1);
    levels << e0;
    sys.system =
        resonance::build_discrete_hamiltonian(levels, Eigen::MatrixXd::Zero(1, 1));
    sys.channels = {resonance::Chain{1.0, 0.0}};
    sys.coupling.W = Eigen::MatrixXd::Constant(1, 1, w);
    sys.coupling.alpha = 1.0;
    return sys;
}

inline Eigen::MatrixXcd random_complex_symmetric(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const resonance::Complex v(dist(rng), dist(rng));
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

// Random level spacings, internal couplings, and wideband coupling columns;
// every matrix entry stays O(1).
inline resonance::OpenSystem random_wideband(std::mt19937& rng, int n, int k) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd levels(n);
    for (int i = 0; i < n; ++i)
        levels[i] = 2.0 * dist(rng);
    Eigen::MatrixXd internal = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            internal(i, j) = internal(j, i) = 0.3 * dist(rng);

    resonance::OpenSystem sys;
    sys.system = resonance::build_discrete_hamiltonian(levels, internal);
    for (int c = 0; c < k; ++c)
        sys.channels.push_back(resonance::Wideband{1.0});
    sys.coupling.W.resize(n, k);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < k; ++c)
            sys.coupling.W(i, c) = 0.4 * dist(rng);
    sys.coupling.alpha = 1.0;
    return sys;
}

// Smallest pairwise eigenvalue distance, eigenvalues only.
inline double min_eigenvalue_gap(const Eigen::MatrixXcd& m) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    const auto& z = es.eigenvalues();
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < z.size(); ++a)
        for (Eigen::Index b = a + 1; b < z.size(); ++b)
            gap = std::min(gap, std::abs(z[a] - z[b]));
    return gap;
}

} // namespace fixtures
