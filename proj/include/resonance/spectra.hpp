#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "resonance/errors.hpp"
#include "resonance/model.hpp"

namespace resonance {

// One eigenpair of the effective Hamiltonian under c-product normalization
// phi^T phi = 1. a_norm is <phi|phi> >= 1, rigidity its reciprocal.
struct ResonanceState {
    Complex z;
    Eigen::VectorXcd phi;
    double a_norm = 1.0;
    double rigidity = 1.0;

    double energy() const { return z.real(); }
    double width() const { return -2.0 * z.imag() + 0.0; }
};

namespace detail {

inline void require_complex_symmetric(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("matrix must be square");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (m(i, j) != m(j, i))
                throw AsymmetryError("matrix is not complex symmetric");
}

inline void apply_sign_convention(Eigen::VectorXcd& phi) {
    Eigen::Index lead = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        const double a = std::abs(phi[i]);
        if (a > best) {
            best = a;
            lead = i;
        }
    }
    const Complex v = phi[lead];
    if (v.real() < 0.0 || (v.real() == 0.0 && v.imag() < 0.0))
        phi = -phi;
}

inline std::vector<int> spectral_order(const Eigen::VectorXcd& z) {
    std::vector<int> order(static_cast<std::size_t>(z.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (z[a].real() != z[b].real())
            return z[a].real() < z[b].real();
        return z[a].imag() < z[b].imag();
    });
    return order;
}

} // namespace detail

// Eigendecomposition of a complex symmetric matrix with biorthogonal
// (c-product) normalization. States come back sorted by ascending Re z, each
// with the sign convention that its largest-modulus component has Re > 0.
// Left eigenvectors are the complex conjugates of the right ones and are never
// computed separately. Throws EPDegenerate when an eigenvector is
// self-orthogonal to within 1e-6, i.e. at a branch point.
inline std::vector<ResonanceState> decompose(const Eigen::MatrixXcd& m) {
    detail::require_complex_symmetric(m);
    const Eigen::Index n = m.rows();

    Eigen::VectorXcd z(n);
    Eigen::MatrixXcd phi(n, n);

    const bool real_input = (m.imag().array() == 0.0).all();
    if (real_input) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
        if (es.info() != Eigen::Success)
            throw NotConverged("real symmetric eigensolver failed");
        z = es.eigenvalues().cast<Complex>();
        phi = es.eigenvectors().cast<Complex>();
    } else {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, true);
        if (es.info() != Eigen::Success)
            throw NotConverged("complex eigensolver failed");
        z = es.eigenvalues();
        phi = es.eigenvectors();

        for (Eigen::Index k = 0; k < n; ++k) {
            const Eigen::VectorXcd v = phi.col(k);
            const Complex s = v.transpose() * v;
            const double h = v.squaredNorm();
            if (std::abs(s) < 1e-6 * h) {
                Eigen::Index partner = k == 0 ? 1 : 0;
                for (Eigen::Index j = 0; j < n; ++j)
                    if (j != k && std::abs(z[j] - z[k]) < std::abs(z[partner] - z[k]))
                        partner = j;
                throw EPDegenerate("self-orthogonal eigenvector: coalescing pair", z[k],
                                   z[partner]);
            }
            phi.col(k) = v / std::sqrt(s);
        }

        // One or two Newton-Schulz sweeps push the c-product Gram matrix to the
        // identity when finite gaps leave the raw QR vectors slightly skew.
        for (int pass = 0; pass < 3; ++pass) {
            Eigen::MatrixXcd gram = phi.transpose() * phi;
            gram.diagonal().array() -= 1.0;
            const double err = gram.cwiseAbs().maxCoeff();
            if (err <= 1e-13 || err > 0.5)
                break;
            gram *= -0.5;
            gram.diagonal().array() += 1.0;
            phi = phi * gram;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            const Complex s = phi.col(k).transpose() * phi.col(k);
            phi.col(k) /= std::sqrt(s);
        }
    }

    const std::vector<int> order = detail::spectral_order(z);
    std::vector<ResonanceState> states;
    states.reserve(static_cast<std::size_t>(n));
    for (int idx : order) {
        ResonanceState st;
        st.z = z[idx];
        st.phi = phi.col(idx);
        detail::apply_sign_convention(st.phi);
        // Real orthonormal eigenvectors have <phi|phi> = phi^T phi = 1
        // identically; store the invariant, not its rounding noise.
        st.a_norm = real_input ? 1.0 : st.phi.squaredNorm();
        st.rigidity = 1.0 / st.a_norm;
        states.push_back(std::move(st));
    }
    return states;
}

inline std::vector<ResonanceState> eigendecompose(const EffectiveHamiltonian& h) {
    return decompose(h.matrix);
}

// Eigenvector norm diagnostics: A_lambda on the diagonal slot, the Hermitian
// overlaps <phi_lambda|phi_mu> off the diagonal.
struct PhaseRigidityReport {
    std::vector<double> a_norm;
    Eigen::MatrixXcd overlap;
};

inline PhaseRigidityReport phase_rigidity_report(const std::vector<ResonanceState>& states) {
    const auto n = static_cast<Eigen::Index>(states.size());
    PhaseRigidityReport report;
    report.a_norm.resize(states.size());
    report.overlap = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        report.a_norm[static_cast<std::size_t>(a)] =
            states[static_cast<std::size_t>(a)].a_norm;
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a == b)
                continue;
            report.overlap(a, b) = states[static_cast<std::size_t>(a)].phi.dot(
                states[static_cast<std::size_t>(b)].phi);
        }
    }
    return report;
}

struct FixedPointResult {
    double E_star = 0.0;
    double Gamma_star = 0.0;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

inline int pick_branch(const std::vector<ResonanceState>& states,
                       const Eigen::VectorXcd& tracker) {
    int best = 0;
    double best_overlap = -1.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const Complex o = states[k].phi.transpose() * tracker;
        const double mag = std::abs(o);
        if (mag > best_overlap) {
            best_overlap = mag;
            best = static_cast<int>(k);
        }
    }
    if (best_overlap < 0.5)
        throw BranchLost("branch tracking overlap " + std::to_string(best_overlap) +
                         " below 0.5");
    return best;
}

} // namespace detail

// Self-consistent resonance energy: damped iteration E <- (1-beta)E + beta*Re z
// with beta = 0.5, where the branch is re-identified each step by maximal
// |phi^T tracker|. Each step probes the undamped candidate energy first, so an
// energy-independent spectrum converges in a single iteration. A fixed point at
// which every channel is closed is a bound state, reported converged = false.
inline FixedPointResult solve_fixed_point(const OpenSystem& sys, double E0,
                                          Eigen::VectorXcd tracker, int max_iterations = 200) {
    if (!std::isfinite(E0))
        throw InvalidArgument("fixed-point seed energy must be finite");
    if (tracker.size() != sys.levels())
        throw DimensionMismatch("tracker vector length must match the level count");
    if (max_iterations < 1)
        throw InvalidArgument("max_iterations must be positive");

    double E = E0;
    FixedPointResult best;
    best.E_star = E0;
    for (int it = 1; it <= max_iterations; ++it) {
        auto states = eigendecompose(sys.effective_hamiltonian(E));
        int lam = detail::pick_branch(states, tracker);
        tracker = states[static_cast<std::size_t>(lam)].phi;
        const double candidate = states[static_cast<std::size_t>(lam)].z.real();

        auto probe = eigendecompose(sys.effective_hamiltonian(candidate));
        lam = detail::pick_branch(probe, tracker);
        tracker = probe[static_cast<std::size_t>(lam)].phi;

        best.E_star = candidate;
        best.Gamma_star = probe[static_cast<std::size_t>(lam)].width();
        best.iterations = it;

        const double residual =
            std::abs(probe[static_cast<std::size_t>(lam)].z.real() - candidate);
        if (residual <= 1e-12 * std::max(1.0, std::abs(candidate))) {
            best.converged = sys.total_density(candidate) > 0.0;
            return best;
        }
        E = 0.5 * E + 0.5 * candidate;
    }
    best.converged = false;
    return best;
}

inline FixedPointResult solve_fixed_point(const OpenSystem& sys, double E0, int state_index,
                                          int max_iterations = 200) {
    auto states = eigendecompose(sys.effective_hamiltonian(E0));
    if (state_index < 0 || state_index >= static_cast<int>(states.size()))
        throw InvalidArgument("fixed-point state index out of range");
    return solve_fixed_point(sys, E0, states[static_cast<std::size_t>(state_index)].phi,
                             max_iterations);
}

// Eigenvalue trajectories over a coupling-scale grid. Entry lambda at step n
// continues entry lambda at step n-1; continuity matching is greedy by
// descending c-product overlap |phi_prev^T phi_new|. A step whose weakest
// matched overlap drops below 0.5 is marked unmatched rather than rejected.
struct Trajectory {
    std::vector<double> parameters;
    std::vector<std::vector<ResonanceState>> steps;
    std::vector<bool> matched;
};

inline Trajectory sweep_eigenvalues(const OpenSystem& sys, double E_probe,
                                    const std::vector<double>& alpha_grid) {
    if (alpha_grid.empty())
        throw InvalidArgument("alpha grid must not be empty");
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        if (alpha_grid[i] < 0.0)
            throw InvalidArgument("alpha grid values must be nonnegative");
        if (i > 0 && alpha_grid[i] <= alpha_grid[i - 1])
            throw InvalidArgument("alpha grid must be strictly increasing");
    }

    Trajectory traj;
    traj.parameters = alpha_grid;
    OpenSystem scan = sys;
    for (double alpha : alpha_grid) {
        scan.coupling.alpha = alpha;
        auto states = eigendecompose(scan.effective_hamiltonian(E_probe));
        if (traj.steps.empty()) {
            traj.steps.push_back(std::move(states));
            traj.matched.push_back(true);
            continue;
        }

        const auto& prev = traj.steps.back();
        const std::size_t n = states.size();
        Eigen::MatrixXd overlap(n, n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t m = 0; m < n; ++m) {
                const Complex o = prev[k].phi.transpose() * states[m].phi;
                overlap(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) =
                    std::abs(o);
            }

        std::vector<int> assignment(n, -1);
        std::vector<bool> used_prev(n, false), used_new(n, false);
        double weakest = std::numeric_limits<double>::infinity();
        for (std::size_t pass = 0; pass < n; ++pass) {
            double top = -1.0;
            std::size_t pk = 0, pm = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (used_prev[k])
                    continue;
                for (std::size_t m = 0; m < n; ++m) {
                    if (used_new[m])
                        continue;
                    const double o =
                        overlap(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
                    if (o > top) {
                        top = o;
                        pk = k;
                        pm = m;
                    }
                }
            }
            assignment[pk] = static_cast<int>(pm);
            used_prev[pk] = true;
            used_new[pm] = true;
            weakest = std::min(weakest, top);
        }

        std::vector<ResonanceState> aligned(n);
        for (std::size_t k = 0; k < n; ++k)
            aligned[k] = std::move(states[static_cast<std::size_t>(assignment[k])]);
        traj.steps.push_back(std::move(aligned));
        traj.matched.push_back(weakest >= 0.5);
    }
    return traj;
}

// A scan parameter for the exceptional-point search: either the coupling scale
// alpha itself, the combination pi*alpha^2 (the natural strength coordinate of
// rank-one coupling), or one off-diagonal internal coupling entry.
struct EPParameter {
    enum class Kind { Alpha, PiAlphaSq, InternalCoupling };
    Kind kind = Kind::Alpha;
    int i = 0;
    int j = 1;
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

struct EPResult {
    double param_a = 0.0;
    double param_b = 0.0;
    Complex z;
    double residual = std::numeric_limits<double>::infinity();
    double self_orthogonality = 1.0;
    bool found = false;
};

namespace detail {

inline void apply_ep_parameter(OpenSystem& sys, const EPParameter& p, double value) {
    switch (p.kind) {
    case EPParameter::Kind::Alpha:
        sys.coupling.alpha = value;
        break;
    case EPParameter::Kind::PiAlphaSq:
        sys.coupling.alpha = std::sqrt(value / kPi);
        break;
    case EPParameter::Kind::InternalCoupling:
        sys.system.internal_coupling(p.i, p.j) = value;
        sys.system.internal_coupling(p.j, p.i) = value;
        break;
    }
}

inline void validate_ep_parameter(const OpenSystem& sys, const EPParameter& p) {
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || p.lo > p.hi)
        throw InvalidArgument("parameter box must be finite with lo <= hi");
    if ((p.kind == EPParameter::Kind::Alpha || p.kind == EPParameter::Kind::PiAlphaSq) &&
        p.lo < 0.0)
        throw InvalidArgument("coupling-strength parameters require a nonnegative box");
    if (p.kind == EPParameter::Kind::InternalCoupling) {
        if (p.i == p.j)
            throw InvalidArgument("internal coupling parameter must be off-diagonal");
        if (p.i < 0 || p.j < 0 || p.i >= sys.levels() || p.j >= sys.levels())
            throw InvalidArgument("internal coupling parameter index out of range");
    }
}

// Squared minimal eigenvalue gap; eigenvalues only, so the scan can sit right
// on top of a degeneracy without tripping the eigenvector guard.
inline double min_gap_squared(const OpenSystem& base, const EPParameter& pa,
                              const EPParameter& pb, double a, double b, double E_probe) {
    OpenSystem sys = base;
    apply_ep_parameter(sys, pa, a);
    apply_ep_parameter(sys, pb, b);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sys.effective_hamiltonian(E_probe).matrix,
                                                   false);
    const auto& z = es.eigenvalues();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < z.size(); ++k)
        for (Eigen::Index m = k + 1; m < z.size(); ++m)
            best = std::min(best, std::norm(z[k] - z[m]));
    return best;
}

} // namespace detail

// Two-stage search for a coalescence of two eigenvalues inside a parameter box:
// a coarse grid scan of the minimal squared gap followed by a derivative-free
// simplex refinement clamped to the box. Success means the refined gap fell
// below 1e-6 of the eigenvalue scale; otherwise the best candidate comes back
// with found = false.
inline EPResult locate_exceptional_point(const OpenSystem& base, const EPParameter& pa,
                                         const EPParameter& pb, double E_probe,
                                         int grid = 41) {
    detail::validate_ep_parameter(base, pa);
    detail::validate_ep_parameter(base, pb);
    if (base.levels() < 2)
        throw InvalidArgument("exceptional-point search needs at least two levels");
    if (grid < 2)
        throw InvalidArgument("grid must be at least 2");

    const auto objective = [&](double a, double b) {
        return detail::min_gap_squared(base, pa, pb, a, b, E_probe);
    };

    const auto grid_values = [&](const EPParameter& p) {
        std::vector<double> vals;
        if (p.lo == p.hi) {
            vals.push_back(p.lo);
            return vals;
        }
        vals.reserve(static_cast<std::size_t>(grid));
        for (int g = 0; g < grid; ++g)
            vals.push_back(p.lo + (p.hi - p.lo) * g / (grid - 1));
        return vals;
    };

    double best_a = pa.lo, best_b = pb.lo;
    double best_d = std::numeric_limits<double>::infinity();
    for (double a : grid_values(pa)) {
        for (double b : grid_values(pb)) {
            const double d = objective(a, b);
            if (d < best_d) {
                best_d = d;
                best_a = a;
                best_b = b;
            }
        }
    }

    // Nelder-Mead over the free box dimensions, vertices clamped to the box.
    const bool free_a = pa.lo < pa.hi;
    const bool free_b = pb.lo < pb.hi;
    const int dim = (free_a ? 1 : 0) + (free_b ? 1 : 0);
    if (dim > 0) {
        const auto clamp = [](double v, double lo, double hi) {
            return std::min(hi, std::max(lo, v));
        };
        const auto unpack = [&](const std::vector<double>& x, double& a, double& b) {
            std::size_t idx = 0;
            a = free_a ? clamp(x[idx++], pa.lo, pa.hi) : pa.lo;
            b = free_b ? clamp(x[idx], pb.lo, pb.hi) : pb.lo;
        };
        const auto eval = [&](const std::vector<double>& x) {
            double a, b;
            unpack(x, a, b);
            return objective(a, b);
        };

        std::vector<std::vector<double>> simplex;
        std::vector<double> seed;
        if (free_a)
            seed.push_back(best_a);
        if (free_b)
            seed.push_back(best_b);
        simplex.push_back(seed);
        const double step_a = (pa.hi - pa.lo) / (grid - 1);
        const double step_b = (pb.hi - pb.lo) / (grid - 1);
        for (int d = 0; d < dim; ++d) {
            auto v = seed;
            const double h = (free_a && d == 0) ? step_a : step_b;
            v[static_cast<std::size_t>(d)] += h;
            simplex.push_back(v);
        }
        std::vector<double> f(simplex.size());
        for (std::size_t k = 0; k < simplex.size(); ++k)
            f[k] = eval(simplex[k]);

        const double span = std::max({1.0, std::abs(pa.lo), std::abs(pa.hi), std::abs(pb.lo),
                                      std::abs(pb.hi)});
        for (int iter = 0; iter < 600; ++iter) {
            std::vector<std::size_t> idx(simplex.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
                return f[x] < f[y];
            });

            double diam = 0.0;
            for (std::size_t k = 1; k < simplex.size(); ++k)
                for (int d = 0; d < dim; ++d)
                    diam = std::max(diam, std::abs(simplex[idx[k]][static_cast<std::size_t>(d)] -
                                                   simplex[idx[0]][static_cast<std::size_t>(d)]));
            if (diam <= 1e-15 * span)
                break;

            const std::size_t worst = idx.back();
            std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
            for (std::size_t k = 0; k + 1 < idx.size(); ++k)
                for (int d = 0; d < dim; ++d)
                    centroid[static_cast<std::size_t>(d)] +=
                        simplex[idx[k]][static_cast<std::size_t>(d)] / dim;

            const auto blend = [&](double t) {
                std::vector<double> v(static_cast<std::size_t>(dim));
                for (int d = 0; d < dim; ++d)
                    v[static_cast<std::size_t>(d)] =
                        centroid[static_cast<std::size_t>(d)] +
                        t * (centroid[static_cast<std::size_t>(d)] -
                             simplex[worst][static_cast<std::size_t>(d)]);
                return v;
            };

            auto reflected = blend(1.0);
            const double fr = eval(reflected);
            if (fr < f[idx[0]]) {
                auto expanded = blend(2.0);
                const double fe = eval(expanded);
                if (fe < fr) {
                    simplex[worst] = expanded;
                    f[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    f[worst] = fr;
                }
            } else if (fr < f[idx[idx.size() - 2]]) {
                simplex[worst] = reflected;
                f[worst] = fr;
            } else {
                auto contracted = blend(-0.5);
                const double fc = eval(contracted);
                if (fc < f[worst]) {
                    simplex[worst] = contracted;
                    f[worst] = fc;
                } else {
                    for (std::size_t k = 1; k < idx.size(); ++k) {
                        for (int d = 0; d < dim; ++d)
                            simplex[idx[k]][static_cast<std::size_t>(d)] =
                                simplex[idx[0]][static_cast<std::size_t>(d)] +
                                0.5 * (simplex[idx[k]][static_cast<std::size_t>(d)] -
                                       simplex[idx[0]][static_cast<std::size_t>(d)]);
                        f[idx[k]] = eval(simplex[idx[k]]);
                    }
                }
            }
        }

        std::size_t winner = 0;
        for (std::size_t k = 1; k < simplex.size(); ++k)
            if (f[k] < f[winner])
                winner = k;
        unpack(simplex[winner], best_a, best_b);
        best_d = f[winner];
    }

    OpenSystem sys = base;
    detail::apply_ep_parameter(sys, pa, best_a);
    detail::apply_ep_parameter(sys, pb, best_b);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sys.effective_hamiltonian(E_probe).matrix,
                                                   true);
    const auto& z = es.eigenvalues();
    Eigen::Index zk = 0, zm = 1;
    double gap = std::numeric_limits<double>::infinity();
    double z_scale = 1.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        z_scale = std::max(z_scale, std::abs(z[k]));
        for (Eigen::Index m = k + 1; m < z.size(); ++m)
            if (std::abs(z[k] - z[m]) < gap) {
                gap = std::abs(z[k] - z[m]);
                zk = k;
                zm = m;
            }
    }

    EPResult result;
    result.param_a = best_a;
    result.param_b = best_b;
    result.z = (z[zk] + z[zm]) / 2.0;
    result.residual = gap;
    result.self_orthogonality = 1.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        const Eigen::VectorXcd v = es.eigenvectors().col(k);
        const Complex s = v.transpose() * v;
        result.self_orthogonality =
            std::min(result.self_orthogonality, std::abs(s) / v.squaredNorm());
    }
    result.found = result.residual <= 1e-6 * z_scale;
    return result;
}

} // namespace resonance
