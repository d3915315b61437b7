#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "qdpair/errors.hpp"
#include "qdpair/quantum.hpp"
#include "qdpair/tomography.hpp"

namespace qdpair::qkd {

/// Six-state protocol settings. The key basis is Z = {H, V}; alternative
/// key maps are applied by rotating the state with local_rotate before
/// evaluation.
struct SixStateConfig {
    double p_z_alice = std::sqrt(0.99);  // probability of choosing Z
    double p_z_bob = std::sqrt(0.99);
    double error_correction_efficiency = 1.0;  // f_EC, Shannon limit

    double sifting_factor() const { return p_z_alice * p_z_bob; }

    void validate() const {
        if (p_z_alice <= 0.0 || p_z_alice > 1.0 || p_z_bob <= 0.0 ||
            p_z_bob > 1.0)
            throw config_error("basis probabilities must be in (0, 1]");
        if (error_correction_efficiency < 1.0)
            throw config_error("f_EC must be >= 1");
    }
};

/// Joint Z-basis outcome distribution p(z_A, z_B); rows are Alice.
inline Eigen::Matrix2d z_joint_distribution(const DensityMatrix& rho) {
    Eigen::Matrix2d p;
    // basis order (HH, HV, VH, VV): diagonal entries are the four joint
    // rectilinear outcomes
    p(0, 0) = std::max(0.0, rho(0, 0).real());
    p(0, 1) = std::max(0.0, rho(1, 1).real());
    p(1, 0) = std::max(0.0, rho(2, 2).real());
    p(1, 1) = std::max(0.0, rho(3, 3).real());
    return p;
}

namespace detail {
inline double plog2p(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }
}

/// Error-correction cost per sifted coincidence:
/// f_EC * H(Z_A | Z_B) evaluated on the joint key-basis distribution.
inline double delta_leak(const DensityMatrix& rho, const SixStateConfig& cfg = {}) {
    cfg.validate();
    const Eigen::Matrix2d p = z_joint_distribution(rho);
    double h_joint = 0.0, h_bob = 0.0;
    for (int b = 0; b < 2; ++b) {
        const double pb = p(0, b) + p(1, b);
        h_bob -= detail::plog2p(pb);
        for (int a = 0; a < 2; ++a) h_joint -= detail::plog2p(p(a, b));
    }
    return cfg.error_correction_efficiency * (h_joint - h_bob);
}

/// Key-map isometry output G(rho) = V rho V^dag on key x (A x B), with
/// V = sum_z |z> (x) (P_z (x) I). 8x8.
inline Eigen::MatrixXcd g_map(const DensityMatrix& rho) {
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(8, 4);
    // P_H block goes to key 0 rows, P_V block to key 1 rows.
    v.block<2, 2>(0, 0) = Eigen::Matrix2cd::Identity();  // rows HH,HV of key 0
    v.block<2, 2>(6, 2) = Eigen::Matrix2cd::Identity();  // rows VH,VV of key 1
    return v * rho * v.adjoint();
}

/// Pinching channel on the key register: zeroes the blocks that are
/// off-diagonal in the key index.
inline Eigen::MatrixXcd z_pinch(const Eigen::MatrixXcd& g) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(8, 8);
    out.block<4, 4>(0, 0) = g.block<4, 4>(0, 0);
    out.block<4, 4>(4, 4) = g.block<4, 4>(4, 4);
    return out;
}

/// Secret bits per coincidence for the six-state protocol with Z-basis key
/// map, asymptotic and tomographically complete:
///   r = p_sift * max(0, D(G(rho) || Z(G(rho))) - delta_leak)
/// evaluated by eigendecomposition of the 8x8 operators.
inline double keyrate_objective(const DensityMatrix& rho,
                                const SixStateConfig& cfg = {}) {
    cfg.validate();
    validate_density(rho);
    const Eigen::MatrixXcd g = g_map(rho);
    const Eigen::MatrixXcd zg = z_pinch(g);
    const double d = quantum_rel_entropy(g, zg);
    const double r = d - delta_leak(rho, cfg);
    return cfg.sifting_factor() * std::max(0.0, r);
}

struct KeyRateCurve {
    std::vector<tomo::CurvePoint> entries;  // (tau_ps, r bits/coincidence, N)
    double pulse_averaged_rate = 0.0;       // R, coincidence-weighted
    LocalUnitaryParams basis;
};

/// Per-bin key rates r(tau) = objective(rotate(rho(tau), basis)) and their
/// lifetime-weighted aggregate R. Bins outside [tau_min_ps, tau_max_ps] are
/// excluded from both the curve and the average.
inline KeyRateCurve time_resolved_keyrate(
    const tomo::TimeBinnedStates& states, const SixStateConfig& cfg = {},
    const LocalUnitaryParams& basis = {},
    double tau_min_ps = -std::numeric_limits<double>::infinity(),
    double tau_max_ps = std::numeric_limits<double>::infinity()) {
    cfg.validate();
    KeyRateCurve out;
    out.basis = basis.canonical();
    double num = 0.0, den = 0.0;
    for (const auto& e : states.entries) {
        if (e.tau_center_ps < tau_min_ps || e.tau_center_ps > tau_max_ps)
            continue;
        const double r = keyrate_objective(local_rotate(e.rho, basis), cfg);
        out.entries.push_back({e.tau_center_ps, r, e.n_tau});
        num += e.n_tau * r;
        den += e.n_tau;
    }
    out.pulse_averaged_rate = den > 0.0 ? num / den : 0.0;
    return out;
}

/// One global key-map basis maximizing R, found with the tomography basis
/// search; returns the basis and its curve.
inline std::pair<LocalUnitaryParams, KeyRateCurve> optimize_keyrate_basis(
    const tomo::TimeBinnedStates& states, const SixStateConfig& cfg = {},
    const tomo::BasisSearchOptions& opts = {}) {
    cfg.validate();
    auto [basis, value] = tomo::optimize_local_basis(
        states, [&](const DensityMatrix& rho) { return keyrate_objective(rho, cfg); },
        opts);
    (void)value;
    return {basis, time_resolved_keyrate(states, cfg, basis)};
}

}  // namespace qdpair::qkd
