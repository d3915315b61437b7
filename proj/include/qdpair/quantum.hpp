#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "qdpair/constants.hpp"
#include "qdpair/errors.hpp"
#include "qdpair/polarization.hpp"

namespace qdpair {

using TwoQubitState = Eigen::Vector4cd;   // amplitudes over (HH, HV, VH, VV)
using DensityMatrix = Eigen::Matrix4cd;   // Hermitian, PSD, unit trace

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueTol = 1e-9;

enum class Bell { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline TwoQubitState bell_state(Bell kind) {
    const double s = 1.0 / std::sqrt(2.0);
    TwoQubitState v = TwoQubitState::Zero();
    switch (kind) {
        case Bell::PhiPlus:  v(0) = s; v(3) = s; break;
        case Bell::PhiMinus: v(0) = s; v(3) = -s; break;
        case Bell::PsiPlus:  v(1) = s; v(2) = s; break;
        case Bell::PsiMinus: v(1) = s; v(2) = -s; break;
    }
    return v;
}

/// Two-photon state emitted by a cascade with fine-structure splitting
/// `fss_uev` at exciton emission delay `tau_ns`:
///   (|HH> + exp(i S tau / hbar) |VV>) / sqrt2.
inline TwoQubitState cascade_state(double tau_ns, double fss_uev) {
    const double s = 1.0 / std::sqrt(2.0);
    TwoQubitState v = TwoQubitState::Zero();
    v(0) = s;
    v(3) = s * std::exp(complexd(0.0, fss_phase(fss_uev, tau_ns)));
    return v;
}

inline DensityMatrix pure_density(const TwoQubitState& psi) {
    return psi * psi.adjoint();
}

inline DensityMatrix maximally_mixed() {
    return DensityMatrix::Identity() * 0.25;
}

/// Checks the DensityMatrix invariants; throws invalid_state_error outside
/// tolerance.
inline void validate_density(const DensityMatrix& rho) {
    if (!rho.allFinite())
        throw invalid_state_error("density matrix has non-finite entries");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
        throw invalid_state_error("density matrix is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > kTraceTol ||
        std::abs(rho.trace().imag()) > kTraceTol)
        throw invalid_state_error("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(0.5 * (rho + rho.adjoint()),
                                                    Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEigenvalueTol)
        throw invalid_state_error("density matrix has a negative eigenvalue");
}

/// Wootters concurrence. Eigenvalues of rho (sy x sy) rho* (sy x sy) are
/// real and non-negative for physical input; their square roots lambda_i in
/// decreasing order give C = max(0, l1 - l2 - l3 - l4).
inline double concurrence(const DensityMatrix& rho) {
    validate_density(rho);
    static const Eigen::Matrix4d spin_flip = [] {
        Eigen::Matrix4d f = Eigen::Matrix4d::Zero();
        f(0, 3) = -1.0; f(1, 2) = 1.0; f(2, 1) = 1.0; f(3, 0) = -1.0;
        return f;
    }();
    const DensityMatrix m = rho * spin_flip * rho.conjugate() * spin_flip;
    Eigen::ComplexEigenSolver<DensityMatrix> es(m, false);
    Eigen::Vector4d lams;
    for (int k = 0; k < 4; ++k)
        lams(k) = std::sqrt(std::max(0.0, es.eigenvalues()(k).real()));
    std::sort(lams.data(), lams.data() + 4, std::greater<double>());
    return std::max(0.0, lams(0) - lams(1) - lams(2) - lams(3));
}

/// <psi| rho |psi>.
inline double fidelity_pure(const DensityMatrix& rho, const TwoQubitState& psi) {
    return std::real(psi.dot(rho * psi));
}

/// Fidelity to the closest maximally entangled pure state (fully entangled
/// fraction). Maximally entangled states are the real unit combinations of
/// the magic basis, so the maximum of <phi|rho|phi> is the largest
/// eigenvalue of Re(rho) expressed in that basis.
inline double max_entangled_fidelity(const DensityMatrix& rho) {
    static const Eigen::Matrix4cd magic = [] {
        const complexd i(0.0, 1.0);
        const double s = 1.0 / std::sqrt(2.0);
        Eigen::Matrix4cd m;  // columns: magic basis kets over (HH,HV,VH,VV)
        m.col(0) = s * (Eigen::Vector4cd() << 1, 0, 0, 1).finished();
        m.col(1) = s * (Eigen::Vector4cd() << i, 0, 0, -i).finished();
        m.col(2) = s * (Eigen::Vector4cd() << 0, i, i, 0).finished();
        m.col(3) = s * (Eigen::Vector4cd() << 0, 1, -1, 0).finished();
        return m;
    }();
    const Eigen::Matrix4cd in_magic = magic.adjoint() * rho * magic;
    const Eigen::Matrix4d sym =
        0.5 * (in_magic.real() + in_magic.real().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// (U1 x U2) rho (U1 x U2)^dag with the general-waveplate parameterization.
inline DensityMatrix local_rotate(const DensityMatrix& rho,
                                  const LocalUnitaryParams& u) {
    const Eigen::Matrix4cd uu = local_unitary(u);
    return uu * rho * uu.adjoint();
}

// --- entropies (all in bits) ------------------------------------------------

inline constexpr double kEigenClip = 1e-14;

/// Von Neumann entropy -Tr[rho log2 rho]; eigenvalues below kEigenClip are
/// treated as exact zeros.
template <typename Derived>
double entropy_bits(const Eigen::MatrixBase<Derived>& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.derived(),
                                                       Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
        const double p = es.eigenvalues()(k);
        if (p > kEigenClip) h -= p * std::log2(p);
    }
    return h;
}

/// Quantum relative entropy D(rho || sigma) = Tr[rho log2 rho - rho log2
/// sigma] in bits. Requires support(rho) within support(sigma); violation
/// beyond tolerance raises std::domain_error.
inline double quantum_rel_entropy(const Eigen::MatrixXcd& rho,
                                  const Eigen::MatrixXcd& sigma,
                                  double support_tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> er(rho);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sigma);

    double tr_rho_log_rho = 0.0;
    for (int k = 0; k < er.eigenvalues().size(); ++k) {
        const double p = er.eigenvalues()(k);
        if (p > kEigenClip) tr_rho_log_rho += p * std::log2(p);
    }

    // Tr[rho log2 sigma] via sigma's eigenbasis; weight on sigma's null
    // space means the support condition fails.
    double tr_rho_log_sigma = 0.0;
    double null_weight = 0.0;
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
        const double q = es.eigenvalues()(k);
        const double w =
            std::real(es.eigenvectors().col(k).dot(rho * es.eigenvectors().col(k)));
        if (q > kEigenClip)
            tr_rho_log_sigma += w * std::log2(q);
        else
            null_weight += std::max(0.0, w);
    }
    if (null_weight > support_tol)
        throw std::domain_error("relative entropy: support(rho) not contained "
                                "in support(sigma)");
    return tr_rho_log_rho - tr_rho_log_sigma;
}

}  // namespace qdpair
