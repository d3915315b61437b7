#pragma once

// Shared test utilities: seeded random states, distances, synthetic data.

#include <random>

#include <Eigen/Dense>

#include "qdpair/quantum.hpp"

namespace testsup {

using qdpair::DensityMatrix;

/// Hilbert-Schmidt random density matrix: rho = G G^dag / Tr from a complex
/// Ginibre draw.
inline DensityMatrix random_density_hs(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix4cd g;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = qdpair::complexd(n(rng), n(rng));
    DensityMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline qdpair::LocalUnitaryParams random_local_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    return {u(rng), u(rng), u(rng), u(rng)};
}

/// Haar-ish random single-qubit unitary (enough for invariance tests).
inline Eigen::Matrix2cd random_su2(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix2cd m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = qdpair::complexd(n(rng), n(rng));
    const Eigen::HouseholderQR<Eigen::Matrix2cd> qr(m);
    Eigen::Matrix2cd q = qr.householderQ();
    Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < 2; ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
    return q;
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(a - b, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Noiseless channel counts n_c = scale * Tr[rho P_c].
inline std::array<double, qdpair::kNumChannels> exact_counts(
    const DensityMatrix& rho, double scale) {
    std::array<double, qdpair::kNumChannels> n{};
    const auto& projs = qdpair::all_projectors();
    for (int c = 0; c < qdpair::kNumChannels; ++c)
        n[c] = scale * std::max(0.0, std::real((projs[c] * rho).trace()));
    return n;
}

inline std::array<double, qdpair::kNumChannels> poisson_counts(
    const std::array<double, qdpair::kNumChannels>& mean,
    std::mt19937_64& rng) {
    std::array<double, qdpair::kNumChannels> n{};
    for (int c = 0; c < qdpair::kNumChannels; ++c) {
        if (mean[c] <= 0.0) continue;
        std::poisson_distribution<long long> p(mean[c]);
        n[c] = static_cast<double>(p(rng));
    }
    return n;
}

}  // namespace testsup
