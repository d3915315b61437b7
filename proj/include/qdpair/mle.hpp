#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "qdpair/errors.hpp"
#include "qdpair/polarization.hpp"
#include "qdpair/quantum.hpp"

namespace qdpair::tomo {

struct MleConfig {
    int max_iterations = 5000;
    double tolerance = 1e-10;  // relative log-likelihood improvement
    enum class Likelihood { Poisson, Gaussian } likelihood = Likelihood::Poisson;
};

struct MleResult {
    DensityMatrix rho = maximally_mixed();
    bool converged = false;
    int iterations = 0;
    double log_likelihood = 0.0;
};

namespace detail {

// Physicality is enforced by the factorization rho = T^dag T / Tr[T^dag T]
// with T lower triangular, real diagonal: 16 real parameters.
inline Eigen::Matrix4cd t_from_params(const Eigen::Matrix<double, 16, 1>& x) {
    Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
    for (int d = 0; d < 4; ++d) t(d, d) = x(d);
    int k = 4;
    for (int r = 1; r < 4; ++r)
        for (int c = 0; c < r; ++c) {
            t(r, c) = complexd(x(k), x(k + 1));
            k += 2;
        }
    return t;
}

inline DensityMatrix rho_from_params(const Eigen::Matrix<double, 16, 1>& x,
                                     double* norm_out = nullptr) {
    const Eigen::Matrix4cd t = t_from_params(x);
    DensityMatrix rho = t.adjoint() * t;
    const double n = rho.trace().real();
    if (norm_out) *norm_out = n;
    return rho / n;
}

struct LikelihoodModel {
    std::array<double, kNumChannels> counts{};
    std::array<double, 9> group_totals{};
    MleConfig::Likelihood kind = MleConfig::Likelihood::Poisson;

    void init(const std::array<double, kNumChannels>& n) {
        counts = n;
        group_totals.fill(0.0);
        for (int c = 0; c < kNumChannels; ++c)
            group_totals[setting_group(c)] += counts[c];
    }

    // Channel probabilities Tr[rho P_c], grouped totals for the
    // per-setting normalization.
    static void probabilities(const DensityMatrix& rho,
                              std::array<double, kNumChannels>& p,
                              std::array<double, 9>& pg) {
        const auto& projs = all_projectors();
        pg.fill(0.0);
        for (int c = 0; c < kNumChannels; ++c) {
            p[c] = std::max(std::real((projs[c] * rho).trace()), 0.0);
            pg[setting_group(c)] += p[c];
        }
    }

    double log_likelihood(const DensityMatrix& rho) const {
        std::array<double, kNumChannels> p;
        std::array<double, 9> pg;
        probabilities(rho, p, pg);
        double ll = 0.0;
        for (int c = 0; c < kNumChannels; ++c) {
            const int g = setting_group(c);
            if (group_totals[g] <= 0.0) continue;
            const double q = std::max(p[c] / std::max(pg[g], 1e-300), 1e-300);
            if (kind == MleConfig::Likelihood::Poisson) {
                if (counts[c] > 0.0) ll += counts[c] * std::log(q);
            } else {
                const double mu = group_totals[g] * q;
                const double sig2 = std::max(counts[c], 1.0);
                ll -= 0.5 * (counts[c] - mu) * (counts[c] - mu) / sig2;
            }
        }
        return ll;
    }

    // dLL/drho as a Hermitian matrix.
    DensityMatrix gradient_rho(const DensityMatrix& rho) const {
        std::array<double, kNumChannels> p;
        std::array<double, 9> pg;
        probabilities(rho, p, pg);
        const auto& projs = all_projectors();
        DensityMatrix g = DensityMatrix::Zero();
        for (int c = 0; c < kNumChannels; ++c) {
            const int grp = setting_group(c);
            if (group_totals[grp] <= 0.0) continue;
            const double pgrp = std::max(pg[grp], 1e-300);
            if (kind == MleConfig::Likelihood::Poisson) {
                if (counts[c] > 0.0)
                    g += counts[c] * (projs[c] / std::max(p[c], 1e-300));
                g -= counts[c] * group_projector(grp) / pgrp;
            } else {
                const double q = p[c] / pgrp;
                const double mu = group_totals[grp] * q;
                const double sig2 = std::max(counts[c], 1.0);
                const double w = (counts[c] - mu) / sig2 * group_totals[grp];
                g += w * (projs[c] / pgrp -
                          p[c] * group_projector(grp) / (pgrp * pgrp));
            }
        }
        return 0.5 * (g + g.adjoint());
    }

    static const DensityMatrix& group_projector(int g) {
        static const std::array<DensityMatrix, 9> sums = [] {
            std::array<DensityMatrix, 9> s;
            for (auto& m : s) m = DensityMatrix::Zero();
            for (int c = 0; c < kNumChannels; ++c)
                s[setting_group(c)] += all_projectors()[c];
            return s;
        }();
        return sums[g];
    }
};

// Chain rule through rho = T^dag T / N: for Hermitian G = dLL/drho the
// Wirtinger gradient wrt T is T (G - Tr[G rho] I) / N; real parameters pick
// up a factor 2 (diagonal entries keep only the real part).
inline Eigen::Matrix<double, 16, 1> gradient_params(
    const Eigen::Matrix<double, 16, 1>& x, const DensityMatrix& g_rho) {
    const Eigen::Matrix4cd t = t_from_params(x);
    DensityMatrix rho = t.adjoint() * t;
    const double n = rho.trace().real();
    rho /= n;
    const Eigen::Matrix4cd a =
        (g_rho - std::real((g_rho * rho).trace()) *
                     Eigen::Matrix4cd::Identity()) / n;
    const Eigen::Matrix4cd ta = t * a;
    Eigen::Matrix<double, 16, 1> grad;
    for (int d = 0; d < 4; ++d) grad(d) = 2.0 * ta(d, d).real();
    int k = 4;
    for (int r = 1; r < 4; ++r)
        for (int c = 0; c < r; ++c) {
            grad(k) = 2.0 * ta(r, c).real();
            grad(k + 1) = 2.0 * ta(r, c).imag();
            k += 2;
        }
    return grad;
}

}  // namespace detail

/// Maximum-likelihood reconstruction of one density matrix from 36
/// aggregated channel counts. Deterministic: Polak-Ribiere ascent with
/// backtracking line search from rho = I/4; stops when the relative
/// log-likelihood improvement drops below cfg.tolerance.
inline MleResult reconstruct_bin_detailed(
    const std::array<double, kNumChannels>& counts, const MleConfig& cfg) {
    if (cfg.max_iterations <= 0 || cfg.tolerance <= 0.0)
        throw config_error("MLE iterations and tolerance must be positive");
    double total = 0.0;
    for (double c : counts) {
        if (c < 0.0 || !std::isfinite(c))
            throw std::invalid_argument("counts must be finite and >= 0");
        total += c;
    }
    if (total <= 0.0)
        throw degenerate_data_error("all 36 channel counts are zero");

    detail::LikelihoodModel model;
    model.kind = cfg.likelihood;
    model.init(counts);

    Eigen::Matrix<double, 16, 1> x = Eigen::Matrix<double, 16, 1>::Zero();
    for (int d = 0; d < 4; ++d) x(d) = 0.5;  // T = I/2 -> rho = I/4

    double ll = model.log_likelihood(detail::rho_from_params(x));
    Eigen::Matrix<double, 16, 1> grad =
        detail::gradient_params(x, model.gradient_rho(detail::rho_from_params(x)));
    Eigen::Matrix<double, 16, 1> dir = grad;
    double step = 1.0 / std::max(grad.norm(), 1e-12);

    MleResult res;
    res.iterations = 0;
    bool converged = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (dir.dot(grad) <= 0.0) dir = grad;  // reset to steepest ascent
        const double slope = dir.dot(grad);
        double alpha = step;
        double ll_new = ll;
        Eigen::Matrix<double, 16, 1> x_new = x;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            x_new = x + alpha * dir;
            ll_new = model.log_likelihood(detail::rho_from_params(x_new));
            if (std::isfinite(ll_new) && ll_new >= ll + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        res.iterations = it + 1;
        if (!accepted) {
            converged = true;  // no ascent direction left at this scale
            break;
        }
        // keep the factorization scale bounded; rho is scale invariant
        x_new /= std::max(x_new.norm(), 1e-300);
        const Eigen::Matrix<double, 16, 1> grad_new = detail::gradient_params(
            x_new, model.gradient_rho(detail::rho_from_params(x_new)));
        const double beta = std::max(
            0.0, grad_new.dot(grad_new - grad) / std::max(grad.dot(grad), 1e-300));
        dir = grad_new + beta * dir;
        step = 2.0 * alpha;
        const double improvement = ll_new - ll;
        x = x_new;
        grad = grad_new;
        ll = ll_new;
        if (improvement <= cfg.tolerance * (std::abs(ll) + 1.0)) {
            converged = true;
            break;
        }
    }
    res.rho = detail::rho_from_params(x);
    res.rho = 0.5 * (res.rho + res.rho.adjoint());
    res.rho /= res.rho.trace().real();
    res.converged = converged;
    res.log_likelihood = ll;
    return res;
}

inline DensityMatrix reconstruct_bin(const std::array<double, kNumChannels>& counts,
                                     const MleConfig& cfg = {}) {
    return reconstruct_bin_detailed(counts, cfg).rho;
}

/// Unconstrained least-squares inversion of the 36 projector equations.
/// Returns the (possibly unphysical, unnormalized) matrix whose predicted
/// channel values best match `counts`; this is the independent cross-check
/// for the MLE path.
inline Eigen::Matrix4cd linear_inversion(
    const std::array<double, kNumChannels>& counts) {
    Eigen::MatrixXcd a(kNumChannels, 16);
    Eigen::VectorXcd b(kNumChannels);
    const auto& projs = all_projectors();
    for (int c = 0; c < kNumChannels; ++c) {
        for (int m = 0; m < 4; ++m)
            for (int n = 0; n < 4; ++n)
                a(c, 4 * m + n) = projs[c](n, m);  // Tr[P rho] = sum P_nm rho_mn
        b(c) = counts[c];
    }
    const Eigen::VectorXcd x = a.colPivHouseholderQr().solve(b);
    Eigen::Matrix4cd rho;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) rho(m, n) = x(4 * m + n);
    return 0.5 * (rho + rho.adjoint());
}

}  // namespace qdpair::tomo
