#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qdpair/errors.hpp"
#include "qdpair/histogram.hpp"
#include "qdpair/mle.hpp"
#include "qdpair/quantum.hpp"

namespace qdpair::tomo {

struct BinnedState {
    double tau_center_ps = 0.0;
    DensityMatrix rho = maximally_mixed();
    double n_tau = 0.0;  // total coincidences across all 36 channels
    bool converged = true;
};

struct TimeBinnedStates {
    double window_ps = 0.0;
    std::vector<BinnedState> entries;
    std::vector<double> skipped_tau_ps;  // degenerate windows, reported not kept
};

/// Reconstructs one state per closed-open window [tau, tau + window) by
/// summing raw bins into 36 aggregates and running the MLE. Windows with no
/// counts are skipped and reported.
inline TimeBinnedStates time_resolved_states(const CoincidenceHistogramSet& h,
                                             double window_ps,
                                             const MleConfig& cfg = {}) {
    h.validate();
    if (window_ps < h.grid.bin_width_ps)
        throw config_error("window must be at least one bin wide");
    const double ratio = window_ps / h.grid.bin_width_ps;
    const int bins_per_window = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - bins_per_window) > 1e-9)
        throw config_error("window must be a multiple of the bin width");

    TimeBinnedStates out;
    out.window_ps = window_ps;
    const int n_windows = h.grid.n_bins / bins_per_window;
    out.entries.reserve(n_windows);
    for (int w = 0; w < n_windows; ++w) {
        const int b0 = w * bins_per_window;
        std::array<double, kNumChannels> agg{};
        double total = 0.0;
        for (int c = 0; c < kNumChannels; ++c) {
            double s = 0.0;
            for (int b = b0; b < b0 + bins_per_window; ++b) s += h.counts[c](b);
            agg[c] = s;
            total += s;
        }
        const double center =
            h.grid.tau_start_ps + (b0 + 0.5 * bins_per_window) * h.grid.bin_width_ps;
        if (total <= 0.0) {
            out.skipped_tau_ps.push_back(center);
            continue;
        }
        const MleResult r = reconstruct_bin_detailed(agg, cfg);
        out.entries.push_back({center, r.rho, total, r.converged});
    }
    return out;
}

// --- metric curves -----------------------------------------------------------

struct CurvePoint {
    double tau_ps = 0.0;
    double value = 0.0;
    double n_tau = 0.0;
};

using Curve = std::vector<CurvePoint>;

enum class Metric { Concurrence, FidelityPhiPlus, FidelityPhiMinus,
                    FidelityCascade, MaxEntangledFidelity };

/// Applies a metric per reconstructed bin. FidelityCascade compares each bin
/// against the ideal oscillating state at its own delay, so `fss_uev` is
/// required for that metric only.
inline Curve metric_curve(const TimeBinnedStates& states, Metric metric,
                          double fss_uev = 0.0) {
    Curve out;
    out.reserve(states.entries.size());
    for (const auto& e : states.entries) {
        double v = 0.0;
        switch (metric) {
            case Metric::Concurrence:
                v = concurrence(e.rho);
                break;
            case Metric::FidelityPhiPlus:
                v = fidelity_pure(e.rho, bell_state(Bell::PhiPlus));
                break;
            case Metric::FidelityPhiMinus:
                v = fidelity_pure(e.rho, bell_state(Bell::PhiMinus));
                break;
            case Metric::FidelityCascade:
                v = fidelity_pure(e.rho,
                                  cascade_state(ps_to_ns(e.tau_center_ps), fss_uev));
                break;
            case Metric::MaxEntangledFidelity:
                v = max_entangled_fidelity(e.rho);
                break;
        }
        out.push_back({e.tau_center_ps, v, e.n_tau});
    }
    return out;
}

/// Coincidence-weighted average sum(N v) / sum(N).
inline double lifetime_weighted(const std::vector<double>& values,
                                const std::vector<double>& weights) {
    if (values.size() != weights.size())
        throw std::invalid_argument("values/weights length mismatch");
    double num = 0.0, den = 0.0;
    for (size_t k = 0; k < values.size(); ++k) {
        if (weights[k] < 0.0) throw std::invalid_argument("negative weight");
        num += weights[k] * values[k];
        den += weights[k];
    }
    if (den <= 0.0) throw std::invalid_argument("total weight is zero");
    return num / den;
}

inline double lifetime_weighted(const Curve& curve) {
    std::vector<double> v, w;
    v.reserve(curve.size());
    w.reserve(curve.size());
    for (const auto& p : curve) {
        v.push_back(p.value);
        w.push_back(p.n_tau);
    }
    return lifetime_weighted(v, w);
}

// --- local-basis optimization -------------------------------------------------

/// Weighted aggregate of a per-state objective under a common local
/// rotation; the quantity the basis search maximizes.
inline double rotated_aggregate(const TimeBinnedStates& states,
                                const std::function<double(const DensityMatrix&)>& objective,
                                const LocalUnitaryParams& u) {
    double num = 0.0, den = 0.0;
    for (const auto& e : states.entries) {
        num += e.n_tau * objective(local_rotate(e.rho, u));
        den += e.n_tau;
    }
    return den > 0.0 ? num / den : 0.0;
}

namespace detail {

// Deterministic Nelder-Mead on the 4 waveplate angles.
inline std::pair<LocalUnitaryParams, double> nelder_mead(
    const std::function<double(const Eigen::Vector4d&)>& f, Eigen::Vector4d x0,
    double scale, int max_iter) {
    constexpr int n = 4;
    std::array<Eigen::Vector4d, n + 1> pts;
    std::array<double, n + 1> val;
    pts[0] = x0;
    val[0] = f(x0);
    for (int k = 0; k < n; ++k) {
        pts[k + 1] = x0;
        pts[k + 1](k) += scale;
        val[k + 1] = f(pts[k + 1]);
    }
    auto order = [&] {
        std::array<int, n + 1> idx{};
        for (int k = 0; k <= n; ++k) idx[k] = k;
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return val[a] > val[b]; });
        std::array<Eigen::Vector4d, n + 1> p2;
        std::array<double, n + 1> v2;
        for (int k = 0; k <= n; ++k) {
            p2[k] = pts[idx[k]];
            v2[k] = val[idx[k]];
        }
        pts = p2;
        val = v2;
    };
    order();
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(val[0] - val[n]) < 1e-12) break;
        Eigen::Vector4d centroid = Eigen::Vector4d::Zero();
        for (int k = 0; k < n; ++k) centroid += pts[k];
        centroid /= n;
        const Eigen::Vector4d refl = centroid + (centroid - pts[n]);
        const double f_refl = f(refl);
        if (f_refl > val[0]) {
            const Eigen::Vector4d exp_pt = centroid + 2.0 * (centroid - pts[n]);
            const double f_exp = f(exp_pt);
            if (f_exp > f_refl) {
                pts[n] = exp_pt;
                val[n] = f_exp;
            } else {
                pts[n] = refl;
                val[n] = f_refl;
            }
        } else if (f_refl > val[n - 1]) {
            pts[n] = refl;
            val[n] = f_refl;
        } else {
            const Eigen::Vector4d contr = centroid + 0.5 * (pts[n] - centroid);
            const double f_contr = f(contr);
            if (f_contr > val[n]) {
                pts[n] = contr;
                val[n] = f_contr;
            } else {
                for (int k = 1; k <= n; ++k) {
                    pts[k] = pts[0] + 0.5 * (pts[k] - pts[0]);
                    val[k] = f(pts[k]);
                }
            }
        }
        order();
    }
    const LocalUnitaryParams best{pts[0](0), pts[0](1), pts[0](2), pts[0](3)};
    return {best.canonical(), val[0]};
}

}  // namespace detail

struct BasisSearchOptions {
    int grid_points = 12;   // per angle on the coarse pass
    int refine_iterations = 200;
};

/// Maximizes the weighted aggregate of `objective` over product rotations
/// U1(theta1, phi1) x U2(theta2, phi2): coarse grid over the 4 angles, then
/// Nelder-Mead refinement. Heuristic (no global guarantee) but
/// deterministic.
inline std::pair<LocalUnitaryParams, double> optimize_local_basis(
    const TimeBinnedStates& states,
    const std::function<double(const DensityMatrix&)>& objective,
    const BasisSearchOptions& opts = {}) {
    if (states.entries.empty())
        throw std::invalid_argument("no states to optimize over");

    auto eval = [&](const Eigen::Vector4d& x) {
        return rotated_aggregate(states, objective,
                                 {x(0), x(1), x(2), x(3)});
    };

    // HWP angles repeat with period pi/2 (up to an irrelevant sign), QWP
    // angles with period pi.
    const int g = opts.grid_points;
    Eigen::Vector4d best_x = Eigen::Vector4d::Zero();
    double best_v = eval(best_x);
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b)
            for (int c = 0; c < g; ++c)
                for (int d = 0; d < g; ++d) {
                    Eigen::Vector4d x;
                    x << (M_PI / 2.0) * a / g, M_PI * b / g,
                         (M_PI / 2.0) * c / g, M_PI * d / g;
                    const double v = eval(x);
                    if (v > best_v) {
                        best_v = v;
                        best_x = x;
                    }
                }

    auto [params, value] = detail::nelder_mead(
        eval, best_x, M_PI / (4.0 * g), opts.refine_iterations);
    if (value < best_v)
        return {LocalUnitaryParams{best_x(0), best_x(1), best_x(2), best_x(3)}
                    .canonical(),
                best_v};
    return {params, value};
}

}  // namespace qdpair::tomo
