#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qdpair/constants.hpp"
#include "qdpair/errors.hpp"
#include "qdpair/histogram.hpp"
#include "qdpair/quantum.hpp"

namespace qdpair::sim {

inline constexpr double kInfTime = std::numeric_limits<double>::infinity();

/// Physical parameters of the cascade source.
struct SourceModel {
    double fss_uev = 3.226;        // fine-structure splitting S
    double lifetime_ns = 0.777;    // exciton radiative lifetime tau_X
    double multiphoton_prob = 0.0; // p_m, isotropic admixture
    double x_rate_hz = 145e3;      // detected exciton singles rate
    double xx_rate_hz = 150e3;     // detected biexciton singles rate
    double rep_rate_hz = 76.2e6;   // excitation repetition rate
    double blink_on_prob = 1.0;    // beta; affects rates only, not shapes
    double spin_scatter_ns = kInfTime;  // tau_SS
    double cross_dephase_ns = kInfTime; // tau_HV

    void validate() const {
        if (lifetime_ns <= 0.0) throw config_error("lifetime_ns must be > 0");
        if (multiphoton_prob < 0.0 || multiphoton_prob > 1.0)
            throw config_error("multiphoton_prob must be in [0, 1]");
        if (x_rate_hz < 0.0 || xx_rate_hz < 0.0 || rep_rate_hz <= 0.0)
            throw config_error("rates must be non-negative, rep_rate_hz > 0");
        if (blink_on_prob <= 0.0 || blink_on_prob > 1.0)
            throw config_error("blink_on_prob must be in (0, 1]");
        if (spin_scatter_ns <= 0.0 || cross_dephase_ns <= 0.0)
            throw config_error("dephasing times must be > 0 (or infinite)");
    }
};

enum class ResponseKind { Gaussian, Sech2, Delta };

/// Detection-system timing response plus per-arm dark-count rates.
/// `width_ps` is the FWHM for Gaussian kernels and the scale parameter for
/// sech^2 kernels (FWHM = 2 * arccosh(sqrt2) * scale).
struct DetectorModel {
    ResponseKind response = ResponseKind::Delta;
    double width_ps = 0.0;
    double dark_x_hz = 0.0;
    double dark_xx_hz = 0.0;

    void validate() const {
        if (width_ps < 0.0) throw config_error("response width must be >= 0");
        if (dark_x_hz < 0.0 || dark_xx_hz < 0.0)
            throw config_error("dark-count rates must be >= 0");
    }
};

inline double sech2_fwhm_from_scale(double scale_ps) {
    return 2.0 * std::acosh(std::sqrt(2.0)) * scale_ps;
}
inline double sech2_scale_from_fwhm(double fwhm_ps) {
    return fwhm_ps / (2.0 * std::acosh(std::sqrt(2.0)));
}

/// Mixes an isotropic multiphoton background into a state:
/// (1 - p) rho + p I/4.
inline DensityMatrix mix_multiphoton(const DensityMatrix& rho, double p_m) {
    if (p_m < 0.0 || p_m > 1.0)
        throw std::invalid_argument("multiphoton probability must be in [0, 1]");
    return (1.0 - p_m) * rho + p_m * maximally_mixed();
}

/// Polarization state at delay tau including spin scattering (-> I/4),
/// cross dephasing (-> (|HH><HH| + |VV><VV|)/2) and the multiphoton
/// admixture k = 1 - p_m:
///   rho(tau) = k a b rho_QD + (1 - k a) I/4 + k a (1 - b) rho_HV,
/// with a = exp(-tau/tau_SS), b = exp(-tau/tau_HV).
inline DensityMatrix dephased_state(double tau_ns, const SourceModel& src) {
    src.validate();
    const double k = 1.0 - src.multiphoton_prob;
    const double a = std::isinf(src.spin_scatter_ns)
                         ? 1.0
                         : std::exp(-tau_ns / src.spin_scatter_ns);
    const double b = std::isinf(src.cross_dephase_ns)
                         ? 1.0
                         : std::exp(-tau_ns / src.cross_dephase_ns);
    const DensityMatrix pure = pure_density(cascade_state(tau_ns, src.fss_uev));
    DensityMatrix rho_hv = DensityMatrix::Zero();
    rho_hv(0, 0) = 0.5;
    rho_hv(3, 3) = 0.5;
    return k * a * b * pure + (1.0 - k * a) * maximally_mixed() +
           k * a * (1.0 - b) * rho_hv;
}

/// Coincidence probability density (1/ns) for detecting the pair in |ij>
/// at delay tau, dephasing-free: |<ij|psi(tau)>|^2 exp(-tau/tau_X)/tau_X
/// for tau >= 0.
inline double ideal_pair_density(double tau_ns, Pol i, Pol j,
                                 const SourceModel& src) {
    if (tau_ns < 0.0) return 0.0;
    const TwoQubitState psi = cascade_state(tau_ns, src.fss_uev);
    const complexd amp = product_ket(i, j).dot(psi);
    return std::norm(amp) * std::exp(-tau_ns / src.lifetime_ns) /
           src.lifetime_ns;
}

/// Normalized discrete response kernel sampled on the bin grid. Returns an
/// odd-length vector centered on the zero tap; empty margin handling is the
/// caller's job.
inline std::vector<double> response_kernel(const DetectorModel& det,
                                           double bin_width_ps) {
    if (det.response == ResponseKind::Delta || det.width_ps == 0.0)
        return {1.0};
    const int half = static_cast<int>(std::ceil(5.0 * det.width_ps / bin_width_ps));
    std::vector<double> k(2 * half + 1);
    double sum = 0.0;
    for (int m = -half; m <= half; ++m) {
        const double t = m * bin_width_ps;
        double g = 0.0;
        if (det.response == ResponseKind::Gaussian) {
            const double sigma = det.width_ps / (2.0 * std::sqrt(2.0 * std::log(2.0)));
            g = std::exp(-0.5 * t * t / (sigma * sigma));
        } else {  // sech^2 with scale = width_ps
            const double u = t / det.width_ps;
            const double c = std::cosh(u);
            g = 1.0 / (c * c);
        }
        k[m + half] = g;
        sum += g;
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Expected (noise-free) 36-channel histograms:
///   N_ij(tau) = (N0 p_ij(tau) + N_dark) convolved with the response kernel,
/// with N0 = N_X N_XX T_exp dt / f_rep counts per bin at unit density and a
/// flat dark floor N_dark = (N_XX d_X + N_X d_XX) T_exp dt. The grid is
/// padded by the kernel extent before the convolution and cropped after.
inline CoincidenceHistogramSet expected_histograms(const SourceModel& src,
                                                   const DetectorModel& det,
                                                   const HistogramGrid& grid,
                                                   double t_exp_s) {
    src.validate();
    det.validate();
    grid.validate();
    if (t_exp_s < 0.0) throw config_error("t_exp_s must be >= 0");
    if (det.response != ResponseKind::Delta && det.width_ps > 0.0 &&
        det.width_ps < 2.0 * grid.bin_width_ps)
        throw config_error("response width below 2 bins; refine the grid");
    const double lo_needed = -3.0 * det.width_ps;
    const double hi_needed = 5.0 * src.lifetime_ns * 1e3;
    if (grid.tau_start_ps > lo_needed || grid.tau_end_ps() < hi_needed)
        throw config_error("grid must cover [-3*width, 5*lifetime]");

    const std::vector<double> kernel = response_kernel(det, grid.bin_width_ps);
    const int khalf = static_cast<int>(kernel.size()) / 2;
    const int pad = khalf;
    const int n_pad = grid.n_bins + 2 * pad;

    const double dt_s = grid.bin_width_ps * 1e-12;
    const double n0 = src.x_rate_hz * src.xx_rate_hz * t_exp_s * dt_s /
                      src.rep_rate_hz;
    const double dark_floor =
        (src.xx_rate_hz * det.dark_x_hz + src.x_rate_hz * det.dark_xx_hz) *
        t_exp_s * dt_s;

    const auto& projs = all_projectors();
    std::array<Eigen::ArrayXd, kNumChannels> pre;
    for (auto& p : pre) p = Eigen::ArrayXd::Constant(n_pad, dark_floor);

    for (int b = 0; b < n_pad; ++b) {
        const double tau_ns =
            ps_to_ns(grid.tau_start_ps + (b - pad + 0.5) * grid.bin_width_ps);
        if (tau_ns < 0.0) continue;
        // n0 carries seconds; the decay density exp(-tau/tau_X)/tau_X is
        // per nanosecond, hence the 1e9.
        const double envelope =
            n0 * std::exp(-tau_ns / src.lifetime_ns) / src.lifetime_ns * 1e9;
        if (envelope == 0.0) continue;
        const DensityMatrix rho = dephased_state(tau_ns, src);
        for (int c = 0; c < kNumChannels; ++c) {
            const double prob =
                std::real((projs[c] * rho).trace());
            pre[c](b) += envelope * std::max(0.0, prob);
        }
    }

    CoincidenceHistogramSet out = make_empty_set(grid, t_exp_s);
    for (int c = 0; c < kNumChannels; ++c) {
        for (int b = 0; b < grid.n_bins; ++b) {
            double acc = 0.0;
            for (int m = -khalf; m <= khalf; ++m)
                acc += kernel[m + khalf] * pre[c](b + pad - m);
            out.counts[c](b) = acc;
        }
    }
    return out;
}

/// Per-bin independent Poisson draw with the expected set as mean;
/// deterministic for a fixed seed.
inline CoincidenceHistogramSet sample_histograms(
    const CoincidenceHistogramSet& expected, unsigned long long seed) {
    expected.validate();
    CoincidenceHistogramSet out = expected;
    std::mt19937_64 rng(seed);
    for (int c = 0; c < kNumChannels; ++c)
        for (int b = 0; b < expected.grid.n_bins; ++b) {
            const double mean = expected.counts[c](b);
            if (!(mean >= 0.0) || !std::isfinite(mean))
                throw std::invalid_argument("expected counts must be finite");
            if (mean == 0.0) {
                out.counts[c](b) = 0.0;
            } else {
                std::poisson_distribution<long long> pois(mean);
                out.counts[c](b) = static_cast<double>(pois(rng));
            }
        }
    return out;
}

}  // namespace qdpair::sim
