#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qdpair/mle.hpp"
#include "qdpair/sim.hpp"
#include "support.hpp"

using namespace qdpair;
using namespace qdpair::sim;
using Catch::Approx;

namespace {

SourceModel clean_source() {
    SourceModel s;
    s.fss_uev = 3.226;
    s.lifetime_ns = 0.777;
    s.multiphoton_prob = 0.0;
    s.x_rate_hz = 145e3;
    s.xx_rate_hz = 150e3;
    s.rep_rate_hz = 76.2e6;
    return s;
}

DetectorModel delta_detector() { return {ResponseKind::Delta, 0.0, 0.0, 0.0}; }

HistogramGrid wide_grid(double bin_ps = 10.0) {
    HistogramGrid g;
    g.bin_width_ps = bin_ps;
    g.tau_start_ps = -200.0;
    g.n_bins = static_cast<int>((200.0 + 11.0 * 777.0) / bin_ps);
    return g;
}

}  // namespace

TEST_CASE("ideal pair density on reference channels") {
    const SourceModel src = clean_source();
    CHECK(ideal_pair_density(0.0, Pol::H, Pol::H, src) ==
          Approx(0.5 / src.lifetime_ns));
    for (double tau : {0.0, 0.2, 1.0, 3.0})
        CHECK(ideal_pair_density(tau, Pol::H, Pol::V, src) ==
              Approx(0.0).margin(1e-15));
    const double quarter = 0.25 * fss_period_ns(src.fss_uev);
    CHECK(ideal_pair_density(quarter, Pol::R, Pol::R, src) ==
          Approx(0.25 * std::exp(-quarter / src.lifetime_ns) / src.lifetime_ns));
    CHECK(ideal_pair_density(-0.1, Pol::H, Pol::H, src) == 0.0);
}

TEST_CASE("dephased state limits and Werner oracle") {
    SourceModel src = clean_source();
    // no dephasing, no multiphoton: the pure cascade state
    for (double tau : {0.0, 0.4, 1.3}) {
        const DensityMatrix rho = dephased_state(tau, src);
        const DensityMatrix pure = pure_density(cascade_state(tau, src.fss_uev));
        CHECK((rho - pure).cwiseAbs().maxCoeff() < 1e-12);
    }
    // spin scattering drives the state to I/4
    src.spin_scatter_ns = 1.0;
    const DensityMatrix late = dephased_state(200.0, src);
    CHECK((late - maximally_mixed()).cwiseAbs().maxCoeff() < 1e-12);

    // Werner-form oracle: tau_SS = 25 ns at tau = 0.777 ns gives
    // concurrence (3 k' - 1)/2 with k' = exp(-0.777/25)
    src.spin_scatter_ns = 25.0;
    const double kprime = std::exp(-0.777 / 25.0);
    const double expected = (3.0 * kprime - 1.0) / 2.0;
    CHECK(concurrence(dephased_state(0.777, src)) == Approx(expected).margin(1e-10));
    CHECK(expected == Approx(0.954097).margin(1e-6));

    // cross dephasing kills the coherence but keeps the HH/VV populations
    src.spin_scatter_ns = kInfTime;
    src.cross_dephase_ns = 0.5;
    const DensityMatrix crossed = dephased_state(5.0, src);
    CHECK(std::abs(crossed(0, 3)) < 1e-4);
    CHECK(crossed(0, 0).real() == Approx(0.5).margin(1e-4));

    // any parameter combination yields a valid density matrix
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        SourceModel s = clean_source();
        s.multiphoton_prob = u(rng);
        s.spin_scatter_ns = 0.1 + 30.0 * u(rng);
        s.cross_dephase_ns = 0.1 + 30.0 * u(rng);
        CHECK_NOTHROW(validate_density(dephased_state(3.0 * u(rng), s)));
    }
}

TEST_CASE("multiphoton mixing") {
    const DensityMatrix phi = pure_density(bell_state(Bell::PhiPlus));
    CHECK((mix_multiphoton(phi, 0.0) - phi).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((mix_multiphoton(phi, 1.0) - maximally_mixed()).cwiseAbs().maxCoeff() <
          1e-15);
    // Werner concurrence oracle at the measured multiphoton probability
    const double p_m = 0.00415;
    const double expected = (3.0 * (1.0 - p_m) - 1.0) / 2.0;
    CHECK(concurrence(mix_multiphoton(phi, p_m)) ==
          Approx(expected).epsilon(1e-9));
    CHECK(expected == Approx(0.993775).margin(1e-6));
    CHECK_THROWS_AS(mix_multiphoton(phi, 1.5), std::invalid_argument);
}

TEST_CASE("expected histograms: exact channel structure with delta response") {
    const SourceModel src = clean_source();
    const HistogramGrid grid = wide_grid();
    const auto h = expected_histograms(src, delta_detector(), grid, 300.0);

    // HV channel is identically zero
    CHECK(h.channel(Pol::H, Pol::V).abs().maxCoeff() < 1e-12);

    // rectilinear-group sum reproduces the exponential decay with the N0 scale
    const double n0_s = src.x_rate_hz * src.xx_rate_hz * 300.0 *
                        (grid.bin_width_ps * 1e-12) / src.rep_rate_hz;
    for (int b : {25, 60, 200, 400}) {
        const double tau_ns = ps_to_ns(grid.bin_center_ps(b));
        if (tau_ns < 0.0) continue;
        const double expected =
            n0_s * std::exp(-tau_ns / src.lifetime_ns) / src.lifetime_ns * 1e9;
        const double sum = h.channel(Pol::H, Pol::H)(b) +
                           h.channel(Pol::H, Pol::V)(b) +
                           h.channel(Pol::V, Pol::H)(b) +
                           h.channel(Pol::V, Pol::V)(b);
        CHECK(sum == Approx(expected).epsilon(1e-9));
    }
    // the peak bin carries the familiar count scale for these rates
    CHECK(h.channel(Pol::H, Pol::H)(20) ==
          Approx(0.5 * n0_s / src.lifetime_ns * 1e9).epsilon(0.01));
}

TEST_CASE("expected histograms invert bin-by-bin to the generating state") {
    const SourceModel src = clean_source();
    HistogramGrid grid = wide_grid(20.0);
    const auto h = expected_histograms(src, delta_detector(), grid, 300.0);
    const double n0_s = src.x_rate_hz * src.xx_rate_hz * 300.0 *
                        (grid.bin_width_ps * 1e-12) / src.rep_rate_hz;
    for (int b : {12, 40, 90, 150}) {
        const double tau_ns = ps_to_ns(grid.bin_center_ps(b));
        if (tau_ns <= 0.0) continue;
        std::array<double, kNumChannels> counts{};
        for (int c = 0; c < kNumChannels; ++c) counts[c] = h.counts[c](b);
        const Eigen::Matrix4cd raw = tomo::linear_inversion(counts);
        const double scale =
            n0_s * std::exp(-tau_ns / src.lifetime_ns) / src.lifetime_ns * 1e9;
        const Eigen::Matrix4cd expected =
            scale * pure_density(cascade_state(tau_ns, src.fss_uev));
        CHECK((raw - expected).cwiseAbs().maxCoeff() / scale < 1e-9);
    }
}

TEST_CASE("convolution conserves counts and keeps the dark floor flat") {
    SourceModel src = clean_source();
    DetectorModel det{ResponseKind::Gaussian, 30.0, 1.0, 1.0};
    HistogramGrid grid = wide_grid(10.0);  // reaches 11 lifetimes

    const auto with_kernel = expected_histograms(src, det, grid, 300.0);
    DetectorModel no_kernel = det;
    no_kernel.response = ResponseKind::Delta;
    no_kernel.width_ps = 0.0;
    const auto without = expected_histograms(src, no_kernel, grid, 300.0);
    for (int c = 0; c < kNumChannels; ++c) {
        const double a = with_kernel.counts[c].sum();
        const double d = without.counts[c].sum();
        CHECK(a == Approx(d).epsilon(1e-6));
    }

    // dark floor: where there is no signal the channel sits exactly on the
    // flat floor, convolved or not
    const double dt_s = grid.bin_width_ps * 1e-12;
    const double floor =
        (src.xx_rate_hz * det.dark_x_hz + src.x_rate_hz * det.dark_xx_hz) *
        300.0 * dt_s;
    CHECK(with_kernel.channel(Pol::H, Pol::V)(2) == Approx(floor).epsilon(1e-9));
    CHECK(without.channel(Pol::H, Pol::V)(2) == Approx(floor).epsilon(1e-9));

    // histograms stay non-negative everywhere
    for (int c = 0; c < kNumChannels; ++c)
        CHECK((with_kernel.counts[c] >= 0.0).all());
}

TEST_CASE("RL and RR quantum oscillations interleave") {
    const SourceModel src = clean_source();
    DetectorModel det{ResponseKind::Gaussian, 30.0, 1.0, 1.0};
    const HistogramGrid grid = wide_grid(10.0);
    const auto h = expected_histograms(src, det, grid, 300.0);

    // the difference RL - RR oscillates at S/h: zero crossings every T/2
    const auto& rl = h.channel(Pol::R, Pol::L);
    const auto& rr = h.channel(Pol::R, Pol::R);
    const double period_ps = ns_to_ps(fss_period_ns(src.fss_uev));
    std::vector<double> crossings;
    for (int b = 1; b < grid.n_bins; ++b) {
        if (ps_to_ns(grid.bin_center_ps(b)) < 0.05) continue;
        if (grid.bin_center_ps(b) > 3000.0) break;
        const double prev = rl(b - 1) - rr(b - 1);
        const double cur = rl(b) - rr(b);
        if (prev > 0.0 && cur <= 0.0) crossings.push_back(grid.bin_center_ps(b));
    }
    REQUIRE(crossings.size() >= 2);
    for (size_t k = 1; k < crossings.size(); ++k)
        CHECK(crossings[k] - crossings[k - 1] == Approx(period_ps).epsilon(0.03));

    // the sum RL + RR follows the smooth decay (no oscillation): compare
    // against half the circular-group total
    for (int b : {60, 120, 200}) {
        const double group = rl(b) + rr(b) + h.channel(Pol::L, Pol::R)(b) +
                             h.channel(Pol::L, Pol::L)(b);
        CHECK(rl(b) + rr(b) == Approx(0.5 * group).epsilon(1e-9));
    }
}

TEST_CASE("grid and response validation") {
    const SourceModel src = clean_source();
    HistogramGrid grid = wide_grid(16.0);
    DetectorModel det{ResponseKind::Gaussian, 30.0, 0.0, 0.0};
    // 30 ps response on 16 ps bins is too coarse
    CHECK_THROWS_AS(expected_histograms(src, det, grid, 300.0), config_error);
    // grid must reach back to -3 widths
    HistogramGrid narrow = wide_grid(10.0);
    narrow.tau_start_ps = -10.0;
    CHECK_THROWS_AS(expected_histograms(src, det, narrow, 300.0), config_error);
    // delta kernel with any bin width is fine
    CHECK_NOTHROW(expected_histograms(src, delta_detector(), wide_grid(16.0), 1.0));
}

TEST_CASE("Poisson sampler is seeded and concentrates") {
    const HistogramGrid grid{1.0, 400, 0.0};
    auto expected = make_empty_set(grid, 1.0);
    SECTION("all-zero expectation stays zero") {
        const auto s = sample_histograms(expected, 42);
        for (const auto& c : s.counts) CHECK(c.abs().maxCoeff() == 0.0);
    }
    SECTION("determinism and concentration at mean 1e6") {
        for (auto& c : expected.counts) c.setConstant(1e6);
        const auto s1 = sample_histograms(expected, 7);
        const auto s2 = sample_histograms(expected, 7);
        const auto s3 = sample_histograms(expected, 8);
        int out_of_band = 0, total = 0;
        bool identical = true, differs = false;
        for (int c = 0; c < kNumChannels; ++c) {
            identical &= (s1.counts[c] == s2.counts[c]).all();
            differs |= (s1.counts[c] != s3.counts[c]).any();
            for (int b = 0; b < grid.n_bins; ++b) {
                ++total;
                if (std::abs(s1.counts[c](b) - 1e6) > 0.005 * 1e6) ++out_of_band;
            }
        }
        CHECK(identical);
        CHECK(differs);
        CHECK(static_cast<double>(out_of_band) / total < 0.01);
    }
}
