#pragma once

#include "qdpair/config.hpp"

namespace qdpair::presets {

// The three measurement configurations the `reproduce` command chains
// through: fast low-noise SNSPDs, slow noisy SPADs, and the ideal source
// with perfect detection.

inline RunConfig snspd() {
    RunConfig c;
    c.source.fss_uev = 3.226;
    c.source.lifetime_ns = 0.777;
    c.source.multiphoton_prob = 0.00415;
    c.source.x_rate_hz = 145e3;
    c.source.xx_rate_hz = 150e3;
    c.source.rep_rate_hz = 76.2e6;
    c.detector.response = sim::ResponseKind::Gaussian;
    c.detector.width_ps = 30.0;
    c.detector.dark_x_hz = 1.0;
    c.detector.dark_xx_hz = 1.0;
    c.grid.bin_width_ps = 10.0;
    c.grid.tau_start_ps = -200.0;
    c.grid.n_bins = 420;  // up to +4.0 ns > 5 lifetimes
    c.t_exp_s = 300.0;
    c.window_ps = 50.0;
    c.output_dir = "out_snspd";
    return c;
}

inline RunConfig spad() {
    RunConfig c = snspd();
    c.detector.response = sim::ResponseKind::Sech2;
    c.detector.width_ps = sim::sech2_scale_from_fwhm(488.0);
    c.detector.dark_x_hz = 34.0;
    c.detector.dark_xx_hz = 306.0;
    c.grid.bin_width_ps = 10.0;
    c.grid.tau_start_ps = -1500.0;
    c.grid.n_bins = 550;  // up to +4.0 ns
    c.output_dir = "out_spad";
    return c;
}

inline RunConfig ideal() {
    RunConfig c = snspd();
    c.source.multiphoton_prob = 0.0;
    c.detector.response = sim::ResponseKind::Delta;
    c.detector.width_ps = 0.0;
    c.detector.dark_x_hz = 0.0;
    c.detector.dark_xx_hz = 0.0;
    c.grid.bin_width_ps = 50.0;
    c.grid.tau_start_ps = 0.0;
    c.grid.n_bins = 80;
    c.output_dir = "out_ideal";
    return c;
}

}  // namespace qdpair::presets
