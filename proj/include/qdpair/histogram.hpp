#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>

#include "qdpair/errors.hpp"
#include "qdpair/polarization.hpp"

namespace qdpair {

/// Uniform time axis; `tau_start_ps` is the left edge of bin 0 and values
/// are reported at bin centers.
struct HistogramGrid {
    double bin_width_ps = 16.0;
    int n_bins = 0;
    double tau_start_ps = 0.0;

    double bin_center_ps(int b) const {
        return tau_start_ps + (b + 0.5) * bin_width_ps;
    }
    double tau_end_ps() const { return tau_start_ps + n_bins * bin_width_ps; }

    void validate() const {
        if (bin_width_ps <= 0.0) throw config_error("bin_width_ps must be > 0");
        if (n_bins <= 0) throw config_error("n_bins must be > 0");
    }
};

/// The 36 coincidence channels of an over-complete tomography run, one
/// histogram per projector pair, all on the same grid.
struct CoincidenceHistogramSet {
    HistogramGrid grid;
    double t_exp_s = 0.0;  // acquisition wall time per setting
    std::array<Eigen::ArrayXd, kNumChannels> counts;
    std::string source_descriptor;    // free-form provenance for the sidecar
    std::string detector_descriptor;

    Eigen::ArrayXd& channel(Pol i, Pol j) { return counts[channel_index(i, j)]; }
    const Eigen::ArrayXd& channel(Pol i, Pol j) const {
        return counts[channel_index(i, j)];
    }

    void validate() const {
        grid.validate();
        for (int c = 0; c < kNumChannels; ++c) {
            if (counts[c].size() != grid.n_bins)
                throw config_error("channel " + channel_name(c) +
                                   " length differs from grid");
            if ((counts[c] < 0.0).any())
                throw config_error("channel " + channel_name(c) +
                                   " has negative counts");
        }
    }

    /// Sum of all 36 channels in bin b.
    double total_in_bin(int b) const {
        double s = 0.0;
        for (const auto& c : counts) s += c(b);
        return s;
    }
};

inline CoincidenceHistogramSet make_empty_set(const HistogramGrid& grid,
                                              double t_exp_s) {
    CoincidenceHistogramSet h;
    h.grid = grid;
    h.t_exp_s = t_exp_s;
    for (auto& c : h.counts) c = Eigen::ArrayXd::Zero(grid.n_bins);
    return h;
}

}  // namespace qdpair
