#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdpair/errors.hpp"
#include "qdpair/fit_core.hpp"
#include "qdpair/histogram.hpp"
#include "qdpair/qkd.hpp"
#include "qdpair/tomography.hpp"

namespace qdpair::io {

using nlohmann::json;

/// All floating-point output is serialized with 12 significant digits.
inline std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline double round12(double v) {
    return std::stod(fmt12(v));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

inline double parse_double(const std::string& s, int row, int col) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("CSV parse error at row " + std::to_string(row) +
                           ", column " + std::to_string(col) + ": '" + s + "'");
    }
}

}  // namespace detail

// --- coincidence histograms -----------------------------------------------------

/// CSV layout: header line, then one row per bin with tau_ps followed by the
/// 36 channels in fixed order (HH, HV, ..., LL). Metadata goes to a JSON
/// sidecar next to the CSV.
inline void write_histograms_csv(const CoincidenceHistogramSet& h,
                                 const std::string& path) {
    h.validate();
    std::ofstream f(path);
    if (!f) throw config_error("cannot open for writing: " + path);
    f << "tau_ps";
    for (int c = 0; c < kNumChannels; ++c) f << ',' << channel_name(c);
    f << '\n';
    for (int b = 0; b < h.grid.n_bins; ++b) {
        f << fmt12(h.grid.bin_center_ps(b));
        for (int c = 0; c < kNumChannels; ++c) f << ',' << fmt12(h.counts[c](b));
        f << '\n';
    }
    json meta;
    meta["bin_width_ps"] = round12(h.grid.bin_width_ps);
    meta["tau_start_ps"] = round12(h.grid.tau_start_ps);
    meta["n_bins"] = h.grid.n_bins;
    meta["t_exp_s"] = round12(h.t_exp_s);
    meta["source"] = h.source_descriptor;
    meta["detector"] = h.detector_descriptor;
    std::ofstream mf(path + ".meta.json");
    if (!mf) throw config_error("cannot open for writing: " + path + ".meta.json");
    mf << meta.dump(2) << '\n';
}

inline CoincidenceHistogramSet read_histograms_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw config_error("empty CSV: " + path);
    const auto header = detail::split_csv_line(line);
    if (header.size() != kNumChannels + 1 || header[0] != "tau_ps")
        throw config_error("bad header in " + path +
                           ": expected tau_ps followed by 36 channels");
    for (int c = 0; c < kNumChannels; ++c)
        if (header[c + 1] != channel_name(c))
            throw config_error("bad channel order in " + path + ": column " +
                               std::to_string(c + 2) + " is '" + header[c + 1] +
                               "', expected '" + channel_name(c) + "'");

    std::vector<double> taus;
    std::vector<std::array<double, kNumChannels>> rows;
    int row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != kNumChannels + 1)
            throw config_error("row " + std::to_string(row) + " in " + path +
                               " has " + std::to_string(cells.size()) +
                               " columns, expected 37");
        taus.push_back(detail::parse_double(cells[0], row, 1));
        std::array<double, kNumChannels> r;
        for (int c = 0; c < kNumChannels; ++c)
            r[c] = detail::parse_double(cells[c + 1], row, c + 2);
        rows.push_back(r);
    }
    if (taus.empty()) throw config_error("no data rows in " + path);

    CoincidenceHistogramSet h;
    const double width =
        taus.size() > 1 ? taus[1] - taus[0] : 1.0;
    h.grid.bin_width_ps = width;
    h.grid.n_bins = static_cast<int>(taus.size());
    h.grid.tau_start_ps = taus[0] - 0.5 * width;

    std::ifstream mf(path + ".meta.json");
    if (mf) {
        json meta = json::parse(mf, nullptr, true);
        h.t_exp_s = meta.value("t_exp_s", 0.0);
        h.grid.bin_width_ps = meta.value("bin_width_ps", h.grid.bin_width_ps);
        h.grid.tau_start_ps = meta.value("tau_start_ps", h.grid.tau_start_ps);
        h.source_descriptor = meta.value("source", "");
        h.detector_descriptor = meta.value("detector", "");
    }
    for (int c = 0; c < kNumChannels; ++c) {
        h.counts[c] = Eigen::ArrayXd(h.grid.n_bins);
        for (int b = 0; b < h.grid.n_bins; ++b) h.counts[c](b) = rows[b][c];
    }
    h.validate();
    return h;
}

// --- curves and states ------------------------------------------------------------

inline void write_curve_csv(const tomo::Curve& curve, const std::string& path,
                            const std::string& value_name = "value") {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open for writing: " + path);
    f << "tau_ps," << value_name << ",n_tau\n";
    for (const auto& p : curve)
        f << fmt12(p.tau_ps) << ',' << fmt12(p.value) << ',' << fmt12(p.n_tau)
          << '\n';
}

inline tomo::Curve read_curve_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw config_error("empty CSV: " + path);
    tomo::Curve out;
    int row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 3)
            throw config_error("row " + std::to_string(row) + " in " + path +
                               " has " + std::to_string(cells.size()) +
                               " columns, expected 3");
        out.push_back({detail::parse_double(cells[0], row, 1),
                       detail::parse_double(cells[1], row, 2),
                       detail::parse_double(cells[2], row, 3)});
    }
    return out;
}

/// Two-column CSV (x, y) with one header line, the common fitter input.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> read_xy_csv(
    const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw config_error("empty CSV: " + path);
    std::vector<double> xs, ys;
    int row = 1;
    while (std::getline(f, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 2)
            throw config_error("row " + std::to_string(row) + " in " + path +
                               " has " + std::to_string(cells.size()) +
                               " columns, expected 2");
        xs.push_back(detail::parse_double(cells[0], row, 1));
        ys.push_back(detail::parse_double(cells[1], row, 2));
    }
    Eigen::VectorXd x(xs.size()), y(ys.size());
    for (size_t k = 0; k < xs.size(); ++k) {
        x(k) = xs[k];
        y(k) = ys[k];
    }
    return {x, y};
}

inline void write_xy_csv(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const std::string& path,
                         const std::string& header = "x,y") {
    std::ofstream f(path);
    if (!f) throw config_error("cannot open for writing: " + path);
    f << header << '\n';
    for (int k = 0; k < x.size(); ++k)
        f << fmt12(x(k)) << ',' << fmt12(y(k)) << '\n';
}

inline json density_to_json(const DensityMatrix& rho) {
    json out = json::array();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            out.push_back({round12(rho(r, c).real()), round12(rho(r, c).imag())});
    return out;
}

inline DensityMatrix density_from_json(const json& j) {
    if (!j.is_array() || j.size() != 16)
        throw config_error("density matrix JSON must hold 16 re/im pairs");
    DensityMatrix rho;
    for (int k = 0; k < 16; ++k)
        rho(k / 4, k % 4) = complexd(j[k][0].get<double>(), j[k][1].get<double>());
    return rho;
}

inline json states_to_json(const tomo::TimeBinnedStates& s) {
    json out;
    out["window_ps"] = round12(s.window_ps);
    out["entries"] = json::array();
    for (const auto& e : s.entries)
        out["entries"].push_back({{"tau_ps", round12(e.tau_center_ps)},
                                  {"n_tau", round12(e.n_tau)},
                                  {"converged", e.converged},
                                  {"rho", density_to_json(e.rho)}});
    out["skipped_tau_ps"] = s.skipped_tau_ps;
    return out;
}

inline tomo::TimeBinnedStates states_from_json(const json& j) {
    tomo::TimeBinnedStates out;
    out.window_ps = j.at("window_ps").get<double>();
    for (const auto& e : j.at("entries")) {
        tomo::BinnedState b;
        b.tau_center_ps = e.at("tau_ps").get<double>();
        b.n_tau = e.at("n_tau").get<double>();
        b.converged = e.value("converged", true);
        b.rho = density_from_json(e.at("rho"));
        out.entries.push_back(b);
    }
    if (j.contains("skipped_tau_ps"))
        out.skipped_tau_ps = j.at("skipped_tau_ps").get<std::vector<double>>();
    return out;
}

inline json fit_result_to_json(const fit::FitResult& r) {
    json out;
    json params, errors;
    for (const auto& [k, v] : r.params) params[k] = round12(v);
    for (const auto& [k, v] : r.std_errors) errors[k] = round12(v);
    out["params"] = params;
    out["std_errors"] = errors;
    out["r_squared"] = round12(r.r_squared);
    out["reduced_chi2"] = round12(r.reduced_chi2);
    out["ssr"] = round12(r.ssr);
    out["n_points"] = r.n_points;
    out["n_params"] = r.n_params;
    out["converged"] = r.converged;
    out["flags"] = r.flags;
    return out;
}

inline void write_keyrate_outputs(const qkd::KeyRateCurve& curve,
                                  const std::string& csv_path,
                                  const std::string& json_path,
                                  const json& config_echo = json::object()) {
    std::ofstream f(csv_path);
    if (!f) throw config_error("cannot open for writing: " + csv_path);
    f << "tau_ps,r_bits,n_tau\n";
    for (const auto& p : curve.entries)
        f << fmt12(p.tau_ps) << ',' << fmt12(p.value) << ',' << fmt12(p.n_tau)
          << '\n';
    json summary;
    summary["pulse_averaged_rate"] = round12(curve.pulse_averaged_rate);
    summary["basis"] = {{"theta1", round12(curve.basis.theta1)},
                        {"phi1", round12(curve.basis.phi1)},
                        {"theta2", round12(curve.basis.theta2)},
                        {"phi2", round12(curve.basis.phi2)}};
    summary["config"] = config_echo;
    std::ofstream jf(json_path);
    if (!jf) throw config_error("cannot open for writing: " + json_path);
    jf << summary.dump(2) << '\n';
}

}  // namespace qdpair::io
