// Batch CLI for the cascade pair toolkit: forward simulation, time-binned
// tomography, curve fitting and six-state key rates, driven by a versioned
// JSON config. Every command echoes the effective config next to its
// outputs so a run can be reproduced exactly.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdpair/qdpair.hpp"

namespace fs = std::filesystem;
using namespace qdpair;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    double window_ps = -1.0;
    std::string format;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "run configuration JSON");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "sampling seed (enables Poisson sampling)");
    cmd->add_option("--window-ps", o.window_ps, "reconstruction window in ps");
    cmd->add_option("--format", o.format, "curve output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

// Flags win over the config file.
RunConfig effective_config(const CommonOpts& o) {
    RunConfig c = o.config_path.empty() ? presets::snspd()
                                        : load_config(o.config_path);
    if (!o.out_dir.empty()) c.output_dir = o.out_dir;
    if (o.seed >= 0) {
        c.seed = static_cast<unsigned long long>(o.seed);
        c.sampling_enabled = true;
    }
    if (o.window_ps > 0.0) c.window_ps = o.window_ps;
    if (!o.format.empty()) c.output_format = o.format;
    c.validate();
    return c;
}

fs::path prepare_out_dir(const RunConfig& c) {
    fs::path dir(c.output_dir);
    fs::create_directories(dir);
    save_config(c, (dir / "effective_config.json").string());
    return dir;
}

void write_curve(const tomo::Curve& curve, const fs::path& stem,
                 const std::string& value_name, const std::string& format) {
    if (format == "json") {
        json out = json::array();
        for (const auto& p : curve)
            out.push_back({{"tau_ps", io::round12(p.tau_ps)},
                           {value_name, io::round12(p.value)},
                           {"n_tau", io::round12(p.n_tau)}});
        std::ofstream f(stem.string() + ".json");
        f << out.dump(2) << '\n';
    } else {
        io::write_curve_csv(curve, stem.string() + ".csv", value_name);
    }
}

CoincidenceHistogramSet simulate_from_config(const RunConfig& c) {
    CoincidenceHistogramSet h =
        sim::expected_histograms(c.source, c.detector, c.grid, c.t_exp_s);
    if (c.sampling_enabled) h = sim::sample_histograms(h, c.seed);
    h.source_descriptor = to_json(c)["source"].dump();
    h.detector_descriptor = to_json(c)["detector"].dump();
    return h;
}

int cmd_simulate(const CommonOpts& o) {
    const RunConfig c = effective_config(o);
    const fs::path dir = prepare_out_dir(c);
    const CoincidenceHistogramSet h = simulate_from_config(c);
    if (c.t_exp_s == 0.0)
        std::cerr << "warning: zero-duration experiment, histograms are empty\n";
    io::write_histograms_csv(h, (dir / "histograms.csv").string());
    std::cout << "wrote " << (dir / "histograms.csv").string() << '\n';
    return 0;
}

int cmd_tomo(const CommonOpts& o, const std::string& hist_path,
             const std::vector<std::string>& metrics) {
    const RunConfig c = effective_config(o);
    const fs::path dir = prepare_out_dir(c);
    const CoincidenceHistogramSet h = hist_path.empty()
                                          ? simulate_from_config(c)
                                          : io::read_histograms_csv(hist_path);
    const tomo::TimeBinnedStates states =
        tomo::time_resolved_states(h, c.window_ps, c.mle);
    {
        std::ofstream f(dir / "states.json");
        f << io::states_to_json(states).dump(2) << '\n';
    }
    bool all_converged = true;
    for (const auto& e : states.entries) all_converged &= e.converged;

    const std::vector<std::string> wanted =
        metrics.empty() ? std::vector<std::string>{"concurrence"} : metrics;
    for (const std::string& m : wanted) {
        tomo::Metric metric;
        if (m == "concurrence") metric = tomo::Metric::Concurrence;
        else if (m == "fidelity-phi-plus") metric = tomo::Metric::FidelityPhiPlus;
        else if (m == "fidelity-phi-minus") metric = tomo::Metric::FidelityPhiMinus;
        else if (m == "fidelity-cascade") metric = tomo::Metric::FidelityCascade;
        else if (m == "fmax") metric = tomo::Metric::MaxEntangledFidelity;
        else throw config_error("unknown metric '" + m + "'");
        const tomo::Curve curve =
            tomo::metric_curve(states, metric, c.source.fss_uev);
        write_curve(curve, dir / m, m, c.output_format);
    }
    std::cout << "reconstructed " << states.entries.size() << " windows ("
              << states.skipped_tau_ps.size() << " skipped)\n";
    if (!all_converged) {
        std::cerr << "stage tomo: some windows did not converge\n";
        return 3;
    }
    return 0;
}

int cmd_fit(const CommonOpts& o, const std::string& kind,
            const std::string& data_path, const std::string& out_path,
            double response_fwhm_ps, double rep_period_ns, int sg_window,
            int sg_degree, const std::string& params_path) {
    fit::FitResult result;
    json extra;
    if (kind == "efficiency") {
        if (params_path.empty())
            throw config_error("fit efficiency requires --params JSON");
        std::ifstream f(params_path);
        if (!f) throw config_error("cannot open: " + params_path);
        const json p = json::parse(f);
        fit::EfficiencyInputs in;
        in.eta_prep_x = p.value("eta_prep_x", 0.0);
        in.eta_prep_xx = p.value("eta_prep_xx", 0.0);
        in.eta_blink = p.value("eta_blink", 1.0);
        in.sat_rate_x_hz = p.value("sat_rate_x_hz", 0.0);
        in.sat_rate_xx_hz = p.value("sat_rate_xx_hz", 0.0);
        in.eta_opt_sat = p.value("eta_opt_sat", 0.0);
        in.meas_rate_x_hz = p.value("meas_rate_x_hz", 0.0);
        in.meas_rate_xx_hz = p.value("meas_rate_xx_hz", 0.0);
        in.eta_opt_meas = p.value("eta_opt_meas", 0.0);
        in.f_rep_hz = p.value("f_rep_hz", 0.0);
        const fit::EfficiencyBudget b = fit::efficiency_budget(in);
        result.params = {{"eta_nw", b.eta_nw},
                         {"eta_int", b.eta_int},
                         {"eta_est", b.eta_est},
                         {"pair_extraction", b.pair_extraction}};
        result.converged = true;
        result.n_points = 0;
    } else {
        auto [x, y] = io::read_xy_csv(data_path);
        if (kind == "rabi") {
            result = fit::fit_rabi(x, y);
        } else if (kind == "lifetime") {
            result = fit::fit_lifetime(x, y, response_fwhm_ps);
        } else if (kind == "fss") {
            result = fit::fit_fss(x, y, response_fwhm_ps);
        } else if (kind == "blinking") {
            result = fit::fit_blinking(x, y);
        } else if (kind == "timing") {
            result = fit::extract_timing_response(x, y, {sg_window, sg_degree});
        } else if (kind == "g2") {
            const fit::HbtPeakAreas areas = fit::g2_from_hbt(x, y, rep_period_ns);
            result.params = {{"g2_nn", areas.g2},
                             {"center_area", areas.center_area}};
            for (const auto& [k, a] : areas.side_areas)
                result.params["side_area_" + std::to_string(k)] = a;
            result.converged = true;
        } else {
            throw CLI::ValidationError("--kind", "unknown fit kind '" + kind + "'");
        }
    }
    json out = io::fit_result_to_json(result);
    out["kind"] = kind;
    std::ofstream f(out_path);
    if (!f) throw config_error("cannot open for writing: " + out_path);
    f << out.dump(2) << '\n';
    std::cout << "wrote " << out_path << '\n';
    return result.converged ? 0 : 3;
}

int cmd_keyrate(const CommonOpts& o, const std::string& states_path,
                const std::string& hist_path, bool optimize, bool ideal_mode) {
    RunConfig c = effective_config(o);
    if (optimize) c.optimize_basis = true;
    const fs::path dir = prepare_out_dir(c);

    tomo::TimeBinnedStates states;
    if (ideal_mode) {
        // Exact oscillating states on the window grid, weighted by the decay.
        states.window_ps = c.window_ps;
        const double tau_max = c.keyrate_tau_max_or_default_ps();
        for (double t = c.keyrate_tau_min_ps + 0.5 * c.window_ps; t <= tau_max;
             t += c.window_ps) {
            const double tau_ns = ps_to_ns(t);
            states.entries.push_back(
                {t, pure_density(cascade_state(tau_ns, c.source.fss_uev)),
                 std::exp(-tau_ns / c.source.lifetime_ns), true});
        }
    } else if (!states_path.empty()) {
        std::ifstream f(states_path);
        if (!f) throw config_error("cannot open: " + states_path);
        states = io::states_from_json(json::parse(f));
    } else {
        const CoincidenceHistogramSet h = hist_path.empty()
                                              ? simulate_from_config(c)
                                              : io::read_histograms_csv(hist_path);
        states = tomo::time_resolved_states(h, c.window_ps, c.mle);
    }
    if (states.entries.empty())
        throw degenerate_data_error("no reconstructed states to evaluate");

    qkd::KeyRateCurve curve;
    if (c.optimize_basis) {
        auto [basis, best] = qkd::optimize_keyrate_basis(states, c.six_state);
        curve = qkd::time_resolved_keyrate(states, c.six_state, basis,
                                           c.keyrate_tau_min_ps,
                                           c.keyrate_tau_max_or_default_ps());
        curve.basis = basis;
    } else {
        curve = qkd::time_resolved_keyrate(states, c.six_state, {},
                                           c.keyrate_tau_min_ps,
                                           c.keyrate_tau_max_or_default_ps());
    }
    if (curve.entries.empty())
        throw degenerate_data_error("no states inside the key-rate tau range");
    io::write_keyrate_outputs(curve, (dir / "keyrate.csv").string(),
                              (dir / "keyrate_summary.json").string(),
                              to_json(c));
    std::cout << "R = " << io::fmt12(curve.pulse_averaged_rate) << " ("
              << curve.entries.size() << " bins)\n";
    return 0;
}

int cmd_reproduce(const CommonOpts& o) {
    const fs::path root = o.out_dir.empty() ? fs::path("reproduce")
                                            : fs::path(o.out_dir);
    struct Job {
        const char* name;
        RunConfig cfg;
    };
    std::vector<Job> jobs = {{"snspd", presets::snspd()},
                             {"spad", presets::spad()},
                             {"ideal", presets::ideal()}};
    for (auto& job : jobs) {
        job.cfg.output_dir = (root / job.name).string();
        if (o.seed >= 0) {
            job.cfg.seed = static_cast<unsigned long long>(o.seed);
            job.cfg.sampling_enabled = true;
        }
        const fs::path dir = prepare_out_dir(job.cfg);
        std::cout << "[" << job.name << "] simulating...\n";
        const CoincidenceHistogramSet h = simulate_from_config(job.cfg);
        io::write_histograms_csv(h, (dir / "histograms.csv").string());

        const tomo::TimeBinnedStates states =
            tomo::time_resolved_states(h, job.cfg.window_ps, job.cfg.mle);
        {
            std::ofstream f(dir / "states.json");
            f << io::states_to_json(states).dump(2) << '\n';
        }
        const tomo::Curve conc =
            tomo::metric_curve(states, tomo::Metric::Concurrence);
        write_curve(conc, dir / "concurrence", "concurrence",
                    job.cfg.output_format);

        qkd::KeyRateCurve curve;
        if (std::string(job.name) == "ideal") {
            tomo::TimeBinnedStates ideal_states;
            ideal_states.window_ps = job.cfg.window_ps;
            const double tau_max = job.cfg.keyrate_tau_max_or_default_ps();
            for (double t = 0.5 * job.cfg.window_ps; t <= tau_max;
                 t += job.cfg.window_ps) {
                const double tau_ns = ps_to_ns(t);
                ideal_states.entries.push_back(
                    {t, pure_density(cascade_state(tau_ns, job.cfg.source.fss_uev)),
                     std::exp(-tau_ns / job.cfg.source.lifetime_ns), true});
            }
            curve = qkd::time_resolved_keyrate(ideal_states, job.cfg.six_state);
        } else {
            curve = qkd::time_resolved_keyrate(
                states, job.cfg.six_state, {}, job.cfg.keyrate_tau_min_ps,
                job.cfg.keyrate_tau_max_or_default_ps());
        }
        io::write_keyrate_outputs(curve, (dir / "keyrate.csv").string(),
                                  (dir / "keyrate_summary.json").string(),
                                  to_json(job.cfg));
        std::cout << "[" << job.name
                  << "] R = " << io::fmt12(curve.pulse_averaged_rate) << '\n';
    }
    std::cout << "reproduction outputs under " << root.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entangled-pair cascade simulator and analysis toolkit"};
    app.require_subcommand(1);

    CommonOpts sim_o, tomo_o, key_o, rep_o;
    std::string hist_path, states_path, fit_kind, fit_data, fit_out, fit_params;
    std::vector<std::string> metrics;
    double response_fwhm_ps = 0.0, rep_period_ns = 0.0;
    int sg_window = 65, sg_degree = 6;
    bool optimize_basis = false, ideal_mode = false;

    CLI::App* c_sim = app.add_subcommand("simulate",
                                         "forward-model coincidence histograms");
    add_common(c_sim, sim_o);

    CLI::App* c_tomo = app.add_subcommand(
        "tomo", "time-binned maximum-likelihood reconstruction");
    add_common(c_tomo, tomo_o);
    c_tomo->add_option("--histograms", hist_path,
                       "input histogram CSV (default: simulate from config)");
    c_tomo->add_option("--metric", metrics,
                       "metric curves to emit (concurrence, fidelity-phi-plus, "
                       "fidelity-phi-minus, fidelity-cascade, fmax)");

    CLI::App* c_fit = app.add_subcommand("fit", "run one analysis fit");
    c_fit->add_option("--kind", fit_kind,
                      "rabi | lifetime | fss | blinking | timing | g2 | "
                      "efficiency")
        ->required();
    c_fit->add_option("--data", fit_data, "two-column CSV input");
    c_fit->add_option("--out", fit_out, "output JSON path")->required();
    c_fit->add_option("--response-fwhm-ps", response_fwhm_ps,
                      "detector response FWHM (lifetime, fss)");
    c_fit->add_option("--rep-period-ns", rep_period_ns,
                      "laser repetition period (g2)");
    c_fit->add_option("--sg-window", sg_window, "smoothing window (timing)");
    c_fit->add_option("--sg-degree", sg_degree, "smoothing degree (timing)");
    c_fit->add_option("--params", fit_params, "efficiency inputs JSON");

    CLI::App* c_key = app.add_subcommand("keyrate",
                                         "time-resolved six-state key rate");
    add_common(c_key, key_o);
    c_key->add_option("--states", states_path, "reconstructed states JSON");
    c_key->add_option("--histograms", hist_path, "histogram CSV to reconstruct");
    c_key->add_flag("--optimize-basis", optimize_basis,
                    "search the global key-map basis");
    c_key->add_flag("--ideal", ideal_mode,
                    "evaluate the ideal oscillating state instead of data");

    CLI::App* c_rep = app.add_subcommand(
        "reproduce", "chain simulate->tomo->keyrate for the three presets");
    add_common(c_rep, rep_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_sim->parsed()) return cmd_simulate(sim_o);
        if (c_tomo->parsed()) return cmd_tomo(tomo_o, hist_path, metrics);
        if (c_fit->parsed())
            return cmd_fit({}, fit_kind, fit_data, fit_out, response_fwhm_ps,
                           rep_period_ns, sg_window, sg_degree, fit_params);
        if (c_key->parsed())
            return cmd_keyrate(key_o, states_path, hist_path, optimize_basis,
                               ideal_mode);
        if (c_rep->parsed()) return cmd_reproduce(rep_o);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const degenerate_data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
