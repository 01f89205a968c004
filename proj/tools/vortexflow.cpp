// Command-line front end: experiment orchestration, report and snapshot I/O.
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 failed
// acceptance window under --assert.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vortexflow/vortexflow.hpp"

namespace {

using namespace vflow;

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::int64_t seed_override = -1;
    bool assert_windows = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--seed", args.seed_override, "override the config seed");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--format", args.format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--assert", args.assert_windows, "exit 4 when an acceptance window fails");
}

struct Experiment {
    ExperimentConfig config;
    std::uint64_t seed;
    std::string out_dir;
    std::string format;
    bool assert_windows;

    std::string path(const std::string& name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }
};

Experiment load_experiment(const CommonArgs& args) {
    Experiment exp{ExperimentConfig::from_file(args.config_path),
                   0,
                   args.out_dir,
                   args.format,
                   args.assert_windows};
    exp.seed = exp.config.get_seed("seed", 0);
    if (args.seed_override >= 0) exp.seed = static_cast<std::uint64_t>(args.seed_override);
    std::filesystem::create_directories(exp.out_dir);
    return exp;
}

void write_convergence(const Experiment& exp, const ConvergenceReport& report, const std::string& name) {
    const std::string file = exp.path(name + (exp.format == "csv" ? ".csv" : ".json"));
    write_report(report, file, exp.format);
    std::printf("%s: fitted_order=%.4g ci=[%.4g,%.4g] pass=%d saturated=%d -> %s\n", name.c_str(),
                report.fitted_order, report.ci_lo, report.ci_hi, report.pass ? 1 : 0,
                report.saturated ? 1 : 0, file.c_str());
}

int run_solve_det(const Experiment& exp) {
    const SolverConfig cfg = exp.config.solver();
    const SpectralField phi = exp.config.initial_vorticity(cfg.grid, exp.seed);
    const auto trajectory = run_deterministic(phi, cfg);
    double max_div = 0.0;
    for (const SchemeState& s : trajectory) {
        if (cfg.grid.dim == 3) max_div = std::max(max_div, l2_norm(divergence(s.omega)));
        std::printf("t=%-10.6g |omega|=%.12g |u|=%.12g\n", s.t, l2_norm(s.omega),
                    l2_norm(s.frozen_velocity.field));
    }
    if (cfg.grid.dim == 3) std::printf("max ||div omega|| over the run: %.3e\n", max_div);
    save_snapshot(trajectory.back().omega, trajectory.back().t, exp.path("omega_final.vxf"));
    return 0;
}

int run_solve_snse(const Experiment& exp) {
    const SolverConfig cfg = exp.config.solver();
    const SpectralField phi = exp.config.initial_vorticity(cfg.grid, exp.seed);
    const NoiseSpec noise = exp.config.noise(cfg.grid, exp.seed);
    const BrownianPaths paths = BrownianPaths::generate(
        noise.channels(), static_cast<std::size_t>(cfg.outer_steps), cfg.step_size(), exp.seed);
    const auto trajectory = run_snse(phi, cfg, noise, paths);
    for (const SpdeState& s : trajectory)
        std::printf("t=%-10.6g |omega|=%.12g\n", s.t, l2_norm(s.omega));
    save_snapshot(trajectory.back().omega, trajectory.back().t, exp.path("omega_final.vxf"));
    paths.save(exp.path("brownian.brn"));
    return 0;
}

int run_stokes_oracle(const Experiment& exp) {
    const SolverConfig cfg = exp.config.solver();
    const SpectralField phi = exp.config.initial_vorticity(cfg.grid, exp.seed);
    const SpectralField exact = stokes_exact_solution(phi, cfg.forcing, cfg.sigma, cfg.horizon);
    save_snapshot(exact, cfg.horizon, exp.path("stokes_exact.vxf"));
    std::printf("|omega_exact(T)| = %.12g -> %s\n", l2_norm(exact), exp.path("stokes_exact.vxf").c_str());
    return 0;
}

int run_convergence(const Experiment& exp) {
    const SolverConfig cfg = exp.config.solver();
    const SpectralField phi = exp.config.initial_vorticity(cfg.grid, exp.seed);
    const std::vector<int> steps = exp.config.get_int_list("study_steps", "8,16,32,64");
    const std::string problem = exp.config.get_string("problem", "det2d");
    bool ok = true;
    if (problem == "snse") {
        const NoiseSpec noise = exp.config.noise(cfg.grid, exp.seed);
        const int reference = exp.config.get_int("study_reference", 256);
        const std::size_t ensemble = static_cast<std::size_t>(exp.config.get_int("ensemble", 64));
        const ConvergenceReport report = mean_square_order_study(
            phi, cfg, noise, steps, reference, ensemble, exp.seed,
            exp.config.get_double("window_lo", 0.75), exp.config.get_double("window_hi", 1.25));
        write_convergence(exp, report, "convergence_omega");
        ok = report.pass;
    } else {
        const std::string oracle_name = exp.config.get_string("oracle", "taylor-green");
        DetOracle oracle = DetOracle::taylor_green;
        if (oracle_name == "fine-reference") oracle = DetOracle::fine_reference;
        else if (oracle_name == "stokes") oracle = DetOracle::stokes;
        else if (oracle_name != "taylor-green")
            throw ConfigError("config: oracle must be taylor-green, fine-reference or stokes");
        const DetStudy study = deterministic_convergence_study(
            cfg, phi, steps, oracle, exp.config.get_int("study_reference", 0),
            exp.config.get_double("window_lo", 0.8), exp.config.get_double("window_hi", 1.2));
        write_convergence(exp, study.omega_report, "convergence_omega");
        write_convergence(exp, study.velocity_report, "convergence_velocity");
        ok = study.omega_report.pass && study.velocity_report.pass;
    }
    return ok || !exp.assert_windows ? 0 : 4;
}

int run_one_step_probe(const Experiment& exp) {
    const SolverConfig cfg = exp.config.solver();
    const SpectralField phi = exp.config.initial_vorticity(cfg.grid, exp.seed);
    const NoiseSpec noise = exp.config.noise(cfg.grid, exp.seed);
    const std::vector<double> h_list = exp.config.get_double_list("probe_h", "0.2,0.1,0.05,0.025");
    const int fine_factor = exp.config.get_int("probe_fine_factor", 32);
    const std::size_t ensemble =
        noise.channels() == 0 ? 1 : static_cast<std::size_t>(exp.config.get_int("ensemble", 64));

    SpdeState state;
    state.t = 0.0;
    state.omega = phi;
    state.frozen_velocity = recover_velocity(phi, cfg);

    const bool stochastic = noise.channels() > 0;
    const double ms_lo = stochastic ? 1.3 : 1.7;
    const double ms_hi = stochastic ? 1.7 : 2.3;
    const OneStepProbe probe =
        one_step_error_probe(state, h_list, cfg, noise, fine_factor, ensemble, exp.seed, 1.7, 2.3, ms_lo, ms_hi);
    write_convergence(exp, probe.conditional_mean, "probe_conditional_mean");
    write_convergence(exp, probe.mean_square, "probe_mean_square");
    const bool ok = probe.conditional_mean.pass && probe.mean_square.pass;
    return ok || !exp.assert_windows ? 0 : 4;
}

int run_fk_estimate(const Experiment& exp) {
    const SolverConfig cfg = exp.config.solver();
    if (cfg.grid.dim != 2) throw ConfigError("fk-estimate: the CLI path is 2D");
    const SpectralField phi = exp.config.initial_vorticity(cfg.grid, exp.seed);
    const std::vector<double> point = exp.config.get_double_list("point", "0.7,1.3");
    if (point.size() != 2) throw ConfigError("fk-estimate: point needs dim entries");
    const std::size_t samples = static_cast<std::size_t>(exp.config.get_int("samples", 100000));
    McOptions opt;
    opt.h_sde = exp.config.get_double("h_sde", cfg.horizon / 256.0);

    const std::string system = exp.config.get_string("fk_system", "stokes");
    VelocityProvider provider;
    bool have_oracle = false;
    double oracle_value = 0.0;
    if (system == "stokes") {
        provider.velocity = [](double, const double*, double* out) { out[0] = out[1] = 0.0; };
        provider.gradient = [](double, const double*, double* out) {
            for (int i = 0; i < 4; ++i) out[i] = 0.0;
        };
        const SpectralField exact = stokes_exact_solution(phi, cfg.forcing, cfg.sigma, cfg.horizon);
        oracle_value = evaluate_at(exact, point.data());
        have_oracle = true;
    } else if (system == "frozen-taylor-green") {
        provider = spectral_velocity_provider(taylor_green_solution(0.0, cfg.sigma, cfg.grid).velocity);
    } else {
        throw ConfigError("fk-estimate: fk_system must be stokes or frozen-taylor-green");
    }

    // backward system over [0, T] with terminal condition phi: the estimate
    // equals the forward frozen solve at elapsed time T
    Forcing forcing = cfg.forcing;
    VectorFn g_fn;
    if (!forcing.empty()) {
        auto shape = std::make_shared<SpectralField>(forcing.eval(0.0));
        g_fn = [shape](double, const double* x, double* out) { out[0] = evaluate_at(*shape, x); };
    }
    auto phi_shape = std::make_shared<SpectralField>(phi);
    TerminalFn phi_fn = [phi_shape](const double* x, double* out) { out[0] = evaluate_at(*phi_shape, x); };

    const std::string choice_name = exp.config.get_string("fk_choice", "drift-cancel");
    McEstimate est;
    if (choice_name == "drift-cancel") {
        est = vorticity_point_estimate(2, cfg.sigma, provider, g_fn, phi_fn, 0.0, cfg.horizon, point,
                                       samples, exp.seed, opt);
    } else if (choice_name == "plain") {
        LinearParabolicSystem sys;
        sys.space_dim = 2;
        sys.system_dim = 1;
        sys.noise_dim = 2;
        sys.t0 = 0.0;
        sys.horizon = cfg.horizon;
        sys.drift = [provider](double s, const double* x, double* out) {
            provider.velocity(s, x, out);
            out[0] = -out[0];
            out[1] = -out[1];
        };
        const double sigma = cfg.sigma;
        sys.diffusion = [sigma](double, const double*, double* out) {
            out[0] = sigma; out[1] = 0.0; out[2] = 0.0; out[3] = sigma;
        };
        sys.source = g_fn;
        sys.terminal = phi_fn;
        est = estimate_solution(sys, RepresentationChoice{}, point, {}, samples, exp.seed, opt);
    } else {
        throw ConfigError("fk-estimate: fk_choice must be drift-cancel or plain");
    }

    std::ofstream out(exp.path("fk_estimate.csv"));
    out << "component,value,std_error,samples\n";
    for (std::size_t c = 0; c < est.value.size(); ++c)
        out << c << ',' << format_g17(est.value[c]) << ',' << format_g17(est.std_error[c]) << ','
            << est.samples << '\n';
    std::printf("fk-estimate at (%.4g,%.4g): %.8g +- %.2e (n=%zu, aborted=%zu)\n", point[0], point[1],
                est.value[0], est.std_error[0], est.samples, est.aborted);
    if (have_oracle) {
        const double gap = std::abs(est.value[0] - oracle_value);
        std::printf("closed form: %.8g, |gap| = %.3e (3 se = %.3e)\n", oracle_value, gap,
                    3.0 * est.std_error[0]);
        if (exp.assert_windows && gap > 3.0 * est.std_error[0]) return 4;
    }
    return 0;
}

int run_mc_fourier(const Experiment& exp) {
    const PeriodicGrid grid = exp.config.grid();
    const SpectralField field = exp.config.initial_vorticity(grid, exp.seed);
    const std::vector<WaveIndex> probes = exp.config.get_mode_list("mc_modes", grid.dim, "1 0; -1 0; 0 1; 1 1");
    const std::size_t outer = static_cast<std::size_t>(exp.config.get_int("mc_outer", 40000));
    auto field_ptr = std::make_shared<SpectralField>(field);
    const auto estimates = mc_fourier_coefficients(
        [field_ptr](const double* x) { return evaluate_at(*field_ptr, x); }, probes, grid.dim, grid.period,
        outer, exp.seed);

    std::ofstream out(exp.path("mc_fourier.csv"));
    out << "mode,re,im,std_error_re,std_error_im,samples\n";
    bool ok = true;
    for (const auto& [n, est] : estimates) {
        out << n.str() << ',' << format_g17(est.value.real()) << ',' << format_g17(est.value.imag()) << ','
            << format_g17(est.std_error_re) << ',' << format_g17(est.std_error_im) << ',' << est.samples
            << '\n';
        const Complex truth = field.coeff(0, n);
        const bool within = std::abs(est.value.real() - truth.real()) <= 3.0 * est.std_error_re &&
                            std::abs(est.value.imag() - truth.imag()) <= 3.0 * est.std_error_im;
        ok = ok && within;
        std::printf("omega_%s = %.6g%+.6gi +- (%.2e,%.2e) truth %.6g%+.6gi %s\n", n.str().c_str(),
                    est.value.real(), est.value.imag(), est.std_error_re, est.std_error_im, truth.real(),
                    truth.imag(), within ? "ok" : "OFF");
    }
    return ok || !exp.assert_windows ? 0 : 4;
}

int run_monitor(const Experiment& exp) {
    const SolverConfig cfg = exp.config.solver();
    const SpectralField phi = exp.config.initial_vorticity(cfg.grid, exp.seed);
    const NoiseSpec noise = exp.config.noise(cfg.grid, exp.seed);
    const std::size_t ensemble = static_cast<std::size_t>(exp.config.get_int("ensemble", 64));
    const int p = exp.config.get_int("monitor_p", 1);
    const double beta = exp.config.get_double("monitor_beta", 0.05);
    const auto trajectories = run_snse_ensemble(phi, cfg, noise, ensemble, exp.seed);
    const MonitorReport rep = moment_monitor(trajectories, noise, cfg, p, beta);

    std::ofstream out(exp.path("monitor.csv"));
    out << "t,mean_norm_2p,source_integral,exp_functional,exp_rhs\n";
    for (std::size_t k = 0; k < rep.times.size(); ++k)
        out << format_g17(rep.times[k]) << ',' << format_g17(rep.mean_norm_2p[k]) << ','
            << format_g17(rep.source_integral[k]) << ',' << format_g17(rep.exp_functional[k]) << ','
            << format_g17(rep.exp_rhs[k]) << '\n';
    std::printf("monitor: sup_k E|omega|^%d = %.8g, K_hat = %.4g, moments_bounded=%d, exp_within_bound=%d\n",
                2 * p, rep.sup_mean_norm_2p, rep.k_hat, rep.moments_bounded ? 1 : 0,
                rep.exp_within_bound ? 1 : 0);
    return rep.moments_bounded || !exp.assert_windows ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vortexflow: frozen-velocity vorticity solvers on the periodic torus"};
    app.require_subcommand(1);

    CommonArgs args;
    std::map<std::string, std::function<int(const Experiment&)>> actions = {
        {"solve-det", run_solve_det},       {"solve-snse", run_solve_snse},
        {"stokes-oracle", run_stokes_oracle}, {"convergence", run_convergence},
        {"one-step-probe", run_one_step_probe}, {"fk-estimate", run_fk_estimate},
        {"mc-fourier", run_mc_fourier},     {"monitor", run_monitor},
    };
    const std::map<std::string, std::string> blurbs = {
        {"solve-det", "deterministic frozen-velocity run (2D/3D)"},
        {"solve-snse", "stochastic 2D run with additive noise"},
        {"stokes-oracle", "closed-form Stokes vorticity at the horizon"},
        {"convergence", "global-order study (deterministic or mean-square)"},
        {"one-step-probe", "one-step conditional-mean / mean-square exponents"},
        {"fk-estimate", "Feynman-Kac point estimate of the vorticity"},
        {"mc-fourier", "Monte Carlo Fourier coefficients of a field"},
        {"monitor", "moment and exponential-functional monitor"},
    };
    for (auto& [name, fn] : actions) add_common(app.add_subcommand(name, blurbs.at(name)), args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const Experiment exp = load_experiment(args);
        for (auto& [name, fn] : actions)
            if (app.get_subcommand(name)->parsed()) return fn(exp);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
