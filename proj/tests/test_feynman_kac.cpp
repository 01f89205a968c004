#include <catch2/catch_amalgamated.hpp>

#include "vortexflow/feynman_kac.hpp"
#include "vortexflow/oracles.hpp"
#include "vortexflow/parallel.hpp"
#include "vortexflow/random_fields.hpp"
#include "vortexflow/stepper.hpp"

using namespace vflow;

namespace {

const double kPi = std::numbers::pi;

LinearParabolicSystem pure_diffusion_1d(double sigma, double horizon) {
    LinearParabolicSystem sys;
    sys.space_dim = sys.system_dim = sys.noise_dim = 1;
    sys.horizon = horizon;
    sys.diffusion = [sigma](double, const double*, double* out) { out[0] = sigma; };
    sys.terminal = [](const double* x, double* out) { out[0] = std::cos(x[0]); };
    return sys;
}

VelocityProvider zero_velocity_2d() {
    VelocityProvider p;
    p.velocity = [](double, const double*, double* out) { out[0] = out[1] = 0.0; };
    p.gradient = [](double, const double*, double* out) { std::fill(out, out + 4, 0.0); };
    return p;
}

}  // namespace

TEST_CASE("all sources off: Y, Q, Z stay at their starting values") {
    LinearParabolicSystem sys = pure_diffusion_1d(1.0, 0.5);
    sys.system_dim = 2;
    sys.terminal = [](const double*, double* out) { out[0] = out[1] = 0.0; };
    PhiloxStream stream(4, 0);
    PathState p = weak_euler_path(sys, RepresentationChoice{}, {0.2}, {0.7, -0.3}, 0.5 / 16, stream);
    REQUIRE(p.y == std::vector<double>{0.7, -0.3});
    REQUIRE(p.q == 1.0);
    REQUIRE(p.z == 0.0);
    REQUIRE_FALSE(p.aborted);
    REQUIRE(p.s == 0.5);
}

TEST_CASE("weak Euler rejects a non-dividing step") {
    LinearParabolicSystem sys = pure_diffusion_1d(1.0, 0.5);
    PhiloxStream stream(4, 0);
    REQUIRE_THROWS_AS(weak_euler_path(sys, RepresentationChoice{}, {0.0}, {1.0}, 0.3, stream), ShapeError);
}

TEST_CASE("Gaussian smoothing closed form, both increment kinds") {
    LinearParabolicSystem sys = pure_diffusion_1d(1.0, 0.5);
    const double expect = std::cos(0.3) * std::exp(-0.25);
    McOptions opt;
    opt.h_sde = 0.5 / 32;
    for (Increments kind : {Increments::gaussian, Increments::two_point}) {
        opt.increments = kind;
        McEstimate est = estimate_solution(sys, RepresentationChoice{}, {0.3}, {}, 100000, 2024, opt);
        INFO("kind " << (kind == Increments::gaussian ? "gaussian" : "two_point"));
        REQUIRE(std::abs(est.value[0] - expect) <= 3.0 * est.std_error[0] + 2e-4);
    }
}

TEST_CASE("zero terminal data and zero source give a zero-variance zero") {
    LinearParabolicSystem sys = pure_diffusion_1d(1.0, 0.25);
    sys.terminal = [](const double*, double* out) { out[0] = 0.0; };
    McEstimate est = estimate_solution(sys, RepresentationChoice{}, {0.1}, {}, 500, 5, {});
    REQUIRE(est.value[0] == 0.0);
    REQUIRE(est.std_error[0] == 0.0);
}

TEST_CASE("vorticity specialization: u = 0 keeps Q at one and matches Stokes") {
    PeriodicGrid g(2, 8, 2.0 * kPi);
    SpectralField phi = single_mode_field(g, 1, WaveIndex(1, 0), 0, Complex(0.5, 0.0));
    SpectralField gshape = single_mode_field(g, 1, WaveIndex(0, 1), 0, Complex(0.25, 0.0));
    const double sigma = 1.0, horizon = 0.5;

    auto phi_ptr = std::make_shared<SpectralField>(phi);
    auto g_ptr = std::make_shared<SpectralField>(gshape);
    TerminalFn phi_fn = [phi_ptr](const double* x, double* out) { out[0] = evaluate_at(*phi_ptr, x); };
    VectorFn g_fn = [g_ptr](double, const double* x, double* out) { out[0] = evaluate_at(*g_ptr, x); };

    // Q == 1 exactly along every path when the drift vanishes
    {
        LinearParabolicSystem sys;
        sys.space_dim = 2;
        sys.system_dim = 1;
        sys.noise_dim = 2;
        sys.horizon = horizon;
        sys.diffusion = [](double, const double*, double* out) {
            out[0] = 1.0; out[1] = 0.0; out[2] = 0.0; out[3] = 1.0;
        };
        sys.terminal = phi_fn;
        RepresentationChoice drift_cancel;
        for (int r = 0; r < 2; ++r) drift_cancel.mus.push_back([](double, const double*) { return 0.0; });
        PhiloxStream stream(9, 3);
        PathState p = weak_euler_path(sys, drift_cancel, {0.3, 0.4}, {1.0}, horizon / 16, stream);
        REQUIRE(p.q == 1.0);
    }

    McOptions opt;
    opt.h_sde = horizon / 128;
    std::vector<double> point{0.7, 1.3};
    McEstimate est = vorticity_point_estimate(2, sigma, zero_velocity_2d(), g_fn, phi_fn, 0.0, horizon,
                                              point, 40000, 99, opt);
    SpectralField exact = stokes_exact_solution(phi, Forcing::constant(gshape), sigma, horizon);
    const double truth = evaluate_at(exact, point.data());
    INFO("estimate " << est.value[0] << " +- " << est.std_error[0] << ", truth " << truth);
    REQUIRE(std::abs(est.value[0] - truth) <= 3.0 * est.std_error[0] + 5e-4);
}

TEST_CASE("sigma -> 0 with u = 0 collapses onto the terminal value") {
    PeriodicGrid g(2, 8, 2.0 * kPi);
    SpectralField phi = single_mode_field(g, 1, WaveIndex(1, 0), 0, Complex(0.5, 0.0));
    auto phi_ptr = std::make_shared<SpectralField>(phi);
    TerminalFn phi_fn = [phi_ptr](const double* x, double* out) { out[0] = evaluate_at(*phi_ptr, x); };
    McOptions opt;
    opt.h_sde = 0.25 / 8;
    std::vector<double> point{0.9, 0.2};
    McEstimate est = vorticity_point_estimate(2, 1e-8, zero_velocity_2d(), VectorFn{}, phi_fn, 0.0, 0.25,
                                              point, 200, 1, opt);
    REQUIRE_THAT(est.value[0], Catch::Matchers::WithinAbs(evaluate_at(phi, point.data()), 1e-7));
    REQUIRE(est.std_error[0] < 1e-8);
}

TEST_CASE("representation family: means agree within combined error bars") {
    // frozen Taylor-Green advection over a short horizon
    PeriodicGrid g(2, 8, 2.0 * kPi);
    const double sigma = 0.8, horizon = 0.25;
    VelocityProvider provider = spectral_velocity_provider(taylor_green_solution(0.0, sigma, g).velocity);
    SpectralField phi = single_mode_field(g, 1, WaveIndex(1, 0), 0, Complex(0.5, 0.0));
    auto phi_ptr = std::make_shared<SpectralField>(phi);

    LinearParabolicSystem sys;
    sys.space_dim = 2;
    sys.system_dim = 1;
    sys.noise_dim = 2;
    sys.horizon = horizon;
    sys.drift = [provider](double s, const double* x, double* out) {
        provider.velocity(s, x, out);
        out[0] = -out[0];
        out[1] = -out[1];
    };
    sys.diffusion = [sigma](double, const double*, double* out) {
        out[0] = sigma; out[1] = 0.0; out[2] = 0.0; out[3] = sigma;
    };
    sys.terminal = [phi_ptr](const double* x, double* out) { out[0] = evaluate_at(*phi_ptr, x); };

    RepresentationChoice plain;  // mu = 0, F = 0: drifted X, Q == 1
    RepresentationChoice cancel;  // mu_r = -u^r/sigma plus a harmless F_r
    for (int r = 0; r < 2; ++r) {
        cancel.mus.push_back([provider, r, sigma](double s, const double* x) {
            double vel[3];
            provider.velocity(s, x, vel);
            return -vel[r] / sigma;
        });
        cancel.Fs.push_back([r](double, const double* x, double* out) {
            out[0] = 0.25 * std::sin(x[r]);
        });
    }

    McOptions opt;
    opt.h_sde = horizon / 64;
    std::vector<double> point{0.7, 1.9};
    McEstimate a = estimate_solution(sys, plain, point, {}, 60000, 51, opt);
    McEstimate b = estimate_solution(sys, cancel, point, {}, 60000, 52, opt);
    const double gap = std::abs(a.value[0] - b.value[0]);
    const double combined = std::sqrt(a.std_error[0] * a.std_error[0] + b.std_error[0] * b.std_error[0]);
    INFO("plain " << a.value[0] << " +- " << a.std_error[0] << ", family " << b.value[0] << " +- "
                  << b.std_error[0]);
    REQUIRE(gap <= 3.0 * combined);
    REQUIRE(a.std_error[0] > 0.0);
    REQUIRE(b.std_error[0] > 0.0);
    // the variance genuinely depends on the choice
    REQUIRE(std::abs(a.std_error[0] - b.std_error[0]) > 0.02 * std::max(a.std_error[0], b.std_error[0]));
}

TEST_CASE("Feynman-Kac point value agrees with the spectral frozen step") {
    // Both solve the same frozen linear PDE over one interval: the spectral
    // inner solver is the oracle for the probabilistic estimate.
    PeriodicGrid g(2, 8, 2.0 * kPi);
    const double sigma = 0.8, h = 0.125;
    SpectralField phi = taylor_green_solution(0.0, sigma, g).vorticity;
    phi += single_mode_field(g, 1, WaveIndex(2, 0), 0, Complex(0.3, 0.0));
    VelocityField u_hat = velocity_from_vorticity(phi);

    SolverConfig cfg;
    cfg.grid = g;
    cfg.sigma = sigma;
    cfg.horizon = h;
    cfg.outer_steps = 1;
    cfg.inner_substeps = 64;
    SpectralField stepped = advance_frozen(phi, u_hat, 0.0, h, cfg);

    VelocityProvider provider = spectral_velocity_provider(u_hat);
    auto phi_ptr = std::make_shared<SpectralField>(phi);
    TerminalFn phi_fn = [phi_ptr](const double* x, double* out) { out[0] = evaluate_at(*phi_ptr, x); };
    McOptions opt;
    opt.h_sde = h / 32.0;  // SDE bias well below the Monte Carlo noise
    std::vector<double> point{0.9, 2.2};
    McEstimate est =
        vorticity_point_estimate(2, sigma, provider, VectorFn{}, phi_fn, 0.0, h, point, 40000, 23, opt);
    const double truth = evaluate_at(stepped, point.data());
    INFO("estimate " << est.value[0] << " +- " << est.std_error[0] << ", spectral step " << truth);
    REQUIRE(std::abs(est.value[0] - truth) <= 3.0 * est.std_error[0] + 3e-4);
}

TEST_CASE("E[Q] = 1 and Q > 0 under the drift-cancelling choice") {
    const double sigma = 0.8, horizon = 0.25;
    PeriodicGrid g(2, 16, 2.0 * kPi);
    VelocityProvider provider = spectral_velocity_provider(taylor_green_solution(0.0, sigma, g).velocity);

    LinearParabolicSystem sys;
    sys.space_dim = 2;
    sys.system_dim = 1;
    sys.noise_dim = 2;
    sys.horizon = horizon;
    sys.drift = [provider](double s, const double* x, double* out) {
        provider.velocity(s, x, out);
        out[0] = -out[0];
        out[1] = -out[1];
    };
    sys.diffusion = [sigma](double, const double*, double* out) {
        out[0] = sigma; out[1] = 0.0; out[2] = 0.0; out[3] = sigma;
    };
    sys.terminal = [](const double*, double* out) { out[0] = 1.0; };  // estimator returns E[Q] since Y = 1

    RepresentationChoice cancel;
    for (int r = 0; r < 2; ++r)
        cancel.mus.push_back([provider, r, sigma](double s, const double* x) {
            double vel[3];
            provider.velocity(s, x, vel);
            return -vel[r] / sigma;
        });

    McOptions opt;
    opt.h_sde = horizon / 64;
    // terminal = 1 so the estimator returns E[Q]
    McEstimate eq = estimate_solution(sys, cancel, {0.4, 1.1}, {}, 60000, 31, opt);
    REQUIRE(std::abs(eq.value[0] - 1.0) <= 3.0 * eq.std_error[0]);

    double min_q = 1e300;
    for (std::size_t i = 0; i < 2000; ++i) {
        PhiloxStream stream(31, i);
        PathState p = weak_euler_path(sys, cancel, {0.4, 1.1}, {1.0}, opt.h_sde, stream);
        min_q = std::min(min_q, p.q);
    }
    REQUIRE(min_q > 0.0);
}

TEST_CASE("seed determinism across thread counts, error scaling with samples") {
    LinearParabolicSystem sys = pure_diffusion_1d(1.0, 0.5);
    McOptions opt;
    opt.h_sde = 0.5 / 16;
    set_thread_override(1);
    McEstimate a = estimate_solution(sys, RepresentationChoice{}, {0.1}, {}, 30000, 77, opt);
    set_thread_override(8);
    McEstimate b = estimate_solution(sys, RepresentationChoice{}, {0.1}, {}, 30000, 77, opt);
    set_thread_override(-1);
    REQUIRE(a.value[0] == b.value[0]);
    REQUIRE(a.std_error[0] == b.std_error[0]);

    McEstimate small = estimate_solution(sys, RepresentationChoice{}, {0.1}, {}, 20000, 78, opt);
    McEstimate big = estimate_solution(sys, RepresentationChoice{}, {0.1}, {}, 80000, 78, opt);
    REQUIRE(big.std_error[0] < 0.5 * 1.3 * small.std_error[0]);
    REQUIRE(big.std_error[0] > 0.5 * 0.7 * small.std_error[0]);
}

TEST_CASE("magnitude guards abort runaway paths and reject the estimate") {
    LinearParabolicSystem sys = pure_diffusion_1d(1.0, 4.0);
    sys.coupling = [](double, const double*, double* out) { out[0] = 10.0; };  // Y ~ e^{40}
    McOptions opt;
    opt.h_sde = 4.0 / 512;
    opt.guard_threshold = 1e6;
    REQUIRE_THROWS_AS(estimate_solution(sys, RepresentationChoice{}, {0.0}, {}, 64, 3, opt),
                      EstimateRejectedError);
}

TEST_CASE("Monte Carlo Fourier coefficients: cosine field and zero field") {
    PeriodicGrid g(2, 8, 2.0 * kPi);
    SpectralField cosine = single_mode_field(g, 1, WaveIndex(1, 0), 0, Complex(0.5, 0.0));
    auto eval = [&](const double* x) { return evaluate_at(cosine, x); };
    std::vector<WaveIndex> probes{WaveIndex(1, 0), WaveIndex(-1, 0), WaveIndex(0, 1), WaveIndex(1, 1)};
    auto estimates = mc_fourier_coefficients(eval, probes, 2, g.period, 40000, 11);
    for (const auto& [n, est] : estimates) {
        const Complex truth = cosine.coeff(0, n);
        REQUIRE(std::abs(est.value.real() - truth.real()) <= 3.5 * est.std_error_re);
        REQUIRE(std::abs(est.value.imag() - truth.imag()) <= 3.5 * est.std_error_im);
    }

    auto zeros = mc_fourier_coefficients([](const double*) { return 0.0; }, probes, 2, g.period, 100, 1);
    for (const auto& [n, est] : zeros) {
        REQUIRE(est.value == Complex(0.0, 0.0));
        REQUIRE(est.std_error_re == 0.0);
    }

    REQUIRE_THROWS_AS(mc_fourier_coefficients(eval, probes, 2, g.period, 1, 1), InsufficientDataError);
}

TEST_CASE("Monte Carlo Fourier coefficients of a Stokes-evolved field") {
    PeriodicGrid g(2, 8, 2.0 * kPi);
    SpectralField phi = random_smooth_field(g, 1, 64, 5.0);
    SpectralField evolved = stokes_exact_solution(phi, Forcing::none(), 1.0, 0.3);
    auto eval = [&](const double* x) { return evaluate_at(evolved, x); };
    std::vector<WaveIndex> probes{WaveIndex(1, 0), WaveIndex(1, 1), WaveIndex(2, -1)};
    auto estimates = mc_fourier_coefficients(eval, probes, 2, g.period, 60000, 12);
    for (const auto& [n, est] : estimates) {
        const Complex truth = evolved.coeff(0, n);
        REQUIRE(std::abs(est.value.real() - truth.real()) <= 3.5 * est.std_error_re);
        REQUIRE(std::abs(est.value.imag() - truth.imag()) <= 3.5 * est.std_error_im);
    }
}
