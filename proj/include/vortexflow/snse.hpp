#pragma once

#include "vortexflow/brownian.hpp"
#include "vortexflow/convergence.hpp"
#include "vortexflow/noise.hpp"
#include "vortexflow/parallel.hpp"

namespace vflow {

struct SpdeState {
    double t = 0.0;
    SpectralField omega;            // scalar vorticity
    VelocityField frozen_velocity;  // v frozen at the interval's left endpoint
    std::vector<double> brownian_cursor;  // per-channel accumulated Wiener value
};

namespace detail {

// Per-mode weight making the injected one-step noise variance match the exact
// OU value |mu_n|^2 (1 - e^{-2 lambda h}) / (2 lambda): w = sqrt of that over
// |mu_n|^2 h.
inline std::vector<double> ou_weights(const PeriodicGrid& grid, double sigma, double h) {
    const double nu = 0.5 * sigma * sigma;
    const double k2 = grid.wavenumber() * grid.wavenumber();
    std::vector<double> w(grid.point_count(), 1.0);
    for_each_mode(grid, [&](std::size_t flat, const WaveIndex& wv) {
        const double lh = nu * k2 * static_cast<double>(wv.norm2()) * h;
        w[flat] = lh == 0.0 ? 1.0 : std::sqrt(-std::expm1(-2.0 * lh) / (2.0 * lh));
    });
    return w;
}

}  // namespace detail

// One step of the frozen-velocity scheme for the 2D stochastic vorticity
// equation: the deterministic part reuses the deterministic inner solver
// bit-for-bit, then each channel injects mu_r dw_r with the exact per-mode OU
// weight (constant-in-time shapes) or plain left-point weighting (modulated
// shapes). Increments are supplied externally so coupled resolutions can share
// one Brownian path.
inline SpdeState spde_frozen_step(const SpdeState& state, double h, const SolverConfig& config,
                                  const NoiseSpec& noise, const std::vector<double>& increments) {
    const int q = noise.channels();
    if (static_cast<int>(increments.size()) != q)
        throw ShapeError("spde_frozen_step: increment count does not match the noise dimension");

    SpectralField omega = advance_frozen(state.omega, state.frozen_velocity, state.t, h, config);
    if (q > 0) {
        std::vector<double> weights;
        for (int r = 0; r < q; ++r) {
            const SpectralField& mu = noise.mus[static_cast<std::size_t>(r)];
            const double dw = increments[static_cast<std::size_t>(r)];
            if (noise.modulated(r)) {
                const double scale = noise.modulations[static_cast<std::size_t>(r)](state.t) * dw;
                for_each_mode(omega.grid(), [&](std::size_t flat, const WaveIndex&) {
                    omega.coeff(0, flat) += scale * mu.coeff(0, flat);
                });
            } else {
                if (weights.empty()) weights = detail::ou_weights(omega.grid(), config.sigma, h);
                for_each_mode(omega.grid(), [&](std::size_t flat, const WaveIndex&) {
                    omega.coeff(0, flat) += weights[flat] * dw * mu.coeff(0, flat);
                });
            }
        }
        omega.remove_mean();
    }

    SpdeState next;
    next.t = state.t + h;
    next.frozen_velocity = recover_velocity(omega, config);
    next.omega = std::move(omega);
    next.brownian_cursor = state.brownian_cursor;
    if (next.brownian_cursor.size() != static_cast<std::size_t>(q))
        next.brownian_cursor.assign(static_cast<std::size_t>(q), 0.0);
    for (int r = 0; r < q; ++r) next.brownian_cursor[static_cast<std::size_t>(r)] += increments[static_cast<std::size_t>(r)];
    return next;
}

// Chains spde_frozen_step over all increments in `paths` starting from
// `start`; the frozen velocity refreshes at every node.
inline std::vector<SpdeState> chain_snse(const SpdeState& start, const SolverConfig& config,
                                         const NoiseSpec& noise, const BrownianPaths& paths) {
    if (paths.channels != noise.channels())
        throw ShapeError("chain_snse: Brownian channel count does not match the noise spec");
    std::vector<SpdeState> trajectory;
    trajectory.reserve(paths.steps + 1);
    trajectory.push_back(start);
    std::vector<double> dw(static_cast<std::size_t>(paths.channels));
    for (std::size_t k = 0; k < paths.steps; ++k) {
        for (int r = 0; r < paths.channels; ++r) dw[static_cast<std::size_t>(r)] = paths.increment(k, r);
        trajectory.push_back(spde_frozen_step(trajectory.back(), paths.h, config, noise, dw));
    }
    return trajectory;
}

// Full method of Section 5.3 driven by externally supplied (or generated)
// increments: omega_0 = phi, v_0 = U phi, then N frozen steps.
inline std::vector<SpdeState> run_snse(const SpectralField& phi, const SolverConfig& config,
                                       const NoiseSpec& noise, const BrownianPaths& paths) {
    if (phi.components() != 1) throw ComponentCountError("run_snse: 2D vorticity must be scalar");
    if (paths.steps != static_cast<std::size_t>(config.outer_steps) ||
        std::abs(paths.h - config.step_size()) > 1e-12 * config.step_size())
        throw ShapeError("run_snse: Brownian path resolution does not match the solver config");
    SpdeState start;
    start.t = 0.0;
    start.omega = phi;
    start.frozen_velocity = recover_velocity(phi, config);
    start.brownian_cursor.assign(static_cast<std::size_t>(noise.channels()), 0.0);
    return chain_snse(start, config, noise, paths);
}

inline std::vector<SpdeState> run_snse(const SpectralField& phi, const SolverConfig& config,
                                       const NoiseSpec& noise, std::uint64_t seed) {
    return run_snse(phi, config, noise,
                    BrownianPaths::generate(noise.channels(), static_cast<std::size_t>(config.outer_steps),
                                            config.step_size(), seed));
}

// ---- mean-square global order (Theorem 5.7 check) ---------------------------

// Coupled-path self-refinement: one fine Brownian path per ensemble member is
// drawn at the reference resolution and aggregated for every coarser run, so
// err(h) = sqrt(E ||omega_h(T) - omega_ref(T)||^2) measures pure time
// discretization error. Step counts must divide the reference count.
inline ConvergenceReport mean_square_order_study(const SpectralField& phi, const SolverConfig& base,
                                                 const NoiseSpec& noise, std::vector<int> step_counts,
                                                 int reference_steps, std::size_t ensemble,
                                                 std::uint64_t seed, double window_lo = 0.75,
                                                 double window_hi = 1.25) {
    if (step_counts.size() < 3)
        throw InsufficientDataError("mean_square_order_study: need at least 3 step counts");
    std::sort(step_counts.begin(), step_counts.end(), std::greater<int>());
    for (int n : step_counts)
        if (n <= 0 || reference_steps % n != 0)
            throw NestingError("mean_square_order_study: step count " + std::to_string(n) +
                               " does not divide the reference count " + std::to_string(reference_steps));

    const std::size_t cases = step_counts.size();
    std::vector<std::vector<double>> err2(ensemble, std::vector<double>(cases, 0.0));
    const double h_fine = base.horizon / reference_steps;

    parallel_for_index(ensemble, [&](std::size_t member) {
        const BrownianPaths fine = BrownianPaths::generate(
            noise.channels(), static_cast<std::size_t>(reference_steps), h_fine, derive_seed(seed, member));
        SolverConfig ref_cfg = base;
        ref_cfg.outer_steps = reference_steps;
        const SpectralField omega_ref = run_snse(phi, ref_cfg, noise, fine).back().omega;
        for (std::size_t c = 0; c < cases; ++c) {
            SolverConfig cfg = base;
            cfg.outer_steps = step_counts[c];
            const BrownianPaths coarse = fine.aggregate(static_cast<std::size_t>(reference_steps / step_counts[c]));
            const SpectralField omega_h = run_snse(phi, cfg, noise, coarse).back().omega;
            const double d = l2_distance(omega_h, omega_ref);
            err2[member][c] = d * d;
        }
    });

    std::vector<ConvergenceRow> rows;
    for (std::size_t c = 0; c < cases; ++c) {
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t e = 0; e < ensemble; ++e) {
            sum += err2[e][c];
            sumsq += err2[e][c] * err2[e][c];
        }
        const double n = static_cast<double>(ensemble);
        const double mean2 = sum / n;
        const double var2 = std::max(0.0, (sumsq - n * mean2 * mean2) / (n - 1.0));
        const double err = std::sqrt(mean2);
        const double se = err > 0.0 ? std::sqrt(var2 / n) / (2.0 * err) : 0.0;
        rows.push_back({base.horizon / step_counts[c], err, se, ensemble});
    }
    return fit_order(rows, window_lo, window_hi);
}

// ---- one-step orders (Theorem 5.4 check) -------------------------------------

struct OneStepProbe {
    ConvergenceReport conditional_mean;  // ||E[delta | F_t]||, exponent target 2
    ConvergenceReport mean_square;       // (E||delta||^2)^{1/2}, exponent target 3/2
};

// For each h: one frozen step against an unfrozen reference, both driven by
// the same fine Brownian increments (the reference refreshes its velocity
// every fine substep). Ensemble statistics give the conditional-mean and
// mean-square one-step errors.
inline OneStepProbe one_step_error_probe(const SpdeState& state0, const std::vector<double>& h_list,
                                         const SolverConfig& config, const NoiseSpec& noise,
                                         int fine_factor, std::size_t ensemble, std::uint64_t seed,
                                         double cm_lo = 1.7, double cm_hi = 2.3, double ms_lo = 1.3,
                                         double ms_hi = 1.7) {
    if (h_list.size() < 3) throw InsufficientDataError("one_step_error_probe: need at least 3 step sizes");
    const std::size_t cases = h_list.size();
    const int q = noise.channels();

    std::vector<std::vector<SpectralField>> deltas(ensemble, std::vector<SpectralField>(cases));
    parallel_for_index(ensemble, [&](std::size_t member) {
        for (std::size_t c = 0; c < cases; ++c) {
            const double h = h_list[c];
            const double h_fine = h / fine_factor;
            const BrownianPaths fine = BrownianPaths::generate(
                q, static_cast<std::size_t>(fine_factor), h_fine,
                derive_seed(seed, member * cases + c));
            const SpdeState ref = chain_snse(state0, config, noise, fine).back();
            std::vector<double> dw(static_cast<std::size_t>(q), 0.0);
            for (std::size_t k = 0; k < fine.steps; ++k)
                for (int r = 0; r < q; ++r) dw[static_cast<std::size_t>(r)] += fine.increment(k, r);
            const SpdeState coarse = spde_frozen_step(state0, h, config, noise, dw);
            SpectralField d = coarse.omega;
            d -= ref.omega;
            deltas[member][c] = std::move(d);
        }
    });

    std::vector<ConvergenceRow> cm_rows, ms_rows;
    const std::size_t groups = std::min<std::size_t>(8, ensemble);
    for (std::size_t c = 0; c < cases; ++c) {
        SpectralField mean_field = deltas[0][c];
        double sum2 = 0.0, sum4 = 0.0;
        std::vector<SpectralField> group_mean(groups, SpectralField(mean_field.grid(), 1));
        mean_field.fill_zero();
        for (std::size_t e = 0; e < ensemble; ++e) {
            mean_field += deltas[e][c];
            group_mean[e * groups / ensemble] += deltas[e][c];
            const double n2 = l2_norm(deltas[e][c]);
            sum2 += n2 * n2;
            sum4 += n2 * n2 * n2 * n2;
        }
        mean_field *= 1.0 / static_cast<double>(ensemble);
        const double n = static_cast<double>(ensemble);
        const double cm_err = l2_norm(mean_field);
        double group_se = 0.0;
        if (groups > 1 && ensemble >= 2 * groups) {
            double gsum = 0.0, gsumsq = 0.0;
            for (std::size_t j = 0; j < groups; ++j) {
                const double v = l2_norm(group_mean[j]) * static_cast<double>(groups) / n;
                gsum += v;
                gsumsq += v * v;
            }
            const double gmean = gsum / groups;
            const double gvar = std::max(0.0, (gsumsq - groups * gmean * gmean) / (groups - 1.0));
            group_se = std::sqrt(gvar / groups);
        }
        cm_rows.push_back({h_list[c], cm_err, group_se, ensemble});
        const double mean2 = sum2 / n;
        const double var2 = ensemble > 1 ? std::max(0.0, (sum4 - n * mean2 * mean2) / (n - 1.0)) : 0.0;
        const double ms_err = std::sqrt(mean2);
        const double ms_se = ms_err > 0.0 && ensemble > 1 ? std::sqrt(var2 / n) / (2.0 * ms_err) : 0.0;
        ms_rows.push_back({h_list[c], ms_err, ms_se, ensemble});
    }
    OneStepProbe probe;
    probe.conditional_mean = fit_order(cm_rows, cm_lo, cm_hi);
    probe.mean_square = fit_order(ms_rows, ms_lo, ms_hi);
    return probe;
}

// ---- moment monitor (Theorem 5.5 / Lemma 5.1 / Theorem 5.6) ------------------

struct MonitorReport {
    int p = 1;
    double beta = 0.0;
    int sobolev_order = 0;
    std::vector<double> times;
    std::vector<double> mean_norm_2p;      // E||omega_k||_m^{2p}
    std::vector<double> source_integral;   // m=0: int (||g||^{2p} + sum_r ||mu_r||^{2p}); m>0: t
    double k_hat = 0.0;                    // smallest empirical K satisfying the moment bound
    double sup_mean_norm_2p = 0.0;
    std::vector<double> exp_functional;    // Lemma 5.1 LHS, ensemble mean per node
    std::vector<double> exp_rhs;           // Lemma 5.1 RHS per node
    // mean exceeds the RHS beyond 3 sampling standard errors at some node;
    // growing true for increasing beta locates the empirical beta_0
    bool exp_within_bound = true;
    bool moments_bounded = true;           // sup over k attained without growth at the tail
};

// Tracks E||omega_k||_m^{2p} against the additive moment bound (empirical
// constant K reported) and the exponential functional against its bound.
// sobolev_order selects the norm: 0 checks the L2 bound with the explicit
// source integral, m > 0 checks the ||.||_m bound whose source grows linearly
// in time.
inline MonitorReport moment_monitor(const std::vector<std::vector<SpdeState>>& trajectories,
                                    const NoiseSpec& noise, const SolverConfig& config, int p,
                                    double beta, int sobolev_order = 0) {
    if (trajectories.empty() || trajectories.front().empty())
        throw InsufficientDataError("moment_monitor: empty ensemble");
    const std::size_t nodes = trajectories.front().size();
    const std::size_t members = trajectories.size();
    const double kappa2 = config.grid.wavenumber() * config.grid.wavenumber();

    MonitorReport rep;
    rep.p = p;
    rep.beta = beta;
    rep.sobolev_order = sobolev_order;

    // static source magnitudes; time-dependent forcing sampled per node
    std::vector<double> mu_norm_2p(static_cast<std::size_t>(noise.channels()));
    std::vector<double> mu_norm_2(static_cast<std::size_t>(noise.channels()));
    for (int r = 0; r < noise.channels(); ++r) {
        const double nr = l2_norm(noise.mus[static_cast<std::size_t>(r)]);
        mu_norm_2[static_cast<std::size_t>(r)] = nr * nr;
        mu_norm_2p[static_cast<std::size_t>(r)] = std::pow(nr, 2.0 * p);
    }

    const double phi_norm = l2_norm(trajectories.front().front().omega);  // Lemma 5.1 uses L2
    const double phi_2p = std::pow(sobolev_norm(trajectories.front().front().omega, sobolev_order), 2.0 * p);

    double source_acc = 0.0;   // for (sns27)
    double exp_rhs_acc = 0.0;  // for (sns30x)
    std::vector<double> grad_int(members, 0.0);
    rep.k_hat = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
        const double t = trajectories.front()[k].t;
        const double h = k + 1 < nodes ? trajectories.front()[k + 1].t - t : 0.0;
        double mean2p = 0.0, mean_exp = 0.0, sq_exp = 0.0;
        for (std::size_t e = 0; e < members; ++e) {
            const SpdeState& s = trajectories[e][k];
            const double n2 = std::pow(l2_norm(s.omega), 2.0);
            const double nm = sobolev_order == 0 ? n2 : std::pow(sobolev_norm(s.omega, sobolev_order), 2.0);
            mean2p += std::pow(nm, static_cast<double>(p));
            const double functional =
                std::exp(beta * (n2 - phi_norm * phi_norm) +
                         beta * 0.25 * config.sigma * config.sigma * grad_int[e]);
            mean_exp += functional;
            sq_exp += functional * functional;
            const double gn = h1_seminorm(s.omega);
            grad_int[e] += h * gn * gn;  // left-point quadrature for the next node
        }
        mean2p /= static_cast<double>(members);
        mean_exp /= static_cast<double>(members);
        const double var_exp =
            members > 1
                ? std::max(0.0, (sq_exp - members * mean_exp * mean_exp) / (members - 1.0))
                : 0.0;
        const double se_exp = std::sqrt(var_exp / members);

        rep.times.push_back(t);
        rep.mean_norm_2p.push_back(mean2p);
        rep.source_integral.push_back(source_acc);
        rep.exp_functional.push_back(mean_exp);
        rep.exp_rhs.push_back(std::exp(beta * exp_rhs_acc));
        rep.sup_mean_norm_2p = std::max(rep.sup_mean_norm_2p, mean2p);
        if (source_acc > 0.0) rep.k_hat = std::max(rep.k_hat, (mean2p - phi_2p) / source_acc);
        // log-scale comparison with delta-method sampling slack: the raw mean
        // of an exponential is too heavy-tailed for an absolute 3 sigma test
        if (mean_exp > 0.0 &&
            std::log(mean_exp) > std::log(rep.exp_rhs.back()) + 3.0 * se_exp / mean_exp)
            rep.exp_within_bound = false;

        if (h > 0.0) {
            double g2p = 0.0, g2 = 0.0;
            if (!config.forcing.empty()) {
                const double gn = l2_norm(config.forcing.eval(t));
                g2 = gn * gn;
                g2p = std::pow(gn, 2.0 * p);
            }
            double mu2p = 0.0, mu2 = 0.0;
            for (int r = 0; r < noise.channels(); ++r) {
                const double scale = noise.modulated(r) ? noise.modulations[static_cast<std::size_t>(r)](t) : 1.0;
                mu2p += std::pow(scale * scale, static_cast<double>(p)) * mu_norm_2p[static_cast<std::size_t>(r)];
                mu2 += scale * scale * mu_norm_2[static_cast<std::size_t>(r)];
            }
            source_acc += sobolev_order == 0 ? h * (g2p + mu2p) : h;
            exp_rhs_acc += h * (2.0 / (kappa2 * config.sigma * config.sigma) * g2 + mu2);
        }
    }

    // bounded-moments heuristic: the running sup must not be set by the final
    // node alone with visible growth at the tail
    if (nodes >= 4) {
        const double tail = rep.mean_norm_2p[nodes - 1];
        double head_sup = 0.0;
        for (std::size_t k = 0; k + nodes / 4 < nodes; ++k) head_sup = std::max(head_sup, rep.mean_norm_2p[k]);
        rep.moments_bounded = tail <= 2.0 * std::max(head_sup, phi_2p + rep.k_hat * source_acc + 1e-300);
    }
    return rep;
}

// Convenience: run an ensemble of independent SNSE trajectories (per-member
// Brownian seeds derived from the master seed).
inline std::vector<std::vector<SpdeState>> run_snse_ensemble(const SpectralField& phi,
                                                             const SolverConfig& config,
                                                             const NoiseSpec& noise, std::size_t members,
                                                             std::uint64_t seed) {
    std::vector<std::vector<SpdeState>> out(members);
    parallel_for_index(members, [&](std::size_t e) {
        out[e] = run_snse(phi, config, noise, derive_seed(seed, e));
    });
    return out;
}

}  // namespace vflow
