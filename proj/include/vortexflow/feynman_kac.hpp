#pragma once

#include <functional>
#include <map>
#include <memory>

#include "vortexflow/biot_savart.hpp"
#include "vortexflow/parallel.hpp"
#include "vortexflow/rng.hpp"

namespace vflow {

using ScalarFn = std::function<double(double, const double*)>;
using VectorFn = std::function<void(double, const double*, double*)>;
using TerminalFn = std::function<void(const double*, double*)>;

// Coefficient bundle for the backward linear parabolic system
//   du/dt + (1/2) sum_r (sigma_r sigma_r^T)^{ij} d2u/dxi dxj
//        + sum_r sigma_r^i theta_r^{jk} du^j/dxi + a^i du/dxi + B^T u + f = 0,
//   u(T,x) = phi(x),
// simulated through the SDE system (X, Y, Q, Z). All coefficient evaluators
// are periodic in x.
struct LinearParabolicSystem {
    int space_dim = 1;   // n
    int system_dim = 1;  // m
    int noise_dim = 1;   // l
    double t0 = 0.0;
    double horizon = 1.0;  // T

    VectorFn drift;                // a(s,x) -> out[n]; null means zero
    VectorFn diffusion;            // sigma(s,x) -> out[n*l], column r at out[r*n+i]
    VectorFn coupling;             // B(s,x) -> out[m*m] row-major; dY = B Y ds; null means zero
    std::vector<VectorFn> thetas;  // theta_r(s,x) -> out[m*m]; empty in the PR14 family
    VectorFn source;               // f(s,x) -> out[m]; null means zero
    TerminalFn terminal;           // phi(x) -> out[m]
};

// The free (mu_r, F_r) pair: any smooth choice leaves the represented mean
// unchanged and only moves the variance. Empty vectors mean zero.
struct RepresentationChoice {
    std::vector<ScalarFn> mus;  // size l when present
    std::vector<VectorFn> Fs;   // each (s,x) -> out[m]
};

enum class Increments { gaussian, two_point };

struct McOptions {
    double h_sde = 1.0 / 64.0;
    Increments increments = Increments::gaussian;
    double guard_threshold = 1e12;     // |Q| or |Y| beyond this aborts the path
    double max_abort_fraction = 0.01;  // estimate rejected above this
};

struct PathState {
    double s = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    double q = 1.0;
    double z = 0.0;
    bool aborted = false;
};

namespace detail {

inline int sde_step_count(const LinearParabolicSystem& sys, double h_sde) {
    const double span = sys.horizon - sys.t0;
    const int steps = static_cast<int>(std::llround(span / h_sde));
    if (steps < 1 || std::abs(steps * h_sde - span) > 1e-9 * std::max(1.0, span))
        throw ShapeError("weak Euler: h_sde must divide the horizon");
    return steps;
}

// Weak Euler over [t0,T] carrying a block of k linear columns of Y/Z at once
// (Y is linear in its start value, so one simulated path serves every basis
// vector). All coefficients use the left point; Q multiplies the Girsanov
// exponential, which keeps it positive and of unit mean.
struct BlockPath {
    std::vector<double> x;        // n
    std::vector<double> y_block;  // m*k, column c at [c*m, c*m+m)
    double q = 1.0;
    std::vector<double> z;        // k
    bool aborted = false;
};

inline BlockPath simulate_path_block(const LinearParabolicSystem& sys, const RepresentationChoice& choice,
                                     const double* x0, const double* y_cols, int k, PhiloxStream& stream,
                                     const McOptions& opt) {
    const int n = sys.space_dim, m = sys.system_dim, l = sys.noise_dim;
    const int steps = sde_step_count(sys, opt.h_sde);
    const double dt = (sys.horizon - sys.t0) / steps;
    const double sq = std::sqrt(dt);

    BlockPath path;
    path.x.assign(x0, x0 + n);
    path.y_block.assign(y_cols, y_cols + static_cast<std::size_t>(m) * k);
    path.z.assign(static_cast<std::size_t>(k), 0.0);

    const bool has_mu = !choice.mus.empty();
    const bool has_F = !choice.Fs.empty();
    if (has_mu && static_cast<int>(choice.mus.size()) != l)
        throw ShapeError("RepresentationChoice: mu count must equal the noise dimension");
    if (has_F && static_cast<int>(choice.Fs.size()) != l)
        throw ShapeError("RepresentationChoice: F count must equal the noise dimension");

    std::vector<double> a(n, 0.0), sig(static_cast<std::size_t>(n) * l), mu(l, 0.0), xi(l);
    std::vector<double> bmat(static_cast<std::size_t>(m) * m), fvec(m, 0.0), fr(m), theta(static_cast<std::size_t>(m) * m);
    std::vector<double> y_next(path.y_block.size());

    double s = sys.t0;
    for (int step = 0; step < steps; ++step) {
        const double* x = path.x.data();
        if (sys.drift) sys.drift(s, x, a.data());
        sys.diffusion(s, x, sig.data());
        if (has_mu)
            for (int r = 0; r < l; ++r) mu[static_cast<std::size_t>(r)] = choice.mus[static_cast<std::size_t>(r)](s, x);
        for (int r = 0; r < l; ++r)
            xi[static_cast<std::size_t>(r)] =
                opt.increments == Increments::gaussian ? stream.normal() : stream.two_point();

        // Z first: left-point quadrature with the pre-step Q and Y
        if (sys.source || has_F) {
            if (sys.source) sys.source(s, x, fvec.data());
            for (int c = 0; c < k; ++c) {
                const double* ycol = path.y_block.data() + static_cast<std::size_t>(c) * m;
                double acc = 0.0;
                if (sys.source)
                    for (int i = 0; i < m; ++i) acc += fvec[static_cast<std::size_t>(i)] * ycol[i];
                acc *= dt;
                if (has_F) {
                    for (int r = 0; r < l; ++r) {
                        choice.Fs[static_cast<std::size_t>(r)](s, x, fr.data());
                        double dot = 0.0;
                        for (int i = 0; i < m; ++i) dot += fr[static_cast<std::size_t>(i)] * ycol[i];
                        acc += dot * xi[static_cast<std::size_t>(r)] * sq;
                    }
                }
                path.z[static_cast<std::size_t>(c)] += path.q * acc;
            }
        }

        // Y: dY = B Y ds (+ theta_r Y dw_r when present)
        if (sys.coupling || !sys.thetas.empty()) {
            if (sys.coupling) sys.coupling(s, x, bmat.data());
            for (int c = 0; c < k; ++c) {
                const double* ycol = path.y_block.data() + static_cast<std::size_t>(c) * m;
                double* ynew = y_next.data() + static_cast<std::size_t>(c) * m;
                for (int i = 0; i < m; ++i) {
                    double incr = 0.0;
                    if (sys.coupling)
                        for (int j = 0; j < m; ++j) incr += bmat[static_cast<std::size_t>(i) * m + j] * ycol[j];
                    ynew[i] = ycol[i] + dt * incr;
                }
            }
            for (std::size_t r = 0; r < sys.thetas.size(); ++r) {
                sys.thetas[r](s, x, theta.data());
                for (int c = 0; c < k; ++c) {
                    const double* ycol = path.y_block.data() + static_cast<std::size_t>(c) * m;
                    double* ynew = y_next.data() + static_cast<std::size_t>(c) * m;
                    for (int i = 0; i < m; ++i) {
                        double incr = 0.0;
                        for (int j = 0; j < m; ++j) incr += theta[static_cast<std::size_t>(i) * m + j] * ycol[j];
                        ynew[i] += sq * xi[r] * incr;
                    }
                }
            }
            path.y_block.swap(y_next);
        }

        // Q: Girsanov factor, exact unit mean per step for Gaussian increments
        if (has_mu) {
            double expo = 0.0, mu2 = 0.0;
            for (int r = 0; r < l; ++r) {
                expo += mu[static_cast<std::size_t>(r)] * xi[static_cast<std::size_t>(r)];
                mu2 += mu[static_cast<std::size_t>(r)] * mu[static_cast<std::size_t>(r)];
            }
            path.q *= std::exp(expo * sq - 0.5 * dt * mu2);
        }

        // X last: Euler with the mu-corrected drift
        for (int i = 0; i < n; ++i) {
            double drift_i = a[static_cast<std::size_t>(i)];
            double noise_i = 0.0;
            for (int r = 0; r < l; ++r) {
                const double sri = sig[static_cast<std::size_t>(r) * n + i];
                if (has_mu) drift_i -= mu[static_cast<std::size_t>(r)] * sri;
                noise_i += sri * xi[static_cast<std::size_t>(r)];
            }
            path.x[static_cast<std::size_t>(i)] += dt * drift_i + sq * noise_i;
        }
        s = sys.t0 + (step + 1) * dt;

        bool bad = !std::isfinite(path.q) || std::abs(path.q) > opt.guard_threshold;
        for (double v : path.x) bad = bad || !std::isfinite(v);
        for (double v : path.y_block) bad = bad || !std::isfinite(v) || std::abs(v) > opt.guard_threshold;
        for (double v : path.z) bad = bad || !std::isfinite(v);
        if (bad) {
            path.aborted = true;
            return path;
        }
    }
    return path;
}

}  // namespace detail

// Single-path weak Euler simulation of (X, Y, Q, Z) from (t0, x, y) to T.
inline PathState weak_euler_path(const LinearParabolicSystem& sys, const RepresentationChoice& choice,
                                 const std::vector<double>& x, const std::vector<double>& y,
                                 double h_sde, PhiloxStream& stream, Increments kind = Increments::gaussian) {
    if (static_cast<int>(x.size()) != sys.space_dim) throw ShapeError("weak_euler_path: x size != n");
    if (static_cast<int>(y.size()) != sys.system_dim) throw ShapeError("weak_euler_path: y size != m");
    McOptions opt;
    opt.h_sde = h_sde;
    opt.increments = kind;
    detail::BlockPath block = detail::simulate_path_block(sys, choice, x.data(), y.data(), 1, stream, opt);
    PathState out;
    out.s = sys.horizon;
    out.x = std::move(block.x);
    out.y = std::move(block.y_block);
    out.q = block.q;
    out.z = block.z[0];
    out.aborted = block.aborted;
    return out;
}

struct McEstimate {
    std::vector<double> value;
    std::vector<double> std_error;  // sample standard deviation / sqrt(samples)
    std::size_t samples = 0;
    std::size_t aborted = 0;
};

// Monte Carlo mean of Q(T) phi^T(X_T) Y_T + Z_T over independent paths, one
// entry per basis vector y (canonical basis by default). Path i always owns
// stream (seed, i) and block sums reduce in index order, so the estimate is
// bit-identical for any thread count.
inline McEstimate estimate_solution(const LinearParabolicSystem& sys, const RepresentationChoice& choice,
                                    const std::vector<double>& x,
                                    std::vector<std::vector<double>> basis, std::size_t samples,
                                    std::uint64_t seed, const McOptions& opt = {}) {
    if (samples < 2) throw InsufficientDataError("estimate_solution: need at least 2 samples");
    if (static_cast<int>(x.size()) != sys.space_dim) throw ShapeError("estimate_solution: x size != n");
    const int m = sys.system_dim;
    if (basis.empty()) {
        basis.resize(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m), 0.0));
        for (int i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    }
    const int k = static_cast<int>(basis.size());
    std::vector<double> y_cols(static_cast<std::size_t>(m) * k);
    for (int c = 0; c < k; ++c) {
        if (static_cast<int>(basis[static_cast<std::size_t>(c)].size()) != m)
            throw ShapeError("estimate_solution: basis vector size != m");
        for (int i = 0; i < m; ++i)
            y_cols[static_cast<std::size_t>(c) * m + i] = basis[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
    }

    constexpr std::size_t block_size = 256;
    const std::size_t n_blocks = (samples + block_size - 1) / block_size;
    struct BlockSums {
        std::vector<double> sum, sumsq;
        std::size_t accepted = 0, aborted = 0;
    };
    std::vector<BlockSums> blocks(n_blocks);

    parallel_for_index(n_blocks, [&](std::size_t b) {
        BlockSums acc;
        acc.sum.assign(static_cast<std::size_t>(k), 0.0);
        acc.sumsq.assign(static_cast<std::size_t>(k), 0.0);
        std::vector<double> phi(static_cast<std::size_t>(m));
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(samples, begin + block_size);
        for (std::size_t p = begin; p < end; ++p) {
            PhiloxStream stream(seed, p);
            detail::BlockPath path = detail::simulate_path_block(sys, choice, x.data(), y_cols.data(), k, stream, opt);
            if (path.aborted) {
                ++acc.aborted;
                continue;
            }
            sys.terminal(path.x.data(), phi.data());
            for (int c = 0; c < k; ++c) {
                double dot = 0.0;
                for (int i = 0; i < m; ++i)
                    dot += phi[static_cast<std::size_t>(i)] * path.y_block[static_cast<std::size_t>(c) * m + i];
                const double v = path.q * dot + path.z[static_cast<std::size_t>(c)];
                acc.sum[static_cast<std::size_t>(c)] += v;
                acc.sumsq[static_cast<std::size_t>(c)] += v * v;
            }
            ++acc.accepted;
        }
        blocks[b] = std::move(acc);
    });

    std::vector<double> sum(static_cast<std::size_t>(k), 0.0), sumsq(static_cast<std::size_t>(k), 0.0);
    std::size_t accepted = 0, aborted = 0;
    for (const BlockSums& b : blocks) {
        for (int c = 0; c < k; ++c) {
            sum[static_cast<std::size_t>(c)] += b.sum[static_cast<std::size_t>(c)];
            sumsq[static_cast<std::size_t>(c)] += b.sumsq[static_cast<std::size_t>(c)];
        }
        accepted += b.accepted;
        aborted += b.aborted;
    }
    const double frac = static_cast<double>(aborted) / static_cast<double>(samples);
    if (frac > opt.max_abort_fraction)
        throw EstimateRejectedError("estimate_solution: " + std::to_string(100.0 * frac) +
                                        "% of paths hit the magnitude guard",
                                    frac);
    McEstimate est;
    est.samples = accepted;
    est.aborted = aborted;
    est.value.resize(static_cast<std::size_t>(k));
    est.std_error.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        const double nacc = static_cast<double>(accepted);
        const double mean = sum[static_cast<std::size_t>(c)] / nacc;
        const double var =
            std::max(0.0, (sumsq[static_cast<std::size_t>(c)] - nacc * mean * mean) / (nacc - 1.0));
        est.value[static_cast<std::size_t>(c)] = mean;
        est.std_error[static_cast<std::size_t>(c)] = std::sqrt(var / nacc);
    }
    return est;
}

// ---- vorticity specialization ----------------------------------------------

// u(s,x) and grad u(s,x) suppliers for the drift, coupling and Girsanov terms.
struct VelocityProvider {
    VectorFn velocity;  // out[dim]
    VectorFn gradient;  // out[i*dim + j] = d u^j / d x^i
};

namespace detail {

struct SpectralEvalContext {
    SpectralField field;
    double kappa;
};

// Direct mode summation; O(K^dim) per call with per-axis phase tables.
inline void eval_spectral(const SpectralEvalContext& ctx, const double* x, double* value, double* grad) {
    const PeriodicGrid& g = ctx.field.grid();
    const int K = g.modes_per_dim;
    const int dim = g.dim;
    const int comps = ctx.field.components();
    std::array<std::vector<Complex>, 3> phases;
    for (int d = 0; d < dim; ++d) {
        phases[static_cast<std::size_t>(d)].resize(static_cast<std::size_t>(K));
        for (int a = 0; a < K; ++a) {
            const double arg = ctx.kappa * g.freq_of(a) * x[d];
            phases[static_cast<std::size_t>(d)][static_cast<std::size_t>(a)] = Complex(std::cos(arg), std::sin(arg));
        }
    }
    std::vector<Complex> val(static_cast<std::size_t>(comps), Complex(0, 0));
    std::vector<Complex> der(static_cast<std::size_t>(comps) * dim, Complex(0, 0));
    for_each_mode(g, [&](std::size_t flat, const WaveIndex& w) {
        Complex phase = phases[0][static_cast<std::size_t>(g.index_of(w[0]))];
        for (int d = 1; d < dim; ++d) phase *= phases[static_cast<std::size_t>(d)][static_cast<std::size_t>(g.index_of(w[d]))];
        for (int c = 0; c < comps; ++c) {
            const Complex contrib = ctx.field.coeff(c, flat) * phase;
            val[static_cast<std::size_t>(c)] += contrib;
            if (grad)
                for (int d = 0; d < dim; ++d)
                    der[static_cast<std::size_t>(c) * dim + d] +=
                        contrib * Complex(0.0, ctx.kappa * static_cast<double>(w[d]));
        }
    });
    if (value)
        for (int c = 0; c < comps; ++c) value[c] = val[static_cast<std::size_t>(c)].real();
    if (grad)
        for (int c = 0; c < comps; ++c)
            for (int d = 0; d < dim; ++d)
                grad[d * comps + c] = der[static_cast<std::size_t>(c) * dim + d].real();
}

}  // namespace detail

// Frozen (time-independent) provider evaluating a spectral velocity field.
inline VelocityProvider spectral_velocity_provider(const VelocityField& u) {
    auto ctx = std::make_shared<detail::SpectralEvalContext>(
        detail::SpectralEvalContext{u.field, u.field.grid().wavenumber()});
    VelocityProvider p;
    p.velocity = [ctx](double, const double* x, double* out) { detail::eval_spectral(*ctx, x, out, nullptr); };
    p.gradient = [ctx](double, const double* x, double* out) { detail::eval_spectral(*ctx, x, nullptr, out); };
    return p;
}

// Scalar point evaluation of a spectral field (used by oracles and tests).
inline double evaluate_at(const SpectralField& f, const double* x, int comp = 0) {
    detail::SpectralEvalContext ctx{f, f.grid().wavenumber()};
    std::vector<double> vals(static_cast<std::size_t>(f.components()));
    detail::eval_spectral(ctx, x, vals.data(), nullptr);
    return vals[static_cast<std::size_t>(comp)];
}

// Builds the backward vorticity system (V13)-(V19) over [t0, T]:
// a = -u, sigma_r = sigma e_r, B from grad u (3D; absent in 2D where the
// stretching term vanishes), f = g, Q driven by mu_r = -u^r / sigma so that X
// is the pure diffusion X = x + sigma w.
inline McEstimate vorticity_point_estimate(int dim, double sigma, const VelocityProvider& u,
                                           const VectorFn& g, const TerminalFn& phi, double t0,
                                           double horizon, const std::vector<double>& x,
                                           std::size_t samples, std::uint64_t seed,
                                           const McOptions& opt = {}) {
    LinearParabolicSystem sys;
    sys.space_dim = dim;
    sys.noise_dim = dim;
    sys.system_dim = dim == 3 ? 3 : 1;
    sys.t0 = t0;
    sys.horizon = horizon;
    sys.drift = [u, dim](double s, const double* pos, double* out) {
        u.velocity(s, pos, out);
        for (int i = 0; i < dim; ++i) out[i] = -out[i];
    };
    sys.diffusion = [dim, sigma](double, const double*, double* out) {
        for (int r = 0; r < dim; ++r)
            for (int i = 0; i < dim; ++i) out[r * dim + i] = (r == i) ? sigma : 0.0;
    };
    if (dim == 3) sys.coupling = u.gradient;  // B[i][j] = d u^j / d x^i
    sys.source = g;
    sys.terminal = phi;

    RepresentationChoice choice;
    for (int r = 0; r < dim; ++r)
        choice.mus.push_back([u, r, dim, sigma](double s, const double* pos) {
            double vel[3];
            u.velocity(s, pos, vel);
            return -vel[r] / sigma;
        });
    return estimate_solution(sys, choice, x, {}, samples, seed, opt);
}

// ---- Monte Carlo Fourier coefficients ---------------------------------------

struct CoefficientEstimate {
    Complex value;
    double std_error_re = 0.0;
    double std_error_im = 0.0;
    std::size_t samples = 0;
};

// omega_n(t) = E[ omega(t,xi) e^{-i kappa (n,xi)} ] with xi uniform on Q.
// The point evaluator may itself be a Monte Carlo estimate; the reported
// std errors then cover both layers since the inner noise is part of the
// observed sample spread.
inline std::map<WaveIndex, CoefficientEstimate> mc_fourier_coefficients(
    const std::function<double(const double*)>& omega_at, const std::vector<WaveIndex>& n_list, int dim,
    double period, std::size_t outer_samples, std::uint64_t seed) {
    if (outer_samples < 2) throw InsufficientDataError("mc_fourier_coefficients: need at least 2 samples");
    const double kappa = 2.0 * std::numbers::pi / period;
    const std::size_t nn = n_list.size();

    constexpr std::size_t block_size = 512;
    const std::size_t n_blocks = (outer_samples + block_size - 1) / block_size;
    struct Sums {
        std::vector<double> re, im, re2, im2;
    };
    std::vector<Sums> blocks(n_blocks);
    parallel_for_index(n_blocks, [&](std::size_t b) {
        Sums acc;
        acc.re.assign(nn, 0.0);
        acc.im.assign(nn, 0.0);
        acc.re2.assign(nn, 0.0);
        acc.im2.assign(nn, 0.0);
        const std::size_t begin = b * block_size;
        const std::size_t end = std::min(outer_samples, begin + block_size);
        double xi[3] = {0, 0, 0};
        for (std::size_t p = begin; p < end; ++p) {
            PhiloxStream stream(seed, p);
            for (int d = 0; d < dim; ++d) xi[d] = stream.uniform() * period;
            const double w = omega_at(xi);
            for (std::size_t j = 0; j < nn; ++j) {
                double dot = 0.0;
                for (int d = 0; d < dim; ++d) dot += n_list[j][d] * xi[d];
                const double re = w * std::cos(kappa * dot);
                const double im = -w * std::sin(kappa * dot);
                acc.re[j] += re;
                acc.im[j] += im;
                acc.re2[j] += re * re;
                acc.im2[j] += im * im;
            }
        }
        blocks[b] = std::move(acc);
    });

    std::map<WaveIndex, CoefficientEstimate> out;
    for (std::size_t j = 0; j < nn; ++j) {
        double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;
        for (const Sums& b : blocks) {
            re += b.re[j];
            im += b.im[j];
            re2 += b.re2[j];
            im2 += b.im2[j];
        }
        const double n = static_cast<double>(outer_samples);
        CoefficientEstimate est;
        est.samples = outer_samples;
        const double mre = re / n, mim = im / n;
        est.value = Complex(mre, mim);
        est.std_error_re = std::sqrt(std::max(0.0, (re2 - n * mre * mre) / (n - 1.0)) / n);
        est.std_error_im = std::sqrt(std::max(0.0, (im2 - n * mim * mim) / (n - 1.0)) / n);
        out[n_list[j]] = est;
    }
    return out;
}

}  // namespace vflow
