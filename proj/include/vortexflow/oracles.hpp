#pragma once

#include "vortexflow/biot_savart.hpp"
#include "vortexflow/forcing.hpp"

namespace vflow {

// Exact decaying solution of the unforced 2D Navier-Stokes equations on the
// 2pi-periodic square:
//   u(t,x)     = (cos x1 sin x2, -sin x1 cos x2) e^{-sigma^2 t}
//   omega(t,x) = -2 cos x1 cos x2 e^{-sigma^2 t}.
struct TaylorGreen {
    VelocityField velocity;
    SpectralField vorticity;
};

inline TaylorGreen taylor_green_solution(double t, double sigma, const PeriodicGrid& grid) {
    if (grid.dim != 2) throw ShapeError("taylor_green_solution: 2D only");
    if (std::abs(grid.period - 2.0 * std::numbers::pi) > 1e-12 * grid.period)
        throw ShapeError("taylor_green_solution: requires period 2*pi");
    const double amp = std::exp(-sigma * sigma * t);
    SpectralField omega(grid, 1);
    // -2 cos x1 cos x2 = -1/2 sum over the four (+-1,+-1) exponentials
    for (int s0 : {-1, 1})
        for (int s1 : {-1, 1}) omega.coeff(0, WaveIndex(s0, s1)) = Complex(-0.5 * amp, 0.0);
    TaylorGreen tg{velocity_from_vorticity(omega), std::move(omega)};
    return tg;
}

namespace detail {

// integral over [0,tau] of e^{-lambda (tau-s)} g_n(s) ds for a field-valued g,
// composite Simpson with panel doubling until the result settles.
inline SpectralField duhamel_integral(const Forcing& g, const PeriodicGrid& grid, int components,
                                      double sigma, double t_start, double tau, double rel_tol = 1e-12) {
    const double k2 = grid.wavenumber() * grid.wavenumber();
    const double nu = 0.5 * sigma * sigma;
    auto accumulate = [&](int panels) {
        SpectralField acc(grid, components);
        const double ds = tau / (2 * panels);
        for (int j = 0; j <= 2 * panels; ++j) {
            const double s = j * ds;
            double w = (j == 0 || j == 2 * panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            SpectralField gs = g.eval(t_start + s);
            for_each_mode(grid, [&](std::size_t flat, const WaveIndex& wv) {
                const double damp = std::exp(-nu * k2 * static_cast<double>(wv.norm2()) * (tau - s));
                for (int c = 0; c < components; ++c) acc.coeff(c, flat) += (w * damp) * gs.coeff(c, flat);
            });
        }
        acc *= ds / 3.0;
        return acc;
    };
    int panels = 8;
    SpectralField prev = accumulate(panels);
    for (int iter = 0; iter < 8; ++iter) {
        panels *= 2;
        SpectralField next = accumulate(panels);
        const double diff = l2_distance(next, prev);
        const double scale = 1.0 + l2_norm(next);
        prev = std::move(next);
        if (diff < rel_tol * scale) break;
    }
    return prev;
}

}  // namespace detail

// Closed-form Stokes vorticity (advection absent): per mode,
//   omega_n(tau) = phi_n e^{-lambda_n tau} + int_0^tau e^{-lambda_n (tau-s)} g_n(s) ds,
// with lambda_n = (sigma^2/2) kappa^2 |n|^2 = 2 pi^2 sigma^2 |n|^2 / L^2.
// Constant-in-time forcing integrates exactly; time-dependent forcing uses
// quadrature refined below 1e-10.
inline SpectralField stokes_exact_solution(const SpectralField& phi, const Forcing& g, double sigma,
                                           double tau, double t_start = 0.0) {
    const PeriodicGrid& grid = phi.grid();
    const double k2 = grid.wavenumber() * grid.wavenumber();
    const double nu = 0.5 * sigma * sigma;
    SpectralField out(grid, phi.components());
    for_each_mode(grid, [&](std::size_t flat, const WaveIndex& w) {
        const double damp = std::exp(-nu * k2 * static_cast<double>(w.norm2()) * tau);
        for (int c = 0; c < phi.components(); ++c) out.coeff(c, flat) = damp * phi.coeff(c, flat);
    });
    if (g.empty() || tau == 0.0) return out;

    if (!g.time_dependent()) {
        // int_0^tau e^{-lambda(tau-s)} ds = tau * phi1(-lambda tau)
        SpectralField gs = g.eval(t_start);
        for_each_mode(grid, [&](std::size_t flat, const WaveIndex& w) {
            const double lt = nu * k2 * static_cast<double>(w.norm2()) * tau;
            const double weight = lt == 0.0 ? tau : tau * (-std::expm1(-lt)) / lt;
            for (int c = 0; c < phi.components(); ++c) out.coeff(c, flat) += weight * gs.coeff(c, flat);
        });
        return out;
    }
    out += detail::duhamel_integral(g, grid, phi.components(), sigma, t_start, tau);
    return out;
}

}  // namespace vflow
