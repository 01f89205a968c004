#pragma once

#include "vortexflow/biot_savart.hpp"
#include "vortexflow/rng.hpp"

namespace vflow {

// Random zero-mean field with power-law coefficient decay |f_n| ~ (1+|n|^2)^(-decay/2).
// Each mode draws from its own counter stream, so the result is independent of
// iteration order.
inline SpectralField random_smooth_field(const PeriodicGrid& grid, int components, std::uint64_t seed,
                                         double decay = 4.0, double amplitude = 1.0) {
    SpectralField f(grid, components);
    for_each_mode(grid, [&](std::size_t flat, const WaveIndex& w) {
        if (w.is_zero() || is_nyquist(grid, w) || !w.leading_positive()) return;
        PhiloxStream stream(seed, flat);
        const double scale = amplitude * std::pow(1.0 + static_cast<double>(w.norm2()), -0.5 * decay);
        const std::size_t partner = flat_index(grid, w.negated());
        for (int c = 0; c < components; ++c) {
            const Complex z(stream.normal(), stream.normal());
            f.coeff(c, flat) = scale * z;
            f.coeff(c, partner) = std::conj(scale * z);
        }
    });
    return f;
}

// Random divergence-free vorticity: a scalar in 2D, curl of a random vector
// field in 3D (divergence-free per mode up to roundoff).
inline SpectralField random_divergence_free_vorticity(const PeriodicGrid& grid, std::uint64_t seed,
                                                      double decay = 4.0, double amplitude = 1.0) {
    if (grid.dim == 2) return random_smooth_field(grid, 1, seed, decay, amplitude);
    return curl(random_smooth_field(grid, 3, seed, decay, amplitude));
}

// Single-pair field: coeff value at +n and the conjugate at -n.
inline SpectralField single_mode_field(const PeriodicGrid& grid, int components, const WaveIndex& n,
                                       int comp, Complex value) {
    SpectralField f(grid, components);
    f.coeff(comp, n) = value;
    f.coeff(comp, n.negated()) = std::conj(value);
    return f;
}

}  // namespace vflow
