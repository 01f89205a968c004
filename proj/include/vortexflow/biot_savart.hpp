#pragma once

#include "vortexflow/operators.hpp"

namespace vflow {

// Divergence-free velocity with a certification flag. Every field produced by
// velocity_from_vorticity is divergence-free per mode by construction.
struct VelocityField {
    SpectralField field;
    bool divergence_free = false;
};

// Solves the Poisson problem Delta psi = omega, psi_0 = 0:
// psi_n = -omega_n / (kappa^2 |n|^2).
inline SpectralField streamfunction(const SpectralField& omega) {
    const double k2 = omega.grid().wavenumber() * omega.grid().wavenumber();
    SpectralField psi(omega.grid(), omega.components());
    for_each_mode(omega.grid(), [&](std::size_t flat, const WaveIndex& w) {
        const int n2 = w.norm2();
        if (n2 == 0) return;
        const double factor = -1.0 / (k2 * static_cast<double>(n2));
        for (int c = 0; c < omega.components(); ++c) psi.coeff(c, flat) = factor * omega.coeff(c, flat);
    });
    return psi;
}

// Relative divergence of a vector field, scale-free in amplitude and period:
// ||div v|| / (kappa ||v||).
inline double relative_divergence(const SpectralField& v) {
    const double denom = v.grid().wavenumber() * l2_norm(v);
    if (denom == 0.0) return 0.0;
    return l2_norm(divergence(v)) / denom;
}

// The periodic Biot-Savart operator U: the unique zero-mean divergence-free
// velocity with curl u = omega. Per mode,
//   2D: u_n = (i/kappa) (omega_n / |n|^2) (n2, -n1)
//   3D: u_n = (i/kappa) (n x omega_n) / |n|^2.
// In 3D the round trip curl(U omega) = omega needs div omega = 0, so inputs
// with relative divergence above `div_tol` are rejected.
inline VelocityField velocity_from_vorticity(const SpectralField& omega, double div_tol = 1e-10) {
    const PeriodicGrid& g = omega.grid();
    if (g.dim == 2 && omega.components() != 1)
        throw ComponentCountError("velocity_from_vorticity: 2D vorticity must be scalar");
    if (g.dim == 3 && omega.components() != 3)
        throw ComponentCountError("velocity_from_vorticity: 3D vorticity must have 3 components");
    if (g.dim == 3) {
        const double rel = relative_divergence(omega);
        if (rel > div_tol)
            throw DivergenceToleranceError(
                "velocity_from_vorticity: input vorticity is not divergence-free (relative divergence " +
                    std::to_string(rel) + ")",
                rel);
    }

    const double inv_kappa = 1.0 / g.wavenumber();
    VelocityField u{SpectralField(g, g.dim), true};
    if (g.dim == 2) {
        for_each_mode(g, [&](std::size_t flat, const WaveIndex& w) {
            const int n2 = w.norm2();
            if (n2 == 0) return;
            const Complex f = Complex(0.0, inv_kappa / static_cast<double>(n2)) * omega.coeff(0, flat);
            u.field.coeff(0, flat) = f * static_cast<double>(w[1]);
            u.field.coeff(1, flat) = -f * static_cast<double>(w[0]);
        });
    } else {
        for_each_mode(g, [&](std::size_t flat, const WaveIndex& w) {
            const int n2 = w.norm2();
            if (n2 == 0) return;
            const Complex factor(0.0, inv_kappa / static_cast<double>(n2));
            const Complex o0 = omega.coeff(0, flat), o1 = omega.coeff(1, flat), o2 = omega.coeff(2, flat);
            u.field.coeff(0, flat) = factor * (static_cast<double>(w[1]) * o2 - static_cast<double>(w[2]) * o1);
            u.field.coeff(1, flat) = factor * (static_cast<double>(w[2]) * o0 - static_cast<double>(w[0]) * o2);
            u.field.coeff(2, flat) = factor * (static_cast<double>(w[0]) * o1 - static_cast<double>(w[1]) * o0);
        });
    }
    return u;
}

}  // namespace vflow
