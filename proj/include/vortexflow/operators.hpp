#pragma once

#include <cmath>
#include <utility>

#include "vortexflow/fft.hpp"

namespace vflow {

// div v in Fourier space: (div v)_n = i (2pi/L) (v_n, n).
inline SpectralField divergence(const SpectralField& v) {
    if (v.components() != v.grid().dim)
        throw ComponentCountError("divergence: field must have dim components");
    const double kappa = v.grid().wavenumber();
    SpectralField out(v.grid(), 1);
    for_each_mode(v.grid(), [&](std::size_t flat, const WaveIndex& w) {
        Complex s(0.0, 0.0);
        for (int d = 0; d < v.grid().dim; ++d) s += v.coeff(d, flat) * static_cast<double>(w[d]);
        out.coeff(0, flat) = Complex(0.0, kappa) * s;
    });
    return out;
}

// curl: 2D vector -> scalar, 3D vector -> vector (i kappa n x v per mode).
inline SpectralField curl(const SpectralField& v) {
    const int dim = v.grid().dim;
    if (v.components() != dim) throw ComponentCountError("curl: field must have dim components");
    const Complex ik(0.0, v.grid().wavenumber());
    if (dim == 2) {
        SpectralField out(v.grid(), 1);
        for_each_mode(v.grid(), [&](std::size_t flat, const WaveIndex& w) {
            out.coeff(0, flat) = ik * (v.coeff(1, flat) * static_cast<double>(w[0]) -
                                       v.coeff(0, flat) * static_cast<double>(w[1]));
        });
        return out;
    }
    SpectralField out(v.grid(), 3);
    for_each_mode(v.grid(), [&](std::size_t flat, const WaveIndex& w) {
        const Complex v0 = v.coeff(0, flat), v1 = v.coeff(1, flat), v2 = v.coeff(2, flat);
        out.coeff(0, flat) = ik * (static_cast<double>(w[1]) * v2 - static_cast<double>(w[2]) * v1);
        out.coeff(1, flat) = ik * (static_cast<double>(w[2]) * v0 - static_cast<double>(w[0]) * v2);
        out.coeff(2, flat) = ik * (static_cast<double>(w[0]) * v1 - static_cast<double>(w[1]) * v0);
    });
    return out;
}

// gradient of a scalar: (grad g)_n = i kappa n g_n.
inline SpectralField gradient(const SpectralField& g) {
    if (g.components() != 1) throw ComponentCountError("gradient: expects a scalar field");
    const Complex ik(0.0, g.grid().wavenumber());
    SpectralField out(g.grid(), g.grid().dim);
    for_each_mode(g.grid(), [&](std::size_t flat, const WaveIndex& w) {
        for (int d = 0; d < g.grid().dim; ++d)
            out.coeff(d, flat) = ik * static_cast<double>(w[d]) * g.coeff(0, flat);
    });
    return out;
}

inline SpectralField laplacian(const SpectralField& f) {
    const double k2 = f.grid().wavenumber() * f.grid().wavenumber();
    SpectralField out(f.grid(), f.components());
    for_each_mode(f.grid(), [&](std::size_t flat, const WaveIndex& w) {
        const double factor = -k2 * static_cast<double>(w.norm2());
        for (int c = 0; c < f.components(); ++c) out.coeff(c, flat) = factor * f.coeff(c, flat);
    });
    return out;
}

// Leray / Helmholtz-Hodge projection onto divergence-free fields:
// (Pv)_n = v_n - (v_n^T n / |n|^2) n.
inline SpectralField leray_project(const SpectralField& v) {
    if (v.components() != v.grid().dim)
        throw ComponentCountError("leray_project: field must have dim components");
    SpectralField out = v;
    for_each_mode(v.grid(), [&](std::size_t flat, const WaveIndex& w) {
        const int n2 = w.norm2();
        if (n2 == 0) return;
        Complex vn(0.0, 0.0);
        for (int d = 0; d < v.grid().dim; ++d) vn += v.coeff(d, flat) * static_cast<double>(w[d]);
        vn /= static_cast<double>(n2);
        for (int d = 0; d < v.grid().dim; ++d) out.coeff(d, flat) -= vn * static_cast<double>(w[d]);
    });
    return out;
}

// Projection together with the gradient complement P^perp v = v - Pv.
inline std::pair<SpectralField, SpectralField> leray_split(const SpectralField& v) {
    SpectralField p = leray_project(v);
    SpectralField q = v;
    q -= p;
    return {std::move(p), std::move(q)};
}

// Sobolev norm in the Fourier-multiplier convention:
// ||f||_m = sqrt( L^dim sum (1 + kappa^2 |n|^2)^m |f_n|^2 ).
inline double sobolev_norm(const SpectralField& f, int m) {
    if (m < 0) throw ShapeError("sobolev_norm: order must be non-negative");
    const double k2 = f.grid().wavenumber() * f.grid().wavenumber();
    double sum = 0.0;
    for_each_mode(f.grid(), [&](std::size_t flat, const WaveIndex& w) {
        double weight = 1.0;
        const double base = 1.0 + k2 * static_cast<double>(w.norm2());
        for (int j = 0; j < m; ++j) weight *= base;
        for (int c = 0; c < f.components(); ++c) sum += weight * std::norm(f.coeff(c, flat));
    });
    return std::sqrt(sum * std::pow(f.grid().period, f.grid().dim));
}

inline double l2_norm(const SpectralField& f) { return sobolev_norm(f, 0); }

// ||grad f|| = sqrt( L^dim sum kappa^2 |n|^2 |f_n|^2 ) (Frobenius over components).
inline double h1_seminorm(const SpectralField& f) {
    const double k2 = f.grid().wavenumber() * f.grid().wavenumber();
    double sum = 0.0;
    for_each_mode(f.grid(), [&](std::size_t flat, const WaveIndex& w) {
        const double weight = k2 * static_cast<double>(w.norm2());
        for (int c = 0; c < f.components(); ++c) sum += weight * std::norm(f.coeff(c, flat));
    });
    return std::sqrt(sum * std::pow(f.grid().period, f.grid().dim));
}

inline double l2_distance(const SpectralField& a, const SpectralField& b) {
    SpectralField d = a;
    d -= b;
    return l2_norm(d);
}

// ---- dealiasing ------------------------------------------------------------

// Largest per-axis index kept by the 2/3 rule: products of kept modes alias
// only onto removed modes, which needs 3*cutoff <= K-1.
inline int two_thirds_cutoff(int modes_per_dim) { return (modes_per_dim - 1) / 3; }

inline void truncate_two_thirds(SpectralField& f) {
    const int cut = two_thirds_cutoff(f.grid().modes_per_dim);
    for_each_mode(f.grid(), [&](std::size_t flat, const WaveIndex& w) {
        for (int d = 0; d < f.grid().dim; ++d) {
            if (std::abs(w[d]) > cut) {
                for (int c = 0; c < f.components(); ++c) f.coeff(c, flat) = Complex(0.0, 0.0);
                return;
            }
        }
    });
}

struct ProductResult {
    SpectralField field;
    double removed_mean = 0.0;
};

// Pointwise physical-space product of two scalar fields with 2/3-rule
// truncation applied before and after; the discarded mean is reported.
inline ProductResult dealiased_product(const SpectralField& a, const SpectralField& b, bool dealias = true) {
    if (!(a.grid() == b.grid())) throw GridMismatchError("dealiased_product: grids differ");
    if (a.components() != 1 || b.components() != 1)
        throw ComponentCountError("dealiased_product: expects scalar fields");

    SpectralField at = a, bt = b;
    if (dealias) {
        truncate_two_thirds(at);
        truncate_two_thirds(bt);
    }
    PhysicalField pa = to_physical(at);
    PhysicalField pb = to_physical(bt);
    for (std::size_t i = 0; i < pa.values.size(); ++i) pa.values[i] *= pb.values[i];
    SpectralAnalysis res = analyze(pa);
    if (dealias) truncate_two_thirds(res.field);
    return ProductResult{std::move(res.field), res.removed_mean[0]};
}

// Extract one component as a scalar field.
inline SpectralField component(const SpectralField& f, int c) {
    SpectralField out(f.grid(), 1);
    const Complex* src = f.component_data(c);
    std::copy(src, src + f.mode_count(), out.component_data(0));
    return out;
}

}  // namespace vflow
