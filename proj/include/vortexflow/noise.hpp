#pragma once

#include <functional>

#include "vortexflow/operators.hpp"

namespace vflow {

// Finite family of divergence-free noise shapes gamma_r (velocity-like) with
// their vorticity images mu_r = curl gamma_r, plus the master seed driving the
// Wiener channels. By default the shapes are constant in time, which makes the
// per-mode OU update an exact oracle; an optional per-channel modulation
// factor m_r(t) scales gamma_r (and mu_r) and switches that channel to
// left-point weighting.
struct NoiseSpec {
    std::vector<SpectralField> gammas;                       // c = 2 each
    std::vector<SpectralField> mus;                          // scalar each
    std::vector<std::function<double(double)>> modulations;  // empty or size q
    std::uint64_t seed = 0;

    int channels() const { return static_cast<int>(gammas.size()); }
    bool modulated(int r) const {
        return !modulations.empty() && static_cast<bool>(modulations[static_cast<std::size_t>(r)]);
    }
};

// One channel per requested mode: gamma_r is the real combination of the
// divergence-free basis direction (-n2, n1) at +-n, scaled by the amplitude,
// so gamma_r(x) = A (-n2, n1) cos(kappa (n,x)). Divergence-free exactly by
// construction; mu_r computed spectrally.
inline NoiseSpec build_noise(const PeriodicGrid& grid, const std::vector<WaveIndex>& modes,
                             const std::vector<double>& amplitudes, std::uint64_t seed) {
    if (grid.dim != 2) throw ShapeError("build_noise: stochastic forcing is 2D only");
    if (modes.size() != amplitudes.size())
        throw ShapeError("build_noise: one amplitude per mode required");
    NoiseSpec spec;
    spec.seed = seed;
    for (std::size_t r = 0; r < modes.size(); ++r) {
        const WaveIndex& n = modes[r];
        if (n.is_zero()) throw ShapeError("build_noise: the zero mode carries no divergence-free basis");
        for (int d = 0; d < 2; ++d)
            if (std::abs(n[d]) >= grid.modes_per_dim / 2)
                throw ShapeError("build_noise: mode " + n.str() + " outside the retained lattice");
        const double amp = amplitudes[r];
        SpectralField gamma(grid, 2);
        const Complex half(0.5 * amp, 0.0);
        gamma.coeff(0, n) = -static_cast<double>(n[1]) * half;
        gamma.coeff(1, n) = static_cast<double>(n[0]) * half;
        gamma.coeff(0, n.negated()) = std::conj(gamma.coeff(0, n));
        gamma.coeff(1, n.negated()) = std::conj(gamma.coeff(1, n));
        spec.mus.push_back(curl(gamma));
        spec.gammas.push_back(std::move(gamma));
    }
    return spec;
}

}  // namespace vflow
