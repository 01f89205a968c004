// Drives one 2D stochastic run with two divergence-free noise channels and
// prints the energy along the path.

#include <cstdio>

#include "vortexflow/vortexflow.hpp"

int main() {
    using namespace vflow;
    PeriodicGrid grid(2, 16, 2.0 * std::numbers::pi);

    SolverConfig config;
    config.grid = grid;
    config.sigma = 0.7;
    config.horizon = 1.0;
    config.outer_steps = 32;

    SpectralField phi = taylor_green_solution(0.0, config.sigma, grid).vorticity;
    NoiseSpec noise = build_noise(grid, {WaveIndex(1, 0), WaveIndex(0, 1)}, {0.5, 0.5}, 0);
    auto trajectory = run_snse(phi, config, noise, /*seed=*/2024);

    for (const SpdeState& state : trajectory)
        std::printf("t=%6.3f  |omega| = %.8f  W1 = %+.5f  W2 = %+.5f\n", state.t, l2_norm(state.omega),
                    state.brownian_cursor[0], state.brownian_cursor[1]);
    return 0;
}
