#pragma once

#include <cmath>
#include <vector>

#include "vortexflow/biot_savart.hpp"
#include "vortexflow/forcing.hpp"
#include "vortexflow/oracles.hpp"

namespace vflow {

struct SolverConfig {
    double sigma = 1.0;      // sqrt(2 * viscosity)
    double horizon = 1.0;    // T
    int outer_steps = 16;    // N, h = T/N uniform
    int inner_substeps = 0;  // M; 0 selects max(4, ceil(h K u_max 2pi/L))
    PeriodicGrid grid;
    bool dealias = true;
    Forcing forcing;          // g = curl f
    bool stokes_mode = false; // test hook: the recovered velocity is forced to zero
    double cfl_limit = 2.0;   // refusal threshold on (h/M) u_max kappa K

    double step_size() const { return horizon / outer_steps; }
};

struct SchemeState {
    double t = 0.0;
    SpectralField omega;           // vorticity (scalar in 2D, 3 components in 3D)
    VelocityField frozen_velocity; // u held fixed over the next interval
};

namespace detail {

// d f^comp / d x^dir as a scalar field
inline SpectralField derivative(const SpectralField& f, int comp, int dir) {
    const Complex ik(0.0, f.grid().wavenumber());
    SpectralField out(f.grid(), 1);
    for_each_mode(f.grid(), [&](std::size_t flat, const WaveIndex& w) {
        out.coeff(0, flat) = ik * static_cast<double>(w[dir]) * f.coeff(comp, flat);
    });
    return out;
}

inline PhysicalField to_physical_truncated(SpectralField f, bool dealias) {
    if (dealias) truncate_two_thirds(f);
    return to_physical(f);
}

}  // namespace detail

// The advection (and, in 3D, vortex-stretching) operator for one frozen
// velocity: N(omega) = -(u.grad) omega + (omega.grad) u. The physical-space
// velocity and its gradient are cached once per interval and reused by every
// inner substep; products follow the 2/3 rule.
class FrozenAdvection {
   public:
    FrozenAdvection(const VelocityField& u_hat, bool dealias)
        : grid_(u_hat.field.grid()), dealias_(dealias), zero_(u_hat.field.max_abs_coeff() == 0.0) {
        if (zero_) return;
        for (int j = 0; j < grid_.dim; ++j)
            u_phys_.push_back(detail::to_physical_truncated(component(u_hat.field, j), dealias_));
        for (std::size_t site = 0; site < grid_.point_count(); ++site) {
            double s = 0.0;
            for (int j = 0; j < grid_.dim; ++j) s += u_phys_[static_cast<std::size_t>(j)].values[site] *
                                                     u_phys_[static_cast<std::size_t>(j)].values[site];
            max_speed_ = std::max(max_speed_, std::sqrt(s));
        }
        if (grid_.dim == 3) {
            // d u^i / d x^j, row-major in (i,j)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    gradu_phys_.push_back(
                        detail::to_physical_truncated(detail::derivative(u_hat.field, i, j), dealias_));
        }
    }

    bool zero() const { return zero_; }
    double max_speed() const { return max_speed_; }

    SpectralField apply(const SpectralField& omega) const {
        SpectralField out(grid_, omega.components());
        if (zero_) return out;
        std::vector<PhysicalField> omega_phys;
        if (grid_.dim == 3) {
            omega_phys.reserve(3);
            for (int j = 0; j < 3; ++j)
                omega_phys.push_back(detail::to_physical_truncated(component(omega, j), dealias_));
        }
        PhysicalField term(grid_, 1);
        for (int i = 0; i < omega.components(); ++i) {
            std::fill(term.values.begin(), term.values.end(), 0.0);
            for (int j = 0; j < grid_.dim; ++j) {
                PhysicalField d = detail::to_physical_truncated(detail::derivative(omega, i, j), dealias_);
                const double* uj = u_phys_[static_cast<std::size_t>(j)].values.data();
                for (std::size_t s = 0; s < term.values.size(); ++s) term.values[s] -= uj[s] * d.values[s];
            }
            if (grid_.dim == 3) {
                for (int j = 0; j < 3; ++j) {
                    const double* oj = omega_phys[static_cast<std::size_t>(j)].values.data();
                    const double* du = gradu_phys_[static_cast<std::size_t>(i * 3 + j)].values.data();
                    for (std::size_t s = 0; s < term.values.size(); ++s) term.values[s] += oj[s] * du[s];
                }
            }
            SpectralField spec = to_spectral(term);
            if (dealias_) truncate_two_thirds(spec);
            std::copy(spec.component_data(0), spec.component_data(0) + spec.mode_count(),
                      out.component_data(i));
        }
        return out;
    }

   private:
    PeriodicGrid grid_;
    bool dealias_;
    bool zero_;
    double max_speed_ = 0.0;
    std::vector<PhysicalField> u_phys_;
    std::vector<PhysicalField> gradu_phys_;
};

namespace detail {

struct EtdTables {
    std::vector<double> damp;      // e^{-lambda dt}
    std::vector<double> phi1_dt;   // dt * phi1(-lambda dt)
    std::vector<double> phi2_dt;   // dt * phi2(-lambda dt)
};

inline double phi2(double lt) {
    // (e^{-lt} - 1 + lt) / lt^2 for lt >= 0
    if (lt < 1e-4)
        return 0.5 - lt / 6.0 + lt * lt / 24.0 - lt * lt * lt / 120.0;
    return (std::expm1(-lt) + lt) / (lt * lt);
}

inline EtdTables etd_tables(const PeriodicGrid& grid, double sigma, double dt) {
    const double nu = 0.5 * sigma * sigma;
    const double k2 = grid.wavenumber() * grid.wavenumber();
    EtdTables t;
    t.damp.resize(grid.point_count());
    t.phi1_dt.resize(grid.point_count());
    t.phi2_dt.resize(grid.point_count());
    for_each_mode(grid, [&](std::size_t flat, const WaveIndex& w) {
        const double lt = nu * k2 * static_cast<double>(w.norm2()) * dt;
        t.damp[flat] = std::exp(-lt);
        t.phi1_dt[flat] = lt == 0.0 ? dt : dt * (-std::expm1(-lt)) / lt;
        t.phi2_dt[flat] = dt * phi2(lt);
    });
    return t;
}

inline int auto_substeps(double h, const PeriodicGrid& grid, double u_max) {
    const double advective = h * grid.modes_per_dim * u_max * grid.wavenumber();
    return std::max(4, static_cast<int>(std::ceil(advective)));
}

}  // namespace detail

// Advances the linear frozen-velocity vorticity system
//   d omega/dt = (sigma^2/2) Laplacian omega - (u.grad) omega
//                [+ (omega.grad) u in 3D] + g(t)
// over [t0, t0+h]. Diffusion is integrated exactly per mode; the advection,
// stretching and forcing terms take M substeps of the exponential two-stage
// rule (ETD2RK), which reproduces constant forcing exactly.
inline SpectralField advance_frozen(const SpectralField& omega0, const VelocityField& u_hat, double t0,
                                    double h, const SolverConfig& config) {
    const PeriodicGrid& grid = omega0.grid();
    FrozenAdvection advection(u_hat, config.dealias);

    int substeps = config.inner_substeps;
    if (substeps <= 0) substeps = detail::auto_substeps(h, grid, advection.max_speed());
    const double dt = h / substeps;
    const double cfl = dt * advection.max_speed() * grid.wavenumber() * grid.modes_per_dim;
    if (cfl > config.cfl_limit)
        throw CflError("inner substep too large for the frozen advection speed (CFL " +
                           std::to_string(cfl) + "); use at least M = " +
                           std::to_string(detail::auto_substeps(h, grid, advection.max_speed())),
                       detail::auto_substeps(h, grid, advection.max_speed()));

    const detail::EtdTables tab = detail::etd_tables(grid, config.sigma, dt);
    const bool forced = !config.forcing.empty();

    auto rhs = [&](const SpectralField& om, double t) {
        SpectralField n = advection.apply(om);
        if (forced) n += config.forcing.eval(t);
        return n;
    };

    SpectralField omega = omega0;
    for (int j = 0; j < substeps; ++j) {
        const double t = t0 + j * dt;
        const SpectralField n1 = rhs(omega, t);
        SpectralField stage(grid, omega.components());
        for (int c = 0; c < omega.components(); ++c) {
            const Complex* om = omega.component_data(c);
            const Complex* f1 = n1.component_data(c);
            Complex* st = stage.component_data(c);
            for (std::size_t i = 0; i < omega.mode_count(); ++i)
                st[i] = tab.damp[i] * om[i] + tab.phi1_dt[i] * f1[i];
        }
        const SpectralField n2 = rhs(stage, t + dt);
        for (int c = 0; c < omega.components(); ++c) {
            Complex* st = stage.component_data(c);
            const Complex* f1 = n1.component_data(c);
            const Complex* f2 = n2.component_data(c);
            for (std::size_t i = 0; i < omega.mode_count(); ++i)
                st[i] += tab.phi2_dt[i] * (f2[i] - f1[i]);
        }
        omega = std::move(stage);
    }
    omega.remove_mean();
    return omega;
}

inline VelocityField recover_velocity(const SpectralField& omega, const SolverConfig& config) {
    if (config.stokes_mode) return VelocityField{SpectralField(omega.grid(), omega.grid().dim), true};
    return velocity_from_vorticity(omega);
}

// One outer step: solve the frozen linear system over [t, t+h], then refresh
// the frozen velocity from the new vorticity for the next interval.
inline SchemeState frozen_linear_step(const SchemeState& state, double h, const SolverConfig& config) {
    SpectralField omega = advance_frozen(state.omega, state.frozen_velocity, state.t, h, config);
    VelocityField u = recover_velocity(omega, config);
    return SchemeState{state.t + h, std::move(omega), std::move(u)};
}

// Chains N frozen steps from the initial vorticity phi = curl(phi_velocity);
// the frozen velocity is anchored at the left endpoint of each interval.
// Returns the states at all N+1 nodes.
inline std::vector<SchemeState> run_deterministic(const SpectralField& phi, const SolverConfig& config) {
    const int expected = config.grid.dim == 2 ? 1 : 3;
    if (phi.components() != expected)
        throw ComponentCountError("run_deterministic: vorticity component count does not match dim");
    if (!(phi.grid() == config.grid)) throw GridMismatchError("run_deterministic: grid mismatch");

    std::vector<SchemeState> trajectory;
    trajectory.reserve(static_cast<std::size_t>(config.outer_steps) + 1);
    trajectory.push_back(SchemeState{0.0, phi, recover_velocity(phi, config)});
    const double h = config.step_size();
    for (int k = 0; k < config.outer_steps; ++k)
        trajectory.push_back(frozen_linear_step(trajectory.back(), h, config));
    return trajectory;
}

}  // namespace vflow
