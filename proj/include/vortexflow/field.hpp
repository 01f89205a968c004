#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "vortexflow/grid.hpp"

namespace vflow {

using Complex = std::complex<double>;

// Periodic scalar/vector field stored as complex Fourier coefficients on the
// truncated lattice. Component-major, row-major within a component. A field
// constructed through the public mutators keeps three invariants: zero mean,
// zero Nyquist plane, exact conjugate symmetry coeff(-n) == conj(coeff(n)).
class SpectralField {
   public:
    SpectralField() = default;
    SpectralField(const PeriodicGrid& grid, int components)
        : grid_(grid), components_(components), data_(grid.point_count() * static_cast<std::size_t>(components)) {
        if (components < 1) throw ComponentCountError("SpectralField: components must be >= 1");
    }

    const PeriodicGrid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t mode_count() const { return grid_.point_count(); }

    Complex coeff(int comp, std::size_t flat) const { return data_[slot(comp, flat)]; }
    Complex& coeff(int comp, std::size_t flat) { return data_[slot(comp, flat)]; }
    Complex coeff(int comp, const WaveIndex& w) const { return data_[slot(comp, flat_index(grid_, w))]; }
    Complex& coeff(int comp, const WaveIndex& w) { return data_[slot(comp, flat_index(grid_, w))]; }

    const Complex* component_data(int comp) const { return data_.data() + slot(comp, 0); }
    Complex* component_data(int comp) { return data_.data() + slot(comp, 0); }

    void fill_zero() { std::fill(data_.begin(), data_.end(), Complex(0.0, 0.0)); }

    // ---- invariant repair -------------------------------------------------

    // Returns the discarded mean per component.
    std::vector<double> remove_mean() {
        std::vector<double> removed(static_cast<std::size_t>(components_), 0.0);
        for (int c = 0; c < components_; ++c) {
            removed[static_cast<std::size_t>(c)] = data_[slot(c, 0)].real();
            data_[slot(c, 0)] = Complex(0.0, 0.0);
        }
        return removed;
    }

    void zero_nyquist() {
        for_each_mode(grid_, [&](std::size_t flat, const WaveIndex& w) {
            if (is_nyquist(grid_, w))
                for (int c = 0; c < components_; ++c) data_[slot(c, flat)] = Complex(0.0, 0.0);
        });
    }

    // Forces coeff(-n) == conj(coeff(n)) exactly by averaging each pair.
    void symmetrize() {
        for_each_mode(grid_, [&](std::size_t flat, const WaveIndex& w) {
            if (is_nyquist(grid_, w)) {
                for (int c = 0; c < components_; ++c) data_[slot(c, flat)] = Complex(0.0, 0.0);
                return;
            }
            if (w.is_zero() || !w.leading_positive()) return;
            std::size_t partner = flat_index(grid_, w.negated());
            for (int c = 0; c < components_; ++c) {
                Complex avg = 0.5 * (data_[slot(c, flat)] + std::conj(data_[slot(c, partner)]));
                data_[slot(c, flat)] = avg;
                data_[slot(c, partner)] = std::conj(avg);
            }
        });
        remove_mean();
    }

    // Largest |coeff(n) - conj(coeff(-n))| over the lattice.
    double max_asymmetry() const {
        double worst = 0.0;
        for_each_mode(grid_, [&](std::size_t flat, const WaveIndex& w) {
            if (!w.leading_positive() || is_nyquist(grid_, w)) return;
            std::size_t partner = flat_index(grid_, w.negated());
            for (int c = 0; c < components_; ++c)
                worst = std::max(worst, std::abs(data_[slot(c, flat)] - std::conj(data_[slot(c, partner)])));
        });
        return worst;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const Complex& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    // ---- arithmetic (same grid and component count assumed checked by caller)

    SpectralField& operator+=(const SpectralField& o) {
        check_congruent(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_congruent(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (Complex& z : data_) z *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    void check_congruent(const SpectralField& o) const {
        if (!(grid_ == o.grid_)) throw GridMismatchError("SpectralField: grids differ");
        if (components_ != o.components_) throw ComponentCountError("SpectralField: component counts differ");
    }

   private:
    std::size_t slot(int comp, std::size_t flat) const {
        return static_cast<std::size_t>(comp) * grid_.point_count() + flat;
    }

    PeriodicGrid grid_;
    int components_ = 1;
    std::vector<Complex> data_;
};

// Collocation samples on the uniform K^dim grid, x_j = j*L/K, component-major,
// same row-major site order as the spectral storage.
struct PhysicalField {
    PeriodicGrid grid;
    int components = 1;
    std::vector<double> values;

    PhysicalField() = default;
    PhysicalField(const PeriodicGrid& g, int c)
        : grid(g), components(c), values(g.point_count() * static_cast<std::size_t>(c), 0.0) {}

    double value(int comp, std::size_t site) const {
        return values[static_cast<std::size_t>(comp) * grid.point_count() + site];
    }
    double& value(int comp, std::size_t site) {
        return values[static_cast<std::size_t>(comp) * grid.point_count() + site];
    }
    const double* component_data(int comp) const {
        return values.data() + static_cast<std::size_t>(comp) * grid.point_count();
    }
    double* component_data(int comp) {
        return values.data() + static_cast<std::size_t>(comp) * grid.point_count();
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

// Visit every collocation site; fn(site, x[3]).
template <typename Fn>
inline void for_each_site(const PeriodicGrid& g, Fn&& fn) {
    const int K = g.modes_per_dim;
    const double dx = g.period / K;
    std::array<double, 3> x{0.0, 0.0, 0.0};
    if (g.dim == 2) {
        std::size_t site = 0;
        for (int j0 = 0; j0 < K; ++j0) {
            x[0] = j0 * dx;
            for (int j1 = 0; j1 < K; ++j1, ++site) {
                x[1] = j1 * dx;
                fn(site, x);
            }
        }
    } else {
        std::size_t site = 0;
        for (int j0 = 0; j0 < K; ++j0) {
            x[0] = j0 * dx;
            for (int j1 = 0; j1 < K; ++j1) {
                x[1] = j1 * dx;
                for (int j2 = 0; j2 < K; ++j2, ++site) {
                    x[2] = j2 * dx;
                    fn(site, x);
                }
            }
        }
    }
}

}  // namespace vflow
