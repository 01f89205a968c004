#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "vortexflow/field.hpp"

namespace vflow {

// Process-wide cache of FFTW c2c plans, keyed by (dim, K, sign). Plan creation
// is serialized (FFTW requirement); execution runs concurrently on per-call
// buffers via fftw_execute_dft.
class FftEngine {
   public:
    static FftEngine& instance() {
        static FftEngine engine;
        return engine;
    }

    // In-place unnormalized transform of a K^dim complex array.
    void transform(const PeriodicGrid& grid, Complex* data, int sign) {
        fftw_plan plan = plan_for(grid, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(data), reinterpret_cast<fftw_complex*>(data));
    }

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

   private:
    FftEngine() = default;
    ~FftEngine() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan plan_for(const PeriodicGrid& grid, int sign) {
        std::scoped_lock lock(mutex_);
        auto key = std::make_tuple(grid.dim, grid.modes_per_dim, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<Complex> scratch(grid.point_count());
        int n[3] = {grid.modes_per_dim, grid.modes_per_dim, grid.modes_per_dim};
        fftw_plan plan = fftw_plan_dft(grid.dim, n, reinterpret_cast<fftw_complex*>(scratch.data()),
                                       reinterpret_cast<fftw_complex*>(scratch.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// Synthesis u(x_j) = sum_n u_n exp(i 2pi (n.j)/K). Requires reality symmetry;
// asymmetry beyond symmetry_tol (relative to the largest coefficient) throws.
inline PhysicalField to_physical(const SpectralField& field, double symmetry_tol = 1e-9) {
    const double scale = field.max_abs_coeff();
    if (scale > 0.0 && field.max_asymmetry() > symmetry_tol * scale)
        throw SymmetryError("to_physical: coefficients violate reality symmetry");

    PhysicalField out(field.grid(), field.components());
    std::vector<Complex> buf(field.mode_count());
    for (int c = 0; c < field.components(); ++c) {
        const Complex* src = field.component_data(c);
        std::copy(src, src + field.mode_count(), buf.begin());
        FftEngine::instance().transform(field.grid(), buf.data(), FFTW_BACKWARD);
        double* dst = out.component_data(c);
        for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = buf[i].real();
    }
    return out;
}

struct SpectralAnalysis {
    SpectralField field;
    std::vector<double> removed_mean;  // per component
};

// Analysis: forward DFT / K^dim, then the construction invariants are applied
// exactly: mean removed (and reported), Nyquist plane zeroed, conjugate
// symmetry enforced.
inline SpectralAnalysis analyze(const PhysicalField& samples) {
    const std::size_t points = samples.grid.point_count();
    if (samples.values.size() != points * static_cast<std::size_t>(samples.components))
        throw ShapeError("analyze: sample array does not match K^dim per component");

    SpectralField field(samples.grid, samples.components);
    std::vector<Complex> buf(points);
    const double inv = 1.0 / static_cast<double>(points);
    std::vector<double> mean(static_cast<std::size_t>(samples.components), 0.0);
    for (int c = 0; c < samples.components; ++c) {
        const double* src = samples.component_data(c);
        for (std::size_t i = 0; i < points; ++i) buf[i] = Complex(src[i], 0.0);
        FftEngine::instance().transform(samples.grid, buf.data(), FFTW_FORWARD);
        Complex* dst = field.component_data(c);
        for (std::size_t i = 0; i < points; ++i) dst[i] = buf[i] * inv;
        mean[static_cast<std::size_t>(c)] = dst[0].real();
    }
    field.symmetrize();  // also removes the mean and zeroes Nyquist
    return SpectralAnalysis{std::move(field), std::move(mean)};
}

inline SpectralField to_spectral(const PhysicalField& samples) { return analyze(samples).field; }

}  // namespace vflow
