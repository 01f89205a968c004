#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>

#include "vortexflow/errors.hpp"

namespace vflow {

// Uniform truncated Fourier lattice on the periodic cube (0,L]^dim.
// Retained wavevector indices per axis lie in [-K/2, K/2-1]; the unmatched
// Nyquist index -K/2 is kept in storage but always carries a zero coefficient
// so that reality symmetry survives differentiation.
struct PeriodicGrid {
    int dim = 2;           // 2 or 3
    int modes_per_dim = 4; // K, even
    double period = 2.0 * std::numbers::pi;

    PeriodicGrid() = default;
    PeriodicGrid(int dim_, int modes_per_dim_, double period_)
        : dim(dim_), modes_per_dim(modes_per_dim_), period(period_) {
        validate();
    }

    void validate() const {
        if (dim != 2 && dim != 3) throw ShapeError("PeriodicGrid: dim must be 2 or 3");
        if (modes_per_dim < 4 || modes_per_dim % 2 != 0)
            throw ShapeError("PeriodicGrid: modes_per_dim must be even and >= 4");
        if (!(period > 0.0)) throw ShapeError("PeriodicGrid: period must be positive");
    }

    double wavenumber() const { return 2.0 * std::numbers::pi / period; }  // 2*pi/L

    std::size_t point_count() const {
        std::size_t p = 1;
        for (int d = 0; d < dim; ++d) p *= static_cast<std::size_t>(modes_per_dim);
        return p;
    }

    // array index (0..K-1) <-> signed frequency (-K/2..K/2-1)
    int freq_of(int array_index) const {
        return array_index < modes_per_dim / 2 ? array_index : array_index - modes_per_dim;
    }
    int index_of(int freq) const { return freq >= 0 ? freq : freq + modes_per_dim; }

    bool operator==(const PeriodicGrid& o) const {
        return dim == o.dim && modes_per_dim == o.modes_per_dim && period == o.period;
    }
};

// A single retained wavevector. Components beyond `dim` are zero.
struct WaveIndex {
    std::array<int, 3> n{0, 0, 0};
    int dim = 2;

    WaveIndex() = default;
    WaveIndex(int n1, int n2) : n{n1, n2, 0}, dim(2) {}
    WaveIndex(int n1, int n2, int n3) : n{n1, n2, n3}, dim(3) {}

    int operator[](int d) const { return n[static_cast<std::size_t>(d)]; }
    int& operator[](int d) { return n[static_cast<std::size_t>(d)]; }

    int norm2() const {
        int s = 0;
        for (int d = 0; d < dim; ++d) s += n[static_cast<std::size_t>(d)] * n[static_cast<std::size_t>(d)];
        return s;
    }
    bool is_zero() const { return norm2() == 0; }

    WaveIndex negated() const {
        WaveIndex m = *this;
        for (int d = 0; d < dim; ++d) m[d] = -m[d];
        return m;
    }

    // a positive leading nonzero component selects the stored half-lattice
    bool leading_positive() const {
        for (int d = 0; d < dim; ++d) {
            if (n[static_cast<std::size_t>(d)] > 0) return true;
            if (n[static_cast<std::size_t>(d)] < 0) return false;
        }
        return false;
    }

    bool operator<(const WaveIndex& o) const {
        if (dim != o.dim) return dim < o.dim;
        for (int d = 0; d < dim; ++d)
            if (n[static_cast<std::size_t>(d)] != o.n[static_cast<std::size_t>(d)])
                return n[static_cast<std::size_t>(d)] < o.n[static_cast<std::size_t>(d)];
        return false;
    }
    bool operator==(const WaveIndex& o) const { return dim == o.dim && n == o.n; }

    std::string str() const {
        std::string s = "(";
        for (int d = 0; d < dim; ++d) s += (d ? "," : "") + std::to_string(n[static_cast<std::size_t>(d)]);
        return s + ")";
    }
};

inline std::size_t flat_index(const PeriodicGrid& g, const WaveIndex& w) {
    std::size_t f = 0;
    for (int d = 0; d < g.dim; ++d) {
        int a = g.index_of(w[d]);
        f = f * static_cast<std::size_t>(g.modes_per_dim) + static_cast<std::size_t>(a);
    }
    return f;
}

// Visit every lattice site in storage order; fn(flat, wave_index).
template <typename Fn>
inline void for_each_mode(const PeriodicGrid& g, Fn&& fn) {
    const int K = g.modes_per_dim;
    if (g.dim == 2) {
        std::size_t flat = 0;
        for (int a0 = 0; a0 < K; ++a0)
            for (int a1 = 0; a1 < K; ++a1, ++flat) fn(flat, WaveIndex(g.freq_of(a0), g.freq_of(a1)));
    } else {
        std::size_t flat = 0;
        for (int a0 = 0; a0 < K; ++a0)
            for (int a1 = 0; a1 < K; ++a1)
                for (int a2 = 0; a2 < K; ++a2, ++flat)
                    fn(flat, WaveIndex(g.freq_of(a0), g.freq_of(a1), g.freq_of(a2)));
    }
}

inline bool is_nyquist(const PeriodicGrid& g, const WaveIndex& w) {
    for (int d = 0; d < g.dim; ++d)
        if (w[d] == -g.modes_per_dim / 2) return true;
    return false;
}

}  // namespace vflow
