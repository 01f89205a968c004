#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "vortexflow/field.hpp"

namespace vflow {

// VORTEXF/1 snapshot: text header `VORTEXF 1 <dim> <K> <L> <c> <t>`, then one
// line per stored wavevector with the integer components of n followed by c
// re/im pairs at 17 significant digits. Only the half-lattice with
// lexicographically positive leading nonzero index is stored; the conjugate
// half is implied by reality symmetry.

inline void save_snapshot(const SpectralField& field, double t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_snapshot: cannot open " + path);
    char buf[64];
    out << "VORTEXF 1 " << field.grid().dim << ' ' << field.grid().modes_per_dim << ' ';
    std::snprintf(buf, sizeof(buf), "%.17g", field.grid().period);
    out << buf << ' ' << field.components() << ' ';
    std::snprintf(buf, sizeof(buf), "%.17g", t);
    out << buf << '\n';

    for_each_mode(field.grid(), [&](std::size_t flat, const WaveIndex& w) {
        if (!w.leading_positive() || is_nyquist(field.grid(), w)) return;
        for (int d = 0; d < field.grid().dim; ++d) out << (d ? " " : "") << w[d];
        for (int c = 0; c < field.components(); ++c) {
            const Complex z = field.coeff(c, flat);
            std::snprintf(buf, sizeof(buf), " %.17g", z.real());
            out << buf;
            std::snprintf(buf, sizeof(buf), " %.17g", z.imag());
            out << buf;
        }
        out << '\n';
    });
    if (!out) throw IoError("save_snapshot: write failed for " + path);
}

struct Snapshot {
    SpectralField field;
    double t = 0.0;
};

inline Snapshot load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_snapshot: cannot open " + path);
    std::string magic;
    int version = 0, dim = 0, K = 0, comps = 0;
    double L = 0.0, t = 0.0;
    in >> magic >> version;
    if (!in || magic != "VORTEXF") throw IoError("load_snapshot: malformed header in " + path);
    if (version != 1)
        throw IoError("load_snapshot: unsupported VORTEXF version " + std::to_string(version));
    in >> dim >> K >> L >> comps >> t;
    if (!in) throw IoError("load_snapshot: malformed header in " + path);
    PeriodicGrid grid(dim, K, L);
    if (comps < 1) throw IoError("load_snapshot: bad component count in " + path);

    SpectralField field(grid, comps);
    std::vector<bool> seen(grid.point_count(), false);
    std::string line;
    std::getline(in, line);  // finish header line
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        WaveIndex w;
        w.dim = dim;
        for (int d = 0; d < dim; ++d)
            if (!(row >> w[d])) throw IoError("load_snapshot: truncated body in " + path);
        for (int d = 0; d < dim; ++d)
            if (w[d] < -K / 2 || w[d] > K / 2 - 1)
                throw IoError("load_snapshot: wavevector " + w.str() + " outside the lattice in " + path);
        if (!w.leading_positive())
            throw SymmetryError("load_snapshot: " + w.str() +
                                " is not in the stored half-lattice (symmetry violation) in " + path);
        if (is_nyquist(grid, w))
            throw SymmetryError("load_snapshot: Nyquist mode " + w.str() + " must not be stored in " + path);
        const std::size_t flat = flat_index(grid, w);
        if (seen[flat]) throw SymmetryError("load_snapshot: duplicate wavevector " + w.str() + " in " + path);
        seen[flat] = true;
        const std::size_t partner = flat_index(grid, w.negated());
        for (int c = 0; c < comps; ++c) {
            double re = 0.0, im = 0.0;
            if (!(row >> re >> im)) throw IoError("load_snapshot: truncated body in " + path);
            field.coeff(c, flat) = Complex(re, im);
            field.coeff(c, partner) = Complex(re, -im);
        }
    }
    return Snapshot{std::move(field), t};
}

}  // namespace vflow
