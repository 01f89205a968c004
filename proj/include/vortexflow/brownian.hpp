#pragma once

#include <cstdio>
#include <fstream>

#include "vortexflow/errors.hpp"
#include "vortexflow/rng.hpp"

#include <string>
#include <vector>

namespace vflow {

// Wiener increments for q channels at one fixed resolution. Increments are
// drawn once at the finest resolution in play; coarser resolutions aggregate
// by summing consecutive fine increments in index order, which keeps coupled
// runs on literally the same path.
struct BrownianPaths {
    int channels = 0;
    std::size_t steps = 0;
    double h = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> increments;  // [step*q + r], N(0,h)

    double increment(std::size_t step, int r) const {
        return increments[step * static_cast<std::size_t>(channels) + static_cast<std::size_t>(r)];
    }

    static BrownianPaths generate(int channels, std::size_t steps, double h, std::uint64_t seed) {
        BrownianPaths p;
        p.channels = channels;
        p.steps = steps;
        p.h = h;
        p.seed = seed;
        p.increments.resize(steps * static_cast<std::size_t>(channels));
        const double sq = std::sqrt(h);
        for (std::size_t k = 0; k < steps; ++k) {
            PhiloxStream stream(seed, k);  // one stream per step: count-stable in q
            for (int r = 0; r < channels; ++r)
                p.increments[k * static_cast<std::size_t>(channels) + static_cast<std::size_t>(r)] =
                    sq * stream.normal();
        }
        return p;
    }

    // Sum groups of `factor` consecutive increments (exact, fixed order).
    BrownianPaths aggregate(std::size_t factor) const {
        if (factor == 0 || steps % factor != 0)
            throw NestingError("BrownianPaths::aggregate: factor must divide the step count");
        BrownianPaths out;
        out.channels = channels;
        out.steps = steps / factor;
        out.h = h * static_cast<double>(factor);
        out.seed = seed;
        out.increments.assign(out.steps * static_cast<std::size_t>(channels), 0.0);
        for (std::size_t k = 0; k < steps; ++k) {
            const std::size_t coarse = k / factor;
            for (int r = 0; r < channels; ++r)
                out.increments[coarse * static_cast<std::size_t>(channels) + static_cast<std::size_t>(r)] +=
                    increment(k, r);
        }
        return out;
    }

    // ---- BROWN/1 text format ------------------------------------------------

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("BrownianPaths::save: cannot open " + path);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", h);
        out << "BROWN 1 " << channels << ' ' << steps << ' ' << buf << ' ' << seed << '\n';
        for (std::size_t k = 0; k < steps; ++k) {
            for (int r = 0; r < channels; ++r) {
                std::snprintf(buf, sizeof(buf), "%.17g", increment(k, r));
                out << (r ? " " : "") << buf;
            }
            out << '\n';
        }
        if (!out) throw IoError("BrownianPaths::save: write failed for " + path);
    }

    static BrownianPaths load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("BrownianPaths::load: cannot open " + path);
        std::string magic;
        int version = 0;
        BrownianPaths p;
        in >> magic >> version;
        if (!in || magic != "BROWN") throw IoError("BrownianPaths::load: malformed header in " + path);
        if (version != 1) throw IoError("BrownianPaths::load: unsupported BROWN version " + std::to_string(version));
        in >> p.channels >> p.steps >> p.h >> p.seed;
        if (!in || p.channels < 0) throw IoError("BrownianPaths::load: malformed header in " + path);
        p.increments.resize(p.steps * static_cast<std::size_t>(p.channels));
        for (double& v : p.increments)
            if (!(in >> v)) throw IoError("BrownianPaths::load: truncated body in " + path);
        return p;
    }
};

}  // namespace vflow
