#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vortexflow/noise.hpp"
#include "vortexflow/random_fields.hpp"
#include "vortexflow/stepper.hpp"

namespace vflow {

// Flat key=value experiment description. Every parameter is flat-addressable
// for sweep scripting; unknown keys are rejected. `#` starts a comment.
class ExperimentConfig {
   public:
    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str(), path);
    }

    static ExperimentConfig from_string(const std::string& text, const std::string& origin = "<string>") {
        ExperimentConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos)
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (!known_keys().count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
            if (cfg.values_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key)) throw ConfigError("config: unknown key '" + key + "'");
        values_[key] = value;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("config: missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_double(key, it->second);
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_int(key, it->second);
    }

    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not an unsigned integer");
        }
    }

    double require_positive(const std::string& key) const {
        const double v = parse_double(key, require_string(key));
        if (!(v > 0.0)) throw ConfigError("config: key '" + key + "' must be positive");
        return v;
    }

    std::vector<int> get_int_list(const std::string& key, const std::string& fallback) const {
        const std::string text = get_string(key, fallback);
        std::vector<int> out;
        std::istringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(parse_int(key, item));
        }
        if (out.empty()) throw ConfigError("config: key '" + key + "' has no entries");
        return out;
    }

    std::vector<double> get_double_list(const std::string& key, const std::string& fallback) const {
        const std::string text = get_string(key, fallback);
        std::vector<double> out;
        std::istringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(parse_double(key, item));
        }
        if (out.empty()) throw ConfigError("config: key '" + key + "' has no entries");
        return out;
    }

    // "1 0; 0 1" -> wavevectors
    std::vector<WaveIndex> get_mode_list(const std::string& key, int dim, const std::string& fallback) const {
        const std::string text = get_string(key, fallback);
        std::vector<WaveIndex> out;
        std::istringstream groups(text);
        std::string group;
        while (std::getline(groups, group, ';')) {
            std::istringstream comps(group);
            WaveIndex w;
            w.dim = dim;
            int d = 0, v = 0;
            while (comps >> v) {
                if (d >= dim) throw ConfigError("config: key '" + key + "': too many components in '" + group + "'");
                w[d++] = v;
            }
            if (d == 0) continue;
            if (d != dim) throw ConfigError("config: key '" + key + "': expected " + std::to_string(dim) +
                                            " components in '" + group + "'");
            out.push_back(w);
        }
        if (out.empty()) throw ConfigError("config: key '" + key + "' has no entries");
        return out;
    }

    // ---- typed builders -----------------------------------------------------

    PeriodicGrid grid() const {
        const int dim = get_int("dim", 2);
        const int K = get_int("K", 16);
        const double L = get_double("L", 2.0 * std::numbers::pi);
        try {
            return PeriodicGrid(dim, K, L);
        } catch (const Error& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

    Forcing forcing(const PeriodicGrid& g) const {
        const std::string kind = get_string("forcing", "none");
        if (kind == "none") return Forcing::none();
        if (kind != "modes") throw ConfigError("config: forcing must be 'none' or 'modes'");
        const std::vector<WaveIndex> modes = get_mode_list("forcing_modes", g.dim, "");
        const std::vector<double> amps = get_double_list("forcing_amplitudes", "");
        if (modes.size() != amps.size())
            throw ConfigError("config: forcing_modes and forcing_amplitudes differ in length");
        const int comps = g.dim == 2 ? 1 : 3;
        SpectralField shape(g, comps);
        for (std::size_t j = 0; j < modes.size(); ++j) {
            if (modes[j].is_zero()) throw ConfigError("config: forcing mode 0 is not zero-mean");
            for (int c = 0; c < comps; ++c) {
                shape.coeff(c, modes[j]) += Complex(0.5 * amps[j], 0.0);
                shape.coeff(c, modes[j].negated()) += Complex(0.5 * amps[j], 0.0);
            }
        }
        if (g.dim == 3) shape = leray_project(shape);  // keep div g = 0
        if (has("forcing_time_amplitude")) {
            const double a = get_double("forcing_time_amplitude", 0.0);
            const double period = require_positive("forcing_time_period");
            return Forcing::modulated(std::move(shape), [a, period](double t) {
                return 1.0 + a * std::sin(2.0 * std::numbers::pi * t / period);
            });
        }
        return Forcing::constant(std::move(shape));
    }

    SolverConfig solver(std::uint64_t /*seed*/ = 0) const {
        SolverConfig cfg;
        cfg.grid = grid();
        cfg.sigma = require_positive("sigma");
        cfg.horizon = require_positive("T");
        cfg.outer_steps = get_int("N", 16);
        if (cfg.outer_steps <= 0) throw ConfigError("config: N must be positive");
        cfg.inner_substeps = get_int("M", 0);
        if (cfg.inner_substeps < 0) throw ConfigError("config: M must be >= 0");
        cfg.dealias = get_int("dealias", 1) != 0;
        cfg.stokes_mode = get_string("problem", "") == "stokes";
        cfg.forcing = forcing(cfg.grid);
        return cfg;
    }

    SpectralField initial_vorticity(const PeriodicGrid& g, std::uint64_t seed) const {
        const std::string kind = get_string("initial", "taylor-green");
        const double amp = get_double("initial_amplitude", 1.0);
        if (kind == "taylor-green") {
            if (g.dim != 2) throw ConfigError("config: initial taylor-green is 2D only");
            SpectralField om = taylor_green_solution(0.0, 1.0, g).vorticity;
            om *= amp;
            return om;
        }
        if (kind == "random") {
            const double decay = get_double("initial_decay", 4.0);
            return random_divergence_free_vorticity(g, get_seed("initial_seed", seed), decay, amp);
        }
        if (kind == "single-mode") {
            const std::vector<WaveIndex> modes = get_mode_list("initial_mode", g.dim, "");
            const int comps = g.dim == 2 ? 1 : 3;
            SpectralField om(g, comps);
            for (const WaveIndex& m : modes) {
                for (int c = 0; c < comps; ++c) {
                    om.coeff(c, m) += Complex(0.5 * amp, 0.0);
                    om.coeff(c, m.negated()) += Complex(0.5 * amp, 0.0);
                }
            }
            if (g.dim == 3) om = leray_project(om);
            return om;
        }
        throw ConfigError("config: initial must be taylor-green, random or single-mode");
    }

    NoiseSpec noise(const PeriodicGrid& g, std::uint64_t seed) const {
        if (!has("noise_modes")) return NoiseSpec{{}, {}, {}, seed};
        const std::vector<WaveIndex> modes = get_mode_list("noise_modes", 2, "");
        const std::vector<double> amps = get_double_list("noise_amplitudes", "");
        if (modes.size() != amps.size())
            throw ConfigError("config: noise_modes and noise_amplitudes differ in length");
        try {
            return build_noise(g, modes, amps, seed);
        } catch (const Error& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

   private:
    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    static double parse_double(const std::string& key, const std::string& value) {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not a number: '" + value + "'");
        }
    }

    static int parse_int(const std::string& key, const std::string& value) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' is not an integer: '" + value + "'");
        }
    }

    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "problem", "dim", "K", "L", "sigma", "T", "N", "M", "dealias",
            "initial", "initial_seed", "initial_amplitude", "initial_decay", "initial_mode",
            "forcing", "forcing_modes", "forcing_amplitudes", "forcing_time_amplitude", "forcing_time_period",
            "noise_modes", "noise_amplitudes",
            "study_steps", "study_reference", "ensemble", "oracle", "window_lo", "window_hi",
            "probe_h", "probe_fine_factor",
            "point", "fk_system", "fk_choice", "samples", "h_sde",
            "mc_modes", "mc_outer", "mc_inner_samples",
            "monitor_p", "monitor_beta",
            "seed", "out_prefix",
        };
        return keys;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace vflow
