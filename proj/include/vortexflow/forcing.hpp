#pragma once

#include <functional>
#include <memory>

#include "vortexflow/field.hpp"

namespace vflow {

// Time-dependent spectral forcing g = curl f for the vorticity equation.
// A default-constructed Forcing is "none" and evaluates to nothing.
class Forcing {
   public:
    Forcing() = default;

    static Forcing none() { return Forcing(); }

    static Forcing constant(SpectralField g) {
        Forcing f;
        f.static_field_ = std::make_shared<SpectralField>(std::move(g));
        return f;
    }

    // g(t,x) = factor(t) * shape(x)
    static Forcing modulated(SpectralField shape, std::function<double(double)> factor) {
        Forcing f;
        f.static_field_ = std::make_shared<SpectralField>(std::move(shape));
        f.factor_ = std::move(factor);
        return f;
    }

    static Forcing time_varying(std::function<SpectralField(double)> fn) {
        Forcing f;
        f.fn_ = std::move(fn);
        return f;
    }

    bool empty() const { return !static_field_ && !fn_; }
    bool time_dependent() const { return static_cast<bool>(fn_) || static_cast<bool>(factor_); }

    SpectralField eval(double t) const {
        if (fn_) return fn_(t);
        SpectralField g = *static_field_;
        if (factor_) g *= factor_(t);
        return g;
    }

   private:
    std::shared_ptr<SpectralField> static_field_;
    std::function<double(double)> factor_;
    std::function<SpectralField(double)> fn_;
};

}  // namespace vflow
