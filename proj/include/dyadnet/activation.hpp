#pragma once

#include <cmath>
#include <string>

#include "dyadnet/errors.hpp"

namespace dyadnet {

enum class ActivationKind {
    Exact,       // a * tanh(b * x)
    Asg,         // shift-based sigmoid recoding
    Plan,        // piecewise-linear, slopes 1/2, 1/4, 1/16
    LinearI,     // x/4 clamped
    LinearII,    // x/2 clamped
    QuadraticI,  // saturating parabola on [-4, 4]
    QuadraticII, // saturating parabola on [-2, 2]
    Relu,
    Identity,
};

struct SigmoidParams {
    static constexpr double a = 1.7159;
    static constexpr double b = 2.0 / 3.0;
    static constexpr double a_hat = 7.0 / 4.0; // 8-bit rounding of a
};

inline const char* to_string(ActivationKind k) {
    switch (k) {
        case ActivationKind::Exact: return "exact";
        case ActivationKind::Asg: return "asg";
        case ActivationKind::Plan: return "plan";
        case ActivationKind::LinearI: return "linear1";
        case ActivationKind::LinearII: return "linear2";
        case ActivationKind::QuadraticI: return "quadratic1";
        case ActivationKind::QuadraticII: return "quadratic2";
        case ActivationKind::Relu: return "relu";
        case ActivationKind::Identity: return "identity";
    }
    return "?";
}

inline ActivationKind activation_from_string(const std::string& s) {
    if (s == "exact") return ActivationKind::Exact;
    if (s == "asg") return ActivationKind::Asg;
    if (s == "plan") return ActivationKind::Plan;
    if (s == "linear1") return ActivationKind::LinearI;
    if (s == "linear2") return ActivationKind::LinearII;
    if (s == "quadratic1") return ActivationKind::QuadraticI;
    if (s == "quadratic2") return ActivationKind::QuadraticII;
    if (s == "relu") return ActivationKind::Relu;
    if (s == "identity") return ActivationKind::Identity;
    throw ConfigError("unknown activation \"" + s + "\"");
}

namespace detail {

// All approximations below are odd; negative inputs evaluate as the odd
// reflection of the branches on t = |x|, which the positive branches define.

inline double asg_gain(double t) {
    if (t >= 63.0) return 1.0;
    double k = std::floor(t);
    double f = t - k;
    return 1.0 - std::ldexp(1.0 - f / 2.0, -static_cast<int>(k));
}

// Discontinuous by 1/128 at t = 19/8: the printed slopes and dyadic
// intercepts of the two outer segments cannot meet there (see README).
inline double plan_gain(double t) {
    if (t < 1.0) return t / 2.0;
    if (t < 2.375) return t / 4.0 + 0.25;
    if (t < 5.0) return t / 16.0 + 11.0 / 16.0;
    return 1.0;
}

inline double quadratic_gain(double x, double half_span) {
    if (x < -half_span) return -1.0;
    if (x < 0.0) {
        double u = x / half_span + 1.0;
        return u * u - 1.0;
    }
    if (x < half_span) {
        double u = x / half_span - 1.0;
        return 1.0 - u * u;
    }
    return 1.0;
}

inline double clamp_unit(double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); }

} // namespace detail

inline double activate(ActivationKind kind, double x) {
    const double ah = SigmoidParams::a_hat;
    switch (kind) {
        case ActivationKind::Exact:
            return SigmoidParams::a * std::tanh(SigmoidParams::b * x);
        case ActivationKind::Asg: {
            double g = detail::asg_gain(std::abs(x));
            return x >= 0.0 ? ah * g : -(ah * g);
        }
        case ActivationKind::Plan: {
            double g = detail::plan_gain(std::abs(x));
            return x >= 0.0 ? ah * g : -(ah * g);
        }
        case ActivationKind::LinearI:
            return ah * detail::clamp_unit(x / 4.0);
        case ActivationKind::LinearII:
            return ah * detail::clamp_unit(x / 2.0);
        case ActivationKind::QuadraticI:
            return ah * detail::quadratic_gain(x, 4.0);
        case ActivationKind::QuadraticII:
            return ah * detail::quadratic_gain(x, 2.0);
        case ActivationKind::Relu:
            return x > 0.0 ? x : 0.0;
        case ActivationKind::Identity:
            return x;
    }
    return x;
}

/// Dense-sampling sup of |activate(kind, x) - activate(Exact, x)| over
/// [lo, hi] at `samples` evenly spaced points.
inline double max_deviation(ActivationKind kind, double lo, double hi, int samples) {
    if (samples < 2) throw Error("max_deviation: need at least 2 samples");
    double sup = 0.0;
    for (int i = 0; i < samples; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        double d = std::abs(activate(kind, x) - activate(ActivationKind::Exact, x));
        if (d > sup) sup = d;
    }
    return sup;
}

} // namespace dyadnet
