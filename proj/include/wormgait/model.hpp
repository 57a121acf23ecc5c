#ifndef WORMGAIT_MODEL_HPP
#define WORMGAIT_MODEL_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "wormgait/errors.hpp"

namespace wormgait {

// Net locomotion goes toward the side on which the fins slip (the compliant,
// disengaged branch of the fin law, x < 0). Speeds and "advance" distances
// are measured along this direction.
inline constexpr double kTravelDirection = -1.0;

inline constexpr double kGravity = 9.81;

/// Lumped physical parameters of the robot and the pipe (SI units).
/// Defaults are the identified values of the reference prototype.
struct RobotParams {
    double m1 = 0.429;        // rear end module mass (kg)
    double m2 = 0.429;        // front end module mass (kg)
    double l_free = 0.30;     // unstressed body length (m)
    double l0 = 0.30;         // initial body length (m)
    double k_b = 968.8;       // bellows stiffness (N/m)
    double c_b = 862.4;       // bellows damping (N s/m)
    double eta = 86.97;       // environmental viscous coefficient (N s/m)
    double d = 0.0173;        // pipe ridge pitch (m)
    double k_eng = 1833.1;    // engaged fin stiffness (N/m)
    double k_dis = 442.0;     // disengaged fin stiffness (N/m)
    double p_sw = 0.0175;     // anchor switching threshold (m)
    double delta_c = 0.00753; // groove clearance dead-zone width (m)

    [[nodiscard]] double total_mass() const noexcept { return m1 + m2; }

    void validate() const
    {
        auto positive = [](double v, char const* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ParameterError(fmt::format("robot parameter {} must be positive and finite (got {})", name, v));
            }
        };
        positive(m1, "m1");
        positive(m2, "m2");
        positive(l_free, "l_free");
        positive(l0, "l0");
        positive(k_b, "k_b");
        positive(c_b, "c_b");
        positive(eta, "eta");
        positive(d, "d");
        positive(k_eng, "k_eng");
        positive(k_dis, "k_dis");
        positive(p_sw, "p_sw");
        positive(delta_c, "delta_c");
        if (!(k_eng > k_dis)) {
            throw ParameterError(fmt::format("fin law must be anisotropic: k_eng ({}) > k_dis ({})", k_eng, k_dis));
        }
        if (!(delta_c / 2.0 < p_sw)) {
            throw ParameterError(fmt::format("switching threshold p_sw ({}) must exceed half the clearance ({})", p_sw, delta_c / 2.0));
        }
    }
};

/// Decision vector of a sinusoidal gait.
struct GaitParams {
    double stroke_s = 0.07; // contraction stroke (m)
    double freq_f = 0.2;    // operating frequency (Hz)

    [[nodiscard]] double period() const noexcept { return 1.0 / freq_f; }

    void validate() const
    {
        if (!(stroke_s > 0.0) || !std::isfinite(stroke_s)) {
            throw ParameterError(fmt::format("gait stroke must be positive (got {})", stroke_s));
        }
        if (!(freq_f > 0.0) || !std::isfinite(freq_f)) {
            throw ParameterError(fmt::format("gait frequency must be positive (got {})", freq_f));
        }
    }
};

/// Admissible gait box.
struct GaitBounds {
    double s_min = 0.01;
    double s_max = 0.09;
    double f_min = 0.08;
    double f_max = 0.4;

    // Name of the first violated bound, if any.
    [[nodiscard]] std::optional<std::string> violation(GaitParams const& g) const
    {
        if (g.stroke_s < s_min) {
            return fmt::format("stroke S={} below s_min={}", g.stroke_s, s_min);
        }
        if (g.stroke_s > s_max) {
            return fmt::format("stroke S={} above s_max={}", g.stroke_s, s_max);
        }
        if (g.freq_f < f_min) {
            return fmt::format("frequency f={} below f_min={}", g.freq_f, f_min);
        }
        if (g.freq_f > f_max) {
            return fmt::format("frequency f={} above f_max={}", g.freq_f, f_max);
        }
        return std::nullopt;
    }

    [[nodiscard]] bool contains(GaitParams const& g) const { return !violation(g); }

    void validate() const
    {
        if (!(0.0 < s_min && s_min <= s_max) || !(0.0 < f_min && f_min <= f_max)) {
            throw ParameterError(fmt::format("invalid gait bounds S in [{}, {}], f in [{}, {}]", s_min, s_max, f_min, f_max));
        }
    }
};

/// Clearance-aware piecewise-linear fin/groove interaction.
class FinForceLaw {
public:
    FinForceLaw(double k_eng, double k_dis, double delta_c) noexcept
        : k_eng_(k_eng), k_dis_(k_dis), half_gap_(delta_c / 2.0)
    {
    }

    explicit FinForceLaw(RobotParams const& p) noexcept
        : FinForceLaw(p.k_eng, p.k_dis, p.delta_c)
    {
    }

    [[nodiscard]] double operator()(double x) const noexcept
    {
        if (x > half_gap_) {
            return k_eng_ * (x - half_gap_);
        }
        if (x < -half_gap_) {
            return k_dis_ * (x + half_gap_);
        }
        return 0.0;
    }

    [[nodiscard]] double k_eng() const noexcept { return k_eng_; }
    [[nodiscard]] double k_dis() const noexcept { return k_dis_; }
    [[nodiscard]] double half_gap() const noexcept { return half_gap_; }

private:
    double k_eng_;
    double k_dis_;
    double half_gap_;
};

[[nodiscard]] inline double fin_force(FinForceLaw const& law, double x) noexcept { return law(x); }

/// Commanded length change u(t) = -(S/2)(1 - cos 2 pi f t); in [-S, 0].
[[nodiscard]] inline double commanded_gait(GaitParams const& g, double t) noexcept
{
    return -0.5 * g.stroke_s * (1.0 - std::cos(2.0 * std::numbers::pi * g.freq_f * t));
}

[[nodiscard]] inline double commanded_gait_rate(GaitParams const& g, double t) noexcept
{
    double const w = 2.0 * std::numbers::pi * g.freq_f;
    return -0.5 * g.stroke_s * w * std::sin(w * t);
}

} // namespace wormgait

#endif
