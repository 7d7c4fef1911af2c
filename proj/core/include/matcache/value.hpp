#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace matcache {

struct Color3 {
    float r = 0.0f;
    float g = 0.0f;
    float b = 0.0f;
};

inline Color3 operator+(Color3 a, Color3 b) { return {a.r + b.r, a.g + b.g, a.b + b.b}; }
inline Color3 operator*(Color3 a, Color3 b) { return {a.r * b.r, a.g * b.g, a.b * b.b}; }
inline Color3 operator*(Color3 a, float s) { return {a.r * s, a.g * s, a.b * s}; }
inline float max_component(Color3 c) { return std::fmax(c.r, std::fmax(c.g, c.b)); }

/// Runtime value flowing through a material network: a scalar or an rgb
/// triple. Scalars broadcast to gray triples; triples reduce to scalars by
/// Rec. 709 luminance. Both the recursive evaluator and the stack VM go
/// through these exact routines, which keeps their outputs bit-identical.
class Value {
public:
    Value() = default;

    static Value scalar(float s) { return Value(true, s, s, s); }
    static Value rgb(float r, float g, float b) { return Value(false, r, g, b); }
    static Value rgb(Color3 c) { return Value(false, c.r, c.g, c.b); }

    bool is_scalar() const { return scalar_; }

    /// Scalar view: the value itself, or luminance for a triple.
    float as_scalar() const {
        return scalar_ ? x_ : 0.2126f * x_ + 0.7152f * y_ + 0.0722f * z_;
    }

    /// Triple view: scalars are stored replicated, so this is a plain read.
    Color3 as_rgb() const { return {x_, y_, z_}; }

    bool all_finite() const {
        return std::isfinite(x_) && std::isfinite(y_) && std::isfinite(z_);
    }

    /// Bitwise equality (tag plus exact component bits).
    friend bool operator==(const Value& a, const Value& b) {
        return a.scalar_ == b.scalar_ &&
               std::bit_cast<uint32_t>(a.x_) == std::bit_cast<uint32_t>(b.x_) &&
               std::bit_cast<uint32_t>(a.y_) == std::bit_cast<uint32_t>(b.y_) &&
               std::bit_cast<uint32_t>(a.z_) == std::bit_cast<uint32_t>(b.z_);
    }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

private:
    Value(bool scalar, float x, float y, float z) : scalar_(scalar), x_(x), y_(y), z_(z) {}

    bool scalar_ = true;
    float x_ = 0.0f;
    float y_ = 0.0f;
    float z_ = 0.0f;
};

namespace ops {

struct RampStop {
    float t = 0.0f;
    Color3 color;
};

namespace detail {

template <typename F>
inline Value componentwise2(const Value& a, const Value& b, F f) {
    const bool scalar = a.is_scalar() && b.is_scalar();
    const Color3 ca = a.as_rgb();
    const Color3 cb = b.as_rgb();
    const Color3 r{f(ca.r, cb.r), f(ca.g, cb.g), f(ca.b, cb.b)};
    return scalar ? Value::scalar(r.r) : Value::rgb(r);
}

template <typename F>
inline Value componentwise1(const Value& a, F f) {
    const Color3 ca = a.as_rgb();
    const Color3 r{f(ca.r), f(ca.g), f(ca.b)};
    return a.is_scalar() ? Value::scalar(r.r) : Value::rgb(r);
}

}  // namespace detail

inline Value add(const Value& a, const Value& b) {
    return detail::componentwise2(a, b, [](float x, float y) { return x + y; });
}

inline Value sub(const Value& a, const Value& b) {
    return detail::componentwise2(a, b, [](float x, float y) { return x - y; });
}

inline Value mul(const Value& a, const Value& b) {
    return detail::componentwise2(a, b, [](float x, float y) { return x * y; });
}

/// Division by zero yields 0, so downstream consumers (and the cache codec)
/// never see a non-finite component.
inline Value div(const Value& a, const Value& b) {
    return detail::componentwise2(a, b, [](float x, float y) { return y == 0.0f ? 0.0f : x / y; });
}

inline Value mix(const Value& a, const Value& b, const Value& fac) {
    const float t = fac.as_scalar();
    return detail::componentwise2(a, b, [t](float x, float y) { return x * (1.0f - t) + y * t; });
}

inline Value clamp01(const Value& a) {
    return detail::componentwise1(a, [](float x) { return std::fmin(std::fmax(x, 0.0f), 1.0f); });
}

inline Value dot3(const Value& a, const Value& b) {
    const Color3 ca = a.as_rgb();
    const Color3 cb = b.as_rgb();
    return Value::scalar(ca.r * cb.r + ca.g * cb.g + ca.b * cb.b);
}

inline Value sin_wave(const Value& a) {
    constexpr float kTwoPi = 6.28318530717958647692f;
    return detail::componentwise1(a, [](float x) { return 0.5f + 0.5f * std::sin(x * kTwoPi); });
}

/// pow with totality: negative bases clamp to 0 and non-finite results
/// collapse to 0.
inline Value power(const Value& a, const Value& b) {
    return detail::componentwise2(a, b, [](float x, float y) {
        const float r = std::pow(std::fmax(x, 0.0f), y);
        return std::isfinite(r) ? r : 0.0f;
    });
}

/// Piecewise-linear color ramp over [0,1]; positions are assumed sorted.
/// Input below the first stop or above the last clamps to that stop.
inline Value ramp(const std::vector<RampStop>& stops, const Value& fac) {
    if (stops.empty()) return Value::rgb(0.0f, 0.0f, 0.0f);
    const float t = fac.as_scalar();
    if (t <= stops.front().t) return Value::rgb(stops.front().color);
    if (t >= stops.back().t) return Value::rgb(stops.back().color);
    for (size_t i = 1; i < stops.size(); ++i) {
        if (t <= stops[i].t) {
            const RampStop& lo = stops[i - 1];
            const RampStop& hi = stops[i];
            const float span = hi.t - lo.t;
            const float w = span > 0.0f ? (t - lo.t) / span : 0.0f;
            return Value::rgb(lo.color * (1.0f - w) + hi.color * w);
        }
    }
    return Value::rgb(stops.back().color);
}

}  // namespace ops
}  // namespace matcache
