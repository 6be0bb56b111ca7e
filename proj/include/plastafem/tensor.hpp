#pragma once

#include <cmath>

namespace plastafem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double trace() const { return xx + yy; }

    friend Sym2 operator+(const Sym2& a, const Sym2& b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
    friend Sym2 operator-(const Sym2& a, const Sym2& b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
    friend Sym2 operator*(double s, const Sym2& a) { return {s * a.xx, s * a.xy, s * a.yy}; }
    friend bool operator==(const Sym2&, const Sym2&) = default;
};

/// Frobenius inner product.
inline double ddot(const Sym2& a, const Sym2& b) { return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy; }
inline double norm(const Sym2& a) { return std::sqrt(ddot(a, a)); }
inline Vec2 apply(const Sym2& s, Vec2 n) { return {s.xx * n.x + s.xy * n.y, s.xy * n.x + s.yy * n.y}; }

inline Sym2 deviator(const Sym2& a) {
    const double m = 0.5 * a.trace();
    return {a.xx - m, a.xy, a.yy - m};
}

/// Trace-free symmetric tensor [[d11, d12], [d12, -d11]].
struct Dev2 {
    double d11 = 0.0;
    double d12 = 0.0;

    Sym2 full() const { return {d11, d12, -d11}; }
    double norm() const { return std::sqrt(2.0 * (d11 * d11 + d12 * d12)); }

    static Dev2 from(const Sym2& s) {
        const Sym2 d = deviator(s);
        return {d.xx, d.xy};
    }

    friend Dev2 operator+(Dev2 a, Dev2 b) { return {a.d11 + b.d11, a.d12 + b.d12}; }
    friend Dev2 operator-(Dev2 a, Dev2 b) { return {a.d11 - b.d11, a.d12 - b.d12}; }
    friend Dev2 operator*(double s, Dev2 a) { return {s * a.d11, s * a.d12}; }
    friend bool operator==(Dev2, Dev2) = default;
};

}  // namespace plastafem
