#pragma once

#include <array>
#include <cmath>
#include <type_traits>

namespace satorb::detail {

// Forward-mode dual number with N directional slots. Nesting
// Dual<Dual<double, N>, N> yields exact second derivatives.
template <class T, int N>
struct Dual {
    T v{};
    std::array<T, N> d{};

    Dual() = default;
    Dual(double c) : v(c) {}  // NOLINT: implicit constants are convenient in formulas
    Dual(T value, int slot) : v(value) { d[slot] = T(1.0); }
    static Dual make(T value) {
        Dual r;
        r.v = value;
        return r;
    }
};

template <class T> struct IsDual : std::false_type {};
template <class T, int N> struct IsDual<Dual<T, N>> : std::true_type {};

template <class T, int N>
Dual<T, N> operator+(const Dual<T, N>& a, const Dual<T, N>& b) {
    Dual<T, N> r = Dual<T, N>::make(a.v + b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}
template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a, const Dual<T, N>& b) {
    Dual<T, N> r = Dual<T, N>::make(a.v - b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}
template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r = Dual<T, N>::make(-a.v);
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}
template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, const Dual<T, N>& b) {
    Dual<T, N> r = Dual<T, N>::make(a.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
}
template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b) {
    const T inv = T(1.0) / b.v;
    Dual<T, N> r = Dual<T, N>::make(a.v * inv);
    for (int i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
}

// Mixed arithmetic with plain doubles.
template <class T, int N> Dual<T, N> operator+(const Dual<T, N>& a, double b) { return a + Dual<T, N>(b); }
template <class T, int N> Dual<T, N> operator+(double a, const Dual<T, N>& b) { return Dual<T, N>(a) + b; }
template <class T, int N> Dual<T, N> operator-(const Dual<T, N>& a, double b) { return a - Dual<T, N>(b); }
template <class T, int N> Dual<T, N> operator-(double a, const Dual<T, N>& b) { return Dual<T, N>(a) - b; }
template <class T, int N>
Dual<T, N> operator*(const Dual<T, N>& a, double b) {
    Dual<T, N> r = Dual<T, N>::make(a.v * b);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * b;
    return r;
}
template <class T, int N> Dual<T, N> operator*(double a, const Dual<T, N>& b) { return b * a; }
template <class T, int N> Dual<T, N> operator/(const Dual<T, N>& a, double b) { return a * (1.0 / b); }
template <class T, int N> Dual<T, N> operator/(double a, const Dual<T, N>& b) { return Dual<T, N>(a) / b; }

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
    using std::sqrt;
    const T s = sqrt(a.v);
    const T h = T(0.5) / s;
    Dual<T, N> r = Dual<T, N>::make(s);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * h;
    return r;
}
template <class T, int N>
Dual<T, N> exp(const Dual<T, N>& a) {
    using std::exp;
    const T e = exp(a.v);
    Dual<T, N> r = Dual<T, N>::make(e);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * e;
    return r;
}
template <class T, int N>
Dual<T, N> log(const Dual<T, N>& a) {
    using std::log;
    Dual<T, N> r = Dual<T, N>::make(log(a.v));
    const T inv = T(1.0) / a.v;
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * inv;
    return r;
}
template <class T, int N>
Dual<T, N> sin(const Dual<T, N>& a) {
    using std::cos;
    using std::sin;
    Dual<T, N> r = Dual<T, N>::make(sin(a.v));
    const T c = cos(a.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * c;
    return r;
}
template <class T, int N>
Dual<T, N> cos(const Dual<T, N>& a) {
    using std::cos;
    using std::sin;
    Dual<T, N> r = Dual<T, N>::make(cos(a.v));
    const T s = -sin(a.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.d[i] * s;
    return r;
}
template <class T, int N>
Dual<T, N> atan2(const Dual<T, N>& y, const Dual<T, N>& x) {
    using std::atan2;
    Dual<T, N> r = Dual<T, N>::make(atan2(y.v, x.v));
    const T inv = T(1.0) / (x.v * x.v + y.v * y.v);
    for (int i = 0; i < N; ++i) r.d[i] = (x.v * y.d[i] - y.v * x.d[i]) * inv;
    return r;
}

inline double value(double x) { return x; }
template <class T, int N> double value(const Dual<T, N>& x) { return value(x.v); }

} // namespace satorb::detail
