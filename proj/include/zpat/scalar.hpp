#pragma once

// Scalar arithmetic over the rationals, reals, complex numbers and
// quaternions.  Each scalar system is a plain value type; generic code is
// written against field_traits<T>.  The runtime-tagged Scalar wraps the four
// types for I/O and for APIs where the field is chosen at run time.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace zpat {

/// The four scalar systems, ordered by inclusion Q < R < C < H.
enum class FieldTag : std::uint8_t { Rat = 0, Real = 1, Complex = 2, Quat = 3 };

inline std::string_view to_string(FieldTag tag) {
    switch (tag) {
    case FieldTag::Rat: return "RAT";
    case FieldTag::Real: return "REAL";
    case FieldTag::Complex: return "COMPLEX";
    case FieldTag::Quat: return "QUAT";
    }
    return "?";
}

inline FieldTag field_from_string(std::string_view s) {
    if (s == "RAT" || s == "Q") return FieldTag::Rat;
    if (s == "REAL" || s == "R") return FieldTag::Real;
    if (s == "COMPLEX" || s == "C") return FieldTag::Complex;
    if (s == "QUAT" || s == "H") return FieldTag::Quat;
    throw std::invalid_argument("unknown field tag: " + std::string(s));
}

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

/// Explicit lossy cast.  Numerator and denominator are divided in a 100-digit
/// binary float and the quotient is rounded to the nearest double.
inline double to_double(const Rational& q) {
    using Wide = boost::multiprecision::cpp_bin_float_100;
    Wide num(boost::multiprecision::numerator(q));
    Wide den(boost::multiprecision::denominator(q));
    return static_cast<double>(Wide(num / den));
}

/// a + b i + c j + d k, stored as four reals.
struct Quaternion {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double re) : a(re) {}  // NOLINT: reals embed in H
    constexpr Quaternion(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    static constexpr Quaternion i() { return {0, 1, 0, 0}; }
    static constexpr Quaternion j() { return {0, 0, 1, 0}; }
    static constexpr Quaternion k() { return {0, 0, 0, 1}; }

    constexpr Quaternion operator-() const { return {-a, -b, -c, -d}; }
    constexpr Quaternion& operator+=(const Quaternion& o) {
        a += o.a; b += o.b; c += o.c; d += o.d;
        return *this;
    }
    constexpr Quaternion& operator-=(const Quaternion& o) {
        a -= o.a; b -= o.b; c -= o.c; d -= o.d;
        return *this;
    }
    constexpr Quaternion& operator*=(double s) {
        a *= s; b *= s; c *= s; d *= s;
        return *this;
    }
    constexpr Quaternion& operator/=(double s) {
        a /= s; b /= s; c /= s; d /= s;
        return *this;
    }

    friend constexpr Quaternion operator+(Quaternion x, const Quaternion& y) { return x += y; }
    friend constexpr Quaternion operator-(Quaternion x, const Quaternion& y) { return x -= y; }
    friend constexpr Quaternion operator*(Quaternion x, double s) { return x *= s; }
    friend constexpr Quaternion operator*(double s, Quaternion x) { return x *= s; }
    friend constexpr Quaternion operator/(Quaternion x, double s) { return x /= s; }

    // Hamilton product; i^2 = j^2 = k^2 = ijk = -1.
    friend constexpr Quaternion operator*(const Quaternion& x, const Quaternion& y) {
        return {x.a * y.a - x.b * y.b - x.c * y.c - x.d * y.d,
                x.a * y.b + x.b * y.a + x.c * y.d - x.d * y.c,
                x.a * y.c - x.b * y.d + x.c * y.a + x.d * y.b,
                x.a * y.d + x.b * y.c - x.c * y.b + x.d * y.a};
    }

    friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
        return os << '(' << q.a << ", " << q.b << ", " << q.c << ", " << q.d << ')';
    }
};

constexpr Quaternion conj(const Quaternion& q) { return {q.a, -q.b, -q.c, -q.d}; }
constexpr double norm2(const Quaternion& q) { return q.a * q.a + q.b * q.b + q.c * q.c + q.d * q.d; }
inline double abs(const Quaternion& q) { return std::sqrt(norm2(q)); }
constexpr Quaternion inverse(const Quaternion& q) { return conj(q) / norm2(q); }

// ---------------------------------------------------------------------------
// field_traits

template <class T>
struct field_traits;

template <>
struct field_traits<Rational> {
    static constexpr FieldTag tag = FieldTag::Rat;
    static constexpr bool exact = true;
    static Rational conj(const Rational& x) { return x; }
    static Rational abs2(const Rational& x) { return x * x; }
    static Rational magnitude(const Rational& x) { return x < 0 ? Rational(-x) : x; }
    static Rational inverse(const Rational& x) { return Rational(1) / x; }
    static bool is_zero(const Rational& x) { return x == 0; }
};

template <>
struct field_traits<double> {
    static constexpr FieldTag tag = FieldTag::Real;
    static constexpr bool exact = false;
    static constexpr int real_dim = 1;
    static double conj(double x) { return x; }
    static double abs2(double x) { return x * x; }
    static double magnitude(double x) { return std::abs(x); }
    static double inverse(double x) { return 1.0 / x; }
    static double component(double x, int) { return x; }
    static void set_component(double& x, int, double v) { x = v; }
    static double basis(int) { return 1.0; }
};

template <>
struct field_traits<Complex> {
    static constexpr FieldTag tag = FieldTag::Complex;
    static constexpr bool exact = false;
    static constexpr int real_dim = 2;
    static Complex conj(const Complex& x) { return std::conj(x); }
    static double abs2(const Complex& x) { return std::norm(x); }
    static double magnitude(const Complex& x) { return std::abs(x); }
    static Complex inverse(const Complex& x) { return 1.0 / x; }
    static double component(const Complex& x, int k) { return k == 0 ? x.real() : x.imag(); }
    static void set_component(Complex& x, int k, double v) {
        if (k == 0) x.real(v); else x.imag(v);
    }
    static Complex basis(int k) { return k == 0 ? Complex(1, 0) : Complex(0, 1); }
};

template <>
struct field_traits<Quaternion> {
    static constexpr FieldTag tag = FieldTag::Quat;
    static constexpr bool exact = false;
    static constexpr int real_dim = 4;
    static Quaternion conj(const Quaternion& x) { return zpat::conj(x); }
    static double abs2(const Quaternion& x) { return norm2(x); }
    static double magnitude(const Quaternion& x) { return zpat::abs(x); }
    static Quaternion inverse(const Quaternion& x) { return zpat::inverse(x); }
    static double component(const Quaternion& x, int k) {
        switch (k) {
        case 0: return x.a;
        case 1: return x.b;
        case 2: return x.c;
        default: return x.d;
        }
    }
    static void set_component(Quaternion& x, int k, double v) {
        switch (k) {
        case 0: x.a = v; break;
        case 1: x.b = v; break;
        case 2: x.c = v; break;
        default: x.d = v; break;
        }
    }
    static Quaternion basis(int k) {
        Quaternion q;
        set_component(q, k, 1.0);
        return q;
    }
};

template <class T>
concept FloatingField = !field_traits<T>::exact;

template <class T>
auto conj_of(const T& x) { return field_traits<T>::conj(x); }
template <class T>
auto abs2_of(const T& x) { return field_traits<T>::abs2(x); }
template <class T>
auto magnitude_of(const T& x) { return field_traits<T>::magnitude(x); }

/// Real part as a double (exact types are cast).
inline double real_part(const Rational& x) { return to_double(x); }
inline double real_part(double x) { return x; }
inline double real_part(const Complex& x) { return x.real(); }
inline double real_part(const Quaternion& x) { return x.a; }

/// Largest imaginary component in magnitude; zero for Q and R.
inline double imag_magnitude(const Rational&) { return 0.0; }
inline double imag_magnitude(double) { return 0.0; }
inline double imag_magnitude(const Complex& x) { return std::abs(x.imag()); }
inline double imag_magnitude(const Quaternion& x) {
    return std::sqrt(x.b * x.b + x.c * x.c + x.d * x.d);
}

/// Embedding of a real (or rational, lossily) into a floating field.
template <FloatingField T>
T from_real(double x) { return T(x); }

/// sum_i conj(u_i) v_i, conjugating the left argument and keeping factor order.
template <class T>
T inner_product(std::span<const T> u, std::span<const T> v) {
    if (u.size() != v.size()) throw std::invalid_argument("inner_product: length mismatch");
    T acc{};
    for (std::size_t i = 0; i < u.size(); ++i) acc += conj_of(u[i]) * v[i];
    return acc;
}

// ---------------------------------------------------------------------------
// Runtime-tagged scalar

class Scalar {
  public:
    using Value = std::variant<Rational, double, Complex, Quaternion>;

    Scalar() : value_(Rational(0)) {}
    Scalar(Rational q) : value_(std::move(q)) {}  // NOLINT
    Scalar(double x) : value_(x) {}               // NOLINT
    Scalar(Complex z) : value_(z) {}              // NOLINT
    Scalar(Quaternion q) : value_(q) {}           // NOLINT

    FieldTag tag() const { return static_cast<FieldTag>(value_.index()); }
    const Value& value() const { return value_; }

    template <class T>
    const T& as() const {
        if (!std::holds_alternative<T>(value_))
            throw std::invalid_argument("scalar has tag " + std::string(to_string(tag())));
        return std::get<T>(value_);
    }

    friend bool operator==(const Scalar& x, const Scalar& y) { return x.value_ == y.value_; }

  private:
    Value value_;
};

namespace detail {
inline void require_same_tag(const Scalar& a, const Scalar& b, const char* op) {
    if (a.tag() != b.tag())
        throw std::invalid_argument(std::string(op) + ": tag mismatch (" + std::string(to_string(a.tag())) +
                                    " vs " + std::string(to_string(b.tag())) + ")");
}
}  // namespace detail

inline Scalar multiply(const Scalar& a, const Scalar& b) {
    detail::require_same_tag(a, b, "multiply");
    return std::visit(
        [&](const auto& x) -> Scalar {
            using T = std::decay_t<decltype(x)>;
            return Scalar(T(x * b.as<T>()));
        },
        a.value());
}

inline Scalar add(const Scalar& a, const Scalar& b) {
    detail::require_same_tag(a, b, "add");
    return std::visit(
        [&](const auto& x) -> Scalar {
            using T = std::decay_t<decltype(x)>;
            return Scalar(T(x + b.as<T>()));
        },
        a.value());
}

inline Scalar subtract(const Scalar& a, const Scalar& b) {
    detail::require_same_tag(a, b, "subtract");
    return std::visit(
        [&](const auto& x) -> Scalar {
            using T = std::decay_t<decltype(x)>;
            return Scalar(T(x - b.as<T>()));
        },
        a.value());
}

inline Scalar conjugate(const Scalar& a) {
    return std::visit([](const auto& x) -> Scalar { return Scalar(conj_of(x)); }, a.value());
}

/// |a|: exact (tag RAT) for rationals, tag REAL otherwise.
inline Scalar magnitude(const Scalar& a) {
    return std::visit([](const auto& x) -> Scalar { return Scalar(magnitude_of(x)); }, a.value());
}

inline Scalar inner_product(std::span<const Scalar> u, std::span<const Scalar> v) {
    if (u.size() != v.size()) throw std::invalid_argument("inner_product: length mismatch");
    if (u.empty()) return Scalar();
    Scalar acc = multiply(conjugate(u[0]), v[0]);
    for (std::size_t i = 1; i < u.size(); ++i) acc = add(acc, multiply(conjugate(u[i]), v[i]));
    return acc;
}

/// Value of `s` in the floating field T.  Lower fields embed (RAT lossily);
/// a higher field is an error.
template <FloatingField T>
T scalar_as(const Scalar& s) {
    return std::visit(
        [&](const auto& x) -> T {
            using S = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<S, T>) {
                return x;
            } else if constexpr (std::is_same_v<S, Rational>) {
                return T(to_double(x));
            } else if constexpr (std::is_same_v<S, double>) {
                return T(x);
            } else if constexpr (std::is_same_v<S, Complex> && std::is_same_v<T, Quaternion>) {
                return Quaternion(x.real(), x.imag(), 0.0, 0.0);
            } else {
                throw std::invalid_argument("scalar of tag " + std::string(to_string(s.tag())) +
                                            " does not embed in " + std::string(to_string(field_traits<T>::tag)));
            }
        },
        s.value());
}

template <class T>
struct type_tag {
    using type = T;
};

/// Runs f(type_tag<T>{}) for the floating type T matching `tag`.
template <class F>
decltype(auto) visit_floating_field(FieldTag tag, F&& f) {
    switch (tag) {
    case FieldTag::Real: return f(type_tag<double>{});
    case FieldTag::Complex: return f(type_tag<Complex>{});
    case FieldTag::Quat: return f(type_tag<Quaternion>{});
    default: break;
    }
    throw std::invalid_argument("field must be REAL, COMPLEX or QUAT");
}

}  // namespace zpat
