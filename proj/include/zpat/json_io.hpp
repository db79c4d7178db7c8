#pragma once

// JSON encodings.  Scalars: RAT {"q": "p/q"}, REAL number, COMPLEX [re, im],
// QUAT [a, b, c, d].  Matrices: {"tag", "rows", "cols", "data"} with data in
// row-major order.

#include <string>

#include <json.hpp>

#include "zpat/matrix.hpp"
#include "zpat/pattern.hpp"
#include "zpat/scalar.hpp"

namespace zpat {

using json = nlohmann::ordered_json;

inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    try {
        Integer num(s.substr(0, slash));
        Integer den = slash == std::string::npos ? Integer(1) : Integer(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("malformed rational: " + s);
    }
}

inline std::string format_rational(const Rational& q) {
    return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

inline json scalar_to_json(const Rational& q) { return json{{"q", format_rational(q)}}; }
inline json scalar_to_json(double x) { return x; }
inline json scalar_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }
inline json scalar_to_json(const Quaternion& q) { return json::array({q.a, q.b, q.c, q.d}); }

inline json scalar_to_json(const Scalar& s) {
    return std::visit([](const auto& x) { return scalar_to_json(x); }, s.value());
}

template <class T>
T scalar_from_json(const json& j) {
    if constexpr (std::is_same_v<T, Rational>) {
        if (!j.is_object() || !j.contains("q") || !j["q"].is_string())
            throw std::invalid_argument("RAT scalar must be {\"q\": \"p/q\"}");
        return parse_rational(j["q"].get<std::string>());
    } else if constexpr (std::is_same_v<T, double>) {
        if (!j.is_number()) throw std::invalid_argument("REAL scalar must be a number");
        return j.get<double>();
    } else if constexpr (std::is_same_v<T, Complex>) {
        if (!j.is_array() || j.size() != 2) throw std::invalid_argument("COMPLEX scalar must be [re, im]");
        return {j[0].get<double>(), j[1].get<double>()};
    } else {
        if (!j.is_array() || j.size() != 4) throw std::invalid_argument("QUAT scalar must be [a, b, c, d]");
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    }
}

template <class T>
json matrix_to_json(const Matrix<T>& m) {
    json data = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) data.push_back(scalar_to_json(m(r, c)));
    return json{{"tag", std::string(to_string(field_traits<T>::tag))},
                {"rows", m.rows()},
                {"cols", m.cols()},
                {"data", std::move(data)}};
}

inline json matrix_to_json(const RepMatrix& m) {
    return std::visit([](const auto& x) { return matrix_to_json(x); }, m);
}

namespace detail {
template <class T>
Matrix<T> matrix_body_from_json(const json& j, std::size_t rows, std::size_t cols) {
    const json& data = j.at("data");
    if (!data.is_array() || data.size() != rows * cols)
        throw std::invalid_argument("matrix JSON: data length does not match rows*cols");
    Matrix<T> m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = scalar_from_json<T>(data[r * cols + c]);
    return m;
}
}  // namespace detail

inline RepMatrix matrix_from_json(const json& j) {
    try {
        const FieldTag tag = field_from_string(j.at("tag").get<std::string>());
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        switch (tag) {
        case FieldTag::Rat: return detail::matrix_body_from_json<Rational>(j, rows, cols);
        case FieldTag::Real: return detail::matrix_body_from_json<double>(j, rows, cols);
        case FieldTag::Complex: return detail::matrix_body_from_json<Complex>(j, rows, cols);
        case FieldTag::Quat: return detail::matrix_body_from_json<Quaternion>(j, rows, cols);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("matrix JSON: ") + e.what());
    }
    throw std::invalid_argument("matrix JSON: bad tag");
}

inline json democracy_to_json(const Democracy& d) {
    return json{{"column", d.column}, {"rows", json::array({d.rows[0], d.rows[1], d.rows[2], d.rows[3]})}};
}

}  // namespace zpat
