#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "zpat/scalar.hpp"

namespace zpat {

/// Dense row-major matrix over one scalar system.
template <class T>
class Matrix {
  public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const T> data() const { return data_; }

    std::vector<T> column(std::size_t c) const {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    void set_column(std::size_t c, std::span<const T> v) {
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <class T>
Matrix<T> adjoint(const Matrix<T>& a) {
    Matrix<T> out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = conj_of(a(r, c));
    return out;
}

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: dimension mismatch");
    Matrix<T> out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T& aik = a(i, k);
            if constexpr (field_traits<T>::exact) {
                if (aik == 0) continue;
            }
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

/// Gram matrix A^dagger A: entry (i, j) = <col_i, col_j>.
template <class T>
Matrix<T> gram(const Matrix<T>& a) {
    Matrix<T> g(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j) {
            T acc(0);
            for (std::size_t r = 0; r < a.rows(); ++r) acc += conj_of(a(r, i)) * a(r, j);
            g(i, j) = acc;
            if (i != j) g(j, i) = conj_of(acc);
        }
    return g;
}

/// max_ij |A(i,j) - B(i,j)|
template <FloatingField T>
double max_abs_difference(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("dimension mismatch");
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, magnitude_of(T(a(r, c) - b(r, c))));
    return m;
}

/// max_ij |(A^dagger A - I)(i,j)|
template <FloatingField T>
double unitarity_residual(const Matrix<T>& a) {
    return max_abs_difference(gram(a), Matrix<T>::identity(a.cols()));
}

template <class T>
bool is_exactly_identity(const Matrix<T>& a) {
    return a == Matrix<T>::identity(a.rows()) && a.rows() == a.cols();
}

/// Lossy cast of a rational matrix into a floating field.
template <FloatingField T>
Matrix<T> cast_matrix(const Matrix<Rational>& q) {
    Matrix<T> out(q.rows(), q.cols());
    for (std::size_t r = 0; r < q.rows(); ++r)
        for (std::size_t c = 0; c < q.cols(); ++c) out(r, c) = T(to_double(q(r, c)));
    return out;
}

/// Embedding R -> C -> H of a floating matrix.
template <FloatingField To, FloatingField From>
Matrix<To> embed_matrix(const Matrix<From>& m) {
    Matrix<To> out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const From& x = m(r, c);
            if constexpr (std::is_same_v<To, From>) {
                out(r, c) = x;
            } else if constexpr (std::is_same_v<From, double>) {
                out(r, c) = To(x);
            } else if constexpr (std::is_same_v<From, Complex> && std::is_same_v<To, Quaternion>) {
                out(r, c) = Quaternion(x.real(), x.imag(), 0.0, 0.0);
            } else {
                static_assert(sizeof(To) == 0, "no embedding in this direction");
            }
        }
    return out;
}

/// Candidate representation over a run-time chosen scalar system.
using RepMatrix = std::variant<Matrix<Rational>, Matrix<double>, Matrix<Complex>, Matrix<Quaternion>>;

inline FieldTag tag_of(const RepMatrix& m) { return static_cast<FieldTag>(m.index()); }

inline std::size_t rows_of(const RepMatrix& m) {
    return std::visit([](const auto& x) { return x.rows(); }, m);
}
inline std::size_t cols_of(const RepMatrix& m) {
    return std::visit([](const auto& x) { return x.cols(); }, m);
}

inline Scalar entry_of(const RepMatrix& m, std::size_t r, std::size_t c) {
    return std::visit([&](const auto& x) { return Scalar(x(r, c)); }, m);
}

}  // namespace zpat
