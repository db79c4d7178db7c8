#pragma once

// Zero-patterns, four-way democracies and the checks that tie a concrete
// matrix to a pattern.
//
// Text format, one line per row with '0' and '*', followed by democracy lines:
//
//     *0*
//     **0
//     D <col> <r1> <r2> <r3> <r4>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zpat/matrix.hpp"
#include "zpat/scalar.hpp"

namespace zpat {

inline constexpr double kDefaultZeroTol = 1e-7;
inline constexpr double kDefaultStarFloor = 1e-3;

class ZeroPattern {
  public:
    ZeroPattern() = default;
    ZeroPattern(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), star_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool star(std::size_t r, std::size_t c) const { return star_[r * cols_ + c] != 0; }
    void set(std::size_t r, std::size_t c, bool is_star = true) { star_[r * cols_ + c] = is_star ? 1 : 0; }

    std::vector<std::size_t> support(std::size_t c) const {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < rows_; ++r)
            if (star(r, c)) rows.push_back(r);
        return rows;
    }

    std::size_t star_count() const { return static_cast<std::size_t>(std::count(star_.begin(), star_.end(), 1)); }

    ZeroPattern transpose() const {
        ZeroPattern t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t.set(c, r, star(r, c));
        return t;
    }

    /// Copy with `extra_rows` zero rows and `extra_cols` zero columns appended.
    ZeroPattern padded(std::size_t extra_rows, std::size_t extra_cols) const {
        ZeroPattern out(rows_ + extra_rows, cols_ + extra_cols);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out.set(r, c, star(r, c));
        return out;
    }

    friend bool operator==(const ZeroPattern&, const ZeroPattern&) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint8_t> star_;
};

/// Four STAR entries of one column required to share a magnitude.
struct Democracy {
    std::size_t column = 0;
    std::array<std::size_t, 4> rows{};

    friend bool operator==(const Democracy&, const Democracy&) = default;
};

inline void validate_democracy(const ZeroPattern& p, const Democracy& d) {
    if (d.column >= p.cols()) throw std::invalid_argument("democracy column out of range");
    std::set<std::size_t> distinct(d.rows.begin(), d.rows.end());
    if (distinct.size() != 4) throw std::invalid_argument("democracy needs 4 distinct rows");
    for (std::size_t r : d.rows) {
        if (r >= p.rows()) throw std::invalid_argument("democracy row out of range");
        if (!p.star(r, d.column))
            throw std::invalid_argument("democracy names a ZERO entry at (" + std::to_string(r) + ", " +
                                        std::to_string(d.column) + ")");
    }
}

struct ConstrainedZeroPattern {
    ZeroPattern pattern;
    std::vector<Democracy> democracies;

    void validate() const {
        for (const auto& d : democracies) validate_democracy(pattern, d);
    }

    friend bool operator==(const ConstrainedZeroPattern&, const ConstrainedZeroPattern&) = default;
};

// ---------------------------------------------------------------------------
// text format

inline ConstrainedZeroPattern parse_pattern(std::string_view text) {
    std::vector<std::string> grid;
    std::vector<Democracy> democracies;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        throw std::invalid_argument("pattern line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == 'D') {
            std::istringstream fields(line.substr(1));
            long long col = -1;
            std::array<long long, 4> rows{};
            if (!(fields >> col >> rows[0] >> rows[1] >> rows[2] >> rows[3])) fail("democracy needs 5 indices");
            std::string rest;
            if (fields >> rest) fail("democracy needs exactly 4 rows");
            if (col < 0 || std::any_of(rows.begin(), rows.end(), [](long long r) { return r < 0; }))
                fail("negative index");
            Democracy d;
            d.column = static_cast<std::size_t>(col);
            for (int k = 0; k < 4; ++k) d.rows[k] = static_cast<std::size_t>(rows[k]);
            democracies.push_back(d);
            continue;
        }
        if (!democracies.empty()) fail("grid row after democracy lines");
        if (line.find_first_not_of("0*") != std::string::npos) fail("characters outside {0, *}");
        if (!grid.empty() && line.size() != grid.front().size()) fail("ragged row");
        grid.push_back(line);
    }
    if (grid.empty()) throw std::invalid_argument("pattern: empty grid");

    ConstrainedZeroPattern out{ZeroPattern(grid.size(), grid.front().size()), std::move(democracies)};
    for (std::size_t r = 0; r < grid.size(); ++r)
        for (std::size_t c = 0; c < grid[r].size(); ++c) out.pattern.set(r, c, grid[r][c] == '*');
    out.validate();
    return out;
}

inline std::string serialize_pattern(const ZeroPattern& p) {
    std::string s;
    s.reserve(p.rows() * (p.cols() + 1));
    for (std::size_t r = 0; r < p.rows(); ++r) {
        for (std::size_t c = 0; c < p.cols(); ++c) s += p.star(r, c) ? '*' : '0';
        s += '\n';
    }
    return s;
}

inline std::string serialize_pattern(const ConstrainedZeroPattern& cp) {
    std::string s = serialize_pattern(cp.pattern);
    for (const auto& d : cp.democracies) {
        s += "D " + std::to_string(d.column);
        for (std::size_t r : d.rows) s += ' ' + std::to_string(r);
        s += '\n';
    }
    return s;
}

// ---------------------------------------------------------------------------
// combinatorics

inline std::vector<std::size_t> mutual_support(const ZeroPattern& p, std::size_t a, std::size_t b) {
    if (a >= p.cols() || b >= p.cols()) throw std::invalid_argument("mutual_support: column out of range");
    if (a == b) throw std::invalid_argument("mutual_support: columns must differ");
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < p.rows(); ++r)
        if (p.star(r, a) && p.star(r, b)) rows.push_back(r);
    return rows;
}

/// [[0, P], [P^T, 0]] for square P.
inline ZeroPattern bipartite_double(const ZeroPattern& p) {
    if (p.rows() != p.cols()) throw std::invalid_argument("bipartite_double: pattern must be square");
    const std::size_t n = p.rows();
    ZeroPattern out(2 * n, 2 * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            out.set(r, n + c, p.star(r, c));
            out.set(n + c, r, p.star(r, c));
        }
    return out;
}

// ---------------------------------------------------------------------------
// matrix <-> pattern

namespace detail {
inline void check_tolerances(double zero_tol, double star_floor) {
    if (!(zero_tol >= 0.0 && zero_tol < star_floor))
        throw std::invalid_argument("need 0 <= zero_tol < star_floor");
}
}  // namespace detail

/// Saturated match: ZERO positions are (numerically) zero and STAR positions
/// are bounded away from zero.  Exact for rational matrices.
template <class T>
bool matches_pattern(const Matrix<T>& a, const ZeroPattern& p, double zero_tol = kDefaultZeroTol,
                     double star_floor = kDefaultStarFloor) {
    if (a.rows() != p.rows() || a.cols() != p.cols()) throw std::invalid_argument("matches_pattern: dimension mismatch");
    detail::check_tolerances(zero_tol, star_floor);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            if constexpr (field_traits<T>::exact) {
                if (p.star(r, c) == (a(r, c) == 0)) return false;
            } else {
                const double m = magnitude_of(a(r, c));
                if (p.star(r, c) ? m < star_floor : m > zero_tol) return false;
            }
        }
    return true;
}

inline bool matches_pattern(const RepMatrix& a, const ZeroPattern& p, double zero_tol = kDefaultZeroTol,
                            double star_floor = kDefaultStarFloor) {
    return std::visit([&](const auto& m) { return matches_pattern(m, p, zero_tol, star_floor); }, a);
}

/// Reads the zero-pattern off a matrix.  Throws if an entry falls in the gap
/// (zero_tol, star_floor).
template <class T>
ZeroPattern pattern_of(const Matrix<T>& a, double zero_tol = kDefaultZeroTol, double star_floor = kDefaultStarFloor) {
    detail::check_tolerances(zero_tol, star_floor);
    ZeroPattern p(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            if constexpr (field_traits<T>::exact) {
                p.set(r, c, a(r, c) != 0);
            } else {
                const double m = magnitude_of(a(r, c));
                if (m > zero_tol && m < star_floor)
                    throw std::runtime_error("pattern_of: entry (" + std::to_string(r) + ", " + std::to_string(c) +
                                             ") lies between zero_tol and star_floor");
                p.set(r, c, m >= star_floor);
            }
        }
    return p;
}

/// Largest pairwise magnitude difference among the democracy's entries.
template <FloatingField T>
double democracy_spread(const Matrix<T>& a, const Democracy& d) {
    double lo = magnitude_of(a(d.rows[0], d.column)), hi = lo;
    for (std::size_t r : d.rows) {
        const double m = magnitude_of(a(r, d.column));
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    return hi - lo;
}

template <class T>
bool democracy_satisfied(const Matrix<T>& a, const Democracy& d, double mag_tol = 1e-6) {
    if (d.column >= a.cols()) throw std::invalid_argument("democracy column out of range");
    for (std::size_t r : d.rows)
        if (r >= a.rows()) throw std::invalid_argument("democracy row out of range");
    if constexpr (field_traits<T>::exact) {
        const auto first = abs2_of(a(d.rows[0], d.column));
        return std::all_of(d.rows.begin(), d.rows.end(),
                           [&](std::size_t r) { return abs2_of(a(r, d.column)) == first; });
    } else {
        return democracy_spread(a, d) <= mag_tol;
    }
}

inline bool democracy_satisfied(const RepMatrix& a, const Democracy& d, double mag_tol = 1e-6) {
    return std::visit([&](const auto& m) { return democracy_satisfied(m, d, mag_tol); }, a);
}

/// [[0, U], [U^dagger, 0]]: Hermitian, squares to the identity when U is unitary.
template <class T>
Matrix<T> hermitian_double(const Matrix<T>& u, double tol = 1e-9) {
    if (u.rows() != u.cols()) throw std::invalid_argument("hermitian_double: matrix must be square");
    if constexpr (field_traits<T>::exact) {
        if (!is_exactly_identity(gram(u))) throw std::invalid_argument("hermitian_double: input is not orthogonal");
    } else {
        if (unitarity_residual(u) > tol) throw std::invalid_argument("hermitian_double: input is not unitary");
    }
    const std::size_t n = u.rows();
    Matrix<T> h(2 * n, 2 * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            h(r, n + c) = u(r, c);
            h(n + c, r) = conj_of(u(r, c));
        }
    return h;
}

inline RepMatrix hermitian_double(const RepMatrix& u, double tol = 1e-9) {
    return std::visit([&](const auto& m) -> RepMatrix { return hermitian_double(m, tol); }, u);
}

}  // namespace zpat
