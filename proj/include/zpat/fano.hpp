#pragma once

// The rigid 7x7 core and its quadratic-residue generalization.
//
// For a prime p = 4k - 1 the p x p matrix with (1 - k)/k on the diagonal and
// 1/k where (i - j) mod p is a nonzero quadratic residue is rational
// orthogonal.  For p = 7 this is M/2, where
//
//       -1  0  0  1  0  1  1
//        1 -1  0  0  1  0  1
//        1  1 -1  0  0  1  0
//   M =  0  1  1 -1  0  0  1
//        1  0  1  1 -1  0  0
//        0  1  0  1  1 -1  0
//        0  0  1  0  1  1 -1
//
// and every orthogonal representation A of its pattern F, over any of the
// four scalar systems, satisfies UAD = M for diagonal U (unit entries) and D.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "zpat/json_io.hpp"
#include "zpat/matrix.hpp"
#include "zpat/parallel.hpp"
#include "zpat/pattern.hpp"
#include "zpat/scalar.hpp"
#include "zpat/solver.hpp"

namespace zpat {

inline constexpr long kDefaultMaxPrime = 43;

inline bool is_prime(long n) {
    if (n < 2) return false;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline void validate_fano_prime(long p, long max_prime = kDefaultMaxPrime) {
    if (!is_prime(p) || p % 4 != 3)
        throw std::invalid_argument("p must be a prime congruent to 3 mod 4, got " + std::to_string(p));
    if (p > max_prime)
        throw std::invalid_argument("p = " + std::to_string(p) + " exceeds the cap " + std::to_string(max_prime));
}

/// residue[r] is true iff r is a nonzero square mod p.
inline std::vector<bool> quadratic_residues(long p) {
    std::vector<bool> residue(static_cast<std::size_t>(p), false);
    for (long x = 1; x < p; ++x) residue[static_cast<std::size_t>((x * x) % p)] = true;
    return residue;
}

inline long mod(long a, long p) { return ((a % p) + p) % p; }

inline Matrix<Rational> fano_matrix(long p, long max_prime = kDefaultMaxPrime) {
    validate_fano_prime(p, max_prime);
    const long k = (p + 1) / 4;
    const auto qr = quadratic_residues(p);
    const auto n = static_cast<std::size_t>(p);
    Matrix<Rational> m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j)
                m(i, j) = Rational(1 - k, k);
            else if (qr[static_cast<std::size_t>(mod(static_cast<long>(i) - static_cast<long>(j), p))])
                m(i, j) = Rational(1, k);
        }
    return m;
}

/// Zero-pattern of fano_matrix(p).  For p >= 7 the diagonal is STAR; for p = 3
/// the diagonal entry (1 - k)/k vanishes and the pattern is a cyclic permutation.
inline ZeroPattern fano_pattern(long p, long max_prime = kDefaultMaxPrime) {
    return pattern_of(fano_matrix(p, max_prime));
}

/// The integer matrix M = 2 * fano_matrix(7), entered as displayed.
inline Matrix<Rational> fano_m() {
    static constexpr int kM[7][7] = {{-1, 0, 0, 1, 0, 1, 1}, {1, -1, 0, 0, 1, 0, 1}, {1, 1, -1, 0, 0, 1, 0},
                                     {0, 1, 1, -1, 0, 0, 1}, {1, 0, 1, 1, -1, 0, 0}, {0, 1, 0, 1, 1, -1, 0},
                                     {0, 0, 1, 0, 1, 1, -1}};
    Matrix<Rational> m(7, 7);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) m(i, j) = kM[i][j];
    return m;
}

/// Entry of fano_matrix(p) used to pin column i during normalization, and
/// its row: the diagonal when it is nonzero, else the subdiagonal (i+1, i).
struct ColumnPivot {
    std::size_t row;
    Rational value;
};

inline ColumnPivot column_pivot(long p, std::size_t i) {
    const long k = (p + 1) / 4;
    if (k > 1) return {i, Rational(1 - k, k)};
    return {static_cast<std::size_t>(mod(static_cast<long>(i) + 1, p)), Rational(1, k)};
}

// ---------------------------------------------------------------------------
// normalization UAD

template <class T>
struct NormalizationTrace {
    std::vector<T> d_factors;  // (i,i) entries of D_0 ... D_{p-1}
    std::vector<T> u_factors;  // (i,i) entries of U_1 ... U_{p-1}
    Matrix<T> b_final;
    // p = 7 entry names of B: x_i = B(i+1, i), y_i = B(i+2, i), z_i = B(i+4, i),
    // X_i = 1 / conj(x_i).  Empty for other p.
    std::vector<T> x, y, z, x_inv;
};

/// The recursion A_0 = A; D_i pins column i's pivot to `pivot_target(i)`;
/// U_i makes entry (i, i-1) real and positive.  B = U A D.
template <class T, class Target>
NormalizationTrace<T> normalize_phases(const Matrix<T>& a, long p, Target&& pivot_target) {
    const auto n = static_cast<std::size_t>(p);
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("normalize: matrix must be p x p");
    NormalizationTrace<T> trace;
    Matrix<T> cur = a;
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 1) {
            const T b = cur(i, i - 1);
            if (b == T(0)) throw std::invalid_argument("normalize: zero at required STAR (row pivot)");
            const T u = T(conj_of(b) / magnitude_of(b));
            for (std::size_t c = 0; c < n; ++c) cur(i, c) = T(u * cur(i, c));
            trace.u_factors.push_back(u);
        }
        const ColumnPivot pivot = column_pivot(p, i);
        const T current = cur(pivot.row, i);
        if (current == T(0)) throw std::invalid_argument("normalize: zero at required STAR (column pivot)");
        const T d = T(field_traits<T>::inverse(current) * pivot_target(pivot));
        for (std::size_t r = 0; r < n; ++r) cur(r, i) = T(cur(r, i) * d);
        trace.d_factors.push_back(d);
    }
    trace.b_final = std::move(cur);
    return trace;
}

namespace detail {
template <class T>
T target_value(const Rational& q) {
    if constexpr (field_traits<T>::exact) return q;
    else return T(to_double(q));
}

template <class T>
void require_orthogonal_columns(const Matrix<T>& a, double tol) {
    const Matrix<T> g = gram(a);
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = i + 1; j < g.cols(); ++j) {
            if constexpr (field_traits<T>::exact) {
                if (g(i, j) != 0) throw std::invalid_argument("normalize: columns are not orthogonal");
            } else {
                const double denom = std::sqrt(real_part(g(i, i)) * real_part(g(j, j)));
                if (magnitude_of(g(i, j)) > tol * denom)
                    throw std::invalid_argument("normalize: columns are not orthogonal within tolerance");
            }
        }
}
}  // namespace detail

/// Reduces an orthogonal representation of F to canonical form; the result
/// B_final equals M (exactly for rational input).
template <class T>
NormalizationTrace<T> normalize_to_canonical(const Matrix<T>& a, double orth_tol = 1e-8) {
    if (a.rows() != 7 || a.cols() != 7) throw std::invalid_argument("normalize_to_canonical: need a 7 x 7 matrix");
    if (!matches_pattern(a, fano_pattern(7))) throw std::invalid_argument("normalize_to_canonical: pattern is not F");
    detail::require_orthogonal_columns(a, orth_tol);

    auto trace = normalize_phases(a, 7, [](const ColumnPivot&) { return detail::target_value<T>(Rational(-1)); });
    const Matrix<T>& b = trace.b_final;
    for (std::size_t i = 0; i < 7; ++i) {
        trace.x.push_back(b((i + 1) % 7, i));
        trace.y.push_back(b((i + 2) % 7, i));
        trace.z.push_back(b((i + 4) % 7, i));
        trace.x_inv.push_back(T(field_traits<T>::inverse(conj_of(trace.x.back()))));
    }
    return trace;
}

/// Largest defect in y_i = x_i X_{i+1} and z_i = x_i X_{i+1} X_{i+2} x_{i+3}.
template <FloatingField T>
double claim_relation_defect(const NormalizationTrace<T>& t) {
    double worst = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
        const T y = t.x[i] * t.x_inv[(i + 1) % 7];
        const T z = t.x[i] * t.x_inv[(i + 1) % 7] * t.x_inv[(i + 2) % 7] * t.x[(i + 3) % 7];
        worst = std::max({worst, magnitude_of(T(y - t.y[i])), magnitude_of(T(z - t.z[i]))});
    }
    return worst;
}

inline bool claim_relations_hold(const NormalizationTrace<Rational>& t) {
    for (std::size_t i = 0; i < 7; ++i) {
        const Rational y = t.x[i] * t.x_inv[(i + 1) % 7];
        const Rational z = t.x[i] * t.x_inv[(i + 1) % 7] * t.x_inv[(i + 2) % 7] * t.x[(i + 3) % 7];
        if (y != t.y[i] || z != t.z[i]) return false;
    }
    return true;
}

/// Coefficients of the log-linear system in ln x_0 ... ln x_6: row i encodes
/// X_i X_{i+1} X_{i+2} x_{i+3} X_{i+4} x_{i+5} x_{i+6} = 1 with ln X = -ln x.
inline Matrix<Rational> fano_log_system() {
    static constexpr int kRow[7] = {-1, -1, -1, 1, -1, 1, 1};
    Matrix<Rational> m(7, 7);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) m(i, (i + j) % 7) = kRow[j];
    return m;
}

/// Exact determinant by fraction-preserving Gaussian elimination.
inline Rational exact_determinant(Matrix<Rational> m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
    const std::size_t n = m.rows();
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        while (pivot < n && m(pivot, c) == 0) ++pivot;
        if (pivot == n) return 0;
        if (pivot != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(m(pivot, k), m(c, k));
            det = -det;
        }
        det *= m(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            if (m(r, c) == 0) continue;
            const Rational f = m(r, c) / m(c, c);
            for (std::size_t k = c; k < n; ++k) m(r, k) -= f * m(c, k);
        }
    }
    return det;
}

// ---------------------------------------------------------------------------
// rigidity probing

struct RigidityCluster {
    RepMatrix representative;
    std::size_t count = 0;
    double distance_to_fano = 0.0;
};

struct RigidityReport {
    long p = 0;
    FieldTag field = FieldTag::Complex;
    std::size_t restarts = 0;
    std::size_t found = 0;
    std::vector<RigidityCluster> clusters;
    std::string verdict;  // "rigid-so-far", "non-rigid" or "inconclusive"
};

struct RigidityOptions {
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    long max_prime = kDefaultMaxPrime;
    double cluster_tol = 1e-6;
    std::size_t max_iters = 5000;
};

/// Solves for representations of fano_pattern(p) from independent restarts,
/// normalizes each, and clusters the results.  Evidence, not proof.
inline RigidityReport rigidity_probe(long p, FieldTag field, std::size_t restarts, const RigidityOptions& opts = {}) {
    validate_fano_prime(p, opts.max_prime);
    return visit_floating_field(field, [&](auto tag) {
        using T = typename decltype(tag)::type;
        RigidityReport report;
        report.p = p;
        report.field = field;
        report.restarts = restarts;

        SolveOptions so;
        so.seed = opts.seed;
        so.unit_columns = true;
        so.max_iters = opts.max_iters;
        const RepresentationProblem<T> problem(fano_pattern(p, opts.max_prime), so);
        const auto outcomes = solve_restarts(problem, 0, restarts, opts.jobs);
        const Matrix<T> reference = cast_matrix<T>(fano_matrix(p, opts.max_prime));

        std::vector<Matrix<T>> reps;
        for (const auto& o : outcomes) {
            if (o.status != SolveStatus::Found) continue;
            ++report.found;
            const auto trace = normalize_phases(
                o.witness, p, [](const ColumnPivot& pv) { return T(to_double(pv.value)); });
            const Matrix<T>& b = trace.b_final;
            auto hit = std::find_if(reps.begin(), reps.end(), [&](const Matrix<T>& r) {
                return max_abs_difference(r, b) <= opts.cluster_tol;
            });
            if (hit == reps.end()) {
                reps.push_back(b);
                report.clusters.push_back({RepMatrix(b), 1, max_abs_difference(b, reference)});
            } else {
                ++report.clusters[static_cast<std::size_t>(hit - reps.begin())].count;
            }
        }
        if (report.found == 0)
            report.verdict = "inconclusive";
        else if (report.clusters.size() == 1 && report.clusters[0].distance_to_fano <= opts.cluster_tol)
            report.verdict = "rigid-so-far";
        else
            report.verdict = "non-rigid";
        return report;
    });
}

inline json rigidity_report_to_json(const RigidityReport& r) {
    json clusters = json::array();
    for (const auto& c : r.clusters)
        clusters.push_back({{"representative", matrix_to_json(c.representative)},
                            {"count", c.count},
                            {"distance_to_fano", c.distance_to_fano}});
    return json{{"p", r.p},
                {"field", std::string(to_string(r.field))},
                {"restarts", r.restarts},
                {"found", r.found},
                {"clusters", std::move(clusters)},
                {"verdict", r.verdict}};
}

}  // namespace zpat
