#pragma once

// Numerical search for orthogonal representations of a zero-pattern over
// R, C or H.
//
// ZERO positions are identically zero by parameterization, frozen entries are
// constants, and every free STAR entry contributes real_dim real parameters.
// The objective is the sum of squares of a residual vector:
//
//   * the components of <col_i, col_j> for i < j with overlapping support,
//   * <col_i, col_i> - 1 for every column with a free entry (unit_columns),
//   * max(0, 2 star_floor - |e|) for every free entry e,
//   * |e_1| - |e_2| for every pair inside a democracy,
//
// minimized by Levenberg-Marquardt from random starts.  EXHAUSTED is evidence
// of absence, never a proof.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "zpat/json_io.hpp"
#include "zpat/matrix.hpp"
#include "zpat/parallel.hpp"
#include "zpat/pattern.hpp"
#include "zpat/scalar.hpp"

namespace zpat {

struct FrozenEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    Scalar value;
};

struct SolveOptions {
    std::size_t restarts = 32;
    std::size_t max_iters = 5000;
    double residual_tol = 1e-9;
    double star_floor = kDefaultStarFloor;
    double democracy_tol = 1e-6;
    std::uint64_t seed = 0;
    std::vector<Democracy> democracies;
    std::vector<FrozenEntry> frozen;
    bool unit_columns = true;
    // Return the lowest-index FOUND restart instead of running every restart.
    bool stop_on_found = true;
    std::size_t jobs = 0;
};

enum class SolveStatus { Found, Exhausted };

inline std::string_view to_string(SolveStatus s) { return s == SolveStatus::Found ? "FOUND" : "EXHAUSTED"; }

/// Above this best residual an EXHAUSTED report is flagged strongly infeasible.
inline constexpr double kStronglyInfeasible = 1e-3;

inline constexpr std::string_view kRngDescription = "mt19937_64, per-restart seed splitmix64(seed, restart)";

template <FloatingField T>
struct RestartOutcome {
    std::size_t restart = 0;
    SolveStatus status = SolveStatus::Exhausted;
    double residual = std::numeric_limits<double>::infinity();
    double min_star = 0.0;
    std::size_t iterations = 0;
    Matrix<T> witness;
};

struct SolveReport {
    SolveStatus status = SolveStatus::Exhausted;
    FieldTag field = FieldTag::Real;
    double best_residual = std::numeric_limits<double>::infinity();
    double min_star_magnitude = 0.0;
    std::size_t best_restart = 0;
    bool strongly_infeasible = false;
    std::optional<RepMatrix> witness;  // set when FOUND
    RepMatrix best_matrix;             // lowest-residual iterate, always set
    std::vector<double> restart_residuals;
    std::uint64_t seed = 0;
};

/// The least-squares problem for one pattern, field and option set.
template <FloatingField T>
class RepresentationProblem {
  public:
    static constexpr int kDim = field_traits<T>::real_dim;

    RepresentationProblem(ZeroPattern pattern, SolveOptions opts) : pattern_(std::move(pattern)), opts_(std::move(opts)) {
        if (!(opts_.residual_tol < opts_.star_floor)) throw std::invalid_argument("need residual_tol < star_floor");
        const std::size_t rows = pattern_.rows(), cols = pattern_.cols();
        base_ = Matrix<T>(rows, cols);
        std::vector<std::uint8_t> frozen(rows * cols, 0);
        for (const auto& f : opts_.frozen) {
            if (f.row >= rows || f.col >= cols) throw std::invalid_argument("frozen entry out of range");
            if (!pattern_.star(f.row, f.col))
                throw std::invalid_argument("frozen entry at ZERO position (" + std::to_string(f.row) + ", " +
                                            std::to_string(f.col) + ")");
            base_(f.row, f.col) = scalar_as<T>(f.value);
            frozen[f.row * cols + f.col] = 1;
        }
        for (const auto& d : opts_.democracies) validate_democracy(pattern_, d);

        param_of_.assign(rows * cols, -1);
        std::vector<std::uint8_t> column_has_free(cols, 0);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                if (pattern_.star(r, c) && !frozen[r * cols + c]) {
                    param_of_[r * cols + c] = static_cast<long>(free_.size() * kDim);
                    free_.emplace_back(r, c);
                    column_has_free[c] = 1;
                }
        for (std::size_t i = 0; i < cols; ++i)
            for (std::size_t j = i + 1; j < cols; ++j) {
                auto rows_ij = mutual_support(pattern_, i, j);
                if (!rows_ij.empty()) pairs_.push_back({i, j, std::move(rows_ij)});
            }
        if (opts_.unit_columns)
            for (std::size_t c = 0; c < cols; ++c)
                if (column_has_free[c]) unit_cols_.push_back(c);
        for (const auto& d : opts_.democracies)
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b) democracy_pairs_.push_back({d.column, d.rows[a], d.rows[b]});

        unit_offset_ = pairs_.size() * kDim;
        barrier_offset_ = unit_offset_ + unit_cols_.size();
        democracy_offset_ = barrier_offset_ + free_.size();
        residual_count_ = democracy_offset_ + democracy_pairs_.size();
    }

    const ZeroPattern& pattern() const { return pattern_; }
    const SolveOptions& options() const { return opts_; }
    std::size_t parameter_count() const { return free_.size() * kDim; }
    std::size_t residual_count() const { return residual_count_; }

    Matrix<T> assemble(const Eigen::VectorXd& theta) const {
        Matrix<T> a = base_;
        for (std::size_t f = 0; f < free_.size(); ++f) {
            T& e = a(free_[f].first, free_[f].second);
            for (int k = 0; k < kDim; ++k) field_traits<T>::set_component(e, k, theta[f * kDim + k]);
        }
        return a;
    }

    /// Free parameters of a full matrix (inverse of assemble on free entries).
    Eigen::VectorXd parameters_of(const Matrix<T>& a) const {
        Eigen::VectorXd theta(parameter_count());
        for (std::size_t f = 0; f < free_.size(); ++f)
            for (int k = 0; k < kDim; ++k)
                theta[f * kDim + k] = field_traits<T>::component(a(free_[f].first, free_[f].second), k);
        return theta;
    }

    /// Residual vector and, when `jac` is non-null, its sparse Jacobian.
    Eigen::VectorXd residuals(const Eigen::VectorXd& theta, Eigen::SparseMatrix<double>* jac = nullptr) const {
        const Matrix<T> a = assemble(theta);
        Eigen::VectorXd res = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(residual_count_));
        std::vector<Eigen::Triplet<double>> trip;
        const bool want_jac = jac != nullptr;
        const std::size_t cols = pattern_.cols();

        for (std::size_t p = 0; p < pairs_.size(); ++p) {
            const auto& [i, j, rows] = pairs_[p];
            T g(0);
            for (std::size_t r : rows) g += conj_of(a(r, i)) * a(r, j);
            const std::size_t off = p * kDim;
            for (int k = 0; k < kDim; ++k) res[off + k] = field_traits<T>::component(g, k);
            if (!want_jac) continue;
            for (std::size_t r : rows) {
                const long pi = param_of_[r * cols + i];
                const long pj = param_of_[r * cols + j];
                for (int l = 0; l < kDim; ++l) {
                    const T e = field_traits<T>::basis(l);
                    if (pi >= 0) {
                        const T d = conj_of(e) * a(r, j);
                        for (int k = 0; k < kDim; ++k)
                            trip.emplace_back(off + k, pi + l, field_traits<T>::component(d, k));
                    }
                    if (pj >= 0) {
                        const T d = conj_of(a(r, i)) * e;
                        for (int k = 0; k < kDim; ++k)
                            trip.emplace_back(off + k, pj + l, field_traits<T>::component(d, k));
                    }
                }
            }
        }

        for (std::size_t u = 0; u < unit_cols_.size(); ++u) {
            const std::size_t c = unit_cols_[u];
            double n2 = 0.0;
            for (std::size_t r = 0; r < pattern_.rows(); ++r) n2 += abs2_of(a(r, c));
            res[unit_offset_ + u] = n2 - 1.0;
            if (!want_jac) continue;
            for (std::size_t r = 0; r < pattern_.rows(); ++r) {
                const long pc = param_of_[r * cols + c];
                if (pc < 0) continue;
                for (int l = 0; l < kDim; ++l)
                    trip.emplace_back(unit_offset_ + u, pc + l, 2.0 * field_traits<T>::component(a(r, c), l));
            }
        }

        const double barrier = 2.0 * opts_.star_floor;
        for (std::size_t f = 0; f < free_.size(); ++f) {
            const T& e = a(free_[f].first, free_[f].second);
            const double m = magnitude_of(e);
            if (m >= barrier) continue;
            res[barrier_offset_ + f] = barrier - m;
            if (!want_jac || m == 0.0) continue;
            for (int l = 0; l < kDim; ++l)
                trip.emplace_back(barrier_offset_ + f, f * kDim + l, -field_traits<T>::component(e, l) / m);
        }

        for (std::size_t q = 0; q < democracy_pairs_.size(); ++q) {
            const auto& [c, r1, r2] = democracy_pairs_[q];
            const double m1 = magnitude_of(a(r1, c)), m2 = magnitude_of(a(r2, c));
            res[democracy_offset_ + q] = m1 - m2;
            if (!want_jac) continue;
            const long p1 = param_of_[r1 * cols + c], p2 = param_of_[r2 * cols + c];
            for (int l = 0; l < kDim; ++l) {
                if (p1 >= 0 && m1 > 0.0)
                    trip.emplace_back(democracy_offset_ + q, p1 + l, field_traits<T>::component(a(r1, c), l) / m1);
                if (p2 >= 0 && m2 > 0.0)
                    trip.emplace_back(democracy_offset_ + q, p2 + l, -field_traits<T>::component(a(r2, c), l) / m2);
            }
        }

        if (want_jac) {
            jac->resize(static_cast<Eigen::Index>(residual_count_), static_cast<Eigen::Index>(parameter_count()));
            jac->setFromTriplets(trip.begin(), trip.end());
        }
        return res;
    }

    double loss(const Eigen::VectorXd& theta) const { return residuals(theta).squaredNorm(); }

    Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
        Eigen::SparseMatrix<double> jac;
        const Eigen::VectorXd res = residuals(theta, &jac);
        return 2.0 * (jac.transpose() * res);
    }

    /// Scale-free residual: normalized Gram off-diagonals, unit-norm defects
    /// and relative democracy spread.
    double residual_metric(const Matrix<T>& a) const {
        std::vector<double> norms(pattern_.cols(), 0.0);
        for (std::size_t c = 0; c < pattern_.cols(); ++c) {
            for (std::size_t r = 0; r < pattern_.rows(); ++r) norms[c] += abs2_of(a(r, c));
            norms[c] = std::sqrt(norms[c]);
        }
        double worst = 0.0;
        for (const auto& [i, j, rows] : pairs_) {
            T g(0);
            for (std::size_t r : rows) g += conj_of(a(r, i)) * a(r, j);
            const double denom = norms[i] * norms[j];
            worst = std::max(worst, denom > 0.0 ? magnitude_of(g) / denom : std::numeric_limits<double>::infinity());
        }
        for (std::size_t c : unit_cols_) worst = std::max(worst, std::abs(norms[c] * norms[c] - 1.0));
        for (const auto& [c, r1, r2] : democracy_pairs_) {
            const double m1 = magnitude_of(a(r1, c)), m2 = magnitude_of(a(r2, c));
            const double hi = std::max(m1, m2);
            worst = std::max(worst, hi > 0.0 ? std::abs(m1 - m2) / hi : 0.0);
        }
        return worst;
    }

    double min_star_magnitude(const Matrix<T>& a) const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < pattern_.rows(); ++r)
            for (std::size_t c = 0; c < pattern_.cols(); ++c)
                if (pattern_.star(r, c)) m = std::min(m, magnitude_of(a(r, c)));
        return m;
    }

    bool democracies_ok(const Matrix<T>& a) const {
        return std::all_of(opts_.democracies.begin(), opts_.democracies.end(),
                           [&](const Democracy& d) { return democracy_spread(a, d) <= opts_.democracy_tol; });
    }

    bool accepts(const Matrix<T>& a, double metric) const {
        return metric <= opts_.residual_tol && min_star_magnitude(a) >= opts_.star_floor && democracies_ok(a);
    }

    /// Free entries uniform on the unit sphere of the field, scaled by 1/sqrt(rows).
    Eigen::VectorXd initial_point(std::size_t restart) const {
        std::mt19937_64 rng(stream_seed(opts_.seed, restart));
        auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
        auto gaussian = [&] {
            const double u1 = uniform(), u2 = uniform();
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
        };
        const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, pattern_.rows())));
        Eigen::VectorXd theta(parameter_count());
        for (std::size_t f = 0; f < free_.size(); ++f) {
            if constexpr (kDim == 1) {
                theta[f] = (rng() >> 63) ? scale : -scale;
            } else {
                double n2 = 0.0;
                for (int k = 0; k < kDim; ++k) {
                    theta[f * kDim + k] = gaussian();
                    n2 += theta[f * kDim + k] * theta[f * kDim + k];
                }
                const double inv = scale / std::sqrt(n2);
                for (int k = 0; k < kDim; ++k) theta[f * kDim + k] *= inv;
            }
        }
        return theta;
    }

    /// Levenberg-Marquardt from a given starting point.
    RestartOutcome<T> descend(Eigen::VectorXd theta, std::size_t restart) const {
        RestartOutcome<T> out;
        out.restart = restart;
        const auto n = static_cast<Eigen::Index>(parameter_count());

        Matrix<T> current = assemble(theta);
        double metric = residual_metric(current);
        auto finish = [&](std::size_t iters) {
            out.iterations = iters;
            out.residual = metric;
            out.witness = current;
            out.min_star = min_star_magnitude(current);
            out.status = accepts(current, metric) ? SolveStatus::Found : SolveStatus::Exhausted;
            return out;
        };
        if (n == 0) return finish(0);

        Eigen::SparseMatrix<double> jac;
        Eigen::VectorXd res = residuals(theta, &jac);
        double loss_now = res.squaredNorm();
        Eigen::SparseMatrix<double> eye(n, n);
        eye.setIdentity();

        Eigen::SparseMatrix<double> jt = jac.transpose();
        Eigen::SparseMatrix<double> normal = jt * jac;
        double lambda = 1e-3 * std::max(1e-12, normal.diagonal().maxCoeff());
        double nu = 2.0;
        double checkpoint_loss = loss_now;
        const double stop_metric = opts_.residual_tol * 1e-2;

        std::size_t it = 0;
        for (; it < opts_.max_iters; ++it) {
            if (metric <= stop_metric && min_star_magnitude(current) >= opts_.star_floor) break;
            if (loss_now < 1e-30) break;
            const Eigen::VectorXd g = jt * res;
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal + lambda * eye);
            if (ldlt.info() != Eigen::Success) {
                lambda *= nu;
                nu *= 2.0;
                continue;
            }
            const Eigen::VectorXd step = ldlt.solve(-g);
            const Eigen::VectorXd trial = theta + step;
            Eigen::SparseMatrix<double> trial_jac;
            const Eigen::VectorXd trial_res = residuals(trial, &trial_jac);
            const double trial_loss = trial_res.squaredNorm();
            const double predicted = step.dot(lambda * step - g);
            const double rho = predicted > 0.0 ? (loss_now - trial_loss) / predicted : -1.0;
            if (rho > 0.0) {
                theta = trial;
                res = trial_res;
                jac = std::move(trial_jac);
                jt = jac.transpose();
                normal = jt * jac;
                loss_now = trial_loss;
                current = assemble(theta);
                metric = residual_metric(current);
                lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                nu = 2.0;
            } else {
                lambda *= nu;
                nu *= 2.0;
            }
            if (lambda > 1e20) break;
            if (step.norm() <= 1e-15 * (theta.norm() + 1e-15) && rho > 0.0) break;
            if ((it + 1) % 200 == 0) {
                if (loss_now > 0.999 * checkpoint_loss) break;  // stalled
                checkpoint_loss = loss_now;
            }
        }
        return finish(it);
    }

    RestartOutcome<T> run_restart(std::size_t restart) const { return descend(initial_point(restart), restart); }

  private:
    struct Pair {
        std::size_t i, j;
        std::vector<std::size_t> rows;
    };
    struct DemocracyPair {
        std::size_t col, r1, r2;
    };

    ZeroPattern pattern_;
    SolveOptions opts_;
    Matrix<T> base_;
    std::vector<long> param_of_;
    std::vector<std::pair<std::size_t, std::size_t>> free_;
    std::vector<Pair> pairs_;
    std::vector<std::size_t> unit_cols_;
    std::vector<DemocracyPair> democracy_pairs_;
    std::size_t unit_offset_ = 0, barrier_offset_ = 0, democracy_offset_ = 0, residual_count_ = 0;
};

/// Runs restarts [0, count) and returns every outcome in index order.
template <FloatingField T>
std::vector<RestartOutcome<T>> solve_restarts(const RepresentationProblem<T>& problem, std::size_t first,
                                              std::size_t count, std::size_t jobs) {
    std::vector<RestartOutcome<T>> out(count);
    parallel_for(0, count, jobs, [&](std::size_t k) { out[k] = problem.run_restart(first + k); });
    return out;
}

template <FloatingField T>
SolveReport find_representation(const ZeroPattern& p, const SolveOptions& opts) {
    const RepresentationProblem<T> problem(p, opts);
    SolveReport report;
    report.field = field_traits<T>::tag;
    report.seed = opts.seed;
    const std::size_t batch = opts.stop_on_found ? resolve_jobs(opts.jobs) : std::max<std::size_t>(1, opts.restarts);

    // Strict '<' keeps the lower restart index on ties.
    std::optional<RestartOutcome<T>> best;
    std::optional<RestartOutcome<T>> found;
    bool stop = false;
    for (std::size_t first = 0; first < opts.restarts && !stop; first += batch) {
        const std::size_t count = std::min(batch, opts.restarts - first);
        for (auto& o : solve_restarts(problem, first, count, opts.jobs)) {
            report.restart_residuals.push_back(o.residual);
            if (!best || o.residual < best->residual) best = o;
            if (o.status == SolveStatus::Found && (!found || o.residual < found->residual)) found = o;
            if (found && opts.stop_on_found) {
                stop = true;  // truncate after the lowest-index FOUND
                break;
            }
        }
    }

    const RestartOutcome<T>& chosen = found ? *found : *best;
    report.status = found ? SolveStatus::Found : SolveStatus::Exhausted;
    report.best_residual = chosen.residual;
    report.best_restart = chosen.restart;
    report.min_star_magnitude = chosen.min_star;
    report.best_matrix = chosen.witness;
    if (found) report.witness = RepMatrix(chosen.witness);
    report.strongly_infeasible = !found && std::all_of(report.restart_residuals.begin(), report.restart_residuals.end(),
                                                       [](double r) { return r > kStronglyInfeasible; });
    return report;
}

inline SolveReport find_representation(const ZeroPattern& p, FieldTag field, const SolveOptions& opts) {
    if (opts.restarts == 0) throw std::invalid_argument("find_representation: restarts must be positive");
    return visit_floating_field(field, [&](auto tag) {
        using T = typename decltype(tag)::type;
        return find_representation<T>(p, opts);
    });
}

// ---------------------------------------------------------------------------
// completion to a square unitary

struct CompletionOptions {
    std::uint64_t seed = 0;
    double zero_tol = kDefaultZeroTol;
    double star_floor = kDefaultStarFloor;
    double input_tol = 1e-9;
    std::size_t max_retries = 20;
};

namespace detail {

template <FloatingField T>
double column_norm(const Matrix<T>& m, std::size_t c) {
    double n2 = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) n2 += abs2_of(m(r, c));
    return std::sqrt(n2);
}

/// v <- v - q <q, v> for every prior column q; two passes.
template <FloatingField T>
void orthogonalize_against(Matrix<T>& m, std::size_t c) {
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t q = 0; q < c; ++q) {
            T coeff(0);
            for (std::size_t r = 0; r < m.rows(); ++r) coeff += conj_of(m(r, q)) * m(r, c);
            for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) -= m(r, q) * coeff;
        }
}

/// Real Givens rotations among completion columns to move entries out of the
/// (zero_tol, star_floor) gap.  An entry below zero_tol is left alone when its
/// whole row is zero across the completion columns.  Returns true when no gap
/// entry remains.
template <FloatingField T>
bool repair_gap_entries(Matrix<T>& m, std::size_t first, double zero_tol, double star_floor) {
    const std::size_t n = m.rows();
    for (int sweep = 0; sweep < 50; ++sweep) {
        bool clean = true;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = first; c < m.cols(); ++c) {
                const double mag = magnitude_of(m(r, c));
                if (mag >= star_floor) continue;
                std::size_t partner = c;
                double best = 0.0;
                for (std::size_t k = first; k < m.cols(); ++k)
                    if (k != c && magnitude_of(m(r, k)) > best) {
                        best = magnitude_of(m(r, k));
                        partner = k;
                    }
                if (partner == c || best <= zero_tol) {
                    if (mag > zero_tol) return false;
                    continue;
                }
                clean = false;
                const double theta = 0.35, cs = std::cos(theta), sn = std::sin(theta);
                for (std::size_t i = 0; i < n; ++i) {
                    const T x = m(i, c), y = m(i, partner);
                    m(i, c) = x * cs + y * sn;
                    m(i, partner) = y * cs - x * sn;
                }
            }
        if (clean) return true;
    }
    return false;
}

}  // namespace detail

/// Extends r x c orthonormal columns to an r x r unitary.  The new columns are
/// random vectors orthonormalized against all prior columns, then rotated so
/// no completed entry is smaller than star_floor.  The first c columns are
/// never altered.
template <FloatingField T>
Matrix<T> complete_to_square(const Matrix<T>& a, const CompletionOptions& opts = {}) {
    const std::size_t n = a.rows(), c = a.cols();
    if (c > n) throw std::invalid_argument("complete_to_square: more columns than rows");
    if (unitarity_residual(a) > opts.input_tol)
        throw std::invalid_argument("complete_to_square: input columns are not orthonormal");
    if (c == n) return a;

    std::mt19937_64 rng(stream_seed(opts.seed, 0xC0C0));
    auto gaussian = [&] {
        const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    };
    auto random_scalar = [&] {
        T x(0);
        for (int k = 0; k < field_traits<T>::real_dim; ++k) field_traits<T>::set_component(x, k, gaussian());
        return x;
    };

    for (std::size_t attempt = 0; attempt <= opts.max_retries; ++attempt) {
        Matrix<T> u(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = 0; k < c; ++k) u(r, k) = a(r, k);
        for (std::size_t k = c; k < n; ++k) {
            std::size_t tries = 0;
            for (;;) {
                for (std::size_t r = 0; r < n; ++r) u(r, k) = random_scalar();
                detail::orthogonalize_against(u, k);
                const double norm = detail::column_norm(u, k);
                if (norm > 1e-6) {
                    for (std::size_t r = 0; r < n; ++r) u(r, k) = u(r, k) / norm;
                    break;
                }
                if (++tries > opts.max_retries) throw std::runtime_error("complete_to_square: rank deficiency");
            }
        }
        if (detail::repair_gap_entries(u, c, opts.zero_tol, opts.star_floor)) return u;
    }
    throw std::runtime_error("complete_to_square: could not keep completed entries out of the tolerance gap");
}

inline RepMatrix complete_to_square(const RepMatrix& a, const CompletionOptions& opts = {}) {
    return std::visit(
        [&](const auto& m) -> RepMatrix {
            using M = std::decay_t<decltype(m)>;
            using T = typename M::value_type;
            if constexpr (field_traits<T>::exact) {
                if (m.rows() == m.cols() && is_exactly_identity(gram(m))) return m;
                throw std::invalid_argument("complete_to_square: rational completion is not supported");
            } else {
                return complete_to_square(m, opts);
            }
        },
        a);
}

// ---------------------------------------------------------------------------
// verification

struct VerifyTolerances {
    double zero_tol = kDefaultZeroTol;
    double star_floor = kDefaultStarFloor;
    double orth_tol = 1e-9;
    double mag_tol = 1e-6;
};

struct WitnessVerdict {
    bool exact = false;
    bool pattern_ok = false;
    bool orthogonality_ok = false;
    bool democracies_ok = false;
    double orthogonality_residual = 0.0;  // max normalized |<c_i, c_j>|, i < j
    double democracy_spread = 0.0;
    bool passed() const { return pattern_ok && orthogonality_ok && democracies_ok; }
};

template <class T>
WitnessVerdict verify_witness(const Matrix<T>& a, const ZeroPattern& p, const std::vector<Democracy>& democracies,
                              const VerifyTolerances& tol = {}) {
    if (a.rows() != p.rows() || a.cols() != p.cols()) throw std::invalid_argument("verify_witness: dimension mismatch");
    WitnessVerdict v;
    v.exact = field_traits<T>::exact;
    v.pattern_ok = matches_pattern(a, p, tol.zero_tol, tol.star_floor);
    const Matrix<T> g = gram(a);
    if constexpr (field_traits<T>::exact) {
        v.orthogonality_ok = true;
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j)
                if (i != j && g(i, j) != 0) {
                    v.orthogonality_ok = false;
                    v.orthogonality_residual = std::max(v.orthogonality_residual, std::abs(to_double(g(i, j))));
                }
        v.democracies_ok = true;
        for (const auto& d : democracies) {
            validate_democracy(p, d);
            if (!democracy_satisfied(a, d)) v.democracies_ok = false;
        }
        v.democracy_spread = v.democracies_ok ? 0.0 : 1.0;
    } else {
        for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = i + 1; j < g.cols(); ++j) {
                const double denom = std::sqrt(real_part(g(i, i)) * real_part(g(j, j)));
                const double r = denom > 0.0 ? magnitude_of(g(i, j)) / denom : std::numeric_limits<double>::infinity();
                v.orthogonality_residual = std::max(v.orthogonality_residual, r);
            }
        v.orthogonality_ok = v.orthogonality_residual <= tol.orth_tol;
        for (const auto& d : democracies) {
            validate_democracy(p, d);
            v.democracy_spread = std::max(v.democracy_spread, democracy_spread(a, d));
        }
        v.democracies_ok = v.democracy_spread <= tol.mag_tol;
    }
    return v;
}

inline WitnessVerdict verify_witness(const RepMatrix& a, const ZeroPattern& p, const std::vector<Democracy>& democracies,
                                     const VerifyTolerances& tol = {}) {
    return std::visit([&](const auto& m) { return verify_witness(m, p, democracies, tol); }, a);
}

inline json solve_report_to_json(const SolveReport& r) {
    json j{{"status", std::string(to_string(r.status))},
           {"field", std::string(to_string(r.field))},
           {"best_residual", r.best_residual},
           {"min_star_magnitude", r.min_star_magnitude},
           {"best_restart", r.best_restart},
           {"strongly_infeasible", r.strongly_infeasible},
           {"seed", r.seed},
           {"rng", std::string(kRngDescription)},
           {"restart_residuals", r.restart_residuals}};
    j["witness"] = r.witness ? matrix_to_json(*r.witness) : json(nullptr);
    return j;
}

inline json verdict_to_json(const WitnessVerdict& v) {
    return json{{"passed", v.passed()},
                {"exact", v.exact},
                {"pattern_ok", v.pattern_ok},
                {"orthogonality_ok", v.orthogonality_ok},
                {"orthogonality_residual", v.orthogonality_residual},
                {"democracies_ok", v.democracies_ok},
                {"democracy_spread", v.democracy_spread}};
}

}  // namespace zpat
