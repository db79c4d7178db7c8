#pragma once

// Democracy gadget.  Each four-way democracy on column c0 is replaced by pure
// zero-pattern: three control rows, six control columns that together with c0
// and the democracy rows form a copy of F, and two-STAR fix-up rows that let
// every other column be orthogonal to the control columns.  Because F is
// rigid, any orthogonal representation of the output forces the four entries
// of c0 to share one magnitude.
//
// Rows are appended at the bottom and columns at the right, so the input is
// always the top-left submatrix of the output.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zpat/fano.hpp"
#include "zpat/json_io.hpp"
#include "zpat/matrix.hpp"
#include "zpat/parallel.hpp"
#include "zpat/pattern.hpp"
#include "zpat/scalar.hpp"
#include "zpat/solver.hpp"

namespace zpat {

enum class FixupMode { Safe, Minimal };

inline std::string_view to_string(FixupMode m) { return m == FixupMode::Safe ? "safe" : "minimal"; }

inline FixupMode fixup_mode_from_string(std::string_view s) {
    if (s == "safe" || s == "SAFE") return FixupMode::Safe;
    if (s == "minimal" || s == "MINIMAL") return FixupMode::Minimal;
    throw std::invalid_argument("unknown fix-up policy: " + std::string(s));
}

struct GadgetPolicy {
    FixupMode mode = FixupMode::Safe;
    // Constrained representation of the input.  MINIMAL certifies its row
    // counts against it; without one, the solver is asked for one first.
    std::optional<RepMatrix> reference;
    double certify_tol = 1e-9;
    std::size_t certify_restarts = 5;
    std::uint64_t seed = 0;
};

/// Democracy rows (ascending) play F rows 0, 1, 2, 4; control rows play 3, 5, 6.
inline constexpr std::array<std::size_t, 4> kDemocracyFRows = {0, 1, 2, 4};
inline constexpr std::array<std::size_t, 3> kControlFRows = {3, 5, 6};

struct FixupPair {
    std::size_t column_a = 0;  // column of the stage input, not c0
    std::size_t column_b = 0;  // control column
    std::vector<std::size_t> support;
    std::vector<std::size_t> rows;  // appended fix-up rows
};

struct GadgetStage {
    Democracy democracy;
    std::size_t input_rows = 0, input_cols = 0;
    std::array<std::size_t, 3> control_rows{};
    std::array<std::size_t, 6> control_cols{};
    std::array<std::size_t, 7> f_rows{};  // output row playing F row i
    std::array<std::size_t, 7> f_cols{};  // output column playing F column i
    std::vector<FixupPair> pairs;         // nonempty mutual supports only

    std::size_t fixup_rows() const {
        std::size_t n = 0;
        for (const auto& p : pairs) n += p.rows.size();
        return n;
    }
};

struct GadgetExpansion {
    ConstrainedZeroPattern input;
    ZeroPattern output;
    FixupMode mode = FixupMode::Safe;
    std::vector<GadgetStage> stages;
    // Input entry (r, c) sits at output (row_embedding[r], col_embedding[c]).
    std::vector<std::size_t> row_embedding, col_embedding;

    std::vector<Democracy> embedded_democracies() const {
        std::vector<Democracy> out;
        for (const auto& d : input.democracies) {
            Democracy e{col_embedding[d.column], {}};
            for (std::size_t k = 0; k < 4; ++k) e.rows[k] = row_embedding[d.rows[k]];
            out.push_back(e);
        }
        return out;
    }
};

namespace detail {

inline std::array<std::size_t, 4> sorted_rows(const Democracy& d) {
    auto rows = d.rows;
    std::sort(rows.begin(), rows.end());
    return rows;
}

/// Pattern of the stage after control rows and columns, before fix-ups.
inline ZeroPattern control_stage(const ZeroPattern& p, const Democracy& d, GadgetStage& stage) {
    const ZeroPattern f = fano_pattern(7);
    const std::size_t r0 = p.rows(), c0 = p.cols();
    ZeroPattern s = p.padded(3, 6);
    const auto rows = sorted_rows(d);
    stage.democracy = d;
    stage.input_rows = r0;
    stage.input_cols = c0;
    for (std::size_t u = 0; u < 3; ++u) stage.control_rows[u] = r0 + u;
    for (std::size_t t = 0; t < 6; ++t) stage.control_cols[t] = c0 + t;
    for (std::size_t k = 0; k < 4; ++k) stage.f_rows[kDemocracyFRows[k]] = rows[k];
    for (std::size_t u = 0; u < 3; ++u) stage.f_rows[kControlFRows[u]] = r0 + u;
    stage.f_cols[0] = d.column;
    for (std::size_t t = 1; t < 7; ++t) stage.f_cols[t] = c0 + t - 1;
    for (std::size_t fr = 0; fr < 7; ++fr)
        for (std::size_t t = 1; t < 7; ++t) s.set(stage.f_rows[fr], stage.f_cols[t], f.star(fr, t));
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// constructive completion of one stage

/// Values for the control entries and the fix-up rows, given a representation
/// `w` of the stage input whose democracy on c0 holds.  The F-block is
/// diag(phase) * m * M restricted to the control columns, where m is the
/// common democracy magnitude and phase_s = w(r_s, c0) / (m M(f_s, 0)).
template <FloatingField T>
Matrix<T> control_block(const Matrix<T>& w, const GadgetStage& stage) {
    const Matrix<Rational> mm = fano_m();
    const std::size_t c0 = stage.democracy.column;
    double m = 0.0;
    for (std::size_t k = 0; k < 4; ++k) m += magnitude_of(w(stage.f_rows[kDemocracyFRows[k]], c0)) / 4.0;
    Matrix<T> out(stage.input_rows + 3, stage.input_cols + 6);
    for (std::size_t r = 0; r < w.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c) out(r, c) = w(r, c);
    for (std::size_t fr = 0; fr < 7; ++fr) {
        const std::size_t row = stage.f_rows[fr];
        const bool democratic = row < stage.input_rows;
        for (std::size_t t = 1; t < 7; ++t) {
            const double mt = to_double(mm(fr, t));
            if (mt == 0.0) continue;
            if (democratic) out(row, stage.f_cols[t]) = T(w(row, c0) * (mt / to_double(mm(fr, 0))));
            else out(row, stage.f_cols[t]) = T(mt * m);
        }
    }
    return out;
}

/// <col a, col b> over the mutual support in the control stage.
template <FloatingField T>
T pair_residual(const Matrix<T>& s, const FixupPair& pair) {
    T acc(0);
    for (std::size_t r : pair.support) acc += conj_of(s(r, pair.column_a)) * s(r, pair.column_b);
    return acc;
}

template <FloatingField T>
double normalized_pair_residual(const Matrix<T>& s, const FixupPair& pair) {
    double na = 0.0, nb = 0.0;
    for (std::size_t r : pair.support) {
        na += abs2_of(s(r, pair.column_a));
        nb += abs2_of(s(r, pair.column_b));
    }
    return magnitude_of(pair_residual(s, pair)) / std::sqrt(na * nb);
}

/// Extends a representation of the stage input to one of the stage output.
/// Throws if a pair has too few fix-up rows for this particular input.
template <FloatingField T>
Matrix<T> complete_stage(const Matrix<T>& w, const GadgetStage& stage, std::size_t out_rows, double tol = 1e-9) {
    const Matrix<T> s = control_block(w, stage);
    Matrix<T> out(out_rows, s.cols());
    for (std::size_t r = 0; r < s.rows(); ++r)
        for (std::size_t c = 0; c < s.cols(); ++c) out(r, c) = s(r, c);
    double scale = 0.0;
    for (std::size_t k = 0; k < 4; ++k)
        scale += magnitude_of(w(stage.f_rows[kDemocracyFRows[k]], stage.democracy.column)) / 4.0;
    for (const auto& pair : stage.pairs) {
        const T res = pair_residual(s, pair);
        const double mag = magnitude_of(res);
        const std::size_t a = pair.column_a, b = pair.column_b;
        if (pair.rows.empty()) {
            if (normalized_pair_residual(s, pair) > tol)
                throw std::runtime_error("complete_stage: pair needs a fix-up row this witness does not have");
        } else if (pair.rows.size() == 1) {
            if (mag == 0.0) throw std::runtime_error("complete_stage: single fix-up row cannot cancel a zero residual");
            const double alpha = std::sqrt(mag);
            out(pair.rows[0], a) = T(alpha);
            out(pair.rows[0], b) = T(-res / alpha);
        } else {
            // conj(alpha) beta summed over both rows must equal -res.
            const double alpha = scale;
            T beta1 = T(scale);
            T beta2 = T((-res - T(alpha) * beta1) / alpha);
            if (magnitude_of(beta2) < 1e-3 * scale) {
                beta1 = T(2.0 * scale);
                beta2 = T((-res - T(alpha) * beta1) / alpha);
            }
            out(pair.rows[0], a) = T(alpha);
            out(pair.rows[0], b) = beta1;
            out(pair.rows[1], a) = T(alpha);
            out(pair.rows[1], b) = beta2;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// MINIMAL certification

namespace detail {

/// Local (|support| + k) x 2 subproblem: the support entries of the pair are
/// frozen at their reference values and the k fix-up rows are free.
template <FloatingField T>
bool local_completion_solves(const Matrix<T>& s, const FixupPair& pair, std::size_t k, const GadgetPolicy& policy) {
    const std::size_t n = pair.support.size();
    if (k == 0) return normalized_pair_residual(s, pair) <= policy.certify_tol;
    ZeroPattern local(n + k, 2);
    SolveOptions opts;
    opts.restarts = policy.certify_restarts;
    opts.residual_tol = policy.certify_tol;
    opts.unit_columns = false;
    opts.seed = stream_seed(policy.seed, pair.column_a * 7919 + pair.column_b);
    opts.jobs = 1;
    for (std::size_t i = 0; i < n + k; ++i) {
        local.set(i, 0);
        local.set(i, 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
        opts.frozen.push_back({i, 0, Scalar(s(pair.support[i], pair.column_a))});
        opts.frozen.push_back({i, 1, Scalar(s(pair.support[i], pair.column_b))});
    }
    return find_representation<T>(local, opts).status == SolveStatus::Found;
}

}  // namespace detail

namespace detail {

template <class T>
struct StageResult {
    GadgetStage stage;
    ZeroPattern pattern;
    std::optional<Matrix<T>> witness;
};

/// One stage.  With a witness, MINIMAL certifies each size-2 pair and the
/// witness is extended to the stage output.
template <FloatingField T>
StageResult<T> expand_stage(const ZeroPattern& p, const Democracy& d, const GadgetPolicy& policy,
                            const std::optional<Matrix<T>>& witness) {
    validate_democracy(p, d);
    StageResult<T> out;
    ZeroPattern s = control_stage(p, d, out.stage);
    std::optional<Matrix<T>> block;
    if (witness) block = control_block(*witness, out.stage);

    std::size_t next_row = s.rows();
    for (std::size_t a = 0; a < p.cols(); ++a) {
        if (a == d.column) continue;
        for (std::size_t b : out.stage.control_cols) {
            FixupPair pair{a, b, mutual_support(s, a, b), {}};
            if (pair.support.empty()) continue;
            std::size_t count = pair.support.size() == 1 ? 1 : 2;
            if (policy.mode == FixupMode::Minimal && pair.support.size() == 2) {
                if (!block) throw std::invalid_argument("MINIMAL policy needs a reference witness");
                if (local_completion_solves(*block, pair, 0, policy)) count = 0;
                else if (local_completion_solves(*block, pair, 1, policy)) count = 1;
            }
            for (std::size_t k = 0; k < count; ++k) pair.rows.push_back(next_row++);
            out.stage.pairs.push_back(std::move(pair));
        }
    }

    ZeroPattern result = s.padded(next_row - s.rows(), 0);
    for (const auto& pair : out.stage.pairs)
        for (std::size_t r : pair.rows) {
            result.set(r, pair.column_a);
            result.set(r, pair.column_b);
        }
    out.pattern = std::move(result);
    if (witness) out.witness = complete_stage(*witness, out.stage, out.pattern.rows(), policy.certify_tol);
    return out;
}

template <FloatingField T>
GadgetExpansion expand_typed(const ConstrainedZeroPattern& t, const GadgetPolicy& policy,
                             std::optional<Matrix<T>> witness) {
    GadgetExpansion e;
    e.input = t;
    e.mode = policy.mode;
    e.output = t.pattern;
    for (std::size_t r = 0; r < t.pattern.rows(); ++r) e.row_embedding.push_back(r);
    for (std::size_t c = 0; c < t.pattern.cols(); ++c) e.col_embedding.push_back(c);
    for (const auto& d : t.democracies) {
        auto step = expand_stage<T>(e.output, d, policy, witness);
        e.stages.push_back(std::move(step.stage));
        e.output = std::move(step.pattern);
        witness = std::move(step.witness);
    }
    return e;
}

}  // namespace detail

/// Left fold of the single-democracy construction over t.democracies in
/// declaration order.
inline GadgetExpansion expand(const ConstrainedZeroPattern& t, const GadgetPolicy& policy = {}) {
    t.validate();
    if (!policy.reference) {
        if (policy.mode == FixupMode::Safe || t.democracies.empty())
            return detail::expand_typed<double>(t, policy, std::nullopt);
        // No reference given: look for a constrained representation of the input.
        SolveOptions so;
        so.democracies = t.democracies;
        so.seed = policy.seed;
        for (FieldTag f : {FieldTag::Real, FieldTag::Complex, FieldTag::Quat}) {
            const SolveReport r = find_representation(t.pattern, f, so);
            if (r.status == SolveStatus::Found) {
                GadgetPolicy with = policy;
                with.reference = *r.witness;
                return expand(t, with);
            }
        }
        throw std::runtime_error("MINIMAL policy: no constrained representation of the input was found");
    }
    return std::visit(
        [&](const auto& m) -> GadgetExpansion {
            using T = typename std::decay_t<decltype(m)>::value_type;
            if (m.rows() != t.pattern.rows() || m.cols() != t.pattern.cols())
                throw std::invalid_argument("reference witness has the wrong shape");
            if constexpr (field_traits<T>::exact) {
                return detail::expand_typed<double>(t, policy, std::optional<Matrix<double>>(cast_matrix<double>(m)));
            } else {
                for (const auto& d : t.democracies)
                    if (!democracy_satisfied(m, d))
                        throw std::invalid_argument("reference witness violates a democracy");
                return detail::expand_typed<T>(t, policy, std::optional<Matrix<T>>(m));
            }
        },
        *policy.reference);
}

inline GadgetExpansion expand_one(const ConstrainedZeroPattern& t, const GadgetPolicy& policy = {}) {
    if (t.democracies.size() != 1) throw std::invalid_argument("expand_one needs exactly one democracy");
    return expand(t, policy);
}

/// Extends a constrained representation of e.input to a representation of
/// e.output, stage by stage.  Columns are not normalized.
template <FloatingField T>
Matrix<T> complete_expansion(const GadgetExpansion& e, const Matrix<T>& witness, double tol = 1e-9) {
    if (witness.rows() != e.input.pattern.rows() || witness.cols() != e.input.pattern.cols())
        throw std::invalid_argument("complete_expansion: witness has the wrong shape");
    Matrix<T> w = witness;
    for (std::size_t i = 0; i < e.stages.size(); ++i) {
        const std::size_t rows = i + 1 < e.stages.size() ? e.stages[i + 1].input_rows : e.output.rows();
        w = complete_stage(w, e.stages[i], rows, tol);
    }
    return w;
}

/// The 7 x 7 block of `p` on the stage's F rows and columns.
inline ZeroPattern stage_f_block(const ZeroPattern& p, const GadgetStage& s) {
    ZeroPattern out(7, 7);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) out.set(i, j, p.star(s.f_rows[i], s.f_cols[j]));
    return out;
}

// ---------------------------------------------------------------------------
// certification

struct CertifyTrial {
    std::size_t trial = 0;
    std::string status;  // FOUND / EXHAUSTED
    bool passed = false;
    double residual = 0.0;
    double democracy_spread = 0.0;
};

struct CertifyReport {
    FieldTag field = FieldTag::Real;
    std::vector<CertifyTrial> battery1;  // unconstrained output solves
    std::vector<CertifyTrial> battery2;  // frozen-input completions
    std::string battery2_note;           // set when battery 2 is skipped
    bool battery1_passed() const {
        return std::all_of(battery1.begin(), battery1.end(), [](const auto& t) { return t.passed; });
    }
    bool battery2_passed() const {
        return std::all_of(battery2.begin(), battery2.end(), [](const auto& t) { return t.passed; });
    }
};

struct CertifyOptions {
    std::size_t trials = 5;
    std::uint64_t seed = 0;
    std::size_t restarts = 32;
    std::size_t jobs = 0;
    std::optional<RepMatrix> constrained_witness;  // battery 2 input; solved for when absent
};

namespace detail {

template <FloatingField T>
Matrix<T> scale_columns_to(const Matrix<T>& a, double target) {
    Matrix<T> out = a;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double n = column_norm(a, c);
        if (n == 0.0) continue;
        for (std::size_t r = 0; r < a.rows(); ++r) out(r, c) = T(a(r, c) * (target / n));
    }
    return out;
}

template <FloatingField T>
std::vector<FrozenEntry> frozen_input(const GadgetExpansion& e, const Matrix<T>& w) {
    std::vector<FrozenEntry> frozen;
    for (std::size_t r = 0; r < w.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c)
            if (e.input.pattern.star(r, c)) frozen.push_back({e.row_embedding[r], e.col_embedding[c], Scalar(w(r, c))});
    return frozen;
}

}  // namespace detail

/// Battery 1: unconstrained representations of the output must satisfy every
/// embedded democracy.  Battery 2: a constrained representation of the input,
/// frozen in place, must extend to the output.  Trials run sequentially; each
/// solve parallelizes over its restarts.
inline CertifyReport certify_expansion(const GadgetExpansion& e, FieldTag field, const CertifyOptions& opts = {}) {
    return visit_floating_field(field, [&](auto tag) {
        using T = typename decltype(tag)::type;
        CertifyReport report;
        report.field = field;
        const auto democracies = e.embedded_democracies();

        for (std::size_t k = 0; k < opts.trials; ++k) {
            SolveOptions so;
            so.restarts = opts.restarts;
            so.seed = stream_seed(opts.seed, k);
            so.jobs = opts.jobs;
            const SolveReport r = find_representation<T>(e.output, so);
            CertifyTrial t{k, std::string(to_string(r.status)), false, r.best_residual, 0.0};
            if (r.witness) {
                const auto& w = std::get<Matrix<T>>(*r.witness);
                for (const auto& d : democracies) t.democracy_spread = std::max(t.democracy_spread, democracy_spread(w, d));
                t.passed = t.democracy_spread <= 1e-6;
            }
            report.battery1.push_back(t);
        }

        std::optional<Matrix<T>> base;
        if (opts.constrained_witness) {
            base = std::visit(
                [](const auto& m) -> Matrix<T> {
                    using From = typename std::decay_t<decltype(m)>::value_type;
                    if constexpr (field_traits<From>::exact) return cast_matrix<T>(m);
                    else if constexpr (field_traits<From>::real_dim <= field_traits<T>::real_dim)
                        return embed_matrix<T, From>(m);
                    else throw std::invalid_argument("constrained witness lives in a larger field");
                },
                *opts.constrained_witness);
        } else {
            SolveOptions so;
            so.restarts = opts.restarts;
            so.seed = stream_seed(opts.seed, 0xBA77E2);
            so.democracies = e.input.democracies;
            so.jobs = opts.jobs;
            const SolveReport r = find_representation<T>(e.input.pattern, so);
            if (r.witness) base = std::get<Matrix<T>>(*r.witness);
        }
        if (!base) {
            report.battery2_note = "no constrained witness over " + std::string(to_string(field));
            return report;
        }
        const Matrix<T> scaled = detail::scale_columns_to(*base, 0.5);
        for (std::size_t k = 0; k < opts.trials; ++k) {
            SolveOptions so;
            so.restarts = opts.restarts;
            so.seed = stream_seed(opts.seed, 1000 + k);
            so.frozen = detail::frozen_input(e, scaled);
            so.jobs = opts.jobs;
            const SolveReport r = find_representation<T>(e.output, so);
            report.battery2.push_back(
                {k, std::string(to_string(r.status)), r.status == SolveStatus::Found, r.best_residual, 0.0});
        }
        return report;
    });
}

// ---------------------------------------------------------------------------
// JSON

inline json stage_to_json(const GadgetStage& s) {
    json pairs = json::array();
    for (const auto& p : s.pairs)
        pairs.push_back({{"column_a", p.column_a}, {"column_b", p.column_b}, {"support", p.support}, {"rows", p.rows}});
    return json{{"democracy", democracy_to_json(s.democracy)},
                {"control_rows", s.control_rows},
                {"control_cols", s.control_cols},
                {"f_rows", s.f_rows},
                {"f_cols", s.f_cols},
                {"fixup_rows", s.fixup_rows()},
                {"pairs", std::move(pairs)}};
}

inline json expansion_to_json(const GadgetExpansion& e) {
    json stages = json::array();
    for (const auto& s : e.stages) stages.push_back(stage_to_json(s));
    json embedding = json::array();
    for (std::size_t r = 0; r < e.input.pattern.rows(); ++r)
        for (std::size_t c = 0; c < e.input.pattern.cols(); ++c)
            embedding.push_back(json::array({json::array({r, c}), json::array({e.row_embedding[r], e.col_embedding[c]})}));
    return json{{"policy", std::string(to_string(e.mode))},
                {"input", serialize_pattern(e.input)},
                {"output", serialize_pattern(e.output)},
                {"output_rows", e.output.rows()},
                {"output_cols", e.output.cols()},
                {"stages", std::move(stages)},
                {"embedding", std::move(embedding)}};
}

inline json certify_report_to_json(const CertifyReport& r) {
    auto battery = [](const std::vector<CertifyTrial>& ts) {
        json out = json::array();
        for (const auto& t : ts)
            out.push_back({{"trial", t.trial},
                           {"status", t.status},
                           {"passed", t.passed},
                           {"residual", t.residual},
                           {"democracy_spread", t.democracy_spread}});
        return out;
    };
    json j{{"field", std::string(to_string(r.field))},
           {"battery1", battery(r.battery1)},
           {"battery1_passed", r.battery1_passed()},
           {"battery2", battery(r.battery2)},
           {"battery2_passed", r.battery2_passed()}};
    if (!r.battery2_note.empty()) j["battery2_note"] = r.battery2_note;
    return j;
}

}  // namespace zpat
