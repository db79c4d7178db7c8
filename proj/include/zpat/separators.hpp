#pragma once

// Separating examples for the chain Z(Q) < Z(R) < Z(C) < Z(H).  Each case is a
// small constrained pattern that has a constrained orthogonal representation
// over the upper field but provably none over the lower one.  The gadget turns
// it into a plain pattern, and a representation is completed to a square
// unitary whose zero-pattern separates the two fields.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "zpat/gadget.hpp"
#include "zpat/json_io.hpp"
#include "zpat/matrix.hpp"
#include "zpat/pattern.hpp"
#include "zpat/scalar.hpp"
#include "zpat/solver.hpp"

namespace zpat {

inline FieldTag lower_field_of(FieldTag upper) {
    switch (upper) {
    case FieldTag::Real: return FieldTag::Rat;
    case FieldTag::Complex: return FieldTag::Real;
    case FieldTag::Quat: return FieldTag::Complex;
    default: throw std::invalid_argument("no separating seed below RAT");
    }
}

inline std::size_t target_dimension(FieldTag upper) {
    switch (upper) {
    case FieldTag::Real: return 35;
    case FieldTag::Complex: return 47;
    case FieldTag::Quat: return 141;
    default: throw std::invalid_argument("no separating seed below RAT");
    }
}

inline ConstrainedZeroPattern seed_pattern(FieldTag upper) {
    auto column = [](ZeroPattern& p, std::size_t c, std::initializer_list<std::size_t> rows) {
        for (std::size_t r : rows) p.set(r, c);
    };
    ConstrainedZeroPattern cp;
    switch (upper) {
    case FieldTag::Real:
        cp.pattern = ZeroPattern(5, 1);
        column(cp.pattern, 0, {0, 1, 2, 3, 4});
        cp.democracies = {{0, {0, 1, 2, 3}}, {0, {1, 2, 3, 4}}};
        break;
    case FieldTag::Complex:
        cp.pattern = ZeroPattern(5, 2);
        column(cp.pattern, 0, {0, 1, 2, 3});
        column(cp.pattern, 1, {0, 1, 2, 4});
        cp.democracies = {{0, {0, 1, 2, 3}}, {1, {0, 1, 2, 4}}};
        break;
    case FieldTag::Quat:
        cp.pattern = ZeroPattern(6, 4);
        column(cp.pattern, 0, {0, 1, 2, 3});
        column(cp.pattern, 1, {0, 1, 2, 4});
        column(cp.pattern, 2, {0, 1, 2, 4, 5});
        column(cp.pattern, 3, {0, 1, 2, 3, 5});
        cp.democracies = {{0, {0, 1, 2, 3}}, {1, {0, 1, 2, 4}}, {2, {0, 1, 2, 5}}};
        break;
    default: throw std::invalid_argument("seed_pattern: no seed for RAT");
    }
    return cp;
}

/// Quaternionic cube root of unity -1/2 + (sqrt3/2) u for a unit imaginary u.
inline Quaternion cube_root(const Quaternion& u) { return Quaternion(-0.5) + u * (std::numbers::sqrt3 / 2.0); }

inline Matrix<Quaternion> seed_witness_quat() {
    using Q = Quaternion;
    const Q a = cube_root(Q::i()), b = cube_root(Q::j());
    const std::array<Q, 3> v1 = {Q(1), a, a * a}, v2 = {Q(1), b, b * b};
    auto inner3 = [](const std::array<Q, 3>& x, const std::array<Q, 3>& y) {
        Q acc(0);
        for (std::size_t r = 0; r < 3; ++r) acc += conj(x[r]) * y[r];
        return acc;
    };
    const Q s = inner3(v1, v2);
    std::array<Q, 3> v3;
    for (std::size_t r = 0; r < 3; ++r) v3[r] = v2[r] - v1[r] * (s / 3.0) + Q(1);

    Matrix<Q> w(6, 4);
    for (std::size_t r = 0; r < 4; ++r) w(r, 0) = Q(1);
    for (std::size_t r = 0; r < 3; ++r) {
        w(r, 1) = v1[r];
        w(r, 2) = v2[r];
        w(r, 3) = v3[r];
    }
    w(4, 1) = Q(1);
    w(4, 2) = -s;  // <v1, v2> = 0
    w(5, 2) = Q(1);
    w(3, 3) = -(v3[0] + v3[1] + v3[2]);  // <v0, v3> = 0
    w(5, 3) = -inner3(v2, v3);           // <v2, v3> = 0
    return w;
}

inline RepMatrix seed_witness(FieldTag upper) {
    switch (upper) {
    case FieldTag::Real: {
        Matrix<double> w(5, 1);
        for (std::size_t r = 0; r < 5; ++r) w(r, 0) = 1.0;
        return w;
    }
    case FieldTag::Complex: {
        const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
        Matrix<Complex> w(5, 2);
        for (std::size_t r = 0; r < 4; ++r) w(r, 0) = 1.0;
        w(0, 1) = 1.0;
        w(1, 1) = omega;
        w(2, 1) = std::conj(omega);
        w(4, 1) = 1.0;
        return w;
    }
    case FieldTag::Quat: return seed_witness_quat();
    default: throw std::invalid_argument("seed_witness: no seed for RAT");
    }
}

// ---------------------------------------------------------------------------
// exact obstructions

/// Three reals of one magnitude never sum to zero: all sign choices.
inline json check_real_obstruction() {
    json cases = json::array();
    long min_abs = 3;
    for (int mask = 0; mask < 8; ++mask) {
        std::array<int, 3> s{};
        long sum = 0;
        for (int k = 0; k < 3; ++k) {
            s[k] = (mask >> (2 - k)) & 1 ? -1 : 1;
            sum += s[k];
        }
        min_abs = std::min(min_abs, std::labs(sum));
        cases.push_back({{"signs", s}, {"sum", sum}, {"abs_sum", std::labs(sum)}});
    }
    return json{{"claim", "x + y + z = 0 with |x| = |y| = |z| > 0 has no real solution"},
                {"reduction", "divide by the common magnitude; each term is +1 or -1"},
                {"cases", std::move(cases)},
                {"case_count", 8},
                {"min_abs_sum", min_abs},
                {"applies_to", "column 0 and column 1 of the COMPLEX seed meet in rows 0, 1, 2 with equal magnitudes"},
                {"verdict", min_abs > 0 ? "impossible over REAL" : "possible"}};
}

/// Exact arithmetic in Z[w], w a primitive cube root of unity: x + y w.
struct Eisenstein {
    long long x = 0, y = 0;

    friend Eisenstein operator+(Eisenstein a, Eisenstein b) { return {a.x + b.x, a.y + b.y}; }
    friend Eisenstein operator*(Eisenstein a, Eisenstein b) {
        // w^2 = -1 - w
        return {a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x - a.y * b.y};
    }
    friend bool operator==(Eisenstein, Eisenstein) = default;
    Eisenstein conj() const { return {x - y, -y}; }  // conj(w) = w^2
    bool is_zero() const { return x == 0 && y == 0; }
    static Eisenstein omega_pow(int k) {
        switch (((k % 3) + 3) % 3) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        default: return {-1, -1};
        }
    }
    std::string str() const { return std::to_string(x) + " + " + std::to_string(y) + "w"; }
};

/// Over C the quaternionic seed has no constrained representation.  After row
/// and column phases, rows 0-2 of v0 are (1,1,1) and v1, v2 are multiples of
/// (1, w^a, w^2a) and (1, w^b, w^2b), a, b in {1, 2}.  Each branch is checked
/// in exact Eisenstein arithmetic.
inline json check_complex_obstruction_TH() {
    auto vec = [](int a) { return std::array<Eisenstein, 3>{Eisenstein::omega_pow(0), Eisenstein::omega_pow(a), Eisenstein::omega_pow(2 * a)}; };
    auto inner = [](const std::array<Eisenstein, 3>& u, const std::array<Eisenstein, 3>& v) {
        Eisenstein acc;
        for (std::size_t r = 0; r < 3; ++r) acc = acc + u[r].conj() * v[r];
        return acc;
    };
    json branches = json::array();
    bool all_contradict = true;
    const auto ones = vec(0);
    for (int a : {1, 2})
        for (int b : {1, 2}) {
            const auto v1 = vec(a), v2 = vec(b);
            const Eisenstein g01 = inner(ones, v1), g02 = inner(ones, v2), g12 = inner(v1, v2);
            // v2 parallel to v1 iff conj(v1_r) v2_r is the same for every r.
            const bool parallel = v1[0].conj() * v2[0] == v1[1].conj() * v2[1] &&
                                  v1[1].conj() * v2[1] == v1[2].conj() * v2[2];
            json br{{"a", a},
                    {"b", b},
                    {"v1_rows_0_2", {v1[0].str(), v1[1].str(), v1[2].str()}},
                    {"v2_rows_0_2", {v2[0].str(), v2[1].str(), v2[2].str()}},
                    {"<v0,v1>_rows_0_2", g01.str()},
                    {"<v0,v2>_rows_0_2", g02.str()},
                    {"<v1,v2>_rows_0_2", g12.str()}};
            bool contradiction = false;
            if (!g01.is_zero() || !g02.is_zero()) {
                br["classification"] = "inconsistent";
                br["argument"] = "rows 0-2 must be orthogonal to (1,1,1)";
                contradiction = true;
            } else if (parallel) {
                br["classification"] = "parallel";
                br["argument"] =
                    "v3 vanishes at row 4, so <v1,v3> = 0 forces <v1',v3'> = 0 on rows 0-2; v2' is a multiple of v1', "
                    "so <v2',v3'> = 0 and <v2,v3> = 0 reduces to conj(v2[5]) v3[5] = 0, contradicting STAR at (5,2) "
                    "and (5,3)";
                contradiction = true;
            } else if (g12.is_zero()) {
                br["classification"] = "orthogonal";
                br["argument"] =
                    "<v1',v2'> = 0 on rows 0-2, and rows 3, 5 meet v1 in zeros, so <v1,v2> = 0 reduces to "
                    "conj(v1[4]) v2[4] = 0, contradicting STAR at (4,1) and (4,2)";
                contradiction = true;
            } else {
                br["classification"] = "unresolved";
            }
            br["contradiction"] = contradiction;
            all_contradict = all_contradict && contradiction;
            branches.push_back(std::move(br));
        }
    return json{{"claim", "the QUAT seed has no constrained orthogonal representation over COMPLEX"},
                {"reduction",
                 "three complex numbers of equal magnitude sum to zero only as a multiple of (1, w, w^2) or (1, w^2, w)"},
                {"branches", std::move(branches)},
                {"verdict", all_contradict ? "no constrained representation over COMPLEX" : "unresolved"}};
}

/// A unit column with n equal-magnitude entries has entries of magnitude
/// 1/sqrt(n), which is rational iff n is a perfect square.
inline json rational_magnitude_note(std::size_t n_entries) {
    if (n_entries == 0) throw std::invalid_argument("rational_magnitude_note: need at least one entry");
    const boost::multiprecision::cpp_int n = n_entries;
    const boost::multiprecision::cpp_int root = boost::multiprecision::sqrt(n);
    const bool square = root * root == n;
    json j{{"entries", n_entries},
           {"magnitude", "1/sqrt(" + std::to_string(n_entries) + ")"},
           {"isqrt", root.str()},
           {"perfect_square", square},
           {"rational", square}};
    if (square) j["magnitude_exact"] = "1/" + root.str();
    j["verdict"] = square ? "rational magnitude possible" : "impossible over RAT";
    return j;
}

inline json obstruction_for(FieldTag upper) {
    switch (upper) {
    case FieldTag::Real: {
        json j = rational_magnitude_note(5);
        j["applies_to"] =
            "the two democracies on the REAL seed force all five entries of its unit column to one magnitude";
        return j;
    }
    case FieldTag::Complex: return check_real_obstruction();
    case FieldTag::Quat: return check_complex_obstruction_TH();
    default: throw std::invalid_argument("no obstruction below RAT");
    }
}

// ---------------------------------------------------------------------------
// pipeline

class PipelineError : public std::runtime_error {
  public:
    PipelineError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

  private:
    std::string stage_;
};

struct SeparationOptions {
    FixupMode policy = FixupMode::Safe;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    std::size_t restarts = 32;
    std::size_t max_iters = 5000;
};

struct SeparationCase {
    FieldTag lower_field = FieldTag::Rat;
    FieldTag upper_field = FieldTag::Real;
    ConstrainedZeroPattern seed;
    GadgetExpansion expansion;
    ZeroPattern square_pattern;
    RepMatrix witness;
    json obstruction;
    SolveReport completion;
    double unitarity_residual = 0.0;
    bool pattern_match = false;
    bool seed_democracies_ok = false;
    std::size_t target_n = 0;
    std::size_t achieved_n = 0;
};

namespace detail {

template <FloatingField T>
void build_typed(SeparationCase& sc, const SeparationOptions& opts) {
    const Matrix<T> seed_w = std::get<Matrix<T>>(seed_witness(sc.upper_field));
    GadgetPolicy policy;
    policy.mode = opts.policy;
    policy.seed = opts.seed;
    policy.reference = RepMatrix(seed_w);
    try {
        sc.expansion = expand(sc.seed, policy);
    } catch (const std::exception& e) {
        throw PipelineError("expand", e.what());
    }

    SolveOptions so;
    so.restarts = opts.restarts;
    so.max_iters = opts.max_iters;
    so.seed = opts.seed;
    so.jobs = opts.jobs;
    so.frozen = frozen_input(sc.expansion, scale_columns_to(seed_w, 0.5));
    sc.completion = find_representation<T>(sc.expansion.output, so);
    if (sc.completion.status != SolveStatus::Found)
        throw PipelineError("complete", "frozen-seed completion exhausted (best residual " +
                                            std::to_string(sc.completion.best_residual) + ")");

    Matrix<T> cols = std::get<Matrix<T>>(*sc.completion.witness);
    cols = scale_columns_to(cols, 1.0);
    CompletionOptions co;
    co.seed = opts.seed;
    co.input_tol = 1e-8;
    Matrix<T> u;
    try {
        u = complete_to_square(cols, co);
    } catch (const std::exception& e) {
        throw PipelineError("square", e.what());
    }
    sc.unitarity_residual = unitarity_residual(u);
    if (sc.unitarity_residual > 1e-8) throw PipelineError("square", "U^H U deviates from I");
    try {
        sc.square_pattern = pattern_of(u);
    } catch (const std::exception& e) {
        throw PipelineError("pattern", e.what());
    }
    sc.pattern_match = matches_pattern(u, sc.square_pattern);
    sc.seed_democracies_ok = true;
    for (const auto& d : sc.expansion.embedded_democracies())
        sc.seed_democracies_ok = sc.seed_democracies_ok && democracy_satisfied(u, d);
    sc.witness = std::move(u);
}

}  // namespace detail

inline SeparationCase build_separation(FieldTag upper, const SeparationOptions& opts = {}) {
    SeparationCase sc;
    sc.upper_field = upper;
    sc.lower_field = lower_field_of(upper);
    sc.seed = seed_pattern(upper);
    sc.obstruction = obstruction_for(upper);
    sc.target_n = target_dimension(upper);
    visit_floating_field(upper, [&](auto tag) {
        using T = typename decltype(tag)::type;
        detail::build_typed<T>(sc, opts);
    });
    sc.achieved_n = sc.square_pattern.rows();
    return sc;
}

inline json separation_report(const SeparationCase& sc, const SeparationOptions& opts) {
    return json{{"upper_field", std::string(to_string(sc.upper_field))},
                {"lower_field", std::string(to_string(sc.lower_field))},
                {"policy", std::string(to_string(opts.policy))},
                {"seed", opts.seed},
                {"target_n", sc.target_n},
                {"achieved_n", sc.achieved_n},
                {"within_1_25_target", static_cast<double>(sc.achieved_n) <= 1.25 * static_cast<double>(sc.target_n)},
                {"expanded_rows", sc.expansion.output.rows()},
                {"expanded_cols", sc.expansion.output.cols()},
                {"completion",
                 {{"status", std::string(to_string(sc.completion.status))},
                  {"residual", sc.completion.best_residual},
                  {"restart", sc.completion.best_restart},
                  {"min_star_magnitude", sc.completion.min_star_magnitude},
                  {"rng", std::string(kRngDescription)}}},
                {"unitarity_residual", sc.unitarity_residual},
                {"pattern_match", sc.pattern_match},
                {"seed_democracies_ok", sc.seed_democracies_ok},
                {"obstruction_verdict", sc.obstruction.value("verdict", "")}};
}

/// Writes pattern.txt, witness.json, obstruction.json, expansion.json and
/// report.json into `dir`.
inline void write_bundle(const SeparationCase& sc, const SeparationOptions& opts, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto put = [&](const char* name, const std::string& text) {
        std::ofstream out(dir / name);
        if (!out) throw PipelineError("bundle", std::string("cannot write ") + name);
        out << text;
    };
    put("pattern.txt", serialize_pattern(sc.square_pattern));
    put("witness.json", matrix_to_json(sc.witness).dump(1) + "\n");
    put("obstruction.json", sc.obstruction.dump(2) + "\n");
    put("expansion.json", expansion_to_json(sc.expansion).dump(1) + "\n");
    put("report.json", separation_report(sc, opts).dump(2) + "\n");
}

}  // namespace zpat
