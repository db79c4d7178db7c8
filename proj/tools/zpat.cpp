// zpat command-line tool.  JSON goes to stdout, human summaries to stderr.
// Exit codes: 0 success, 1 negative verdict, 2 usage or input error,
// 3 internal or pipeline error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "zpat/zpat.hpp"

namespace {

using namespace zpat;

enum Exit : int { kOk = 0, kNegative = 1, kUsage = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ConstrainedZeroPattern load_pattern(const std::string& path) {
    try {
        return parse_pattern(read_file(path));
    } catch (const std::invalid_argument& e) {
        throw UsageError(path + ": " + e.what());
    }
}

RepMatrix load_matrix(const std::string& path) {
    try {
        return matrix_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(path + ": " + e.what());
    }
}

FieldTag parse_field(const std::string& s) {
    try {
        return field_from_string(s);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

struct BuildArgs {
    std::string field, policy = "safe", out;
    std::uint64_t seed = 0;
    std::size_t jobs = 0, restarts = 32;
};

int cmd_build_separator(const BuildArgs& a) {
    SeparationOptions opts;
    opts.policy = fixup_mode_from_string(a.policy);
    opts.seed = a.seed;
    opts.jobs = a.jobs;
    opts.restarts = a.restarts;
    const FieldTag upper = parse_field(a.field);
    if (upper == FieldTag::Rat) throw UsageError("--field must be R, C or H");
    const SeparationCase sc = build_separation(upper, opts);
    write_bundle(sc, opts, a.out);
    emit(separation_report(sc, opts));
    std::cerr << to_string(sc.lower_field) << " < " << to_string(sc.upper_field) << ": n = " << sc.achieved_n
              << " (target " << sc.target_n << "), bundle in " << a.out << '\n';
    return kOk;
}

struct VerifyArgs {
    std::string pattern, matrix;
    bool ignore_democracies = false;
    VerifyTolerances tol;
};

int cmd_verify(const VerifyArgs& a) {
    const ConstrainedZeroPattern p = load_pattern(a.pattern);
    const RepMatrix m = load_matrix(a.matrix);
    if (rows_of(m) != p.pattern.rows() || cols_of(m) != p.pattern.cols())
        throw UsageError("matrix and pattern dimensions differ");
    const auto demos = a.ignore_democracies ? std::vector<Democracy>{} : p.democracies;
    const WitnessVerdict v = verify_witness(m, p.pattern, demos, a.tol);
    json j = verdict_to_json(v);
    j["field"] = std::string(to_string(tag_of(m)));
    emit(j);
    std::cerr << (v.passed() ? "witness verified" : "witness rejected") << " (pattern "
              << (v.pattern_ok ? "ok" : "FAIL") << ", orthogonality " << (v.orthogonality_ok ? "ok" : "FAIL")
              << ", democracies " << (v.democracies_ok ? "ok" : "FAIL") << ")\n";
    return v.passed() ? kOk : kNegative;
}

struct SearchArgs {
    std::string pattern, field = "C", freeze;
    std::size_t restarts = 32, max_iters = 5000, jobs = 0;
    std::uint64_t seed = 0;
    bool ignore_democracies = false, no_unit_columns = false, all_restarts = false;
};

int cmd_search(const SearchArgs& a) {
    const ConstrainedZeroPattern p = load_pattern(a.pattern);
    SolveOptions opts;
    opts.restarts = a.restarts;
    opts.max_iters = a.max_iters;
    opts.seed = a.seed;
    opts.jobs = a.jobs;
    opts.unit_columns = !a.no_unit_columns;
    opts.stop_on_found = !a.all_restarts;
    if (!a.ignore_democracies) opts.democracies = p.democracies;
    if (!a.freeze.empty()) {
        // Every nonzero entry of the freeze matrix is held fixed.
        const RepMatrix f = load_matrix(a.freeze);
        if (rows_of(f) > p.pattern.rows() || cols_of(f) > p.pattern.cols())
            throw UsageError("freeze matrix is larger than the pattern");
        for (std::size_t r = 0; r < rows_of(f); ++r)
            for (std::size_t c = 0; c < cols_of(f); ++c) {
                const Scalar v = entry_of(f, r, c);
                const bool nonzero = std::visit(
                    [](const auto& x) { return !(x == std::decay_t<decltype(x)>(0)); }, v.value());
                if (nonzero) opts.frozen.push_back({r, c, v});
            }
    }
    const FieldTag field = parse_field(a.field);
    const SolveReport r = find_representation(p.pattern, field, opts);
    json j = solve_report_to_json(r);
    if (r.witness && p.pattern.rows() == 7 && serialize_pattern(p.pattern) == serialize_pattern(fano_pattern(7))) {
        // The rigid core: report the distance of the normalized witness from M.
        std::visit(
            [&](const auto& w) {
                using T = typename std::decay_t<decltype(w)>::value_type;
                if constexpr (!field_traits<T>::exact) {
                    const auto trace = normalize_to_canonical(w);
                    j["normalized_distance_to_M"] = max_abs_difference(trace.b_final, cast_matrix<T>(fano_m()));
                }
            },
            *r.witness);
    }
    emit(j);
    std::cerr << to_string(r.status) << " over " << to_string(field) << ", best residual " << r.best_residual
              << (r.strongly_infeasible ? " (strongly infeasible)" : "") << '\n';
    return r.status == SolveStatus::Found ? kOk : kNegative;
}

struct RigidityArgs {
    long p = 7;
    std::string field = "C";
    std::size_t restarts = 20, jobs = 0;
    std::uint64_t seed = 0;
};

int cmd_rigidity(const RigidityArgs& a) {
    RigidityOptions opts;
    opts.seed = a.seed;
    opts.jobs = a.jobs;
    const FieldTag field = parse_field(a.field);
    if (field == FieldTag::Rat) throw UsageError("--field must be R, C or H");
    const RigidityReport r = rigidity_probe(a.p, field, a.restarts, opts);
    emit(rigidity_report_to_json(r));
    std::cerr << "p = " << a.p << " over " << to_string(field) << ": " << r.found << "/" << r.restarts << " found, "
              << r.clusters.size() << " cluster(s), " << r.verdict << '\n';
    return r.verdict == "rigid-so-far" ? kOk : kNegative;
}

struct GadgetArgs {
    std::string in, policy = "safe", out, reference;
    std::uint64_t seed = 0;
};

int cmd_gadget(const GadgetArgs& a) {
    const ConstrainedZeroPattern t = load_pattern(a.in);
    GadgetPolicy policy;
    policy.mode = fixup_mode_from_string(a.policy);
    policy.seed = a.seed;
    if (!a.reference.empty()) policy.reference = load_matrix(a.reference);
    const GadgetExpansion e = expand(t, policy);
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) throw UsageError("cannot write " + a.out);
        out << serialize_pattern(e.output);
    }
    emit(expansion_to_json(e));
    std::cerr << t.pattern.rows() << "x" << t.pattern.cols() << " with " << t.democracies.size()
              << " democracies -> " << e.output.rows() << "x" << e.output.cols() << '\n';
    return kOk;
}

struct FanoArgs {
    long p = 7;
    bool pattern = false;
};

int cmd_fano(const FanoArgs& a) {
    json j{{"p", a.p}};
    if (a.pattern) {
        j["pattern"] = serialize_pattern(fano_pattern(a.p));
    } else {
        const Matrix<Rational> m = fano_matrix(a.p);
        j["matrix"] = matrix_to_json(m);
        j["gram_is_identity"] = is_exactly_identity(gram(m));
    }
    emit(j);
    std::cerr << "p = " << a.p << (a.pattern ? " pattern" : " matrix") << '\n';
    return kOk;
}

struct DoubleArgs {
    std::string pattern, matrix;
};

int cmd_double(const DoubleArgs& a) {
    if (a.pattern.empty() == a.matrix.empty()) throw UsageError("give exactly one of --pattern, --matrix");
    json j;
    if (!a.pattern.empty()) {
        const ZeroPattern d = bipartite_double(load_pattern(a.pattern).pattern);
        j = {{"rows", d.rows()}, {"cols", d.cols()}, {"pattern", serialize_pattern(d)}};
        std::cerr << "doubled pattern " << d.rows() << "x" << d.cols() << '\n';
    } else {
        const RepMatrix h = hermitian_double(load_matrix(a.matrix));
        j = {{"matrix", matrix_to_json(h)}};
        std::cerr << "doubled matrix " << rows_of(h) << "x" << cols_of(h) << '\n';
    }
    emit(j);
    return kOk;
}

int fail(int code, const std::string& what, const std::string& stage = {}) {
    json j{{"error", what}, {"exit_code", code}};
    if (!stage.empty()) j["stage"] = stage;
    emit(j);
    std::cerr << "error: " << what << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-patterns of orthogonal matrices over Q, R, C and H"};
    app.require_subcommand(1);

    BuildArgs build;
    auto* sub_build = app.add_subcommand("build-separator", "Build a separating square pattern and its bundle");
    sub_build->add_option("--field", build.field, "Upper field: R, C or H")->required();
    sub_build->add_option("--policy", build.policy, "Fix-up policy: safe or minimal");
    sub_build->add_option("--out", build.out, "Bundle directory")->required();
    sub_build->add_option("--seed", build.seed, "RNG seed");
    sub_build->add_option("--restarts", build.restarts, "Solver restarts");
    sub_build->add_option("--jobs", build.jobs, "Worker cap (0 = hardware)");

    VerifyArgs verify;
    auto* sub_verify = app.add_subcommand("verify", "Check a matrix against a constrained pattern");
    sub_verify->add_option("--pattern", verify.pattern, "Pattern file")->required();
    sub_verify->add_option("--matrix", verify.matrix, "Matrix JSON file")->required();
    sub_verify->add_flag("--ignore-democracies", verify.ignore_democracies, "Skip democracy checks");
    sub_verify->add_option("--zero-tol", verify.tol.zero_tol, "ZERO tolerance");
    sub_verify->add_option("--star-floor", verify.tol.star_floor, "Minimum STAR magnitude");
    sub_verify->add_option("--orth-tol", verify.tol.orth_tol, "Orthogonality tolerance");
    sub_verify->add_option("--mag-tol", verify.tol.mag_tol, "Democracy magnitude tolerance");

    SearchArgs search;
    auto* sub_search = app.add_subcommand("search", "Search for an orthogonal representation");
    sub_search->add_option("--pattern", search.pattern, "Pattern file")->required();
    sub_search->add_option("--field", search.field, "R, C or H");
    sub_search->add_option("--restarts", search.restarts, "Restarts");
    sub_search->add_option("--max-iters", search.max_iters, "Iterations per restart");
    sub_search->add_option("--seed", search.seed, "RNG seed");
    sub_search->add_option("--freeze", search.freeze, "Matrix JSON whose nonzero entries are held fixed");
    sub_search->add_option("--jobs", search.jobs, "Worker cap (0 = hardware)");
    sub_search->add_flag("--ignore-democracies", search.ignore_democracies, "Drop democracy constraints");
    sub_search->add_flag("--no-unit-columns", search.no_unit_columns, "Do not normalize columns");
    sub_search->add_flag("--all-restarts", search.all_restarts, "Run every restart; pick the minimum residual");

    RigidityArgs rig;
    auto* sub_rig = app.add_subcommand("rigidity", "Probe unitary rigidity of the quadratic-residue pattern");
    sub_rig->add_option("--p", rig.p, "Prime congruent to 3 mod 4");
    sub_rig->add_option("--field", rig.field, "R, C or H");
    sub_rig->add_option("--restarts", rig.restarts, "Restarts");
    sub_rig->add_option("--seed", rig.seed, "RNG seed");
    sub_rig->add_option("--jobs", rig.jobs, "Worker cap (0 = hardware)");

    GadgetArgs gad;
    auto* sub_gad = app.add_subcommand("gadget", "Replace democracies by zero-pattern");
    sub_gad->add_option("--in", gad.in, "Constrained pattern file")->required();
    sub_gad->add_option("--policy", gad.policy, "safe or minimal");
    sub_gad->add_option("--out", gad.out, "Write the output pattern here");
    sub_gad->add_option("--reference", gad.reference, "Constrained witness for minimal certification");
    sub_gad->add_option("--seed", gad.seed, "RNG seed");

    FanoArgs fano;
    auto* sub_fano = app.add_subcommand("fano", "Print the quadratic-residue matrix or pattern");
    sub_fano->add_option("--p", fano.p, "Prime congruent to 3 mod 4");
    auto* as_matrix = sub_fano->add_flag("--matrix", "Exact rational matrix (default)");
    sub_fano->add_flag("--pattern", fano.pattern, "Zero-pattern")->excludes(as_matrix);

    DoubleArgs dbl;
    auto* sub_dbl = app.add_subcommand("double", "Hermitian doubling of a pattern or unitary");
    sub_dbl->add_option("--pattern", dbl.pattern, "Pattern file");
    sub_dbl->add_option("--matrix", dbl.matrix, "Matrix JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*sub_build) return cmd_build_separator(build);
        if (*sub_verify) return cmd_verify(verify);
        if (*sub_search) return cmd_search(search);
        if (*sub_rig) return cmd_rigidity(rig);
        if (*sub_gad) return cmd_gadget(gad);
        if (*sub_fano) return cmd_fano(fano);
        if (*sub_dbl) return cmd_double(dbl);
    } catch (const UsageError& e) {
        return fail(kUsage, e.what());
    } catch (const PipelineError& e) {
        return fail(kInternal, e.what(), e.stage());
    } catch (const std::invalid_argument& e) {
        return fail(kUsage, e.what());
    } catch (const std::exception& e) {
        return fail(kInternal, e.what());
    }
    return kUsage;
}
