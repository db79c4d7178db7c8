#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "zpat/separators.hpp"

using namespace zpat;

namespace {

// Rows 0-2 inner product, written out rather than taken from the library.
Quaternion inner_top(const Matrix<Quaternion>& w, std::size_t a, std::size_t b) {
    Quaternion acc(0);
    for (std::size_t r = 0; r < 3; ++r) acc += conj(w(r, a)) * w(r, b);
    return acc;
}

double norm_top(const Matrix<Quaternion>& w, std::size_t a) { return inner_top(w, a, a).a; }

std::filesystem::path scratch_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / ("zpat_sep_" + std::string(name));
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST(SeedPattern, Shapes) {
    const auto r = seed_pattern(FieldTag::Real);
    EXPECT_EQ(r.pattern.rows(), 5u);
    EXPECT_EQ(r.pattern.star_count(), 5u);
    ASSERT_EQ(r.democracies.size(), 2u);

    const auto c = seed_pattern(FieldTag::Complex);
    EXPECT_EQ(c.pattern.support(0), (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(c.pattern.support(1), (std::vector<std::size_t>{0, 1, 2, 4}));

    const auto h = seed_pattern(FieldTag::Quat);
    EXPECT_EQ(h.pattern.rows(), 6u);
    EXPECT_EQ(h.pattern.cols(), 4u);
    EXPECT_EQ(h.pattern.support(2), (std::vector<std::size_t>{0, 1, 2, 4, 5}));
    EXPECT_EQ(h.pattern.support(3), (std::vector<std::size_t>{0, 1, 2, 3, 5}));
    ASSERT_EQ(h.democracies.size(), 3u);
    // Column 2 is a STAR at row 4 without row 4 being in its democracy.
    EXPECT_EQ(h.democracies[2].column, 2u);
    for (std::size_t row : h.democracies[2].rows) EXPECT_NE(row, 4u);

    EXPECT_THROW(seed_pattern(FieldTag::Rat), std::invalid_argument);
    EXPECT_EQ(lower_field_of(FieldTag::Quat), FieldTag::Complex);
    EXPECT_EQ(target_dimension(FieldTag::Complex), 47u);
}

TEST(SeedWitness, RealAndComplexVerify) {
    for (FieldTag f : {FieldTag::Real, FieldTag::Complex}) {
        const auto cp = seed_pattern(f);
        const WitnessVerdict v = verify_witness(seed_witness(f), cp.pattern, cp.democracies);
        EXPECT_TRUE(v.passed()) << to_string(f);
        EXPECT_LT(v.orthogonality_residual, 1e-12);
    }
    const auto w = std::get<Matrix<Complex>>(seed_witness(FieldTag::Complex));
    const Matrix<Complex> g = gram(w);
    EXPECT_NEAR(std::abs(g(0, 0) - 4.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(g(1, 1) - 4.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(g(0, 1)), 0.0, 1e-12);
}

TEST(SeedWitness, QuaternionVerifies) {
    const auto cp = seed_pattern(FieldTag::Quat);
    const WitnessVerdict v = verify_witness(seed_witness(FieldTag::Quat), cp.pattern, cp.democracies);
    EXPECT_TRUE(v.pattern_ok);
    EXPECT_TRUE(v.democracies_ok);
    EXPECT_LT(v.orthogonality_residual, 1e-12);
    EXPECT_TRUE(v.passed());
}

TEST(SeedWitness, QuaternionTopRowsAreNotOrthogonal) {
    const auto w = seed_witness_quat();
    const double g12 = abs(inner_top(w, 1, 2));
    EXPECT_GT(g12, 1e-3);
    EXPECT_GT(norm_top(w, 1) * norm_top(w, 2) - g12 * g12, 1e-6);
    EXPECT_LT(abs(inner_top(w, 1, 3)), 1e-12);
    EXPECT_GT(abs(inner_top(w, 2, 3)), 1e-3);
}

TEST(SeedWitness, CubeRootsCube) {
    for (const Quaternion u : {Quaternion::i(), Quaternion::j(), Quaternion::k()}) {
        const Quaternion z = cube_root(u);
        EXPECT_NEAR(abs(z * z * z - Quaternion(1)), 0.0, 1e-14);
        EXPECT_NEAR(abs(Quaternion(1) + z + z * z), 0.0, 1e-14);
    }
}

TEST(Obstruction, RealSignCases) {
    const json j = check_real_obstruction();
    EXPECT_EQ(j["cases"].size(), 8u);
    EXPECT_EQ(j["min_abs_sum"], 1);
    EXPECT_EQ(j["verdict"], "impossible over REAL");
    for (const auto& c : j["cases"]) EXPECT_EQ(c["sum"].get<long>() % 2 != 0, true);
}

TEST(Obstruction, EisensteinArithmetic) {
    const Eisenstein w = Eisenstein::omega_pow(1);
    EXPECT_EQ(w * w * w, Eisenstein::omega_pow(0));
    EXPECT_EQ(w.conj(), w * w);
    EXPECT_TRUE((Eisenstein::omega_pow(0) + w + w * w).is_zero());
}

TEST(Obstruction, ComplexBranchesAllContradict) {
    const json j = check_complex_obstruction_TH();
    ASSERT_EQ(j["branches"].size(), 4u);
    std::size_t parallel = 0, orthogonal = 0;
    for (const auto& b : j["branches"]) {
        EXPECT_TRUE(b["contradiction"].get<bool>());
        const auto cls = b["classification"].get<std::string>();
        parallel += cls == "parallel";
        orthogonal += cls == "orthogonal";
        // a == b gives parallel vectors, a != b orthogonal ones
        EXPECT_EQ(cls == "parallel", b["a"] == b["b"]);
    }
    EXPECT_EQ(parallel, 2u);
    EXPECT_EQ(orthogonal, 2u);
    EXPECT_EQ(j["verdict"], "no constrained representation over COMPLEX");
}

TEST(Obstruction, RationalMagnitudes) {
    EXPECT_EQ(rational_magnitude_note(5)["verdict"], "impossible over RAT");
    EXPECT_FALSE(rational_magnitude_note(5)["rational"].get<bool>());
    const json four = rational_magnitude_note(4);
    EXPECT_TRUE(four["perfect_square"].get<bool>());
    EXPECT_EQ(four["magnitude_exact"], "1/2");
    EXPECT_EQ(rational_magnitude_note(9)["magnitude_exact"], "1/3");
    EXPECT_THROW(rational_magnitude_note(0), std::invalid_argument);
    EXPECT_EQ(obstruction_for(FieldTag::Real)["entries"], 5);
}

TEST(Separation, RealMinimalEndToEnd) {
    SeparationOptions opts;
    opts.policy = FixupMode::Minimal;
    const SeparationCase sc = build_separation(FieldTag::Real, opts);
    EXPECT_EQ(sc.completion.status, SolveStatus::Found);
    EXPECT_LE(sc.completion.best_residual, 1e-9);
    EXPECT_EQ(sc.achieved_n, 35u);
    EXPECT_LT(sc.unitarity_residual, 1e-8);
    EXPECT_TRUE(sc.pattern_match);
    EXPECT_TRUE(sc.seed_democracies_ok);
    EXPECT_EQ(sc.square_pattern.cols(), 35u);
    // the expanded pattern sits in the leading columns of the square one
    for (std::size_t r = 0; r < sc.expansion.output.rows(); ++r)
        for (std::size_t c = 0; c < sc.expansion.output.cols(); ++c)
            EXPECT_EQ(sc.square_pattern.star(r, c), sc.expansion.output.star(r, c));
}

TEST(Separation, RealSafeWithinBound) {
    const SeparationCase sc = build_separation(FieldTag::Real);
    EXPECT_EQ(sc.achieved_n, 38u);
    EXPECT_LE(static_cast<double>(sc.achieved_n), 1.25 * 35);
}

TEST(Separation, DeterministicForFixedSeed) {
    SeparationOptions opts;
    opts.seed = 5;
    const SeparationCase a = build_separation(FieldTag::Real, opts);
    opts.jobs = 3;
    const SeparationCase b = build_separation(FieldTag::Real, opts);
    EXPECT_EQ(std::get<Matrix<double>>(a.witness), std::get<Matrix<double>>(b.witness));
}

TEST(Separation, BundleFiles) {
    const auto dir = scratch_dir("bundle");
    SeparationOptions opts;
    opts.policy = FixupMode::Minimal;
    const SeparationCase sc = build_separation(FieldTag::Real, opts);
    write_bundle(sc, opts, dir);
    for (const char* name : {"pattern.txt", "witness.json", "obstruction.json", "expansion.json", "report.json"})
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    std::ifstream in(dir / "report.json");
    const json report = json::parse(in);
    EXPECT_EQ(report["target_n"], 35);
    EXPECT_EQ(report["achieved_n"], 35);
    EXPECT_TRUE(report["within_1_25_target"].get<bool>());
    EXPECT_EQ(report["completion"]["status"], "FOUND");

    std::ifstream pat(dir / "pattern.txt");
    const std::string text((std::istreambuf_iterator<char>(pat)), std::istreambuf_iterator<char>());
    std::ifstream wit(dir / "witness.json");
    const RepMatrix w = matrix_from_json(json::parse(wit));
    EXPECT_TRUE(matches_pattern(w, parse_pattern(text).pattern));
    std::filesystem::remove_all(dir);
}
