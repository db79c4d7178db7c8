#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "zpat/fano.hpp"
#include "zpat/separators.hpp"
#include "zpat/solver.hpp"

using namespace zpat;
using namespace zpat::testing;

namespace {

std::vector<Democracy> per_column_democracies(const ZeroPattern& p) {
    std::vector<Democracy> out;
    for (std::size_t c = 0; c < p.cols(); ++c) {
        const auto s = p.support(c);
        out.push_back({c, {s[0], s[1], s[2], s[3]}});
    }
    return out;
}

}  // namespace

template <class T>
class SolverByField : public ::testing::Test {};
using SolverTypes = ::testing::Types<double, Complex, Quaternion>;
TYPED_TEST_SUITE(SolverByField, SolverTypes);

TYPED_TEST(SolverByField, GradientMatchesFiniteDifferences) {
    using T = TypeParam;
    std::mt19937_64 rng(99);
    for (int n = 0; n < 20; ++n) {
        const auto problem = random_problem<T>(rng);
        const Eigen::VectorXd theta = random_point(problem, rng);
        EXPECT_LT(gradient_relative_error(problem, theta), 1e-4) << "instance " << n;
    }
}

TYPED_TEST(SolverByField, SingleEntryIsTrivial) {
    using T = TypeParam;
    ZeroPattern p(1, 1);
    p.set(0, 0);
    const SolveReport r = find_representation<T>(p, SolveOptions{});
    ASSERT_EQ(r.status, SolveStatus::Found);
    EXPECT_LT(r.best_residual, 1e-12);
    EXPECT_NEAR(magnitude_of(std::get<Matrix<T>>(*r.witness)(0, 0)), 1.0, 1e-9);
}

TYPED_TEST(SolverByField, CoreWitnessNormalizesToM) {
    using T = TypeParam;
    SolveOptions opts;
    opts.seed = 5;
    const SolveReport r = find_representation<T>(fano_pattern(7), opts);
    ASSERT_EQ(r.status, SolveStatus::Found);
    const auto trace = normalize_to_canonical(std::get<Matrix<T>>(*r.witness));
    EXPECT_LT(max_abs_difference(trace.b_final, cast_matrix<T>(fano_m())), 1e-6);
}

TYPED_TEST(SolverByField, FoundWitnessesPassVerification) {
    using T = TypeParam;
    const auto seed = seed_pattern(FieldTag::Complex);
    for (std::uint64_t s = 0; s < 3; ++s) {
        SolveOptions opts;
        opts.seed = s;
        opts.democracies = seed.democracies;
        const SolveReport r = find_representation<T>(seed.pattern, opts);
        if (r.status != SolveStatus::Found) continue;
        EXPECT_TRUE(verify_witness(*r.witness, seed.pattern, seed.democracies).passed());
        EXPECT_GE(r.min_star_magnitude, opts.star_floor);
    }
}

TYPED_TEST(SolverByField, LossIgnoresColumnPhases) {
    using T = TypeParam;
    std::mt19937_64 rng(17);
    const ZeroPattern p = fano_pattern(7);
    SolveOptions opts;
    opts.democracies = per_column_democracies(p);
    const RepresentationProblem<T> problem(p, opts);
    for (int n = 0; n < 10; ++n) {
        const Eigen::VectorXd theta = random_point(problem, rng);
        Matrix<T> a = problem.assemble(theta);
        const std::size_t c = rng() % 7;
        const T u = random_unit<T>(rng);
        for (std::size_t r = 0; r < 7; ++r) a(r, c) = T(a(r, c) * u);
        EXPECT_NEAR(problem.loss(problem.parameters_of(a)), problem.loss(theta), 1e-12);
    }
}

TYPED_TEST(SolverByField, SquareCompletionKeepsColumnsAndIsUnitary) {
    using T = TypeParam;
    std::mt19937_64 rng(23);
    Matrix<T> a(7, 3);
    const Matrix<T> half = cast_matrix<T>(fano_matrix(7));
    for (std::size_t c = 0; c < 3; ++c) {
        const T u = random_unit<T>(rng);
        for (std::size_t r = 0; r < 7; ++r) a(r, c) = T(half(r, c) * u);
    }
    const Matrix<T> u = complete_to_square(a);
    EXPECT_LT(unitarity_residual(u), 1e-8);
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(u(r, c), a(r, c));
    EXPECT_NO_THROW(pattern_of(u));
}

TEST(Solver, DeterministicAcrossWorkerCounts) {
    const auto seed = seed_pattern(FieldTag::Quat);
    SolveOptions opts;
    opts.democracies = seed.democracies;
    opts.restarts = 6;
    opts.stop_on_found = false;
    opts.seed = 42;
    opts.jobs = 1;
    const SolveReport one = find_representation(seed.pattern, FieldTag::Quat, opts);
    opts.jobs = 4;
    const SolveReport four = find_representation(seed.pattern, FieldTag::Quat, opts);
    EXPECT_EQ(solve_report_to_json(one).dump(), solve_report_to_json(four).dump());
}

TEST(Solver, StopOnFoundIsIndependentOfWorkers) {
    SolveOptions opts;
    opts.seed = 8;
    opts.jobs = 1;
    const SolveReport one = find_representation(fano_pattern(7), FieldTag::Real, opts);
    opts.jobs = 3;
    const SolveReport three = find_representation(fano_pattern(7), FieldTag::Real, opts);
    EXPECT_EQ(solve_report_to_json(one).dump(), solve_report_to_json(three).dump());
}

TEST(Solver, RealSearchOnComplexSeedIsStronglyInfeasible) {
    const auto seed = seed_pattern(FieldTag::Complex);
    SolveOptions opts;
    opts.democracies = seed.democracies;
    opts.restarts = 16;
    const SolveReport r = find_representation(seed.pattern, FieldTag::Real, opts);
    EXPECT_EQ(r.status, SolveStatus::Exhausted);
    EXPECT_TRUE(r.strongly_infeasible);
    EXPECT_EQ(r.restart_residuals.size(), 16u);
}

TEST(Solver, RejectsBadOptions) {
    const ZeroPattern f = fano_pattern(7);
    SolveOptions frozen_zero;
    frozen_zero.frozen.push_back({0, 1, Scalar(1.0)});  // (0,1) is ZERO
    EXPECT_THROW(find_representation(f, FieldTag::Real, frozen_zero), std::invalid_argument);

    SolveOptions bad_democracy;
    bad_democracy.democracies.push_back({0, {0, 1, 2, 3}});  // (3,0) is ZERO
    EXPECT_THROW(find_representation(f, FieldTag::Real, bad_democracy), std::invalid_argument);

    SolveOptions bad_tol;
    bad_tol.residual_tol = 1e-2;
    EXPECT_THROW(find_representation(f, FieldTag::Real, bad_tol), std::invalid_argument);

    EXPECT_THROW(find_representation(f, FieldTag::Rat, SolveOptions{}), std::invalid_argument);
}

TEST(Solver, FrozenEntriesStayFixed) {
    const ZeroPattern f = fano_pattern(7);
    SolveOptions opts;
    opts.frozen.push_back({0, 0, Scalar(-0.5)});
    opts.frozen.push_back({1, 0, Scalar(0.5)});
    const SolveReport r = find_representation(f, FieldTag::Real, opts);
    ASSERT_EQ(r.status, SolveStatus::Found);
    const auto& w = std::get<Matrix<double>>(*r.witness);
    EXPECT_EQ(w(0, 0), -0.5);
    EXPECT_EQ(w(1, 0), 0.5);
}

TEST(SquareCompletion, IdentityColumn) {
    Matrix<double> a(2, 1);
    a(0, 0) = 1.0;
    const Matrix<double> u = complete_to_square(a);
    EXPECT_LT(std::abs(u(0, 1)), 1e-12);
    EXPECT_NEAR(std::abs(u(1, 1)), 1.0, 1e-12);
}

TEST(SquareCompletion, SquareInputIsReturnedUnchanged) {
    const RepMatrix half = fano_matrix(7);
    EXPECT_EQ(std::get<Matrix<Rational>>(complete_to_square(half)), fano_matrix(7));
    const Matrix<double> d = cast_matrix<double>(fano_matrix(7));
    EXPECT_EQ(complete_to_square(d), d);
}

TEST(SquareCompletion, RejectsNonOrthonormalInput) {
    Matrix<double> a(3, 2);
    a(0, 0) = a(0, 1) = 1.0;
    EXPECT_THROW(complete_to_square(a), std::invalid_argument);
}

TEST(Verify, HalfCoreWithColumnDemocraciesPassesExactly) {
    const ZeroPattern f = fano_pattern(7);
    const WitnessVerdict v = verify_witness(fano_matrix(7), f, per_column_democracies(f));
    EXPECT_TRUE(v.exact);
    EXPECT_TRUE(v.passed());
}

TEST(Verify, IdentityFailsThePattern) {
    const WitnessVerdict v = verify_witness(Matrix<Rational>::identity(7), fano_pattern(7), {});
    EXPECT_FALSE(v.pattern_ok);
    EXPECT_TRUE(v.orthogonality_ok);
    EXPECT_FALSE(v.passed());
}

TEST(Verify, PerturbationBreaksOrthogonality) {
    Matrix<double> a = cast_matrix<double>(fano_matrix(7));
    a(0, 0) += 1e-3;
    const WitnessVerdict v = verify_witness(a, fano_pattern(7), {});
    EXPECT_TRUE(v.pattern_ok);
    EXPECT_FALSE(v.orthogonality_ok);
    EXPECT_GT(v.orthogonality_residual, 1e-9);
}

TEST(Verify, DimensionMismatchThrows) {
    EXPECT_THROW(verify_witness(Matrix<double>(3, 3), fano_pattern(7), {}), std::invalid_argument);
}
