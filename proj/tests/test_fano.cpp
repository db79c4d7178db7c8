#include <complex>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "support.hpp"
#include "zpat/fano.hpp"

using namespace zpat;
using zpat::testing::random_unit;

namespace {

// Euler's criterion, independent of the squaring table in the library.
std::set<long> residues_by_euler(long p) {
    std::set<long> out;
    for (long a = 1; a < p; ++a) {
        long acc = 1;
        for (long e = 0; e < (p - 1) / 2; ++e) acc = acc * a % p;
        if (acc == 1) out.insert(a);
    }
    return out;
}

template <class T>
Matrix<T> scale_rows_and_columns(const Matrix<T>& a, std::mt19937_64& rng) {
    std::vector<T> u(a.rows()), d(a.cols());
    for (auto& x : u) x = random_unit<T>(rng);
    for (auto& x : d) x = T(random_unit<T>(rng) * std::uniform_real_distribution<double>(0.5, 2.0)(rng));
    Matrix<T> out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = T(u[r] * a(r, c) * d[c]);
    return out;
}

}  // namespace

TEST(Primes, AcceptsOnlyThreeModFour) {
    for (long p : {3, 7, 11, 19, 23, 31, 43}) EXPECT_NO_THROW(validate_fano_prime(p)) << p;
    for (long p : {2, 5, 9, 13, 15, 21}) EXPECT_THROW(validate_fano_prime(p), std::invalid_argument) << p;
    EXPECT_THROW(fano_matrix(47), std::invalid_argument);  // above the default cap
    EXPECT_NO_THROW(fano_matrix(47, 47));
}

TEST(QuadraticResidues, MatchEulerCriterion) {
    for (long p : {3, 7, 11, 19, 23, 31, 43}) {
        const auto qr = quadratic_residues(p);
        std::set<long> got;
        for (long r = 0; r < p; ++r)
            if (qr[static_cast<std::size_t>(r)]) got.insert(r);
        EXPECT_EQ(got, residues_by_euler(p)) << p;
    }
    EXPECT_EQ(residues_by_euler(11), (std::set<long>{1, 3, 4, 5, 9}));
}

TEST(FanoMatrix, HalfOfTheIntegerCore) {
    const Matrix<Rational> half = fano_matrix(7);
    const Matrix<Rational> m = fano_m();
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t c = 0; c < 7; ++c) EXPECT_EQ(2 * half(r, c), m(r, c));
}

TEST(FanoMatrix, ExactOrthogonalityForEveryPrime) {
    for (long p : {3, 7, 11, 19, 23, 31, 43}) EXPECT_TRUE(is_exactly_identity(gram(fano_matrix(p)))) << p;
}

TEST(FanoMatrix, ElevenByElevenGramByHand) {
    // k = 3: diagonal -2/3, residues 1/3, column norm 4/9 + 5/9 = 1.
    const Matrix<Rational> a = fano_matrix(11);
    EXPECT_EQ(a(0, 0), Rational(-2, 3));
    EXPECT_EQ(a(1, 0), Rational(1, 3));  // 1 is a residue
    EXPECT_EQ(a(2, 0), Rational(0));     // 2 is not
    Rational g01 = 0;
    for (std::size_t r = 0; r < 11; ++r) g01 += a(r, 0) * a(r, 1);
    EXPECT_EQ(g01, 0);
}

TEST(FanoPattern, CirculantRuleForSeven) {
    const ZeroPattern f = fano_pattern(7);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) {
            const long d = ((static_cast<long>(i) - static_cast<long>(j)) % 7 + 7) % 7;
            EXPECT_EQ(f.star(i, j), d == 0 || d == 1 || d == 2 || d == 4) << i << "," << j;
        }
}

TEST(FanoPattern, StarCountsPerColumn) {
    for (long p : {7, 11, 19, 23}) {
        const ZeroPattern f = fano_pattern(p);
        for (std::size_t c = 0; c < f.cols(); ++c) {
            EXPECT_TRUE(f.star(c, c));
            EXPECT_EQ(f.support(c).size(), static_cast<std::size_t>((p + 1) / 2));
        }
    }
    // p = 3: the diagonal entry (1 - k)/k vanishes.
    const ZeroPattern f3 = fano_pattern(3);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(f3.support(c).size(), 1u);
}

TEST(Normalize, HalfCoreGoesToMExactly) {
    const auto trace = normalize_to_canonical(fano_matrix(7));
    EXPECT_EQ(trace.b_final, fano_m());
    EXPECT_TRUE(claim_relations_hold(trace));
    for (const auto& x : trace.x) EXPECT_EQ(x, 1);
    EXPECT_EQ(trace.u_factors.size(), 6u);
    EXPECT_EQ(trace.d_factors.size(), 7u);
}

TEST(Normalize, RejectsWrongInputs) {
    EXPECT_THROW(normalize_to_canonical(Matrix<Rational>::identity(7)), std::invalid_argument);
    Matrix<Rational> skew = fano_m();
    skew(0, 0) = -2;  // same pattern, columns no longer orthogonal
    EXPECT_THROW(normalize_to_canonical(skew), std::invalid_argument);
    EXPECT_THROW(normalize_to_canonical(Matrix<double>(6, 6)), std::invalid_argument);
}

template <class T>
class NormalizeProperty : public ::testing::Test {};
using NormalizeTypes = ::testing::Types<double, Complex, Quaternion>;
TYPED_TEST_SUITE(NormalizeProperty, NormalizeTypes);

TYPED_TEST(NormalizeProperty, UndoesRandomRowAndColumnScalings) {
    using T = TypeParam;
    std::mt19937_64 rng(7);
    const Matrix<T> m = cast_matrix<T>(fano_m());
    for (int n = 0; n < 25; ++n) {
        const Matrix<T> a = scale_rows_and_columns(cast_matrix<T>(fano_matrix(7)), rng);
        const auto trace = normalize_to_canonical(a);
        EXPECT_LT(max_abs_difference(trace.b_final, m), 1e-12);
        EXPECT_LT(claim_relation_defect(trace), 1e-12);
    }
}

TEST(LogSystem, CirculantRowsAndNonzeroDeterminant) {
    const Matrix<Rational> l = fano_log_system();
    const int first[7] = {-1, -1, -1, 1, -1, 1, 1};
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(l(0, j), first[j]);
    for (std::size_t i = 1; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(l(i, j), l(i - 1, (j + 6) % 7));

    // Independent oracle: a circulant's determinant is the product of its
    // symbol at the 7th roots of unity.
    std::complex<double> det = 1.0;
    for (int k = 0; k < 7; ++k) {
        std::complex<double> s = 0.0;
        for (int j = 0; j < 7; ++j) s += double(first[j]) * std::polar(1.0, 2.0 * std::numbers::pi * j * k / 7.0);
        det *= s;
    }
    const Rational exact = exact_determinant(l);
    EXPECT_NE(exact, 0);
    EXPECT_NEAR(to_double(exact), det.real(), 1e-8);
    EXPECT_NEAR(det.imag(), 0.0, 1e-8);
}

TEST(ExactDeterminant, SmallCases) {
    Matrix<Rational> a(2, 2);
    a(0, 1) = 2;
    a(1, 0) = 3;
    EXPECT_EQ(exact_determinant(a), -6);
    EXPECT_EQ(exact_determinant(Matrix<Rational>::identity(5)), 1);
    EXPECT_EQ(exact_determinant(Matrix<Rational>(3, 3)), 0);
}

TEST(Rigidity, SevenIsRigidOverEveryField) {
    for (FieldTag f : {FieldTag::Real, FieldTag::Complex, FieldTag::Quat}) {
        RigidityOptions opts;
        opts.seed = 3;
        const RigidityReport r = rigidity_probe(7, f, 12, opts);
        EXPECT_GT(r.found, 0u) << to_string(f);
        EXPECT_EQ(r.verdict, "rigid-so-far") << to_string(f);
        ASSERT_EQ(r.clusters.size(), 1u);
        EXPECT_LT(r.clusters[0].distance_to_fano, 1e-6);
    }
}

TEST(Rigidity, ThreeIsAPermutation) {
    const RigidityReport r = rigidity_probe(3, FieldTag::Complex, 5);
    EXPECT_EQ(r.found, 5u);
    EXPECT_EQ(r.verdict, "rigid-so-far");
}

TEST(Rigidity, ReportJsonShape) {
    const json j = rigidity_report_to_json(rigidity_probe(7, FieldTag::Real, 4));
    EXPECT_EQ(j["p"], 7);
    EXPECT_EQ(j["field"], "REAL");
    EXPECT_TRUE(j["clusters"].is_array());
    EXPECT_TRUE(j.contains("verdict"));
}
