#include <random>
#include <string>

#include <gtest/gtest.h>

#include "zpat/fano.hpp"
#include "zpat/json_io.hpp"
#include "zpat/pattern.hpp"

using namespace zpat;

namespace {

ZeroPattern random_pattern(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double density) {
    std::bernoulli_distribution star(density);
    ZeroPattern p(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) p.set(r, c, star(rng));
    return p;
}

}  // namespace

TEST(PatternText, ParsesGridAndDemocracies) {
    const auto cp = parse_pattern("**\n**\n**\n*0\n0*\nD 0 0 1 2 3\nD 1 0 1 2 4\n");
    EXPECT_EQ(cp.pattern.rows(), 5u);
    EXPECT_EQ(cp.pattern.cols(), 2u);
    EXPECT_FALSE(cp.pattern.star(3, 1));
    EXPECT_TRUE(cp.pattern.star(4, 1));
    ASSERT_EQ(cp.democracies.size(), 2u);
    EXPECT_EQ(cp.democracies[1].column, 1u);
    EXPECT_EQ(cp.democracies[1].rows, (std::array<std::size_t, 4>{0, 1, 2, 4}));
}

TEST(PatternText, ToleratesBlankLinesAndCrlf) {
    const auto cp = parse_pattern("\r\n*0\r\n\r\n0*\r\n");
    EXPECT_EQ(cp.pattern.rows(), 2u);
    EXPECT_TRUE(cp.pattern.star(1, 1));
}

TEST(PatternText, RejectsMalformedInput) {
    EXPECT_THROW(parse_pattern(""), std::invalid_argument);
    EXPECT_THROW(parse_pattern("*0\n*\n"), std::invalid_argument);             // ragged
    EXPECT_THROW(parse_pattern("*x\n"), std::invalid_argument);                // bad character
    EXPECT_THROW(parse_pattern("**\n**\n**\n*0\nD 1 0 1 2 3\n"), std::invalid_argument);  // names a ZERO
    EXPECT_THROW(parse_pattern("*\n*\n*\n*\nD 0 0 1 1 2\n"), std::invalid_argument);      // repeated row
    EXPECT_THROW(parse_pattern("*\n*\n*\n*\nD 0 0 1 2\n"), std::invalid_argument);        // too few rows
    EXPECT_THROW(parse_pattern("*\n*\n*\n*\nD 0 0 1 2 3\n*\n"), std::invalid_argument);   // grid after D
    EXPECT_THROW(parse_pattern("*\n*\n*\n*\nD 0 0 1 2 9\n"), std::invalid_argument);      // out of range
}

TEST(PatternText, SerializeParseRoundTripProperty) {
    std::mt19937_64 rng(2024);
    for (int n = 0; n < 100; ++n) {
        const std::size_t rows = 1 + rng() % 9, cols = 1 + rng() % 9;
        ConstrainedZeroPattern cp{random_pattern(rng, rows, cols, 0.6), {}};
        for (std::size_t c = 0; c < cols; ++c) {
            const auto supp = cp.pattern.support(c);
            if (supp.size() >= 4 && rng() % 2) cp.democracies.push_back({c, {supp[0], supp[1], supp[2], supp[3]}});
        }
        EXPECT_EQ(parse_pattern(serialize_pattern(cp)), cp);
    }
}

TEST(MutualSupport, IntersectsColumns) {
    const auto p = parse_pattern("**\n*0\n0*\n**\n").pattern;
    EXPECT_EQ(mutual_support(p, 0, 1), (std::vector<std::size_t>{0, 3}));
    EXPECT_THROW(mutual_support(p, 0, 0), std::invalid_argument);
    EXPECT_THROW(mutual_support(p, 0, 5), std::invalid_argument);
}

TEST(MutualSupport, EmptyForDisjointColumns) {
    const auto p = parse_pattern("*0\n0*\n").pattern;
    EXPECT_TRUE(mutual_support(p, 0, 1).empty());
}

TEST(BipartiteDouble, BlockStructureOfTheCore) {
    const ZeroPattern f = fano_pattern(7);
    const ZeroPattern d = bipartite_double(f);
    ASSERT_EQ(d.rows(), 14u);
    EXPECT_EQ(d, d.transpose());
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t c = 0; c < 7; ++c) {
            EXPECT_FALSE(d.star(r, c));
            EXPECT_FALSE(d.star(7 + r, 7 + c));
            EXPECT_EQ(d.star(r, 7 + c), f.star(r, c));
        }
}

TEST(MatchesPattern, UsesBothThresholds) {
    Matrix<double> a(1, 3);
    a(0, 0) = 0.5;
    a(0, 1) = 1e-9;
    a(0, 2) = 2e-3;
    ZeroPattern p(1, 3);
    p.set(0, 0);
    p.set(0, 2);
    EXPECT_TRUE(matches_pattern(a, p));
    a(0, 2) = 5e-4;  // in the gap
    EXPECT_FALSE(matches_pattern(a, p));
    EXPECT_THROW(pattern_of(a), std::runtime_error);
}

TEST(MatchesPattern, ExactForRationals) {
    Matrix<Rational> a(1, 2);
    a(0, 0) = Rational(1, 1000000000);
    ZeroPattern p(1, 2);
    p.set(0, 0);
    EXPECT_TRUE(matches_pattern(a, p));
    EXPECT_EQ(pattern_of(a), p);
}

TEST(Democracy, SpreadAndExactCheck) {
    Matrix<Complex> a(4, 1);
    a(0, 0) = 1.0;
    a(1, 0) = Complex(0, 1);
    a(2, 0) = Complex(0.6, 0.8);
    a(3, 0) = 1.0 + 1e-4;
    const Democracy d{0, {0, 1, 2, 3}};
    EXPECT_NEAR(democracy_spread(a, d), 1e-4, 1e-12);
    EXPECT_FALSE(democracy_satisfied(a, d));
    EXPECT_TRUE(democracy_satisfied(a, d, 1e-3));

    Matrix<Rational> q(4, 1);
    for (std::size_t r = 0; r < 4; ++r) q(r, 0) = r % 2 ? Rational(1, 2) : Rational(-1, 2);
    EXPECT_TRUE(democracy_satisfied(q, d));
}

TEST(HermitianDouble, ExactForTheHalfCore) {
    const Matrix<Rational> h = hermitian_double(fano_matrix(7));
    EXPECT_EQ(h, adjoint(h));
    EXPECT_TRUE(is_exactly_identity(h * h));
    EXPECT_EQ(pattern_of(h), bipartite_double(fano_pattern(7)));
}

TEST(HermitianDouble, RejectsNonUnitary) {
    Matrix<Rational> a(2, 2);
    a(0, 0) = 1;
    a(0, 1) = 1;
    a(1, 1) = 1;
    EXPECT_THROW(hermitian_double(a), std::invalid_argument);
}

TEST(MatrixJson, RoundTripsAllTags) {
    Matrix<Quaternion> q(1, 2);
    q(0, 0) = Quaternion(1, 2, 3, 4);
    q(0, 1) = Quaternion::k();
    const RepMatrix back = matrix_from_json(matrix_to_json(q));
    EXPECT_EQ(std::get<Matrix<Quaternion>>(back), q);

    const RepMatrix m = matrix_from_json(matrix_to_json(fano_matrix(7)));
    EXPECT_EQ(std::get<Matrix<Rational>>(m), fano_matrix(7));

    EXPECT_THROW(matrix_from_json(json{{"tag", "REAL"}, {"rows", 2}, {"cols", 2}, {"data", {1.0}}}),
                 std::invalid_argument);
    EXPECT_THROW(matrix_from_json(json{{"tag", "OCT"}, {"rows", 1}, {"cols", 1}, {"data", {1.0}}}),
                 std::invalid_argument);
}
