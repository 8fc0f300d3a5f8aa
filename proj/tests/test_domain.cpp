#include <gtest/gtest.h>

#include <set>

#include <bbp/combinatorics.hpp>
#include <bbp/domain.hpp>
#include <bbp/numeric.hpp>

using namespace bbp;

namespace {
template<class F>
ErrorCode code_of(F&& f)
{
    try
    {
        f();
    }
    catch (Error const& e)
    {
        return e.code();
    }
    ADD_FAILURE() << "no bbp::Error thrown";
    return ErrorCode::InvalidArgument;
}
}  // namespace

TEST(Domain, LabelsMapToIndices)
{
    Domain d({"a", "b", "c"});
    EXPECT_EQ(d.size(), 3u);
    for (std::size_t i = 0; i < d.size(); ++i)
        EXPECT_EQ(d.index_of(d.label(i)), i);
    EXPECT_TRUE(d.contains("b"));
    EXPECT_EQ(code_of([&] { d.index_of("z"); }), ErrorCode::TokenUnknown);
}

TEST(Domain, RejectsDuplicatesAndEmpty)
{
    EXPECT_THROW(Domain({"a", "a"}), Error);
    EXPECT_THROW(Domain(std::vector<std::string>{}), Error);
    EXPECT_EQ(Domain::indexed(3).label(2), "2");
}

TEST(Distribution, ExactSumMustBeOne)
{
    EXPECT_NO_THROW(Distribution<Rational>({Rational(1, 3), Rational(2, 3)}));
    EXPECT_EQ(code_of([] { Distribution<Rational>({Rational(1, 3), Rational(1, 3)}); }), ErrorCode::InvalidDistribution);
    EXPECT_EQ(code_of([] { Distribution<Rational>({Rational(-1, 3), Rational(4, 3)}); }),
              ErrorCode::InvalidDistribution);
}

TEST(Distribution, FloatToleranceAndRenormalization)
{
    Distribution<double> p({0.3, 0.7 + 1e-13});
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
    EXPECT_THROW(Distribution<double>({0.3, 0.7 + 1e-9}), Error);
    EXPECT_THROW(Distribution<double>({-0.1, 1.1}), Error);
}

TEST(Empirical, Examples)
{
    auto a = empirical<Rational>(Histogram{1, 1});
    EXPECT_EQ(a[0], Rational(1, 2));
    EXPECT_EQ(a[1], Rational(1, 2));
    auto b = empirical<Rational>(Histogram{2, 0});
    EXPECT_EQ(b[0], Rational(1));
    EXPECT_EQ(b[1], Rational(0));
    auto c = empirical<Rational>(Histogram{3, 1, 0});
    EXPECT_EQ(c[0], Rational(3, 4));
    EXPECT_EQ(c[1], Rational(1, 4));
    EXPECT_EQ(c[2], Rational(0));
    EXPECT_EQ(code_of([] { empirical<Rational>(Histogram{0, 0}); }), ErrorCode::EmptyHistogram);
}

TEST(Empirical, ExactForEveryHistogram)
{
    for (Count n = 1; n <= 6; ++n)
    {
        for_each_composition(n, 3, [&](std::span<Count const> c) {
            Histogram h(std::vector<Count>(c.begin(), c.end()));
            auto p = empirical<Rational>(h);
            Rational sum(0);
            for (std::size_t x = 0; x < 3; ++x)
            {
                EXPECT_EQ(p[x] * Rational(n), Rational(h[x]));
                sum += p[x];
            }
            EXPECT_EQ(sum, Rational(1));
        });
    }
}

TEST(Indicator, Examples)
{
    auto a = indicator<Rational>(0, 2);
    EXPECT_EQ(a[0], Rational(1));
    EXPECT_EQ(a[1], Rational(0));
    auto b = indicator<Rational>(2, 3);
    EXPECT_EQ(b[2], Rational(1));
    EXPECT_EQ(b[0] + b[1], Rational(0));
    EXPECT_EQ(code_of([] { indicator<Rational>(3, 2); }), ErrorCode::IndexOutOfRange);
}

TEST(Histogram, ComplementAndTotal)
{
    Histogram h{4, 0, 3};
    EXPECT_EQ(h.total(), 7);
    for (std::size_t x = 0; x < h.size(); ++x)
        EXPECT_EQ(h.complement(x), h.total() - h[x]);
    h.add(1, 2);
    EXPECT_EQ(h.total(), 9);
    EXPECT_THROW(Histogram({1, -1}), Error);
}

TEST(SamplingScheme, Validation)
{
    EXPECT_TRUE(SamplingScheme::fixed(3).is_fixed());
    EXPECT_EQ(SamplingScheme::fixed(3).n(), 3);
    EXPECT_TRUE(SamplingScheme::poisson(2.5).is_poisson());
    EXPECT_DOUBLE_EQ(SamplingScheme::poisson(2.5).rate(), 2.5);
    EXPECT_THROW(SamplingScheme::fixed(0), Error);
    EXPECT_THROW(SamplingScheme::poisson(0.0), Error);
    EXPECT_THROW(SamplingScheme::poisson(-1.0), Error);
}

TEST(Numeric, ParseScalar)
{
    EXPECT_EQ(parse_scalar<Rational>("1/3"), Rational(1, 3));
    EXPECT_EQ(parse_scalar<Rational>("0.1"), Rational(1, 10));
    EXPECT_EQ(parse_scalar<Rational>("-2.5"), Rational(-5, 2));
    EXPECT_DOUBLE_EQ(parse_scalar<double>("0.25"), 0.25);
    EXPECT_DOUBLE_EQ(parse_scalar<double>("3/4"), 0.75);
    EXPECT_THROW(parse_scalar<double>("abc"), Error);
    EXPECT_THROW(parse_scalar<Rational>("1/0"), Error);
    EXPECT_EQ(format_scalar(Rational(3, 4)), "3/4");
}

TEST(Compositions, CountMatchesEnumerationAndIsUnique)
{
    for (std::size_t d = 1; d <= 4; ++d)
    {
        for (Count n = 0; n <= 6; ++n)
        {
            std::set<std::vector<Count>> seen;
            for_each_composition(n, d, [&](std::span<Count const> c) {
                Count sum = 0;
                for (auto v : c)
                    sum += v;
                EXPECT_EQ(sum, n);
                seen.emplace(c.begin(), c.end());
            });
            EXPECT_EQ(seen.size(), composition_count(n, d));
        }
    }
    EXPECT_EQ(composition_count(4, 3), 15u);
}

TEST(Compositions, SimplexGridIsValid)
{
    auto grid = simplex_grid<Rational>(3, 4);
    EXPECT_EQ(grid.size(), 15u);
    for (auto const& p : grid)
        EXPECT_EQ(p[0] + p[1] + p[2], Rational(1));
}
