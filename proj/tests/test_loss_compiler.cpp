#include <gtest/gtest.h>

#include <cmath>

#include <bbp/exact_verifier.hpp>
#include <bbp/loss_compiler.hpp>

#include "oracles.hpp"

using namespace bbp;

namespace {
Distribution<Rational> rq(Rational a) { return Distribution<Rational>({a, Rational(1) - a}); }
Distribution<Rational> half() { return rq(Rational(1, 2)); }

std::vector<Histogram> all_histograms(std::size_t d, Count n)
{
    std::vector<Histogram> out;
    for_each_composition(n, d, [&](std::span<Count const> c) { out.emplace_back(std::vector<Count>(c.begin(), c.end())); });
    return out;
}
}  // namespace

TEST(CompileBb, L2Examples)
{
    auto loss = compile_bb(builtin_l2<Rational>(2), 2, 2);
    EXPECT_EQ(loss(Histogram{2, 0}, Histogram{0, 2}), Rational(2));
    EXPECT_EQ(loss(Histogram{1, 1}, Histogram{1, 1}), Rational(-1));
    EXPECT_TRUE(loss.scheme_p() == SamplingScheme::fixed(2));
    EXPECT_THROW(loss(Histogram{1, 0}, Histogram{1, 1}), Error);
}

TEST(CompileBb, DegreeGateNamesRequiredSizes)
{
    try
    {
        compile_bb(builtin_l2<Rational>(2), 1, 2);
        FAIL();
    }
    catch (DegreeGateError const& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::DegreeGate);
        EXPECT_EQ(e.n_required(), 2);
        EXPECT_EQ(e.m_required(), 2);
        EXPECT_NE(std::string(e.what()).find("n >= 2"), std::string::npos);
    }
}

TEST(CompileBb, GateIsTightForBuiltins)
{
    for (auto const& ell : {builtin_l2<Rational>(2), builtin_lk_even<Rational>(2, 4), builtin_brier<Rational>(3)})
    {
        EXPECT_NO_THROW(compile_bb(ell, ell.deg_p(), ell.deg_q()));
        EXPECT_THROW(compile_bb(ell, ell.deg_p() - 1, ell.deg_q()), DegreeGateError);
        EXPECT_THROW(compile_bb(ell, ell.deg_p(), ell.deg_q() - 1), DegreeGateError);
    }
}

TEST(CompileBb, ImplementsBuiltinsOnGrids)
{
    // expectation by ordered-sequence enumeration on both sides
    for (auto const& ell : {builtin_l2<Rational>(2), builtin_brier<Rational>(2)})
    {
        for (int n = ell.deg_p(); n <= 3; ++n)
            for (int m = ell.deg_q(); m <= 3; ++m)
            {
                auto loss = compile_bb(ell, n, m);
                for (auto const& p : simplex_grid<Rational>(2, 4))
                    for (auto const& q : simplex_grid<Rational>(2, 4))
                    {
                        std::vector<Rational> pv(p.probs().begin(), p.probs().end());
                        std::vector<Rational> qv(q.probs().begin(), q.probs().end());
                        Rational e = oracle::sequence_expectation(pv, n, [&](auto const& hp) {
                            return oracle::sequence_expectation(qv, m, [&](auto const& hq) {
                                return loss(Histogram(hp), Histogram(hq));
                            });
                        });
                        EXPECT_EQ(e, ell.evaluate(p, q)) << ell.name() << " n=" << n << " m=" << m;
                    }
            }
    }
}

TEST(CompileBb, BrierExpectation)
{
    auto loss = compile_bb(builtin_brier<Rational>(2), 2, 1);
    EXPECT_EQ(exact_expected_loss(loss, rq(Rational(1, 4)), half()), Rational(-3, 8));
}

TEST(CompileRbb, Examples)
{
    auto loss = compile_rbb(builtin_l2<Rational>(2), 2);
    EXPECT_EQ(loss(Histogram{1, 1}, half()), Rational(-1, 2));
    EXPECT_EQ(loss(Histogram{2, 0}, half()), Rational(1, 2));
    EXPECT_EQ(exact_expected_loss_rbb(loss, half(), half(), 2), Rational(0));
    EXPECT_THROW(compile_rbb(builtin_l2<Rational>(2), 1), DegreeGateError);
}

TEST(SquaredLossRbb, Examples)
{
    auto loss = squared_loss_rbb<Rational>(2);
    EXPECT_EQ(loss(Histogram{1, 1}, half()), Rational(-1, 2));
    EXPECT_EQ(loss(Histogram{2, 0}, rq(Rational(1))), Rational(0));
    EXPECT_EQ(loss(Histogram{2, 0}, half()), Rational(1, 2));
    EXPECT_THROW(squared_loss_rbb<Rational>(1), Error);
}

TEST(SquaredLossRbb, AgreesWithCompiledLossPointwise)
{
    for (std::size_t d = 2; d <= 3; ++d)
    {
        auto ell = builtin_l2<Rational>(d);
        for (int n = 2; n <= 5; ++n)
        {
            auto closed = squared_loss_rbb<Rational>(n);
            auto compiled = compile_rbb(ell, n);
            for (auto const& q : simplex_grid<Rational>(d, 3))
                for (auto const& h : all_histograms(d, n))
                    EXPECT_EQ(closed(h, q), compiled(h, q));
        }
    }
}

TEST(SquaredLossBb, Examples)
{
    auto loss = squared_loss_bb<Rational>(2, 2);
    EXPECT_EQ(loss(Histogram{2, 0}, Histogram{0, 2}), Rational(2));
    EXPECT_EQ(loss(Histogram{1, 1}, Histogram{1, 1}), Rational(-1));
    EXPECT_EQ(exact_expected_loss(loss, half(), half()), Rational(0));
    EXPECT_THROW(squared_loss_bb<Rational>(1, 2), Error);
}

TEST(SquaredLossBb, AgreesWithCompiledLossPointwise)
{
    for (std::size_t d = 2; d <= 3; ++d)
    {
        auto ell = builtin_l2<Rational>(d);
        for (int n = 2; n <= 4; ++n)
            for (int m = 2; m <= 4; ++m)
            {
                auto closed = squared_loss_bb<Rational>(n, m);
                auto compiled = compile_bb(ell, n, m);
                for (auto const& hp : all_histograms(d, n))
                    for (auto const& hq : all_histograms(d, m))
                        EXPECT_EQ(closed(hp, hq), compiled(hp, hq));
            }
    }
}

TEST(SquaredLossBb, SparseCostIndependentOfDomainSize)
{
    std::vector<Count> p(1000, 0), q(1000, 0);
    p[3] = 2;
    p[700] = 1;
    q[3] = 1;
    q[999] = 2;
    auto r = squared_loss_bb_sparse<Rational>(SparseCounts::from(Histogram(p)), SparseCounts::from(Histogram(q)), 3, 3);
    EXPECT_LE(r.coordinates_visited, 6u);
    EXPECT_EQ(r.value, compile_bb(builtin_l2<Rational>(1000), 3, 3)(Histogram(p), Histogram(q)));
}

TEST(Losses, DependOnlyOnCounts)
{
    // the same multiset of draws in any order gives one histogram, hence one value
    std::vector<std::size_t> draws{0, 2, 2, 1};
    auto loss = compile_bb(builtin_lk_even<Rational>(3, 4), 4, 4);
    std::sort(draws.begin(), draws.end());
    std::optional<Rational> first;
    do
    {
        Histogram h = Histogram::zero(3);
        for (auto x : draws)
            h.add(x);
        Rational v = loss(h, Histogram{1, 1, 2});
        if (!first)
            first = v;
        EXPECT_EQ(v, *first);
    } while (std::next_permutation(draws.begin(), draws.end()));
}

TEST(CrossEntropyPoisson, Examples)
{
    auto loss = cross_entropy_poisson<Rational>(Rational(4), Rational(2));
    EXPECT_EQ(loss(Histogram{3, 1}, Histogram{1, 1}), Rational(39, 64));
    EXPECT_EQ(loss(Histogram{5, 2}, Histogram{0, 0}), Rational(0));
    auto fixed = cross_entropy_poisson_fixed_q<Rational>(Rational(4), 2);
    EXPECT_EQ(fixed(Histogram{3, 1}, Histogram{1, 1}), Rational(39, 64));
    EXPECT_EQ(fixed(Histogram{4, 0}, Histogram{2, 0}), Rational(0));
    EXPECT_THROW(fixed(Histogram{3, 1}, Histogram{1, 2}), Error);
}

TEST(CrossEntropyPoisson, FiniteOnEveryHistogramPair)
{
    auto loss = cross_entropy_poisson<double>(3.0, 3.0);
    for (Count n = 0; n <= 40; n += 5)
        for (auto const& hp : all_histograms(2, n))
            for (auto const& hq : all_histograms(2, 4))
                EXPECT_TRUE(std::isfinite(loss(hp, hq)));
}

TEST(CrossEntropyPoisson, UnbiasedViaIndependentPoissonCounts)
{
    // under Poisson sampling each count is an independent Poisson variable,
    // so E[L] is a product of one-dimensional sums
    double const alpha = 6, beta = 6;
    double const p0 = 0.25, p1 = 0.75, q0 = 0.5, q1 = 0.5;
    auto inner = [&](double rate) {
        return static_cast<double>(oracle::poisson_expectation(rate, [&](int t) {
            return poisson_power_series<double>(t, [](int k) { return 1.0 / k; }, alpha);
        }));
    };
    // h^p_{-0} ~ Poi(alpha p1), h^q_0 ~ Poi(beta q0)
    double e = (beta * q0 / beta) * inner(alpha * p1) + (beta * q1 / beta) * inner(alpha * p0);
    EXPECT_NEAR(e, -(q0 * std::log(p0) + q1 * std::log(p1)), 1e-10);
}

TEST(EntropyPoisson, PointMassAndSign)
{
    auto est = entropy_poisson<double>(4.0);
    EXPECT_EQ(est(Histogram{7, 0}), 0.0);
    EXPECT_GT(est(Histogram{2, 3}), 0.0);
    double e = static_cast<double>(oracle::poisson_expectation(2.0, [&](int a) {
        return static_cast<double>(oracle::poisson_expectation(2.0, [&](int b) { return est(Histogram{a, b}); }, 120));
    }, 120));
    EXPECT_NEAR(e, std::log(2.0), 1e-9);
}

TEST(KlPoisson, IsCrossEntropyMinusEntropy)
{
    auto kl = kl_poisson<Rational>(Rational(3), Rational(5));
    auto ce = cross_entropy_poisson<Rational>(Rational(3), Rational(5));
    auto h = entropy_poisson<Rational>(Rational(5));
    for (Count n = 0; n <= 6; ++n)
        for (auto const& hp : all_histograms(3, n))
            for (auto const& hq : all_histograms(3, 3))
                EXPECT_EQ(kl(hp, hq), ce(hp, hq) - h(hq));
}

TEST(Bregman, RecoversSquaredLoss)
{
    auto [G, grad] = squared_norm_potential<Rational>(2);
    for (int n = 2; n <= 4; ++n)
    {
        auto breg = bregman_rbb(G, grad, n);
        auto sq = squared_loss_rbb<Rational>(n);
        for (auto const& q : simplex_grid<Rational>(2, 8))
            for (auto const& h : all_histograms(2, n))
                EXPECT_EQ(breg(h, q), sq(h, q));
        EXPECT_EQ(exact_expected_loss_rbb(breg, half(), half(), n), Rational(0));
    }
    EXPECT_THROW(bregman_rbb(G, grad, 1), DegreeGateError);
}

TEST(Bregman, PotentialIsConvexAndGradientMatches)
{
    auto [G, grad] = squared_norm_potential<Rational>(3);
    EXPECT_EQ(convexity_violations(G, 6), 0u);
    auto [Gf, gradf] = squared_norm_potential<double>(3);
    EXPECT_LT(gradient_max_error(Gf, gradf, {{0.2, 0.3, 0.5}, {1, 0, 0}, {0.1, 0.1, 0.8}}), 1e-8);
}
