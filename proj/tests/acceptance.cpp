// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <bbp/bbp.hpp>

#include "oracles.hpp"

using namespace bbp;

namespace {

struct Outcome
{
    bool pass;
    std::string detail;
};

struct Criterion
{
    int id;
    std::string title;
    double budget_seconds;
    std::function<Outcome()> run;
};

Rational squared_distance(Distribution<Rational> const& p, Distribution<Rational> const& q)
{
    Rational s(0);
    for (std::size_t x = 0; x < p.size(); ++x)
        s += (p[x] - q[x]) * (p[x] - q[x]);
    return s;
}

std::vector<std::pair<Distribution<Rational>, Distribution<Rational>>> acceptance_pairs()
{
    auto pairs = grid_pairs<Rational>(2, 8);
    auto three = grid_pairs<Rational>(3, 4);
    pairs.insert(pairs.end(), three.begin(), three.end());
    return pairs;
}

std::string text(Rational const& r) { return format_scalar(r); }

Distribution<Rational> coin(Rational a) { return Distribution<Rational>({a, Rational(1) - a}); }
Distribution<double> coin(double a) { return Distribution<double>({a, 1.0 - a}); }

//---------------------------------------------------------------------------//
Outcome squared_rbb_exact()
{
    std::size_t checked = 0, wrong = 0;
    for (auto const& [p, q] : acceptance_pairs())
        for (int n = 2; n <= 5; ++n)
        {
            ++checked;
            if (exact_expected_loss_rbb(squared_loss_rbb<Rational>(n), p, q, n) != squared_distance(p, q))
                ++wrong;
        }
    return {wrong == 0, std::to_string(checked - wrong) + "/" + std::to_string(checked) + " exact equalities"};
}

Outcome squared_bb_exact()
{
    std::size_t checked = 0, wrong = 0;
    for (auto const& [p, q] : acceptance_pairs())
        for (int n = 2; n <= 3; ++n)
            for (int m = 2; m <= 3; ++m)
            {
                ++checked;
                if (exact_expected_loss_bb(squared_loss_bb<Rational>(n, m), p, q, n, m) != squared_distance(p, q))
                    ++wrong;
            }
    return {wrong == 0, std::to_string(checked - wrong) + "/" + std::to_string(checked) + " exact equalities"};
}

Outcome compiler_soundness()
{
    auto pairs = grid_pairs<Rational>(2, 8);
    std::ostringstream detail;
    bool pass = true;
    for (auto const& ell : {builtin_l2<Rational>(2), builtin_lk_even<Rational>(2, 4), builtin_brier<Rational>(2)})
    {
        int const dp = ell.deg_p(), dq = ell.deg_q();
        auto reports = check_implements(compile_bb(ell, dp, dq), ell, pairs);
        bool exact = all_pass(reports);
        auto gate = [&](int n, int m) {
            try
            {
                compile_bb(ell, n, m);
            }
            catch (DegreeGateError const&)
            {
                return true;
            }
            return false;
        };
        bool gated = gate(dp - 1, dq) && gate(dp, dq - 1);
        pass = pass && exact && gated;
        detail << ell.name() << "(" << dp << "," << dq << "):" << (exact ? "exact" : "MISMATCH") << ","
               << (gated ? "gated" : "NOT-GATED") << " ";
    }
    return {pass, detail.str()};
}

Outcome naive_improper()
{
    auto q = coin(Rational(1, 10));
    auto ell = builtin_l2<Rational>(2);
    std::size_t interior = 0, failing = 0, boundary_fail = 0;
    for (int n = 2; n <= 5; ++n)
    {
        auto loss = naive_plugin_loss<Rational>(n);
        for (auto const& p : simplex_grid<Rational>(2, 8))
        {
            auto r = check_implements_rbb(loss, n, ell, {{p, q}}).front();
            bool inner = p[0] != 0 && p[0] != 1;
            interior += inner;
            if (inner && !r.pass)
                ++failing;
            if (!inner && !r.pass)
                ++boundary_fail;
        }
    }
    auto qf = coin(0.1);
    auto ten = naive_plugin_bias_demo(qf, 10);
    bool agree = std::abs(ten.closed_form - 1.0 / 18.0) < 1e-12 && std::abs(ten.grid_argmin - ten.closed_form) <= 1e-4;
    bool below = true;
    for (int n = 2; n <= 20; ++n)
    {
        auto d = naive_plugin_bias_demo(qf, n);
        below = below && d.closed_form < 0.1 && d.grid_argmin < 0.1;
    }
    std::ostringstream detail;
    detail << "fails at " << failing << "/" << interior << " interior (p,n); argmin(n=10)=" << ten.closed_form
           << " grid=" << ten.grid_argmin << "; below 0.1 for n=2..20: " << (below ? "yes" : "no");
    return {failing == interior && agree && below, detail.str()};
}

Outcome cross_entropy_poisson_value()
{
    auto loss = cross_entropy_poisson<double>(6.0, 6.0);
    auto uniform = poisson_expected_loss(loss, coin(0.5), coin(0.5), 6, 6, 1e-10);
    auto skew = poisson_expected_loss(loss, coin(0.25), coin(0.5), 6, 6, 1e-10);
    double const ln2 = std::log(2.0);
    double const direct = -(0.5 * std::log(0.25) + 0.5 * std::log(0.75));
    double g1 = std::abs(uniform.value - ln2), g2 = std::abs(skew.value - direct);
    std::ostringstream detail;
    detail << "gap(uniform)=" << g1 << " gap(1/4,3/4)=" << g2 << " target=" << direct << " T=" << skew.truncation_p;
    return {g1 <= 1e-4 && g2 <= 1e-4, detail.str()};
}

Outcome entropy_kl_signs()
{
    auto ent = target_expected_value(entropy_poisson<double>(6.0), coin(0.5), 1e-10);
    auto kl = scheme_expected_loss(kl_poisson<double>(6.0, 6.0), coin(0.25), coin(0.5), 1e-10);
    double const kl_direct = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
    double g1 = std::abs(ent.value - std::log(2.0)), g2 = std::abs(kl.value - kl_direct);
    std::ostringstream detail;
    detail << "entropy=" << ent.value << " (gap " << g1 << ") kl=" << kl.value << " vs " << kl_direct << " (gap " << g2
           << ")";
    return {g1 <= 1e-4 && g2 <= 1e-3, detail.str()};
}

Outcome degree_one_constant()
{
    auto ell = builtin_inner_product<Rational>(2);
    auto loss = compile_bb(ell, 1, 1);
    auto grid = simplex_grid<Rational>(2, 8);
    Rational widest(0);
    std::string where;
    for (auto const& q : grid)
    {
        Rational lo(0), hi(0);
        bool first = true;
        for (auto const& p : grid)
        {
            Rational e = exact_expected_loss(loss, p, q);
            if (first || e < lo)
                lo = e;
            if (first || e > hi)
                hi = e;
            first = false;
        }
        if (hi - lo > widest)
        {
            widest = hi - lo;
            where = "q1=" + text(q[0]);
        }
    }
    std::string detail = "max over q of (max-min over p) = " + text(widest);
    if (widest != 0)
        detail += " at " + where + "; expected loss equals sum p_x q_x, affine in p";
    return {widest == 0, detail};
}

Outcome bregman_identity()
{
    auto [G, grad] = squared_norm_potential<Rational>(2);
    std::size_t checked = 0, wrong = 0;
    for (int n = 2; n <= 4; ++n)
    {
        for (auto const& p : simplex_grid<Rational>(2, 8))
        {
            ++checked;
            Rational variance_sum = (p[0] * (1 - p[0]) + p[1] * (1 - p[1])) / Rational(n);
            if (jensen_gap(G, p, n) != variance_sum)
                ++wrong;
        }
        auto breg = bregman_rbb(G, grad, n);
        auto sq = squared_loss_rbb<Rational>(n);
        for (auto const& q : simplex_grid<Rational>(2, 8))
            for (auto const& h : enumerate_histograms(2, n))
            {
                ++checked;
                if (breg(h, q) != sq(h, q))
                    ++wrong;
            }
    }
    return {wrong == 0, std::to_string(checked - wrong) + "/" + std::to_string(checked) + " exact equalities"};
}

Outcome continuous_identities()
{
    std::mt19937_64 gen(20261015);
    std::uniform_int_distribution<std::size_t> size(2, 20);
    std::uniform_real_distribution<double> value(-10, 10);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial)
    {
        std::vector<double> s(size(gen)), u(size(gen));
        for (auto& x : s)
            x = value(gen);
        for (auto& x : u)
            x = value(gen);
        double const n = static_cast<double>(s.size()), m = static_cast<double>(u.size());
        double q = oracle::ecdf_quadrature(s, u, [&](double fs, double fu) {
            return (fs - fu) * (fs - fu) - fs * (1 - fs) / (n - 1) - fu * (1 - fu) / (m - 1);
        });
        worst = std::max(worst, std::abs(cramer_loss(RealSample<double>(s), RealSample<double>(u)) - q));
    }

    std::vector<FiniteLaw<Rational>> laws{
        {{Rational(0), Rational(1)}, {Rational(1, 2), Rational(1, 2)}},
        {{Rational(0), Rational(1)}, {Rational(1, 4), Rational(3, 4)}},
        {{Rational(-1), Rational(2)}, {Rational(2, 3), Rational(1, 3)}},
    };
    auto expectation = [](FiniteLaw<Rational> const& law, auto&& f) {
        return oracle::sequence_expectation(law.weights, 2, [&](std::vector<std::int64_t> const& c) {
            std::vector<Rational> v;
            for (std::size_t i = 0; i < c.size(); ++i)
                v.insert(v.end(), static_cast<std::size_t>(c[i]), law.support[i]);
            return f(RealSample<Rational>(v));
        });
    };
    std::size_t pairs = 0, wrong = 0;
    for (auto const& p : laws)
        for (auto const& q : laws)
        {
            ++pairs;
            Rational ec = expectation(p, [&](auto const& s) { return expectation(q, [&](auto const& u) { return cramer_loss(s, u); }); });
            Rational ee = expectation(p, [&](auto const& s) { return expectation(q, [&](auto const& u) { return energy_loss(s, u); }); });
            Rational truth = cramer_distance_oracle(p, q);
            if (ec != truth || ee != Rational(2) * truth)
                ++wrong;
        }
    double c = crps(RealSample<double>{0.0, 1.0}, 0.0);
    std::ostringstream detail;
    detail << "quadrature max gap " << worst << "; enumeration " << pairs - wrong << "/" << pairs << "; crps=" << c;
    return {worst <= 1e-9 && wrong == 0 && c == 0.0, detail.str()};
}

Outcome monte_carlo_calibration()
{
    Domain domain = Domain::indexed(2);
    auto model = SampleSource::internal(domain, coin(0.25));
    auto target = SampleSource::internal(domain, coin(0.5));
    auto loss = squared_loss_bb<double>(2, 2);
    double const truth = eval_divergence(builtin_l2<double>(2), coin(0.25), coin(0.5));
    int covered = 0;
    int const runs = 1000;
    for (int i = 0; i < runs; ++i)
    {
        auto r = estimate_loss(model, target, loss, 10000, stream_seed(20261015, static_cast<std::uint64_t>(i)));
        if (r.ci_low <= truth && truth <= r.ci_high)
            ++covered;
    }

    auto rbb = squared_loss_rbb<double>(2);
    int const trials = 10000;
    auto variance = [&](Count total) {
        double s = 0, ss = 0;
        for (int i = 0; i < trials; ++i)
        {
            auto h = draw_fixed(model, total, stream_seed(1000 + total, static_cast<std::uint64_t>(i)));
            double v = block_average(h, rbb, coin(0.5), static_cast<std::uint64_t>(i));
            s += v;
            ss += v * v;
        }
        double mean = s / trials;
        return (ss - trials * mean * mean) / (trials - 1);
    };
    double one = variance(2), four = variance(8);
    std::ostringstream detail;
    detail << "coverage " << covered << "/" << runs << " of " << truth << "; block variance 1 block " << one
           << ", 4 blocks " << four;
    return {covered >= 930 && four < one, detail.str()};
}

Outcome estimator_exactness()
{
    std::size_t checked = 0, wrong = 0;
    auto tally = [&](bool ok) {
        ++checked;
        wrong += !ok;
    };
    std::vector<Rational> alphas{Rational(0), Rational(1, 4), Rational(1, 3), Rational(1, 2), Rational(1)};
    for (int m = 1; m <= 6; ++m)
        for (int k = 0; k <= m; ++k)
            for (auto const& a : alphas)
            {
                Rational e(0);
                for (int t = 0; t <= m; ++t)
                    e += oracle::binomial_pmf(t, m, a) * binom_mvue<Rational>(t, m, k);
                Rational power(1);
                for (int i = 0; i < k; ++i)
                    power *= a;
                tally(e == power);
                for (Count t = 0; t <= m; ++t)
                    tally(binom_mvue<Rational>(t, m, k) ==
                          multinomial_monomial_mvue<Rational>(Histogram{t, m - t}, m, ExponentVector{k, 0}));
            }

    std::vector<std::vector<Rational>> laws{
        {Rational(1)},
        {Rational(1, 3), Rational(2, 3)},
        {Rational(1, 4), Rational(3, 4)},
        {Rational(1, 2), Rational(1, 3), Rational(1, 6)},
        {Rational(0), Rational(2, 5), Rational(3, 5)},
    };
    for (auto const& p : laws)
    {
        std::size_t const d = p.size();
        for (int n = 1; n <= 5; ++n)
            for (Count deg = 0; deg <= n; ++deg)
                for_each_composition(deg, d, [&](std::span<Count const> c) {
                    std::vector<int> ex(c.begin(), c.end());
                    ExponentVector j(ex);
                    Rational e = oracle::sequence_expectation(p, n, [&](std::vector<std::int64_t> const& counts) {
                        return multinomial_monomial_mvue<Rational>(Histogram(counts), n, j);
                    });
                    Rational target(1);
                    for (std::size_t x = 0; x < d; ++x)
                        for (int i = 0; i < ex[x]; ++i)
                            target *= p[x];
                    tally(e == target);
                });
    }
    for (int k = 1; k <= 6; ++k)
        tally(poisson_factorial<Rational>(0, k) == 0 && binom_mvue<Rational>(0, 6, k) == 0
              && multinomial_monomial_mvue<Rational>(Histogram{0, 6}, 6, ExponentVector::unit(2, 0, k)) == 0);

    // Poisson factorial estimator against theta^k, truncated far past the bulk
    double poisson_worst = 0;
    for (double theta : {0.5, 1.0, 2.0, 4.0, 8.0})
        for (int k = 0; k <= 6; ++k)
        {
            double e = static_cast<double>(oracle::poisson_expectation(theta, [&](int t) { return poisson_factorial<double>(t, k); }));
            poisson_worst = std::max(poisson_worst, std::abs(e - std::pow(theta, k)) / std::max(1.0, std::pow(theta, k)));
        }
    bool poisson_ok = poisson_worst <= 1e-10;
    std::ostringstream detail;
    detail << checked - wrong << "/" << checked << " exact identities; Poisson relative gap " << poisson_worst;
    return {wrong == 0 && poisson_ok, detail.str()};
}

}  // namespace

int main()
{
    std::vector<Criterion> criteria{
        {1, "squared loss with known target is exact", 10, squared_rbb_exact},
        {2, "two-sample squared loss is exact", 30, squared_bb_exact},
        {3, "compiler soundness and degree gate", 60, compiler_soundness},
        {4, "naive plug-in loss is improper", 60, naive_improper},
        {5, "Poisson cross-entropy expectation", 60, cross_entropy_poisson_value},
        {6, "entropy and KL signs", 60, entropy_kl_signs},
        {7, "degree-one loss constant in p", 60, degree_one_constant},
        {8, "Jensen gap and Bregman loss", 60, bregman_identity},
        {9, "Cramer, energy and CRPS identities", 60, continuous_identities},
        {10, "Monte Carlo coverage and block averaging", 300, monte_carlo_calibration},
        {11, "estimator unbiasedness", 10, estimator_exactness},
    };
    int failed = 0;
    for (auto const& c : criteria)
    {
        auto start = std::chrono::steady_clock::now();
        Outcome o{false, ""};
        try
        {
            o = c.run();
        }
        catch (std::exception const& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_time = secs <= c.budget_seconds;
        bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s criterion %2d: %s (%.2f s of %.0f s) %s%s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                    secs, c.budget_seconds, o.detail.c_str(), in_time ? "" : " [over time budget]");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
