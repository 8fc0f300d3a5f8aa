#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../continuous.hpp"
#include "../divergences.hpp"
#include "../exact_verifier.hpp"
#include "../loss_compiler.hpp"

namespace bbp::cli {

struct CheckOutcome
{
    std::string name;
    //! "Exact" or "Truncated"
    std::string mode;
    std::string gap;
    bool pass;
    std::string detail;
    double seconds = 0;
};

struct CheckDef
{
    std::string name;
    std::string description;
    //! false for checks that run on truncated floating-point oracles
    bool exact;
    std::function<CheckOutcome()> run;
};

namespace detail {

inline std::string rational_text(Rational const& r)
{
    return format_scalar(r);
}

template<class Reports>
Rational max_gap(Reports const& reports)
{
    Rational worst(0);
    for (auto const& r : reports)
    {
        if (r.gap > worst)
            worst = r.gap;
    }
    return worst;
}

inline CheckOutcome exact_outcome(std::string name, Rational const& gap, bool pass, std::string detail)
{
    return CheckOutcome{std::move(name), "Exact", rational_text(gap), pass, std::move(detail)};
}

inline CheckOutcome check_estimators()
{
    Rational worst(0);
    std::size_t cases = 0;
    std::vector<Rational> alphas{Rational(0), Rational(1, 3), Rational(1, 2), Rational(3, 4), Rational(1)};
    for (Count m = 1; m <= 6; ++m)
    {
        for (int k = 0; k <= m; ++k)
        {
            for (auto const& a : alphas)
            {
                Distribution<Rational> p({a, Rational(1) - a});
                Rational e = exact_expected_loss_rbb(
                    [&](Histogram const& h, Distribution<Rational> const&) { return binom_mvue<Rational>(h[0], m, k); },
                    p, p, m);
                Rational target(1);
                for (int i = 0; i < k; ++i)
                    target *= a;
                Rational gap = abs(e - target);
                worst = std::max(worst, gap);
                ++cases;
            }
        }
    }
    for (auto const& p : {Distribution<Rational>({Rational(1, 2), Rational(1, 4), Rational(1, 4)}),
                          Distribution<Rational>({Rational(1, 6), Rational(1, 3), Rational(1, 2)})})
    {
        for (Count n = 1; n <= 4; ++n)
        {
            for (Count deg = 0; deg <= n; ++deg)
            {
                for_each_composition(deg, 3, [&](std::span<Count const> c) {
                    ExponentVector j({static_cast<int>(c[0]), static_cast<int>(c[1]), static_cast<int>(c[2])});
                    Rational e = exact_expected_loss_rbb(
                        [&](Histogram const& h, Distribution<Rational> const&) {
                            return multinomial_monomial_mvue<Rational>(h, n, j);
                        },
                        p, p, n);
                    Rational target = bbp::detail::power_product(p.probs(), j);
                    worst = std::max(worst, Rational(abs(e - target)));
                    ++cases;
                });
            }
        }
    }
    for (Count n = 2; n <= 6; ++n)
    {
        for (auto const& a : alphas)
        {
            Distribution<Rational> p({a, Rational(1) - a});
            Rational e = exact_expected_loss_rbb(
                [&](Histogram const& h, Distribution<Rational> const&) {
                    return variance_mvue<Rational>(Rational(h[0]) / Rational(n), n);
                },
                p, p, n);
            worst = std::max(worst, Rational(abs(e - a * (Rational(1) - a) / Rational(n))));
            ++cases;
        }
    }
    return exact_outcome("estimators", worst, worst == 0, std::to_string(cases) + " unbiasedness identities");
}

inline std::vector<DistributionPair<Rational>> standard_grids()
{
    auto pairs = grid_pairs<Rational>(2, 8);
    auto more = grid_pairs<Rational>(3, 4);
    pairs.insert(pairs.end(), more.begin(), more.end());
    return pairs;
}

inline CheckOutcome check_rbb_squared()
{
    auto pairs = standard_grids();
    auto ell = builtin_l2<Rational>(2);
    auto ell3 = builtin_l2<Rational>(3);
    Rational worst(0);
    bool pass = true;
    for (int n = 2; n <= 5; ++n)
    {
        auto loss = squared_loss_rbb<Rational>(n);
        std::vector<DistributionPair<Rational>> p2, p3;
        for (auto const& pq : pairs)
            (pq.first.size() == 2 ? p2 : p3).push_back(pq);
        auto r2 = check_implements_rbb(loss, n, ell, p2);
        auto r3 = check_implements_rbb(loss, n, ell3, p3);
        pass = pass && all_pass(r2) && all_pass(r3);
        worst = std::max({worst, max_gap(r2), max_gap(r3)});
    }
    return exact_outcome("rbb-squared", worst, pass,
                         std::to_string(pairs.size()) + " grid pairs x n in {2..5}");
}

inline CheckOutcome check_bb_squared()
{
    auto pairs = standard_grids();
    Rational worst(0);
    bool pass = true;
    for (int n = 2; n <= 3; ++n)
    {
        for (int m = 2; m <= 3; ++m)
        {
            auto loss = squared_loss_bb<Rational>(n, m);
            for (auto const& [p, q] : pairs)
            {
                Rational gap = abs(exact_expected_loss(loss, p, q) - builtin_l2<Rational>(p.size()).evaluate(p, q));
                pass = pass && gap == 0;
                worst = std::max(worst, gap);
            }
        }
    }
    return exact_outcome("bb-squared", worst, pass, std::to_string(pairs.size()) + " grid pairs x (n,m) in {2,3}^2");
}

inline std::vector<PolyDivergence<Rational>> compiler_divergences()
{
    return {builtin_l2<Rational>(2), builtin_lk_even<Rational>(2, 4), builtin_brier<Rational>(2)};
}

inline CheckOutcome check_compiler()
{
    auto pairs = grid_pairs<Rational>(2, 8);
    Rational worst(0);
    bool pass = true;
    std::ostringstream names;
    for (auto const& ell : compiler_divergences())
    {
        auto loss = compile_bb(ell, std::max(ell.deg_p(), 1), std::max(ell.deg_q(), 1));
        auto reports = check_implements(loss, ell, pairs);
        pass = pass && all_pass(reports);
        worst = std::max(worst, max_gap(reports));
        names << ell.name() << "@(" << ell.deg_p() << "," << ell.deg_q() << ") ";
    }
    return exact_outcome("compiler", worst, pass, names.str() + "on " + std::to_string(pairs.size()) + " pairs");
}

inline CheckOutcome check_degree_gate()
{
    bool pass = true;
    std::ostringstream detail;
    for (auto const& ell : compiler_divergences())
    {
        for (auto [n, m] : {std::pair{ell.deg_p() - 1, ell.deg_q()}, std::pair{ell.deg_p(), ell.deg_q() - 1}})
        {
            if (n < 1 || m < 1)
                continue;
            bool gated = false;
            try
            {
                compile_bb(ell, n, m);
            }
            catch (DegreeGateError const&)
            {
                gated = true;
            }
            pass = pass && gated;
            detail << ell.name() << "@(" << n << "," << m << ")=" << (gated ? "gated" : "compiled") << " ";
        }
    }
    // below the degree no table on H_n is unbiased for l2, by exact linear algebra
    auto ell = builtin_l2<Rational>(2);
    auto models = simplex_grid<Rational>(2, 8);
    Distribution<Rational> q({Rational(1, 4), Rational(3, 4)});
    auto below = rbb_unbiased_system(ell, q, 1, models);
    auto at = rbb_unbiased_system(ell, q, 2, models);
    pass = pass && !below.feasible && at.feasible;
    detail << "l2 linear system n=1 " << (below.feasible ? "feasible" : "infeasible") << ", n=2 "
           << (at.feasible ? "feasible" : "infeasible");
    return exact_outcome("degree-gate", Rational(0), pass, detail.str());
}

inline CheckOutcome check_naive_bias()
{
    Distribution<Rational> q({Rational(1, 10), Rational(9, 10)});
    auto ell = builtin_l2<Rational>(2);
    std::size_t interior = 0, failing = 0;
    Rational smallest_gap(-1);
    for (int n = 2; n <= 5; ++n)
    {
        auto loss = naive_plugin_loss<Rational>(n);
        for (auto const& p : simplex_grid<Rational>(2, 8))
        {
            if (p[0] == 0 || p[0] == 1)
                continue;
            ++interior;
            auto r = check_implements_rbb(loss, n, ell, {{p, q}});
            if (!r.front().pass)
                ++failing;
            if (smallest_gap < 0 || r.front().gap < smallest_gap)
                smallest_gap = r.front().gap;
        }
    }
    Distribution<double> qf({0.1, 0.9});
    auto demo = naive_plugin_bias_demo(qf, 10);
    bool below = true;
    for (int n = 2; n <= 20; ++n)
        below = below && naive_plugin_bias_demo(qf, n).closed_form < 0.1;
    bool pass = failing == interior && std::abs(demo.closed_form - 1.0 / 18) < 1e-12
                && std::abs(demo.grid_argmin - demo.closed_form) <= 1e-4 && below;
    std::ostringstream detail;
    detail << "naive loss biased at " << failing << "/" << interior << " interior (p,n); argmin(n=10)="
           << format_scalar(demo.closed_form) << " grid=" << format_scalar(demo.grid_argmin) << " < q1=0.1";
    return CheckOutcome{"naive-bias", "Exact", rational_text(smallest_gap), pass, detail.str()};
}

inline CheckOutcome check_degree_one()
{
    // sum_x p_x q_x at n = m = 1 is affine in p, so no target is the unique minimizer
    auto ell = builtin_inner_product<Rational>(2);
    auto loss = compile_bb(ell, 1, 1);
    auto grid = simplex_grid<Rational>(2, 8);
    Rational worst(0);
    bool pass = true;
    std::size_t unique_at_target = 0;
    for (auto const& q : grid)
    {
        std::vector<Rational> values;
        for (auto const& p : grid)
        {
            Rational e = exact_expected_loss(loss, p, q);
            worst = std::max(worst, Rational(abs(e - ell.evaluate(p, q))));
            values.push_back(e);
        }
        // affine: constant second differences along the grid
        for (std::size_t i = 0; i + 2 < values.size(); ++i)
            pass = pass && values[i] - 2 * values[i + 1] + values[i + 2] == 0;
        Rational best = *std::min_element(values.begin(), values.end());
        std::size_t minimizers = std::count(values.begin(), values.end(), best);
        std::size_t qi = static_cast<std::size_t>(std::find_if(grid.begin(), grid.end(), [&](auto const& g) {
                                                       return g[0] == q[0];
                                                   }) - grid.begin());
        if (minimizers == 1 && values[qi] == best)
            ++unique_at_target;
    }
    // only the two point masses can be unique minimizers of a linear objective
    pass = pass && worst == 0 && unique_at_target <= 2;
    return exact_outcome("degree-one", worst, pass,
                         "inner product at n=m=1 is affine in p; target is the unique minimizer for "
                             + std::to_string(unique_at_target) + "/" + std::to_string(grid.size()) + " targets");
}

inline CheckOutcome check_bregman()
{
    bool pass = true;
    Rational worst(0);
    auto [G, grad] = squared_norm_potential<Rational>(2);
    for (Count n = 2; n <= 4; ++n)
    {
        auto breg = bregman_rbb(G, grad, static_cast<int>(n));
        auto sq = squared_loss_rbb<Rational>(static_cast<int>(n));
        for (auto const& p : simplex_grid<Rational>(2, 8))
        {
            Rational expected(0);
            for (std::size_t x = 0; x < 2; ++x)
                expected += p[x] * (Rational(1) - p[x]) / Rational(n);
            Rational gap = abs(jensen_gap(G, p, n) - expected);
            worst = std::max(worst, gap);
            pass = pass && gap == 0;
        }
        for (auto const& q : simplex_grid<Rational>(2, 8))
        {
            for (auto const& h : enumerate_histograms(2, n))
            {
                Rational gap = abs(breg(h, q) - sq(h, q));
                worst = std::max(worst, gap);
                pass = pass && gap == 0;
            }
        }
    }
    return exact_outcome("bregman", worst, pass, "Jensen gap and Bregman loss for ||x||^2, n in {2,3,4}");
}

inline CheckOutcome check_poisson()
{
    double const eps = 1e-10;
    Distribution<double> half({0.5, 0.5});
    Distribution<double> skew({0.25, 0.75});
    double worst = 0;
    bool pass = true;
    std::ostringstream detail;
    auto record = [&](char const* label, double value, double target, double tol) {
        double gap = std::abs(value - target);
        worst = std::max(worst, gap);
        pass = pass && gap <= tol;
        detail << label << " gap=" << format_scalar(gap) << " ";
    };
    auto ce = cross_entropy_poisson<double>(6.0, 6.0);
    SeriesDivergence cross{SeriesKind::CrossEntropy};
    record("ce(p=q)", scheme_expected_loss(ce, half, half, eps).value, cross.evaluate(half, half), 1e-4);
    record("ce(p!=q)", scheme_expected_loss(ce, skew, half, eps).value, cross.evaluate(skew, half), 1e-4);
    record("ce(m=1)", scheme_expected_loss(cross_entropy_poisson_fixed_q<double>(6.0, 1), half, half, eps).value,
           cross.evaluate(half, half), 1e-4);
    record("entropy", target_expected_value(entropy_poisson<double>(6.0), half, eps).value,
           SeriesDivergence{SeriesKind::ShannonEntropy}.evaluate(half, half), 1e-4);
    record("kl", scheme_expected_loss(kl_poisson<double>(8.0, 8.0), skew, half, eps).value,
           SeriesDivergence{SeriesKind::KL}.evaluate(skew, half), 1e-3);
    return CheckOutcome{"poisson", "Truncated", format_scalar(worst), pass, detail.str()};
}

inline CheckOutcome check_continuous()
{
    // two draws from each of two laws on {0, 1, 2}; expectation by enumeration
    std::vector<Rational> support{Rational(0), Rational(1), Rational(2)};
    std::vector<std::vector<Rational>> laws{{Rational(1, 2), Rational(1, 2), Rational(0)},
                                            {Rational(1, 4), Rational(1, 4), Rational(1, 2)},
                                            {Rational(1, 3), Rational(0), Rational(2, 3)}};
    Rational worst(0);
    bool pass = true;
    for (auto const& wp : laws)
    {
        for (auto const& wq : laws)
        {
            Rational e_cramer(0), e_energy(0);
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 3; ++b)
                    for (std::size_t c = 0; c < 3; ++c)
                        for (std::size_t dd = 0; dd < 3; ++dd)
                        {
                            Rational w = wp[a] * wp[b] * wq[c] * wq[dd];
                            if (w == 0)
                                continue;
                            RealSample<Rational> s({support[a], support[b]});
                            RealSample<Rational> u({support[c], support[dd]});
                            e_cramer += w * cramer_loss(s, u);
                            e_energy += w * energy_loss(s, u);
                        }
            Rational oracle = cramer_distance_oracle(FiniteLaw<Rational>{support, wp}, FiniteLaw<Rational>{support, wq});
            Rational g1 = abs(e_cramer - oracle);
            Rational g2 = abs(e_energy - 2 * oracle);
            worst = std::max({worst, g1, g2});
            pass = pass && g1 == 0 && g2 == 0;
        }
    }
    Rational c = crps(RealSample<Rational>({Rational(0), Rational(1)}), Rational(0));
    pass = pass && c == 0;
    return exact_outcome("continuous", worst, pass, "cramer and energy expectations on 9 law pairs; crps({0,1},0)=" + rational_text(c));
}

}  // namespace detail

inline std::vector<CheckDef> verify_suite()
{
    return {
        {"estimators", "falling-factorial estimators are unbiased", true, detail::check_estimators},
        {"rbb-squared", "squared loss with known target implements ||p-q||^2", true, detail::check_rbb_squared},
        {"bb-squared", "two-sample squared loss implements ||p-q||^2", true, detail::check_bb_squared},
        {"compiler", "compiled builtins implement their divergence at minimal size", true, detail::check_compiler},
        {"degree-gate", "compilation below the degree is refused and impossible", true, detail::check_degree_gate},
        {"naive-bias", "plug-in squared loss is biased; its minimizer undershoots", true, detail::check_naive_bias},
        {"degree-one", "single-draw losses are affine in the model", true, detail::check_degree_one},
        {"bregman", "Jensen gap of ||x||^2 and the corrected Bregman loss", true, detail::check_bregman},
        {"poisson", "cross-entropy, entropy and KL under Poisson sampling", false, detail::check_poisson},
        {"continuous", "Cramer, energy and CRPS losses on finite supports", true, detail::check_continuous},
    };
}

//! Run one check, timing it; exceptions become failures.
inline CheckOutcome run_check(CheckDef const& def)
{
    auto start = std::chrono::steady_clock::now();
    CheckOutcome out;
    try
    {
        out = def.run();
    }
    catch (std::exception const& e)
    {
        out = CheckOutcome{def.name, def.exact ? "Exact" : "Truncated", "nan", false, std::string("error: ") + e.what()};
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace bbp::cli
