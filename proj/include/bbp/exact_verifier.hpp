#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "combinatorics.hpp"
#include "divergences.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "loss_compiler.hpp"
#include "numeric.hpp"

namespace bbp {

//! Largest number of histograms any oracle will enumerate.
inline constexpr std::uint64_t enumeration_cap = 1'000'000;

//---------------------------------------------------------------------------//
// Histogram enumeration and the multinomial law
//---------------------------------------------------------------------------//

//! Every histogram with d cells and total n, in descending lexicographic order.
inline std::vector<Histogram> enumerate_histograms(std::size_t d, Count n)
{
    detail::require(d >= 1 && n >= 0, ErrorCode::InvalidArgument, "need d >= 1 and n >= 0");
    std::uint64_t count = composition_count(n, d, enumeration_cap + 1);
    if (count > enumeration_cap)
        detail::fail(ErrorCode::TooLarge, "enumerating histograms with d=" + std::to_string(d)
                                              + ", n=" + std::to_string(n) + " exceeds the cap of 10^6");
    std::vector<Histogram> out;
    out.reserve(count);
    for_each_composition(n, d, [&](std::span<Count const> c) { out.emplace_back(std::vector<Count>(c.begin(), c.end())); });
    return out;
}

//! n! / prod h_x! * prod p_x^{h_x}
template<Scalar T>
T multinomial_pmf(Histogram const& h, Count n, Distribution<T> const& p)
{
    detail::require(h.size() == p.size(), ErrorCode::DimensionMismatch, "histogram and distribution differ in size");
    if (h.total() != n)
        detail::fail(ErrorCode::TotalMismatch, "histogram total does not match n");
    T result(1);
    Count placed = 0;
    for (std::size_t x = 0; x < h.size(); ++x)
    {
        // multiply by C(placed + h_x, h_x) and p_x^{h_x}
        for (Count i = 1; i <= h[x]; ++i)
        {
            result *= T(placed + i);
            result /= T(i);
            result *= p[x];
        }
        placed += h[x];
        if (result == 0)
            return result;
    }
    return result;
}

namespace detail {

template<Scalar T>
struct WeightedHistograms
{
    std::vector<Histogram> histograms;
    std::vector<T> weights;
};

template<Scalar T>
WeightedHistograms<T> multinomial_law(Distribution<T> const& p, Count n)
{
    WeightedHistograms<T> law;
    for (auto& h : enumerate_histograms(p.size(), n))
    {
        T w = multinomial_pmf(h, n, p);
        if (w == 0)
            continue;
        law.histograms.push_back(std::move(h));
        law.weights.push_back(std::move(w));
    }
    return law;
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Exact expectations under fixed sample sizes
//---------------------------------------------------------------------------//

//! sum_{h in H_n} pmf(h; n, p) * L(h, q)
template<Scalar T, class Loss>
T exact_expected_loss_rbb(Loss const& loss, Distribution<T> const& p, Distribution<T> const& q, Count n)
{
    auto law = detail::multinomial_law(p, n);
    T sum(0);
    for (std::size_t i = 0; i < law.histograms.size(); ++i)
        sum += law.weights[i] * loss(law.histograms[i], q);
    return sum;
}

//! Double sum over independent H^p ~ p^n and H^q ~ q^m.
template<Scalar T, class Loss>
T exact_expected_loss_bb(Loss const& loss, Distribution<T> const& p, Distribution<T> const& q, Count n, Count m)
{
    auto law_p = detail::multinomial_law(p, n);
    auto law_q = detail::multinomial_law(q, m);
    T sum(0);
    for (std::size_t i = 0; i < law_p.histograms.size(); ++i)
    {
        T inner(0);
        for (std::size_t j = 0; j < law_q.histograms.size(); ++j)
            inner += law_q.weights[j] * loss(law_p.histograms[i], law_q.histograms[j]);
        sum += law_p.weights[i] * inner;
    }
    return sum;
}

//! Exact expectation of a loss with fixed-size schemes on both sides.
template<Scalar T>
T exact_expected_loss(CompiledLoss<T> const& loss, Distribution<T> const& p, Distribution<T> const& q)
{
    detail::require(loss.scheme_p().is_fixed() && loss.scheme_q().is_fixed(), ErrorCode::InvalidArgument,
                    "exact expectation needs fixed-size schemes");
    return exact_expected_loss_bb(loss, p, q, loss.scheme_p().n(), loss.scheme_q().n());
}

//---------------------------------------------------------------------------//
// Truncated expectations under Poisson sampling
//---------------------------------------------------------------------------//

//! Smallest T with P[N > T] <= tail_eps for N ~ Poi(rate), by direct pmf summation.
inline Count poisson_truncation_point(double rate, double tail_eps)
{
    detail::require(rate > 0 && rate <= 500, ErrorCode::InvalidArgument, "Poisson rate must lie in (0, 500]");
    detail::require(tail_eps > 0 && tail_eps < 1, ErrorCode::InvalidArgument, "tail_eps must lie in (0, 1)");
    double pmf = std::exp(-rate);
    double cdf = pmf;
    Count t = 0;
    while (1.0 - cdf > tail_eps)
    {
        ++t;
        pmf *= rate / static_cast<double>(t);
        cdf += pmf;
        if (t > 100000)
            detail::fail(ErrorCode::TooLarge, "Poisson truncation point did not converge");
    }
    return t;
}

struct TruncatedExpectation
{
    double value;
    //! sup |L| over the enumerated support times the omitted probability mass
    double tail_bound;
    double omitted_mass;
    double sup_abs_loss;
    //! loss-weighted contribution of the outermost enumerated sample size
    double last_shell;
    Count truncation_p;
    Count truncation_q;
};

//! Largest Poisson sample size the adaptive truncation will reach.
inline constexpr Count max_poisson_truncation = 160;

namespace detail {

/*!
 * Histograms of one side of a sampling scheme with their probabilities,
 * grown one sample size ("shell") at a time for Poisson schemes.
 */
class SchemeSide
{
  public:
    SchemeSide(SamplingScheme const& scheme, Distribution<double> const& p, double tail_eps)
        : scheme_(scheme), p_(p)
    {
        if (scheme_.is_fixed())
        {
            append_shell(scheme_.n(), 1.0);
            top_ = scheme_.n();
            return;
        }
        Count const first = poisson_truncation_point(scheme_.rate(), tail_eps);
        std::uint64_t total = 0;
        for (Count n = 0; n <= first; ++n)
        {
            total += composition_count(n, p.size(), enumeration_cap + 1);
            if (total > enumeration_cap)
                fail(ErrorCode::TooLarge, "Poisson truncation at " + std::to_string(first)
                                              + " needs more than 10^6 histograms");
        }
        size_pmf_ = std::exp(-scheme_.rate());
        append_shell(0, size_pmf_);
        top_ = 0;
        while (top_ < first)
            grow();
    }

    bool can_grow() const
    {
        return scheme_.is_poisson() && top_ < max_poisson_truncation
               && histograms.size() + composition_count(top_ + 1, p_.size(), enumeration_cap + 1) <= enumeration_cap;
    }

    void grow()
    {
        ++top_;
        size_pmf_ *= scheme_.rate() / static_cast<double>(top_);
        append_shell(top_, size_pmf_);
    }

    Count top() const noexcept { return top_; }
    std::size_t shell_begin() const noexcept { return shell_begin_; }

    //! P[N > top] for a Poisson side, summed forward; zero for a fixed side.
    double tail_mass() const
    {
        if (scheme_.is_fixed())
            return 0;
        double pmf = size_pmf_;
        double tail = 0;
        for (Count k = top_ + 1;; ++k)
        {
            pmf *= scheme_.rate() / static_cast<double>(k);
            double next = tail + pmf;
            if (next == tail && static_cast<double>(k) > scheme_.rate())
                break;
            tail = next;
        }
        return tail;
    }

    std::vector<Histogram> histograms;
    std::vector<double> weights;

  private:
    void append_shell(Count n, double size_weight)
    {
        shell_begin_ = histograms.size();
        auto law = multinomial_law(p_, n);
        for (std::size_t i = 0; i < law.histograms.size(); ++i)
        {
            histograms.push_back(std::move(law.histograms[i]));
            weights.push_back(size_weight * law.weights[i]);
        }
    }

    SamplingScheme scheme_;
    Distribution<double> p_;
    Count top_ = 0;
    std::size_t shell_begin_ = 0;
    double size_pmf_ = 1;
};

}  // namespace detail

/*!
 * Expectation of a loss under its own sampling schemes.
 *
 * Fixed-size sides are enumerated exactly. A Poisson side starts at the
 * smallest sample size whose upper tail mass is at most \c tail_eps, then
 * keeps adding sample sizes while the outermost one still contributes more
 * than \c tail_eps to E|L|. Summation order is fixed, so results are
 * reproducible.
 */
inline TruncatedExpectation scheme_expected_loss(CompiledLoss<double> const& loss, Distribution<double> const& p,
                                                 Distribution<double> const& q, double tail_eps)
{
    detail::require(p.size() == q.size(), ErrorCode::DimensionMismatch, "distribution sizes differ");
    detail::SchemeSide side_p(loss.scheme_p(), p, tail_eps);
    detail::SchemeSide side_q(loss.scheme_q(), q, tail_eps);

    // row_*: per model histogram, sums over target histograms; col_abs: the transpose
    std::vector<double> row_value, row_abs, col_abs;
    double sup = 0;
    auto evaluate_block = [&](std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) {
        row_value.resize(side_p.histograms.size(), 0.0);
        row_abs.resize(side_p.histograms.size(), 0.0);
        col_abs.resize(side_q.histograms.size(), 0.0);
        for (std::size_t i = i0; i < i1; ++i)
        {
            for (std::size_t j = j0; j < j1; ++j)
            {
                double l = loss(side_p.histograms[i], side_q.histograms[j]);
                double a = std::abs(l);
                sup = std::max(sup, a);
                row_value[i] += side_q.weights[j] * l;
                row_abs[i] += side_q.weights[j] * a;
                col_abs[j] += side_p.weights[i] * a;
            }
        }
    };
    auto shell_p = [&] {
        double s = 0;
        for (std::size_t i = side_p.shell_begin(); i < side_p.histograms.size(); ++i)
            s += side_p.weights[i] * row_abs[i];
        return s;
    };
    auto shell_q = [&] {
        double s = 0;
        for (std::size_t j = side_q.shell_begin(); j < side_q.histograms.size(); ++j)
            s += side_q.weights[j] * col_abs[j];
        return s;
    };

    evaluate_block(0, side_p.histograms.size(), 0, side_q.histograms.size());
    while (true)
    {
        bool grew = false;
        if (side_p.can_grow() && shell_p() > tail_eps)
        {
            std::size_t old = side_p.histograms.size();
            side_p.grow();
            evaluate_block(old, side_p.histograms.size(), 0, side_q.histograms.size());
            grew = true;
        }
        if (side_q.can_grow() && shell_q() > tail_eps)
        {
            std::size_t old = side_q.histograms.size();
            side_q.grow();
            evaluate_block(0, side_p.histograms.size(), old, side_q.histograms.size());
            grew = true;
        }
        if (!grew)
            break;
    }

    double value = 0;
    for (std::size_t i = 0; i < side_p.histograms.size(); ++i)
        value += side_p.weights[i] * row_value[i];
    double const tp = side_p.tail_mass();
    double const tq = side_q.tail_mass();
    double const omitted = tp + tq - tp * tq;
    return TruncatedExpectation{value,
                                sup * omitted,
                                omitted,
                                sup,
                                std::max(loss.scheme_p().is_poisson() ? shell_p() : 0.0,
                                         loss.scheme_q().is_poisson() ? shell_q() : 0.0),
                                side_p.top(),
                                side_q.top()};
}

//! Truncated expectation for a loss on Poisson(alpha) x Poisson(beta) sampling.
inline TruncatedExpectation poisson_expected_loss(CompiledLoss<double> const& loss, Distribution<double> const& p,
                                                  Distribution<double> const& q, double alpha, double beta,
                                                  double tail_eps)
{
    detail::require(loss.scheme_p() == SamplingScheme::poisson(alpha) && loss.scheme_q() == SamplingScheme::poisson(beta),
                    ErrorCode::InvalidArgument, "loss schemes do not match the requested Poisson rates");
    return scheme_expected_loss(loss, p, q, tail_eps);
}

//! Truncated expectation of a target-only estimator.
inline TruncatedExpectation target_expected_value(TargetEstimator<double> const& est, Distribution<double> const& q,
                                                  double tail_eps)
{
    detail::SchemeSide side(est.scheme(), q, tail_eps);
    std::vector<double> values;
    double sup = 0;
    auto evaluate_from = [&](std::size_t j0) {
        for (std::size_t j = j0; j < side.histograms.size(); ++j)
        {
            values.push_back(est(side.histograms[j]));
            sup = std::max(sup, std::abs(values.back()));
        }
    };
    auto shell = [&] {
        double s = 0;
        for (std::size_t j = side.shell_begin(); j < side.histograms.size(); ++j)
            s += side.weights[j] * std::abs(values[j]);
        return s;
    };
    evaluate_from(0);
    while (side.can_grow() && shell() > tail_eps)
    {
        std::size_t old = side.histograms.size();
        side.grow();
        evaluate_from(old);
    }
    double value = 0;
    for (std::size_t j = 0; j < side.histograms.size(); ++j)
        value += side.weights[j] * values[j];
    double const omitted = side.tail_mass();
    return TruncatedExpectation{value, sup * omitted, omitted, sup, est.scheme().is_poisson() ? shell() : 0.0, 0,
                                side.top()};
}

//---------------------------------------------------------------------------//
// Implementation checks
//---------------------------------------------------------------------------//
enum class CheckMode
{
    Exact,
    Truncated
};

template<Scalar T>
struct VerificationReport
{
    Distribution<T> p;
    Distribution<T> q;
    T target;
    T computed;
    T gap;
    CheckMode mode;
    double tail_bound = 0;
    double tolerance = 0;
    bool pass;
};

template<Scalar T>
using DistributionPair = std::pair<Distribution<T>, Distribution<T>>;

//! All (p, q) pairs drawn from the simplex grid of step 1/K.
template<Scalar T>
std::vector<DistributionPair<T>> grid_pairs(std::size_t d, Count K)
{
    auto grid = simplex_grid<T>(d, K);
    std::vector<DistributionPair<T>> pairs;
    pairs.reserve(grid.size() * grid.size());
    for (auto const& p : grid)
        for (auto const& q : grid)
            pairs.emplace_back(p, q);
    return pairs;
}

namespace detail {
template<Scalar T>
VerificationReport<T> exact_report(DistributionPair<T> const& pq, T target, T computed)
{
    T gap = computed - target;
    if (gap < 0)
        gap = -gap;
    bool pass = gap == 0;
    return VerificationReport<T>{pq.first, pq.second, std::move(target), std::move(computed), std::move(gap),
                                 CheckMode::Exact, 0.0, 0.0, pass};
}
}  // namespace detail

//! Exact check that a fixed-size BB loss has expectation ell(p, q) on each pair.
inline std::vector<VerificationReport<Rational>> check_implements(CompiledLoss<Rational> const& loss,
                                                                  PolyDivergence<Rational> const& ell,
                                                                  std::vector<DistributionPair<Rational>> const& pairs)
{
    std::vector<VerificationReport<Rational>> reports;
    reports.reserve(pairs.size());
    for (auto const& pq : pairs)
        reports.push_back(detail::exact_report(pq, ell.evaluate(pq.first, pq.second),
                                               exact_expected_loss(loss, pq.first, pq.second)));
    return reports;
}

//! Exact check for a report-black-box loss (any callable (h, q) -> Rational) at sample size n.
template<class Loss>
std::vector<VerificationReport<Rational>> check_implements_rbb(Loss const& loss, Count n,
                                                               PolyDivergence<Rational> const& ell,
                                                               std::vector<DistributionPair<Rational>> const& pairs)
{
    std::vector<VerificationReport<Rational>> reports;
    reports.reserve(pairs.size());
    for (auto const& pq : pairs)
        reports.push_back(detail::exact_report(pq, ell.evaluate(pq.first, pq.second),
                                               exact_expected_loss_rbb(loss, pq.first, pq.second, n)));
    return reports;
}

//! Truncated check for losses on unbounded-support schemes: pass iff the gap
//! is within the reported tail bound plus \c tolerance.
inline std::vector<VerificationReport<double>> check_implements_truncated(
    CompiledLoss<double> const& loss, Divergence const& ell, std::vector<DistributionPair<double>> const& pairs,
    double tail_eps, double tolerance)
{
    std::vector<VerificationReport<double>> reports;
    for (auto const& [p, q] : pairs)
    {
        double target = eval_divergence(ell, p, q);
        auto e = scheme_expected_loss(loss, p, q, tail_eps);
        double gap = std::abs(e.value - target);
        reports.push_back(VerificationReport<double>{p, q, target, e.value, gap, CheckMode::Truncated, e.tail_bound,
                                                     tolerance, gap <= e.tail_bound + tolerance});
    }
    return reports;
}

template<Scalar T>
bool all_pass(std::vector<VerificationReport<T>> const& reports)
{
    return std::all_of(reports.begin(), reports.end(), [](auto const& r) { return r.pass; });
}

//---------------------------------------------------------------------------//
// Plug-in bias
//---------------------------------------------------------------------------//

//! The naive plug-in loss ||p_hat - q||^2. Biased by sum_x Var(p_hat_x).
template<Scalar T>
RbbLoss<T> naive_plugin_loss(int n)
{
    auto evaluator = [n](Histogram const& h, Distribution<T> const& q) -> T {
        T sum(0);
        for (std::size_t x = 0; x < h.size(); ++x)
        {
            T diff = T(h[x]) / T(n) - q[x];
            sum += diff * diff;
        }
        return sum;
    };
    return RbbLoss<T>(std::move(evaluator), n, "naive-plugin(n=" + std::to_string(n) + ")");
}

struct BiasDemo
{
    int n;
    //! minimizer of the closed-form expected naive loss, clipped to [0, 1]
    double closed_form;
    //! unclipped stationary point; NaN when n = 1 (the objective is linear)
    double stationary;
    bool clipped;
    //! minimizer over the grid {0, 1e-4, ..., 1}
    double grid_argmin;
    double grid_step;
};

/*!
 * Minimize E||p_hat - q||^2 = 2 (p1 - q1)^2 + 2 p1 (1 - p1) / n over the
 * model weight p1 of a two-outcome domain.
 */
inline BiasDemo naive_plugin_bias_demo(Distribution<double> const& q, int n)
{
    detail::require(q.size() == 2, ErrorCode::InvalidArgument, "bias demo needs a two-outcome target");
    detail::require(n >= 1, ErrorCode::InvalidArgument, "n must be >= 1");
    double const q1 = q[0];
    auto objective = [&](double p1) { return 2 * (p1 - q1) * (p1 - q1) + 2 * p1 * (1 - p1) / n; };

    BiasDemo demo{n, 0, 0, false, 0, 1e-4};
    if (n == 1)
    {
        // 2 p1 (1 - 2 q1) + 2 q1^2: linear, minimized at an endpoint
        demo.stationary = std::nan("");
        demo.closed_form = q1 < 0.5 ? 0.0 : (q1 > 0.5 ? 1.0 : q1);
        demo.clipped = q1 != 0.5;
    }
    else
    {
        demo.stationary = (q1 - 1.0 / (2.0 * n)) * n / (n - 1.0);
        demo.closed_form = std::clamp(demo.stationary, 0.0, 1.0);
        demo.clipped = demo.closed_form != demo.stationary;
    }

    int const steps = 10000;
    double best = objective(0.0);
    demo.grid_argmin = 0.0;
    for (int i = 1; i <= steps; ++i)
    {
        double p1 = static_cast<double>(i) / steps;
        double v = objective(p1);
        if (v < best)
        {
            best = v;
            demo.grid_argmin = p1;
        }
    }
    return demo;
}

//---------------------------------------------------------------------------//
// Impossibility below the degree
//---------------------------------------------------------------------------//
struct LinearSystemResult
{
    bool feasible;
    std::size_t rank;
    std::size_t augmented_rank;
    std::size_t unknowns;
    std::size_t equations;
};

namespace detail {
inline std::size_t rational_rank(std::vector<std::vector<Rational>> rows, std::size_t cols)
{
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows.size(); ++c)
    {
        std::size_t pivot = rank;
        while (pivot < rows.size() && rows[pivot][c] == 0)
            ++pivot;
        if (pivot == rows.size())
            continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::size_t r = 0; r < rows.size(); ++r)
        {
            if (r == rank || rows[r][c] == 0)
                continue;
            Rational f = rows[r][c] / rows[rank][c];
            for (std::size_t k = c; k < cols; ++k)
                rows[r][k] -= f * rows[rank][k];
        }
        ++rank;
    }
    return rank;
}
}  // namespace detail

/*!
 * Is there any table L: H_n -> R with E_{H ~ p^n} L(H) = ell(p, q) at every
 * given model p? Solved exactly by comparing the rank of the pmf matrix with
 * the rank of the augmented system.
 */
inline LinearSystemResult rbb_unbiased_system(PolyDivergence<Rational> const& ell, Distribution<Rational> const& q,
                                              Count n, std::vector<Distribution<Rational>> const& models)
{
    auto hs = enumerate_histograms(q.size(), n);
    std::size_t const cols = hs.size();
    std::vector<std::vector<Rational>> A, Ab;
    for (auto const& p : models)
    {
        std::vector<Rational> row;
        row.reserve(cols + 1);
        for (auto const& h : hs)
            row.push_back(multinomial_pmf(h, n, p));
        A.push_back(row);
        row.push_back(ell.evaluate(p, q));
        Ab.push_back(std::move(row));
    }
    std::size_t rank = detail::rational_rank(A, cols);
    std::size_t aug = detail::rational_rank(Ab, cols + 1);
    return LinearSystemResult{rank == aug, rank, aug, cols, models.size()};
}

//---------------------------------------------------------------------------//
// Bregman / Jensen-gap helpers
//---------------------------------------------------------------------------//

//! D_G(a, b) = G(a) - [G(b) + <grad G(b), a - b>]
template<Scalar T>
T bregman_divergence(Polynomial<T> const& G, std::vector<Polynomial<T>> const& grad, std::span<T const> a,
                     std::span<T const> b)
{
    T linear = G.evaluate(b);
    for (std::size_t x = 0; x < a.size(); ++x)
        linear += grad[x].evaluate(b) * (a[x] - b[x]);
    return G.evaluate(a) - linear;
}

//! E[G(p_hat)] - G(p) for p_hat the empirical distribution of n draws.
template<Scalar T>
T jensen_gap(Polynomial<T> const& G, Distribution<T> const& p, Count n)
{
    auto law = detail::multinomial_law(p, n);
    T expected(0);
    for (std::size_t i = 0; i < law.histograms.size(); ++i)
        expected += law.weights[i] * G.evaluate(empirical<T>(law.histograms[i]).probs());
    return expected - G.evaluate(p.probs());
}

//! Midpoint convexity G((a+b)/2) <= (G(a)+G(b))/2 over all pairs of the
//! simplex grid of step 1/K. Returns the number of violating pairs.
template<Scalar T>
std::size_t convexity_violations(Polynomial<T> const& G, Count K)
{
    auto grid = simplex_grid<T>(G.dimension(), K);
    std::size_t violations = 0;
    std::vector<T> mid(G.dimension());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        for (std::size_t j = i + 1; j < grid.size(); ++j)
        {
            for (std::size_t x = 0; x < mid.size(); ++x)
                mid[x] = (grid[i][x] + grid[j][x]) / T(2);
            T lhs = G.evaluate(std::span<T const>(mid));
            T rhs = (G.evaluate(grid[i].probs()) + G.evaluate(grid[j].probs())) / T(2);
            if constexpr (is_exact_v<T>)
            {
                if (lhs > rhs)
                    ++violations;
            }
            else
            {
                if (lhs > rhs + 1e-12)
                    ++violations;
            }
        }
    }
    return violations;
}

//! Largest central-difference discrepancy between grad G and the supplied gradient.
inline double gradient_max_error(Polynomial<double> const& G, std::vector<Polynomial<double>> const& grad,
                                 std::vector<std::vector<double>> const& points, double step = 1e-5)
{
    double worst = 0;
    for (auto point : points)
    {
        for (std::size_t x = 0; x < point.size(); ++x)
        {
            double const orig = point[x];
            point[x] = orig + step;
            double up = G.evaluate(point);
            point[x] = orig - step;
            double down = G.evaluate(point);
            point[x] = orig;
            double fd = (up - down) / (2 * step);
            worst = std::max(worst, std::abs(fd - grad[x].evaluate(point)));
        }
    }
    return worst;
}

}  // namespace bbp
