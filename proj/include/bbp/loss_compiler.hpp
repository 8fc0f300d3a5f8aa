#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "divergences.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "numeric.hpp"

namespace bbp {

//---------------------------------------------------------------------------//
/*!
 * Black-box loss over a model histogram and a target histogram.
 *
 * Fixed-size schemes are enforced on every call: a histogram whose total does
 * not match the declared sample size raises TotalMismatch.
 */
template<Scalar T>
class CompiledLoss
{
  public:
    using value_type = T;
    using Evaluator = std::function<T(Histogram const&, Histogram const&)>;

    CompiledLoss(Evaluator evaluator, SamplingScheme scheme_p, SamplingScheme scheme_q, std::string provenance)
        : evaluator_(std::move(evaluator))
        , scheme_p_(scheme_p)
        , scheme_q_(scheme_q)
        , provenance_(std::move(provenance))
    {
    }

    T operator()(Histogram const& hp, Histogram const& hq) const
    {
        detail::require(hp.size() == hq.size(), ErrorCode::DimensionMismatch, "model and target histograms differ in size");
        check_total(scheme_p_, hp, "model");
        check_total(scheme_q_, hq, "target");
        return evaluator_(hp, hq);
    }

    SamplingScheme const& scheme_p() const noexcept { return scheme_p_; }
    SamplingScheme const& scheme_q() const noexcept { return scheme_q_; }
    std::string const& provenance() const noexcept { return provenance_; }

  private:
    static void check_total(SamplingScheme const& s, Histogram const& h, char const* side)
    {
        if (s.is_fixed() && h.total() != s.n())
            detail::fail(ErrorCode::TotalMismatch, std::string(side) + " histogram total " + std::to_string(h.total())
                                                       + " != required sample size " + std::to_string(s.n()));
    }

    Evaluator evaluator_;
    SamplingScheme scheme_p_;
    SamplingScheme scheme_q_;
    std::string provenance_;
};

//---------------------------------------------------------------------------//
/*!
 * Report-black-box loss: a model histogram of exactly n draws against a fully
 * known target distribution.
 */
template<Scalar T>
class RbbLoss
{
  public:
    using value_type = T;
    using Evaluator = std::function<T(Histogram const&, Distribution<T> const&)>;

    RbbLoss(Evaluator evaluator, int n, std::string provenance)
        : evaluator_(std::move(evaluator)), n_(n), provenance_(std::move(provenance))
    {
        detail::require(n_ >= 1, ErrorCode::InvalidArgument, "sample size must be >= 1");
    }

    T operator()(Histogram const& h, Distribution<T> const& q) const
    {
        detail::require(h.size() == q.size(), ErrorCode::DimensionMismatch, "histogram and target differ in size");
        if (h.total() != n_)
            detail::fail(ErrorCode::TotalMismatch, "histogram total " + std::to_string(h.total())
                                                       + " != required sample size " + std::to_string(n_));
        return evaluator_(h, q);
    }

    int n() const noexcept { return n_; }
    std::string const& provenance() const noexcept { return provenance_; }

  private:
    Evaluator evaluator_;
    int n_;
    std::string provenance_;
};

//! Estimator that only consumes target draws (the Shannon entropy estimator).
template<Scalar T>
class TargetEstimator
{
  public:
    using value_type = T;
    using Evaluator = std::function<T(Histogram const&)>;

    TargetEstimator(Evaluator evaluator, SamplingScheme scheme, std::string provenance)
        : evaluator_(std::move(evaluator)), scheme_(scheme), provenance_(std::move(provenance))
    {
    }

    T operator()(Histogram const& hq) const
    {
        if (scheme_.is_fixed() && hq.total() != scheme_.n())
            detail::fail(ErrorCode::TotalMismatch, "target histogram total does not match the sample size");
        return evaluator_(hq);
    }

    SamplingScheme const& scheme() const noexcept { return scheme_; }
    std::string const& provenance() const noexcept { return provenance_; }

  private:
    Evaluator evaluator_;
    SamplingScheme scheme_;
    std::string provenance_;
};

//---------------------------------------------------------------------------//
// MVUE-substitution compiler
//---------------------------------------------------------------------------//

/*!
 * Replace each monomial a * p^i * q^j of a joint polynomial by
 * a * t_{n,i}(h^p) * t_{m,j}(h^q). The expected loss equals the divergence.
 *
 * Throws DegreeGateError unless n >= deg_p and m >= deg_q; those degrees are
 * the smallest sample sizes at which any unbiased loss exists.
 */
template<Scalar T>
CompiledLoss<T> compile_bb(PolyDivergence<T> const& ell, int n, int m)
{
    if (n < ell.deg_p() || m < ell.deg_q() || n < 1 || m < 1)
    {
        int const need_n = std::max(ell.deg_p(), 1);
        int const need_m = std::max(ell.deg_q(), 1);
        throw DegreeGateError(need_n, need_m,
                              "divergence '" + ell.name() + "' cannot be implemented with n=" + std::to_string(n)
                                  + ", m=" + std::to_string(m));
    }
    auto evaluator = [ell, n, m](Histogram const& hp, Histogram const& hq) -> T {
        detail::require(hp.size() == ell.dimension(), ErrorCode::DimensionMismatch,
                        "histogram size does not match divergence dimension");
        T sum(0);
        for (auto const& mono : ell.monomials())
        {
            T tp = multinomial_monomial_mvue<T>(hp, n, mono.p_exps);
            if (tp == 0)
                continue;
            sum += mono.coeff * tp * multinomial_monomial_mvue<T>(hq, m, mono.q_exps);
        }
        return sum;
    };
    return CompiledLoss<T>(std::move(evaluator), SamplingScheme::fixed(n), SamplingScheme::fixed(m),
                           "mvue(" + ell.name() + ", n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
}

/*!
 * Report-black-box variant: the joint polynomial is partially evaluated at
 * the known target, then each remaining p-monomial is replaced by its MVUE.
 */
template<Scalar T>
RbbLoss<T> compile_rbb(PolyDivergence<T> const& ell, int n)
{
    if (n < ell.deg_p() || n < 1)
        throw DegreeGateError(std::max(ell.deg_p(), 1), 0,
                              "divergence '" + ell.name() + "' cannot be implemented with n=" + std::to_string(n));
    auto evaluator = [ell, n](Histogram const& h, Distribution<T> const& q) -> T {
        detail::require(h.size() == ell.dimension(), ErrorCode::DimensionMismatch,
                        "histogram size does not match divergence dimension");
        T sum(0);
        for (auto const& mono : ell.monomials())
        {
            T tp = multinomial_monomial_mvue<T>(h, n, mono.p_exps);
            if (tp == 0)
                continue;
            sum += mono.coeff * detail::power_product(q.probs(), mono.q_exps) * tp;
        }
        return sum;
    };
    return RbbLoss<T>(std::move(evaluator), n, "mvue-rbb(" + ell.name() + ", n=" + std::to_string(n) + ")");
}

//---------------------------------------------------------------------------//
// Closed-form squared losses
//---------------------------------------------------------------------------//

//! ||p_hat - q||^2 - sum_x s^2_n(p_hat_x)
template<Scalar T>
RbbLoss<T> squared_loss_rbb(int n)
{
    if (n < 2)
        detail::fail(ErrorCode::SampleTooSmall, "squared loss needs n >= 2");
    auto evaluator = [n](Histogram const& h, Distribution<T> const& q) -> T {
        T sum(0);
        T const total(n);
        for (std::size_t x = 0; x < h.size(); ++x)
        {
            T const phat = T(h[x]) / total;
            T const diff = phat - q[x];
            sum += diff * diff - variance_mvue<T>(phat, n);
        }
        return sum;
    };
    return RbbLoss<T>(std::move(evaluator), n, "squared-rbb(n=" + std::to_string(n) + ")");
}

//! Non-zero entries of a histogram, sorted by outcome index.
struct SparseCounts
{
    std::vector<std::pair<std::size_t, Count>> entries;
    Count total = 0;

    static SparseCounts from(Histogram const& h)
    {
        SparseCounts s;
        s.total = h.total();
        for (std::size_t x = 0; x < h.size(); ++x)
        {
            if (h[x] != 0)
                s.entries.emplace_back(x, h[x]);
        }
        return s;
    }
};

template<Scalar T>
struct SparseEvaluation
{
    T value;
    std::size_t coordinates_visited;
};

/*!
 * Two-sample squared loss
 *   sum_x h^p_x(h^p_x-1)/(n(n-1)) - 2 h^p_x h^q_x/(nm) + h^q_x(h^q_x-1)/(m(m-1)).
 * Only outcomes observed in either sample contribute, so at most n + m
 * coordinates are visited regardless of the domain size.
 */
template<Scalar T>
SparseEvaluation<T> squared_loss_bb_sparse(SparseCounts const& hp, SparseCounts const& hq, int n, int m)
{
    if (n < 2 || m < 2)
        detail::fail(ErrorCode::SampleTooSmall, "squared loss needs n >= 2 and m >= 2");
    if (hp.total != n || hq.total != m)
        detail::fail(ErrorCode::TotalMismatch, "sample totals do not match (n, m)");
    T const nn = T(n) * T(n - 1);
    T const mm = T(m) * T(m - 1);
    T const nm = T(n) * T(m);
    auto term = [&](Count a, Count b) { return T(a * (a - 1)) / nn - T(2 * a * b) / nm + T(b * (b - 1)) / mm; };

    T sum(0);
    std::size_t visited = 0;
    auto ip = hp.entries.begin();
    auto iq = hq.entries.begin();
    while (ip != hp.entries.end() || iq != hq.entries.end())
    {
        ++visited;
        if (iq == hq.entries.end() || (ip != hp.entries.end() && ip->first < iq->first))
        {
            sum += term(ip->second, 0);
            ++ip;
        }
        else if (ip == hp.entries.end() || iq->first < ip->first)
        {
            sum += term(0, iq->second);
            ++iq;
        }
        else
        {
            sum += term(ip->second, iq->second);
            ++ip;
            ++iq;
        }
    }
    return {sum, visited};
}

template<Scalar T>
CompiledLoss<T> squared_loss_bb(int n, int m)
{
    if (n < 2 || m < 2)
        detail::fail(ErrorCode::SampleTooSmall, "squared loss needs n >= 2 and m >= 2");
    auto evaluator = [n, m](Histogram const& hp, Histogram const& hq) -> T {
        return squared_loss_bb_sparse<T>(SparseCounts::from(hp), SparseCounts::from(hq), n, m).value;
    };
    return CompiledLoss<T>(std::move(evaluator), SamplingScheme::fixed(n), SamplingScheme::fixed(m),
                           "squared-bb(n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
}

//---------------------------------------------------------------------------//
// Poisson-sampling losses built on the Taylor series of ln
//---------------------------------------------------------------------------//
namespace detail {

//! sum_{k>=1} (1/k) rate^{-k} (t)_k, unbiased for -ln(1 - theta) = sum theta^k / k
//! when t ~ Poi(rate * theta).
template<Scalar T>
T ln_series(Count t, T const& rate)
{
    return poisson_power_series<T>(t, [](int k) { return T(1) / T(k); }, rate);
}

template<Scalar T>
T cross_entropy_terms(Histogram const& hp, Histogram const& hq, T const& alpha, T const& target_scale)
{
    T sum(0);
    for (std::size_t x = 0; x < hq.size(); ++x)
    {
        if (hq[x] == 0)
            continue;
        sum += T(hq[x]) / target_scale * ln_series<T>(hp.complement(x), alpha);
    }
    return sum;
}

template<Scalar T>
T entropy_terms(Histogram const& hq, T const& beta)
{
    T sum(0);
    for (std::size_t x = 0; x < hq.size(); ++x)
    {
        if (hq[x] == 0)
            continue;
        sum += T(hq[x]) / beta * ln_series<T>(hq.complement(x), beta);
    }
    return sum;
}

inline void require_rate(double rate, char const* name)
{
    require(rate > 0 && std::isfinite(rate), ErrorCode::InvalidArgument, std::string(name) + " must be > 0");
}

}  // namespace detail

/*!
 * Cross entropy -sum_x q_x ln p_x under Poisson(alpha) model draws and
 * Poisson(beta) target draws:
 *   L = sum_x (h^q_x / beta) sum_{k=1}^{h^p_{-x}} (1/k) alpha^{-k} (h^p_{-x})_k.
 * Finite for every pair of histograms.
 */
template<Scalar T>
CompiledLoss<T> cross_entropy_poisson(T const& alpha, T const& beta)
{
    detail::require_rate(to_double(alpha), "alpha");
    detail::require_rate(to_double(beta), "beta");
    auto evaluator = [alpha, beta](Histogram const& hp, Histogram const& hq) -> T {
        return detail::cross_entropy_terms<T>(hp, hq, alpha, beta);
    };
    return CompiledLoss<T>(std::move(evaluator), SamplingScheme::poisson(to_double(alpha)),
                           SamplingScheme::poisson(to_double(beta)),
                           "cross-entropy-poisson(alpha=" + format_scalar(alpha) + ", beta=" + format_scalar(beta) + ")");
}

//! Cross entropy with Poisson(alpha) model draws and exactly m target draws.
template<Scalar T>
CompiledLoss<T> cross_entropy_poisson_fixed_q(T const& alpha, int m)
{
    detail::require_rate(to_double(alpha), "alpha");
    detail::require(m >= 1, ErrorCode::InvalidArgument, "m must be >= 1");
    auto evaluator = [alpha, m](Histogram const& hp, Histogram const& hq) -> T {
        return detail::cross_entropy_terms<T>(hp, hq, alpha, T(m));
    };
    return CompiledLoss<T>(std::move(evaluator), SamplingScheme::poisson(to_double(alpha)), SamplingScheme::fixed(m),
                           "cross-entropy-poisson(alpha=" + format_scalar(alpha) + ", m=" + std::to_string(m) + ")");
}

/*!
 * Shannon entropy -sum_x q_x ln q_x from Poisson(beta) target draws:
 *   sum_x (h^q_x / beta) sum_{k=1}^{h^q_{-x}} (1/k) beta^{-k} (h^q_{-x})_k.
 * Uses the independence of h^q_x and h^q_{-x} under Poisson sampling.
 */
template<Scalar T>
TargetEstimator<T> entropy_poisson(T const& beta)
{
    detail::require_rate(to_double(beta), "beta");
    auto evaluator = [beta](Histogram const& hq) -> T { return detail::entropy_terms<T>(hq, beta); };
    return TargetEstimator<T>(std::move(evaluator), SamplingScheme::poisson(to_double(beta)),
                              "entropy-poisson(beta=" + format_scalar(beta) + ")");
}

//! KL(q || p) = sum_x q_x ln(q_x / p_x): the cross-entropy loss minus the entropy estimator.
template<Scalar T>
CompiledLoss<T> kl_poisson(T const& alpha, T const& beta)
{
    detail::require_rate(to_double(alpha), "alpha");
    detail::require_rate(to_double(beta), "beta");
    auto evaluator = [alpha, beta](Histogram const& hp, Histogram const& hq) -> T {
        return detail::cross_entropy_terms<T>(hp, hq, alpha, beta) - detail::entropy_terms<T>(hq, beta);
    };
    return CompiledLoss<T>(std::move(evaluator), SamplingScheme::poisson(to_double(alpha)),
                           SamplingScheme::poisson(to_double(beta)),
                           "kl-poisson(alpha=" + format_scalar(alpha) + ", beta=" + format_scalar(beta) + ")");
}

//---------------------------------------------------------------------------//
// Bregman construction
//---------------------------------------------------------------------------//

//! Polynomial in a single distribution: sum_k a_k prod_x x^{j_k}.
template<Scalar T>
class Polynomial
{
  public:
    struct Term
    {
        T coeff;
        ExponentVector exps;
    };

    Polynomial(std::size_t d, std::vector<Term> terms) : d_(d), terms_(std::move(terms))
    {
        for (auto const& t : terms_)
        {
            detail::require(t.exps.size() == d_, ErrorCode::DimensionMismatch, "term exponent size mismatch");
            degree_ = std::max(degree_, t.exps.degree());
        }
    }

    std::size_t dimension() const noexcept { return d_; }
    int degree() const noexcept { return degree_; }
    std::vector<Term> const& terms() const noexcept { return terms_; }

    T evaluate(std::span<T const> point) const
    {
        detail::require(point.size() == d_, ErrorCode::DimensionMismatch, "point dimension mismatch");
        T sum(0);
        for (auto const& t : terms_)
            sum += t.coeff * detail::power_product(point, t.exps);
        return sum;
    }

    //! Unbiased estimate of the polynomial at p from a histogram of n draws.
    T estimate(Histogram const& h, Count n) const
    {
        T sum(0);
        for (auto const& t : terms_)
            sum += t.coeff * multinomial_monomial_mvue<T>(h, n, t.exps);
        return sum;
    }

  private:
    std::size_t d_;
    std::vector<Term> terms_;
    int degree_ = 0;
};

//! G(x) = ||x||^2 and its gradient 2 x.
template<Scalar T>
std::pair<Polynomial<T>, std::vector<Polynomial<T>>> squared_norm_potential(std::size_t d)
{
    std::vector<typename Polynomial<T>::Term> terms;
    std::vector<Polynomial<T>> grad;
    for (std::size_t x = 0; x < d; ++x)
    {
        terms.push_back({T(1), ExponentVector::unit(d, x, 2)});
        grad.emplace_back(d, std::vector<typename Polynomial<T>::Term>{{T(2), ExponentVector::unit(d, x, 1)}});
    }
    return {Polynomial<T>(d, std::move(terms)), std::move(grad)};
}

/*!
 * Loss whose expectation is the Bregman divergence D_G(p, q):
 *   L(h, q) = est(G)(h) - [G(q) + <grad G(q), p_hat - q>],
 * with est(G) the monomial-wise MVUE of G. The caller supplies grad G; its
 * consistency and the convexity of G are audited by the verifier.
 */
template<Scalar T>
RbbLoss<T> bregman_rbb(Polynomial<T> const& G, std::vector<Polynomial<T>> const& grad, int n)
{
    detail::require(grad.size() == G.dimension(), ErrorCode::DimensionMismatch, "gradient needs one polynomial per coordinate");
    if (n < G.degree() || n < 1)
        throw DegreeGateError(std::max(G.degree(), 1), 0, "potential of degree " + std::to_string(G.degree())
                                                              + " cannot be estimated from n=" + std::to_string(n));
    auto evaluator = [G, grad, n](Histogram const& h, Distribution<T> const& q) -> T {
        T linear = G.evaluate(q.probs());
        T const total(n);
        for (std::size_t x = 0; x < h.size(); ++x)
            linear += grad[x].evaluate(q.probs()) * (T(h[x]) / total - q[x]);
        return G.estimate(h, n) - linear;
    };
    return RbbLoss<T>(std::move(evaluator), n, "bregman-rbb(n=" + std::to_string(n) + ")");
}

}  // namespace bbp
