#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "numeric.hpp"

namespace bbp {

//---------------------------------------------------------------------------//
/*!
 * Per-outcome exponents of a monomial. The degree is the total exponent.
 */
class ExponentVector
{
  public:
    ExponentVector() = default;

    explicit ExponentVector(std::vector<int> exps) : exps_(std::move(exps))
    {
        for (int e : exps_)
        {
            detail::require(e >= 0, ErrorCode::InvalidArgument, "negative exponent");
            degree_ += e;
        }
    }

    ExponentVector(std::initializer_list<int> exps) : ExponentVector(std::vector<int>(exps)) {}

    static ExponentVector zero(std::size_t d) { return ExponentVector(std::vector<int>(d, 0)); }

    //! Single coordinate raised to \c power.
    static ExponentVector unit(std::size_t d, std::size_t x, int power = 1)
    {
        std::vector<int> e(d, 0);
        e.at(x) = power;
        return ExponentVector(std::move(e));
    }

    std::size_t size() const noexcept { return exps_.size(); }
    int degree() const noexcept { return degree_; }
    int operator[](std::size_t x) const { return exps_[x]; }
    std::span<int const> exps() const noexcept { return exps_; }

    auto operator<=>(ExponentVector const& other) const { return exps_ <=> other.exps_; }
    bool operator==(ExponentVector const& other) const { return exps_ == other.exps_; }

  private:
    std::vector<int> exps_;
    int degree_ = 0;
};

//---------------------------------------------------------------------------//
//! t (t-1) ... (t-k+1); the empty product is one.
template<Scalar T>
T falling_factorial(Count t, int k)
{
    T result(1);
    for (int i = 0; i < k; ++i)
    {
        Count factor = t - i;
        if (factor <= 0)
            return T(0);
        result *= T(factor);
    }
    return result;
}

//! Unbiased estimator of alpha^k from T ~ Bin(m, alpha).
template<Scalar T>
T binom_mvue(Count t, Count m, int k)
{
    detail::require(k >= 0, ErrorCode::InvalidArgument, "negative exponent");
    if (k > m)
        detail::fail(ErrorCode::DegreeExceedsSample,
                     "exponent " + std::to_string(k) + " exceeds sample size " + std::to_string(m));
    detail::require(t >= 0 && t <= m, ErrorCode::InvalidArgument, "count outside [0, m]");
    if (k == 0)
        return T(1);
    if (t < k)
        return T(0);
    return falling_factorial<T>(t, k) / falling_factorial<T>(m, k);
}

//---------------------------------------------------------------------------//
/*!
 * Minimum-variance unbiased estimator of prod_x p_x^{j_x} from a multinomial
 * histogram of \c n draws.
 *
 * Numerator falling factorials are accumulated before the single division by
 * n (n-1) ... (n-deg+1).
 */
template<Scalar T>
T multinomial_monomial_mvue(Histogram const& h, Count n, ExponentVector const& j)
{
    if (h.size() != j.size())
        detail::fail(ErrorCode::DimensionMismatch, "histogram and exponent vector differ in size");
    if (h.total() != n)
        detail::fail(ErrorCode::TotalMismatch,
                     "histogram total " + std::to_string(h.total()) + " != sample size " + std::to_string(n));
    if (j.degree() > n)
        detail::fail(ErrorCode::DegreeExceedsSample,
                     "monomial degree " + std::to_string(j.degree()) + " exceeds sample size " + std::to_string(n));

    T numerator(1);
    for (std::size_t x = 0; x < h.size(); ++x)
    {
        if (j[x] == 0)
            continue;
        if (h[x] < j[x])
            return T(0);
        numerator *= falling_factorial<T>(h[x], j[x]);
    }
    return numerator / falling_factorial<T>(n, j.degree());
}

//! Unbiased estimator of theta^k from T ~ Poi(theta): the falling factorial.
template<Scalar T>
T poisson_factorial(Count t, int k)
{
    detail::require(t >= 0 && k >= 0, ErrorCode::InvalidArgument, "negative count or exponent");
    return falling_factorial<T>(t, k);
}

//! Unbiased estimator of Var(alpha_hat) for a binomial proportion of n draws:
//! [a(1-a)^2 + (1-a)a^2] / (n-1).
template<Scalar T>
T variance_mvue(T const& alpha_hat, Count n)
{
    if (n < 2)
        detail::fail(ErrorCode::SampleTooSmall, "variance estimator needs n >= 2");
    detail::require(alpha_hat >= 0 && alpha_hat <= 1, ErrorCode::InvalidArgument, "frequency outside [0, 1]");
    T const one_minus = T(1) - alpha_hat;
    return (alpha_hat * one_minus * one_minus + one_minus * alpha_hat * alpha_hat) / T(n - 1);
}

//---------------------------------------------------------------------------//
/*!
 * Sum_{k=1}^{t} a_k rate^{-k} t (t-1) ... (t-k+1).
 *
 * Unbiased for sum_k a_k theta^k when t ~ Poi(rate * theta). Terms with k > t
 * vanish, so the sum is finite for every count. Evaluated in ascending k with
 * the running product t (t-1) ... (t-k+1) / rate^k.
 */
template<Scalar T, class Coeff>
T poisson_power_series(Count t, Coeff&& coeff, T const& rate)
{
    detail::require(t >= 0, ErrorCode::InvalidArgument, "negative count");
    detail::require(rate > 0, ErrorCode::InvalidArgument, "rate must be positive");
    T sum(0);
    T scaled(1);
    for (Count k = 1; k <= t; ++k)
    {
        scaled *= T(t - k + 1);
        scaled /= rate;
        sum += T(coeff(static_cast<int>(k))) * scaled;
    }
    return sum;
}

}  // namespace bbp
