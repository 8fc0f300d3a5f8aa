#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "combinatorics.hpp"
#include "domain.hpp"
#include "estimators.hpp"
#include "numeric.hpp"

namespace bbp {

//---------------------------------------------------------------------------//
/*!
 * coeff * prod_x p_x^{p_exps[x]} * prod_x q_x^{q_exps[x]}
 */
template<Scalar T>
struct Monomial
{
    T coeff;
    ExponentVector p_exps;
    ExponentVector q_exps;
};

namespace detail {
template<Scalar T>
T power_product(std::span<T const> base, ExponentVector const& exps)
{
    T result(1);
    for (std::size_t x = 0; x < exps.size(); ++x)
    {
        for (int e = 0; e < exps[x]; ++e)
            result *= base[x];
    }
    return result;
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * Divergence that is a polynomial jointly in the model p and target q.
 *
 * Monomials are kept sorted by exponent pair; each pair appears at most once
 * and coefficients are non-zero. The degrees in each argument are always
 * recomputed from the monomials.
 */
template<Scalar T>
class PolyDivergence
{
  public:
    using value_type = T;

    PolyDivergence(std::size_t d, std::vector<Monomial<T>> monomials, std::string name = "custom")
        : d_(d), monomials_(std::move(monomials)), name_(std::move(name))
    {
        detail::require(d_ >= 1, ErrorCode::InvalidArgument, "divergence over an empty domain");
        for (auto const& m : monomials_)
        {
            detail::require(m.p_exps.size() == d_ && m.q_exps.size() == d_, ErrorCode::DimensionMismatch,
                            "monomial exponent vector does not match domain size " + std::to_string(d_));
            detail::require(m.coeff != 0, ErrorCode::InvalidArgument, "monomial with zero coefficient");
            deg_p_ = std::max(deg_p_, m.p_exps.degree());
            deg_q_ = std::max(deg_q_, m.q_exps.degree());
        }
        std::sort(monomials_.begin(), monomials_.end(), [](auto const& a, auto const& b) {
            if (a.p_exps != b.p_exps)
                return a.p_exps < b.p_exps;
            return a.q_exps < b.q_exps;
        });
        for (std::size_t i = 1; i < monomials_.size(); ++i)
        {
            if (monomials_[i].p_exps == monomials_[i - 1].p_exps && monomials_[i].q_exps == monomials_[i - 1].q_exps)
                detail::fail(ErrorCode::DuplicateMonomial, "repeated exponent pair in divergence '" + name_ + "'");
        }
    }

    std::size_t dimension() const noexcept { return d_; }
    int deg_p() const noexcept { return deg_p_; }
    int deg_q() const noexcept { return deg_q_; }
    std::vector<Monomial<T>> const& monomials() const noexcept { return monomials_; }
    std::string const& name() const noexcept { return name_; }

    T evaluate(Distribution<T> const& p, Distribution<T> const& q) const
    {
        detail::require(p.size() == d_ && q.size() == d_, ErrorCode::DimensionMismatch,
                        "distribution size does not match divergence dimension");
        T sum(0);
        for (auto const& m : monomials_)
            sum += m.coeff * detail::power_product(p.probs(), m.p_exps) * detail::power_product(q.probs(), m.q_exps);
        return sum;
    }

    //! Same polynomial with coefficients in another numeric mode.
    template<Scalar U>
    PolyDivergence<U> convert() const
    {
        std::vector<Monomial<U>> out;
        out.reserve(monomials_.size());
        for (auto const& m : monomials_)
        {
            if constexpr (std::is_same_v<U, T>)
                out.push_back(m);
            else if constexpr (is_exact_v<U>)
                out.push_back({from_double<U>(to_double(m.coeff)), m.p_exps, m.q_exps});
            else
                out.push_back({to_double(m.coeff), m.p_exps, m.q_exps});
        }
        return PolyDivergence<U>(d_, std::move(out), name_);
    }

  private:
    std::size_t d_;
    std::vector<Monomial<T>> monomials_;
    std::string name_;
    int deg_p_ = 0;
    int deg_q_ = 0;
};

//---------------------------------------------------------------------------//
// Builtin polynomial divergences
//---------------------------------------------------------------------------//
namespace detail {
inline long long binomial(int n, int k)
{
    long long r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}
}  // namespace detail

//! sum_x (p_x - q_x)^k for even k >= 2, expanded per coordinate.
template<Scalar T>
PolyDivergence<T> builtin_lk_even(std::size_t d, int k)
{
    detail::require(d >= 1, ErrorCode::InvalidArgument, "domain size must be >= 1");
    if (k < 2 || k % 2 != 0)
        detail::fail(ErrorCode::OddExponent, "lk divergence needs an even exponent >= 2, got " + std::to_string(k));
    std::vector<Monomial<T>> terms;
    for (std::size_t x = 0; x < d; ++x)
    {
        for (int i = 0; i <= k; ++i)
        {
            long long c = detail::binomial(k, i);
            if ((k - i) % 2 != 0)
                c = -c;
            terms.push_back({T(c), ExponentVector::unit(d, x, i), ExponentVector::unit(d, x, k - i)});
        }
    }
    std::string name = k == 2 ? "l2" : "lk:" + std::to_string(k);
    return PolyDivergence<T>(d, std::move(terms), name);
}

//! ||p - q||_2^2
template<Scalar T>
PolyDivergence<T> builtin_l2(std::size_t d)
{
    return builtin_lk_even<T>(d, 2);
}

//! sum_x p_x^2 - 2 p_x q_x: degree 2 in the model, 1 in the target.
template<Scalar T>
PolyDivergence<T> builtin_brier(std::size_t d)
{
    detail::require(d >= 1, ErrorCode::InvalidArgument, "domain size must be >= 1");
    std::vector<Monomial<T>> terms;
    for (std::size_t x = 0; x < d; ++x)
    {
        terms.push_back({T(1), ExponentVector::unit(d, x, 2), ExponentVector::zero(d)});
        terms.push_back({T(-2), ExponentVector::unit(d, x, 1), ExponentVector::unit(d, x, 1)});
    }
    return PolyDivergence<T>(d, std::move(terms), "brier");
}

//! sum_x p_x q_x: degree one in each argument. Not strictly proper.
template<Scalar T>
PolyDivergence<T> builtin_inner_product(std::size_t d)
{
    std::vector<Monomial<T>> terms;
    for (std::size_t x = 0; x < d; ++x)
        terms.push_back({T(1), ExponentVector::unit(d, x, 1), ExponentVector::unit(d, x, 1)});
    return PolyDivergence<T>(d, std::move(terms), "inner-product");
}

//---------------------------------------------------------------------------//
/*!
 * Non-polynomial divergences that become estimable under Poisson sampling.
 *
 *  - CrossEntropy: -sum_x q_x ln p_x
 *  - KL: sum_x q_x ln(q_x / p_x)
 *  - ShannonEntropy: -sum_x q_x ln q_x (ignores p)
 */
enum class SeriesKind
{
    CrossEntropy,
    KL,
    ShannonEntropy
};

struct SeriesDivergence
{
    SeriesKind kind;

    std::string name() const
    {
        switch (kind)
        {
            case SeriesKind::CrossEntropy: return "cross-entropy";
            case SeriesKind::KL: return "kl";
            case SeriesKind::ShannonEntropy: return "entropy";
        }
        return "?";
    }

    //! Extended-real evaluation: +inf when q puts mass where p has none.
    double evaluate(Distribution<double> const& p, Distribution<double> const& q) const
    {
        detail::require(p.size() == q.size(), ErrorCode::DimensionMismatch, "distribution sizes differ");
        double sum = 0;
        for (std::size_t x = 0; x < q.size(); ++x)
        {
            double qx = q[x];
            if (qx == 0)
                continue;
            switch (kind)
            {
                case SeriesKind::CrossEntropy:
                    if (p[x] == 0)
                        return std::numeric_limits<double>::infinity();
                    sum -= qx * std::log(p[x]);
                    break;
                case SeriesKind::KL:
                    if (p[x] == 0)
                        return std::numeric_limits<double>::infinity();
                    sum += qx * std::log(qx / p[x]);
                    break;
                case SeriesKind::ShannonEntropy:
                    sum -= qx * std::log(qx);
                    break;
            }
        }
        return sum;
    }
};

//! Either kind of divergence, evaluated in floating point.
using Divergence = std::variant<PolyDivergence<double>, SeriesDivergence>;

template<Scalar T>
T eval_divergence(PolyDivergence<T> const& ell, Distribution<T> const& p, Distribution<T> const& q)
{
    return ell.evaluate(p, q);
}

inline double eval_divergence(SeriesDivergence const& ell, Distribution<double> const& p,
                              Distribution<double> const& q)
{
    return ell.evaluate(p, q);
}

inline double eval_divergence(Divergence const& ell, Distribution<double> const& p, Distribution<double> const& q)
{
    return std::visit([&](auto const& e) { return e.evaluate(p, q); }, ell);
}

inline std::string divergence_name(Divergence const& ell)
{
    return std::visit([](auto const& e) { return std::string(e.name()); }, ell);
}

//---------------------------------------------------------------------------//
// Properness audit
//---------------------------------------------------------------------------//
struct AuditRecord
{
    Distribution<double> argmin;
    double min_value;
    double value_at_target;
    //! min_value - ell(q, q); non-negative (up to rounding) for a proper divergence
    double gap;
    std::size_t grid_points;
};

//! Largest domain for which the audit grid is enumerated.
inline constexpr std::size_t audit_max_dimension = 4;

/*!
 * Minimize ell(., q) over the simplex grid of the given step. For a proper
 * divergence the minimum is attained at q whenever q is on the grid.
 */
inline AuditRecord properness_audit(Divergence const& ell, Distribution<double> const& q, double grid_step)
{
    detail::require(grid_step > 0 && grid_step <= 0.5, ErrorCode::InvalidArgument, "grid step must lie in (0, 1/2]");
    std::size_t const d = q.size();
    if (d > audit_max_dimension)
        detail::fail(ErrorCode::DomainTooLarge, "properness audit enumerates at most d = 4, got " + std::to_string(d));
    double const resolution = 1.0 / grid_step;
    Count const K = std::llround(resolution);
    detail::require(std::abs(resolution - static_cast<double>(K)) < 1e-9, ErrorCode::InvalidArgument,
                    "grid step must divide 1");

    std::optional<std::vector<double>> best;
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t points = 0;
    std::vector<double> probs(d);
    for_each_composition(K, d, [&](std::span<Count const> c) {
        for (std::size_t x = 0; x < d; ++x)
            probs[x] = static_cast<double>(c[x]) / static_cast<double>(K);
        ++points;
        double value = eval_divergence(ell, Distribution<double>(probs), q);
        if (!best || value < best_value)
        {
            best = probs;
            best_value = value;
        }
    });
    double at_q = eval_divergence(ell, q, q);
    return AuditRecord{Distribution<double>(*best), best_value, at_q, best_value - at_q, points};
}

}  // namespace bbp
