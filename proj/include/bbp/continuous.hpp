#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "estimators.hpp"
#include "numeric.hpp"
#include "sampling.hpp"

namespace bbp {

//---------------------------------------------------------------------------//
/*!
 * Finite multiset of reals. Values are kept sorted; order of the input does
 * not matter to any loss.
 */
template<Scalar T>
class RealSample
{
  public:
    RealSample(std::vector<T> values) : values_(std::move(values))
    {
        detail::require(!values_.empty(), ErrorCode::InvalidArgument, "sample must be non-empty");
        if constexpr (!is_exact_v<T>)
        {
            for (auto const& v : values_)
                detail::require(std::isfinite(v), ErrorCode::InvalidArgument, "sample values must be finite");
        }
        std::sort(values_.begin(), values_.end());
    }

    RealSample(std::initializer_list<T> values) : RealSample(std::vector<T>(values)) {}

    std::size_t size() const noexcept { return values_.size(); }
    std::vector<T> const& values() const noexcept { return values_; }
    T const& min() const { return values_.front(); }
    T const& max() const { return values_.back(); }

    //! Number of values <= x.
    std::size_t count_at_most(T const& x) const
    {
        return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), x) - values_.begin());
    }

  private:
    std::vector<T> values_;
};

//! Points in R^j sharing one dimension.
class VectorSample
{
  public:
    VectorSample(std::vector<std::vector<double>> points) : points_(std::move(points))
    {
        detail::require(!points_.empty(), ErrorCode::InvalidArgument, "sample must be non-empty");
        dim_ = points_.front().size();
        detail::require(dim_ >= 1, ErrorCode::InvalidArgument, "points must have at least one coordinate");
        for (auto const& p : points_)
        {
            if (p.size() != dim_)
                detail::fail(ErrorCode::DimensionMismatch, "points of different dimension in one sample");
            for (double c : p)
                detail::require(std::isfinite(c), ErrorCode::InvalidArgument, "coordinates must be finite");
        }
    }

    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dimension() const noexcept { return dim_; }
    std::vector<std::vector<double>> const& points() const noexcept { return points_; }

  private:
    std::vector<std::vector<double>> points_;
    std::size_t dim_ = 0;
};

//! Right-continuous empirical CDF: |{i : X_i <= x}| / n.
template<Scalar T>
T ecdf(RealSample<T> const& s, T const& x)
{
    return T(static_cast<Count>(s.count_at_most(x))) / T(static_cast<Count>(s.size()));
}

namespace detail {

template<Scalar T>
std::vector<T> merged_breakpoints(std::vector<T> const& a, std::vector<T> const& b)
{
    std::vector<T> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

//! a (1 - a) / (n - 1): the unbiased variance estimate of an n-draw frequency.
template<Scalar T>
T frequency_variance(T const& a, Count n)
{
    return variance_mvue(a, n);
}

/*!
 * Sum over the gaps between consecutive breakpoints of integrand(F_s, F_u)
 * times the gap width, with F_s and F_u the ECDF values on the gap.
 */
template<Scalar T, class Integrand>
T breakpoint_integral(std::vector<T> const& s, std::vector<T> const& u, Integrand&& integrand)
{
    auto points = merged_breakpoints(s, u);
    T const ns(static_cast<Count>(s.size()));
    T const nu(static_cast<Count>(u.size()));
    T sum(0);
    std::size_t is = 0, iu = 0;
    for (std::size_t k = 0; k + 1 < points.size(); ++k)
    {
        while (is < s.size() && s[is] <= points[k])
            ++is;
        while (iu < u.size() && u[iu] <= points[k])
            ++iu;
        T const width = points[k + 1] - points[k];
        sum += integrand(T(static_cast<Count>(is)) / ns, T(static_cast<Count>(iu)) / nu) * width;
    }
    return sum;
}

}  // namespace detail

/*!
 * Integral of (F_s - F_u)^2 - v_n(F_s) - v_m(F_u) over the real line, where
 * v_k(a) = a(1-a)/(k-1). Unbiased for the Cramer distance between the laws of
 * s and u.
 */
template<Scalar T>
T cramer_loss(RealSample<T> const& s, RealSample<T> const& u)
{
    if (s.size() < 2 || u.size() < 2)
        detail::fail(ErrorCode::SampleTooSmall, "cramer loss needs at least 2 values in each sample");
    Count const n = static_cast<Count>(s.size());
    Count const m = static_cast<Count>(u.size());
    return detail::breakpoint_integral(s.values(), u.values(), [&](T const& fs, T const& fu) {
        T diff = fs - fu;
        return diff * diff - detail::frequency_variance(fs, n) - detail::frequency_variance(fu, m);
    });
}

//! Integral of (F_s - 1{x >= y})^2 - v_n(F_s): the model-corrected CRPS.
template<Scalar T>
T crps(RealSample<T> const& s, T const& y)
{
    if (s.size() < 2)
        detail::fail(ErrorCode::SampleTooSmall, "crps needs at least 2 model values");
    Count const n = static_cast<Count>(s.size());
    return detail::breakpoint_integral(s.values(), std::vector<T>{y}, [&](T const& fs, T const& fy) {
        T diff = fs - fy;
        return diff * diff - detail::frequency_variance(fs, n);
    });
}

//! Sum_{i != j} |x_i - x_j| over ordered pairs, via sorted prefix sums.
template<Scalar T>
T within_pair_distance_sum(std::vector<T> const& sorted)
{
    T sum(0);
    T prefix(0);
    for (std::size_t i = 0; i < sorted.size(); ++i)
    {
        sum += T(static_cast<Count>(i)) * sorted[i] - prefix;
        prefix += sorted[i];
    }
    return T(2) * sum;
}

/*!
 * U-statistic energy loss: 2 mean|x - y| - mean_{i != j}|x_i - x_j|
 * - mean_{i != j}|y_i - y_j|.
 */
template<Scalar T>
T energy_loss(RealSample<T> const& s, RealSample<T> const& u)
{
    if (s.size() < 2 || u.size() < 2)
        detail::fail(ErrorCode::SampleTooSmall, "energy loss needs at least 2 values in each sample");
    T cross(0);
    for (auto const& x : s.values())
    {
        for (auto const& y : u.values())
        {
            T diff = x - y;
            cross += diff < 0 ? T(-diff) : diff;
        }
    }
    T const n(static_cast<Count>(s.size()));
    T const m(static_cast<Count>(u.size()));
    return T(2) * cross / (n * m) - within_pair_distance_sum(s.values()) / (n * (n - T(1)))
           - within_pair_distance_sum(u.values()) / (m * (m - T(1)));
}

//---------------------------------------------------------------------------//
//! Distribution on finitely many real points.
template<Scalar T>
struct FiniteLaw
{
    std::vector<T> support;
    std::vector<T> weights;

    T cdf(T const& x) const
    {
        T acc(0);
        for (std::size_t i = 0; i < support.size(); ++i)
        {
            if (support[i] <= x)
                acc += weights[i];
        }
        return acc;
    }
};

//! Integral of (F_p - F_q)^2 for finite-support laws, exact in T.
template<Scalar T>
T cramer_distance_oracle(FiniteLaw<T> const& p, FiniteLaw<T> const& q)
{
    detail::require(p.support.size() == p.weights.size() && q.support.size() == q.weights.size(),
                    ErrorCode::DimensionMismatch, "support and weights differ in length");
    std::vector<T> a = p.support, b = q.support;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    auto points = detail::merged_breakpoints(a, b);
    T sum(0);
    for (std::size_t k = 0; k + 1 < points.size(); ++k)
    {
        T diff = p.cdf(points[k]) - q.cdf(points[k]);
        sum += diff * diff * (points[k + 1] - points[k]);
    }
    return sum;
}

//---------------------------------------------------------------------------//
// Random projections
//---------------------------------------------------------------------------//

//! Uniform direction on the unit sphere of R^j: a normalized Gaussian vector.
inline std::vector<double> random_direction(std::size_t j, std::uint64_t seed)
{
    detail::require(j >= 1, ErrorCode::InvalidArgument, "dimension must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> v(j);
    while (true)
    {
        double norm2 = 0;
        for (auto& c : v)
        {
            c = normal(rng.engine());
            norm2 += c * c;
        }
        if (norm2 > 0)
        {
            double norm = std::sqrt(norm2);
            for (auto& c : v)
                c /= norm;
            return v;
        }
    }
}

inline RealSample<double> project(VectorSample const& s, std::vector<double> const& v)
{
    detail::require(s.dimension() == v.size(), ErrorCode::DimensionMismatch, "direction and sample dimension differ");
    std::vector<double> out;
    out.reserve(s.size());
    for (auto const& p : s.points())
    {
        double dot = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            dot += p[i] * v[i];
        out.push_back(dot);
    }
    return RealSample<double>(std::move(out));
}

//! Cramer loss of both samples projected onto a seeded random direction.
inline double projected_cramer_loss(VectorSample const& s, VectorSample const& u, std::uint64_t seed)
{
    if (s.dimension() != u.dimension())
        detail::fail(ErrorCode::DimensionMismatch, "samples live in different dimensions");
    if (s.size() < 2 || u.size() < 2)
        detail::fail(ErrorCode::SampleTooSmall, "projected cramer loss needs at least 2 points in each sample");
    auto v = random_direction(s.dimension(), seed);
    return cramer_loss(project(s, v), project(u, v));
}

//---------------------------------------------------------------------------//
// Sample files
//---------------------------------------------------------------------------//

namespace detail {
inline double parse_real(std::string const& text, std::string const& where)
{
    std::size_t used = 0;
    double v = 0;
    try
    {
        v = std::stod(text, &used);
    }
    catch (std::exception const&)
    {
        fail(ErrorCode::ParseError, where + ": '" + text + "' is not a number");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used])))
        ++used;
    if (used != text.size() || !std::isfinite(v))
        fail(ErrorCode::ParseError, where + ": '" + text + "' is not a finite number");
    return v;
}

inline std::vector<std::string> sample_lines(std::string const& path)
{
    std::ifstream in(path);
    require(in.good(), ErrorCode::InvalidArgument, "cannot open sample file '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            lines.push_back(line);
    }
    return lines;
}
}  // namespace detail

//! One real per line.
inline RealSample<double> read_real_sample(std::string const& path)
{
    std::vector<double> values;
    std::size_t lineno = 0;
    for (auto const& line : detail::sample_lines(path))
        values.push_back(detail::parse_real(line, path + ":" + std::to_string(++lineno)));
    return RealSample<double>(std::move(values));
}

//! Comma-separated reals per line.
inline VectorSample read_vector_sample(std::string const& path)
{
    std::vector<std::vector<double>> points;
    std::size_t lineno = 0;
    for (auto const& line : detail::sample_lines(path))
    {
        std::string where = path + ":" + std::to_string(++lineno);
        std::vector<double> point;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            point.push_back(detail::parse_real(field, where));
        points.push_back(std::move(point));
    }
    return VectorSample(std::move(points));
}

}  // namespace bbp
