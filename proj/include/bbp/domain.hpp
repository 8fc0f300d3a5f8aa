#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"

namespace bbp {

using Count = std::int64_t;

//---------------------------------------------------------------------------//
/*!
 * Ordered set of outcome labels. Labels are mapped to indices at ingestion
 * and all math downstream is index based.
 */
class Domain
{
  public:
    explicit Domain(std::vector<std::string> labels) : labels_(std::move(labels))
    {
        detail::require(!labels_.empty(), ErrorCode::InvalidArgument, "domain must have at least one label");
        index_.reserve(labels_.size());
        for (std::size_t i = 0; i < labels_.size(); ++i)
        {
            bool inserted = index_.emplace(labels_[i], i).second;
            detail::require(inserted, ErrorCode::InvalidArgument, "duplicate domain label '" + labels_[i] + "'");
        }
    }

    //! Domain with labels "0", "1", ..., "d-1".
    static Domain indexed(std::size_t d)
    {
        std::vector<std::string> labels;
        labels.reserve(d);
        for (std::size_t i = 0; i < d; ++i)
            labels.push_back(std::to_string(i));
        return Domain(std::move(labels));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    std::string const& label(std::size_t i) const { return labels_.at(i); }
    std::vector<std::string> const& labels() const noexcept { return labels_; }

    bool contains(std::string const& label) const { return index_.count(label) != 0; }

    std::size_t index_of(std::string const& label) const
    {
        auto it = index_.find(label);
        if (it == index_.end())
            detail::fail(ErrorCode::TokenUnknown, "token '" + label + "' is not in the domain");
        return it->second;
    }

  private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

//! Tolerance on the total mass of a floating-point distribution.
inline constexpr double simplex_tolerance = 1e-12;

//---------------------------------------------------------------------------//
/*!
 * Probability vector over a finite domain.
 *
 * Exact mode requires the entries to sum to exactly one. Float mode accepts a
 * sum within \c simplex_tolerance of one and renormalizes.
 */
template<Scalar T>
class Distribution
{
  public:
    using value_type = T;
    static constexpr NumericMode mode = mode_of<T>;

    explicit Distribution(std::vector<T> probs) : probs_(std::move(probs))
    {
        detail::require(!probs_.empty(), ErrorCode::InvalidDistribution, "distribution over an empty domain");
        T sum(0);
        for (auto const& p : probs_)
        {
            if constexpr (!is_exact_v<T>)
                detail::require(std::isfinite(p), ErrorCode::InvalidDistribution, "non-finite probability");
            detail::require(p >= 0, ErrorCode::InvalidDistribution, "negative probability " + format_scalar(p));
            sum += p;
        }
        if constexpr (is_exact_v<T>)
        {
            detail::require(sum == 1, ErrorCode::InvalidDistribution,
                            "probabilities sum to " + format_scalar(sum) + ", not 1");
        }
        else
        {
            detail::require(std::abs(sum - 1.0) <= simplex_tolerance, ErrorCode::InvalidDistribution,
                            "probabilities sum to " + format_scalar(sum) + ", not 1");
            for (auto& p : probs_)
                p /= sum;
        }
    }

    Distribution(std::initializer_list<T> probs) : Distribution(std::vector<T>(probs)) {}

    std::size_t size() const noexcept { return probs_.size(); }
    T const& operator[](std::size_t i) const { return probs_[i]; }
    std::span<T const> probs() const noexcept { return probs_; }

    bool operator==(Distribution const&) const = default;

  private:
    std::vector<T> probs_;
};

//! Convert an exact distribution for use in floating-point code paths.
inline Distribution<double> to_float(Distribution<Rational> const& p)
{
    std::vector<double> probs;
    probs.reserve(p.size());
    for (auto const& x : p.probs())
        probs.push_back(to_double(x));
    return Distribution<double>(std::move(probs));
}

inline Distribution<double> to_float(Distribution<double> const& p) { return p; }

//---------------------------------------------------------------------------//
/*!
 * Count vector of a sample over the domain. The sufficient statistic every
 * loss consumes.
 */
class Histogram
{
  public:
    Histogram() = default;

    explicit Histogram(std::vector<Count> counts) : counts_(std::move(counts))
    {
        for (auto c : counts_)
        {
            detail::require(c >= 0, ErrorCode::InvalidArgument, "negative count in histogram");
            total_ += c;
        }
    }

    Histogram(std::initializer_list<Count> counts) : Histogram(std::vector<Count>(counts)) {}

    static Histogram zero(std::size_t d) { return Histogram(std::vector<Count>(d, 0)); }

    std::size_t size() const noexcept { return counts_.size(); }
    Count total() const noexcept { return total_; }
    Count operator[](std::size_t x) const { return counts_[x]; }
    std::span<Count const> counts() const noexcept { return counts_; }

    //! Number of draws that landed anywhere except \c x.
    Count complement(std::size_t x) const { return total_ - counts_.at(x); }

    void add(std::size_t x, Count k = 1)
    {
        counts_.at(x) += k;
        total_ += k;
    }

    bool operator==(Histogram const&) const = default;

  private:
    std::vector<Count> counts_;
    Count total_ = 0;
};

//---------------------------------------------------------------------------//
// Sampling schemes: how many draws a loss consumes from each side.
//---------------------------------------------------------------------------//
struct FixedSize
{
    int n;
    bool operator==(FixedSize const&) const = default;
};

struct PoissonSize
{
    double rate;
    bool operator==(PoissonSize const&) const = default;
};

class SamplingScheme
{
  public:
    using Variant = std::variant<FixedSize, PoissonSize>;

    static SamplingScheme fixed(int n)
    {
        detail::require(n >= 1, ErrorCode::InvalidArgument, "fixed sample size must be >= 1");
        return SamplingScheme(FixedSize{n});
    }

    static SamplingScheme poisson(double rate)
    {
        detail::require(rate > 0 && std::isfinite(rate), ErrorCode::InvalidArgument, "Poisson rate must be > 0");
        return SamplingScheme(PoissonSize{rate});
    }

    bool is_fixed() const noexcept { return std::holds_alternative<FixedSize>(v_); }
    bool is_poisson() const noexcept { return std::holds_alternative<PoissonSize>(v_); }
    int n() const { return std::get<FixedSize>(v_).n; }
    double rate() const { return std::get<PoissonSize>(v_).rate; }
    Variant const& variant() const noexcept { return v_; }

    std::string describe() const
    {
        if (is_fixed())
            return "fixed(" + std::to_string(n()) + ")";
        return "poisson(" + format_scalar(rate()) + ")";
    }

    bool operator==(SamplingScheme const&) const = default;

  private:
    explicit SamplingScheme(Variant v) : v_(v) {}
    Variant v_;
};

//---------------------------------------------------------------------------//
//! Empirical distribution counts / total.
template<Scalar T>
Distribution<T> empirical(Histogram const& h)
{
    detail::require(h.total() >= 1, ErrorCode::EmptyHistogram, "empirical distribution of an empty histogram");
    std::vector<T> probs;
    probs.reserve(h.size());
    T const total(h.total());
    for (auto c : h.counts())
        probs.push_back(T(c) / total);
    return Distribution<T>(std::move(probs));
}

//! Point mass at outcome \c x.
template<Scalar T>
Distribution<T> indicator(std::size_t x, std::size_t d)
{
    detail::require(x < d, ErrorCode::IndexOutOfRange,
                    "index " + std::to_string(x) + " outside domain of size " + std::to_string(d));
    std::vector<T> probs(d, T(0));
    probs[x] = T(1);
    return Distribution<T>(std::move(probs));
}

}  // namespace bbp
