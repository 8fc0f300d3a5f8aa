#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "domain.hpp"
#include "error.hpp"
#include "loss_compiler.hpp"
#include "subprocess.hpp"

namespace bbp {

//---------------------------------------------------------------------------//
// Random streams
//---------------------------------------------------------------------------//

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/*!
 * Seed of stream \c i derived from a run seed. Replicate i of a run draws
 * only from streams derived from (seed, i), so results do not depend on
 * scheduling.
 */
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t i) noexcept
{
    return splitmix64(splitmix64(seed) ^ splitmix64(i + 0x632be59bd9b4e019ULL));
}

class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    //! Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t bits() { return engine_(); }

    std::mt19937_64& engine() noexcept { return engine_; }

  private:
    std::mt19937_64 engine_;
};

//! Poisson variate by sequential pmf inversion.
inline Count poisson_variate(Rng& rng, double rate)
{
    detail::require(rate > 0 && rate <= 500, ErrorCode::InvalidArgument, "Poisson rate must lie in (0, 500]");
    double u = rng.uniform();
    double pmf = std::exp(-rate);
    double cdf = pmf;
    Count k = 0;
    while (u >= cdf)
    {
        ++k;
        pmf *= rate / static_cast<double>(k);
        double next = cdf + pmf;
        if (next == cdf)
            break;
        cdf = next;
    }
    return k;
}

//---------------------------------------------------------------------------//
/*!
 * Source of i.i.d. tokens over a domain.
 *
 *  - Internal: a known distribution, sampled by inverse CDF over the domain
 *    order. Draws are a pure function of the seed.
 *  - FileStream: consecutive lines of a file, one label per line. Seeds are
 *    ignored; each draw consumes the next tokens.
 *  - Subprocess: an external generator. The harness writes "N" and reads N
 *    label lines back; "0" asks it to exit.
 *
 * Copies share the underlying file or process. Reads from file and process
 * sources are serialized by a mutex.
 */
class SampleSource
{
  public:
    enum class Kind
    {
        Internal,
        FileStream,
        Subprocess
    };

    static SampleSource internal(Domain domain, Distribution<double> p)
    {
        detail::require(domain.size() == p.size(), ErrorCode::DimensionMismatch,
                        "distribution size does not match the domain");
        std::vector<double> cdf(p.size());
        double acc = 0;
        for (std::size_t x = 0; x < p.size(); ++x)
        {
            acc += p[x];
            cdf[x] = acc;
        }
        return SampleSource(std::move(domain), InternalState{std::move(p), std::move(cdf)});
    }

    static SampleSource file(Domain domain, std::string const& path)
    {
        auto state = std::make_shared<FileState>();
        state->path = path;
        state->in.open(path);
        detail::require(state->in.good(), ErrorCode::InvalidArgument, "cannot open sample file '" + path + "'");
        return SampleSource(std::move(domain), std::move(state));
    }

    static SampleSource subprocess(Domain domain, std::string const& command)
    {
        return SampleSource(std::move(domain), std::make_shared<ProcessState>(command));
    }

    Kind kind() const noexcept { return static_cast<Kind>(state_.index()); }
    Domain const& domain() const noexcept { return domain_; }

    //! Sources without shared reader state can be drawn from concurrently.
    bool concurrent() const noexcept { return kind() == Kind::Internal; }

    Histogram draw(Count n, std::uint64_t seed) const
    {
        detail::require(n >= 0, ErrorCode::InvalidArgument, "negative sample size");
        Histogram h = Histogram::zero(domain_.size());
        if (n == 0)
            return h;
        switch (kind())
        {
            case Kind::Internal: draw_internal(std::get<InternalState>(state_), h, n, seed); break;
            case Kind::FileStream: draw_file(*std::get<std::shared_ptr<FileState>>(state_), h, n); break;
            case Kind::Subprocess: draw_process(*std::get<std::shared_ptr<ProcessState>>(state_), h, n); break;
        }
        return h;
    }

    /*!
     * Ask a subprocess generator to shut down and check its exit status.
     * No-op for other sources.
     */
    void close() const
    {
        if (kind() != Kind::Subprocess)
            return;
        auto& st = *std::get<std::shared_ptr<ProcessState>>(state_);
        std::lock_guard lock(st.mutex);
        if (st.closed)
            return;
        st.closed = true;
        try
        {
            st.child.write_line("0");
        }
        catch (Error const&)
        {
        }
        int status = st.child.finish();
        if (status != 0)
            detail::fail(ErrorCode::SubprocessFailure, "generator exited with status " + std::to_string(status));
    }

  private:
    struct InternalState
    {
        Distribution<double> p;
        std::vector<double> cdf;
    };
    struct FileState
    {
        std::string path;
        std::ifstream in;
        std::mutex mutex;
        Count consumed = 0;
    };
    struct ProcessState
    {
        explicit ProcessState(std::string const& command) : child(command) {}
        ChildProcess child;
        std::mutex mutex;
        bool closed = false;
    };

    using State = std::variant<InternalState, std::shared_ptr<FileState>, std::shared_ptr<ProcessState>>;

    SampleSource(Domain domain, State state) : domain_(std::move(domain)), state_(std::move(state)) {}

    static void draw_internal(InternalState const& st, Histogram& h, Count n, std::uint64_t seed)
    {
        Rng rng(seed);
        std::size_t last = 0;
        for (std::size_t x = 0; x < st.p.size(); ++x)
        {
            if (st.p[x] > 0)
                last = x;
        }
        for (Count i = 0; i < n; ++i)
        {
            double u = rng.uniform();
            auto it = std::upper_bound(st.cdf.begin(), st.cdf.end(), u);
            std::size_t x = it == st.cdf.end() ? last : static_cast<std::size_t>(it - st.cdf.begin());
            h.add(std::min(x, last));
        }
    }

    void draw_file(FileState& st, Histogram& h, Count n) const
    {
        std::lock_guard lock(st.mutex);
        std::string line;
        Count got = 0;
        while (got < n && std::getline(st.in, line))
        {
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            h.add(domain_.index_of(line));
            ++got;
        }
        st.consumed += got;
        if (got < n)
            detail::fail(ErrorCode::SourceExhausted, "sample file '" + st.path + "' ran out after "
                                                         + std::to_string(st.consumed) + " tokens");
    }

    void draw_process(ProcessState& st, Histogram& h, Count n) const
    {
        std::lock_guard lock(st.mutex);
        if (st.closed)
            detail::fail(ErrorCode::SubprocessFailure, "generator was already shut down");
        st.child.write_line(std::to_string(n));
        std::string line;
        for (Count i = 0; i < n; ++i)
        {
            if (!st.child.read_line(line))
                detail::fail(ErrorCode::SubprocessFailure, "generator returned " + std::to_string(i) + " of "
                                                               + std::to_string(n) + " requested tokens");
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            h.add(domain_.index_of(line));
        }
    }

    Domain domain_;
    State state_;
};

//! Histogram of n draws.
inline Histogram draw_fixed(SampleSource const& src, Count n, std::uint64_t seed)
{
    detail::require(n >= 1, ErrorCode::InvalidArgument, "sample size must be >= 1");
    return src.draw(n, seed);
}

//! N ~ Poi(alpha) from the seed's first stream, then N draws from the second.
inline Histogram draw_poisson(SampleSource const& src, double alpha, std::uint64_t seed)
{
    detail::require(alpha > 0, ErrorCode::InvalidArgument, "Poisson rate must be positive");
    Rng rng(stream_seed(seed, 0));
    Count n = poisson_variate(rng, alpha);
    return src.draw(n, stream_seed(seed, 1));
}

inline Histogram draw_scheme(SampleSource const& src, SamplingScheme const& scheme, std::uint64_t seed)
{
    return scheme.is_fixed() ? draw_fixed(src, scheme.n(), seed) : draw_poisson(src, scheme.rate(), seed);
}

//---------------------------------------------------------------------------//
// Monte Carlo estimation
//---------------------------------------------------------------------------//

struct EstimateReport
{
    double mean;
    double std_error;
    double ci_low;
    double ci_high;
    int replicates;
    std::uint64_t seed;
};

//! Two-sided 95% normal quantile.
inline constexpr double normal_95 = 1.959963984540054;

//! Mean, standard error and normal CI of values, summed in index order.
inline EstimateReport summarize(std::vector<double> const& values, std::uint64_t seed)
{
    detail::require(values.size() >= 2, ErrorCode::InvalidArgument, "need at least two replicates");
    double const r = static_cast<double>(values.size());
    double sum = 0;
    for (double v : values)
        sum += v;
    double const mean = sum / r;
    double ss = 0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    double const se = std::sqrt(ss / (r - 1) / r);
    return EstimateReport{mean, se, mean - normal_95 * se, mean + normal_95 * se, static_cast<int>(values.size()), seed};
}

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t jobs)
{
    unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/*!
 * values[i] = f(i) for i < count, computed by \c threads workers (one when
 * \c parallel is false). The first exception is rethrown after all workers
 * stop.
 */
template<class F>
std::vector<double> replicate(std::size_t count, bool parallel, unsigned threads, F&& f)
{
    std::vector<double> values(count);
    unsigned const workers = parallel ? worker_count(threads, count) : 1;
    if (workers == 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            values[i] = f(i);
        return values;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            try
            {
                for (std::size_t i = next++; i < count; i = next++)
                    values[i] = f(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = count;
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
    return values;
}

}  // namespace detail

/*!
 * Mean of R independent evaluations L(h^p_i, h^q_i), each pair drawn under
 * the loss's own sampling schemes. Replicate i uses streams 2i (model) and
 * 2i+1 (target) of the seed.
 */
inline EstimateReport estimate_loss(SampleSource const& model, SampleSource const& target,
                                    CompiledLoss<double> const& loss, int replicates, std::uint64_t seed,
                                    unsigned threads = 0)
{
    if (replicates < 2)
        detail::fail(ErrorCode::InvalidArgument, "estimate_loss needs at least 2 replicates");
    detail::require(model.domain().size() == target.domain().size(), ErrorCode::DimensionMismatch,
                    "model and target domains differ in size");
    bool const parallel = model.concurrent() && target.concurrent();
    auto values = detail::replicate(static_cast<std::size_t>(replicates), parallel, threads, [&](std::size_t i) {
        Histogram hp = draw_scheme(model, loss.scheme_p(), stream_seed(seed, 2 * i));
        Histogram hq = draw_scheme(target, loss.scheme_q(), stream_seed(seed, 2 * i + 1));
        return loss(hp, hq);
    });
    return summarize(values, seed);
}

//! Report-black-box variant: the target distribution is known exactly.
inline EstimateReport estimate_loss(SampleSource const& model, RbbLoss<double> const& loss,
                                    Distribution<double> const& q, int replicates, std::uint64_t seed,
                                    unsigned threads = 0)
{
    if (replicates < 2)
        detail::fail(ErrorCode::InvalidArgument, "estimate_loss needs at least 2 replicates");
    auto values = detail::replicate(static_cast<std::size_t>(replicates), model.concurrent(), threads,
                                    [&](std::size_t i) { return loss(draw_fixed(model, loss.n(), stream_seed(seed, 2 * i)), q); });
    return summarize(values, seed);
}

//! Target-only estimator (Shannon entropy).
inline EstimateReport estimate_loss(SampleSource const& target, TargetEstimator<double> const& est, int replicates,
                                    std::uint64_t seed, unsigned threads = 0)
{
    if (replicates < 2)
        detail::fail(ErrorCode::InvalidArgument, "estimate_loss needs at least 2 replicates");
    auto values = detail::replicate(static_cast<std::size_t>(replicates), target.concurrent(), threads,
                                    [&](std::size_t i) { return est(draw_scheme(target, est.scheme(), stream_seed(seed, 2 * i + 1))); });
    return summarize(values, seed);
}

//---------------------------------------------------------------------------//
// Block averaging
//---------------------------------------------------------------------------//

namespace detail {

//! The draws behind a histogram in a seeded random order.
inline std::vector<std::size_t> shuffled_draws(Histogram const& h, Rng& rng)
{
    std::vector<std::size_t> draws;
    draws.reserve(static_cast<std::size_t>(h.total()));
    for (std::size_t x = 0; x < h.size(); ++x)
        draws.insert(draws.end(), static_cast<std::size_t>(h[x]), x);
    std::shuffle(draws.begin(), draws.end(), rng.engine());
    return draws;
}

inline Histogram block_histogram(std::vector<std::size_t> const& draws, std::size_t block, std::size_t size,
                                 std::size_t d)
{
    Histogram h = Histogram::zero(d);
    for (std::size_t i = block * size; i < (block + 1) * size; ++i)
        h.add(draws[i]);
    return h;
}

}  // namespace detail

/*!
 * Split the N draws behind \c h into floor(N / n) random blocks of n
 * (leftovers discarded) and average the loss over blocks.
 */
inline double block_average(Histogram const& h, RbbLoss<double> const& loss, Distribution<double> const& q,
                            std::uint64_t seed)
{
    Count const n = loss.n();
    if (h.total() < n)
        detail::fail(ErrorCode::SampleTooSmall, "sample of " + std::to_string(h.total())
                                                    + " draws is smaller than the block size " + std::to_string(n));
    Rng rng(seed);
    auto draws = detail::shuffled_draws(h, rng);
    std::size_t const blocks = draws.size() / static_cast<std::size_t>(n);
    double sum = 0;
    for (std::size_t b = 0; b < blocks; ++b)
        sum += loss(detail::block_histogram(draws, b, static_cast<std::size_t>(n), h.size()), q);
    return sum / static_cast<double>(blocks);
}

/*!
 * Black-box variant: model draws are split into blocks of n, target draws
 * into blocks of m, and the k-th model block is paired with the k-th target
 * block for min(floor(N / n), floor(M / m)) pairs.
 */
inline double block_average(Histogram const& hp, Histogram const& hq, CompiledLoss<double> const& loss,
                            std::uint64_t seed)
{
    detail::require(loss.scheme_p().is_fixed() && loss.scheme_q().is_fixed(), ErrorCode::InvalidArgument,
                    "block averaging needs fixed-size schemes");
    Count const n = loss.scheme_p().n();
    Count const m = loss.scheme_q().n();
    if (hp.total() < n || hq.total() < m)
        detail::fail(ErrorCode::SampleTooSmall, "samples are smaller than one block");
    Rng rng_p(stream_seed(seed, 0));
    Rng rng_q(stream_seed(seed, 1));
    auto draws_p = detail::shuffled_draws(hp, rng_p);
    auto draws_q = detail::shuffled_draws(hq, rng_q);
    std::size_t const blocks = std::min(draws_p.size() / static_cast<std::size_t>(n),
                                        draws_q.size() / static_cast<std::size_t>(m));
    double sum = 0;
    for (std::size_t b = 0; b < blocks; ++b)
        sum += loss(detail::block_histogram(draws_p, b, static_cast<std::size_t>(n), hp.size()),
                    detail::block_histogram(draws_q, b, static_cast<std::size_t>(m), hq.size()));
    return sum / static_cast<double>(blocks);
}

}  // namespace bbp
