#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "domain.hpp"

namespace bbp {

//! Number of weak compositions of n into d parts, C(n+d-1, d-1), saturating
//! at \c cap.
inline std::uint64_t composition_count(Count n, std::size_t d,
                                       std::uint64_t cap = std::numeric_limits<std::uint64_t>::max())
{
    if (d == 0)
        return n == 0 ? 1 : 0;
    // C(n+k, k) with k = d-1, accumulated as an exact running product
    std::uint64_t k = d - 1;
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i)
    {
        result = result * (static_cast<unsigned __int128>(n) + i) / i;
        if (result > cap)
            return cap;
    }
    return static_cast<std::uint64_t>(result);
}

//---------------------------------------------------------------------------//
/*!
 * Visit every weak composition of \c n into \c d parts exactly once, in
 * descending lexicographic order: (n,0,...,0) first, (0,...,0,n) last.
 */
template<class F>
void for_each_composition(Count n, std::size_t d, F&& visit)
{
    if (d == 0)
        return;
    std::vector<Count> c(d, 0);
    c[0] = n;
    while (true)
    {
        visit(std::span<Count const>(c));
        if (d == 1)
            return;
        // rightmost non-last part that can give one unit to its neighbour
        std::size_t i = d - 1;
        while (i-- > 0)
        {
            if (c[i] > 0)
                break;
        }
        if (i == static_cast<std::size_t>(-1))
            return;
        Count tail = c[d - 1];
        c[d - 1] = 0;
        c[i] -= 1;
        c[i + 1] = tail + 1;
    }
}

//! All distributions with entries in {0, 1/K, ..., 1}: the simplex grid of
//! step 1/K, in composition order.
template<Scalar T>
std::vector<Distribution<T>> simplex_grid(std::size_t d, Count K)
{
    detail::require(K >= 1, ErrorCode::InvalidArgument, "grid resolution must be >= 1");
    std::vector<Distribution<T>> grid;
    for_each_composition(K, d, [&](std::span<Count const> c) {
        std::vector<T> probs;
        probs.reserve(d);
        for (auto ci : c)
            probs.push_back(T(ci) / T(K));
        grid.emplace_back(std::move(probs));
    });
    return grid;
}

}  // namespace bbp
