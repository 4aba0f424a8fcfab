#pragma once

#include "brownpoly/environment.hpp"
#include "brownpoly/partition.hpp"

#include <cstdint>

namespace brownpoly {

/// One Monte Carlo replica at two resolutions. `grid` is the coarse grid; with
/// doubling on, the Brownian paths are drawn on 2m cells and the coarse
/// environment sums adjacent pairs, so both resolutions see the same paths.
struct Replica {
    Environment fine;
    Environment coarse;
    BoundaryWeights weights;
    ExpIncrements exp_fine;
    ExpIncrements exp_coarse;
    bool doubled;

    /// 2 * fine - coarse with doubling on, otherwise the single value.
    double extrapolate(double fine_value, double coarse_value) const
    {
        return doubled ? 2.0 * fine_value - coarse_value : fine_value;
    }
};

Replica make_replica(const GridSpec& grid, double theta, std::uint64_t seed, std::uint64_t stream, bool doubled);

} // namespace brownpoly
