#include "brownpoly/replica.hpp"

namespace brownpoly {

namespace {

Environment draw(const GridSpec& grid, std::uint64_t seed, std::uint64_t stream, bool doubled)
{
    GridSpec g = grid;
    if (doubled) g.m *= 2;
    return sample_environment(g, seed, stream);
}

} // namespace

Replica make_replica(const GridSpec& grid, double theta, std::uint64_t seed, std::uint64_t stream, bool doubled)
{
    Environment fine = draw(grid, seed, stream, doubled);
    Environment coarse = doubled ? fine.coarsened() : fine;
    ExpIncrements e(fine);
    ExpIncrements ec = doubled ? e.coarsened() : e;
    return Replica{std::move(fine), std::move(coarse), sample_boundary(theta, grid.n, seed, stream), std::move(e),
                   std::move(ec), doubled};
}

} // namespace brownpoly
