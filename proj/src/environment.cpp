#include "brownpoly/environment.hpp"

#include "brownpoly/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace brownpoly {

void GridSpec::validate() const
{
    if (n < 1) throw std::invalid_argument("GridSpec: n must be >= 1, got " + std::to_string(n));
    if (m < 1) throw std::invalid_argument("GridSpec: m must be >= 1, got " + std::to_string(m));
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("GridSpec: t must be positive and finite, got " + std::to_string(t));
    }
}

Environment::Environment(GridSpec grid, std::vector<double> level_increments,
                         std::vector<double> boundary_increments, std::uint64_t seed, std::uint64_t stream_id)
    : grid_(grid), db_(std::move(level_increments)), db0_(std::move(boundary_increments)), seed_(seed),
      stream_id_(stream_id)
{
    grid_.validate();
    const auto m = static_cast<std::size_t>(grid_.m);
    if (db_.size() != static_cast<std::size_t>(grid_.n) * m || db0_.size() != m) {
        throw std::invalid_argument("Environment: increment arrays do not match the grid");
    }
}

std::span<const double> Environment::level_increments(int level) const
{
    if (level < 1 || level > grid_.n) throw std::out_of_range("Environment: level out of range");
    return std::span<const double>(db_).subspan(static_cast<std::size_t>(level - 1) * grid_.m, grid_.m);
}

namespace {

std::vector<double> partial_sums(std::span<const double> inc)
{
    std::vector<double> path(inc.size() + 1, 0.0);
    for (std::size_t i = 0; i < inc.size(); ++i) path[i + 1] = path[i] + inc[i];
    return path;
}

} // namespace

std::vector<double> Environment::level_path(int level) const
{
    return partial_sums(level_increments(level));
}

std::vector<double> Environment::boundary_path() const
{
    return partial_sums(db0_);
}

Environment Environment::coarsened() const
{
    if (grid_.m % 2 != 0) throw std::invalid_argument("Environment::coarsened: m must be even");
    GridSpec coarse = grid_;
    coarse.m = grid_.m / 2;
    const auto half = static_cast<std::size_t>(coarse.m);
    std::vector<double> db(static_cast<std::size_t>(grid_.n) * half);
    std::vector<double> db0(half);
    for (std::size_t i = 0; i < half; ++i) db0[i] = db0_[2 * i] + db0_[2 * i + 1];
    for (int k = 0; k < grid_.n; ++k) {
        const std::size_t src = static_cast<std::size_t>(k) * grid_.m;
        const std::size_t dst = static_cast<std::size_t>(k) * half;
        for (std::size_t i = 0; i < half; ++i) db[dst + i] = db_[src + 2 * i] + db_[src + 2 * i + 1];
    }
    return Environment(coarse, std::move(db), std::move(db0), seed_, stream_id_);
}

Environment sample_environment(const GridSpec& grid, std::uint64_t seed, std::uint64_t stream_id)
{
    grid.validate();
    const auto m = static_cast<std::size_t>(grid.m);
    std::vector<double> db0(m);
    std::vector<double> db(static_cast<std::size_t>(grid.n) * m);
    // Cell layout within the stream: the boundary motion occupies [0, m),
    // level k occupies [k m, (k + 1) m).
    fill_cell_normals(seed, stream_id, 0, db0);
    fill_cell_normals(seed, stream_id, m, db);
    const double scale = std::sqrt(grid.delta());
    for (auto& x : db0) x *= scale;
    for (auto& x : db) x *= scale;
    return Environment(grid, std::move(db), std::move(db0), seed, stream_id);
}

Environment zero_environment(const GridSpec& grid)
{
    grid.validate();
    const auto m = static_cast<std::size_t>(grid.m);
    return Environment(grid, std::vector<double>(static_cast<std::size_t>(grid.n) * m, 0.0),
                       std::vector<double>(m, 0.0));
}

BoundaryWeights sample_boundary(double theta, int n, std::uint64_t seed, std::uint64_t stream_id)
{
    if (!(theta > 0.0) || !std::isfinite(theta)) throw std::domain_error("sample_boundary: theta must be positive");
    if (n < 1) throw std::invalid_argument("sample_boundary: n must be >= 1");
    CounterRng rng(seed, stream_id, RngDomain::boundary);
    const GammaSampler gamma(theta);
    BoundaryWeights w{theta, std::vector<double>(static_cast<std::size_t>(n))};
    for (auto& r : w.r0) r = -std::log(gamma(rng));
    return w;
}

} // namespace brownpoly
