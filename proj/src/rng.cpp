#include "brownpoly/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <memory>
#include <stdexcept>

namespace brownpoly {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

std::array<std::uint32_t, 2> derive_key(std::uint64_t seed, RngDomain domain)
{
    const std::uint64_t k = mix64(seed ^ mix64(static_cast<std::uint64_t>(domain)));
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::array<std::uint32_t, 4> make_counter(std::uint64_t block, std::uint64_t stream)
{
    return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

void box_muller(double u1, double u2, double& z0, double& z1)
{
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z0 = radius * std::cos(angle);
    z1 = radius * std::sin(angle);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key)
{
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, RngDomain domain)
    : key_(derive_key(seed, domain)), stream_(stream)
{
}

CounterRng::result_type CounterRng::operator()()
{
    if (buffered_ == 0) {
        const auto out = philox4x32(make_counter(block_++, stream_), key_);
        buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        buffered_ = 2;
    }
    return buffer_[2 - buffered_--];
}

double CounterRng::uniform()
{
    return bits_to_open_unit((*this)());
}

double CounterRng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    double z0 = 0.0;
    box_muller(u1, u2, z0, spare_normal_);
    has_spare_ = true;
    return z0;
}

namespace {

// Feeds the ziggurat one pre-drawn Philox word for the cell; the rare rejection
// path continues on a private stream keyed by the cell index, so the variate
// still depends only on (seed, stream, cell).
class CellEngine {
  public:
    using result_type = std::uint64_t;

    CellEngine(std::uint64_t word, std::uint64_t seed, std::uint64_t stream, std::uint64_t cell)
        : word_(word), seed_(seed), stream_(stream), cell_(cell)
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (!used_) {
            used_ = true;
            return word_;
        }
        if (!fallback_) fallback_ = std::make_unique<CounterRng>(seed_, stream_key({stream_, cell_}), RngDomain::environment);
        return (*fallback_)();
    }

  private:
    std::uint64_t word_;
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t cell_;
    bool used_ = false;
    std::unique_ptr<CounterRng> fallback_; // only the rare ziggurat rejections need it
};

} // namespace

void fill_cell_normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t first_cell,
                       std::span<double> out)
{
    const auto key = derive_key(seed, RngDomain::environment);
    boost::random::normal_distribution<double> normal;
    std::uint64_t cell = first_cell;
    std::size_t j = 0;
    while (j < out.size()) {
        const std::uint64_t pair = cell / 2;
        const auto bits = philox4x32(make_counter(pair, stream), key);
        const std::uint64_t words[2] = {(static_cast<std::uint64_t>(bits[1]) << 32) | bits[0],
                                        (static_cast<std::uint64_t>(bits[3]) << 32) | bits[2]};
        for (std::uint64_t half = cell % 2; half < 2 && j < out.size(); ++half, ++cell, ++j) {
            CellEngine engine(words[half], seed, stream, cell);
            out[j] = normal(engine);
        }
    }
}

GammaSampler::GammaSampler(double shape)
    : shape_(shape)
{
    if (!(shape > 0.0) || !std::isfinite(shape)) {
        throw std::domain_error("GammaSampler: shape must be positive");
    }
    boosted_ = shape < 1.0 ? shape + 1.0 : shape;
    d_ = boosted_ - 1.0 / 3.0;
    c_ = 1.0 / std::sqrt(9.0 * d_);
}

} // namespace brownpoly
