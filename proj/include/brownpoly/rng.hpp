#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>

namespace brownpoly {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Stateless: the same (counter, key) always yields the
/// same 128 output bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hashes a tuple of integers into a 64-bit stream identifier.
constexpr std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto p : parts) h = mix64(h ^ mix64(p));
    return h;
}

/// Domain tags keep generators that share (seed, stream) from colliding.
enum class RngDomain : std::uint64_t {
    environment = 1,
    boundary = 2,
    path = 3,
    bootstrap = 4,
    misc = 5,
};

/// Uniform random bit generator over Philox blocks. The key is derived from
/// (seed, domain); the counter's high word is the stream id and the low word
/// counts blocks, so streams are independent and reproducible regardless of
/// which thread consumes them.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream, RngDomain domain = RngDomain::misc);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller; caches the second variate.
    double normal();

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Maps 64 random bits to (0, 1).
inline double bits_to_open_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Fills out[j] with standard normals addressed by absolute cell index
/// first_cell + j within (seed, stream). Each Philox block feeds two cells
/// through a ziggurat sampler, so cell c depends only on (seed, stream, c).
void fill_cell_normals(std::uint64_t seed, std::uint64_t stream, std::uint64_t first_cell,
                       std::span<double> out);

/// Gamma(shape, 1) variates by Marsaglia-Tsang squeeze/rejection from a normal
/// proposal; shapes below one use the boost X * U^(1/shape) with X ~ Gamma(shape + 1).
class GammaSampler {
  public:
    explicit GammaSampler(double shape);

    double shape() const { return shape_; }

    template<class Rng>
    double operator()(Rng& rng) const;

  private:
    double shape_;
    double boosted_;
    double d_;
    double c_;
};

template<class Rng>
double GammaSampler::operator()(Rng& rng) const
{
    double v = 0.0;
    for (;;) {
        double z = 0.0;
        do {
            z = rng.normal();
            v = 1.0 + c_ * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        const double z2 = z * z;
        if (u < 1.0 - 0.0331 * z2 * z2) break;
        if (std::log(u) < 0.5 * z2 + d_ * (1.0 - v + std::log(v))) break;
    }
    double x = d_ * v;
    if (boosted_ != shape_) x *= std::pow(rng.uniform(), 1.0 / shape_);
    return x;
}

} // namespace brownpoly
