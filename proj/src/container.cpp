#include "brownpoly/container.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <vector>

namespace brownpoly {

static_assert(std::endian::native == std::endian::little, "container format assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'P', 'O', 'L', 'Y', 'B', 'I', 'N'};
constexpr std::size_t kHeaderSize = 64;

template <class T>
void put(std::vector<unsigned char>& out, T value)
{
    const auto* p = reinterpret_cast<const unsigned char*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& in, std::size_t offset)
{
    T value;
    std::memcpy(&value, in.data() + offset, sizeof(T));
    return value;
}

void put_array(std::vector<unsigned char>& out, std::span<const double> values)
{
    const auto* p = reinterpret_cast<const unsigned char*>(values.data());
    out.insert(out.end(), p, p + values.size_bytes());
}

std::vector<unsigned char> encode_header(const FileHeader& h)
{
    std::vector<unsigned char> out(kMagic.begin(), kMagic.end());
    put<std::uint32_t>(out, h.version);
    put<std::uint32_t>(out, h.kind);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(h.grid.n));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(h.grid.m));
    put<double>(out, h.grid.t);
    put<double>(out, h.theta.value_or(std::numeric_limits<double>::quiet_NaN()));
    put<std::uint64_t>(out, h.seed);
    put<std::uint64_t>(out, h.stream_id);
    put<std::uint32_t>(out, h.has_boundary ? 1u : 0u);
    put<std::uint32_t>(out, 0u);
    return out;
}

FileHeader decode_header(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
{
    if (bytes.size() < kHeaderSize) {
        throw FormatError(FormatError::Reason::truncated, path.string() + ": file shorter than the 64-byte header");
    }
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
        throw FormatError(FormatError::Reason::magic, path.string() + ": not a brownpoly container");
    }
    FileHeader h;
    h.version = get<std::uint32_t>(bytes, 8);
    if (h.version != kFormatVersion) {
        throw FormatError(FormatError::Reason::version, path.string() + ": format version " + std::to_string(h.version)
                                                            + ", expected " + std::to_string(kFormatVersion));
    }
    h.kind = get<std::uint32_t>(bytes, 12);
    h.grid.n = static_cast<int>(get<std::uint32_t>(bytes, 16));
    h.grid.m = static_cast<int>(get<std::uint32_t>(bytes, 20));
    h.grid.t = get<double>(bytes, 24);
    const double theta = get<double>(bytes, 32);
    if (!std::isnan(theta)) h.theta = theta;
    h.seed = get<std::uint64_t>(bytes, 40);
    h.stream_id = get<std::uint64_t>(bytes, 48);
    h.has_boundary = (get<std::uint32_t>(bytes, 56) & 1u) != 0;
    return h;
}

void write_file(const std::filesystem::path& path, std::vector<unsigned char> bytes)
{
    put<std::uint64_t>(bytes, fnv1a64(bytes));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatError::Reason::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatError::Reason::io, "write failed: " + path.string());
}

std::vector<unsigned char> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Reason::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reads a whole container, validates the checksum and the payload length.
std::pair<FileHeader, std::vector<unsigned char>> read_verified(const std::filesystem::path& path,
                                                                std::size_t (*payload_doubles)(const FileHeader&))
{
    auto bytes = read_file(path);
    const FileHeader h = decode_header(bytes, path);
    const std::size_t expected = kHeaderSize + payload_doubles(h) * sizeof(double) + sizeof(std::uint64_t);
    if (bytes.size() < sizeof(std::uint64_t)) {
        throw FormatError(FormatError::Reason::truncated, path.string() + ": truncated");
    }
    const std::size_t body = bytes.size() - sizeof(std::uint64_t);
    const auto stored = get<std::uint64_t>(bytes, body);
    if (fnv1a64(std::span<const unsigned char>(bytes.data(), body)) != stored) {
        throw FormatError(FormatError::Reason::checksum, path.string() + ": checksum mismatch");
    }
    if (bytes.size() != expected) {
        throw FormatError(FormatError::Reason::shape, path.string() + ": payload size does not match the header");
    }
    return {h, std::move(bytes)};
}

std::vector<double> take(const std::vector<unsigned char>& bytes, std::size_t& offset, std::size_t count)
{
    std::vector<double> v(count);
    std::memcpy(v.data(), bytes.data() + offset, count * sizeof(double));
    offset += count * sizeof(double);
    return v;
}

std::size_t environment_payload(const FileHeader& h)
{
    const auto n = static_cast<std::size_t>(h.grid.n);
    const auto m = static_cast<std::size_t>(h.grid.m);
    return m + n * m + (h.has_boundary ? n : 0);
}

std::size_t table_payload(const FileHeader& h)
{
    return static_cast<std::size_t>(h.grid.n + 1) * static_cast<std::size_t>(h.grid.m + 1);
}

} // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t hash)
{
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t file_checksum(const std::filesystem::path& path)
{
    const auto bytes = read_file(path);
    return fnv1a64(bytes);
}

void save_environment(const Environment& env, const std::filesystem::path& path, const BoundaryWeights* weights)
{
    if (weights != nullptr && weights->levels() != env.levels()) {
        throw std::invalid_argument("save_environment: boundary weights must have one value per level");
    }
    FileHeader h;
    h.grid = env.grid();
    h.seed = env.seed();
    h.stream_id = env.stream_id();
    if (weights != nullptr) {
        h.theta = weights->theta;
        h.has_boundary = true;
    }
    auto bytes = encode_header(h);
    put_array(bytes, env.boundary_increments());
    put_array(bytes, env.all_level_increments());
    if (weights != nullptr) put_array(bytes, weights->r0);
    write_file(path, std::move(bytes));
}

LoadedEnvironment load_environment(const std::filesystem::path& path)
{
    auto [h, bytes] = read_verified(path, environment_payload);
    if (h.kind != kEnvironmentKind) {
        throw FormatError(FormatError::Reason::kind, path.string() + ": holds a table, not an environment");
    }
    std::size_t offset = kHeaderSize;
    const auto m = static_cast<std::size_t>(h.grid.m);
    auto db0 = take(bytes, offset, m);
    auto db = take(bytes, offset, static_cast<std::size_t>(h.grid.n) * m);
    std::optional<BoundaryWeights> weights;
    if (h.has_boundary) weights = BoundaryWeights{h.theta.value_or(0.0), take(bytes, offset, h.grid.n)};
    return {Environment(h.grid, std::move(db), std::move(db0), h.seed, h.stream_id), std::move(weights)};
}

FileHeader read_header(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatError::Reason::io, "cannot open " + path.string());
    std::vector<unsigned char> bytes(kHeaderSize);
    in.read(reinterpret_cast<char*>(bytes.data()), kHeaderSize);
    bytes.resize(static_cast<std::size_t>(in.gcount()));
    return decode_header(bytes, path);
}

void save_table(const LogPartitionTable& table, const std::filesystem::path& path, std::uint64_t seed,
                std::uint64_t stream_id)
{
    FileHeader h;
    h.kind = static_cast<std::uint32_t>(table.kind());
    h.grid = table.grid();
    h.grid.n = table.levels();
    h.theta = table.theta();
    h.seed = seed;
    h.stream_id = stream_id;
    auto bytes = encode_header(h);
    put_array(bytes, table.values());
    write_file(path, std::move(bytes));
}

LogPartitionTable load_table(const std::filesystem::path& path)
{
    auto [h, bytes] = read_verified(path, table_payload);
    if (h.kind < 1 || h.kind > 6) {
        throw FormatError(FormatError::Reason::kind, path.string() + ": not a partition table");
    }
    std::size_t offset = kHeaderSize;
    auto values = take(bytes, offset, table_payload(h));
    return LogPartitionTable(static_cast<TableKind>(h.kind), h.grid, h.grid.n, h.theta, std::move(values));
}

} // namespace brownpoly
