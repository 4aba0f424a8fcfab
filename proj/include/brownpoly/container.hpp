#pragma once

#include "brownpoly/environment.hpp"
#include "brownpoly/partition.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace brownpoly {

// Binary container shared by environments and table dumps.
//
//   offset  size  field
//   0       8     magic "BPOLYBIN"
//   8       4     format version (kFormatVersion)
//   12      4     kind: 0 = environment, otherwise a TableKind value
//   16      4     n (levels)
//   20      4     m (time steps)
//   24      8     t
//   32      8     theta (NaN when absent)
//   40      8     seed
//   48      8     stream id
//   56      4     flags (bit 0: boundary weights follow the environment arrays)
//   60      4     reserved, zero
//
// followed by little-endian float64 payload arrays and a trailing FNV-1a 64
// checksum over every preceding byte.

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kEnvironmentKind = 0;

class FormatError : public std::runtime_error {
  public:
    enum class Reason { io, magic, version, checksum, truncated, kind, shape };

    FormatError(Reason reason, const std::string& what) : std::runtime_error(what), reason_(reason) {}
    Reason reason() const { return reason_; }

  private:
    Reason reason_;
};

struct FileHeader {
    std::uint32_t version = kFormatVersion;
    std::uint32_t kind = kEnvironmentKind;
    GridSpec grid;
    std::optional<double> theta;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    bool has_boundary = false;
};

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::uint64_t file_checksum(const std::filesystem::path& path);

void save_environment(const Environment& env, const std::filesystem::path& path,
                      const BoundaryWeights* weights = nullptr);

struct LoadedEnvironment {
    Environment env;
    std::optional<BoundaryWeights> weights;
};

LoadedEnvironment load_environment(const std::filesystem::path& path);

/// Reads and validates only the 64-byte header.
FileHeader read_header(const std::filesystem::path& path);

void save_table(const LogPartitionTable& table, const std::filesystem::path& path, std::uint64_t seed = 0,
                std::uint64_t stream_id = 0);
LogPartitionTable load_table(const std::filesystem::path& path);

} // namespace brownpoly
