#pragma once

#include "brownpoly/experiments.hpp"
#include "brownpoly/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace brownpoly {

inline constexpr const char* kToolVersion = "1.0.0";

// JSON mirrors of the result types. Non-finite numbers become null.
nlohmann::json to_json(const GridSpec& grid);
nlohmann::json to_json(const TestReport& report);
nlohmann::json to_json(const std::vector<TestReport>& reports);
nlohmann::json to_json(const ExponentFit& fit);
nlohmann::json to_json(const FreeEnergyResult& result);
nlohmann::json to_json(const FluctuationResult& result);
nlohmann::json to_json(const TailResult& result);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Shortest round-trip decimal form; "nan" / "inf" / "-inf" for non-finite values.
std::string format_number(double x);

// Plot-ready CSV files, one header row each.
void write_reports_csv(std::ostream& out, const std::vector<TestReport>& reports);
void write_fit_csv(std::ostream& out, const ExponentFit& fit);
void write_free_energy_csv(std::ostream& out, const FreeEnergyResult& result);
void write_fluctuation_csv(std::ostream& out, const FluctuationResult& result);
void write_tail_csv(std::ostream& out, const TailResult& result);

/// Fixed-width console summary, one line per report.
void print_reports(std::ostream& out, const std::vector<TestReport>& reports);

struct OutputFile {
    std::string name; ///< relative to the output directory
    std::uint64_t checksum = 0;
    std::uintmax_t bytes = 0;
};

/// Writes files inside one directory and records their checksums. Names
/// containing a path separator or ".." are rejected.
class OutputDirectory {
  public:
    explicit OutputDirectory(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    void write(const std::string& name, const std::string& content);
    /// Records a file that some other writer already placed in the directory.
    void record(const std::string& name);
    const std::vector<OutputFile>& files() const { return files_; }

  private:
    std::filesystem::path checked(const std::string& name) const;

    std::filesystem::path root_;
    std::vector<OutputFile> files_;
};

/// Record of one command invocation. Re-running `command` with `config`
/// reproduces every listed checksum; the timestamps are informational and
/// never part of a checksummed output.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    std::string status; ///< "ok", "failed" or "aborted"
    std::vector<OutputFile> outputs;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

/// UTC time in ISO 8601 form.
std::string utc_timestamp();

/// Checksums as fixed-width lowercase hex.
std::string checksum_hex(std::uint64_t checksum);
std::uint64_t parse_checksum_hex(const std::string& hex);

} // namespace brownpoly
