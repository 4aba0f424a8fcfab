#include "brownpoly/report.hpp"

#include "brownpoly/container.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace brownpoly {

namespace {

nlohmann::json number(double x)
{
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

} // namespace

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    // %.17g always round-trips; try shorter forms first for readability.
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

nlohmann::json to_json(const GridSpec& grid)
{
    return {{"n", grid.n}, {"t", number(grid.t)}, {"m", grid.m}};
}

nlohmann::json to_json(const TestReport& r)
{
    return {{"name", r.name},       {"statistic", number(r.statistic)}, {"target", number(r.target)},
            {"stderr", number(r.stderr_)}, {"z_score", number(r.z_score)}, {"passed", r.passed},
            {"replicas", r.replicas}, {"grid", to_json(r.grid)},        {"notes", r.notes}};
}

nlohmann::json to_json(const std::vector<TestReport>& reports)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr;
}

nlohmann::json to_json(const ExponentFit& fit)
{
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : fit.points) {
        points.push_back({{"n", p.n},
                          {"statistic", number(p.statistic)},
                          {"stderr", number(p.stderr_)},
                          {"used", p.used},
                          {"censored", p.censored},
                          {"aborted", p.aborted}});
    }
    return {{"exponent_name", fit.exponent_name},
            {"points", points},
            {"slope", number(fit.slope)},
            {"slope_stderr", number(fit.slope_stderr)},
            {"intercept", number(fit.intercept)},
            {"prefactor", number(std::exp(fit.intercept))},
            {"target", number(fit.target)},
            {"window", {number(fit.window_lo), number(fit.window_hi)}},
            {"status", fit.status},
            {"flags", fit.flags}};
}

nlohmann::json to_json(const FreeEnergyResult& result)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows) {
        rows.push_back({{"n", r.n},
                        {"t", number(r.t)},
                        {"mean", number(r.mean)},
                        {"stderr", number(r.stderr_)},
                        {"spread", number(r.spread)},
                        {"distance", number(r.distance)},
                        {"beta_form", number(r.beta_form)}});
    }
    return {{"limit", number(result.limit)},
            {"p_beta", number(result.p_beta)},
            {"rows", rows},
            {"distance_decreasing", result.distance_decreasing},
            {"final_within", result.final_within}};
}

nlohmann::json to_json(const FluctuationResult& result)
{
    nlohmann::json tails = nlohmann::json::array();
    for (std::size_t i = 0; i < result.n_values.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (double p : result.tail_prob[i]) row.push_back(number(p));
        tails.push_back({{"n", result.n_values[i]}, {"tail_prob", row}});
    }
    return {{"b_values", result.b_values},
            {"tails", tails},
            {"ks_distance", number(result.ks_distance)},
            {"median_offset", number(result.median_offset)},
            {"reports", to_json(result.reports)}};
}

nlohmann::json to_json(const TailResult& result)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows) {
        rows.push_back({{"b", number(r.b)}, {"probability", number(r.probability)}, {"stderr", number(r.stderr_)}});
    }
    return {{"n", result.n},
            {"rows", rows},
            {"nonincreasing", result.nonincreasing},
            {"decay_1_to_2", number(result.decay_1_to_2)},
            {"reports", to_json(result.reports)}};
}

nlohmann::json to_json(const ExperimentConfig& cfg)
{
    return {{"theta", number(cfg.point.theta)},
            {"tau", number(cfg.point.tau)},
            {"beta", number(cfg.point.beta)},
            {"n_values", cfg.n_values},
            {"A", number(cfg.A)},
            {"gamma", number(cfg.gamma)},
            {"replicas", cfg.replicas},
            {"m_per_level", cfg.m_per_level},
            {"seed", cfg.seed},
            {"extrapolate", cfg.extrapolate},
            {"bootstrap_resamples", cfg.bootstrap_resamples},
            {"tail_b", cfg.tail_b},
            {"fluctuation_b", cfg.fluctuation_b},
            {"tail_n", cfg.tail_n}};
}

void write_reports_csv(std::ostream& out, const std::vector<TestReport>& reports)
{
    out << "name,statistic,target,stderr,z_score,passed,replicas,n,t,m\n";
    for (const auto& r : reports) {
        out << r.name << ',' << format_number(r.statistic) << ',' << format_number(r.target) << ','
            << format_number(r.stderr_) << ',' << format_number(r.z_score) << ',' << (r.passed ? 1 : 0) << ','
            << r.replicas << ',' << r.grid.n << ',' << format_number(r.grid.t) << ',' << r.grid.m << '\n';
    }
}

void write_fit_csv(std::ostream& out, const ExponentFit& fit)
{
    out << "exponent,n,statistic,stderr,used,censored,aborted\n";
    for (const auto& p : fit.points) {
        out << fit.exponent_name << ',' << p.n << ',' << format_number(p.statistic) << ','
            << format_number(p.stderr_) << ',' << p.used << ',' << p.censored << ',' << (p.aborted ? 1 : 0) << '\n';
    }
}

void write_free_energy_csv(std::ostream& out, const FreeEnergyResult& result)
{
    out << "n,t,mean,stderr,spread,limit,distance,beta_form,p_beta\n";
    for (const auto& r : result.rows) {
        out << r.n << ',' << format_number(r.t) << ',' << format_number(r.mean) << ',' << format_number(r.stderr_)
            << ',' << format_number(r.spread) << ',' << format_number(result.limit) << ','
            << format_number(r.distance) << ',' << format_number(r.beta_form) << ',' << format_number(result.p_beta)
            << '\n';
    }
}

void write_fluctuation_csv(std::ostream& out, const FluctuationResult& result)
{
    out << "n,b,tail_prob\n";
    for (std::size_t i = 0; i < result.n_values.size(); ++i) {
        for (std::size_t j = 0; j < result.b_values.size(); ++j) {
            out << result.n_values[i] << ',' << format_number(result.b_values[j]) << ','
                << format_number(result.tail_prob[i][j]) << '\n';
        }
    }
}

void write_tail_csv(std::ostream& out, const TailResult& result)
{
    out << "n,b,probability,stderr\n";
    for (const auto& r : result.rows) {
        out << result.n << ',' << format_number(r.b) << ',' << format_number(r.probability) << ','
            << format_number(r.stderr_) << '\n';
    }
}

void print_reports(std::ostream& out, const std::vector<TestReport>& reports)
{
    for (const auto& r : reports) {
        out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(44) << r.name << std::right
            << " stat=" << std::setw(12) << format_number(r.statistic) << " target=" << std::setw(12)
            << format_number(r.target) << " se=" << format_number(r.stderr_) << '\n';
    }
}

OutputDirectory::OutputDirectory(std::filesystem::path root) : root_(std::move(root))
{
    std::filesystem::create_directories(root_);
}

std::filesystem::path OutputDirectory::checked(const std::string& name) const
{
    if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos
        || name.find("..") != std::string::npos) {
        throw std::invalid_argument("output file name must be a plain file name: '" + name + "'");
    }
    return root_ / name;
}

void OutputDirectory::write(const std::string& name, const std::string& content)
{
    const auto path = checked(name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw std::runtime_error("write failed for " + path.string());
    record(name);
}

void OutputDirectory::record(const std::string& name)
{
    const auto path = checked(name);
    OutputFile f{name, file_checksum(path), std::filesystem::file_size(path)};
    for (auto& existing : files_) {
        if (existing.name == name) {
            existing = f;
            return;
        }
    }
    files_.push_back(f);
}

std::string checksum_hex(std::uint64_t checksum)
{
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << checksum;
    return s.str();
}

std::uint64_t parse_checksum_hex(const std::string& hex)
{
    std::size_t used = 0;
    const auto v = std::stoull(hex, &used, 16);
    if (used != hex.size()) throw std::invalid_argument("bad checksum '" + hex + "'");
    return v;
}

nlohmann::json RunManifest::to_json() const
{
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : outputs) {
        files.push_back({{"name", f.name}, {"checksum", checksum_hex(f.checksum)}, {"bytes", f.bytes}});
    }
    return {{"command", command}, {"tool_version", tool_version}, {"config", config}, {"seed", seed},
            {"started", started}, {"finished", finished},         {"status", status}, {"outputs", files}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j)
{
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.value("tool_version", std::string{});
    m.config = j.at("config");
    m.seed = j.value("seed", std::uint64_t{0});
    m.started = j.value("started", std::string{});
    m.finished = j.value("finished", std::string{});
    m.status = j.value("status", std::string{});
    for (const auto& f : j.at("outputs")) {
        m.outputs.push_back(OutputFile{f.at("name").get<std::string>(),
                                       parse_checksum_hex(f.at("checksum").get<std::string>()),
                                       f.value("bytes", std::uintmax_t{0})});
    }
    return m;
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace brownpoly
