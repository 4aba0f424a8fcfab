#include "brownpoly/cli.hpp"

#include "brownpoly/container.hpp"
#include "brownpoly/experiments.hpp"
#include "brownpoly/parallel.hpp"
#include "brownpoly/partition.hpp"
#include "brownpoly/quenched.hpp"
#include "brownpoly/report.hpp"
#include "brownpoly/specfun.hpp"
#include "brownpoly/stats.hpp"
#include "brownpoly/verify.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace brownpoly {

namespace {

namespace fs = std::filesystem;

/// Bad configuration or usage; always maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Section = std::map<std::string, std::string>;
using Settings = std::map<std::string, Section>;

// Every recognised key with its default. Keys outside this table are errors,
// so a typo never silently falls back to a default.
const Settings& defaults()
{
    static const Settings d = {
        {"run",
         {
             {"seed", "20240601"},
             {"resolution_doubling", "on"},
             {"bootstrap_resamples", "1000"},
         }},
        {"polymer",
         {
             {"theta", ""},
             {"tau", ""},
             {"beta", ""},
             {"A", "0"},
             {"gamma", "0.5"},
         }},
        {"experiments",
         {
             {"n_values", "16,32,64,128,256"},
             {"replicas", "2000"},
             {"m_per_level", "50"},
             {"path_models", "boundary,free"},
             {"tail_n", "64"},
             {"tail_b", "0.5,1,1.5,2,3"},
             {"fluctuation_b", "2,4,8"},
         }},
        {"verify",
         {
             {"tests", "dufresne,burke,mean,variance,comparison,reversal"},
             {"replicas", "2000"},
             {"dufresne_n", "4"},
             {"dufresne_t", "2"},
             {"dufresne_m", "200"},
             {"burke_n", "3"},
             {"burke_t", "2"},
             {"burke_m", "200"},
             {"mean_n", "4"},
             {"mean_t", "2"},
             {"mean_m", "200"},
             {"variance_n", "32"},
             {"variance_t", "characteristic"},
             {"variance_m", "1600"},
             {"comparison_replicas", "1000"},
             {"comparison_n_max", "8"},
             {"comparison_m", "24"},
             {"comparison_t_min", "0.5"},
             {"comparison_t_max", "4"},
             {"reversal_n", "4"},
             {"reversal_t", "2"},
             {"reversal_m", "200"},
         }},
        {"sample",
         {
             {"model", "boundary"},
             {"n", "4"},
             {"t", "2"},
             {"m", "200"},
             {"count", "1000"},
             {"stream", "0"},
             {"zero_noise", "off"},
             {"env_file", ""},
             {"tables", ""},
         }},
    };
    return d;
}

const std::vector<std::string>& known_tests()
{
    static const std::vector<std::string> t{"dufresne", "burke", "mean", "variance", "comparison", "reversal"};
    return t;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void overlay(Settings& base, const Settings& extra)
{
    for (const auto& [section, keys] : extra) {
        const auto sec = defaults().find(section);
        if (sec == defaults().end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, value] : keys) {
            if (!sec->second.contains(key)) throw ConfigError("unknown config field " + section + "." + key);
            base[section][key] = value;
        }
    }
}

Settings read_config_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config syntax error in " + path.string() + ": " + e.message() + " (line "
                          + std::to_string(e.line()) + ")");
    }
    Settings out;
    for (const auto& [section, node] : tree) {
        if (node.empty()) throw ConfigError("config field '" + section + "' must be inside a [section]");
        for (const auto& [key, leaf] : node) out[section][key] = trim(leaf.get_value<std::string>());
    }
    return out;
}

Settings settings_from_json(const nlohmann::json& j)
{
    Settings out;
    for (const auto& [section, keys] : j.items()) {
        for (const auto& [key, value] : keys.items()) out[section][key] = value.get<std::string>();
    }
    return out;
}

nlohmann::json settings_to_json(const Settings& s)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [section, keys] : s) {
        for (const auto& [key, value] : keys) j[section][key] = value;
    }
    return j;
}

/// Typed read access to resolved settings; errors name the offending field.
class Config {
  public:
    explicit Config(Settings s) : s_(std::move(s)) {}

    const Settings& settings() const { return s_; }

    std::string str(const std::string& sec, const std::string& key) const { return s_.at(sec).at(key); }

    long long integer(const std::string& sec, const std::string& key) const
    {
        const std::string v = str(sec, key);
        try {
            std::size_t used = 0;
            const long long x = std::stoll(v, &used);
            if (used == v.size()) return x;
        } catch (const std::exception&) {
        }
        throw ConfigError(sec + "." + key + ": expected an integer, got '" + v + "'");
    }

    int positive(const std::string& sec, const std::string& key) const
    {
        const long long x = integer(sec, key);
        if (x < 1 || x > 1'000'000'000) throw ConfigError(sec + "." + key + ": must be a positive integer");
        return static_cast<int>(x);
    }

    std::uint64_t unsigned64(const std::string& sec, const std::string& key) const
    {
        const std::string v = str(sec, key);
        try {
            std::size_t used = 0;
            if (!v.empty() && v[0] != '-') {
                const auto x = std::stoull(v, &used);
                if (used == v.size()) return x;
            }
        } catch (const std::exception&) {
        }
        throw ConfigError(sec + "." + key + ": expected a nonnegative integer, got '" + v + "'");
    }

    double real(const std::string& sec, const std::string& key) const { return parse_real(str(sec, key), sec + "." + key); }

    bool flag(const std::string& sec, const std::string& key) const
    {
        const std::string v = str(sec, key);
        if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
        if (v == "off" || v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(sec + "." + key + ": expected on/off, got '" + v + "'");
    }

    std::vector<int> int_list(const std::string& sec, const std::string& key) const
    {
        std::vector<int> out;
        for (const auto& item : split_list(str(sec, key))) {
            try {
                std::size_t used = 0;
                const int x = std::stoi(item, &used);
                if (used == item.size()) {
                    out.push_back(x);
                    continue;
                }
            } catch (const std::exception&) {
            }
            throw ConfigError(sec + "." + key + ": bad list entry '" + item + "'");
        }
        return out;
    }

    std::vector<double> real_list(const std::string& sec, const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : split_list(str(sec, key))) out.push_back(parse_real(item, sec + "." + key));
        return out;
    }

    /// A horizon: a number, or "characteristic" for n * trigamma(theta).
    double horizon(const std::string& sec, const std::string& key, int n, double theta) const
    {
        if (str(sec, key) == "characteristic") return n * trigamma(theta);
        return real(sec, key);
    }

  private:
    static double parse_real(const std::string& v, const std::string& field)
    {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used == v.size() && std::isfinite(x)) return x;
        } catch (const std::exception&) {
        }
        throw ConfigError(field + ": expected a number, got '" + v + "'");
    }

    Settings s_;
};

CharacteristicPoint polymer_point(const Config& c)
{
    int given = 0;
    for (const char* k : {"theta", "tau", "beta"}) given += c.str("polymer", k).empty() ? 0 : 1;
    if (given > 1) throw ConfigError("polymer: specify exactly one of theta, tau, beta");
    try {
        if (!c.str("polymer", "tau").empty()) return CharacteristicPoint::from_tau(c.real("polymer", "tau"));
        if (!c.str("polymer", "beta").empty()) return CharacteristicPoint::from_beta(c.real("polymer", "beta"));
        if (!c.str("polymer", "theta").empty()) return CharacteristicPoint::from_theta(c.real("polymer", "theta"));
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("polymer: ") + e.what());
    }
    return CharacteristicPoint::from_theta(1.0);
}

ExperimentConfig experiment_config(const Config& c, int workers)
{
    ExperimentConfig cfg;
    cfg.point = polymer_point(c);
    cfg.n_values = c.int_list("experiments", "n_values");
    cfg.A = c.real("polymer", "A");
    cfg.gamma = c.real("polymer", "gamma");
    cfg.replicas = c.positive("experiments", "replicas");
    cfg.m_per_level = c.positive("experiments", "m_per_level");
    cfg.seed = c.unsigned64("run", "seed");
    cfg.workers = workers;
    cfg.extrapolate = c.flag("run", "resolution_doubling");
    cfg.bootstrap_resamples = c.positive("run", "bootstrap_resamples");
    cfg.tail_b = c.real_list("experiments", "tail_b");
    cfg.fluctuation_b = c.real_list("experiments", "fluctuation_b");
    cfg.tail_n = c.positive("experiments", "tail_n");
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("experiments: ") + e.what());
    }
    return cfg;
}

VerifyOptions verify_options(const Config& c, int workers)
{
    VerifyOptions opt;
    opt.seed = c.unsigned64("run", "seed");
    opt.workers = workers;
    opt.extrapolate = c.flag("run", "resolution_doubling");
    opt.bootstrap_resamples = c.positive("run", "bootstrap_resamples");
    return opt;
}

struct Outcome {
    bool passed = true;
    std::string message;
};

template <class T>
std::string render(const T& value, void (*writer)(std::ostream&, const T&))
{
    std::ostringstream s;
    writer(s, value);
    return s.str();
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

bool all_passed(const std::vector<TestReport>& reports)
{
    return std::all_of(reports.begin(), reports.end(), [](const TestReport& r) { return r.passed; });
}

// --- Subcommands ---------------------------------------------------------------

Outcome cmd_verify(const Config& c, int workers, OutputDirectory& dir, std::ostream& out)
{
    const auto tests = split_list(c.str("verify", "tests"));
    if (tests.empty()) throw ConfigError("verify.tests: no tests selected");
    for (const auto& t : tests) {
        if (std::find(known_tests().begin(), known_tests().end(), t) == known_tests().end()) {
            throw ConfigError("verify.tests: unknown test '" + t + "'");
        }
    }
    const double theta = polymer_point(c).theta;
    const VerifyOptions opt = verify_options(c, workers);
    const int R = c.positive("verify", "replicas");
    const auto grid = [&](const std::string& prefix) {
        const int n = c.positive("verify", prefix + "_n");
        return GridSpec{n, c.horizon("verify", prefix + "_t", n, theta), c.positive("verify", prefix + "_m")};
    };

    std::vector<TestReport> reports;
    const auto append = [&](std::vector<TestReport> more) {
        print_reports(out, more);
        reports.insert(reports.end(), more.begin(), more.end());
    };
    for (const auto& t : tests) {
        if (t == "dufresne") {
            append(test_dufresne(theta, R, grid("dufresne"), opt));
        } else if (t == "burke") {
            const GridSpec g = grid("burke");
            std::vector<double> times;
            for (int j = 1; j <= g.n; ++j) times.push_back(g.t * (g.n - j + 1) / g.n);
            append(test_burke_independence(theta, R, g, times, opt));
        } else if (t == "mean") {
            const GridSpec g = grid("mean");
            append({test_mean_identity(theta, g.n, g.t, g.m, R, opt)});
        } else if (t == "variance") {
            const GridSpec g = grid("variance");
            append(test_variance_identity(theta, g.n, g.t, g.m, R, opt));
        } else if (t == "comparison") {
            append({run_comparison(theta, c.positive("verify", "comparison_n_max"), c.positive("verify", "comparison_m"),
                                   c.real("verify", "comparison_t_min"), c.real("verify", "comparison_t_max"),
                                   c.positive("verify", "comparison_replicas"), opt)});
        } else if (t == "reversal") {
            const GridSpec g = grid("reversal");
            append(test_reversal(theta, g.n, g.t, g.m, R, opt));
        }
    }
    dir.write("verify.json", dump(to_json(reports)));
    dir.write("verify.csv", render(reports, &write_reports_csv));
    const bool ok = all_passed(reports);
    return {ok, ok ? "all identity tests passed" : "some identity tests failed"};
}

Outcome cmd_exponent(const Config& c, int workers, OutputDirectory& dir, std::ostream& out)
{
    const ExperimentConfig cfg = experiment_config(c, workers);
    SweepCache cache;
    const ExponentFit fit = run_variance_exponent(cfg, cache);
    dir.write("exponent_variance.csv", render(fit, &write_fit_csv));
    dir.write("exponent_variance.json", dump(to_json(fit)));
    out << "variance exponent: slope " << format_number(fit.slope) << " +- " << format_number(fit.slope_stderr)
        << " (" << fit.status << ")\n";
    return {fit.status != "fail", "variance exponent " + fit.status};
}

Outcome cmd_path(const Config& c, int workers, OutputDirectory& dir, std::ostream& out)
{
    const ExperimentConfig cfg = experiment_config(c, workers);
    const auto models = split_list(c.str("experiments", "path_models"));
    if (models.empty()) throw ConfigError("experiments.path_models: no model selected");
    for (const auto& m : models) {
        if (m != "boundary" && m != "free") throw ConfigError("experiments.path_models: unknown model '" + m + "'");
    }
    SweepCache cache;
    bool ok = true;
    nlohmann::json summary = nlohmann::json::object();
    for (const auto& m : models) {
        const ExponentFit fit = run_path_exponent(cfg, cache, m == "boundary");
        dir.write("exponent_path_" + m + ".csv", render(fit, &write_fit_csv));
        summary[m] = to_json(fit);
        ok = ok && fit.status != "fail";
        out << m << " path exponent: slope " << format_number(fit.slope) << " +- "
            << format_number(fit.slope_stderr) << " (" << fit.status << ")\n";
    }
    // The sigma_0 tail table is a diagnostic; it never changes the exit code.
    const TailResult tail = run_sigma_tail(cfg, cache);
    dir.write("sigma_tail.csv", render(tail, &write_tail_csv));
    summary["sigma_tail"] = to_json(tail);
    dir.write("exponent_path.json", dump(summary));
    return {ok, ok ? "path exponents within window or inconclusive" : "path exponent outside window"};
}

Outcome cmd_free_energy(const Config& c, int workers, OutputDirectory& dir, std::ostream& out)
{
    const ExperimentConfig cfg = experiment_config(c, workers);
    SweepCache cache;
    const FreeEnergyResult fe = run_free_energy(cfg, cache);
    dir.write("free_energy.csv", render(fe, &write_free_energy_csv));
    dir.write("free_energy.json", dump(to_json(fe)));
    for (const auto& r : fe.rows) {
        out << "n=" << r.n << " mean=" << format_number(r.mean) << " distance=" << format_number(r.distance) << '\n';
    }
    const bool ok = fe.distance_decreasing && fe.final_within;
    return {ok, ok ? "free energy converging" : "free energy distance not decreasing or above 0.1"};
}

Outcome cmd_fluctuation(const Config& c, int workers, OutputDirectory& dir, std::ostream& out)
{
    const ExperimentConfig cfg = experiment_config(c, workers);
    SweepCache cache;
    const FluctuationResult fl = run_freeZ_fluctuation(cfg, cache);
    dir.write("fluctuation.csv", render(fl, &write_fluctuation_csv));
    dir.write("fluctuation.json", dump(to_json(fl)));
    print_reports(out, fl.reports);
    const bool ok = all_passed(fl.reports);
    return {ok, ok ? "fluctuation checks passed" : "fluctuation checks failed"};
}

Environment sample_env(const Config& c, std::optional<BoundaryWeights>& weights, double theta)
{
    const std::string file = c.str("sample", "env_file");
    if (!file.empty()) {
        LoadedEnvironment loaded = load_environment(file);
        weights = loaded.weights;
        return std::move(loaded.env);
    }
    const int n = c.positive("sample", "n");
    const GridSpec grid{n, c.horizon("sample", "t", n, theta), c.positive("sample", "m")};
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sample: ") + e.what());
    }
    const std::uint64_t seed = c.unsigned64("run", "seed");
    const std::uint64_t stream = c.unsigned64("sample", "stream");
    weights = sample_boundary(theta, n, seed, stream);
    return c.flag("sample", "zero_noise") ? zero_environment(grid) : sample_environment(grid, seed, stream);
}

Outcome cmd_sample(const Config& c, int /*workers*/, OutputDirectory& dir, std::ostream& out)
{
    const std::string model = c.str("sample", "model");
    if (model != "boundary" && model != "free") throw ConfigError("sample.model: unknown model '" + model + "'");
    const double theta = polymer_point(c).theta;
    std::optional<BoundaryWeights> weights;
    const Environment env = sample_env(c, weights, theta);
    const int count = c.positive("sample", "count");
    const std::uint64_t seed = c.unsigned64("run", "seed");
    const std::uint64_t stream = c.unsigned64("sample", "stream");
    const ExpIncrements e(env);
    const ScaledTable back = backward_scaled(env, e);

    std::vector<PathSample> paths;
    if (model == "free") {
        paths = sample_path_free(env, back, count, seed, stream);
    } else {
        if (!weights) weights = sample_boundary(theta, env.levels(), seed, stream);
        paths = sample_path_boundary(env, *weights, back, count, seed, stream);
    }
    std::ostringstream csv;
    write_paths_csv(csv, paths, env.levels(), std::vector<std::int64_t>(paths.size(), static_cast<std::int64_t>(stream)));
    dir.write("paths.csv", csv.str());

    nlohmann::json summary = {{"model", model}, {"grid", to_json(env.grid())}, {"count", count}};
    nlohmann::json sigma = nlohmann::json::array();
    const int first = model == "free" ? 1 : 0;
    for (int k = first; k <= env.levels() - 1; ++k) {
        const SigmaSeries s = sigma_k_samples(paths, k);
        sigma.push_back({{"k", k},
                         {"mean", s.values.empty() ? nlohmann::json(nullptr) : nlohmann::json(mean(s.values))},
                         {"censored", s.censored}});
    }
    summary["sigma"] = sigma;

    // P(|sigma_{floor(gamma n)} - gamma t| <= d n^{2/3}): reported only.
    const double gamma = c.real("polymer", "gamma");
    const int n = env.levels();
    const int k = static_cast<int>(std::floor(gamma * n));
    if (gamma >= 0.0 && gamma < 1.0 && k >= first && k <= n - 1) {
        const SigmaSeries s = sigma_gamma_samples(paths, n, gamma);
        nlohmann::json balls = nlohmann::json::array();
        for (double d : {0.25, 0.5, 1.0}) {
            const double p = small_ball_fraction(s, gamma * env.grid().t, d * std::pow(n, 2.0 / 3.0));
            balls.push_back({{"d", d}, {"probability", std::isnan(p) ? nlohmann::json(nullptr) : nlohmann::json(p)}});
        }
        summary["small_ball"] = {{"gamma", gamma}, {"k", k}, {"center", gamma * env.grid().t}, {"radii", balls}};
    }
    dir.write("paths_summary.json", dump(summary));
    out << "wrote " << paths.size() << " " << model << " paths\n";
    return {true, "sampled"};
}

Outcome cmd_env_gen(const Config& c, int /*workers*/, OutputDirectory& dir, std::ostream& out)
{
    const double theta = polymer_point(c).theta;
    std::optional<BoundaryWeights> weights;
    const Environment env = sample_env(c, weights, theta);
    save_environment(env, dir.root() / "environment.bin", weights ? &*weights : nullptr);
    dir.record("environment.bin");
    for (const auto& name : split_list(c.str("sample", "tables"))) {
        std::optional<LogPartitionTable> table;
        if (name == "forward_free") {
            table = forward_free(env);
        } else if (name == "backward") {
            table = backward(env);
        } else if (name == "forward_axis") {
            table = forward_axis(env);
        } else if (name == "forward_boundary") {
            if (!weights) throw ConfigError("sample.tables: forward_boundary needs boundary weights in the environment file");
            table = forward_boundary(env, *weights);
        } else {
            throw ConfigError("sample.tables: unknown table '" + name + "'");
        }
        const std::string file = "table_" + name + ".bin";
        save_table(*table, dir.root() / file, env.seed(), env.stream_id());
        dir.record(file);
    }
    out << "wrote environment n=" << env.levels() << " m=" << env.cells() << '\n';
    return {true, "generated"};
}

using Command = Outcome (*)(const Config&, int, OutputDirectory&, std::ostream&);

const std::map<std::string, Command>& commands()
{
    static const std::map<std::string, Command> m = {
        {"verify", &cmd_verify},         {"exponent", &cmd_exponent},       {"path", &cmd_path},
        {"free-energy", &cmd_free_energy}, {"fluctuation", &cmd_fluctuation}, {"sample", &cmd_sample},
        {"env-gen", &cmd_env_gen},
    };
    return m;
}

/// Runs one command and writes its manifest. Exceptions escape after the
/// manifest has been flushed with status "aborted".
int execute(const std::string& name, const Settings& settings, int workers, const fs::path& out_dir,
            std::ostream& out, RunManifest* manifest_out = nullptr)
{
    const Config config(settings);
    const Command cmd = commands().at(name);
    OutputDirectory dir(out_dir);
    RunManifest manifest;
    manifest.command = name;
    manifest.config = settings_to_json(settings);
    manifest.seed = config.unsigned64("run", "seed");
    manifest.started = utc_timestamp();
    const auto flush = [&](const std::string& status) {
        manifest.status = status;
        manifest.finished = utc_timestamp();
        manifest.outputs = dir.files();
        std::ofstream f(out_dir / "manifest.json", std::ios::trunc);
        f << dump(manifest.to_json());
        if (manifest_out != nullptr) *manifest_out = manifest;
    };
    Outcome result;
    try {
        result = cmd(config, workers, dir, out);
    } catch (...) {
        flush("aborted");
        throw;
    }
    flush(result.passed ? "ok" : "failed");
    out << result.message << '\n';
    return result.passed ? kExitOk : kExitScientificFailure;
}

int replay(const fs::path& manifest_path, int workers, const fs::path& out_dir, std::ostream& out)
{
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot read manifest " + manifest_path.string());
    RunManifest recorded;
    try {
        recorded = RunManifest::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!commands().contains(recorded.command)) throw ConfigError("manifest names unknown command '" + recorded.command + "'");
    if (fs::weakly_canonical(out_dir) == fs::weakly_canonical(manifest_path.parent_path())) {
        throw ConfigError("replay output directory must differ from the recorded run's directory");
    }
    Settings settings = defaults();
    overlay(settings, settings_from_json(recorded.config));

    RunManifest fresh;
    execute(recorded.command, settings, workers, out_dir, out, &fresh);

    bool same = fresh.outputs.size() == recorded.outputs.size();
    for (const auto& r : recorded.outputs) {
        const auto it = std::find_if(fresh.outputs.begin(), fresh.outputs.end(),
                                     [&](const OutputFile& f) { return f.name == r.name; });
        const bool match = it != fresh.outputs.end() && it->checksum == r.checksum;
        out << (match ? "match    " : "MISMATCH ") << r.name << ' ' << checksum_hex(r.checksum) << '\n';
        same = same && match;
    }
    out << (same ? "replay reproduced all outputs\n" : "replay differs from the manifest\n");
    return same ? kExitOk : kExitScientificFailure;
}

} // namespace

std::string default_config_text()
{
    std::ostringstream s;
    for (const auto& [section, keys] : defaults()) {
        s << '[' << section << "]\n";
        for (const auto& [key, value] : keys) s << key << " = " << value << '\n';
        s << '\n';
    }
    return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Monte Carlo harness for the semi-discrete Brownian directed polymer", "brownpoly"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string out_dir = "out";
    std::optional<std::string> doubling;
    app.add_option("--config", config_path, "INI configuration file");
    app.add_option("--seed", seed, "override run.seed");
    app.add_option("--workers", workers, "worker threads (default: BROWNPOLY_WORKERS or all cores)")
        ->check(CLI::Range(1, 4096));
    app.add_option("--out-dir", out_dir, "directory receiving every output file");
    app.add_option("--resolution-doubling", doubling, "two-resolution extrapolation")
        ->check(CLI::IsMember({"on", "off"}));

    std::string manifest_path;
    for (const auto& [name, cmd] : commands()) app.add_subcommand(name, "run the " + name + " command");
    auto* replay_cmd = app.add_subcommand("replay", "re-run a manifest and compare output checksums");
    replay_cmd->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
    app.add_subcommand("print-config", "print the default configuration");

    std::vector<std::string> argv_store{"brownpoly"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    const int threads = workers.value_or(default_workers());
    try {
        const auto* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        if (name == "print-config") {
            out << default_config_text();
            return kExitOk;
        }
        if (name == "replay") return replay(manifest_path, threads, out_dir, out);

        Settings settings = defaults();
        if (!config_path.empty()) overlay(settings, read_config_file(config_path));
        if (seed) settings["run"]["seed"] = std::to_string(*seed);
        if (doubling) settings["run"]["resolution_doubling"] = *doubling;
        return execute(name, settings, threads, out_dir, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const FormatError& e) {
        err << "input file error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        err << "invalid parameter: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "aborted: " << e.what() << '\n';
        return kExitScientificFailure;
    }
}

} // namespace brownpoly
