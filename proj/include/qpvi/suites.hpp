#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpvi/connection.hpp"
#include "qpvi/sampling.hpp"

namespace qpvi::suites {

using json = nlohmann::json;

/// Malformed configuration; the CLI maps it to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration. JSON layout:
/// { "seed": int, "trials": int, "q_magnitude_range": [lo, hi], "kappa_annulus": [lo, hi],
///   "tolerances": { name: value }, "options": { ... command specific ... } }
struct Config {
    std::uint64_t seed = 1;
    std::optional<int> trials;
    sampling::DrawRanges ranges;
    std::map<std::string, double> tolerances;
    json options = json::object();

    static Config from_json(const json& j);
    json to_json() const;

    int trials_or(int dflt) const { return trials ? *trials : dflt; }
    double tol(const std::string& name, double dflt) const;
};

struct Check {
    std::string name;
    double value = 0;  ///< measured quantity (a maximum residual or a count)
    double limit = 0;
    bool pass = false;
    std::string note;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::string text() const;
};

struct Report {
    std::string suite;
    std::vector<Check> checks;
    json trials = json::array();
    json extra = json::object();
    CsvTable csv;
    double seconds = 0;  ///< wall time; the only nondeterministic field

    bool pass() const;
    /// Document with keys suite, pass, checks, trials, extra and timing_seconds.
    json to_json() const;
};

/// CSV column names per command, as printed by the CLI help.
const std::vector<std::string>& csv_columns(const std::string& command);

/// One end-to-end monodromy computation: parameters, state, rho and its diagnostics.
struct MonodromySample {
    int trial = 0;
    ParameterSet<double> p;
    std::complex<double> f, g, w;
    bool ok = false;
    std::string error;
    RhoPoint<double> rho;
    std::array<double, 4> rank_ratio{};
    double t_residual = 0;
    double det0 = 0, detinf = 0, c_functional = 0, c_det_spread = 0;
    std::string rho_class;
};

/// The draws behind the monodromy suite; the surface suite reuses them for its rho-based checks.
std::vector<MonodromySample> monodromy_samples(const Config& cfg);

Report run_verify_theta(const Config& cfg);
Report run_orbit(const Config& cfg);
Report run_isomono(const Config& cfg);
Report run_monodromy(const Config& cfg, std::vector<MonodromySample>* samples_out = nullptr);
Report run_surface(const Config& cfg, const std::vector<MonodromySample>* samples = nullptr);
Report run_special(const Config& cfg);

/// Dispatch by command name; throws ConfigError for an unknown name.
Report run(const std::string& command, const Config& cfg);

json complex_json(const std::complex<double>& z);
json params_json(const ParameterSet<double>& p);

}  // namespace qpvi::suites
