#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "qpvi/suites.hpp"

namespace fs = std::filesystem;
using qpvi::suites::json;

namespace {

constexpr int kExitPass = 0, kExitFail = 1, kExitUsage = 2;

const std::map<std::string, std::string> kCommands = {
    {"verify-theta", "q-Pochhammer and theta identities on random (z, q)"},
    {"orbit", "qPVI orbits: equation residuals, forward/backward roundtrip, base-point events"},
    {"isomono", "Lax pair compatibility along single steps, with a perturbed-step control"},
    {"monodromy", "connection matrix by series and continuation, rho on the surface T = 0"},
    {"surface", "Hessian, eta equations, Segre quadrics, curve X, inverse construction, classification"},
    {"special", "orthogonal-polynomial special solutions and their solvability domains"},
};

std::string columns_help(const std::string& cmd) {
    std::string s = "CSV columns: ";
    const auto& cols = qpvi::suites::csv_columns(cmd);
    for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
    return s;
}

/// Report path: --out or "<command>.json"; QPVI_OUT_DIR replaces the directory part.
fs::path report_path(const std::string& cmd, const std::string& out) {
    fs::path p = out.empty() ? fs::path(cmd + ".json") : fs::path(out);
    if (const char* dir = std::getenv("QPVI_OUT_DIR"); dir && *dir) p = fs::path(dir) / p.filename();
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments for the q-difference Painleve VI equation and its monodromy."};
    app.require_subcommand(1);
    app.footer("Environment: QPVI_OUT_DIR overrides the output directory.\n"
               "Exit codes: 0 all checks pass, 1 a check failed (report still written), 2 usage or config error.");

    std::string config_path, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string chosen;
    for (const auto& [name, desc] : kCommands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON config file (defaults apply when omitted)")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--trials", trials, "override the number of trials")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "report path (JSON); the CSV table goes next to it");
        sub->footer(columns_help(name));
        sub->callback([&chosen, n = name] { chosen = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    qpvi::suites::Config cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            json j;
            try {
                j = json::parse(in);
            } catch (const json::exception& e) {
                throw qpvi::suites::ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            cfg = qpvi::suites::Config::from_json(j);
        }
    } catch (const qpvi::suites::ConfigError& e) {
        std::cerr << "qpvi: " << e.what() << "\n";
        return kExitUsage;
    }
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;

    const fs::path json_path = report_path(chosen, out);
    fs::path csv_path = json_path;
    csv_path.replace_extension(".csv");
    if (json_path.has_parent_path()) fs::create_directories(json_path.parent_path());

    qpvi::suites::Report report;
    int code = kExitPass;
    try {
        report = qpvi::suites::run(chosen, cfg);
        code = report.pass() ? kExitPass : kExitFail;
    } catch (const qpvi::suites::ConfigError& e) {
        std::cerr << "qpvi: " << e.what() << "\n";
        return kExitUsage;
    } catch (const json::exception& e) {
        // Only option lookups parse JSON inside a suite: a wrongly typed option.
        std::cerr << "qpvi: bad option in config: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        report.suite = chosen;
        report.checks.push_back({"suite aborted", 1, 0, false, e.what()});
        code = kExitFail;
    }

    json doc = report.to_json();
    doc["config"] = cfg.to_json();
    std::ofstream(json_path) << doc.dump(2) << "\n";
    std::ofstream(csv_path) << report.csv.text();

    for (const auto& c : report.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (limit " << c.limit << ")"
                  << (c.note.empty() ? "" : "  [" + c.note + "]") << "\n";
    std::cout << chosen << ": " << (code == kExitPass ? "pass" : "fail") << "; report " << json_path.string() << "\n";
    return code;
}
