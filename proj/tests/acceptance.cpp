// One line per acceptance criterion; exit status 0 iff every criterion passes.
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "qpvi/suites.hpp"

using namespace qpvi::suites;

namespace {

struct Criterion {
    int id;
    std::string title;
    const Report* report;
    std::set<std::string> checks;  ///< empty: every check of the report
    double time_limit;             ///< seconds, against the report's wall time
};

bool evaluate(const Criterion& c, std::string& detail) {
    bool ok = true;
    int used = 0;
    for (const auto& ch : c.report->checks) {
        if (!c.checks.empty() && !c.checks.count(ch.name)) continue;
        ++used;
        if (!ch.pass) {
            ok = false;
            detail += " [" + ch.name + ": " + std::to_string(ch.value) + " > " + std::to_string(ch.limit) + "]";
        }
    }
    // A selector naming a check that no longer exists must not pass silently.
    if (!c.checks.empty() && used != static_cast<int>(c.checks.size())) {
        ok = false;
        detail += " [missing checks]";
    }
    if (c.report->seconds > c.time_limit) {
        ok = false;
        detail += " [runtime " + std::to_string(c.report->seconds) + " s]";
    }
    return ok;
}

}  // namespace

int main() {
    const Config cfg;
    const Report theta = run_verify_theta(cfg);
    const Report orbit = run_orbit(cfg);
    const Report iso = run_isomono(cfg);
    std::vector<MonodromySample> samples;
    const Report mono = run_monodromy(cfg, &samples);
    const Report surf = run_surface(cfg, &samples);
    const Report special = run_special(cfg);

    const std::vector<Criterion> criteria = {
        {1, "theta and Pochhammer identities", &theta, {}, 5},
        {2, "qPVI orbits", &orbit, {}, 10},
        {3, "isomonodromic compatibility", &iso, {}, 30},
        {4, "monodromy on the surface", &mono,
         {"trials with T residual <= tol", "max T residual (accepted trials)"}, 300},
        {5, "determinant identities and connection properties", &mono,
         {"det Psi_0^-1 identity", "det Psi_inf identity", "C functional equation",
          "det C proportional to theta product (spread)"}, 300},
        {6, "surface algebra", &surf,
         {"Hessian closed form", "Segre quadrics vs elimination oracle", "elimination determinant closed form",
          "curve X on T = 0 for three kappa0", "eta equations", "quadrics at eta points"}, 30},
        {7, "inverse construction", &surf,
         {"inverse construction reproduces rho", "inverse construction functional equation",
          "inverse construction failures"}, 60},
        {8, "special solutions", &special, {}, 300},
        {9, "classification (constructed patterns)", &surf,
         {"misclassified constructed patterns", "reducible classes among non-splitting draws"}, 30},
        {9, "classification (monodromy draws)", &mono, {"reducible classifications under non-splitting"}, 300},
    };

    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        std::string detail;
        bool ok = evaluate(c, detail);
        std::string title = c.title;
        // Criterion 9 spans two reports; fold them into one line.
        if (i + 1 < criteria.size() && criteria[i + 1].id == c.id) {
            std::string d2;
            ok = evaluate(criteria[i + 1], d2) && ok;
            detail += d2;
            title = "classification";
            ++i;
        }
        all = all && ok;
        std::printf("criterion %d (%s): %s%s\n", c.id, title.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
    }
    std::printf("timings: theta %.2f s, orbit %.2f s, isomono %.2f s, monodromy %.2f s, surface %.2f s, special %.2f s\n",
                theta.seconds, orbit.seconds, iso.seconds, mono.seconds, surf.seconds, special.seconds);
    return all ? 0 : 1;
}
