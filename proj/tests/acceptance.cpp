// Acceptance gate. Usage: acceptance [criterion] [path-to-cli]
// Prints one PASS/FAIL line per criterion and exits nonzero if any selected criterion fails.

#include "pairex/hartree.hpp"
#include "pairex/kernel_calculus.hpp"
#include "pairex/pair.hpp"
#include "pairex/random.hpp"
#include "pairex/scaling.hpp"
#include "pairex/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace pairex;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Potential cutoff_potential(const Grid& g, double strength, double R, double eps) {
    PotentialParams p;
    p.kind = PotentialKind::Cutoff;
    p.strength = strength;
    p.cutoff = R;
    p.eps = eps;
    return Potential::build(g, p);
}

Outcome c1() {
    Grid g = Grid::centered(16, 8.0);
    IdentityConfig cfg;
    cfg.samples = 200;
    cfg.hs_max = 2.0;
    cfg.pair_residuals = false;
    cfg.potential = cutoff_potential(g, 1.0, 2.0, 0.5);
    auto rows = identity_suite(cfg, 20240101);
    double trig = 0, chsh = 0, inv = 0;
    for (const auto& r : rows) {
        trig = std::max(trig, r.trig);
        chsh = std::max(chsh, r.ch_sh);
        inv = std::max(inv, r.inverse);
    }
    bool ok = trig < 1e-9 && chsh < 1e-9 && inv < 1e-9;
    return {ok, "trig " + fmt("%.2e", trig) + " ch-sh " + fmt("%.2e", chsh) + " inverse " +
                    fmt("%.2e", inv)};
}

Outcome c2() {
    Grid g = Grid::centered(16, 8.0);
    Rng64 rng(77);
    double worst = 0.0, worst_ratio = 1e300;
    int pairs = 0;
    for (int s = 0; s < 100; ++s) {
        double hs = 2.0 * (1.0 - Normal::uniform(rng));
        CMat a = random_complex_matrix(g.n, g.n, rng);
        CMat q = a * a.adjoint();
        q *= hs / q.norm();
        Kernel qk = Kernel::from_op(g, q);
        qk.symmetry = Symmetry::Hermitian;
        Kernel ref = sqrt_one_plus_spectral(qk);
        worst = std::max(worst, hs_norm(sqrt_one_plus_contour(qk, 128) - ref));
        // ratios are taken while the finer error is above the roundoff floor
        double prev = hs_norm(sqrt_one_plus_contour(qk, 4) - ref);
        for (int nq = 8; nq <= 128; nq *= 2) {
            double e = hs_norm(sqrt_one_plus_contour(qk, nq) - ref);
            if (e < 1e-12) break;
            worst_ratio = std::min(worst_ratio, prev / e);
            ++pairs;
            prev = e;
        }
    }
    return {worst < 1e-8 && worst_ratio >= 5.0 && pairs > 0,
            "max error " + fmt("%.2e", worst) + " min ratio per doubling " +
                fmt("%.1f", worst_ratio) + " over " + std::to_string(pairs) + " doublings"};
}

// Wide box and wide packet: the x-weights of E_c must not see the periodic boundary.
Grid hartree_grid() { return Grid::centered(128, 100.0); }
Field hartree_initial(const Grid& g) { return gaussian_field(g, 0.0, 4.0, 0.0); }

// max_t |(E_c(t+dt) - E_c(t-dt)) / 2dt + R_c(t)| over the run
double pseudo_residual(const std::vector<HartreeRow>& rows, double dt) {
    double worst = 0.0;
    for (size_t i = 1; i + 1 < rows.size(); ++i) {
        double d = (rows[i + 1].conf.E_c - rows[i - 1].conf.E_c) / (2.0 * dt);
        worst = std::max(worst, std::abs(d + rows[i].conf.R_c));
    }
    return worst;
}

Outcome c3() {
    Grid g = hartree_grid();
    // smooth, resolved interaction so the spatial error stays below the time error
    PotentialParams pp;
    pp.kind = PotentialKind::Gaussian;
    pp.strength = 1.0;
    pp.cutoff = 2.0;
    Potential v = Potential::build(g, pp);
    HartreeState s0{hartree_initial(g), 0.0};
    auto a = run_hartree(s0, v, 1e-3, 10.0, 1);
    auto b = run_hartree(s0, v, 5e-4, 10.0, 1);
    double mass = 0, energy = 0;
    for (const auto& r : a) {
        mass = std::max(mass, std::abs(r.c.mass - a[0].c.mass));
        energy = std::max(energy, std::abs(r.c.energy - a[0].c.energy));
    }
    double ra = pseudo_residual(a, 1e-3), rb = pseudo_residual(b, 5e-4);
    double factor = ra / rb;
    bool ok = mass < 1e-10 && energy < 1e-6 && factor >= 3.0 && factor <= 5.0;
    return {ok, "mass drift " + fmt("%.2e", mass) + " energy drift " + fmt("%.2e", energy) +
                    " residual " + fmt("%.2e", ra) + " -> " + fmt("%.2e", rb) + " factor " +
                    fmt("%.2f", factor)};
}

Outcome c4() {
    // decreasing cutoff chi_R(r) / (r + eps), weak enough that the gradient term of R_cc dominates
    Grid g = hartree_grid();
    Potential v = cutoff_potential(g, 0.5, 2.0, 0.5);
    HartreeState s0{hartree_initial(g), 0.0};
    const double dt = 1e-3;
    const int stride = 100;
    auto a = run_hartree(s0, v, dt, 10.0, stride);
    auto b = run_hartree(s0, v, 0.5 * dt, 10.0, 2 * stride);
    Grid g2 = Grid::centered(256, 64.0);
    Potential v2 = cutoff_potential(g2, 0.5, 2.0, 0.5);
    HartreeState s2{hartree_initial(g2), 0.0};
    auto c = run_hartree(s2, v2, dt, 10.0, stride);
    // discretization budget: time (dt vs dt/2) plus space (n vs 2n)
    double budget = 0.0, rise = -1e300, min_rcc = 1e300;
    std::vector<double> e;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].t < 1.0 - 1e-12) continue;
        budget = std::max(budget, std::abs(a[i].conf.E_cc - b[i].conf.E_cc) +
                                      std::abs(a[i].conf.E_cc - c[i].conf.E_cc));
        min_rcc = std::min(min_rcc, a[i].conf.R_cc);
        e.push_back(a[i].conf.E_cc);
    }
    double running_min = 1e300;
    for (double x : e) {
        rise = std::max(rise, x - running_min);
        running_min = std::min(running_min, x);
    }
    RMat vr = v.v_plus_rdv();
    bool ok = rise <= budget;
    return {ok, "max rise " + fmt("%.2e", rise) + " budget " + fmt("%.2e", budget) + " min R_cc " +
                    fmt("%.2e", min_rcc) + " max(v + r v') " + fmt("%.2f", vr.maxCoeff())};
}

Outcome c5() {
    Grid g = Grid::centered(32, 16.0);
    Potential v = cutoff_potential(g, 1.0, 2.0, 0.5);
    Field phi0 = gaussian_field(g, 0.0, 1.0, 0.5);
    Rng64 rng(5);
    Kernel u0 = random_symmetric_kernel(g, 0.5, rng);
    const double t_star = 0.5;
    std::vector<double> defects;
    double lem = 0, lem1 = 0, eq = 0, asym = 0;
    for (double dt : {0.01, 0.005, 0.0025}) {
        PairRunConfig cfg;
        cfg.dt = dt;
        cfg.T = 1.0;
        cfg.stride = int(std::lround(0.1 / dt));
        cfg.residuals = dt == 0.01;
        PairTrajectory tr = run_pair(phi0, u0, v, cfg);  // throws if the a priori bound fails
        for (const auto& r : tr.rows) {
            if (std::abs(r.t - t_star) < 1e-9) defects.push_back(r.trace_defect);
            lem = std::max(lem, r.lem);
            lem1 = std::max(lem1, r.lem1);
            eq = std::max(eq, r.seq2_vs_seq3);
            asym = std::max(asym, r.asymmetry);
        }
    }
    double o1 = std::log2(defects[0] / defects[1]), o2 = std::log2(defects[1] / defects[2]);
    double order = std::min(o1, o2);
    bool ok = order >= 1.8 && lem < 1e-7 && lem1 < 1e-7 && eq < 1e-8;
    return {ok, "trace-law order " + fmt("%.2f", o1) + "/" + fmt("%.2f", o2) + " lem " +
                    fmt("%.1e", lem) + " lem1 " + fmt("%.1e", lem1) + " seq2-seq3 " +
                    fmt("%.1e", eq) + " asymmetry " + fmt("%.1e", asym) + " gronwall ok"};
}

Outcome report_checks(const std::vector<Check>& checks) {
    bool ok = true;
    std::string worst;
    for (const auto& c : checks) {
        if (!c.pass()) {
            ok = false;
            worst += c.name + "=" + fmt("%.2e", c.value) + " ";
        }
    }
    std::string d;
    for (const auto& c : checks) d += c.name + " " + fmt("%.1e", c.value) + "; ";
    return {ok, ok ? d : "failed: " + worst + "| " + d};
}

Outcome c6() {
    std::vector<Check> all;
    for (auto [M, P] : {std::pair{2, 12}, std::pair{3, 12}}) {
        FockSuiteConfig cfg;
        cfg.modes = M;
        cfg.cutoff = P;
        cfg.k_norm = 0.2;
        auto c = fock_suite(cfg, 1000 + M);
        for (auto& x : c) {
            x.name += "@M" + std::to_string(M);
            all.push_back(x);
        }
    }
    return report_checks(all);
}

Outcome c7() {
    std::vector<Check> all;
    for (int s = 0; s < 5; ++s) {
        CubicSuiteConfig cfg;
        cfg.k_norm = 0.1 + 0.05 * s;
        auto c = cubic_suite(cfg, 300 + s);
        for (const auto& x : c) {
            auto it = std::find_if(all.begin(), all.end(), [&](const Check& y) { return y.name == x.name; });
            if (it == all.end()) all.push_back(x);
            else if (x.value > it->value) *it = x;
        }
    }
    return report_checks(all);
}

fock::ScalingConfig scaling_config() {
    fock::ScalingConfig c;
    c.grid.n = 2;
    c.grid.dx = 1.0;
    c.grid.x_min = 0.0;
    c.grid.periodic = true;
    c.potential.kind = PotentialKind::Gaussian;
    c.potential.strength = 0.15;
    c.potential.cutoff = 1.0;
    c.alpha0 = CVec(2);
    c.alpha0 << cd(1.0, 0.0), cd(0.6, 0.3);
    c.N_list = {4, 16, 64};
    c.times = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    c.dt = 1e-3;
    c.serial = false;
    return c;
}

Outcome c8() {
    auto res = fock::n_scaling_study(scaling_config());
    const auto& s = res.summary;
    bool ok = s.exponent >= -0.65 && s.exponent <= -0.35 && s.max_truncation_loss < 1e-6;
    return {ok, "exponent " + fmt("%.3f", s.exponent) + " ratios " + fmt("%.2f", s.ratios[0]) + ", " +
                    fmt("%.2f", s.ratios[1]) + " cutoff loss " + fmt("%.1e", s.max_truncation_loss) +
                    " control exponent " + fmt("%.3f", s.control_exponent)};
}

Outcome c9() {
    fock::ScalingConfig cfg = scaling_config();
    cfg.N_list = {16};
    auto res = fock::n_scaling_study(cfg);
    const auto& s = res.summary;
    bool ok = s.envelope_slope <= 0.75 && s.control_envelope_slope > s.envelope_slope;
    return {ok, "slope " + fmt("%.3f", s.envelope_slope) + " control slope " +
                    fmt("%.3f", s.control_envelope_slope) + " (limit 0.75)"};
}

std::string g_cli;

Outcome c10() {
    namespace fs = std::filesystem;
    if (g_cli.empty()) return {false, "no CLI path given"};
    fs::path root = fs::temp_directory_path() / "pairex_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    fs::path cfg = root / "config.json";
    {
        std::ofstream o(cfg);
        o << R"({"scenario": "pair", "grid": {"n": 16, "length": 12.0, "periodic": true},
 "potential": {"kind": "cutoff", "strength": 1.0, "cutoff": 2.0, "eps": 0.5},
 "initial": {"x0": 0.0, "width": 1.0, "velocity": 0.5, "u0": {"kind": "random", "hs": 0.3}},
 "time": {"dt": 0.01, "T": 0.5, "stride": 5}})";
    }
    std::string out;
    for (int k = 0; k < 2; ++k) {
        fs::path dir = root / ("run" + std::to_string(k));
        std::string cmd = "\"" + g_cli + "\" run --config \"" + cfg.string() + "\" --out \"" +
                          dir.string() + "\" --serial --seed 42 > /dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed"};
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream i(p, std::ios::binary);
        std::stringstream ss;
        ss << i.rdbuf();
        return ss.str();
    };
    std::string a = slurp(root / "run0" / "pair.csv"), b = slurp(root / "run1" / "pair.csv");
    bool ok = !a.empty() && a == b;
    return {ok, std::to_string(a.size()) + " bytes, " + (ok ? "identical" : "differ")};
}

struct Criterion {
    int id;
    double budget_s;
    std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    if (argc > 2) g_cli = argv[2];
    std::vector<Criterion> all = {{1, 10, c1},  {2, 10, c2},  {3, 60, c3},  {4, 60, c4},
                                  {5, 300, c5}, {6, 120, c6}, {7, 300, c7}, {8, 900, c8},
                                  {9, 900, c9}, {10, 120, c10}};
    int failed = 0;
    for (const auto& c : all) {
        if (only && c.id != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = sec <= c.budget_s;
        bool pass = o.pass && in_time;
        std::printf("criterion %d: %s  %s  [%.1f s of %.0f s]\n", c.id, pass ? "PASS" : "FAIL",
                    o.detail.c_str(), sec, c.budget_s);
        std::fflush(stdout);
        if (!pass) ++failed;
    }
    return failed ? 1 : 0;
}
