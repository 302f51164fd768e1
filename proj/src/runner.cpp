#include "pairex/runner.hpp"

#include "pairex/hartree.hpp"
#include "pairex/random.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef PAIREX_VERSION
#define PAIREX_VERSION "unknown"
#endif

namespace pairex::cli {

namespace fs = std::filesystem;

namespace {

// caps on the truncated Fock spaces a config may request
constexpr double kBasisCap = 2.0e6;
constexpr double kSectorCap = 3000;

// Reads typed fields out of a JSON object and records what is missing or mistyped.
class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    const json* object(const json& doc, const std::string& key, bool required,
                       const std::string& where = "") {
        std::string path = where.empty() ? key : where + "." + key;
        if (!doc.is_object() || !doc.contains(key)) {
            if (required) errors_.push_back("missing required field '" + path + "'");
            return nullptr;
        }
        const json& v = doc.at(key);
        if (!v.is_object()) {
            errors_.push_back("field '" + path + "' must be an object");
            return nullptr;
        }
        return &v;
    }

    template <class T>
    void get(const json* obj, const std::string& key, T& out, const std::string& where,
             bool required = false) {
        std::string path = where + "." + key;
        if (!obj || !obj->contains(key)) {
            if (required) errors_.push_back("missing required field '" + path + "'");
            return;
        }
        const json& v = obj->at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) return type_error(path, "a boolean");
            out = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) return type_error(path, "a string");
            out = v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) return type_error(path, "an integer");
            out = v.get<T>();
        } else {
            if (!v.is_number()) return type_error(path, "a number");
            out = v.get<double>();
        }
    }

    void number_list(const json* obj, const std::string& key, std::vector<double>& out,
                     const std::string& where) {
        std::string path = where + "." + key;
        if (!obj || !obj->contains(key)) return;
        const json& v = obj->at(key);
        if (!v.is_array() || v.empty()) return type_error(path, "a non-empty array of numbers");
        std::vector<double> r;
        for (const auto& x : v) {
            if (!x.is_number()) return type_error(path, "a non-empty array of numbers");
            r.push_back(x.get<double>());
        }
        out = r;
    }

    void fail(const std::string& msg) { errors_.push_back(msg); }

private:
    void type_error(const std::string& path, const char* what) {
        errors_.push_back("field '" + path + "' must be " + what);
    }
    std::vector<std::string>& errors_;
};

bool scenario_from_string(const std::string& s, Scenario& out) {
    if (s == "hartree") out = Scenario::Hartree;
    else if (s == "pair") out = Scenario::Pair;
    else if (s == "identities") out = Scenario::Identities;
    else if (s == "fock-verify") out = Scenario::FockVerify;
    else if (s == "scaling") out = Scenario::Scaling;
    else return false;
    return true;
}

void read_grid(Reader& rd, const json& doc, RunConfig& c, bool required) {
    const json* g = rd.object(doc, "grid", required);
    if (!g) return;
    int n = 0;
    double length = 0.0, dx = 0.0;
    bool periodic = true;
    rd.get(g, "n", n, "grid", true);
    rd.get(g, "length", length, "grid");
    rd.get(g, "dx", dx, "grid");
    rd.get(g, "periodic", periodic, "grid");
    if (!g->contains("length") && !g->contains("dx"))
        rd.fail("missing required field 'grid.length' (or 'grid.dx')");
    if (g->contains("n") && n < 2) rd.fail("grid.n must be at least 2");
    if (length == 0.0 && dx > 0.0) length = n * dx;
    if (g->contains("length") || g->contains("dx")) {
        if (!(length > 0.0)) rd.fail("grid length and dx must be > 0");
    }
    if (n >= 2 && length > 0.0) c.grid = Grid::centered(n, length, periodic);
}

void read_potential(Reader& rd, const json& doc, RunConfig& c) {
    const json* p = rd.object(doc, "potential", false);
    if (!p) return;
    std::string kind = to_string(c.potential.kind);
    rd.get(p, "kind", kind, "potential");
    try {
        c.potential.kind = potential_kind_from_string(kind);
    } catch (const std::exception&) {
        rd.fail("potential.kind '" + kind + "' is not one of cutoff, gaussian, delta, zero");
    }
    rd.get(p, "strength", c.potential.strength, "potential");
    rd.get(p, "cutoff", c.potential.cutoff, "potential");
    rd.get(p, "width", c.potential.cutoff, "potential");
    rd.get(p, "eps", c.potential.eps, "potential");
    rd.get(p, "defocusing", c.potential.defocusing, "potential");
    if (!(c.potential.cutoff > 0.0)) rd.fail("potential.cutoff must be > 0");
    if (!(c.potential.eps > 0.0)) rd.fail("potential.eps must be > 0");
}

void read_initial(Reader& rd, const json& doc, RunConfig& c) {
    const json* in = rd.object(doc, "initial", false);
    if (!in) return;
    rd.get(in, "x0", c.initial.x0, "initial");
    rd.get(in, "width", c.initial.width, "initial");
    rd.get(in, "velocity", c.initial.velocity, "initial");
    rd.get(in, "seed", c.seed, "initial");
    if (!(c.initial.width > 0.0)) rd.fail("initial.width must be > 0");
    if (const json* u = rd.object(*in, "u0", false, "initial")) {
        rd.get(u, "kind", c.initial.u0_kind, "initial.u0");
        rd.get(u, "hs", c.initial.u0_hs, "initial.u0");
        if (c.initial.u0_kind != "zero" && c.initial.u0_kind != "random")
            rd.fail("initial.u0.kind must be 'zero' or 'random'");
        if (c.initial.u0_hs < 0.0) rd.fail("initial.u0.hs must be >= 0");
    }
}

void read_time(Reader& rd, const json& doc, RunConfig& c, bool required) {
    const json* t = rd.object(doc, "time", required);
    if (!t) return;
    rd.get(t, "dt", c.dt, "time", required);
    rd.get(t, "T", c.T, "time", required);
    rd.get(t, "stride", c.stride, "time");
    if (!(c.dt > 0.0)) rd.fail("time.dt must be > 0");
    if (!(c.T >= 0.0)) rd.fail("time.T must be >= 0");
    if (c.stride < 1) rd.fail("time.stride must be >= 1");
}

void read_tolerances(Reader& rd, const json& doc, RunConfig& c) {
    const json* t = rd.object(doc, "tolerances", false);
    if (!t) return;
    struct Item {
        const char* key;
        double* v;
    } items[] = {{"trig", &c.tol.trig},       {"ch_sh", &c.tol.ch_sh}, {"inverse", &c.tol.inverse},
                 {"contour", &c.tol.contour}, {"lem", &c.tol.lem},     {"lem1", &c.tol.lem1},
                 {"seq", &c.tol.seq},         {"mass", &c.tol.mass},
                 {"ladder", &c.fock.tol_ladder},
                 {"number", &c.fock.tol_number},
                 {"conjugation", &c.fock.tol_conjugation},
                 {"lie", &c.fock.tol_lie},
                 {"basis", &c.fock.tol_basis},
                 {"cubic", &c.cubic.tol}};
    for (const auto& it : items) rd.get(t, it.key, *it.v, "tolerances");
    for (auto it = t->begin(); it != t->end(); ++it) {
        bool known = std::any_of(std::begin(items), std::end(items),
                                 [&](const Item& x) { return it.key() == x.key; });
        if (!known) rd.fail("unknown tolerance 'tolerances." + it.key() + "'");
    }
    for (const auto& it : items)
        if (!(*it.v > 0.0)) rd.fail(std::string("tolerances.") + it.key + " must be > 0");
}

void read_pair(Reader& rd, const json& doc, RunConfig& c) {
    const json* p = rd.object(doc, "pair", false);
    if (!p) return;
    std::string ex = to_string(c.exchange), r = to_string(c.pair.r);
    rd.get(p, "exchange", ex, "pair");
    rd.get(p, "r", r, "pair");
    rd.get(p, "n_quad", c.pair.n_quad, "pair");
    rd.get(p, "residuals", c.residuals, "pair");
    try {
        c.exchange = exchange_from_string(ex);
    } catch (const std::exception&) {
        rd.fail("pair.exchange '" + ex + "' is not recognized");
    }
    try {
        c.pair.r = r_convention_from_string(r);
    } catch (const std::exception&) {
        rd.fail("pair.r '" + r + "' is not recognized");
    }
    if (c.pair.n_quad < 4) rd.fail("pair.n_quad must be >= 4");
}

void read_identities(Reader& rd, const json& doc, RunConfig& c) {
    const json* p = rd.object(doc, "identities", false);
    if (!p) return;
    rd.get(p, "samples", c.samples, "identities");
    rd.get(p, "hs_max", c.hs_max, "identities");
    if (c.samples < 1) rd.fail("identities.samples must be >= 1");
    if (!(c.hs_max > 0.0)) rd.fail("identities.hs_max must be > 0");
}

void read_fock(Reader& rd, const json& doc, RunConfig& c) {
    const json* p = rd.object(doc, "fock", false);
    if (!p) return;
    rd.get(p, "modes", c.fock.modes, "fock");
    rd.get(p, "cutoff", c.fock.cutoff, "fock");
    rd.get(p, "k_norm", c.fock.k_norm, "fock");
    rd.get(p, "N", c.fock.N, "fock");
    rd.get(p, "probe_level", c.fock.probe_level, "fock");
    rd.get(p, "headroom", c.fock.headroom, "fock");
    rd.get(p, "cubic_k_norm", c.cubic.k_norm, "fock");
    if (c.fock.modes < 1) rd.fail("fock.modes must be >= 1");
    if (c.fock.cutoff < 4) rd.fail("fock.cutoff must be >= 4");
    if (c.fock.probe_level < 0 || c.fock.probe_level > c.fock.cutoff - 2)
        rd.fail("fock.probe_level must lie in [0, cutoff - 2]");
    if (c.fock.headroom < 0) rd.fail("fock.headroom must be >= 0");
    if (!(c.fock.N > 0.0)) rd.fail("fock.N must be > 0");
}

void read_scaling(Reader& rd, const json& doc, RunConfig& c) {
    auto& s = c.scaling;
    s.grid = c.grid;
    s.potential = c.potential;
    s.alpha0 = CVec::Ones(c.grid.n);
    const json* p = rd.object(doc, "scaling", false);
    if (!p) return;
    rd.number_list(p, "N_list", s.N_list, "scaling");
    rd.number_list(p, "times", s.times, "scaling");
    rd.get(p, "cutoff", s.cutoff, "scaling");
    rd.get(p, "cutoff_margin", s.cutoff_margin, "scaling");
    rd.get(p, "headroom", s.headroom, "scaling");
    rd.get(p, "loss_budget", s.loss_budget, "scaling");
    rd.get(p, "t_fit", s.t_fit, "scaling");
    rd.get(p, "envelope_N", s.envelope_N, "scaling");
    rd.get(p, "envelope_t0", s.envelope_t0, "scaling");
    rd.get(p, "envelope_t1", s.envelope_t1, "scaling");
    rd.get(p, "interaction_sign", s.interaction_sign, "scaling");
    rd.get(p, "functionals", s.functionals, "scaling");
    if (p->contains("alpha0")) {
        const json& a = p->at("alpha0");
        bool ok = a.is_array() && int(a.size()) == c.grid.n;
        CVec al(ok ? a.size() : 0);
        for (size_t i = 0; ok && i < a.size(); ++i) {
            const json& z = a[i];
            if (z.is_number()) al(i) = z.get<double>();
            else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number())
                al(i) = cd(z[0].get<double>(), z[1].get<double>());
            else ok = false;
        }
        if (!ok) rd.fail("scaling.alpha0 must list grid.n amplitudes as numbers or [re, im]");
        else if (al.norm() == 0.0) rd.fail("scaling.alpha0 must be nonzero");
        else s.alpha0 = al;
    }
    for (double N : s.N_list)
        if (!(N > 0.0)) rd.fail("scaling.N_list entries must be > 0");
    if (!(s.loss_budget > 0.0)) rd.fail("scaling.loss_budget must be > 0");
    if (s.headroom < 0) rd.fail("scaling.headroom must be >= 0");
    for (double t : s.times) {
        double k = t / c.dt;
        if (t < 0.0 || std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
            rd.fail("scaling.times must be non-negative multiples of time.dt");
    }
}

// derived sizes and the cap checks, appended to the report
void check_budget(const RunConfig& c, json& derived, std::vector<std::string>& errors) {
    auto add = [&](int M, int P, int pad, int dense_vectors) {
        double basis = fock::FockBasis::binomial(P + M, M);
        double padded = fock::FockBasis::binomial(P + pad + M, M);
        double sector = M > 1 ? fock::FockBasis::binomial(P + M - 1, M - 1) : 1.0;
        derived["modes"] = M;
        derived["cutoff"] = P;
        derived["basis_size"] = basis;
        derived["padded_basis_size"] = padded;
        derived["max_sector_dim"] = sector;
        // vectors on the padded basis plus dense sector eigensystems (values and vectors)
        double bytes = 16.0 * padded * dense_vectors + 16.0 * 2.0 * sector * sector * (P + 1) / 2.0;
        derived["memory_estimate_bytes"] = bytes;
        if (padded > kBasisCap)
            errors.push_back("basis size binomial(P+M, M) = " + std::to_string(long(padded)) +
                             " exceeds the cap " + std::to_string(long(kBasisCap)));
    };
    if (c.scenario == Scenario::FockVerify) {
        add(c.fock.modes, c.fock.cutoff, c.fock.headroom, 8);
        double coh_tail = fock::poisson_tail(c.fock.N, c.fock.cutoff);
        derived["coherent_poisson_tail"] = coh_tail;
        if (coh_tail > 1e-8)
            errors.push_back("truncation budget: Poisson tail estimate " + format_number(coh_tail) +
                             " for N = " + format_number(c.fock.N) + " at P = " +
                             std::to_string(c.fock.cutoff) + " exceeds 1e-8");
    } else if (c.scenario == Scenario::Scaling) {
        const auto& s = c.scaling;
        double Nmax = *std::max_element(s.N_list.begin(), s.N_list.end());
        int P = s.cutoff > 0 ? s.cutoff : fock::auto_cutoff(Nmax, s.loss_budget, s.cutoff_margin);
        double tail = fock::poisson_tail(Nmax, P);
        derived["poisson_tail"] = tail;
        derived["cutoff_mode"] = s.cutoff > 0 ? "fixed" : "automatic (initial estimate)";
        add(c.grid.n, P, s.headroom, 2 * int(s.times.size()));
        if (tail > s.loss_budget)
            errors.push_back("truncation budget: Poisson tail estimate " + format_number(tail) +
                             " for N = " + format_number(Nmax) + " at P = " + std::to_string(P) +
                             " exceeds loss_budget " + format_number(s.loss_budget) +
                             "; need P >= " +
                             std::to_string(fock::auto_cutoff(Nmax, s.loss_budget, 0)));
        double sector = c.grid.n > 1 ? fock::FockBasis::binomial(P + c.grid.n - 1, c.grid.n - 1) : 1;
        if (sector > kSectorCap)
            errors.push_back("largest number sector " + std::to_string(long(sector)) +
                             " exceeds the dense cap " + std::to_string(long(kSectorCap)) +
                             " (reduce grid.n or N)");
    }
}

}  // namespace

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::Hartree: return "hartree";
        case Scenario::Pair: return "pair";
        case Scenario::Identities: return "identities";
        case Scenario::FockVerify: return "fock-verify";
        case Scenario::Scaling: return "scaling";
    }
    return "?";
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

RunConfig parse_config(const json& doc, std::vector<std::string>& errors) {
    RunConfig c;
    c.source = doc;
    Reader rd(errors);
    if (!doc.is_object()) {
        errors.push_back("config must be a JSON object");
        return c;
    }
    bool known = false;
    if (!doc.contains("scenario")) {
        errors.push_back("missing required field 'scenario'");
    } else if (!doc["scenario"].is_string() ||
               !scenario_from_string(doc["scenario"].get<std::string>(), c.scenario)) {
        errors.push_back("field 'scenario' must be one of hartree, pair, identities, fock-verify, scaling");
    } else {
        known = true;
    }
    read_grid(rd, doc, c, !known || c.scenario != Scenario::FockVerify);
    read_potential(rd, doc, c);
    read_initial(rd, doc, c);
    read_time(rd, doc, c, known && (c.scenario == Scenario::Hartree || c.scenario == Scenario::Pair));
    read_tolerances(rd, doc, c);
    if (doc.contains("serial")) rd.get(&doc, "serial", c.serial, "");
    read_pair(rd, doc, c);
    read_identities(rd, doc, c);
    read_fock(rd, doc, c);
    if (c.scenario == Scenario::Scaling) {
        read_scaling(rd, doc, c);
        c.scaling.dt = c.dt;
        c.scaling.pair = c.pair;
        if (doc.contains("pair") && doc["pair"].contains("exchange")) c.scaling.exchange = c.exchange;
    }
    return c;
}

ValidationReport validate(const json& doc) {
    ValidationReport rep;
    RunConfig c = parse_config(doc, rep.errors);
    if (rep.errors.empty()) {
        rep.derived["scenario"] = to_string(c.scenario);
        if (c.scenario != Scenario::FockVerify) rep.derived["grid_dx"] = c.grid.dx;
        if (c.scenario == Scenario::Hartree || c.scenario == Scenario::Pair ||
            c.scenario == Scenario::Scaling) {
            double ratio = c.dt / (c.grid.dx * c.grid.dx);
            rep.derived["dt_over_dx2"] = ratio;
            if (ratio > 1.0)
                rep.notes.push_back("dt / dx^2 = " + format_number(ratio) +
                                    " > 1; the splitting stays stable but time error may dominate");
        }
        if (c.scenario == Scenario::Hartree || c.scenario == Scenario::Pair)
            rep.derived["steps"] = long(std::llround(c.T / c.dt));
        check_budget(c, rep.derived, rep.errors);
    }
    rep.ok = rep.errors.empty();
    return rep;
}

namespace {

class CsvWriter {
public:
    CsvWriter(const fs::path& p, const std::vector<std::string>& header)
        : out_(p, std::ios::binary), cols_(header.size()) {
        if (!out_) throw InputError("cannot open " + p.string() + " for writing");
        for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    CsvWriter& cell(double x) { return raw(format_number(x)); }
    CsvWriter& cell(long x) { return raw(std::to_string(x)); }
    CsvWriter& raw(const std::string& s) {
        out_ << (n_++ ? "," : "") << s;
        return *this;
    }
    void end() {
        if (n_ != cols_) throw std::logic_error("csv row width mismatch");
        out_ << '\n';
        n_ = 0;
    }

private:
    std::ofstream out_;
    size_t cols_;
    size_t n_ = 0;
};

struct Column {
    const char* name;
    const char* description;
};

const std::vector<Column> kHartreeCols = {
    {"t", "time"},
    {"mass", "int |phi|^2 dx"},
    {"energy", "Hartree energy, kinetic plus interaction, int e dx"},
    {"momentum", "int p dx, p the momentum density"},
    {"E_c", "pseudoconformal quantity int (x^2 rho / 2 + t x p + t^2 e) dx, rho = |phi|^2 / 2"},
    {"E_cc", "E_c / t; nan at t = 0"},
    {"R_c", "t int int rho(x) (-4 v - 2 r v')(x - y) rho(y), rate term of the E_c law"},
    {"R_cc", "||grad phi - i x phi / 2t||^2 - 2 int int rho (v + r v') rho, rate term of the E_cc law; nan at t = 0"},
    {"l4", "||phi||_{L^4}"},
    {"l6", "||phi||_{L^6}"},
};

const std::vector<Column> kPairCols = {
    {"t", "time"},
    {"u_hs", "||u||_HS"},
    {"m_hs", "||m||_HS, m the pair source kernel built from phi and v"},
    {"m_integral", "int_0^t ||m||_HS ds (trapezoid)"},
    {"gronwall_lhs", "||u(t)||_HS, the side checked against the a priori bound"},
    {"gronwall_bound", "(m_integral + ||u(0)||_HS) exp(m_integral)"},
    {"lem", "HS residual of the first kernel identity at the sample"},
    {"lem1", "HS residual of the second kernel identity at the sample"},
    {"seq1_vs_seq2", "HS gap between the first and second equivalent forms"},
    {"seq2_vs_seq3", "HS gap between the second and third equivalent forms"},
    {"trace_formula", "d/dt ||u||_HS^2 predicted by the trace law"},
    {"trace_defect", "|centered difference of ||u||_HS^2 - trace_formula|; nan at the first and last rows"},
    {"asymmetry", "max relative transpose asymmetry of u before resymmetrizing"},
    {"trace_d", "real part of tr d for the compatibility kernel d, diagnostic"},
};

const std::vector<Column> kIdentityCols = {
    {"sample", "sample index"},
    {"k_hs", "HS norm of the random symmetric kernel k"},
    {"trig", "||q - 2p - p^2||_HS with p = ch(k) - 1, q = sh(k) conj(sh(k))"},
    {"ch_sh", "||ch ch - sh conj(sh) - 1||_HS"},
    {"inverse", "||inverse_sh(sh(k)) - k||_HS"},
    {"contour", "||sqrt(1+q) by contour quadrature - spectral||_HS"},
    {"lem", "first kernel identity residual on a random (u, phi)"},
    {"lem1", "second kernel identity residual on a random (u, phi)"},
    {"seq1_vs_seq2", "first vs second equivalent form of the pair equation"},
    {"seq2_vs_seq3", "second vs third equivalent form of the pair equation"},
};

const std::vector<Column> kFockCols = {
    {"check", "check name"},
    {"value", "measured residual, operator norm on probe columns or relative error"},
    {"tolerance", "pass threshold"},
    {"pass", "1 if value <= tolerance else 0"},
};

const std::vector<Column> kScalingCols = {
    {"N", "particle number"},
    {"t", "time"},
    {"cutoff", "Fock cutoff P used for this N"},
    {"basis_size", "binomial(P+M, M)"},
    {"distance", "min over phases ||e^{-iHt} psi0 - e^{-sqrt(N)A} e^{-B} Omega|| (pair)"},
    {"control_distance", "same distance with the coherent state only (no pair kernel)"},
    {"truncation_loss", "weight of the approximate state above level P"},
    {"u_hs", "||u(t)||_HS on the mode grid"},
    {"f", "norm of the cubic error functional"},
    {"g", "norm of the quartic error functional"},
};

std::vector<std::string> names(const std::vector<Column>& cols) {
    std::vector<std::string> r;
    for (const auto& c : cols) r.push_back(c.name);
    return r;
}

json dictionary(const std::string& file, const std::vector<Column>& cols) {
    json d;
    d["file"] = file;
    for (const auto& c : cols) d["columns"][c.name] = c.description;
    return d;
}

struct Outcome {
    json summary;
    json dictionary;          // file -> columns
    std::vector<std::string> failures;
};

Outcome run_hartree_scenario(const RunConfig& c, const fs::path& dir, std::ostream& log) {
    Potential v = Potential::build(c.grid, c.potential);
    HartreeState s0{gaussian_field(c.grid, c.initial.x0, c.initial.width, c.initial.velocity), 0.0};
    auto rows = run_hartree(s0, v, c.dt, c.T, c.stride);
    CsvWriter w(dir / "hartree.csv", names(kHartreeCols));
    double m0 = rows.front().c.mass, e0 = rows.front().c.energy, mdrift = 0, edrift = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        w.cell(r.t).cell(r.c.mass).cell(r.c.energy).cell(r.c.momentum).cell(r.conf.E_c);
        w.cell(r.has_cc ? r.conf.E_cc : nan).cell(r.conf.R_c).cell(r.has_cc ? r.conf.R_cc : nan);
        w.cell(r.d.l4).cell(r.d.l6).end();
        mdrift = std::max(mdrift, std::abs(r.c.mass - m0));
        edrift = std::max(edrift, std::abs(r.c.energy - e0));
    }
    Outcome o;
    o.summary = {{"rows", rows.size()}, {"mass_drift", mdrift}, {"energy_drift", edrift},
                 {"final_mass", rows.back().c.mass}, {"final_energy", rows.back().c.energy}};
    o.dictionary["hartree.csv"] = dictionary("hartree.csv", kHartreeCols)["columns"];
    if (mdrift > c.tol.mass)
        o.failures.push_back("mass drift " + format_number(mdrift) + " > tolerance " +
                             format_number(c.tol.mass));
    log << "hartree: " << rows.size() << " rows, mass drift " << format_number(mdrift) << "\n";
    return o;
}

Kernel initial_pair_kernel(const RunConfig& c) {
    if (c.initial.u0_kind == "random") {
        Rng64 rng(c.seed);
        return random_symmetric_kernel(c.grid, c.initial.u0_hs, rng);
    }
    Kernel z = Kernel::zero(c.grid);
    z.symmetry = Symmetry::Symmetric;
    return z;
}

Outcome run_pair_scenario(const RunConfig& c, const fs::path& dir, std::ostream& log) {
    Potential v = Potential::build(c.grid, c.potential);
    Field phi0 = gaussian_field(c.grid, c.initial.x0, c.initial.width, c.initial.velocity);
    PairRunConfig pc;
    pc.dt = c.dt;
    pc.T = c.T;
    pc.stride = c.stride;
    pc.exchange = c.exchange;
    pc.opt = c.pair;
    pc.residuals = c.residuals;
    PairTrajectory tr = run_pair(phi0, initial_pair_kernel(c), v, pc);
    CsvWriter w(dir / "pair.csv", names(kPairCols));
    double lem = 0, lem1 = 0, s12 = 0, s23 = 0, asym = 0, defect = 0;
    for (const auto& r : tr.rows) {
        w.cell(r.t).cell(r.u_norm).cell(r.m_norm).cell(r.m_integral).cell(r.gronwall_lhs);
        w.cell(r.gronwall_bound).cell(r.lem).cell(r.lem1).cell(r.seq1_vs_seq2).cell(r.seq2_vs_seq3);
        w.cell(r.trace_formula).cell(r.trace_defect).cell(r.asymmetry).cell(r.trace_d).end();
        lem = std::max(lem, r.lem);
        lem1 = std::max(lem1, r.lem1);
        s12 = std::max(s12, r.seq1_vs_seq2);
        s23 = std::max(s23, r.seq2_vs_seq3);
        asym = std::max(asym, r.asymmetry);
        if (!std::isnan(r.trace_defect)) defect = std::max(defect, r.trace_defect);
    }
    Outcome o;
    o.summary = {{"rows", tr.rows.size()},       {"max_lem", lem},
                 {"max_lem1", lem1},             {"max_seq1_vs_seq2", s12},
                 {"max_seq2_vs_seq3", s23},      {"max_asymmetry", asym},
                 {"max_trace_defect", defect},   {"final_u_hs", tr.rows.back().u_norm},
                 {"exchange", to_string(c.exchange)}};
    o.dictionary["pair.csv"] = dictionary("pair.csv", kPairCols)["columns"];
    if (c.residuals) {
        if (lem > c.tol.lem) o.failures.push_back("lem residual " + format_number(lem));
        if (lem1 > c.tol.lem1) o.failures.push_back("lem1 residual " + format_number(lem1));
        if (s23 > c.tol.seq) o.failures.push_back("seq2 vs seq3 gap " + format_number(s23));
    }
    log << "pair: " << tr.rows.size() << " rows, final ||u||_HS "
        << format_number(tr.rows.back().u_norm) << "\n";
    return o;
}

Outcome run_identities_scenario(const RunConfig& c, const fs::path& dir, std::ostream& log) {
    IdentityConfig ic;
    ic.samples = c.samples;
    ic.hs_max = c.hs_max;
    ic.n_quad = c.pair.n_quad;
    ic.pair_residuals = c.residuals;
    ic.potential = Potential::build(c.grid, c.potential);
    auto rows = identity_suite(ic, c.seed);
    CsvWriter w(dir / "identities.csv", names(kIdentityCols));
    json mx = json::object();
    const char* keys[] = {"trig", "ch_sh", "inverse", "contour", "lem", "lem1", "seq1_vs_seq2", "seq2_vs_seq3"};
    std::vector<double> m(8, 0.0);
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        double vals[] = {r.trig, r.ch_sh, r.inverse, r.contour, r.lem, r.lem1, r.seq1_vs_seq2, r.seq2_vs_seq3};
        w.cell(long(i)).cell(r.k_hs);
        for (int k = 0; k < 8; ++k) {
            w.cell(vals[k]);
            m[k] = std::max(m[k], vals[k]);
        }
        w.end();
    }
    double tol[] = {c.tol.trig, c.tol.ch_sh, c.tol.inverse, c.tol.contour,
                    c.tol.lem,  c.tol.lem1,  c.tol.seq,     c.tol.seq};
    Outcome o;
    for (int k = 0; k < 8; ++k) {
        mx[keys[k]] = m[k];
        if (m[k] > tol[k])
            o.failures.push_back(std::string(keys[k]) + " residual " + format_number(m[k]) +
                                 " > tolerance " + format_number(tol[k]));
    }
    o.summary = {{"samples", rows.size()}, {"max", mx}};
    o.dictionary["identities.csv"] = dictionary("identities.csv", kIdentityCols)["columns"];
    log << "identities: " << rows.size() << " samples\n";
    return o;
}

Outcome run_fock_scenario(const RunConfig& c, const fs::path& dir, std::ostream& log) {
    auto checks = fock_suite(c.fock, c.seed);
    CubicSuiteConfig cc = c.cubic;
    cc.potential = c.potential;
    for (auto& x : cubic_suite(cc, c.seed + 1)) checks.push_back(x);
    CsvWriter w(dir / "fock_verify.csv", names(kFockCols));
    Outcome o;
    json res = json::object();
    for (const auto& x : checks) {
        w.raw(x.name).cell(x.value).cell(x.tolerance).cell(long(x.pass())).end();
        res[x.name] = {{"value", x.value}, {"tolerance", x.tolerance}, {"pass", x.pass()}};
        if (!x.pass()) o.failures.push_back(x.name + " = " + format_number(x.value));
    }
    o.summary = {{"checks", res}, {"modes", c.fock.modes}, {"cutoff", c.fock.cutoff}};
    o.dictionary["fock_verify.csv"] = dictionary("fock_verify.csv", kFockCols)["columns"];
    log << "fock-verify: " << checks.size() << " checks, " << o.failures.size() << " failed\n";
    return o;
}

Outcome run_scaling_scenario(const RunConfig& c, bool serial, const fs::path& dir,
                             std::ostream& log) {
    fock::ScalingConfig s = c.scaling;
    s.serial = serial;
    auto res = fock::n_scaling_study(s);
    CsvWriter w(dir / "scaling.csv", names(kScalingCols));
    for (const auto& r : res.rows) {
        w.cell(r.N).cell(r.t).cell(long(r.cutoff)).cell(r.basis_size).cell(r.distance);
        w.cell(r.control_distance).cell(r.truncation_loss).cell(r.u_norm).cell(r.f).cell(r.g).end();
    }
    const auto& m = res.summary;
    Outcome o;
    o.summary = {{"exponent", m.exponent},
                 {"control_exponent", m.control_exponent},
                 {"ratios", m.ratios},
                 {"envelope_slope", m.envelope_slope},
                 {"control_envelope_slope", m.control_envelope_slope},
                 {"max_truncation_loss", m.max_truncation_loss},
                 {"t_fit", s.t_fit},
                 {"N_list", s.N_list}};
    o.dictionary["scaling.csv"] = dictionary("scaling.csv", kScalingCols)["columns"];
    if (m.max_truncation_loss > s.loss_budget)
        o.failures.push_back("truncation loss " + format_number(m.max_truncation_loss) +
                             " exceeds loss_budget");
    log << "scaling: exponent " << format_number(m.exponent) << "\n";
    return o;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream o(p, std::ios::binary);
    o << j.dump(2) << '\n';
}

json summary_dictionary() {
    return {{"scenario", "scenario name"},
            {"status", "ok or numeric-failure"},
            {"failures", "tolerance violations or the numeric diagnostic"},
            {"results", "scenario-specific aggregates such as max residuals, drifts, fitted exponents"}};
}

}  // namespace

int run(const json& doc, const RunOptions& opt, std::ostream& log) {
    ValidationReport rep = validate(doc);
    if (!rep.ok) {
        for (const auto& e : rep.errors) log << "config error: " << e << "\n";
        return kConfigError;
    }
    for (const auto& n : rep.notes) log << "note: " << n << "\n";
    std::vector<std::string> errs;
    RunConfig c = parse_config(doc, errs);
    if (opt.seed) c.seed = *opt.seed;
    const bool serial = opt.serial || c.serial;

    fs::path dir(opt.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        log << "config error: cannot create output directory " << dir << ": " << ec.message() << "\n";
        return kConfigError;
    }

    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    int code = kOk;
    std::string diagnostic;
    try {
        switch (c.scenario) {
            case Scenario::Hartree: o = run_hartree_scenario(c, dir, log); break;
            case Scenario::Pair: o = run_pair_scenario(c, dir, log); break;
            case Scenario::Identities: o = run_identities_scenario(c, dir, log); break;
            case Scenario::FockVerify: o = run_fock_scenario(c, dir, log); break;
            case Scenario::Scaling: o = run_scaling_scenario(c, serial, dir, log); break;
        }
    } catch (const InputError& e) {
        log << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        diagnostic = e.what();
        code = kNumericFailure;
    }
    if (!o.failures.empty()) code = kNumericFailure;
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json summary;
    summary["scenario"] = to_string(c.scenario);
    summary["status"] = code == kOk ? "ok" : "numeric-failure";
    summary["results"] = o.summary.is_null() ? json::object() : o.summary;
    summary["failures"] = o.failures;
    if (!diagnostic.empty()) summary["failures"].push_back(diagnostic);
    write_json(dir / "summary.json", summary);

    json manifest;
    manifest["config"] = doc;
    manifest["code_version"] = PAIREX_VERSION;
    manifest["wall_time_s"] = wall;
    manifest["seed"] = c.seed;
    manifest["serial"] = serial;
    manifest["command"] = opt.command_line;
    manifest["derived"] = rep.derived;
    write_json(dir / "manifest.json", manifest);

    json dict = o.dictionary.is_null() ? json::object() : o.dictionary;
    dict["summary.json"] = summary_dictionary();
    dict["manifest.json"] = {{"config", "the config document as given"},
                             {"code_version", "library version string"},
                             {"wall_time_s", "wall-clock seconds for the scenario"},
                             {"seed", "seed actually used"},
                             {"serial", "true when worker threads were disabled"},
                             {"command", "command line"},
                             {"derived", "quantities computed by validate"}};
    write_json(dir / "data_dictionary.json", dict);

    if (!diagnostic.empty()) log << "numeric failure: " << diagnostic << "\n";
    for (const auto& f : o.failures) log << "tolerance violation: " << f << "\n";
    return code;
}

}  // namespace pairex::cli
