#pragma once

#include "pairex/scaling.hpp"
#include "pairex/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pairex::cli {

using json = nlohmann::json;

enum ExitCode { kOk = 0, kConfigError = 2, kNumericFailure = 3 };

enum class Scenario { Hartree, Pair, Identities, FockVerify, Scaling };

struct InitialData {
    double x0 = 0.0, width = 1.0, velocity = 0.0;
    std::string u0_kind = "zero";  // zero | random
    double u0_hs = 0.5;
};

struct Tolerances {
    double trig = 1e-9, ch_sh = 1e-9, inverse = 1e-9, contour = 1e-8;
    double lem = 1e-7, lem1 = 1e-7, seq = 1e-8;
    double mass = 1e-10;
};

struct RunConfig {
    Scenario scenario = Scenario::Hartree;
    Grid grid;
    PotentialParams potential;
    InitialData initial;
    std::uint64_t seed = 1;
    double dt = 1e-3, T = 1.0;
    int stride = 1;
    bool serial = false;
    Exchange exchange = Exchange::AsWritten;
    PairOptions pair;
    bool residuals = true;
    Tolerances tol;
    int samples = 20;
    double hs_max = 2.0;
    FockSuiteConfig fock;
    CubicSuiteConfig cubic;
    fock::ScalingConfig scaling;
    json source;   // the document as given
};

const char* to_string(Scenario s);

// Parses and checks a config document. Errors are appended; the result is meaningful only when
// no errors were added.
RunConfig parse_config(const json& doc, std::vector<std::string>& errors);

struct ValidationReport {
    bool ok = false;
    std::vector<std::string> errors;
    std::vector<std::string> notes;  // advisory messages
    json derived;
};

ValidationReport validate(const json& doc);

struct RunOptions {
    std::string out_dir = "out";
    bool serial = false;
    std::optional<std::uint64_t> seed;
    std::string command_line;
};

// Runs the scenario and writes CSV, summary.json, manifest.json and data_dictionary.json.
int run(const json& doc, const RunOptions& opt, std::ostream& log);

// Locale-free shortest round-trip formatting used for every CSV cell.
std::string format_number(double x);

}  // namespace pairex::cli
