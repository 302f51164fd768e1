#pragma once

#include "pairex/cubic.hpp"
#include "pairex/fock.hpp"
#include "pairex/pair.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pairex {

// Kernel-calculus and pair-equation residuals on one random state.
struct IdentitySample {
    double k_hs = 0.0;
    double trig = 0.0;        // ||q - 2p - p^2||
    double ch_sh = 0.0;       // ||ch ch - sh shbar - 1||
    double inverse = 0.0;     // ||inverse_sh(sh k) - k||
    double contour = 0.0;     // ||sqrt(1+q) contour - spectral||
    double lem = 0.0, lem1 = 0.0, seq1_vs_seq2 = 0.0, seq2_vs_seq3 = 0.0;
};

struct IdentityConfig {
    int samples = 20;
    double hs_max = 2.0;
    int n_quad = 128;
    bool pair_residuals = true;
    Potential potential;  // used for the pair residuals
};

std::vector<IdentitySample> identity_suite(const IdentityConfig& cfg, std::uint64_t seed);

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass() const { return value <= tolerance; }
};

struct FockSuiteConfig {
    int modes = 3;
    int cutoff = 10;
    double k_norm = 0.2;     // operator-matrix Frobenius norm of the pair kernel
    double N = 1.0;          // coherent-state particle number
    int probe_level = 2;
    int headroom = 12;
    double tol_ladder = 1e-12;
    double tol_number = 1e-6;
    double tol_conjugation = 1e-6;
    double tol_lie = 1e-7;
    double tol_basis = 1e-14;
};

std::vector<Check> fock_suite(const FockSuiteConfig& cfg, std::uint64_t seed);

struct CubicSuiteConfig {
    int modes = 3;
    int cutoff = 9;
    double k_norm = 0.3;
    int headroom = 24;
    double tol = 1e-5;
    PotentialParams potential{PotentialKind::Gaussian, 1.0, 1.0, 0.5, true};
};

std::vector<Check> cubic_suite(const CubicSuiteConfig& cfg, std::uint64_t seed);

}  // namespace pairex
