#pragma once

#include "pairex/cubic.hpp"
#include "pairex/fock.hpp"
#include "pairex/pair.hpp"

#include <vector>

namespace pairex::fock {

struct ScalingConfig {
    Grid grid;                 // grid points are the modes
    PotentialParams potential;
    CVec alpha0;               // initial mode amplitudes, normalized internally
    std::vector<double> N_list{4, 16, 64};
    std::vector<double> times{0, 1, 2, 4, 8};
    double dt = 1e-3;
    int cutoff = 0;            // <= 0: smallest P with Poisson tail below loss_budget, plus margin
    int cutoff_margin = 8;
    int headroom = 16;
    double loss_budget = 1e-6;
    double t_fit = 2.0;
    double envelope_N = 16;
    double envelope_t0 = 1.0, envelope_t1 = 8.0;
    Exchange exchange = Exchange::Transposed;
    double interaction_sign = kInteractionSign;
    PairOptions pair;
    bool functionals = true;
    bool serial = true;
};

struct ScalingRow {
    double N = 0, t = 0;
    int cutoff = 0;
    long basis_size = 0;
    double distance = 0;
    double control_distance = 0;
    double truncation_loss = 0;
    double u_norm = 0;
    double f = 0, g = 0;
};

struct ScalingSummary {
    double exponent = 0;           // d ~ N^exponent at t_fit
    double control_exponent = 0;
    std::vector<double> ratios;    // d(N_i) / d(N_{i+1}) at t_fit
    double envelope_slope = 0;     // log d vs log t on [t0, t1] at envelope_N
    double control_envelope_slope = 0;
    double max_truncation_loss = 0;
};

struct ScalingResult {
    std::vector<ScalingRow> rows;  // sorted by N, then t
    ScalingSummary summary;
};

int auto_cutoff(double N, double loss_budget, int margin);

// Mean-field trajectory on the mode grid: phi(t_i), u(t_i) (operator matrices).
struct MeanFieldTrajectory {
    std::vector<double> t;
    std::vector<Field> phi;
    std::vector<CMat> u;
};
MeanFieldTrajectory mean_field_trajectory(const Field& phi0, const CMat& u0, const Potential& v,
                                          double dt, const std::vector<double>& times,
                                          Exchange ex, const PairOptions& opt);

double phase_min_distance(const CVec& a, const CVec& b);
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

ScalingResult n_scaling_study(const ScalingConfig& cfg);

}  // namespace pairex::fock
