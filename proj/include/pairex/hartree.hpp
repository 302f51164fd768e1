#pragma once

#include "pairex/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <vector>

namespace pairex {

struct HartreeState {
    Field phi;
    double t = 0.0;
};

struct DensitySet {
    RVec rho;
    RVec p;
    RVec sigma;
    RVec e;
    RVec lambda;
    RVec W;
};

struct Conserved {
    double mass = 0.0;
    double energy = 0.0;
    double momentum = 0.0;
};

struct ConformalSet {
    double E_c = 0.0;
    double E_c_gradient = 0.0;  // second algebraic form, for cross-checking
    double E_cc = 0.0;
    double R_c = 0.0;
    double R_cc = 0.0;
};

struct DecayNorms {
    double l4 = 0.0;
    double l6 = 0.0;
};

// Spectral derivatives on a periodic grid.
class Spectral {
public:
    explicit Spectral(const Grid& g);
    CVec gradient(const CVec& f) const;
    CVec laplacian(const CVec& f) const;
    // Multiply the Fourier coefficients by mult(k).
    CVec apply(const CVec& f, const CVec& mult) const;
    const RVec& xi() const { return xi_; }
    // Dense matrix of -Delta, real symmetric (circulant).
    RMat minus_laplacian_matrix() const;

private:
    Grid grid_;
    RVec xi_;
    mutable Eigen::FFT<double> fft_;
};

// Modulated Gaussian A exp(-(x-x0)^2 / 2s^2) exp(i v0 x), normalized to ||phi|| = 1.
Field gaussian_field(const Grid& g, double x0, double s, double v0);

RVec convolve_potential_real(const CVec& phi, const Potential& v);
Field convolve_potential(const Field& phi, const Potential& v);

class HartreeStepper {
public:
    HartreeStepper(const Potential& v, double dt);
    void step(HartreeState& s) const;
    double dt() const { return dt_; }

private:
    Potential v_;
    double dt_;
    CVec kinetic_;
    Spectral spec_;
};

HartreeState hartree_step(const HartreeState& s, const Potential& v, double dt);

DensitySet densities(const HartreeState& s, const Potential& v);
// int |lambda + (-Delta rho + W rho)| dx
double structure_residual(const HartreeState& s, const Potential& v);
Conserved conserved_quantities(const HartreeState& s, const Potential& v);
// E_c in both algebraic forms and R_c; valid for t >= 0 (no E_cc).
ConformalSet pseudoconformal(const HartreeState& s, const Potential& v);
// Full set including E_cc and R_cc; requires t > 0.
ConformalSet conformal_quantities(const HartreeState& s, const Potential& v);
DecayNorms decay_norms(const HartreeState& s);

struct HartreeRow {
    double t;
    Conserved c;
    ConformalSet conf;
    DecayNorms d;
    bool has_cc;
};

// Evolves to T and samples every `stride` steps (t = 0 included).
std::vector<HartreeRow> run_hartree(const HartreeState& s0, const Potential& v, double dt,
                                    double T, int stride);

}  // namespace pairex
