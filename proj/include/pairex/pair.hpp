#pragma once

#include "pairex/grid.hpp"
#include "pairex/hartree.hpp"
#include "pairex/kernel_calculus.hpp"

#include <limits>
#include <string>
#include <vector>

namespace pairex {

// Orientation of the exchange term inside g.
// AsWritten: v(x-y) phi(x) conj(phi(y)).  Transposed: v(x-y) conj(phi(x)) phi(y), which is the
// orientation generated by conjugating the many-body Hamiltonian with e^{-B}.
enum class Exchange { AsWritten, Transposed };
enum class RConvention { Linear, Quadratic };

Exchange exchange_from_string(const std::string& s);
RConvention r_convention_from_string(const std::string& s);
const char* to_string(Exchange e);
const char* to_string(RConvention r);

struct CoefficientSet {
    Kernel g;
    Kernel m;
    Kernel w;
    // operator matrices of g and m, cached for the stepper
    CMat G;
    CMat M;
};

// -Delta as an operator matrix: spectral on periodic grids, second differences otherwise.
RMat minus_laplacian_op(const Grid& g);

CoefficientSet build_coefficients(const Field& phi, const Potential& v, const Grid& grid,
                                  Exchange ex = Exchange::AsWritten);

struct PairOptions {
    int n_quad = 128;
    RConvention r = RConvention::Linear;
    double blowup_cap = std::numeric_limits<double>::infinity();
};

// Nonlinear part of i u_t = -(g u + u g^T) + RHS.
Kernel rhs_seq3(const Kernel& u, const CoefficientSet& coef, const PairOptions& opt = {});
CMat rhs_seq3_op(const CMat& U, const CMat& M, const PairOptions& opt);

// u_t from the full equation.
Kernel u_dot_from_equation(const Kernel& u, const CoefficientSet& coef, const PairOptions& opt = {});

// Right side of the second equivalent form, with p_t taken by centered differences of
// sqrt(1 + q) along the q_dot induced by the seq3 flow.
Kernel rhs_seq2_fd(const Kernel& u, const CoefficientSet& coef, const PairOptions& opt = {},
                   double h = 1e-5);

struct PairState {
    Kernel u;
    double t = 0.0;
    double asymmetry = 0.0;
};

PairState pair_step(const PairState& s, const CoefficientSet& coef, double dt,
                    const PairOptions& opt = {});
// Same step with g and m frozen at the given operator matrices.
void pair_step_op(CMat& U, const CMat& G, const CMat& M, double dt, const PairOptions& opt,
                  double* asymmetry);

struct GronwallResult {
    double lhs = 0.0;
    double bound = 0.0;
};

GronwallResult gronwall_monitor(const std::vector<double>& t, const std::vector<double>& u_norms,
                                const std::vector<double>& m_norms);

struct IdentityResiduals {
    double lem = 0.0;
    double lem1 = 0.0;
    double seq1_vs_seq2 = 0.0;
    // trace of the condition-(3) kernel d, diagnostic only
    cd trace_d = 0.0;
};

IdentityResiduals identity_residuals(const Kernel& u, const CoefficientSet& coef,
                                     const Kernel& u_dot, const PairOptions& opt = {});

// tr[(1/i)(m ubar (1+p) - (1+p) u mbar)], the rate of ||u||_HS^2.
double trace_law_rate(const Kernel& u, const CoefficientSet& coef);

struct PairRunConfig {
    double dt = 0.01;
    double T = 1.0;
    int stride = 10;
    Exchange exchange = Exchange::AsWritten;
    PairOptions opt;
    bool residuals = true;
    bool gronwall_assert = true;
};

struct PairRow {
    double t = 0.0;
    double u_norm = 0.0;
    double m_norm = 0.0;
    double m_integral = 0.0;
    double gronwall_lhs = 0.0;
    double gronwall_bound = 0.0;
    double lem = 0.0;
    double lem1 = 0.0;
    double seq1_vs_seq2 = 0.0;
    double seq2_vs_seq3 = 0.0;
    double trace_formula = 0.0;
    double trace_defect = std::numeric_limits<double>::quiet_NaN();
    double asymmetry = 0.0;
    double trace_d = 0.0;
};

struct PairTrajectory {
    std::vector<PairRow> rows;
    std::vector<Field> phi;
    std::vector<Kernel> u;
};

// Couples the Hartree flow for phi with the pair flow for u. Samples every `stride` steps.
PairTrajectory run_pair(const Field& phi0, const Kernel& u0, const Potential& v,
                        const PairRunConfig& cfg);

// Random symmetric kernel with prescribed HS norm.
template <class Rng>
Kernel random_symmetric_kernel(const Grid& g, double hs, Rng& rng);

}  // namespace pairex

#include "pairex/random.hpp"

namespace pairex {

template <class Rng>
Kernel random_symmetric_kernel(const Grid& g, double hs, Rng& rng) {
    CMat a = random_complex_matrix(g.n, g.n, rng);
    CMat s = 0.5 * (a + a.transpose());
    Kernel k(g, s, Symmetry::Symmetric);
    double nrm = hs_norm(k);
    if (nrm > 0.0) k.entries *= hs / nrm;
    return k;
}

}  // namespace pairex
