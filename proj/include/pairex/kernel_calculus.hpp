#pragma once

#include "pairex/grid.hpp"

namespace pairex {

bool is_symmetric(const CMat& a, double rel_tol = 1e-12);
bool is_hermitian(const CMat& a, double rel_tol = 1e-12);

// Hermitian matrix function f applied through the eigendecomposition of op (dense).
template <class F>
CMat hermitian_function(const CMat& op, F f) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (op + op.adjoint()));
    const auto& w = es.eigenvalues();
    const auto& U = es.eigenvectors();
    CVec fw(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) fw(i) = f(w(i));
    return U * fw.asDiagonal() * U.adjoint();
}

Kernel sh_series(const Kernel& k);
Kernel ch_series(const Kernel& k);

// [[ch, sh], [conj(sh), conj(ch)]] as operator blocks, via the Hermitian block exponential
// of [[0, K], [conj(K), 0]]. Used directly for large kernels.
struct ShCh {
    CMat sh;
    CMat ch;
};
ShCh sh_ch_block(const CMat& k_op);

Kernel sqrt_one_plus_spectral(const Kernel& q);
Kernel sqrt_one_plus_contour(const Kernel& q, int n_quad = 128);
// Frechet derivative of sqrt(1 + .) at q applied to F, by two-sided resolvent quadrature.
Kernel resolvent_transform(const Kernel& q, const Kernel& F, int n_quad = 128);
Kernel inverse_sh(const Kernel& u);

// The circle used by the contour routines: center and radius.
struct Contour {
    double center;
    double radius;
};
Contour contour_for(double lambda_max);

// Operator-matrix versions used on hot paths (no Kernel wrapping).
CMat sqrt_one_plus_op(const CMat& q_op);
CMat sqrt_one_plus_contour_op(const CMat& q_op, int n_quad);
CMat resolvent_transform_op(const CMat& q_op, const CMat& F_op, int n_quad);

struct PairKernelSet {
    Kernel u;
    Kernel p;
    Kernel r_lin;   // (1+p)^{-1}
    Kernel r_quad;  // (1+u ubar)^{-1}
    Kernel q;       // u ubar
};
PairKernelSet pair_kernel_set(const Kernel& u);

}  // namespace pairex
