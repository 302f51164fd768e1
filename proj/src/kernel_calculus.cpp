#include "pairex/kernel_calculus.hpp"

#include <cmath>
#include <numbers>

namespace pairex {

namespace {

constexpr double kSeriesTol = 1e-14;
constexpr int kSeriesMaxTerms = 60;
constexpr double kSeriesMaxNorm = 3.0;
constexpr double kPsdFail = -1e-8;

void require_symmetric(const Kernel& k, const char* where) {
    if (!is_symmetric(k.entries, 1e-12))
        throw InputError(std::string(where) + ": kernel must be symmetric");
}

void require_hermitian(const Kernel& k, const char* where) {
    if (!is_hermitian(k.entries, 1e-10))
        throw InputError(std::string(where) + ": kernel must be hermitian");
}

double lambda_range(const CMat& q_op, double* lmin) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (q_op + q_op.adjoint()), Eigen::EigenvaluesOnly);
    *lmin = es.eigenvalues()(0);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace

bool is_symmetric(const CMat& a, double rel_tol) {
    double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * std::max(scale, 1e-300);
}

bool is_hermitian(const CMat& a, double rel_tol) {
    double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * std::max(scale, 1e-300);
}

ShCh sh_ch_block(const CMat& K) {
    const Eigen::Index n = K.rows();
    CMat X = CMat::Zero(2 * n, 2 * n);
    X.topRightCorner(n, n) = K;
    X.bottomLeftCorner(n, n) = K.conjugate();
    CMat E = hermitian_function(X, [](double w) { return cd(std::exp(w), 0.0); });
    return {E.topRightCorner(n, n), E.topLeftCorner(n, n)};
}

Kernel sh_series(const Kernel& k) {
    require_symmetric(k, "sh_series");
    const CMat K = k.op();
    const double knorm = K.norm();
    CMat out;
    if (knorm > kSeriesMaxNorm) {
        out = sh_ch_block(K).sh;
    } else {
        CMat KbK = K.conjugate() * K;
        CMat term = K;
        out = K;
        for (int j = 1; j < kSeriesMaxTerms; ++j) {
            term = term * KbK / double((2 * j) * (2 * j + 1));
            out += term;
            if (term.norm() < kSeriesTol * std::max(knorm, 1e-300)) break;
        }
    }
    out = 0.5 * (out + out.transpose().eval());
    return Kernel(k.grid, out / k.grid.dx, Symmetry::Symmetric);
}

Kernel ch_series(const Kernel& k) {
    require_symmetric(k, "ch_series");
    const CMat K = k.op();
    const double knorm = K.norm();
    const Eigen::Index n = K.rows();
    CMat out;
    if (knorm > kSeriesMaxNorm) {
        out = sh_ch_block(K).ch;
    } else {
        CMat KKb = K * K.conjugate();
        CMat term = CMat::Identity(n, n);
        out = term;
        for (int j = 1; j < kSeriesMaxTerms; ++j) {
            term = term * KKb / double((2 * j - 1) * (2 * j));
            out += term;
            if (term.norm() < kSeriesTol * std::max(knorm, 1e-300)) break;
        }
    }
    out = 0.5 * (out + out.adjoint().eval());
    return Kernel(k.grid, out / k.grid.dx, Symmetry::Hermitian);
}

CMat sqrt_one_plus_op(const CMat& q_op) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (q_op + q_op.adjoint()));
    const auto& w = es.eigenvalues();
    if (w.size() && w(0) < kPsdFail)
        throw NumericError("sqrt_one_plus: q has eigenvalue " + std::to_string(w(0)) + " < -1e-8");
    CVec f(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) f(i) = std::sqrt(1.0 + std::max(w(i), 0.0));
    const auto& U = es.eigenvectors();
    return U * f.asDiagonal() * U.adjoint();
}

Kernel sqrt_one_plus_spectral(const Kernel& q) {
    require_hermitian(q, "sqrt_one_plus_spectral");
    CMat s = sqrt_one_plus_op(q.op());
    return Kernel(q.grid, 0.5 * (s + s.adjoint()) / q.grid.dx, Symmetry::Hermitian);
}

Contour contour_for(double lambda_max) {
    double c = 0.5 * std::max(lambda_max, 0.0);
    double r_in = c + 1e-3;
    double r_out = c + 1.0;
    return {c, std::sqrt(r_in * r_out)};
}

CMat sqrt_one_plus_contour_op(const CMat& q_op, int n_quad) {
    if (n_quad < 2) throw InputError("contour: n_quad must be >= 2");
    double lmin = 0.0;
    double lmax = lambda_range(q_op, &lmin);
    if (lmin < kPsdFail) throw NumericError("contour: q is not positive semidefinite");
    Contour ct = contour_for(lmax);
    if (ct.center - ct.radius <= -1.0 || ct.radius <= lmax - ct.center)
        throw NumericError("contour touches the spectrum or the branch point");
    const Eigen::Index n = q_op.rows();
    const CMat I = CMat::Identity(n, n);
    CMat acc = CMat::Zero(n, n);
    for (int j = 0; j < n_quad; ++j) {
        double th = 2.0 * std::numbers::pi * j / n_quad;
        cd e = std::polar(ct.radius, th);
        cd z = ct.center + e;
        Eigen::PartialPivLU<CMat> lu(z * I - q_op);
        acc += (e * std::sqrt(1.0 + z)) * lu.solve(I);
    }
    return acc / double(n_quad);
}

Kernel sqrt_one_plus_contour(const Kernel& q, int n_quad) {
    require_hermitian(q, "sqrt_one_plus_contour");
    return Kernel::from_op(q.grid, sqrt_one_plus_contour_op(q.op(), n_quad));
}

CMat resolvent_transform_op(const CMat& q_op, const CMat& F_op, int n_quad) {
    if (n_quad < 2) throw InputError("resolvent: n_quad must be >= 2");
    double lmin = 0.0;
    double lmax = lambda_range(q_op, &lmin);
    if (lmin < kPsdFail) throw NumericError("resolvent: q is not positive semidefinite");
    Contour ct = contour_for(lmax);
    const Eigen::Index n = q_op.rows();
    const CMat I = CMat::Identity(n, n);
    CMat acc = CMat::Zero(n, n);
    for (int j = 0; j < n_quad; ++j) {
        double th = 2.0 * std::numbers::pi * j / n_quad;
        cd e = std::polar(ct.radius, th);
        cd z = ct.center + e;
        Eigen::PartialPivLU<CMat> lu(z * I - q_op);
        CMat R = lu.solve(I);
        acc += (e * std::sqrt(1.0 + z)) * (R * F_op * R);
    }
    return acc / double(n_quad);
}

Kernel resolvent_transform(const Kernel& q, const Kernel& F, int n_quad) {
    require_hermitian(q, "resolvent_transform");
    require_same_grid(q.grid, F.grid, "resolvent_transform");
    return Kernel::from_op(q.grid, resolvent_transform_op(q.op(), F.op(), n_quad));
}

Kernel inverse_sh(const Kernel& u) {
    require_symmetric(u, "inverse_sh");
    const CMat U = u.op();
    const Eigen::Index n = U.rows();
    CMat S = sqrt_one_plus_op(U * U.conjugate());
    CMat P(2 * n, 2 * n);
    P << S, U, U.conjugate(), S.conjugate();
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (P + P.adjoint()));
    const auto& w = es.eigenvalues();
    if (w(0) <= 0.0) throw NumericError("inverse_sh: block matrix is not positive definite");
    CVec lw(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) lw(i) = std::log(w(i));
    CMat X = es.eigenvectors() * lw.asDiagonal() * es.eigenvectors().adjoint();
    double diag = X.topLeftCorner(n, n).norm();
    if (diag > 1e-9 * std::max(1.0, X.norm()))
        throw NumericError("inverse_sh: diagonal block of log P does not vanish (" +
                           std::to_string(diag) + ")");
    CMat K = X.topRightCorner(n, n);
    K = 0.5 * (K + K.transpose().eval());
    Kernel k(u.grid, K / u.grid.dx, Symmetry::Symmetric);
    double res = hs_norm(sh_series(k) - u);
    if (res > 1e-8) throw NumericError("inverse_sh: reconstruction residual " + std::to_string(res));
    return k;
}

PairKernelSet pair_kernel_set(const Kernel& u) {
    require_symmetric(u, "pair_kernel_set");
    const CMat U = u.op();
    const Eigen::Index n = U.rows();
    const CMat Q = U * U.conjugate();
    const CMat onep = sqrt_one_plus_op(Q);
    const CMat I = CMat::Identity(n, n);
    auto herm = [&](const CMat& x) {
        return Kernel(u.grid, 0.5 * (x + x.adjoint()) / u.grid.dx, Symmetry::Hermitian);
    };
    PairKernelSet s;
    s.u = u;
    s.q = herm(Q);
    s.p = herm(onep - I);
    s.r_lin = herm(onep.inverse());
    s.r_quad = herm((I + Q).inverse());
    return s;
}

}  // namespace pairex
