#include "pairex/pair.hpp"

#include <cmath>

namespace pairex {

Exchange exchange_from_string(const std::string& s) {
    if (s == "as_written") return Exchange::AsWritten;
    if (s == "transposed") return Exchange::Transposed;
    throw InputError("unknown exchange orientation '" + s + "'");
}

RConvention r_convention_from_string(const std::string& s) {
    if (s == "linear") return RConvention::Linear;
    if (s == "quadratic") return RConvention::Quadratic;
    throw InputError("unknown r convention '" + s + "'");
}

const char* to_string(Exchange e) { return e == Exchange::AsWritten ? "as_written" : "transposed"; }
const char* to_string(RConvention r) { return r == RConvention::Linear ? "linear" : "quadratic"; }

RMat minus_laplacian_op(const Grid& g) {
    if (g.periodic) return Spectral(g).minus_laplacian_matrix();
    RMat L = RMat::Zero(g.n, g.n);
    const double h2 = g.dx * g.dx;
    for (int i = 0; i < g.n; ++i) {
        L(i, i) = 2.0 / h2;
        if (i > 0) L(i, i - 1) = -1.0 / h2;
        if (i + 1 < g.n) L(i, i + 1) = -1.0 / h2;
    }
    return L;
}

CoefficientSet build_coefficients(const Field& phi, const Potential& v, const Grid& grid,
                                  Exchange ex) {
    require_same_grid(phi.grid, grid, "build_coefficients");
    require_same_grid(v.grid, grid, "build_coefficients");
    const int n = grid.n;
    const double dx = grid.dx;
    const CVec& f = phi.values;
    CMat w(n, n), m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double vij = v.v(i, j);
            w(i, j) = ex == Exchange::AsWritten ? vij * f(i) * std::conj(f(j))
                                                : vij * std::conj(f(i)) * f(j);
            m(i, j) = -vij * std::conj(f(i)) * std::conj(f(j));
        }
    RVec W = convolve_potential_real(f, v);
    CMat g = minus_laplacian_op(grid).cast<cd>() / dx + w;
    for (int i = 0; i < n; ++i) g(i, i) += W(i) / dx;
    CoefficientSet c;
    c.g = Kernel(grid, 0.5 * (g + g.adjoint()), Symmetry::Hermitian);
    c.m = Kernel(grid, 0.5 * (m + m.transpose()), Symmetry::Symmetric);
    c.w = Kernel(grid, w, Symmetry::Hermitian);
    c.G = c.g.op();
    c.M = c.m.op();
    return c;
}

namespace {

struct PairPieces {
    CMat Q, onep, r, F;
};

PairPieces pieces(const CMat& U, const CMat& M, RConvention rc) {
    const Eigen::Index n = U.rows();
    const CMat I = CMat::Identity(n, n);
    PairPieces p;
    p.Q = U * U.conjugate();
    p.onep = sqrt_one_plus_op(p.Q);
    p.r = rc == RConvention::Linear ? CMat(p.onep.inverse()) : CMat((I + p.Q).inverse());
    p.F = M * U.conjugate() * p.onep - p.onep * U * M.conjugate();
    return p;
}

CMat assemble_seq2(const PairPieces& p, const CMat& U, const CMat& M, const CMat& Wp) {
    return p.onep * M + 0.5 * (Wp * p.r - p.r * Wp) * U +
           0.5 * (p.r * M * U.conjugate() + U * M.conjugate() * p.r) * U;
}

}  // namespace

CMat rhs_seq3_op(const CMat& U, const CMat& M, const PairOptions& opt) {
    PairPieces p = pieces(U, M, opt.r);
    CMat W = resolvent_transform_op(p.Q, p.F, opt.n_quad);
    return assemble_seq2(p, U, M, W);
}

Kernel rhs_seq3(const Kernel& u, const CoefficientSet& coef, const PairOptions& opt) {
    require_same_grid(u.grid, coef.g.grid, "rhs_seq3");
    if (!is_symmetric(u.entries, 1e-10)) throw InputError("rhs_seq3: u must be symmetric");
    return Kernel::from_op(u.grid, rhs_seq3_op(u.op(), coef.M, opt));
}

namespace {

CMat u_dot_op(const CMat& U, const CMat& G, const CMat& M, const PairOptions& opt) {
    const cd I(0.0, 1.0);
    return -I * (-(G * U + U * G.transpose()) + rhs_seq3_op(U, M, opt));
}

}  // namespace

Kernel u_dot_from_equation(const Kernel& u, const CoefficientSet& coef, const PairOptions& opt) {
    return Kernel::from_op(u.grid, u_dot_op(u.op(), coef.G, coef.M, opt));
}

Kernel rhs_seq2_fd(const Kernel& u, const CoefficientSet& coef, const PairOptions& opt, double h) {
    const CMat U = u.op();
    const CMat Ud = u_dot_op(U, coef.G, coef.M, opt);
    PairPieces p = pieces(U, coef.M, opt.r);
    const CMat Qd = Ud * U.conjugate() + U * Ud.conjugate();
    const CMat pt = (sqrt_one_plus_op(p.Q + h * Qd) - sqrt_one_plus_op(p.Q - h * Qd)) / (2.0 * h);
    const CMat Wp = cd(0.0, 1.0) * pt + coef.G * p.onep - p.onep * coef.G;
    return Kernel::from_op(u.grid, assemble_seq2(p, U, coef.M, Wp));
}

void pair_step_op(CMat& U, const CMat& G, const CMat& M, double dt, const PairOptions& opt,
                  double* asymmetry) {
    if (!(dt > 0.0)) throw InputError("pair_step: dt must be positive");
    const CMat E = hermitian_function(G, [&](double w) { return std::polar(1.0, 0.5 * dt * w); });
    const cd I(0.0, 1.0);
    U = E * U * E.transpose();
    CMat Umid = U - (0.5 * dt) * I * rhs_seq3_op(U, M, opt);
    Umid = 0.5 * (Umid + Umid.transpose().eval());
    U = U - dt * I * rhs_seq3_op(Umid, M, opt);
    U = E * U * E.transpose();
    double asym = (U - U.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry) *asymmetry = asym;
    U = 0.5 * (U + U.transpose().eval());
    double nrm = U.norm();
    if (!std::isfinite(nrm) || nrm > opt.blowup_cap)
        throw NumericError("pair_step: ||u||_HS = " + std::to_string(nrm) + " exceeds the cap");
}

PairState pair_step(const PairState& s, const CoefficientSet& coef, double dt,
                    const PairOptions& opt) {
    require_same_grid(s.u.grid, coef.g.grid, "pair_step");
    CMat U = s.u.op();
    PairState out;
    pair_step_op(U, coef.G, coef.M, dt, opt, &out.asymmetry);
    out.u = Kernel(s.u.grid, U / s.u.grid.dx, Symmetry::Symmetric);
    out.t = s.t + dt;
    return out;
}

GronwallResult gronwall_monitor(const std::vector<double>& t, const std::vector<double>& u_norms,
                                const std::vector<double>& m_norms) {
    if (t.size() != u_norms.size() || t.size() != m_norms.size() || t.empty())
        throw InputError("gronwall_monitor: series must be aligned and nonempty");
    double I = 0.0;
    for (size_t k = 1; k < t.size(); ++k) I += 0.5 * (m_norms[k] + m_norms[k - 1]) * (t[k] - t[k - 1]);
    return {u_norms.back(), (I + u_norms.front()) * std::exp(I)};
}

IdentityResiduals identity_residuals(const Kernel& u, const CoefficientSet& coef,
                                     const Kernel& u_dot, const PairOptions& opt) {
    const CMat U = u.op();
    const CMat Ud = u_dot.op();
    const CMat& G = coef.G;
    const CMat& M = coef.M;
    PairPieces lin = pieces(U, M, RConvention::Linear);
    PairPieces p = opt.r == RConvention::Linear ? lin : pieces(U, M, opt.r);
    const cd I(0.0, 1.0);
    const CMat Qd = Ud * U.conjugate() + U * Ud.conjugate();
    const CMat pt = resolvent_transform_op(lin.Q, Qd, opt.n_quad);
    const CMat Wp = I * pt + G * lin.onep - lin.onep * G;
    const CMat Wq = I * Qd + G * lin.Q - lin.Q * G;
    IdentityResiduals res;
    const CMat& r = p.r;
    res.lem = ((Wp + U * M.conjugate()) * r + r * (Wp - M * U.conjugate())).norm();
    res.lem1 = (Wq - lin.F).norm();
    CMat rhs1 = lin.onep * M + (Wp + U * M.conjugate()) * lin.r * U;
    CMat rhs2 = assemble_seq2(p, U, M, Wp);
    res.seq1_vs_seq2 = (rhs1 - rhs2).norm();
    CMat d = (I * Ud + U * G.transpose() + G * U) * U.conjugate() - Wp * lin.onep -
             U * M.conjugate() * lin.onep - lin.onep * M * U.conjugate();
    res.trace_d = d.trace();
    return res;
}

double trace_law_rate(const Kernel& u, const CoefficientSet& coef) {
    PairPieces p = pieces(u.op(), coef.M, RConvention::Linear);
    return (p.F.trace() / cd(0.0, 1.0)).real();
}

PairTrajectory run_pair(const Field& phi0, const Kernel& u0, const Potential& v,
                        const PairRunConfig& cfg) {
    const Grid& grid = phi0.grid;
    require_same_grid(grid, u0.grid, "run_pair");
    if (cfg.stride < 1) throw InputError("run_pair: stride must be >= 1");
    HartreeStepper full(v, cfg.dt), half(v, 0.5 * cfg.dt);
    HartreeState hs{phi0, 0.0};
    CMat U = u0.op();
    const long steps = std::lround(cfg.T / cfg.dt);
    const double u0n = U.norm();

    std::vector<double> n2(steps + 1);
    std::vector<long> sampled;
    PairTrajectory out;
    double m_int = 0.0;
    CoefficientSet c = build_coefficients(hs.phi, v, grid, cfg.exchange);
    double m_prev = c.M.norm();
    double asym = 0.0;

    auto sample = [&](long k) {
        PairRow r;
        r.t = k * cfg.dt;
        r.u_norm = U.norm();
        r.m_norm = c.M.norm();
        r.m_integral = m_int;
        r.gronwall_lhs = r.u_norm;
        r.gronwall_bound = (m_int + u0n) * std::exp(m_int);
        r.asymmetry = asym;
        Kernel uk(grid, U / grid.dx, Symmetry::Symmetric);
        r.trace_formula = trace_law_rate(uk, c);
        if (cfg.residuals) {
            Kernel ud = u_dot_from_equation(uk, c, cfg.opt);
            IdentityResiduals ir = identity_residuals(uk, c, ud, cfg.opt);
            r.lem = ir.lem;
            r.lem1 = ir.lem1;
            r.seq1_vs_seq2 = ir.seq1_vs_seq2;
            r.trace_d = ir.trace_d.real();
            r.seq2_vs_seq3 = hs_norm(rhs_seq2_fd(uk, c, cfg.opt) - rhs_seq3(uk, c, cfg.opt));
        }
        if (cfg.gronwall_assert && r.gronwall_lhs > r.gronwall_bound * (1.0 + 1e-6) + 1e-300)
            throw NumericError("a priori bound violated at t = " + std::to_string(r.t));
        out.rows.push_back(r);
        out.phi.push_back(hs.phi);
        out.u.push_back(uk);
        sampled.push_back(k);
    };

    n2[0] = U.squaredNorm();
    sample(0);
    for (long k = 1; k <= steps; ++k) {
        HartreeState mid = hs;
        half.step(mid);
        CoefficientSet cm = build_coefficients(mid.phi, v, grid, cfg.exchange);
        pair_step_op(U, cm.G, cm.M, cfg.dt, cfg.opt, &asym);
        full.step(hs);
        hs.t = k * cfg.dt;
        c = build_coefficients(hs.phi, v, grid, cfg.exchange);
        double m_now = c.M.norm();
        m_int += 0.5 * (m_prev + m_now) * cfg.dt;
        m_prev = m_now;
        n2[k] = U.squaredNorm();
        double bound = (m_int + u0n) * std::exp(m_int);
        if (std::sqrt(n2[k]) > 10.0 * bound + 1e-12)
            throw NumericError("blow-up guard: ||u|| above 10x the a priori bound");
        if (k % cfg.stride == 0) sample(k);
    }
    for (size_t i = 0; i < sampled.size(); ++i) {
        long k = sampled[i];
        if (k == 0 || k == steps) continue;
        double rate = (n2[k + 1] - n2[k - 1]) / (2.0 * cfg.dt);
        out.rows[i].trace_defect = std::abs(rate - out.rows[i].trace_formula);
    }
    return out;
}

}  // namespace pairex
