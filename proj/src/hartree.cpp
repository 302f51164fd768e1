#include "pairex/hartree.hpp"

#include <cmath>
#include <numbers>

namespace pairex {

Spectral::Spectral(const Grid& g) : grid_(g), xi_(g.n) {
    if (!g.periodic) throw InputError("spectral derivatives need a periodic grid");
    const double L = g.length();
    for (int k = 0; k < g.n; ++k) {
        int kk = (k <= g.n / 2) ? k : k - g.n;
        xi_(k) = 2.0 * std::numbers::pi * kk / L;
    }
}

CVec Spectral::apply(const CVec& f, const CVec& mult) const {
    std::vector<cd> in(f.data(), f.data() + f.size()), hat, out;
    fft_.fwd(hat, in);
    for (int k = 0; k < grid_.n; ++k) hat[k] *= mult(k);
    fft_.inv(out, hat);
    return Eigen::Map<CVec>(out.data(), grid_.n);
}

CVec Spectral::gradient(const CVec& f) const {
    CVec m(grid_.n);
    for (int k = 0; k < grid_.n; ++k) m(k) = cd(0.0, xi_(k));
    // the Nyquist mode has no consistent odd derivative
    if (grid_.n % 2 == 0) m(grid_.n / 2) = 0.0;
    return apply(f, m);
}

CVec Spectral::laplacian(const CVec& f) const {
    CVec m(grid_.n);
    for (int k = 0; k < grid_.n; ++k) m(k) = -xi_(k) * xi_(k);
    return apply(f, m);
}

RMat Spectral::minus_laplacian_matrix() const {
    const int n = grid_.n;
    RMat L(n, n);
    CVec m(n);
    for (int k = 0; k < n; ++k) m(k) = xi_(k) * xi_(k);
    for (int j = 0; j < n; ++j) {
        CVec e = CVec::Zero(n);
        e(j) = 1.0;
        L.col(j) = apply(e, m).real();
    }
    return 0.5 * (L + L.transpose());
}

Field gaussian_field(const Grid& g, double x0, double s, double v0) {
    CVec f(g.n);
    for (int i = 0; i < g.n; ++i) {
        double x = g.x(i);
        f(i) = std::exp(-(x - x0) * (x - x0) / (2.0 * s * s)) * std::polar(1.0, v0 * x);
    }
    Field phi(g, f);
    double nrm = phi.norm();
    if (nrm == 0.0) throw InputError("gaussian_field: zero norm on this grid");
    phi.values /= nrm;
    return phi;
}

RVec convolve_potential_real(const CVec& phi, const Potential& v) {
    return (v.v * phi.cwiseAbs2()) * v.grid.dx;
}

Field convolve_potential(const Field& phi, const Potential& v) {
    require_same_grid(phi.grid, v.grid, "convolve_potential");
    return Field(phi.grid, convolve_potential_real(phi.values, v).cast<cd>());
}

HartreeStepper::HartreeStepper(const Potential& v, double dt) : v_(v), dt_(dt), spec_(v.grid) {
    if (!(dt > 0.0)) throw InputError("hartree_step: dt must be positive");
    kinetic_.resize(v.grid.n);
    for (int k = 0; k < v.grid.n; ++k)
        kinetic_(k) = std::polar(1.0, -spec_.xi()(k) * spec_.xi()(k) * dt);
}

void HartreeStepper::step(HartreeState& s) const {
    CVec& f = s.phi.values;
    RVec W = convolve_potential_real(f, v_);
    for (int i = 0; i < f.size(); ++i) f(i) *= std::polar(1.0, -0.5 * dt_ * W(i));
    f = spec_.apply(f, kinetic_);
    W = convolve_potential_real(f, v_);
    for (int i = 0; i < f.size(); ++i) f(i) *= std::polar(1.0, -0.5 * dt_ * W(i));
    s.t += dt_;
}

HartreeState hartree_step(const HartreeState& s, const Potential& v, double dt) {
    require_same_grid(s.phi.grid, v.grid, "hartree_step");
    HartreeStepper st(v, dt);
    HartreeState out = s;
    st.step(out);
    return out;
}

DensitySet densities(const HartreeState& s, const Potential& v) {
    require_same_grid(s.phi.grid, v.grid, "densities");
    Spectral sp(s.phi.grid);
    const CVec& f = s.phi.values;
    CVec df = sp.gradient(f);
    CVec lf = sp.laplacian(f);
    DensitySet d;
    d.W = convolve_potential_real(f, v);
    d.rho = 0.5 * f.cwiseAbs2();
    d.p = -(f.conjugate().cwiseProduct(df)).imag();
    d.sigma = 2.0 * df.cwiseAbs2();
    d.e = 0.5 * d.sigma + d.W.cwiseProduct(d.rho);
    // phi_t from the equation
    CVec ft = cd(0.0, 1.0) * (lf - d.W.cast<cd>().cwiseProduct(f));
    RVec p0(f.size());
    for (int i = 0; i < f.size(); ++i)
        p0(i) = ((f(i) * std::conj(ft(i)) - std::conj(f(i)) * ft(i)) / cd(0.0, 2.0)).real();
    d.lambda = -p0 + 0.5 * d.sigma + d.W.cwiseProduct(d.rho);
    return d;
}

double structure_residual(const HartreeState& s, const Potential& v) {
    DensitySet d = densities(s, v);
    Spectral sp(s.phi.grid);
    RVec lap_rho = sp.laplacian(d.rho.cast<cd>()).real();
    RVec res = d.lambda - lap_rho + d.W.cwiseProduct(d.rho);
    return res.cwiseAbs().sum() * s.phi.grid.dx;
}

Conserved conserved_quantities(const HartreeState& s, const Potential& v) {
    DensitySet d = densities(s, v);
    const double dx = s.phi.grid.dx;
    return {2.0 * d.rho.sum() * dx, d.e.sum() * dx, d.p.sum() * dx};
}

namespace {

double pair_integral(const RMat& kernel, const RVec& rho, double dx) {
    return rho.dot(kernel * rho) * dx * dx;
}

}  // namespace

ConformalSet pseudoconformal(const HartreeState& s, const Potential& v) {
    DensitySet d = densities(s, v);
    const Grid& g = s.phi.grid;
    const double t = s.t, dx = g.dx;
    Spectral sp(g);
    const CVec& f = s.phi.values;
    CVec df = sp.gradient(f);
    ConformalSet c;
    double alg = 0.0, grad_part = 0.0;
    for (int i = 0; i < g.n; ++i) {
        double x = g.x(i);
        alg += 0.5 * x * x * d.rho(i) + t * x * d.p(i) + t * t * d.e(i);
        if (t > 0.0) {
            cd gchirp = df(i) - cd(0.0, x / (2.0 * t)) * f(i);
            grad_part += std::norm(gchirp);
        }
    }
    c.E_c = alg * dx;
    double wrho = d.W.dot(d.rho) * dx;
    if (t > 0.0) {
        c.E_c_gradient = t * t * (grad_part * dx + wrho);
    } else {
        // t -> 0 limit of t^2 |grad(e^{-ix^2/4t} phi)|^2 is |x|^2 |phi|^2 / 4
        double lim = 0.0;
        for (int i = 0; i < g.n; ++i) lim += 0.25 * g.x(i) * g.x(i) * std::norm(f(i));
        c.E_c_gradient = lim * dx;
    }
    RMat kern = -4.0 * v.v - 2.0 * v.r.cwiseProduct(v.dv);
    c.R_c = t * pair_integral(kern, d.rho, dx);
    if (t > 0.0) {
        c.E_cc = c.E_c / t;
        c.R_cc = grad_part * dx - 2.0 * pair_integral(v.v_plus_rdv(), d.rho, dx);
    }
    return c;
}

ConformalSet conformal_quantities(const HartreeState& s, const Potential& v) {
    if (!(s.t > 0.0)) throw InputError("conformal_quantities: E_cc needs t > 0");
    return pseudoconformal(s, v);
}

DecayNorms decay_norms(const HartreeState& s) {
    const RVec a2 = s.phi.values.cwiseAbs2();
    const double dx = s.phi.grid.dx;
    double s4 = 0.0, s6 = 0.0;
    for (Eigen::Index i = 0; i < a2.size(); ++i) {
        s4 += a2(i) * a2(i);
        s6 += a2(i) * a2(i) * a2(i);
    }
    return {std::pow(s4 * dx, 0.25), std::pow(s6 * dx, 1.0 / 6.0)};
}

std::vector<HartreeRow> run_hartree(const HartreeState& s0, const Potential& v, double dt,
                                    double T, int stride) {
    if (stride < 1) throw InputError("run_hartree: stride must be >= 1");
    HartreeStepper st(v, dt);
    HartreeState s = s0;
    const long steps = std::lround(T / dt);
    std::vector<HartreeRow> rows;
    auto sample = [&]() {
        HartreeRow r;
        r.t = s.t;
        r.c = conserved_quantities(s, v);
        r.conf = pseudoconformal(s, v);
        r.d = decay_norms(s);
        r.has_cc = s.t > 0.0;
        rows.push_back(r);
    };
    sample();
    for (long k = 1; k <= steps; ++k) {
        st.step(s);
        // keep t on the lattice k*dt so repeated runs agree bit for bit
        s.t = s0.t + k * dt;
        if (k % stride == 0) sample();
    }
    return rows;
}

}  // namespace pairex
