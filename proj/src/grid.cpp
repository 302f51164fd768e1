#include "pairex/grid.hpp"

#include <cmath>

namespace pairex {

void Grid::validate() const {
    if (n < 2) throw InputError("grid: n must be >= 2");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw InputError("grid: dx must be positive");
}

Grid Grid::centered(int n, double length, bool periodic) {
    Grid g;
    g.n = n;
    g.dx = length / n;
    g.x_min = -0.5 * length;
    g.periodic = periodic;
    g.validate();
    return g;
}

Field::Field(const Grid& g, CVec v) : grid(g), values(std::move(v)) {
    if (values.size() != g.n) throw InputError("field: size does not match grid");
}

double Field::norm() const { return std::sqrt(values.squaredNorm() * grid.dx); }

const char* to_string(Symmetry s) {
    switch (s) {
        case Symmetry::Symmetric: return "symmetric";
        case Symmetry::Hermitian: return "hermitian";
        default: return "general";
    }
}

Kernel::Kernel(const Grid& g, CMat e) : grid(g), entries(std::move(e)) {
    if (entries.rows() != g.n || entries.cols() != g.n)
        throw InputError("kernel: shape does not match grid");
    symmetry = detect(entries);
}

Kernel::Kernel(const Grid& g, CMat e, Symmetry s) : grid(g), entries(std::move(e)), symmetry(s) {
    if (entries.rows() != g.n || entries.cols() != g.n)
        throw InputError("kernel: shape does not match grid");
    check_tag();
}

Kernel Kernel::zero(const Grid& g) {
    return Kernel(g, CMat::Zero(g.n, g.n), Symmetry::Hermitian);
}

Kernel Kernel::identity(const Grid& g) {
    return Kernel(g, CMat::Identity(g.n, g.n) / g.dx, Symmetry::Hermitian);
}

Kernel Kernel::from_op(const Grid& g, const CMat& op) { return Kernel(g, op / g.dx); }

double Kernel::max_abs() const { return entries.size() ? entries.cwiseAbs().maxCoeff() : 0.0; }

Symmetry Kernel::detect(const CMat& e) {
    double scale = e.size() ? e.cwiseAbs().maxCoeff() : 0.0;
    double tol = 1e-12 * scale;
    // Real symmetric kernels are also hermitian; the hermitian tag wins since it is what
    // spectral routines need, and both properties are rechecked where they matter.
    double herm = (e - e.adjoint()).cwiseAbs().maxCoeff();
    if (herm <= tol) return Symmetry::Hermitian;
    double sym = (e - e.transpose()).cwiseAbs().maxCoeff();
    if (sym <= tol) return Symmetry::Symmetric;
    return Symmetry::General;
}

void Kernel::check_tag() const {
    double tol = 1e-12 * max_abs();
    if (symmetry == Symmetry::Symmetric &&
        (entries - entries.transpose()).cwiseAbs().maxCoeff() > tol)
        throw InputError("kernel tagged symmetric is not symmetric");
    if (symmetry == Symmetry::Hermitian &&
        (entries - entries.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw InputError("kernel tagged hermitian is not hermitian");
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b) throw InputError(std::string(where) + ": grid mismatch");
}

cd inner_product(const Field& f, const Field& g) {
    require_same_grid(f.grid, g.grid, "inner_product");
    // sum f_i conj(g_i) dx
    return g.values.dot(f.values) * f.grid.dx;
}

Kernel kernel_compose(const Kernel& a, const Kernel& b) {
    require_same_grid(a.grid, b.grid, "kernel_compose");
    return Kernel(a.grid, (a.entries * b.entries) * a.grid.dx);
}

double hs_norm(const Kernel& a) { return a.entries.norm() * a.grid.dx; }

double operator_norm(const Kernel& a) {
    Eigen::JacobiSVD<CMat> svd(a.op());
    return svd.singularValues()(0);
}

cd kernel_trace(const Kernel& a) { return a.entries.trace() * a.grid.dx; }

Kernel adjoint(const Kernel& a) {
    return Kernel(a.grid, a.entries.adjoint(), a.symmetry);
}

Kernel transpose(const Kernel& a) { return Kernel(a.grid, a.entries.transpose(), a.symmetry); }

Kernel conjugate(const Kernel& a) { return Kernel(a.grid, a.entries.conjugate(), a.symmetry); }

Kernel operator+(const Kernel& a, const Kernel& b) {
    require_same_grid(a.grid, b.grid, "kernel +");
    return Kernel(a.grid, a.entries + b.entries);
}

Kernel operator-(const Kernel& a, const Kernel& b) {
    require_same_grid(a.grid, b.grid, "kernel -");
    return Kernel(a.grid, a.entries - b.entries);
}

Kernel operator*(cd s, const Kernel& a) { return Kernel(a.grid, s * a.entries); }

PotentialKind potential_kind_from_string(const std::string& s) {
    if (s == "cutoff") return PotentialKind::Cutoff;
    if (s == "gaussian") return PotentialKind::Gaussian;
    if (s == "delta") return PotentialKind::Delta;
    if (s == "zero") return PotentialKind::Zero;
    throw InputError("unknown potential kind '" + s + "'");
}

const char* to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::Cutoff: return "cutoff";
        case PotentialKind::Gaussian: return "gaussian";
        case PotentialKind::Delta: return "delta";
        default: return "zero";
    }
}

double Potential::profile(double rr) const {
    const auto& p = params;
    switch (p.kind) {
        case PotentialKind::Cutoff: {
            double chi = std::exp(-(rr * rr) / (p.cutoff * p.cutoff));
            return p.strength * chi / (rr + p.eps);
        }
        case PotentialKind::Gaussian:
            return p.strength * std::exp(-(rr * rr) / (2.0 * p.cutoff * p.cutoff));
        case PotentialKind::Delta:
            return rr == 0.0 ? p.strength / grid.dx : 0.0;
        default: return 0.0;
    }
}

double Potential::dprofile(double rr) const {
    const auto& p = params;
    switch (p.kind) {
        case PotentialKind::Cutoff: {
            double R2 = p.cutoff * p.cutoff;
            double chi = std::exp(-(rr * rr) / R2);
            double dchi = -2.0 * rr / R2 * chi;
            double d = rr + p.eps;
            return p.strength * (dchi / d - chi / (d * d));
        }
        case PotentialKind::Gaussian:
            return -rr / (p.cutoff * p.cutoff) * profile(rr);
        default: return 0.0;
    }
}

Potential Potential::build(const Grid& g, const PotentialParams& p) {
    g.validate();
    if (p.kind == PotentialKind::Cutoff && (!(p.eps > 0.0) || !(p.cutoff > 0.0)))
        throw InputError("cutoff potential needs eps > 0 and cutoff > 0");
    if (p.kind == PotentialKind::Gaussian && !(p.cutoff > 0.0))
        throw InputError("gaussian potential needs a positive width (cutoff)");
    Potential pot;
    pot.grid = g;
    pot.params = p;
    pot.v.resize(g.n, g.n);
    pot.r.resize(g.n, g.n);
    pot.dv.resize(g.n, g.n);
    double L = g.length();
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            double d = std::abs(i - j) * g.dx;
            if (g.periodic) d = std::min(d, L - d);
            pot.r(i, j) = d;
            pot.v(i, j) = pot.profile(d);
            pot.dv(i, j) = pot.dprofile(d);
        }
    if (p.defocusing && pot.v.minCoeff() < 0.0)
        throw InputError("defocusing potential must be nonnegative");
    return pot;
}

RMat Potential::v_plus_rdv() const { return v + r.cwiseProduct(dv); }

}  // namespace pairex
