#include "pairex/cubic.hpp"

#include "pairex/kernel_calculus.hpp"

#include <cmath>
#include <cstdio>

namespace pairex::fock {

double CubicClosedForm::norm() const {
    double s1 = slot1.squaredNorm() * dx;
    double s3 = 0.0;
    for (const cd& c : slot3) s3 += std::norm(c);
    return std::sqrt(s1 + s3 * dx * dx * dx);
}

CubicClosedForm cubic_error_closed_form(const Field& phi, const Kernel& k, const Potential& v,
                                        const CubicOptions& opt) {
    require_same_grid(phi.grid, k.grid, "cubic_error_closed_form");
    require_same_grid(phi.grid, v.grid, "cubic_error_closed_form");
    const int n = phi.grid.n;
    const double dx = phi.grid.dx;
    const CMat S = sh_series(k).entries;
    const CMat C = ch_series(k).entries;
    const CMat Sb = S.conjugate(), Cb = C.conjugate();
    const CMat V = v.v.cast<cd>();
    const CVec f = phi.values, fb = phi.values.conjugate();
    const CVec f2 = opt.printed_conjugation ? fb : f;

    CubicClosedForm out;
    out.n = n;
    out.dx = dx;
    const size_t n3 = size_t(n) * n * n;
    out.psi_I.assign(n3, 0.0);
    out.psi_Ip.assign(n3, 0.0);

    // T1(x, z3) = sum_y V(x,y) phibar(y) Sbar(z3,y) dx
    const CMat T1 = dx * V * fb.asDiagonal() * Sb.transpose();
    // T2(x, z2) = sum_y V(x,y) phi(y) Cbar(z2,y) dx
    const CMat T2 = dx * V * f.asDiagonal() * Cb.transpose();
    for (int z1 = 0; z1 < n; ++z1)
        for (int z2 = 0; z2 < n; ++z2)
            for (int z3 = 0; z3 < n; ++z3) {
                cd a = 0.0, b = 0.0;
                for (int x = 0; x < n; ++x) {
                    a += Cb(z1, x) * Sb(z2, x) * T1(x, z3);
                    b += Cb(z1, x) * Sb(z3, x) * T2(x, z2);
                }
                size_t id = (size_t(z1) * n + z2) * n + z3;
                out.psi_I[id] = a * dx;
                out.psi_Ip[id] = b * dx;
            }

    // column sums over the contracted variable
    const CMat P1 = dx * S.transpose() * Sb;   // (x,y): sum_z S(z,x) Sbar(z,y)
    const CMat P3 = dx * C.transpose() * Sb;   // sum_z C(z,x) Sbar(z,y)
    const CMat P4 = dx * S.transpose() * Cb;   // sum_z S(z,x) Cbar(z,y)
    const CMat P5 = dx * Sb.transpose() * S;   // sum_z Sbar(z,x) S(z,y)
    CVec dsum(n);
    for (int x = 0; x < n; ++x) dsum(x) = dx * S.col(x).squaredNorm();

    auto contract = [&](const CMat& P, const CVec& w) {
        // h(x) = sum_y V(x,y) w(y) P(x,y)
        CVec h(n);
        for (int x = 0; x < n; ++x) {
            cd s = 0.0;
            for (int y = 0; y < n; ++y) s += V(x, y) * w(y) * P(x, y);
            h(x) = s;
        }
        return h;
    };
    const double dx2 = dx * dx;
    // sum_{x,y} V(x,y) w(y) d(x) K(z,y)
    auto outer_term = [&](const CVec& w, const CMat& K) {
        CVec vw = V.transpose() * dsum;  // (y): sum_x V(x,y) d(x)
        return CVec(dx2 * K * vw.cwiseProduct(w));
    };
    out.psi_II = dx2 * Sb * contract(P1, fb) + outer_term(fb, Sb);
    out.psi_III = dx2 * Cb * contract(P3, fb);
    out.psi_IIp = dx2 * Sb * contract(P4, f2) + outer_term(f2, Cb);
    out.psi_IIIp = dx2 * Cb * contract(P5, f2);

    out.slot1 = out.psi_II + out.psi_III + out.psi_IIp + out.psi_IIIp;
    out.slot3.assign(n3, 0.0);
    const double norm6 = std::sqrt(6.0) / 6.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c},
                                        {b, c, a}, {c, a, b}, {c, b, a}};
                cd s = 0.0;
                for (const auto& p : perm) {
                    size_t id = (size_t(p[0]) * n + p[1]) * n + p[2];
                    s += out.psi_I[id] + out.psi_Ip[id];
                }
                out.slot3[(size_t(a) * n + b) * n + c] = norm6 * s;
            }
    return out;
}

namespace {

struct OracleSetup {
    BasisPtr padded;
    Ladder L;
    SpMat A, V, B;
    CVec chi;  // e^{-B} Omega
    double top_weight = 0.0;
};

OracleSetup setup_oracle(const Field& phi, const Kernel& k, const Potential& v,
                         const BasisPtr& basis, int headroom) {
    require_same_grid(phi.grid, k.grid, "oracle");
    require_same_grid(phi.grid, v.grid, "oracle");
    if (basis->modes() != phi.grid.n) throw InputError("oracle: modes must equal grid points");
    OracleSetup s;
    s.padded = std::make_shared<FockBasis>(basis->modes(), basis->cutoff() + headroom);
    s.L = build_ladder(s.padded);
    ModeMap mm(phi.grid);
    s.A = A_of(s.L, mm.modes_from_field(phi));
    s.V = interaction(s.L, v.v);
    s.B = build_quadratic(s.L, mm.mode_matrix(k));
    CVec vac = CVec::Zero(s.padded->size());
    vac(0) = 1.0;
    s.chi = expv(SpMat(-s.B), vac);
    const FockBasis& pb = *s.padded;
    double w2 = 0.0;
    slot_norm_count(pb, s.chi, pb.cutoff(), &w2);
    double w1 = 0.0;
    if (pb.cutoff() >= 1) slot_norm_count(pb, s.chi, pb.cutoff() - 1, &w1);
    s.top_weight = std::sqrt(w1 + w2);
    if (s.top_weight > 1e-9)
    {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "oracle: e^{-B} Omega reaches the padded cutoff (weight %.2e); raise headroom",
                      s.top_weight);
        throw NumericError(buf);
    }
    return s;
}

}  // namespace

OracleResult cubic_error_oracle(const Field& phi, const Kernel& k, const Potential& v,
                                const BasisPtr& basis, int headroom) {
    OracleSetup s = setup_oracle(phi, k, v, basis, headroom);
    CVec y = s.A * (s.V * s.chi) - s.V * (s.A * s.chi);
    CVec z = expv(s.B, y);
    OracleResult r;
    r.padded = z;
    r.padded_basis = s.padded;
    r.vec = {basis, restrict_to(z, *basis)};
    r.truncation_defect = s.top_weight;
    return r;
}

OracleResult quartic_oracle(const Field& phi, const Kernel& k, const Potential& v,
                            const BasisPtr& basis, int headroom) {
    OracleSetup s = setup_oracle(phi, k, v, basis, headroom);
    CVec z = expv(s.B, CVec(s.V * s.chi));
    OracleResult r;
    r.padded = z;
    r.padded_basis = s.padded;
    r.vec = {basis, restrict_to(z, *basis)};
    r.truncation_defect = s.top_weight;
    return r;
}

ErrorFunctionals error_functionals(const Field& phi, const Kernel& k, const Potential& v,
                                   const BasisPtr& basis, int headroom) {
    ErrorFunctionals e;
    e.f = cubic_error_closed_form(phi, k, v).norm();
    e.f_oracle = cubic_error_oracle(phi, k, v, basis, headroom).padded.norm();
    e.g = quartic_oracle(phi, k, v, basis, headroom).padded.norm();
    return e;
}

CubicComparison compare_cubic(const CubicClosedForm& cf, const OracleResult& orc, const Grid& g) {
    ModeMap mm(g);
    CubicComparison c;
    const double dx = g.dx;
    CVec o1 = mm.slot1(orc.vec);
    std::vector<cd> o3 = mm.slot3(orc.vec);
    double d1 = (o1 - cf.slot1).squaredNorm() * dx, n1 = o1.squaredNorm() * dx;
    double d3 = 0.0, n3 = 0.0;
    for (size_t i = 0; i < o3.size(); ++i) {
        d3 += std::norm(o3[i] - cf.slot3[i]);
        n3 += std::norm(o3[i]);
    }
    d3 *= dx * dx * dx;
    n3 *= dx * dx * dx;
    c.slot1_rel = n1 > 0 ? std::sqrt(d1 / n1) : std::sqrt(d1);
    c.slot3_rel = n3 > 0 ? std::sqrt(d3 / n3) : std::sqrt(d3);
    c.total_rel = (n1 + n3) > 0 ? std::sqrt((d1 + d3) / (n1 + n3)) : std::sqrt(d1 + d3);
    const FockBasis& pb = *orc.padded_basis;
    for (int s = 0; s <= pb.cutoff(); ++s) {
        double w = 0.0;
        Eigen::Index nz = slot_norm_count(pb, orc.padded, s, &w);
        if (s % 2 == 0) c.even_nonzero += long(nz);
        else if (s >= 5) c.high_odd_weight += w;
    }
    c.high_odd_weight = std::sqrt(c.high_odd_weight);
    return c;
}

}  // namespace pairex::fock
