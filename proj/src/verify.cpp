#include "pairex/verify.hpp"

#include "pairex/kernel_calculus.hpp"
#include "pairex/random.hpp"

#include <algorithm>
#include <cmath>

namespace pairex {

namespace {

CMat random_symmetric(Eigen::Index n, double frob, Rng64& rng) {
    CMat a = random_complex_matrix(n, n, rng);
    CMat s = 0.5 * (a + a.transpose());
    return s * (frob / s.norm());
}

Field random_field(const Grid& g, Rng64& rng) {
    CVec v = random_complex_vector(g.n, rng);
    Field f(g, v);
    f.values /= f.norm();
    return f;
}

}  // namespace

std::vector<IdentitySample> identity_suite(const IdentityConfig& cfg, std::uint64_t seed) {
    const Grid& g = cfg.potential.grid;
    Rng64 rng(seed);
    std::vector<IdentitySample> out;
    const Kernel one = Kernel::identity(g);
    PairOptions opt;
    opt.n_quad = cfg.n_quad;
    for (int s = 0; s < cfg.samples; ++s) {
        IdentitySample r;
        r.k_hs = cfg.hs_max * (1.0 - Normal::uniform(rng));
        Kernel k = random_symmetric_kernel(g, r.k_hs, rng);
        Kernel sh = sh_series(k), ch = ch_series(k);
        Kernel p = ch - one;
        Kernel q = kernel_compose(sh, conjugate(sh));
        r.trig = hs_norm(q - 2.0 * p - kernel_compose(p, p));
        r.ch_sh = hs_norm(kernel_compose(ch, ch) - q - one);
        r.inverse = hs_norm(inverse_sh(sh) - k);
        q.symmetry = Symmetry::Hermitian;
        q.entries = 0.5 * (q.entries + q.entries.adjoint().eval());
        r.contour = hs_norm(sqrt_one_plus_contour(q, cfg.n_quad) - sqrt_one_plus_spectral(q));
        if (cfg.pair_residuals) {
            Kernel u = random_symmetric_kernel(g, r.k_hs, rng);
            Field phi = random_field(g, rng);
            CoefficientSet c = build_coefficients(phi, cfg.potential, g);
            Kernel ud = u_dot_from_equation(u, c, opt);
            IdentityResiduals ir = identity_residuals(u, c, ud, opt);
            r.lem = ir.lem;
            r.lem1 = ir.lem1;
            r.seq1_vs_seq2 = ir.seq1_vs_seq2;
            r.seq2_vs_seq3 = hs_norm(rhs_seq2_fd(u, c, opt) - rhs_seq3(u, c, opt));
        }
        out.push_back(r);
    }
    return out;
}

namespace fock {
namespace {

BlockMatrix random_sp(Eigen::Index M, double frob, Rng64& rng) {
    BlockMatrix S;
    S.d = random_complex_matrix(M, M, rng);
    S.k = random_symmetric(M, 1.0, rng);
    S.l = random_symmetric(M, 1.0, rng);
    double n = S.full().norm();
    S.d *= frob / n;
    S.k *= frob / n;
    S.l *= frob / n;
    return S;
}

}  // namespace
}  // namespace fock

std::vector<Check> fock_suite(const FockSuiteConfig& cfg, std::uint64_t seed) {
    using namespace fock;
    Rng64 rng(seed);
    const int M = cfg.modes, P = cfg.cutoff;
    auto basis = std::make_shared<FockBasis>(M, P);
    const FockBasis& b = *basis;
    Ladder L = build_ladder(basis);
    std::vector<Check> out;

    double ccr = 0.0, aa = 0.0, num = 0.0;
    const SpMat Id = identity(b), Nop = number_operator(L);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            SpMat c = commutator(L.a[i], L.ad[j]);
            if (i == j) c -= Id;
            ccr = std::max(ccr, column_norm(CMat(c), b, P - 1));
            aa = std::max(aa, CMat(commutator(L.a[i], L.a[j])).cwiseAbs().maxCoeff());
        }
        num = std::max(num, column_norm(CMat(commutator(Nop, L.ad[i]) - L.ad[i]), b, P - 1));
    }
    out.push_back({"ladder_ccr", ccr, cfg.tol_ladder});
    out.push_back({"ladder_aa", aa, cfg.tol_ladder});
    out.push_back({"number_raising", num, cfg.tol_ladder});

    CVec alpha = random_complex_vector(M, rng);
    alpha /= alpha.norm();
    CoherentResult coh = coherent_state(alpha, cfg.N, basis, cfg.headroom);
    cd expn = coh.state.coeffs.dot(Nop * coh.state.coeffs) / coh.state.coeffs.squaredNorm();
    out.push_back({"coherent_number_rel", std::abs(expn.real() - cfg.N) / cfg.N, cfg.tol_number});
    out.push_back({"coherent_two_way", coh.agreement, 1e-8});

    CMat k = random_symmetric(M, cfg.k_norm, rng);
    out.push_back({"conjugation", conjugation_check(k, basis, cfg.probe_level, cfg.headroom),
                   cfg.tol_conjugation});

    {
        auto padded = std::make_shared<FockBasis>(M, P + cfg.headroom);
        Ladder Lp = build_ladder(padded);
        CVec vac = CVec::Zero(padded->size());
        vac(0) = 1.0;
        CVec x = expv(SpMat(-build_quadratic(Lp, k)), vac);
        out.push_back({"unitarity_B", std::abs(x.norm() - 1.0), 1e-10});
        CVec y = expv(SpMat(-std::sqrt(cfg.N) * A_of(Lp, alpha)), vac);
        out.push_back({"unitarity_A", std::abs(y.norm() - 1.0), 1e-10});
    }

    const double s_norm = 0.2;
    BlockMatrix S = random_sp(M, s_norm, rng), R = random_sp(M, s_norm, rng),
                S1 = random_sp(M, s_norm, rng);
    CVec f = random_complex_vector(M, rng), gv = random_complex_vector(M, rng);
    LieResiduals lr = lie_checks(S, R, f, gv, basis, cfg.probe_level, &S1, cfg.headroom);
    out.push_back({"lie1", lr.lie1, cfg.tol_lie});
    out.push_back({"lie2", lr.lie2, cfg.tol_lie});
    out.push_back({"grp1", lr.grp1, cfg.tol_lie});
    out.push_back({"grp2", lr.grp2, cfg.tol_lie});
    out.push_back({"grp3", lr.grp3, cfg.tol_lie});

    BlockMatrix K{CMat::Zero(M, M), k, k.conjugate()};
    CMat X = basis_change_C(K);
    CMat expect(2 * M, 2 * M);
    expect << k.real(), k.imag(), k.imag(), -k.real();
    out.push_back({"basis_change_closed_form", (X - expect.cast<cd>()).cwiseAbs().maxCoeff(),
                   cfg.tol_basis});
    out.push_back({"basis_change_realness", K.realness_defect(), cfg.tol_basis});
    out.push_back({"basis_change_roundtrip",
                   (basis_change_inverse(basis_change_C(S)).full() - S.full()).cwiseAbs().maxCoeff(),
                   cfg.tol_basis});
    return out;
}

std::vector<Check> cubic_suite(const CubicSuiteConfig& cfg, std::uint64_t seed) {
    using namespace fock;
    Rng64 rng(seed);
    Grid g;
    g.n = cfg.modes;
    g.dx = 1.0;
    g.x_min = 0.0;
    g.periodic = true;
    Potential v = Potential::build(g, cfg.potential);
    Field phi = random_field(g, rng);
    Kernel k = Kernel::from_op(g, random_symmetric(g.n, cfg.k_norm, rng));
    k.symmetry = Symmetry::Symmetric;
    auto basis = std::make_shared<FockBasis>(cfg.modes, cfg.cutoff);
    CubicClosedForm cf = cubic_error_closed_form(phi, k, v);
    OracleResult orc = cubic_error_oracle(phi, k, v, basis, cfg.headroom);
    CubicComparison cmp = compare_cubic(cf, orc, g);
    std::vector<Check> out;
    out.push_back({"cubic_slot1_rel", cmp.slot1_rel, cfg.tol});
    out.push_back({"cubic_slot3_rel", cmp.slot3_rel, cfg.tol});
    out.push_back({"cubic_total_rel", cmp.total_rel, cfg.tol});
    out.push_back({"cubic_even_nonzero", double(cmp.even_nonzero), 0.0});
    out.push_back({"cubic_high_odd_weight", cmp.high_odd_weight, cfg.tol * cf.norm()});

    OracleResult quart = quartic_oracle(phi, k, v, basis, cfg.headroom);
    long odd = 0;
    const FockBasis& pb = *quart.padded_basis;
    for (int s = 1; s <= pb.cutoff(); s += 2) odd += long(slot_norm_count(pb, quart.padded, s, nullptr));
    out.push_back({"quartic_odd_nonzero", double(odd), 0.0});
    return out;
}

}  // namespace pairex
