#include "oracles.hpp"
#include "pairex/fock.hpp"
#include "pairex/kernel_calculus.hpp"
#include "pairex/random.hpp"

#include <doctest.h>

#include <algorithm>

using namespace pairex;
using namespace pairex::fock;

namespace {

CMat random_sym(int M, double frob, Rng64& rng) {
    CMat a = random_complex_matrix(M, M, rng);
    CMat s = 0.5 * (a + a.transpose());
    return s * (frob / s.norm());
}

BlockMatrix random_sp(int M, double frob, Rng64& rng) {
    BlockMatrix S{random_complex_matrix(M, M, rng), random_sym(M, 1.0, rng), random_sym(M, 1.0, rng)};
    double n = S.full().norm();
    S.d *= frob / n;
    S.k *= frob / n;
    S.l *= frob / n;
    return S;
}

CVec vacuum(const FockBasis& b) {
    CVec v = CVec::Zero(b.size());
    v(0) = 1.0;
    return v;
}

}  // namespace

TEST_SUITE("fock") {

TEST_CASE("basis enumeration") {
    for (auto [M, P] : {std::pair{1, 5}, std::pair{2, 7}, std::pair{3, 4}}) {
        FockBasis b(M, P);
        CHECK(double(b.size()) == FockBasis::binomial(P + M, M));
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            CHECK(b.index_of(b.state(i)) == i);
            int s = 0;
            for (int m = 0; m < M; ++m) s += b.state(i)[m];
            CHECK(s == b.level(i));
            if (i) CHECK(b.level(i) >= b.level(i - 1));
        }
    }
}

TEST_CASE("ladder algebra") {
    auto basis = std::make_shared<FockBasis>(3, 6);
    Ladder L = build_ladder(basis);
    CVec vac = vacuum(*basis);
    SpMat Id = identity(*basis);
    for (int i = 0; i < 3; ++i) {
        CHECK((L.a[i] * vac).norm() == 0.0);
        CHECK(oracle::max_abs(CMat(L.ad[i]) - CMat(L.a[i]).adjoint()) == 0.0);
        for (int j = 0; j < 3; ++j) {
            CMat c = CMat(commutator(L.a[i], L.ad[j]));
            if (i == j) c -= CMat(Id);
            CHECK(column_norm(c, *basis, 5) < 1e-13);
        }
    }
    SpMat N = number_operator(L);
    for (Eigen::Index s = 0; s < basis->size(); ++s) {
        CVec e = CVec::Zero(basis->size());
        e(s) = 1.0;
        CHECK(((N * e) - double(basis->level(s)) * e).norm() < 1e-13);
    }
}

TEST_CASE("coherent states") {
    auto basis = std::make_shared<FockBasis>(2, 30);
    Rng64 rng(1);
    CVec alpha = random_complex_vector(2, rng);
    alpha /= alpha.norm();
    const double N = 4.0;
    CoherentResult c = coherent_state(alpha, N, basis);
    SpMat Nop = number_operator(build_ladder(basis));
    const CVec& x = c.state.coeffs;
    CHECK(std::abs(x.dot(Nop * x).real() / x.squaredNorm() - N) < 1e-6);
    CHECK(c.agreement < 1e-8);

    CoherentResult z = coherent_state(alpha, 0.0, basis);
    CHECK((z.state.coeffs - vacuum(*basis)).norm() < 1e-15);

    auto b1 = std::make_shared<FockBasis>(1, 25);
    CVec one = CVec::Ones(1);
    CoherentResult p = coherent_state(one, 1.0, b1);
    for (int n = 0; n <= 25; ++n)
        CHECK(std::abs(p.state.coeffs(n) - std::exp(-0.5) / std::sqrt(std::tgamma(n + 1.0))) < 1e-10);

    auto small = std::make_shared<FockBasis>(2, 8);
    CHECK_THROWS_AS(coherent_state(alpha, 16.0, small), NumericError);
    CHECK_THROWS_AS(coherent_state(2.0 * alpha, 1.0, basis), InputError);
}

TEST_CASE("quadratic generator") {
    auto basis = std::make_shared<FockBasis>(2, 8);
    Ladder L = build_ladder(basis);
    CHECK(build_quadratic(L, CMat::Zero(2, 2)).norm() == 0.0);
    Rng64 rng(2);
    CMat k = random_sym(2, 0.4, rng);
    CMat B = CMat(build_quadratic(L, k));
    CHECK(oracle::max_abs(B + B.adjoint()) == 0.0);
    BlockMatrix K{CMat::Zero(2, 2), k, k.conjugate()};
    CHECK(oracle::max_abs(CMat(metaplectic(L, K)) - B) < 1e-15);
}

TEST_CASE("exponential of B") {
    auto basis = std::make_shared<FockBasis>(2, 10);
    Rng64 rng(3);
    FockOperator Z = build_quadratic(CMat::Zero(2, 2), basis);
    CHECK(oracle::max_abs(exp_B(Z).dense() - CMat::Identity(basis->size(), basis->size())) == 0.0);

    FockOperator B = build_quadratic(random_sym(2, 0.3, rng), basis);
    CMat E = exp_B(B).dense();
    CMat Id = CMat::Identity(E.rows(), E.cols());
    CHECK(oracle::max_abs(E.adjoint() * E - Id) < 1e-10);
    FockOperator B4{basis, B.matrix / cd(4.0)};
    CMat E4 = exp_B(B4, 1).dense();
    CHECK(oracle::max_abs(E4 * E4 * E4 * E4 - E) < 1e-10);
    CHECK(oracle::max_abs(exp_B(B, 3).dense() - exp_B(B, 17).dense()) < 1e-10);

    // expv agrees with the dense exponential on a vector
    CVec v = random_complex_vector(basis->size(), rng);
    CHECK((expv(B.matrix, v) - E * v).norm() < 1e-10 * v.norm());
}

TEST_CASE("conjugation of a_i by e^B") {
    auto b2 = std::make_shared<FockBasis>(2, 12);
    CHECK(conjugation_check(CMat::Zero(2, 2), b2) < 1e-15);
    Rng64 rng(4);
    CMat k = random_sym(2, 0.2, rng);
    CHECK(conjugation_check(k, b2) < 1e-6);
    // without headroom the cutoff leaks in; less room means a larger defect
    double prev = 1e300;
    for (int P : {6, 8, 10, 12}) {
        auto b = std::make_shared<FockBasis>(2, P);
        double d = conjugation_check(k, b, 2, 0);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("Lie algebra and group identities") {
    auto basis = std::make_shared<FockBasis>(2, 10);
    Rng64 rng(5);
    BlockMatrix Z{CMat::Zero(2, 2), CMat::Zero(2, 2), CMat::Zero(2, 2)};
    CVec f = random_complex_vector(2, rng), g = random_complex_vector(2, rng);
    LieResiduals z = lie_checks(Z, Z, f, g, basis);
    CHECK(z.lie1 < 1e-15);
    CHECK(z.lie2 < 1e-15);
    CHECK(z.grp1 < 1e-15);
    CHECK(z.grp2 < 1e-15);

    BlockMatrix D{CMat::Zero(2, 2), CMat::Zero(2, 2), CMat::Zero(2, 2)};
    D.d(0, 0) = 0.3;
    D.d(1, 1) = -0.2;
    LieResiduals d = lie_checks(D, D, f, g, basis);
    CHECK(d.lie2 < 1e-14);

    BlockMatrix S = random_sp(2, 0.2, rng), R = random_sp(2, 0.2, rng), S1 = random_sp(2, 0.2, rng);
    CHECK(S.in_sp());
    LieResiduals r = lie_checks(S, R, f, g, basis, 2, &S1);
    CHECK(r.lie1 < 1e-7);
    CHECK(r.lie2 < 1e-7);
    CHECK(r.grp1 < 1e-7);
    CHECK(r.grp2 < 1e-7);
    CHECK(r.grp3 < 1e-7);
}

TEST_CASE("change of basis") {
    Rng64 rng(6);
    CMat k = random_sym(3, 1.0, rng);
    BlockMatrix K{CMat::Zero(3, 3), k, k.conjugate()};
    CMat X = basis_change_C(K);
    CMat expect(6, 6);
    expect << k.real(), k.imag(), k.imag(), -k.real();
    CHECK(oracle::max_abs(X - expect.cast<cd>()) < 1e-15);
    CHECK(K.realness_defect() < 1e-15);

    BlockMatrix S = random_sp(3, 1.0, rng), R = random_sp(3, 1.0, rng);
    CHECK(oracle::max_abs(basis_change_inverse(basis_change_C(S)).full() - S.full()) < 1e-14);
    CMat XS = basis_change_C(S), XR = basis_change_C(R);
    CHECK(oracle::max_abs(basis_change_C(bracket(S, R)) - (XS * XR - XR * XS)) < 1e-12);
}

TEST_CASE("mode map round trips") {
    Grid g = Grid::centered(3, 2.4);
    ModeMap mm(g);
    Rng64 rng(7);
    Field phi(g, random_complex_vector(3, rng));
    CHECK((mm.field_from_modes(mm.modes_from_field(phi)).values - phi.values).norm() < 1e-15);
    CHECK(std::abs(mm.modes_from_field(phi).norm() - phi.norm()) < 1e-14);
    Kernel k(g, random_complex_matrix(3, 3, rng));
    CHECK(oracle::max_abs((mm.kernel_from_mode(mm.mode_matrix(k)) - k).entries) < 1e-14);
    CHECK(std::abs(mm.mode_matrix(k).norm() - hs_norm(k)) < 1e-14);

    auto basis = std::make_shared<FockBasis>(3, 4);
    CVec psi1 = random_complex_vector(3, rng);
    std::vector<cd> psi3(27);
    CVec r = random_complex_vector(27, rng);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                // symmetric rank-3 tensor
                int s[3] = {a, b, c};
                std::sort(s, s + 3);
                psi3[(a * 3 + b) * 3 + c] = r((s[0] * 3 + s[1]) * 3 + s[2]);
            }
    FockVector v = mm.vector_from_slots(basis, psi1, psi3);
    CHECK((mm.slot1(v) - psi1).norm() < 1e-14);
    std::vector<cd> back = mm.slot3(v);
    double err = 0.0;
    for (size_t i = 0; i < 27; ++i) err = std::max(err, std::abs(back[i] - psi3[i]));
    CHECK(err < 1e-13);
    // isometry on slot 3: sum |psi3|^2 dx^3 = coefficient norm^2
    double l2 = 0.0;
    for (auto x : psi3) l2 += std::norm(x) * std::pow(g.dx, 3);
    double c2 = 0.0;
    for (Eigen::Index s = basis->level_begin(3); s < basis->level_end(3); ++s) c2 += std::norm(v.coeffs(s));
    CHECK(std::abs(l2 - c2) < 1e-12 * l2);
}

TEST_CASE("poisson tail") {
    CHECK(poisson_tail(1.0, 0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    CHECK(poisson_tail(4.0, 40) < 1e-20);
    CHECK(poisson_tail(64.0, 40) > 0.99);
}

}
