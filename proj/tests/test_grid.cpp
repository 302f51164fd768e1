#include "oracles.hpp"
#include "pairex/grid.hpp"
#include "pairex/random.hpp"

#include <doctest.h>

using namespace pairex;

TEST_SUITE("grid") {

TEST_CASE("inner product of constants") {
    Grid g;
    g.n = 4;
    g.dx = 0.5;
    Field f(g, CVec::Ones(4));
    CHECK(std::abs(inner_product(f, f) - cd(2.0)) < 1e-15);
}

TEST_CASE("even and odd samples are orthogonal") {
    Grid g = Grid::centered(16, 8.0);
    // symmetric about x = 0 on the points x_1 .. x_15; x_0 = -4 would be unpaired
    CVec e = CVec::Zero(16), o = CVec::Zero(16);
    for (int i = 1; i < 16; ++i) {
        double x = g.x(i);
        e(i) = std::exp(-x * x);
        o(i) = x * std::exp(-x * x);
    }
    CHECK(std::abs(inner_product(Field(g, e), Field(g, o))) < 1e-14);
}

TEST_CASE("inner product matches loop oracle") {
    Grid g = Grid::centered(12, 6.0);
    Rng64 rng(11);
    CVec f = random_complex_vector(12, rng), h = random_complex_vector(12, rng);
    CHECK(std::abs(inner_product(Field(g, f), Field(g, h)) - oracle::inner(f, h, g.dx)) < 1e-14);
}

TEST_CASE("grid mismatch and bad grids are rejected") {
    Grid a = Grid::centered(8, 4.0), b = Grid::centered(8, 5.0);
    CHECK_THROWS_AS(inner_product(Field::zero(a), Field::zero(b)), InputError);
    CHECK_THROWS_AS(kernel_compose(Kernel::zero(a), Kernel::zero(b)), InputError);
    CHECK_THROWS_AS(Grid::centered(1, 4.0), InputError);
    CHECK_THROWS_AS(Grid::centered(4, -1.0), InputError);
    CHECK_THROWS_AS(Field(a, CVec::Zero(3)), InputError);
}

TEST_CASE("composition with identity and transposes") {
    Grid g = Grid::centered(5, 3.0);
    Rng64 rng(3);
    Kernel a(g, random_complex_matrix(5, 5, rng)), b(g, random_complex_matrix(5, 5, rng));
    CHECK(oracle::max_abs((kernel_compose(a, Kernel::identity(g)) - a).entries) < 1e-13);
    Kernel l = transpose(kernel_compose(a, b)), r = kernel_compose(transpose(b), transpose(a));
    CHECK(oracle::max_abs((l - r).entries) < 1e-13);
}

TEST_CASE("composition matches triple loop") {
    Grid g = Grid::centered(6, 3.0);
    Rng64 rng(4);
    Kernel a(g, random_complex_matrix(6, 6, rng)), b(g, random_complex_matrix(6, 6, rng));
    CHECK(oracle::max_abs(kernel_compose(a, b).entries - oracle::compose(a.entries, b.entries, g.dx)) <
          1e-13);
}

TEST_CASE("composition is associative") {
    Grid g = Grid::centered(7, 3.5);
    Rng64 rng(5);
    Kernel a(g, random_complex_matrix(7, 7, rng)), b(g, random_complex_matrix(7, 7, rng)),
        c(g, random_complex_matrix(7, 7, rng));
    Kernel l = kernel_compose(kernel_compose(a, b), c), r = kernel_compose(a, kernel_compose(b, c));
    CHECK(oracle::max_abs((l - r).entries) < 1e-12 * oracle::max_abs(l.entries));
}

TEST_CASE("symmetry tag is recomputed by composition") {
    Grid g = Grid::centered(6, 3.0);
    Rng64 rng(6);
    CMat x = random_complex_matrix(6, 6, rng);
    Kernel h(g, x * x.adjoint());
    CHECK(h.symmetry == Symmetry::Hermitian);
    Kernel hh = kernel_compose(h, h);
    CHECK(hh.symmetry == Symmetry::Hermitian);
    Kernel s(g, x + x.transpose());
    CHECK(s.symmetry == Symmetry::Symmetric);
    CHECK(kernel_compose(s, s).symmetry == Symmetry::Symmetric);
    CHECK(kernel_compose(s, h).symmetry == Symmetry::General);
}

TEST_CASE("tag violations are reported") {
    Grid g = Grid::centered(4, 2.0);
    CMat e = CMat::Zero(4, 4);
    e(0, 1) = 1.0;
    CHECK_THROWS_AS(Kernel(g, e, Symmetry::Symmetric), InputError);
    CHECK_THROWS_AS(Kernel(g, cd(0.0, 1.0) * CMat::Identity(4, 4), Symmetry::Hermitian), InputError);
}

TEST_CASE("hs norm") {
    Grid g = Grid::centered(9, 3.0);
    CHECK(hs_norm(Kernel::zero(g)) == 0.0);
    CHECK(std::abs(hs_norm(Kernel::identity(g)) - 3.0) < 1e-14);
    Rng64 rng(7);
    Kernel a(g, random_complex_matrix(9, 9, rng));
    CHECK(std::abs(hs_norm(a) - oracle::hs(a.entries, g.dx)) < 1e-14 * hs_norm(a));
}

TEST_CASE("adjoint, transpose and conjugate") {
    Grid g = Grid::centered(6, 3.0);
    Rng64 rng(8);
    CMat x = random_complex_matrix(6, 6, rng);
    Kernel h(g, x + x.adjoint().eval());
    CHECK(oracle::max_abs((adjoint(h) - h).entries) == 0.0);
    Kernel s(g, x + x.transpose().eval());
    CHECK(oracle::max_abs((transpose(s) - s).entries) == 0.0);
    Kernel a(g, x);
    CHECK(oracle::max_abs((adjoint(a) - conjugate(transpose(a))).entries) == 0.0);
}

TEST_CASE("potentials are even and nonnegative") {
    Grid g = Grid::centered(32, 16.0);
    for (auto kind : {PotentialKind::Cutoff, PotentialKind::Gaussian, PotentialKind::Delta}) {
        PotentialParams p;
        p.kind = kind;
        Potential v = Potential::build(g, p);
        CHECK(v.v.minCoeff() >= 0.0);
        CHECK((v.v - v.v.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
    PotentialParams bad;
    bad.eps = 0.0;
    CHECK_THROWS_AS(Potential::build(g, bad), InputError);
}

TEST_CASE("radial derivative matches finite differences") {
    Grid g = Grid::centered(16, 8.0);
    for (auto kind : {PotentialKind::Cutoff, PotentialKind::Gaussian}) {
        PotentialParams p;
        p.kind = kind;
        Potential v = Potential::build(g, p);
        for (double r : {0.3, 1.0, 2.5}) {
            double h = 1e-5;
            double fd = (v.profile(r + h) - v.profile(r - h)) / (2 * h);
            CHECK(std::abs(fd - v.dprofile(r)) < 1e-8);
        }
    }
}

TEST_CASE("string round trips for enums") {
    for (auto k : {PotentialKind::Cutoff, PotentialKind::Gaussian, PotentialKind::Delta, PotentialKind::Zero})
        CHECK(potential_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(potential_kind_from_string("coulomb"), InputError);
}

}
