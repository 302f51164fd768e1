#include "pairex/cubic.hpp"
#include "pairex/random.hpp"
#include "pairex/verify.hpp"

#include <doctest.h>

using namespace pairex;
using namespace pairex::fock;

namespace {

struct Setup {
    Grid g;
    Potential v;
    Field phi;
    Kernel k;
};

Setup setup(std::uint64_t seed, double k_norm) {
    Setup s;
    s.g.n = 3;
    s.g.dx = 1.0;
    s.g.x_min = 0.0;
    s.g.periodic = true;
    PotentialParams p;
    p.kind = PotentialKind::Gaussian;
    p.cutoff = 1.0;
    s.v = Potential::build(s.g, p);
    Rng64 rng(seed);
    s.phi = Field(s.g, random_complex_vector(3, rng));
    s.phi.values /= s.phi.norm();
    CMat a = random_complex_matrix(3, 3, rng);
    CMat sym = 0.5 * (a + a.transpose());
    s.k = Kernel(s.g, sym * (k_norm / sym.norm()), Symmetry::Symmetric);
    return s;
}

}  // namespace

TEST_SUITE("cubic") {

TEST_CASE("vanishing cases") {
    Setup s = setup(1, 0.3);
    auto basis = std::make_shared<FockBasis>(3, 9);
    CubicClosedForm z = cubic_error_closed_form(Field::zero(s.g), s.k, s.v);
    CHECK(z.norm() == 0.0);
    CHECK(cubic_error_oracle(Field::zero(s.g), s.k, s.v, basis, 24).padded.norm() == 0.0);
    Kernel k0(s.g, CMat::Zero(3, 3), Symmetry::Symmetric);
    CHECK(cubic_error_closed_form(s.phi, k0, s.v).norm() < 1e-15);

    ErrorFunctionals f0 = error_functionals(Field::zero(s.g), s.k, s.v, basis, 24);
    CHECK(f0.f == 0.0);
    ErrorFunctionals g0 = error_functionals(s.phi, k0, s.v, basis, 24);
    CHECK(g0.g < 1e-15);
}

TEST_CASE("closed form matches the Fock oracle") {
    for (std::uint64_t seed : {2, 3, 4}) {
        Setup s = setup(seed, 0.3);
        auto basis = std::make_shared<FockBasis>(3, 9);
        CubicClosedForm cf = cubic_error_closed_form(s.phi, s.k, s.v);
        OracleResult orc = cubic_error_oracle(s.phi, s.k, s.v, basis, 24);
        CubicComparison c = compare_cubic(cf, orc, s.g);
        CHECK(c.slot1_rel < 1e-6);
        CHECK(c.slot3_rel < 1e-6);
        CHECK(c.even_nonzero == 0);
        ErrorFunctionals e = error_functionals(s.phi, s.k, s.v, basis, 24);
        CHECK(std::abs(e.f - e.f_oracle) < 1e-5 * e.f);
    }
}

TEST_CASE("printed conjugation does not match the oracle") {
    Setup s = setup(5, 0.3);
    auto basis = std::make_shared<FockBasis>(3, 9);
    CubicOptions printed;
    printed.printed_conjugation = true;
    CubicClosedForm cf = cubic_error_closed_form(s.phi, s.k, s.v, printed);
    CubicComparison c = compare_cubic(cf, cubic_error_oracle(s.phi, s.k, s.v, basis, 24), s.g);
    CHECK(c.slot1_rel > 1e-2);
}

TEST_CASE("quartic term occupies even slots") {
    Setup s = setup(6, 0.3);
    auto basis = std::make_shared<FockBasis>(3, 9);
    OracleResult q = quartic_oracle(s.phi, s.k, s.v, basis, 24);
    const FockBasis& pb = *q.padded_basis;
    for (int slot = 1; slot <= pb.cutoff(); slot += 2)
        CHECK(slot_norm_count(pb, q.padded, slot, nullptr) == 0);
    double w4 = 0.0, total = q.padded.squaredNorm();
    for (int slot = 0; slot <= 4; slot += 2) {
        double n2 = 0.0;
        slot_norm_count(pb, q.padded, slot, &n2);
        w4 += n2;
    }
    // slots 0, 2, 4 carry the weight up to the higher even slots, which are O(k^2)
    CHECK(w4 > 0.9 * total);
}

TEST_CASE("cubic suite passes") {
    for (const auto& c : cubic_suite({}, 7)) {
        INFO(c.name);
        CHECK(c.pass());
    }
}

}
