#pragma once

#include "pairex/fock.hpp"

#include <vector>

namespace pairex::fock {

// Third-slot tensors are stored flat with index (z1 * n + z2) * n + z3.
struct CubicClosedForm {
    int n = 0;
    double dx = 1.0;
    std::vector<cd> psi_I, psi_Ip;
    CVec psi_II, psi_III, psi_IIp, psi_IIIp;
    // Fock slot functions of e^B [A, V] e^{-B} Omega:
    // slot 3 = sqrt(3!) Sym(psi_I + psi_Ip), slot 1 = psi_II + psi_III + psi_IIp + psi_IIIp
    std::vector<cd> slot3;
    CVec slot1;
    double norm() const;
};

struct CubicOptions {
    // Use conj(phi) in psi_II' and psi_III' as printed, instead of phi from E2.
    bool printed_conjugation = false;
};

CubicClosedForm cubic_error_closed_form(const Field& phi, const Kernel& k, const Potential& v,
                                        const CubicOptions& opt = {});

struct OracleResult {
    FockVector vec;     // restricted to the requested basis
    CVec padded;        // on the padded basis
    BasisPtr padded_basis;
    double truncation_defect = 0.0;  // weight of e^{-B} Omega on the top padded level
};

OracleResult cubic_error_oracle(const Field& phi, const Kernel& k, const Potential& v,
                                const BasisPtr& basis, int headroom = 10);
// e^B V e^{-B} Omega on the padded basis.
OracleResult quartic_oracle(const Field& phi, const Kernel& k, const Potential& v,
                            const BasisPtr& basis, int headroom = 10);

struct ErrorFunctionals {
    double f = 0.0;
    double g = 0.0;
    double f_oracle = 0.0;
};

ErrorFunctionals error_functionals(const Field& phi, const Kernel& k, const Potential& v,
                                   const BasisPtr& basis, int headroom = 10);

// relative L2 distance of the slot functions of closed form and oracle
struct CubicComparison {
    double slot1_rel = 0.0;
    double slot3_rel = 0.0;
    double total_rel = 0.0;
    long even_nonzero = 0;      // nonzero coefficients in even slots (exact parity)
    double high_odd_weight = 0.0;  // weight in slots >= 5
};

CubicComparison compare_cubic(const CubicClosedForm& cf, const OracleResult& orc, const Grid& g);

}  // namespace pairex::fock
