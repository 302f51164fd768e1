#pragma once

#include "pairex/grid.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace pairex::fock {

using SpMat = Eigen::SparseMatrix<cd>;

// Sign of the interaction in H = sum L a*a + (sign/N) (1/2) sum v a*a*aa. Repulsive v >= 0 with a
// plus sign is the many-body counterpart of i phi_t = -Delta phi + (v * |phi|^2) phi.
inline constexpr double kInteractionSign = +1.0;

class FockBasis {
public:
    FockBasis(int modes, int cutoff);

    int modes() const { return M_; }
    int cutoff() const { return P_; }
    Eigen::Index size() const { return size_; }
    // occupation numbers of state i
    const int* state(Eigen::Index i) const { return &occ_[i * M_]; }
    int level(Eigen::Index i) const { return level_[i]; }
    // states of total number n occupy [level_begin(n), level_begin(n+1))
    Eigen::Index level_begin(int n) const { return begin_[n]; }
    Eigen::Index level_end(int n) const { return begin_[n + 1]; }
    // -1 if the occupation is outside the basis
    Eigen::Index index_of(const int* occ) const;

    static double binomial(int n, int k);

private:
    int M_, P_;
    Eigen::Index size_;
    std::vector<int> occ_;
    std::vector<int> level_;
    std::vector<Eigen::Index> begin_;
    // ranking table: number of compositions of s into m parts
    std::vector<std::vector<Eigen::Index>> comp_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

struct FockVector {
    BasisPtr basis;
    CVec coeffs;
    double norm() const { return coeffs.norm(); }
};

struct FockOperator {
    BasisPtr basis;
    SpMat matrix;
    CMat dense() const { return CMat(matrix); }
};

struct Ladder {
    BasisPtr basis;
    std::vector<SpMat> a;
    std::vector<SpMat> ad;
};

Ladder build_ladder(const BasisPtr& basis);
SpMat identity(const FockBasis& b);
SpMat number_operator(const Ladder& L);
SpMat commutator(const SpMat& x, const SpMat& y);

// sum f_i a_i + g_i a*_i
SpMat field_operator(const Ladder& L, const CVec& f, const CVec& g);
// A(phi) = sum conj(alpha_i) a_i - alpha_i a*_i, alpha the mode amplitudes
SpMat A_of(const Ladder& L, const CVec& alpha);
// B = 1/2 sum (k_ij a_i a_j - conj(k_ij) a*_i a*_j), k a symmetric mode matrix
SpMat build_quadratic(const Ladder& L, const CMat& k);
FockOperator build_quadratic(const CMat& k, const BasisPtr& basis);
// sum L_ij a*_i a_j
SpMat one_body(const Ladder& L, const CMat& h);
// 1/2 sum v_ij a*_i a*_j a_j a_i
SpMat interaction(const Ladder& L, const RMat& v);

// (e^{X/n})^n with a Taylor series for the small exponential. n_split <= 0 picks n.
CMat expm_split(const CMat& X, int n_split = 0);
FockOperator exp_B(const FockOperator& B, int n_split = 0);
// exp(t X) v by a scaled Taylor series; never forms the exponential.
CVec expv(const SpMat& X, const CVec& v, double t = 1.0);

// Mode <-> grid dictionary. Modes are grid deltas scaled by sqrt(dx).
struct ModeMap {
    Grid grid;
    explicit ModeMap(const Grid& g) : grid(g) {}
    CVec modes_from_field(const Field& phi) const;
    Field field_from_modes(const CVec& alpha) const;
    CMat mode_matrix(const Kernel& k) const;
    Kernel kernel_from_mode(const CMat& m) const;
    // slot-n function on the grid <-> occupation coefficients
    CVec slot1(const FockVector& v) const;
    std::vector<cd> slot3(const FockVector& v) const;
    FockVector vector_from_slots(const BasisPtr& basis, const CVec& psi1,
                                 const std::vector<cd>& psi3) const;
};

// Copy the leading coefficients of a vector on a larger cutoff into `basis`.
CVec restrict_to(const CVec& padded, const FockBasis& basis);
Eigen::Index slot_norm_count(const FockBasis& b, const CVec& v, int slot, double* norm2);

// 1 - sum_{n <= P} e^{-N} N^n / n!
double poisson_tail(double N, int P);

struct CoherentResult {
    FockVector state;       // via the exponential of -sqrt(N) A
    FockVector slot_state;  // via c_n phi^{(x) n}
    double agreement = 0.0;
    double truncation_loss = 0.0;
};

CoherentResult coherent_state(const CVec& alpha, double N, const BasisPtr& basis, int headroom = 12);

// Max operator-norm defect of e^B a_i e^{-B} - sum_j (ch_ji a_j + conj(sh)_ji a*_j) on
// columns with total number <= probe_level. The exponentials act on a basis padded by
// `headroom` levels, so the cutoff does not leak into the probe columns.
double conjugation_check(const CMat& k_mode, const BasisPtr& basis, int probe_level = 2,
                         int headroom = 12);

// [[d, k], [l, -d^T]] in mode space
struct BlockMatrix {
    CMat d, k, l;
    static BlockMatrix from_full(const CMat& S);
    CMat full() const;
    Eigen::Index modes() const { return d.rows(); }
    bool in_sp(double tol = 1e-12) const;
    double realness_defect() const;
};

BlockMatrix bracket(const BlockMatrix& a, const BlockMatrix& b);
SpMat metaplectic(const Ladder& L, const BlockMatrix& S);
// C^T S conj(C) with C = (1/sqrt 2)[[1, -i], [1, i]] blockwise
CMat basis_change_C(const BlockMatrix& S);
BlockMatrix basis_change_inverse(const CMat& X);

struct LieResiduals {
    double lie1 = 0.0, lie2 = 0.0, grp1 = 0.0, grp2 = 0.0, grp3 = 0.0;
};

// f, g define A(f, g); S1 is the t-derivative direction used for grp3 (S(t) = S + t S1).
LieResiduals lie_checks(const BlockMatrix& S, const BlockMatrix& R, const CVec& f, const CVec& g,
                        const BasisPtr& basis, int probe_level = 2,
                        const BlockMatrix* S1 = nullptr, int headroom = 12);

// Operator norm of X restricted to columns with level <= max_level.
double column_norm(const CMat& X, const FockBasis& b, int max_level);

}  // namespace pairex::fock
