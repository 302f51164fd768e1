#include "pairex/fock.hpp"

#include "pairex/kernel_calculus.hpp"

#include <cmath>
#include <numeric>

namespace pairex::fock {

double FockBasis::binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

FockBasis::FockBasis(int modes, int cutoff) : M_(modes), P_(cutoff) {
    if (modes < 1) throw InputError("fock basis: need at least one mode");
    if (cutoff < 0) throw InputError("fock basis: cutoff must be >= 0");
    size_ = Eigen::Index(binomial(P_ + M_, M_));
    comp_.assign(P_ + 1, std::vector<Eigen::Index>(M_ + 1, 0));
    for (int s = 0; s <= P_; ++s)
        for (int m = 1; m <= M_; ++m) comp_[s][m] = Eigen::Index(binomial(s + m - 1, m - 1));
    occ_.reserve(size_ * M_);
    level_.reserve(size_);
    begin_.assign(P_ + 2, 0);
    std::vector<int> cur(M_, 0);
    // within a level, the first mode runs from high to low occupation
    auto emit = [&](auto&& self, int mode, int remaining, int total) -> void {
        if (mode == M_ - 1) {
            cur[mode] = remaining;
            occ_.insert(occ_.end(), cur.begin(), cur.end());
            level_.push_back(total);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            cur[mode] = v;
            self(self, mode + 1, remaining - v, total);
        }
    };
    for (int n = 0; n <= P_; ++n) {
        begin_[n] = Eigen::Index(level_.size());
        emit(emit, 0, n, n);
    }
    begin_[P_ + 1] = Eigen::Index(level_.size());
}

Eigen::Index FockBasis::index_of(const int* occ) const {
    int total = 0;
    for (int i = 0; i < M_; ++i) {
        if (occ[i] < 0) return -1;
        total += occ[i];
    }
    if (total > P_) return -1;
    Eigen::Index rank = 0;
    int rem = total;
    for (int i = 0; i < M_ - 1; ++i) {
        // states with a larger occupation in mode i come first
        for (int v = rem; v > occ[i]; --v) rank += comp_[rem - v][M_ - i - 1];
        rem -= occ[i];
    }
    return begin_[total] + rank;
}

Ladder build_ladder(const BasisPtr& basis) {
    const FockBasis& b = *basis;
    const int M = b.modes();
    Ladder L;
    L.basis = basis;
    std::vector<int> tmp(M);
    for (int i = 0; i < M; ++i) {
        std::vector<Eigen::Triplet<cd>> tr;
        tr.reserve(b.size());
        for (Eigen::Index s = 0; s < b.size(); ++s) {
            const int* o = b.state(s);
            if (o[i] == 0) continue;
            std::copy(o, o + M, tmp.begin());
            tmp[i] -= 1;
            Eigen::Index t = b.index_of(tmp.data());
            tr.emplace_back(t, s, std::sqrt(double(o[i])));
        }
        SpMat a(b.size(), b.size());
        a.setFromTriplets(tr.begin(), tr.end());
        L.a.push_back(a);
        L.ad.push_back(SpMat(a.adjoint()));
    }
    return L;
}

SpMat identity(const FockBasis& b) {
    SpMat I(b.size(), b.size());
    I.setIdentity();
    return I;
}

SpMat number_operator(const Ladder& L) {
    SpMat N(L.basis->size(), L.basis->size());
    for (size_t i = 0; i < L.a.size(); ++i) N += L.ad[i] * L.a[i];
    return N;
}

SpMat commutator(const SpMat& x, const SpMat& y) { return SpMat(x * y) - SpMat(y * x); }

SpMat field_operator(const Ladder& L, const CVec& f, const CVec& g) {
    SpMat X(L.basis->size(), L.basis->size());
    for (size_t i = 0; i < L.a.size(); ++i) {
        if (f(i) != 0.0) X += f(i) * L.a[i];
        if (g(i) != 0.0) X += g(i) * L.ad[i];
    }
    return X;
}

SpMat A_of(const Ladder& L, const CVec& alpha) {
    return field_operator(L, alpha.conjugate(), -alpha);
}

SpMat build_quadratic(const Ladder& L, const CMat& k) {
    const int M = int(L.a.size());
    SpMat B(L.basis->size(), L.basis->size());
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (k(i, j) == 0.0) continue;
            B += (0.5 * k(i, j)) * SpMat(L.a[i] * L.a[j]);
            B -= (0.5 * std::conj(k(i, j))) * SpMat(L.ad[i] * L.ad[j]);
        }
    B.prune(cd(0.0));
    return B;
}

FockOperator build_quadratic(const CMat& k, const BasisPtr& basis) {
    if (!is_symmetric(k, 1e-12)) throw InputError("build_quadratic: k must be symmetric");
    Ladder L = build_ladder(basis);
    return {basis, build_quadratic(L, k)};
}

SpMat one_body(const Ladder& L, const CMat& h) {
    const int M = int(L.a.size());
    SpMat H(L.basis->size(), L.basis->size());
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            if (h(i, j) != 0.0) H += h(i, j) * SpMat(L.ad[i] * L.a[j]);
    return H;
}

SpMat interaction(const Ladder& L, const RMat& v) {
    const int M = int(L.a.size());
    SpMat V(L.basis->size(), L.basis->size());
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (v(i, j) == 0.0) continue;
            SpMat t = L.ad[i] * L.ad[j];
            SpMat u = L.a[j] * L.a[i];
            V += (0.5 * v(i, j)) * SpMat(t * u);
        }
    return V;
}

namespace {

double norm1(const CMat& X) { return X.cwiseAbs().colwise().sum().maxCoeff(); }

double norm1(const SpMat& X) {
    double best = 0.0;
    for (int j = 0; j < X.outerSize(); ++j) {
        double s = 0.0;
        for (SpMat::InnerIterator it(X, j); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

CMat taylor_exp(const CMat& Y) {
    const Eigen::Index n = Y.rows();
    CMat acc = CMat::Identity(n, n);
    CMat term = acc;
    for (int j = 1; j < 80; ++j) {
        term = term * Y / double(j);
        acc += term;
        if (norm1(term) < 1e-17 * norm1(acc)) break;
    }
    return acc;
}

}  // namespace

CMat expm_split(const CMat& X, int n_split) {
    int n = n_split;
    if (n <= 0) {
        double nx = norm1(X);
        n = 1;
        while (nx / n > 0.5) n *= 2;
    }
    CMat E = taylor_exp(X / double(n));
    // binary powering
    CMat result = CMat::Identity(X.rows(), X.cols());
    CMat base = E;
    int e = n;
    bool first = true;
    while (e > 0) {
        if (e & 1) {
            result = first ? base : CMat(result * base);
            first = false;
        }
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

FockOperator exp_B(const FockOperator& B, int n_split) {
    CMat E = expm_split(B.dense(), n_split);
    return {B.basis, E.sparseView(0.0, 0.0)};
}

CVec expv(const SpMat& X, const CVec& v, double t) {
    double nx = norm1(X) * std::abs(t);
    int s = std::max(1, int(std::ceil(nx)));
    double tau = t / s;
    CVec out = v;
    for (int step = 0; step < s; ++step) {
        CVec term = out, acc = out;
        for (int j = 1; j < 100; ++j) {
            term = (X * term) * (tau / j);
            acc += term;
            if (term.norm() <= 1e-17 * acc.norm()) break;
        }
        out = acc;
    }
    return out;
}

CVec ModeMap::modes_from_field(const Field& phi) const {
    require_same_grid(phi.grid, grid, "ModeMap");
    return phi.values * std::sqrt(grid.dx);
}

Field ModeMap::field_from_modes(const CVec& alpha) const {
    return Field(grid, alpha / std::sqrt(grid.dx));
}

CMat ModeMap::mode_matrix(const Kernel& k) const {
    require_same_grid(k.grid, grid, "ModeMap");
    return k.op();
}

Kernel ModeMap::kernel_from_mode(const CMat& m) const { return Kernel::from_op(grid, m); }

namespace {

double occupation_weight(const int* occ, int M, int n) {
    // sqrt(n! / prod n_i!)
    double lw = std::lgamma(n + 1.0);
    for (int i = 0; i < M; ++i) lw -= std::lgamma(occ[i] + 1.0);
    return std::exp(0.5 * lw);
}

}  // namespace

CVec ModeMap::slot1(const FockVector& v) const {
    const FockBasis& b = *v.basis;
    if (b.modes() != grid.n) throw InputError("ModeMap: mode count differs from grid size");
    CVec out(grid.n);
    std::vector<int> occ(grid.n, 0);
    for (int z = 0; z < grid.n; ++z) {
        occ.assign(grid.n, 0);
        occ[z] = 1;
        out(z) = v.coeffs(b.index_of(occ.data())) / std::sqrt(grid.dx);
    }
    return out;
}

std::vector<cd> ModeMap::slot3(const FockVector& v) const {
    const FockBasis& b = *v.basis;
    const int n = grid.n;
    if (b.modes() != n) throw InputError("ModeMap: mode count differs from grid size");
    if (b.cutoff() < 3) throw InputError("ModeMap: basis has no third slot");
    std::vector<cd> out(size_t(n) * n * n);
    std::vector<int> occ(n);
    const double s3 = std::pow(grid.dx, 1.5);
    for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c)
            for (int e = 0; e < n; ++e) {
                occ.assign(n, 0);
                occ[a]++, occ[c]++, occ[e]++;
                double w = occupation_weight(occ.data(), n, 3);
                out[(size_t(a) * n + c) * n + e] = v.coeffs(b.index_of(occ.data())) / (w * s3);
            }
    return out;
}

FockVector ModeMap::vector_from_slots(const BasisPtr& basis, const CVec& psi1,
                                      const std::vector<cd>& psi3) const {
    const FockBasis& b = *basis;
    const int n = grid.n;
    FockVector out{basis, CVec::Zero(b.size())};
    for (Eigen::Index s = b.level_begin(1); s < b.level_end(1); ++s) {
        const int* o = b.state(s);
        int z = int(std::find(o, o + n, 1) - o);
        out.coeffs(s) = psi1(z) * std::sqrt(grid.dx);
    }
    if (b.cutoff() >= 3 && !psi3.empty()) {
        const double s3 = std::pow(grid.dx, 1.5);
        for (Eigen::Index s = b.level_begin(3); s < b.level_end(3); ++s) {
            const int* o = b.state(s);
            int idx[3], m = 0;
            for (int z = 0; z < n; ++z)
                for (int r = 0; r < o[z]; ++r) idx[m++] = z;
            double w = occupation_weight(o, n, 3);
            out.coeffs(s) = psi3[(size_t(idx[0]) * n + idx[1]) * n + idx[2]] * w * s3;
        }
    }
    return out;
}

CVec restrict_to(const CVec& padded, const FockBasis& basis) {
    if (padded.size() < basis.size()) throw InputError("restrict_to: vector is smaller than basis");
    return padded.head(basis.size());
}

Eigen::Index slot_norm_count(const FockBasis& b, const CVec& v, int slot, double* norm2) {
    if (slot > b.cutoff()) {
        if (norm2) *norm2 = 0.0;
        return 0;
    }
    Eigen::Index lo = b.level_begin(slot), hi = b.level_end(slot);
    Eigen::Index nz = 0;
    double s = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i) {
        s += std::norm(v(i));
        if (v(i) != 0.0) ++nz;
    }
    if (norm2) *norm2 = s;
    return nz;
}

double poisson_tail(double N, int P) {
    if (N <= 0.0) return 0.0;
    // sum the upper tail directly to avoid cancellation in 1 - (1 - tail)
    double lp = -N + P * std::log(N) - std::lgamma(P + 1.0);
    double term = 0.0, tail = 0.0;
    for (int n = P + 1; n < P + 2000; ++n) {
        lp += std::log(N) - std::log(double(n));
        term = std::exp(lp);
        tail += term;
        if (n > N && term < 1e-300 + 1e-18 * tail) break;
    }
    return tail;
}

CoherentResult coherent_state(const CVec& alpha, double N, const BasisPtr& basis, int headroom) {
    const FockBasis& b = *basis;
    if (alpha.size() != b.modes()) throw InputError("coherent_state: mode count mismatch");
    if (std::abs(alpha.norm() - 1.0) > 1e-10) throw InputError("coherent_state: ||phi|| must be 1");
    if (N < 0.0) throw InputError("coherent_state: N must be >= 0");
    CoherentResult res;
    res.truncation_loss = poisson_tail(N, b.cutoff());
    if (res.truncation_loss > 1e-8)
        throw NumericError("coherent_state: Poisson tail " + std::to_string(res.truncation_loss) +
                           " above 1e-8 for P = " + std::to_string(b.cutoff()));
    auto padded = std::make_shared<FockBasis>(b.modes(), b.cutoff() + headroom);
    Ladder L = build_ladder(padded);
    CVec vac = CVec::Zero(padded->size());
    vac(0) = 1.0;
    CVec ex = expv(SpMat(-std::sqrt(N) * A_of(L, alpha)), vac);
    res.state = {basis, restrict_to(ex, b)};

    CVec slots(b.size());
    const double sN = std::sqrt(N);
    for (Eigen::Index s = 0; s < b.size(); ++s) {
        const int* o = b.state(s);
        cd c = std::exp(-0.5 * N);
        for (int i = 0; i < b.modes(); ++i)
            for (int r = 1; r <= o[i]; ++r) c *= sN * alpha(i) / std::sqrt(double(r));
        slots(s) = c;
    }
    res.slot_state = {basis, slots};
    res.agreement = (res.state.coeffs - slots).norm();
    if (res.agreement > 1e-8)
        throw NumericError("coherent_state: constructions disagree by " + std::to_string(res.agreement));
    return res;
}

double column_norm(const CMat& X, const FockBasis& b, int max_level) {
    max_level = std::min(max_level, b.cutoff());
    if (max_level < 0) return 0.0;
    Eigen::Index cols = b.level_end(max_level);
    CMat sub = X.leftCols(cols);
    if (sub.norm() == 0.0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(sub);
    return svd.singularValues()(0);
}

namespace {

// Probe columns are the basis states of level <= probe_level; each column is pushed through the
// exponentials on the padded basis and the result is read back on the rows of `basis`.
struct Probe {
    BasisPtr padded;
    Ladder L;
    Eigen::Index rows, cols;
    CVec unit(Eigen::Index c) const {
        CVec e = CVec::Zero(padded->size());
        e(c) = 1.0;
        return e;
    }
};

Probe make_probe(const FockBasis& b, int probe_level, int headroom) {
    Probe p;
    p.padded = std::make_shared<FockBasis>(b.modes(), b.cutoff() + headroom);
    p.L = build_ladder(p.padded);
    p.rows = b.size();
    p.cols = b.level_end(std::min(probe_level, b.cutoff()));
    return p;
}

double top_singular(const CMat& D) {
    if (D.norm() == 0.0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(D);
    return svd.singularValues()(0);
}

// e^{G} X e^{-G} on the probe columns
CMat conjugated_columns(const Probe& p, const SpMat& G, const SpMat& X) {
    CMat out(p.rows, p.cols);
    for (Eigen::Index c = 0; c < p.cols; ++c) {
        CVec w = expv(G, CVec(X * expv(G, p.unit(c), -1.0)));
        out.col(c) = w.head(p.rows);
    }
    return out;
}

CMat plain_columns(const Probe& p, const SpMat& X) {
    CMat out(p.rows, p.cols);
    for (Eigen::Index c = 0; c < p.cols; ++c) out.col(c) = (X * p.unit(c)).head(p.rows);
    return out;
}

}  // namespace

double conjugation_check(const CMat& k_mode, const BasisPtr& basis, int probe_level, int headroom) {
    const FockBasis& b = *basis;
    if (k_mode.rows() != b.modes()) throw InputError("conjugation_check: mode count mismatch");
    Probe p = make_probe(b, probe_level, headroom);
    const SpMat B = build_quadratic(p.L, k_mode);
    ShCh sc = sh_ch_block(k_mode);
    double worst = 0.0;
    for (int i = 0; i < b.modes(); ++i) {
        CMat lhs = conjugated_columns(p, B, p.L.a[i]);
        SpMat rhs = field_operator(p.L, sc.ch.col(i), sc.sh.col(i).conjugate());
        worst = std::max(worst, top_singular(lhs - plain_columns(p, rhs)));
    }
    return worst;
}

BlockMatrix BlockMatrix::from_full(const CMat& S) {
    const Eigen::Index M = S.rows() / 2;
    return {S.topLeftCorner(M, M), S.topRightCorner(M, M), S.bottomLeftCorner(M, M)};
}

CMat BlockMatrix::full() const {
    const Eigen::Index M = d.rows();
    CMat S(2 * M, 2 * M);
    S << d, k, l, -d.transpose();
    return S;
}

bool BlockMatrix::in_sp(double tol) const {
    double scale = std::max({1.0, k.cwiseAbs().maxCoeff(), l.cwiseAbs().maxCoeff()});
    return (k - k.transpose()).cwiseAbs().maxCoeff() <= tol * scale &&
           (l - l.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

double BlockMatrix::realness_defect() const {
    return basis_change_C(*this).imag().cwiseAbs().maxCoeff();
}

BlockMatrix bracket(const BlockMatrix& a, const BlockMatrix& b) {
    CMat A = a.full(), B = b.full();
    return BlockMatrix::from_full(A * B - B * A);
}

SpMat metaplectic(const Ladder& L, const BlockMatrix& S) {
    const int M = int(L.a.size());
    SpMat X(L.basis->size(), L.basis->size());
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
            if (S.k(i, j) != 0.0) X += (0.5 * S.k(i, j)) * SpMat(L.a[i] * L.a[j]);
            if (S.l(i, j) != 0.0) X -= (0.5 * S.l(i, j)) * SpMat(L.ad[i] * L.ad[j]);
            if (S.d(i, j) != 0.0)
                X -= (0.5 * S.d(i, j)) * (SpMat(L.a[i] * L.ad[j]) + SpMat(L.ad[j] * L.a[i]));
        }
    return X;
}

namespace {

CMat C_matrix(Eigen::Index M) {
    const double s = 1.0 / std::sqrt(2.0);
    const cd I(0.0, 1.0);
    CMat C = CMat::Zero(2 * M, 2 * M);
    for (Eigen::Index i = 0; i < M; ++i) {
        C(i, i) = s;
        C(i, M + i) = -I * s;
        C(M + i, i) = s;
        C(M + i, M + i) = I * s;
    }
    return C;
}

}  // namespace

CMat basis_change_C(const BlockMatrix& S) {
    CMat C = C_matrix(S.modes());
    return C.transpose() * S.full() * C.conjugate();
}

BlockMatrix basis_change_inverse(const CMat& X) {
    CMat C = C_matrix(X.rows() / 2);
    return BlockMatrix::from_full(C.conjugate() * X * C.transpose());
}

LieResiduals lie_checks(const BlockMatrix& S, const BlockMatrix& R, const CVec& f, const CVec& g,
                        const BasisPtr& basis, int probe_level, const BlockMatrix* S1,
                        int headroom) {
    const FockBasis& b = *basis;
    const int P = b.cutoff();
    const Eigen::Index M = b.modes();
    Ladder L = build_ladder(basis);
    LieResiduals res;
    SpMat IS = metaplectic(L, S), IR = metaplectic(L, R);
    SpMat Afg = field_operator(L, f, g);
    CVec fg(2 * M);
    fg << f, g;
    auto A_vec = [&](const CVec& w) { return field_operator(L, w.head(M), w.tail(M)); };

    CVec Sfg = S.full() * fg;
    res.lie1 = column_norm(CMat(commutator(IS, Afg) - A_vec(Sfg)), b, P - 3);
    res.lie2 = column_norm(CMat(commutator(IS, IR) - metaplectic(L, bracket(S, R))), b, P - 4);

    Probe p = make_probe(b, probe_level, headroom);
    const SpMat ISp = metaplectic(p.L, S);
    auto A_pad = [&](const CVec& w) { return field_operator(p.L, w.head(M), w.tail(M)); };
    CMat eS = expm_split(S.full()), eSi = expm_split(-S.full());
    res.grp1 = top_singular(conjugated_columns(p, ISp, A_pad(fg)) - plain_columns(p, A_pad(eS * fg)));
    BlockMatrix Rc = BlockMatrix::from_full(eS * R.full() * eSi);
    res.grp2 = top_singular(conjugated_columns(p, ISp, metaplectic(p.L, R)) -
                            plain_columns(p, metaplectic(p.L, Rc)));

    // S(t) = S + t S1 around t = 0, or S(t) = (1 + t) S without a direction
    const double h = 1e-4;
    auto S_at = [&](double t) {
        if (S1) return BlockMatrix{S.d + t * S1->d, S.k + t * S1->k, S.l + t * S1->l};
        double s = 1.0 + t;
        return BlockMatrix{s * S.d, s * S.k, s * S.l};
    };
    BlockMatrix Sp = S_at(h), Sm = S_at(-h);
    const SpMat Ip = metaplectic(p.L, Sp), Im = metaplectic(p.L, Sm);
    CMat gen = (expm_split(Sp.full()) - expm_split(Sm.full())) / (2.0 * h) * eSi;
    const SpMat rhs = metaplectic(p.L, BlockMatrix::from_full(gen));
    CMat D(p.rows, p.cols);
    for (Eigen::Index c = 0; c < p.cols; ++c) {
        CVec w = expv(ISp, p.unit(c), -1.0);
        CVec lhs = (expv(Ip, w) - expv(Im, w)) / (2.0 * h);
        D.col(c) = (lhs - rhs * p.unit(c)).head(p.rows);
    }
    res.grp3 = top_singular(D);
    return res;
}

}  // namespace pairex::fock
