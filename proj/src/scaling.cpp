#include "pairex/scaling.hpp"

#include "pairex/hartree.hpp"
#include "pairex/kernel_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace pairex::fock {

int auto_cutoff(double N, double loss_budget, int margin) {
    int P = 0;
    while (poisson_tail(N, P) >= loss_budget) ++P;
    return P + margin;
}

MeanFieldTrajectory mean_field_trajectory(const Field& phi0, const CMat& u0, const Potential& v,
                                          double dt, const std::vector<double>& times,
                                          Exchange ex, const PairOptions& opt) {
    std::vector<double> ts = times;
    std::sort(ts.begin(), ts.end());
    HartreeStepper full(v, dt), half(v, 0.5 * dt);
    HartreeState hs{phi0, 0.0};
    CMat U = u0;
    MeanFieldTrajectory out;
    long k = 0;
    for (double t : ts) {
        long target = std::lround(t / dt);
        if (std::abs(target * dt - t) > 1e-9 * std::max(1.0, t))
            throw InputError("scaling: output times must be multiples of dt");
        for (; k < target; ++k) {
            HartreeState mid = hs;
            half.step(mid);
            CoefficientSet c = build_coefficients(mid.phi, v, v.grid, ex);
            pair_step_op(U, c.G, c.M, dt, opt, nullptr);
            full.step(hs);
        }
        hs.t = k * dt;
        out.t.push_back(t);
        out.phi.push_back(hs.phi);
        out.u.push_back(U);
    }
    return out;
}

double phase_min_distance(const CVec& a, const CVec& b) {
    double d2 = a.squaredNorm() + b.squaredNorm() - 2.0 * std::abs(a.dot(b));
    return std::sqrt(std::max(d2, 0.0));
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

namespace {

constexpr int kMaxCutoff = 2000;

struct SectorExact {
    std::vector<Eigen::Index> begin;
    std::vector<CMat> vecs;
    std::vector<RVec> vals;

    CVec evolve(const CVec& psi0, double t) const {
        CVec out(psi0.size());
        for (size_t n = 0; n < vecs.size(); ++n) {
            Eigen::Index lo = begin[n], len = vecs[n].rows();
            CVec c = vecs[n].adjoint() * psi0.segment(lo, len);
            for (Eigen::Index i = 0; i < len; ++i) c(i) *= std::polar(1.0, -vals[n](i) * t);
            out.segment(lo, len) = vecs[n] * c;
        }
        return out;
    }
};

SectorExact sector_propagator(const FockBasis& b, const SpMat& H) {
    SectorExact se;
    CMat Hd;
    for (int n = 0; n <= b.cutoff(); ++n) {
        Eigen::Index lo = b.level_begin(n), len = b.level_end(n) - lo;
        CMat block = CMat(H.block(lo, lo, len, len));
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (block + block.adjoint()));
        se.begin.push_back(lo);
        se.vecs.push_back(es.eigenvectors());
        se.vals.push_back(es.eigenvalues());
    }
    return se;
}

struct Job {
    double N;
    std::vector<ScalingRow> rows;
    std::string error;
};

// Approximate states e^{-sqrt(N) A(phi)} e^{-B(k)} Omega on a basis of cutoff P_pad.
std::vector<CVec> approximate_states(const ScalingConfig& cfg, const MeanFieldTrajectory& mf,
                                     double N, int P_pad, bool with_pair) {
    auto padded = std::make_shared<FockBasis>(cfg.grid.n, P_pad);
    Ladder Lp = build_ladder(padded);
    ModeMap mm(cfg.grid);
    CVec vac = CVec::Zero(padded->size());
    vac(0) = 1.0;
    const double sN = std::sqrt(N);
    std::vector<CVec> out;
    for (size_t i = 0; i < mf.t.size(); ++i) {
        CVec x = vac;
        const CMat& U = mf.u[i];
        if (with_pair && U.norm() > 0.0) {
            Kernel u = Kernel::from_op(cfg.grid, 0.5 * (U + U.transpose()));
            u.symmetry = Symmetry::Symmetric;
            Kernel k = inverse_sh(u);
            x = expv(SpMat(-build_quadratic(Lp, k.op())), x);
        }
        x = expv(SpMat(-sN * A_of(Lp, mm.modes_from_field(mf.phi[i]))), x);
        out.push_back(x);
    }
    return out;
}

// weight of v above level P
double tail_above(const FockBasis& b, const CVec& v, int P) {
    if (P >= b.cutoff()) return 0.0;
    return v.tail(v.size() - b.level_end(P)).squaredNorm() / v.squaredNorm();
}

void run_job(Job& job, const ScalingConfig& cfg, const Potential& v,
             const MeanFieldTrajectory& mf, const std::vector<double>& fvals,
             const std::vector<double>& gvals) {
    const double N = job.N;
    int P = cfg.cutoff > 0 ? cfg.cutoff : auto_cutoff(N, cfg.loss_budget, cfg.cutoff_margin);
    double tail = poisson_tail(N, P);
    if (tail > cfg.loss_budget)
        throw NumericError("scaling: Poisson tail " + std::to_string(tail) + " for N = " +
                           std::to_string(N) + " exceeds the budget at P = " + std::to_string(P));

    // With an automatic cutoff, P grows until the squeezed states also fit the budget.
    std::vector<CVec> pair_states, coh_states;
    std::shared_ptr<FockBasis> padded;
    for (;;) {
        const int P_pad = P + cfg.headroom;
        padded = std::make_shared<FockBasis>(cfg.grid.n, P_pad);
        pair_states = approximate_states(cfg, mf, N, P_pad, true);
        if (cfg.cutoff > 0) break;
        int need = P;
        for (const auto& x : pair_states)
            while (need < P_pad && tail_above(*padded, x, need) >= cfg.loss_budget) ++need;
        if (need == P) break;
        if (need > kMaxCutoff)
            throw NumericError("scaling: no cutoff up to " + std::to_string(kMaxCutoff) +
                               " meets the truncation budget");
        P = need;
    }
    coh_states = approximate_states(cfg, mf, N, P + cfg.headroom, false);
    auto basis = std::make_shared<FockBasis>(cfg.grid.n, P);
    Ladder L = build_ladder(basis);
    const RMat Lop = minus_laplacian_op(cfg.grid);
    // interaction() already carries the 1/2: H = sum L a*a + (sign / N) V
    SpMat H = one_body(L, Lop.cast<cd>()) + (cfg.interaction_sign / N) * interaction(L, v.v);
    SectorExact ex = sector_propagator(*basis, H);

    CVec psi0 = restrict_to(pair_states[0], *basis);
    for (size_t i = 0; i < mf.t.size(); ++i) {
        ScalingRow r;
        r.N = N;
        r.t = mf.t[i];
        r.cutoff = P;
        r.basis_size = long(basis->size());
        const CVec& full = pair_states[i];
        CVec a = restrict_to(full, *basis);
        CVec c = restrict_to(coh_states[i], *basis);
        CVec e = ex.evolve(psi0, mf.t[i]);
        r.truncation_loss = std::max(0.0, 1.0 - a.squaredNorm() / full.squaredNorm());
        r.distance = phase_min_distance(a, e);
        r.control_distance = phase_min_distance(c, e);
        r.u_norm = mf.u[i].norm();
        r.f = fvals[i];
        r.g = gvals[i];
        job.rows.push_back(r);
    }
}

double value_at(const std::vector<ScalingRow>& rows, double N, double t, bool control) {
    for (const auto& r : rows)
        if (r.N == N && std::abs(r.t - t) < 1e-12) return control ? r.control_distance : r.distance;
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ScalingResult n_scaling_study(const ScalingConfig& cfg) {
    cfg.grid.validate();
    if (cfg.alpha0.size() != cfg.grid.n) throw InputError("scaling: alpha0 must have one entry per mode");
    if (cfg.N_list.empty()) throw InputError("scaling: N_list is empty");
    Potential v = Potential::build(cfg.grid, cfg.potential);
    ModeMap mm(cfg.grid);
    CVec a0 = cfg.alpha0 / cfg.alpha0.norm();
    Field phi0 = mm.field_from_modes(a0);
    const CMat U0 = CMat::Zero(cfg.grid.n, cfg.grid.n);
    MeanFieldTrajectory mf =
        mean_field_trajectory(phi0, U0, v, cfg.dt, cfg.times, cfg.exchange, cfg.pair);

    std::vector<double> fvals(mf.t.size(), 0.0), gvals(mf.t.size(), 0.0);
    if (cfg.functionals && cfg.grid.n <= 6) {
        auto small = std::make_shared<FockBasis>(cfg.grid.n, 5);
        for (size_t i = 0; i < mf.t.size(); ++i) {
            Kernel u = Kernel::from_op(cfg.grid, mf.u[i]);
            u.symmetry = Symmetry::Symmetric;
            Kernel k = mf.u[i].norm() > 0 ? inverse_sh(u) : Kernel(cfg.grid, CMat::Zero(cfg.grid.n, cfg.grid.n), Symmetry::Symmetric);
            fvals[i] = cubic_error_closed_form(mf.phi[i], k, v).norm();
            gvals[i] = std::numeric_limits<double>::quiet_NaN();
            for (int h : {24, 48, 96, 160}) {
                try {
                    gvals[i] = quartic_oracle(mf.phi[i], k, v, small, h).padded.norm();
                    break;
                } catch (const NumericError&) {
                }
            }
        }
    }

    std::vector<double> Ns = cfg.N_list;
    std::sort(Ns.begin(), Ns.end());
    std::vector<Job> jobs(Ns.size());
    for (size_t i = 0; i < Ns.size(); ++i) jobs[i].N = Ns[i];
    auto guarded = [&](Job& j) {
        try {
            run_job(j, cfg, v, mf, fvals, gvals);
        } catch (const std::exception& e) {
            j.error = e.what();
        }
    };
    if (cfg.serial || jobs.size() == 1) {
        for (auto& j : jobs) guarded(j);
    } else {
        std::vector<std::thread> th;
        for (auto& j : jobs) th.emplace_back(guarded, std::ref(j));
        for (auto& t : th) t.join();
    }
    ScalingResult res;
    for (auto& j : jobs) {
        if (!j.error.empty()) throw NumericError(j.error);
        res.rows.insert(res.rows.end(), j.rows.begin(), j.rows.end());
    }

    auto& s = res.summary;
    std::vector<double> lx, ly, lyc;
    for (double N : Ns) {
        double d = value_at(res.rows, N, cfg.t_fit, false);
        double dc = value_at(res.rows, N, cfg.t_fit, true);
        if (std::isfinite(d) && d > 0) {
            lx.push_back(std::log(N));
            ly.push_back(std::log(d));
            lyc.push_back(std::log(dc));
        }
    }
    s.exponent = fit_slope(lx, ly);
    s.control_exponent = fit_slope(lx, lyc);
    for (size_t i = 0; i + 1 < Ns.size(); ++i)
        s.ratios.push_back(value_at(res.rows, Ns[i], cfg.t_fit, false) /
                           value_at(res.rows, Ns[i + 1], cfg.t_fit, false));
    std::vector<double> tx, ty, tyc;
    for (const auto& r : res.rows) {
        s.max_truncation_loss = std::max(s.max_truncation_loss, r.truncation_loss);
        if (r.N == cfg.envelope_N && r.t >= cfg.envelope_t0 - 1e-12 &&
            r.t <= cfg.envelope_t1 + 1e-12 && r.distance > 0) {
            tx.push_back(std::log(r.t));
            ty.push_back(std::log(r.distance));
            tyc.push_back(std::log(r.control_distance));
        }
    }
    s.envelope_slope = fit_slope(tx, ty);
    s.control_envelope_slope = fit_slope(tx, tyc);
    return res;
}

}  // namespace pairex::fock
