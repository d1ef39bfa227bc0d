#include "secoff/subsolver.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace secoff::subsolver {

namespace {

constexpr double kLn2 = 0.6931471805599453;

using transform::ConvexSubproblem;

/// One generalized inequality g(x) - shift*s <= 0 in full variable space.
struct Row {
    enum Kind { affine, logcap, expcap } kind = affine;
    VectorXd a;       // affine coefficients
    double rhs = 0.0;
    int vi = -1, vj = -1;
    bool shifted = true;  // participates in the phase-I relaxation
    int slot = -1;        // multiplier slot in the public solution, -1 internal

    double value(const VectorXd& x) const {
        switch (kind) {
            case affine: return a.dot(x) - rhs;
            case logcap: return x[vi] - std::log1p(x[vj]) / kLn2;
            case expcap: return std::exp2(x[vi]) - x[vj];
        }
        return 0.0;
    }
    bool in_domain(const VectorXd& x) const {
        return kind != logcap || x[vj] > -1.0 + 1e-300;
    }
};

/// Barrier-method working state. Operates on full-length vectors; Newton
/// steps move only the free coordinates (plus the phase-I slack when active).
struct Engine {
    const ConvexSubproblem& sub;
    const Options& opts;
    std::vector<Row> rows;
    std::vector<int> free_idx;   // full indices of free variables
    bool phase1 = false;
    double s = 0.0;              // phase-I slack value

    int newton_steps = 0;
    bool numeric_failure = false;

    Engine(const ConvexSubproblem& sub_, const Options& opts_)
        : sub(sub_), opts(opts_) {}

    int dim() const { return static_cast<int>(free_idx.size()) + (phase1 ? 1 : 0); }

    double slack(const Row& r, const VectorXd& x) const {
        double g = r.value(x);
        return (phase1 && r.shifted) ? s - g : -g;
    }

    bool strictly_feasible(const VectorXd& x, double margin) const {
        for (const auto& r : rows)
            if (!r.in_domain(x) || slack(r, x) <= margin) return false;
        return true;
    }

    // Objective of the current phase (excludes the barrier).
    double fval(const VectorXd& x) const {
        return phase1 ? s : sub.objective(x);
    }

    // Gradient of the phase objective over (free coords [, s]).
    VectorXd fgrad(const VectorXd& x) const {
        VectorXd g = VectorXd::Zero(dim());
        if (phase1) {
            g[dim() - 1] = 1.0;
            return g;
        }
        VectorXd full = sub.objective_gradient(x);
        for (int i = 0; i < static_cast<int>(free_idx.size()); ++i)
            g[i] = full[free_idx[i]];
        return g;
    }

    double barrier(const VectorXd& x) const {
        double phi = 0.0;
        for (const auto& r : rows) {
            double sl = slack(r, x);
            if (sl <= 0.0) return std::numeric_limits<double>::infinity();
            phi -= std::log(sl);
        }
        return phi;
    }

    // grad and Hessian of t*f + barrier over (free coords [, s]).
    void assemble(double t, const VectorXd& x, VectorXd& grad, MatrixXd& hess) const {
        const int nf = static_cast<int>(free_idx.size());
        const int d = dim();
        grad = t * fgrad(x);
        hess = MatrixXd::Zero(d, d);

        if (!phase1) {
            for (int i = 0; i < nf; ++i) {
                double c = sub.cubic[free_idx[i]];
                if (c != 0.0) hess(i, i) += t * 6.0 * c * x[free_idx[i]];
            }
            for (const auto& q : sub.squares) {
                // Penalty rows are sparse; gather their free support.
                for (int i = 0; i < nf; ++i) {
                    double ri = q.r[free_idx[i]];
                    if (ri == 0.0) continue;
                    for (int j = 0; j < nf; ++j) {
                        double rj = q.r[free_idx[j]];
                        if (rj != 0.0) hess(i, j) += t * 2.0 * q.weight * ri * rj;
                    }
                }
            }
        }

        std::vector<int> pos(sub.layout.n, -1);
        for (int i = 0; i < nf; ++i) pos[free_idx[i]] = i;

        VectorXd gr = VectorXd::Zero(d);
        for (const auto& r : rows) {
            double sl = slack(r, x);
            double inv = 1.0 / sl;
            double inv2 = inv * inv;
            gr.setZero();
            switch (r.kind) {
                case Row::affine:
                    for (int i = 0; i < nf; ++i) {
                        double ai = r.a[free_idx[i]];
                        if (ai != 0.0) gr[i] = ai;
                    }
                    break;
                case Row::logcap: {
                    int pi = pos[r.vi], pj = pos[r.vj];
                    double dj = -1.0 / (kLn2 * (1.0 + x[r.vj]));
                    if (pi >= 0) gr[pi] = 1.0;
                    if (pj >= 0) {
                        gr[pj] = dj;
                        hess(pj, pj) += inv / (kLn2 * (1.0 + x[r.vj]) * (1.0 + x[r.vj]));
                    }
                    break;
                }
                case Row::expcap: {
                    int pi = pos[r.vi], pj = pos[r.vj];
                    double di = kLn2 * std::exp2(x[r.vi]);
                    if (pi >= 0) {
                        gr[pi] = di;
                        hess(pi, pi) += inv * kLn2 * di;
                    }
                    if (pj >= 0) gr[pj] = -1.0;
                    break;
                }
            }
            if (phase1 && r.shifted) gr[d - 1] = -1.0;
            grad += inv * gr;
            hess += inv2 * (gr * gr.transpose());
        }
    }

    // Newton iterations at fixed t. Returns false on numeric breakdown.
    // stop_early: phase-I bail once s is comfortably negative.
    bool center(double t, VectorXd& x, double gtol, double early_margin) {
        VectorXd grad;
        MatrixXd hess;
        while (newton_steps < opts.max_newton) {
            if (phase1 && s <= -early_margin) return true;
            assemble(t, x, grad, hess);
            if (!grad.allFinite() || !hess.allFinite()) {
                numeric_failure = true;
                return false;
            }
            if (grad.lpNorm<Eigen::Infinity>() <= gtol) return true;

            VectorXd step;
            double ridge = 0.0;
            for (int attempt = 0;; ++attempt) {
                MatrixXd h = hess;
                if (ridge > 0.0) h.diagonal().array() += ridge;
                Eigen::LDLT<MatrixXd> ldlt(h);
                step = ldlt.solve(-grad);
                bool ok = ldlt.info() == Eigen::Success && step.allFinite() &&
                          grad.dot(step) < 0.0;
                if (ok) break;
                if (attempt >= 3) {
                    numeric_failure = true;
                    return false;
                }
                double scale = hess.diagonal().cwiseAbs().maxCoeff();
                ridge = ridge == 0.0 ? 1e-12 * std::max(1.0, scale) : ridge * 1e4;
            }

            double dec = -grad.dot(step);
            ++newton_steps;

            // Backtrack to strict feasibility, then Armijo.
            const int nf = static_cast<int>(free_idx.size());
            double f0 = t * fval(x) + barrier(x);
            double stepsize = 1.0;
            VectorXd xs = x;
            double ss = s;
            bool moved = false;
            double saved_s = s;
            while (stepsize > 1e-18) {
                for (int i = 0; i < nf; ++i)
                    xs[free_idx[i]] = x[free_idx[i]] + stepsize * step[i];
                if (phase1) ss = saved_s + stepsize * step[dim() - 1];
                s = ss;
                bool feas = strictly_feasible(xs, 0.0);
                double f1 = feas ? t * fval(xs) + barrier(xs)
                                 : std::numeric_limits<double>::infinity();
                s = saved_s;
                double wanted = f0 - opts.ls_alpha * stepsize * dec;
                bool noise_floor = opts.ls_alpha * stepsize * dec <
                                   1e-12 * (1.0 + std::abs(f0));
                if (feas && (f1 <= wanted || (noise_floor && f1 <= f0 + 1e-12 * (1.0 + std::abs(f0))))) {
                    x = xs;
                    s = ss;
                    moved = true;
                    break;
                }
                stepsize *= opts.ls_beta;
            }
            if (!moved) return true;  // stalled at the achievable precision
            if (dec * 0.5 <= 1e-16 * (1.0 + std::abs(f0))) return true;
        }
        return true;  // budget exhausted; caller checks newton_steps
    }
};

/// Lawson-Hanson non-negative least squares: argmin ||A y - b|| over y >= 0.
/// Deterministic; sizes here are tiny.
VectorXd nnls(const MatrixXd& A, const VectorXd& b, int max_outer = 200) {
    const int m = static_cast<int>(A.cols());
    VectorXd y = VectorXd::Zero(m);
    std::vector<char> passive(m, 0);
    auto solve_passive = [&](VectorXd& s) {
        std::vector<int> idx;
        for (int i = 0; i < m; ++i)
            if (passive[i]) idx.push_back(i);
        s = VectorXd::Zero(m);
        if (idx.empty()) return;
        MatrixXd ap(A.rows(), idx.size());
        for (size_t j = 0; j < idx.size(); ++j) ap.col(j) = A.col(idx[j]);
        MatrixXd ata = ap.transpose() * ap;
        ata.diagonal().array() += 1e-14 * std::max(1.0, ata.diagonal().maxCoeff());
        VectorXd sp = Eigen::LDLT<MatrixXd>(ata).solve(ap.transpose() * b);
        for (size_t j = 0; j < idx.size(); ++j) s[idx[j]] = sp[j];
    };
    for (int outer = 0; outer < max_outer; ++outer) {
        VectorXd w = A.transpose() * (b - A * y);
        int best = -1;
        double wmax = 1e-12 * std::max(1.0, b.norm());
        for (int i = 0; i < m; ++i)
            if (!passive[i] && w[i] > wmax) { wmax = w[i]; best = i; }
        if (best < 0) break;
        passive[best] = 1;
        VectorXd s;
        for (int inner = 0; inner < max_outer; ++inner) {
            solve_passive(s);
            double smin = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i)
                if (passive[i]) smin = std::min(smin, s[i]);
            if (smin > 0.0) break;
            double alpha = 1.0;
            for (int i = 0; i < m; ++i)
                if (passive[i] && s[i] <= 0.0 && y[i] - s[i] > 0.0)
                    alpha = std::min(alpha, y[i] / (y[i] - s[i]));
            y += alpha * (s - y);
            for (int i = 0; i < m; ++i)
                if (passive[i] && y[i] <= 1e-300) { passive[i] = 0; y[i] = 0.0; }
        }
        y = s.cwiseMax(0.0);
    }
    return y;
}

void append_bound_box(std::vector<Row>& rows, const VectorXd& x0,
                      const std::vector<int>& free_idx, int n) {
    double radius = 1e3 * (1.0 + x0.cwiseAbs().maxCoeff());
    for (int idx : free_idx) {
        Row lo;
        lo.a = VectorXd::Zero(n);
        lo.a[idx] = -1.0;
        lo.rhs = radius - x0[idx];
        lo.shifted = false;
        rows.push_back(lo);
        Row hi;
        hi.a = VectorXd::Zero(n);
        hi.a[idx] = 1.0;
        hi.rhs = radius + x0[idx];
        hi.shifted = false;
        rows.push_back(hi);
    }
}

}  // namespace

double kkt_residual(const ConvexSubproblem& sub, const VectorXd& x,
                    const VectorXd& multipliers) {
    const int n_rows = static_cast<int>(sub.rows.size() + sub.log_rows.size() +
                                        sub.exp_rows.size());
    if (multipliers.size() != n_rows)
        throw std::invalid_argument("kkt_residual: multiplier length mismatch");

    VectorXd stat = sub.objective_gradient(x);
    double primal = 0.0, comp = 0.0;
    int slot = 0;
    auto absorb = [&](double g, const VectorXd& grad_g) {
        double lam = multipliers[slot++];
        stat += lam * grad_g;
        primal = std::max(primal, g);
        comp = std::max(comp, std::abs(lam * g));
    };
    for (const auto& r : sub.rows) absorb(r.a.dot(x) - r.rhs, r.a);
    for (const auto& r : sub.log_rows) {
        VectorXd g = VectorXd::Zero(x.size());
        g[r.rate_var] = 1.0;
        g[r.arg_var] = -1.0 / (kLn2 * (1.0 + x[r.arg_var]));
        absorb(x[r.rate_var] - std::log1p(x[r.arg_var]) / kLn2, g);
    }
    for (const auto& r : sub.exp_rows) {
        VectorXd g = VectorXd::Zero(x.size());
        g[r.rate_var] = kLn2 * std::exp2(x[r.rate_var]);
        g[r.cap_var] = -1.0;
        absorb(std::exp2(x[r.rate_var]) - x[r.cap_var], g);
    }
    double stat_norm = 0.0;
    for (int i = 0; i < x.size(); ++i)
        if (!(i < static_cast<int>(sub.is_fixed.size()) && sub.is_fixed[i]))
            stat_norm = std::max(stat_norm, std::abs(stat[i]));
    return std::max({stat_norm, primal, comp});
}

Solution solve(const ConvexSubproblem& sub, const VectorXd& x0,
               const Options& opts) {
    const int n = sub.layout.n;
    if (x0.size() != n) throw std::invalid_argument("solve: x0 length mismatch");

    Solution out;
    out.x = x0;
    for (int i = 0; i < n; ++i)
        if (sub.is_fixed[i]) out.x[i] = sub.fixed_value[i];

    // Materialize rows; rows with no free support must hold at the pinned
    // values and then never change.
    std::vector<Row> rows;
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
        if (!sub.is_fixed[i]) free_idx.push_back(i);

    int slot = 0;
    const int total_slots = static_cast<int>(sub.rows.size() + sub.log_rows.size() +
                                             sub.exp_rows.size());
    out.multipliers = VectorXd::Zero(total_slots);
    for (const auto& ar : sub.rows) {
        Row r;
        r.kind = Row::affine;
        r.a = ar.a;
        r.rhs = ar.rhs;
        r.slot = slot++;
        bool has_free = false;
        for (int idx : free_idx)
            if (r.a[idx] != 0.0) { has_free = true; break; }
        if (!has_free) {
            if (r.value(out.x) > 1e-9) {
                out.status = Status::degenerate;
                return out;
            }
            continue;
        }
        rows.push_back(std::move(r));
    }
    for (const auto& lr : sub.log_rows) {
        Row r;
        r.kind = Row::logcap;
        r.vi = lr.rate_var;
        r.vj = lr.arg_var;
        r.slot = slot++;
        rows.push_back(std::move(r));
    }
    for (const auto& er : sub.exp_rows) {
        Row r;
        r.kind = Row::expcap;
        r.vi = er.rate_var;
        r.vj = er.cap_var;
        r.slot = slot++;
        rows.push_back(std::move(r));
    }

    const double tol = opts.tol;
    const double t_target = 100.0 / tol;
    const double t_grow = 1.0 / opts.barrier_decrease;

    // Unconstrained corner case: plain Newton on the objective.
    if (rows.empty()) {
        Engine eng(sub, opts);
        eng.free_idx = free_idx;
        eng.center(1.0, out.x, 0.2 * tol, 0.0);
        out.newton_iterations = eng.newton_steps;
        out.objective = sub.objective(out.x);
        out.kkt = kkt_residual(sub, out.x, out.multipliers);
        out.status = eng.numeric_failure ? Status::degenerate
                     : out.kkt <= tol    ? Status::optimal
                                         : Status::max_iterations;
        return out;
    }

    Engine eng(sub, opts);
    eng.rows = rows;
    eng.free_idx = free_idx;

    // Phase I when the start is not strictly interior.
    if (!eng.strictly_feasible(out.x, 0.0)) {
        Engine p1(sub, opts);
        p1.rows = rows;
        append_bound_box(p1.rows, out.x, free_idx, n);
        p1.free_idx = free_idx;
        p1.phase1 = true;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& r : p1.rows)
            if (r.shifted) worst = std::max(worst, r.value(out.x));
        p1.s = worst + 1.0 + 0.1 * std::abs(worst);

        VectorXd x = out.x;
        double t = 1.0;
        const double margin = 1e-6;
        while (true) {
            if (!p1.center(t, x, 1e-6 * std::max(1.0, t), margin)) break;
            if (p1.s <= -1e-12 || p1.newton_steps >= opts.max_newton) break;
            if (t > 1e12) break;
            t *= t_grow;
        }
        out.used_phase1 = true;
        out.newton_iterations += p1.newton_steps;
        if (p1.numeric_failure || p1.s >= 0.0) {
            out.x = x;
            out.objective = sub.objective(out.x);
            out.status = Status::degenerate;
            return out;
        }
        out.x = x;
    }

    // Phase II: follow the central path to t_target.
    // Initial t from the least-squares multiplier fit at the start; exact at
    // a re-supplied optimum, conservative elsewhere.
    double t0 = 1.0;
    {
        VectorXd fg = eng.fgrad(out.x);
        VectorXd v = VectorXd::Zero(eng.dim());
        for (const auto& r : rows) {
            double sl = eng.slack(r, out.x);
            VectorXd gr = VectorXd::Zero(eng.dim());
            switch (r.kind) {
                case Row::affine:
                    for (int i = 0; i < static_cast<int>(free_idx.size()); ++i)
                        gr[i] = r.a[free_idx[i]];
                    break;
                case Row::logcap:
                case Row::expcap: {
                    // Reuse assemble()'s conventions via finite support.
                    for (int i = 0; i < static_cast<int>(free_idx.size()); ++i) {
                        int fi = free_idx[i];
                        if (r.kind == Row::logcap) {
                            if (fi == r.vi) gr[i] = 1.0;
                            if (fi == r.vj)
                                gr[i] = -1.0 / (kLn2 * (1.0 + out.x[r.vj]));
                        } else {
                            if (fi == r.vi) gr[i] = kLn2 * std::exp2(out.x[r.vi]);
                            if (fi == r.vj) gr[i] = -1.0;
                        }
                    }
                    break;
                }
            }
            v += gr / sl;
        }
        double fg2 = fg.squaredNorm();
        if (fg2 > 0.0) {
            double fit = -fg.dot(v) / fg2;
            if (fit > 0.0 && (fit * fg + v).norm() <= 0.3 * v.norm())
                t0 = std::clamp(fit, 1.0, t_target);
        }
    }

    double t = t0;
    while (true) {
        double gtol = 1e-6 * std::max(1.0, t);
        if (!eng.center(t, out.x, gtol, 0.0)) break;
        if (t >= t_target || eng.newton_steps >= opts.max_newton) break;
        t = std::min(t * t_grow, t_target);
    }

    for (const auto& r : rows) {
        double sl = eng.slack(r, out.x);
        out.multipliers[r.slot] = 1.0 / (t * sl);
    }
    out.newton_iterations += eng.newton_steps;
    out.objective = sub.objective(out.x);
    out.kkt = kkt_residual(sub, out.x, out.multipliers);

    // The barrier-implied multipliers carry the boundary-gradient noise floor.
    // A least-squares refit over the near-active rows certifies the point to
    // full precision; keep it only when it measures better.
    {
        const int nf = static_cast<int>(free_idx.size());
        std::vector<const Row*> active;
        double lam_max = 0.0;
        for (const auto& r : rows)
            lam_max = std::max(lam_max, out.multipliers[r.slot]);
        for (const auto& r : rows)
            if (out.multipliers[r.slot] >= 1e-5 * std::max(1.0, lam_max))
                active.push_back(&r);

        VectorXd fg = VectorXd::Zero(nf);
        {
            VectorXd full = sub.objective_gradient(out.x);
            for (int i = 0; i < nf; ++i) fg[i] = full[free_idx[i]];
        }
        auto grad_of = [&](const Row& r) {
            VectorXd g = VectorXd::Zero(nf);
            for (int i = 0; i < nf; ++i) {
                int fi = free_idx[i];
                switch (r.kind) {
                    case Row::affine: g[i] = r.a[fi]; break;
                    case Row::logcap:
                        if (fi == r.vi) g[i] = 1.0;
                        if (fi == r.vj) g[i] = -1.0 / (kLn2 * (1.0 + out.x[r.vj]));
                        break;
                    case Row::expcap:
                        if (fi == r.vi) g[i] = kLn2 * std::exp2(out.x[r.vi]);
                        if (fi == r.vj) g[i] = -1.0;
                        break;
                }
            }
            return g;
        };

        if (!active.empty()) {
            const int na = static_cast<int>(active.size());
            MatrixXd a_mat(nf, na);
            for (int j = 0; j < na; ++j) a_mat.col(j) = grad_of(*active[j]);
            VectorXd lam = nnls(a_mat, -fg);
            if (lam.allFinite()) {
                VectorXd refined = out.multipliers;
                for (int j = 0; j < na; ++j) refined[active[j]->slot] = lam[j];
                double kkt2 = kkt_residual(sub, out.x, refined);
                if (kkt2 < out.kkt) {
                    out.multipliers = refined;
                    out.kkt = kkt2;
                }
            }
        }
    }
    out.status = eng.numeric_failure          ? Status::degenerate
                 : out.kkt <= tol             ? Status::optimal
                 : eng.newton_steps >= opts.max_newton ? Status::max_iterations
                                                       : Status::degenerate;
    return out;
}

}  // namespace secoff::subsolver
