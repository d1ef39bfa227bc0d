#include "secoff/transform.hpp"

#include <cmath>
#include <stdexcept>

#include "secoff/model.hpp"

namespace secoff::transform {

namespace {

constexpr double kPowerFloor = 1e-9;

VectorXd unit_row(int n, int i, double v) {
    VectorXd a = VectorXd::Zero(n);
    a[i] = v;
    return a;
}

}  // namespace

double ConvexSubproblem::objective(const VectorXd& x) const {
    double f = linear.dot(x);
    for (int i = 0; i < cubic.size(); ++i)
        if (cubic[i] != 0.0) f += cubic[i] * x[i] * x[i] * x[i];
    for (const auto& q : squares) {
        double r = q.r.dot(x) + q.s;
        f += q.weight * r * r;
    }
    return f;
}

VectorXd ConvexSubproblem::objective_gradient(const VectorXd& x) const {
    VectorXd g = linear;
    for (int i = 0; i < cubic.size(); ++i)
        if (cubic[i] != 0.0) g[i] += 3.0 * cubic[i] * x[i] * x[i];
    for (const auto& q : squares)
        g += 2.0 * q.weight * (q.r.dot(x) + q.s) * q.r;
    return g;
}

std::pair<Allocation, AuxPoint> init_point(const SystemConfig& cfg,
                                           const ChannelRealization& ch,
                                           const TransformOptions& opts) {
    cfg.validate();
    const int n = cfg.users;
    const double bits_per_rate = cfg.bits_per_rate_unit();

    Allocation alloc = Allocation::zeros(n);
    alloc.local_bits = 0.5 * cfg.task_bits;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            if (k != l) alloc.beta(k, l) = k < l ? 1.0 : 0.0;
    alloc.power_w = VectorXd::Constant(n, kPowerFloor);

    // The achievable rate at a candidate power, under the current other-user
    // powers: secrecy-capped for the full problem, plain capacity without Eve.
    auto rate_at = [&](VectorXd& p, int k, double cand) {
        p[k] = cand;
        if (opts.secrecy) return model::max_secret_rate(p, alloc.beta, ch, cfg, k);
        double gamma = ch.tau[k] * cand /
                       model::interference_plus_one(p, alloc.beta, ch, k);
        return std::log2(1.0 + gamma);
    };

    // Round-robin bisection for the smallest power meeting each user's
    // offloading requirement, iterated to a fixed point.
    for (int round = 0; round < 50; ++round) {
        double moved = 0.0;
        for (int k = 0; k < n; ++k) {
            double required =
                (cfg.task_bits[k] - alloc.local_bits[k]) / bits_per_rate;
            VectorXd p = alloc.power_w;
            double target;
            if (required <= 0.0) {
                target = kPowerFloor;
            } else {
                double hi = 1e-6;
                while (rate_at(p, k, hi) < required && hi < 1e9) hi *= 4.0;
                if (rate_at(p, k, hi) < required) {
                    // Secrecy cap saturates below the requirement: full local.
                    alloc.local_bits[k] = cfg.task_bits[k];
                    target = kPowerFloor;
                } else {
                    double lo = 0.0;
                    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                        double mid = 0.5 * (lo + hi);
                        (rate_at(p, k, mid) >= required ? hi : lo) = mid;
                    }
                    target = std::max(hi, kPowerFloor);
                }
            }
            moved = std::max(moved, std::abs(target - alloc.power_w[k]));
            alloc.power_w[k] = target;
        }
        if (moved <= 1e-12) break;
    }

    AuxPoint aux;
    aux.b.resize(n);
    aux.pi.resize(n);
    aux.phi.resize(n);
    aux.u.resize(n);
    aux.w.resize(n);
    aux.delta_s.resize(n);
    aux.mu = alloc.beta;

    VectorXd gamma = model::sinr_vector(alloc.power_w, alloc.beta, ch);
    for (int k = 0; k < n; ++k) {
        double required =
            std::max(0.0, (cfg.task_bits[k] - alloc.local_bits[k]) / bits_per_rate);
        alloc.secret_rate[k] = required;
        alloc.codeword_rate[k] = std::log2(1.0 + gamma[k]);
        aux.b[k] = gamma[k];
        aux.pi[k] = model::interference_plus_one(alloc.power_w, alloc.beta, ch, k);
        aux.delta_s[k] = std::exp2(alloc.secret_rate[k]);
        aux.u[k] = aux.pi[k] * aux.delta_s[k];
        aux.w[k] = alloc.power_w[k] * aux.u[k];
        aux.phi[k] =
            (aux.pi[k] + ch.tau[k] * alloc.power_w[k] - aux.u[k]) / aux.w[k];
    }
    if (!opts.secrecy) alloc.secret_rate = alloc.codeword_rate;
    return {alloc, aux};
}

VectorXd pack_point(const Allocation& alloc, const AuxPoint& aux,
                    const SystemConfig& cfg) {
    const int n = alloc.users();
    VarLayout lay(n);
    VectorXd x = VectorXd::Zero(lay.n);
    const double bits_per_rate = cfg.bits_per_rate_unit();
    for (int k = 0; k < n; ++k) {
        x[lay.local(k)] = alloc.local_bits[k] / bits_per_rate;
        x[lay.power(k)] = alloc.power_w[k];
        x[lay.rate_t(k)] = alloc.codeword_rate[k];
        x[lay.rate_s(k)] = alloc.secret_rate[k];
        x[lay.sinr_lb(k)] = aux.b[k];
        x[lay.intf_ub(k)] = aux.pi[k];
        x[lay.phi(k)] = aux.phi[k];
        x[lay.u(k)] = aux.u[k];
        x[lay.w(k)] = aux.w[k];
        x[lay.delta(k)] = aux.delta_s[k];
        for (int l = 0; l < n; ++l)
            if (l != k) x[lay.beta(k, l)] = alloc.beta(k, l);
    }
    return x;
}

std::pair<Allocation, AuxPoint> extract_point(const VectorXd& x,
                                              const MatrixXd& mu,
                                              const SystemConfig& cfg,
                                              const TransformOptions& opts) {
    const int n = cfg.users;
    VarLayout lay(n);
    if (x.size() != lay.n)
        throw std::invalid_argument("extract_point: vector length mismatch");
    Allocation alloc = Allocation::zeros(n);
    AuxPoint aux;
    aux.b.resize(n);
    aux.pi.resize(n);
    aux.phi.resize(n);
    aux.u.resize(n);
    aux.w.resize(n);
    aux.delta_s.resize(n);
    aux.mu = mu;
    const double bits_per_rate = cfg.bits_per_rate_unit();
    for (int k = 0; k < n; ++k) {
        alloc.local_bits[k] = x[lay.local(k)] * bits_per_rate;
        alloc.power_w[k] = x[lay.power(k)];
        alloc.codeword_rate[k] = x[lay.rate_t(k)];
        alloc.secret_rate[k] = opts.secrecy ? x[lay.rate_s(k)] : x[lay.rate_t(k)];
        aux.b[k] = x[lay.sinr_lb(k)];
        aux.pi[k] = x[lay.intf_ub(k)];
        aux.phi[k] = x[lay.phi(k)];
        aux.u[k] = x[lay.u(k)];
        aux.w[k] = x[lay.w(k)];
        aux.delta_s[k] =
            opts.secrecy ? x[lay.delta(k)] : std::exp2(alloc.secret_rate[k]);
        for (int l = 0; l < n; ++l)
            if (l != k) alloc.beta(k, l) = x[lay.beta(k, l)];
    }
    return {alloc, aux};
}

ConvexSubproblem linearize(const Allocation& anchor_alloc,
                           const AuxPoint& anchor_aux, const SystemConfig& cfg,
                           const ChannelRealization& ch, const PddState& pdd,
                           const TransformOptions& opts) {
    const int n = cfg.users;
    VarLayout lay(n);
    ConvexSubproblem sub;
    sub.layout = lay;
    sub.cubic = VectorXd::Zero(lay.n);
    sub.linear = VectorXd::Zero(lay.n);
    sub.is_fixed.assign(lay.n, 0);
    sub.anchor = pack_point(anchor_alloc, anchor_aux, cfg);
    if (!sub.anchor.allFinite())
        throw std::invalid_argument("linearize: non-finite anchor");
    sub.fixed_value = sub.anchor;

    const double bits_per_rate = cfg.bits_per_rate_unit();
    const double floor = opts.anchor_floor;

    // Anchor values that multiply other variables in the surrogates are
    // lifted off zero so the expansions stay non-degenerate.
    auto lifted = [&](double v) { return std::max(v, floor); };

    // Fixed variables: decoding order when frozen, the secrecy chain when
    // absent, and local bits for users with nothing to compute.
    for (int k = 0; k < n; ++k) {
        if (cfg.task_bits[k] <= 0.0) {
            sub.is_fixed[lay.local(k)] = 1;
            sub.fixed_value[lay.local(k)] = 0.0;
        }
        if (!opts.secrecy) {
            for (int v : {lay.rate_s(k), lay.phi(k), lay.u(k), lay.w(k),
                          lay.delta(k)})
                sub.is_fixed[v] = 1;
        }
        if (!opts.optimize_order)
            for (int l = 0; l < n; ++l)
                if (l != k) sub.is_fixed[lay.beta(k, l)] = 1;
    }

    // Objective: cubic local energy in scaled bits, linear transmit energy.
    for (int k = 0; k < n; ++k) {
        double c = cfg.cycles_per_bit[k];
        sub.cubic[lay.local(k)] = cfg.capacitance[k] * c * c * c *
                                  std::pow(bits_per_rate, 3) /
                                  (cfg.deadline_s * cfg.deadline_s);
        sub.linear[lay.power(k)] = cfg.deadline_s;
    }

    // Augmented-Lagrangian penalty families over the order relaxation.
    if (opts.optimize_order && n >= 2) {
        double wgt = 1.0 / (2.0 * pdd.rho);
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < n; ++l) {
                if (l == k) continue;
                SquaredTerm f1;
                f1.r = unit_row(lay.n, lay.beta(k, l), 1.0);
                f1.s = -anchor_aux.mu(k, l) + pdd.rho * pdd.lambda1(k, l);
                f1.weight = wgt;
                sub.squares.push_back(std::move(f1));

                SquaredTerm f2;
                f2.r = unit_row(lay.n, lay.beta(k, l), 1.0 - anchor_aux.mu(k, l));
                f2.s = pdd.rho * pdd.lambda2(k, l);
                f2.weight = wgt;
                sub.squares.push_back(std::move(f2));
            }
        }
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < k; ++l) {
                SquaredTerm f3;
                f3.r = unit_row(lay.n, lay.beta(k, l), 1.0);
                f3.r[lay.beta(l, k)] = 1.0;
                f3.s = -1.0 + pdd.rho * pdd.lambda3(k, l);
                f3.weight = wgt;
                sub.squares.push_back(std::move(f3));
            }
        }
    }

    auto add_row = [&](VectorXd a, double rhs, RowTag tag, int user,
                       int other = -1) {
        sub.rows.push_back({std::move(a), rhs, tag, user, other});
    };
    auto bound_lo = [&](int var, double lo) {
        if (!sub.is_fixed[var]) add_row(unit_row(lay.n, var, -1.0), -lo,
                                        RowTag::bound, -1);
    };
    auto bound_hi = [&](int var, double hi) {
        if (!sub.is_fixed[var]) add_row(unit_row(lay.n, var, 1.0), hi,
                                        RowTag::bound, -1);
    };

    for (int k = 0; k < n; ++k) {
        const double tau = ch.tau[k];
        const double p_a = lifted(sub.anchor[lay.power(k)]);
        const double b_a = lifted(sub.anchor[lay.sinr_lb(k)]);
        const double pi_a = std::max(sub.anchor[lay.intf_ub(k)], 1.0);
        const double u_a = lifted(sub.anchor[lay.u(k)]);
        const double w_a = lifted(sub.anchor[lay.w(k)]);
        const double phi_a = lifted(sub.anchor[lay.phi(k)]);
        const double ds_a = std::max(sub.anchor[lay.delta(k)], 1.0);

        bound_lo(lay.local(k), 0.0);
        bound_hi(lay.local(k), cfg.task_bits[k] / bits_per_rate);
        bound_lo(lay.power(k), 0.0);
        bound_lo(lay.rate_t(k), 0.0);
        bound_lo(lay.rate_s(k), 0.0);
        bound_lo(lay.sinr_lb(k), 0.0);
        bound_lo(lay.intf_ub(k), 1.0);
        bound_lo(lay.u(k), 0.0);
        bound_lo(lay.w(k), 0.0);

        // Offloading requirement in rate units.
        {
            VectorXd a = VectorXd::Zero(lay.n);
            a[lay.local(k)] = -1.0;
            a[opts.secrecy ? lay.rate_s(k) : lay.rate_t(k)] = -1.0;
            add_row(std::move(a), -cfg.task_bits[k] / bits_per_rate,
                    RowTag::rate_requirement, k);
        }

        // Decodable-rate cap through the SINR lower bound.
        sub.log_rows.push_back({lay.rate_t(k), lay.sinr_lb(k)});

        // Surrogate of b pi <= tau p.
        {
            VectorXd a = VectorXd::Zero(lay.n);
            a[lay.sinr_lb(k)] = pi_a;
            a[lay.intf_ub(k)] = b_a;
            a[lay.power(k)] = -tau;
            add_row(std::move(a), b_a * pi_a, RowTag::sinr_product, k);
        }

        // Surrogate of 1 + sum_l beta_kl tau_l p_l <= pi.
        if (n >= 2) {
            VectorXd a = VectorXd::Zero(lay.n);
            double rhs = -1.0;
            for (int l = 0; l < n; ++l) {
                if (l == k) continue;
                double beta_a = sub.anchor[lay.beta(k, l)];
                double pl_a = lifted(sub.anchor[lay.power(l)]);
                a[lay.power(l)] += ch.tau[l] * beta_a;
                a[lay.beta(k, l)] += ch.tau[l] * pl_a;
                rhs += ch.tau[l] * beta_a * pl_a;
            }
            a[lay.intf_ub(k)] = -1.0;
            add_row(std::move(a), rhs, RowTag::interference, k);
        }

        if (opts.secrecy) {
            // R_s <= R_t.
            {
                VectorXd a = VectorXd::Zero(lay.n);
                a[lay.rate_s(k)] = 1.0;
                a[lay.rate_t(k)] = -1.0;
                add_row(std::move(a), 0.0, RowTag::rate_order, k);
            }
            // Surrogate of pi delta_s <= u.
            {
                VectorXd a = VectorXd::Zero(lay.n);
                a[lay.delta(k)] = pi_a;
                a[lay.intf_ub(k)] = ds_a;
                a[lay.u(k)] = -1.0;
                add_row(std::move(a), pi_a * ds_a, RowTag::delta_product, k);
            }
            // Surrogate of phi w <= pi + tau p - u.
            {
                VectorXd a = VectorXd::Zero(lay.n);
                a[lay.w(k)] = phi_a;
                a[lay.phi(k)] = w_a;
                a[lay.intf_ub(k)] = -1.0;
                a[lay.power(k)] = -tau;
                a[lay.u(k)] = 1.0;
                add_row(std::move(a), phi_a * w_a, RowTag::phi_product, k);
            }
            // Surrogate of p u <= w.
            {
                VectorXd a = VectorXd::Zero(lay.n);
                a[lay.u(k)] = p_a;
                a[lay.power(k)] = u_a;
                a[lay.w(k)] = -1.0;
                add_row(std::move(a), p_a * u_a, RowTag::power_product, k);
            }
            // Exact linear secrecy floor, noise power restored.
            add_row(unit_row(lay.n, lay.phi(k), -1.0),
                    -model::secrecy_slope(cfg, ch, k) / cfg.noise_eve_w,
                    RowTag::secrecy_floor, k);
            // delta_s epigraph.
            sub.exp_rows.push_back({lay.rate_s(k), lay.delta(k)});
        }

        if (opts.optimize_order && n >= 2) {
            for (int l = 0; l < n; ++l) {
                if (l == k) continue;
                bound_lo(lay.beta(k, l), 0.0);
                bound_hi(lay.beta(k, l), 1.0);
                // Surrogate of beta_kl tau_l p_l <= tau_k p_k.
                double beta_a = sub.anchor[lay.beta(k, l)];
                double pl_a = lifted(sub.anchor[lay.power(l)]);
                VectorXd a = VectorXd::Zero(lay.n);
                a[lay.beta(k, l)] = pl_a;
                a[lay.power(l)] = beta_a;
                a[lay.power(k)] = -tau / ch.tau[l];
                add_row(std::move(a), pl_a * beta_a, RowTag::order_product, k, l);
            }
        }
    }
    return sub;
}

Violation violation_vector(const Allocation& alloc, const AuxPoint& aux) {
    const int n = alloc.users();
    const int pairs = n * (n - 1);
    Violation v;
    v.g.resize(2 * pairs + pairs / 2);
    int idx = 0;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            if (l != k) v.g[idx++] = alloc.beta(k, l) - aux.mu(k, l);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            if (l != k) v.g[idx++] = alloc.beta(k, l) * (1.0 - aux.mu(k, l));
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < k; ++l)
            v.g[idx++] = alloc.beta(k, l) + alloc.beta(l, k) - 1.0;
    v.inf_norm = idx == 0 ? 0.0 : v.g.cwiseAbs().maxCoeff();
    return v;
}

}  // namespace secoff::transform
