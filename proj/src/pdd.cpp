#include "secoff/pdd.hpp"

#include <cmath>

#include "secoff/model.hpp"

namespace secoff::pdd {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::iteration_cap: return "iteration-cap";
        case SolveStatus::infeasible_final: return "infeasible-final";
        case SolveStatus::solver_failure: return "solver-failure";
    }
    return "unknown";
}

MatrixXd mu_update(const MatrixXd& beta, double rho, const MatrixXd& lambda1,
                   const MatrixXd& lambda2) {
    const int n = static_cast<int>(beta.rows());
    MatrixXd mu = MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            double b = beta(k, l);
            mu(k, l) = (b + b * b + rho * lambda1(k, l) +
                        rho * lambda2(k, l) * b) /
                       (1.0 + b * b);
        }
    }
    return mu;
}

double al_objective(const Allocation& alloc, const AuxPoint& aux,
                    const SystemConfig& cfg, const PddState& state,
                    bool order_penalties) {
    double f = model::total_energy(alloc, cfg).total_j;
    if (!order_penalties) return f;
    const int n = alloc.users();
    double w = 1.0 / (2.0 * state.rho);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            double r1 = alloc.beta(k, l) - aux.mu(k, l) +
                        state.rho * state.lambda1(k, l);
            double r2 = alloc.beta(k, l) * (1.0 - aux.mu(k, l)) +
                        state.rho * state.lambda2(k, l);
            f += w * (r1 * r1 + r2 * r2);
            if (l < k) {
                double r3 = alloc.beta(k, l) + alloc.beta(l, k) - 1.0 +
                            state.rho * state.lambda3(k, l);
                f += w * r3 * r3;
            }
        }
    }
    return f;
}

bool inner_loop(PddState& state, Allocation& alloc, AuxPoint& aux,
                const SystemConfig& cfg, const ChannelRealization& ch,
                const PddConfig& config, std::vector<TraceRow>* trace,
                double* max_kkt) {
    const bool order_on = config.transform.optimize_order && cfg.users >= 2;
    double f_prev = al_objective(alloc, aux, cfg, state, order_on);

    for (int i = 1; i <= config.inner_max_iterations; ++i) {
        if (order_on)
            aux.mu = mu_update(alloc.beta, state.rho, state.lambda1, state.lambda2);

        auto sub = transform::linearize(alloc, aux, cfg, ch, state,
                                        config.transform);
        VectorXd x0 = transform::pack_point(alloc, aux, cfg);
        auto sol = subsolver::solve(sub, x0, config.solver);
        if (sol.status != subsolver::Status::optimal) {
            // One retry with a lifted expansion floor.
            auto topts = config.transform;
            topts.anchor_floor = std::max(1e3 * topts.anchor_floor, 1e-6);
            sub = transform::linearize(alloc, aux, cfg, ch, state, topts);
            sol = subsolver::solve(sub, x0, config.solver);
            if (sol.status != subsolver::Status::optimal) return false;
        }
        if (max_kkt) *max_kkt = std::max(*max_kkt, sol.kkt);

        std::tie(alloc, aux) =
            transform::extract_point(sol.x, aux.mu, cfg, config.transform);
        ++state.inner_index;

        double f = al_objective(alloc, aux, cfg, state, order_on);
        double energy = model::total_energy(alloc, cfg).total_j;
        state.energy_trace.push_back(energy);
        state.al_trace.push_back(f);
        if (trace) {
            auto g = transform::violation_vector(alloc, aux);
            trace->push_back({state.outer_index, i, energy, f, g.inf_norm,
                              state.rho});
        }

        double denom = std::max(std::abs(f_prev), 1e-12);
        if (std::abs(f - f_prev) / denom <= config.objective_tol) break;
        f_prev = f;
    }
    return true;
}

void outer_update(PddState& state, const transform::Violation& g) {
    if (g.inf_norm <= state.eta()) {
        const int n = static_cast<int>(state.lambda1.rows());
        int idx = 0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                if (l != k) state.lambda1(k, l) += g.g[idx++] / state.rho;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                if (l != k) state.lambda2(k, l) += g.g[idx++] / state.rho;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < k; ++l)
                state.lambda3(k, l) += g.g[idx++] / state.rho;
        state.dual_branch_trace.push_back(1);
    } else {
        state.rho = std::max(state.rho * state.penalty_decrease, 1e-300);
        state.dual_branch_trace.push_back(0);
    }
    ++state.outer_index;
}

MatrixXd round_decoding_order(const VectorXd& power_w,
                              const ChannelRealization& ch) {
    const int n = ch.users();
    MatrixXd beta = MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            double qk = ch.tau[k] * power_w[k];
            double ql = ch.tau[l] * power_w[l];
            beta(k, l) = (qk > ql || (qk == ql && k < l)) ? 1.0 : 0.0;
        }
    }
    return beta;
}

namespace {

/// Re-derives rates and local bits at the rounded order, snapping users with
/// nothing left to offload down to zero power. Iterates because zeroed powers
/// change the products that define the order.
void repair_allocation(Allocation& alloc, const SystemConfig& cfg,
                       const ChannelRealization& ch,
                       const transform::TransformOptions& topts) {
    const int n = cfg.users;
    const double bits_per_rate = cfg.bits_per_rate_unit();
    MatrixXd beta = topts.optimize_order
                        ? round_decoding_order(alloc.power_w, ch)
                        : alloc.beta;
    for (int pass = 0; pass <= n; ++pass) {
        alloc.beta = beta;
        bool any_snapped = false;
        for (int k = 0; k < n; ++k) {
            double cap;
            if (topts.secrecy) {
                cap = model::max_secret_rate(alloc.power_w, beta, ch, cfg, k);
            } else {
                double gamma =
                    ch.tau[k] * alloc.power_w[k] /
                    model::interference_plus_one(alloc.power_w, beta, ch, k);
                cap = std::log2(1.0 + gamma);
            }
            double needed =
                (cfg.task_bits[k] - alloc.local_bits[k]) / bits_per_rate;
            if (needed > cap) {
                alloc.local_bits[k] = std::clamp(
                    cfg.task_bits[k] - bits_per_rate * cap, 0.0,
                    cfg.task_bits[k]);
                needed = (cfg.task_bits[k] - alloc.local_bits[k]) / bits_per_rate;
            }
            double snap_bits = 1e-9 * std::max(1.0, cfg.task_bits[k]);
            if (cfg.task_bits[k] - alloc.local_bits[k] <= snap_bits) {
                if (alloc.power_w[k] != 0.0) any_snapped = true;
                alloc.local_bits[k] = cfg.task_bits[k];
                alloc.power_w[k] = 0.0;
                alloc.secret_rate[k] = 0.0;
                alloc.codeword_rate[k] = 0.0;
                continue;
            }
            alloc.secret_rate[k] = std::max(0.0, needed);
            VectorXd gamma = model::sinr_vector(alloc.power_w, beta, ch);
            alloc.codeword_rate[k] = std::log2(1.0 + gamma[k]);
        }
        if (!topts.optimize_order) break;
        MatrixXd next = round_decoding_order(alloc.power_w, ch);
        if (!any_snapped && next == beta) break;
        beta = next;
    }
    if (!topts.secrecy) alloc.secret_rate = alloc.codeword_rate;
    // Codeword rates at the final interference pattern.
    VectorXd gamma = model::sinr_vector(alloc.power_w, alloc.beta, ch);
    for (int k = 0; k < n; ++k) {
        if (alloc.power_w[k] <= 0.0) continue;
        alloc.codeword_rate[k] = std::log2(1.0 + gamma[k]);
        if (!topts.secrecy) alloc.secret_rate[k] = alloc.codeword_rate[k];
    }
}

}  // namespace

SolveResult solve(const SystemConfig& cfg, const ChannelRealization& ch,
                  const PddConfig& config) {
    cfg.validate();
    SolveResult res;
    res.state = PddState::init(cfg.users);
    res.state.rho = config.rho0;
    res.state.penalty_decrease = config.penalty_decrease;
    res.state.violation_tol = config.violation_tol;
    res.state.objective_tol = config.objective_tol;
    res.state.inner_max_iterations = config.inner_max_iterations;
    res.state.outer_max_iterations = config.outer_max_iterations;
    res.state.rho_floor = config.rho_floor;

    auto [alloc, aux] = transform::init_point(cfg, ch, config.transform);

    bool converged = false;
    bool failed = false;
    bool capped = false;
    for (int j = 0; j < config.outer_max_iterations; ++j) {
        if (!inner_loop(res.state, alloc, aux, cfg, ch, config, &res.trace,
                        &res.max_kkt)) {
            failed = true;
            break;
        }
        auto g = transform::violation_vector(alloc, aux);
        res.state.violation_trace.push_back(g.inf_norm);
        res.state.rho_trace.push_back(res.state.rho);
        res.final_violation = g.inf_norm;

        bool at_floor = res.state.rho <= config.rho_floor;
        outer_update(res.state, g);
        if (g.inf_norm <= config.violation_tol) {
            converged = true;
            break;
        }
        if (at_floor && res.state.dual_branch_trace.back() == 0) {
            capped = true;  // penalty branch with rho already at its floor
            break;
        }
    }
    res.outer_iterations = res.state.outer_index;
    res.inner_iterations = res.state.inner_index;

    // Deliver a binary decoding order with consistent rates.
    Allocation before = alloc;
    repair_allocation(alloc, cfg, ch, config.transform);
    res.repair_delta_j = model::total_energy(alloc, cfg).total_j -
                         model::total_energy(before, cfg).total_j;

    res.alloc = alloc;
    res.aux = aux;
    res.energy = model::total_energy(alloc, cfg);

    FeasibilityOptions fopts;
    fopts.check_secrecy = config.transform.secrecy;
    fopts.check_order = config.transform.optimize_order;
    res.feasibility =
        model::feasibility_check(alloc, ch, cfg, config.feasibility_tol, fopts);

    if (failed)
        res.status = SolveStatus::solver_failure;
    else if (!converged)
        res.status = SolveStatus::iteration_cap;
    else if (!res.feasibility.feasible)
        res.status = SolveStatus::infeasible_final;
    else
        res.status = SolveStatus::converged;
    (void)capped;
    return res;
}

}  // namespace secoff::pdd
