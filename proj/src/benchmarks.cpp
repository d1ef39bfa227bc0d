#include "secoff/benchmarks.hpp"

#include <cmath>

#include "secoff/model.hpp"

namespace secoff::benchmarks {

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::proposed: return "proposed";
        case Scheme::secure_oma: return "secure-oma";
        case Scheme::fixed_sic: return "fixed-sic";
        case Scheme::no_eve: return "no-eve";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
    if (name == "proposed") return Scheme::proposed;
    if (name == "secure-oma" || name == "oma") return Scheme::secure_oma;
    if (name == "fixed-sic") return Scheme::fixed_sic;
    if (name == "no-eve") return Scheme::no_eve;
    return std::nullopt;
}

namespace {

BenchmarkResult from_pdd(Scheme scheme, pdd::SolveResult&& r) {
    BenchmarkResult out;
    out.scheme = scheme;
    out.alloc = std::move(r.alloc);
    out.energy = std::move(r.energy);
    out.feasibility = std::move(r.feasibility);
    out.status = r.status;
    out.outer_iterations = r.outer_iterations;
    out.inner_iterations = r.inner_iterations;
    out.final_violation = r.final_violation;
    out.max_kkt = r.max_kkt;
    return out;
}

}  // namespace

BenchmarkResult solve_oma(const SystemConfig& cfg, const ChannelRealization& ch) {
    cfg.validate();
    const int n = cfg.users;
    const double slot = 1.0 / n;
    const double bits_per_rate = cfg.bits_per_rate_unit() * slot;

    BenchmarkResult out;
    out.scheme = Scheme::secure_oma;
    out.alloc = Allocation::zeros(n);

    for (int k = 0; k < n; ++k) {
        const double tau = ch.tau[k];
        const double slope = model::secrecy_slope(cfg, ch, k) / cfg.noise_eve_w;
        const double task = cfg.task_bits[k];
        const double rate_cap = tau > slope ? std::log2(tau / slope) : 0.0;

        auto rate_of = [&](double p) {
            return std::log2((1.0 + tau * p) / (1.0 + slope * p));
        };
        // Smallest power whose secrecy-capped rate meets the requirement.
        auto power_for = [&](double rate) {
            if (rate <= 0.0) return 0.0;
            double hi = 1e-9;
            while (rate_of(hi) < rate && hi < 1e12) hi *= 2.0;
            double lo = 0.0;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                double mid = 0.5 * (lo + hi);
                (rate_of(mid) >= rate ? hi : lo) = mid;
            }
            return hi;
        };
        auto cost = [&](double l) {
            double c = cfg.cycles_per_bit[k];
            double local = cfg.capacitance[k] * c * c * c * l * l * l /
                           (cfg.deadline_s * cfg.deadline_s);
            double p = power_for((task - l) / bits_per_rate);
            return local + p * cfg.deadline_s * slot;
        };

        double l_lo = rate_cap > 0.0
                          ? std::clamp(task - bits_per_rate * rate_cap *
                                                  (1.0 - 1e-6),
                                       0.0, task)
                          : task;
        double l_hi = task;

        // Golden-section on a convex objective.
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = l_lo, b = l_hi;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = cost(x1), f2 = cost(x2);
        for (int it = 0; it < 120 && b - a > 1e-9 * std::max(1.0, task); ++it) {
            if (f1 <= f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = cost(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = cost(x2);
            }
        }
        double l = 0.5 * (a + b);
        if (cost(task) <= cost(l)) l = task;  // full-local corner
        double rate = std::max(0.0, (task - l) / bits_per_rate);
        double p = power_for(rate);
        out.alloc.local_bits[k] = l;
        out.alloc.power_w[k] = p;
        out.alloc.secret_rate[k] = rate;
        out.alloc.codeword_rate[k] = p > 0.0 ? std::log2(1.0 + tau * p) : 0.0;
    }

    out.energy = model::total_energy(out.alloc, cfg, slot);
    FeasibilityOptions fopts;
    fopts.check_order = false;
    fopts.with_interference = false;
    fopts.slot_fraction = slot;
    out.feasibility = model::feasibility_check(out.alloc, ch, cfg, 1e-6, fopts);
    out.status = out.feasibility.feasible ? pdd::SolveStatus::converged
                                          : pdd::SolveStatus::infeasible_final;
    return out;
}

BenchmarkResult solve_fixed_sic(const SystemConfig& cfg,
                                const ChannelRealization& ch,
                                const pdd::PddConfig& base) {
    pdd::PddConfig config = base;
    config.transform.optimize_order = false;
    config.transform.secrecy = true;
    return from_pdd(Scheme::fixed_sic, pdd::solve(cfg, ch, config));
}

BenchmarkResult solve_no_eve(const SystemConfig& cfg, const ChannelRealization& ch,
                             const pdd::PddConfig& base) {
    pdd::PddConfig config = base;
    config.transform.optimize_order = true;
    config.transform.secrecy = false;
    return from_pdd(Scheme::no_eve, pdd::solve(cfg, ch, config));
}

BenchmarkResult solve_proposed(const SystemConfig& cfg,
                               const ChannelRealization& ch,
                               const pdd::PddConfig& base) {
    pdd::PddConfig config = base;
    config.transform.optimize_order = true;
    config.transform.secrecy = true;
    return from_pdd(Scheme::proposed, pdd::solve(cfg, ch, config));
}

BenchmarkResult solve_scheme(Scheme scheme, const SystemConfig& cfg,
                             const ChannelRealization& ch,
                             const pdd::PddConfig& base) {
    switch (scheme) {
        case Scheme::secure_oma: return solve_oma(cfg, ch);
        case Scheme::fixed_sic: return solve_fixed_sic(cfg, ch, base);
        case Scheme::no_eve: return solve_no_eve(cfg, ch, base);
        case Scheme::proposed: break;
    }
    return solve_proposed(cfg, ch, base);
}

}  // namespace secoff::benchmarks
