#include "secoff/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "secoff/model.hpp"
#include "secoff/rng.hpp"

namespace secoff::oracle {

std::vector<double> GridSpec::power_values() const {
    if (points < 2) throw std::invalid_argument("GridSpec: points must be >= 2");
    if (!(power_min_w > 0.0) || !(power_max_w > power_min_w))
        throw std::invalid_argument("GridSpec: bounds must be positive and ordered");
    std::vector<double> v;
    if (include_zero) v.push_back(0.0);
    double lo = std::log(power_min_w), hi = std::log(power_max_w);
    for (int i = 0; i < points; ++i)
        v.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
    return v;
}

namespace {

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

MatrixXd order_to_beta(const std::vector<int>& order) {
    const int n = static_cast<int>(order.size());
    MatrixXd beta = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) beta(order[i], order[j]) = 1.0;
    return beta;
}

}  // namespace

GridResult brute_force_grid(const SystemConfig& cfg, const ChannelRealization& ch,
                            const GridSpec& grid) {
    cfg.validate();
    const int n = cfg.users;
    if (n > grid.max_enum_users)
        throw std::invalid_argument("brute_force_grid: " + std::to_string(n) +
                                    " users exceeds enumeration cap of " +
                                    std::to_string(grid.max_enum_users));
    const std::vector<double> powers = grid.power_values();
    const std::uint64_t cells =
        factorial(n) *
        static_cast<std::uint64_t>(std::pow(double(powers.size()), n));
    if (cells > 100'000'000ULL)
        throw std::invalid_argument(
            "brute_force_grid: grid too large (" + std::to_string(cells) +
            " evaluations, cap 100000000)");

    const double bits_per_rate = cfg.bits_per_rate_unit();
    GridResult out;
    out.best_energy_j = std::numeric_limits<double>::infinity();

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Allocation cand = Allocation::zeros(n);

    do {
        MatrixXd beta = order_to_beta(order);
        std::vector<int> idx(n, 0);
        while (true) {
            ++out.evaluations;
            for (int k = 0; k < n; ++k) cand.power_w[k] = powers[idx[k]];

            // Products along the decode order must be non-increasing.
            bool consistent = true;
            for (int i = 0; i + 1 < n && consistent; ++i) {
                double a = ch.tau[order[i]] * cand.power_w[order[i]];
                double b = ch.tau[order[i + 1]] * cand.power_w[order[i + 1]];
                if (a < b) consistent = false;
            }
            if (consistent) {
                ++out.feasible_points;
                cand.beta = beta;
                double energy = 0.0;
                for (int k = 0; k < n; ++k) {
                    double rs = model::max_secret_rate(cand.power_w, beta, ch, cfg, k);
                    double l = std::clamp(cfg.task_bits[k] - bits_per_rate * rs,
                                          0.0, cfg.task_bits[k]);
                    cand.secret_rate[k] =
                        std::min(rs, (cfg.task_bits[k] - l) / bits_per_rate);
                    cand.local_bits[k] = l;
                    double c = cfg.cycles_per_bit[k];
                    energy += cfg.capacitance[k] * c * c * c * l * l * l /
                                  (cfg.deadline_s * cfg.deadline_s) +
                              cand.power_w[k] * cfg.deadline_s;
                }
                if (energy < out.best_energy_j) {
                    out.best_energy_j = energy;
                    out.best = cand;
                    VectorXd gamma = model::sinr_vector(cand.power_w, beta, ch);
                    for (int k = 0; k < n; ++k)
                        out.best.codeword_rate[k] = std::log2(1.0 + gamma[k]);
                    out.best_order = order;
                }
            }

            int pos = n - 1;
            while (pos >= 0 && ++idx[pos] == static_cast<int>(powers.size())) {
                idx[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    } while (std::next_permutation(order.begin(), order.end()));

    return out;
}

SopEstimate monte_carlo_sop(const Allocation& alloc, const ChannelRealization& ch,
                            const SystemConfig& cfg, std::uint64_t n,
                            std::uint64_t seed) {
    if (n < 1000)
        throw std::invalid_argument("monte_carlo_sop: need at least 1000 samples");
    const int users = ch.users();
    LinkMetrics m = model::link_metrics(alloc, ch, cfg);

    SopEstimate est;
    est.estimate = VectorXd::Zero(users);
    est.std_error = VectorXd::Zero(users);
    est.samples = n;

    Rng rng(seed);
    for (int k = 0; k < users; ++k) {
        double p = alloc.power_w[k];
        if (p <= 0.0) continue;  // nothing transmitted, nothing intercepted
        double redundancy = m.bs_rate[k] - alloc.secret_rate[k];
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < n; ++i) {
            double g2 = rng.exponential();
            double eve_cap =
                std::log2(1.0 + model::eve_sinr(p, g2, cfg, ch, k));
            if (redundancy <= eve_cap) ++hits;
        }
        double f = static_cast<double>(hits) / static_cast<double>(n);
        est.estimate[k] = f;
        est.std_error[k] = std::sqrt(f * (1.0 - f) / static_cast<double>(n));
    }
    return est;
}

}  // namespace secoff::oracle
