#include "secoff/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "secoff/rng.hpp"

namespace secoff::model {

namespace {

constexpr double kLog2 = 0.6931471805599453;

double log2_1p(double x) { return std::log1p(x) / kLog2; }

bool strictly_descending(const VectorXd& v) {
    for (int i = 0; i + 1 < v.size(); ++i)
        if (!(v[i] > v[i + 1])) return false;
    return true;
}

}  // namespace

ChannelRealization sample_channels(const SystemConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const int n = cfg.users;
    Rng rng(seed);

    VectorXd gain2(n), tau(n);
    std::vector<int> order(n);
    // Ties in tau are a probability-zero event; re-draw until strict.
    while (true) {
        for (int k = 0; k < n; ++k) {
            gain2[k] = rng.exponential();
            tau[k] = std::pow(cfg.dist_bs_m[k], -cfg.path_loss_exp) * gain2[k] /
                     cfg.noise_bs_w;
        }
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return tau[a] > tau[b]; });
        VectorXd sorted(n);
        for (int i = 0; i < n; ++i) sorted[i] = tau[order[i]];
        if (strictly_descending(sorted) || n == 1) break;
    }

    ChannelRealization ch;
    ch.fading_gain2.resize(n);
    ch.tau.resize(n);
    ch.eve_rate.resize(n);
    ch.order = order;
    for (int i = 0; i < n; ++i) {
        int k = order[i];
        ch.fading_gain2[i] = gain2[k];
        ch.tau[i] = tau[k];
        ch.eve_rate[i] = std::pow(cfg.dist_eve_m[k], cfg.path_loss_exp);
    }
    return ch;
}

SystemConfig permute_users(const SystemConfig& cfg, const std::vector<int>& order) {
    SystemConfig out = cfg;
    const int n = cfg.users;
    if (static_cast<int>(order.size()) != n)
        throw std::invalid_argument("permute_users: order size mismatch");
    for (int i = 0; i < n; ++i) {
        int k = order[i];
        out.task_bits[i] = cfg.task_bits[k];
        out.cycles_per_bit[i] = cfg.cycles_per_bit[k];
        out.capacitance[i] = cfg.capacitance[k];
        out.dist_bs_m[i] = cfg.dist_bs_m[k];
        out.dist_eve_m[i] = cfg.dist_eve_m[k];
    }
    return out;
}

double interference_plus_one(const VectorXd& power_w, const MatrixXd& beta,
                             const ChannelRealization& ch, int k) {
    double acc = 1.0;
    for (int l = 0; l < ch.users(); ++l)
        if (l != k) acc += beta(k, l) * ch.tau[l] * power_w[l];
    return acc;
}

VectorXd sinr_vector(const VectorXd& power_w, const MatrixXd& beta,
                     const ChannelRealization& ch) {
    const int n = ch.users();
    if (power_w.size() != n || beta.rows() != n || beta.cols() != n)
        throw std::invalid_argument("sinr_vector: dimension mismatch");
    VectorXd gamma(n);
    for (int k = 0; k < n; ++k)
        gamma[k] = ch.tau[k] * power_w[k] / interference_plus_one(power_w, beta, ch, k);
    return gamma;
}

double secrecy_slope(const SystemConfig& cfg, const ChannelRealization& ch, int k) {
    return -std::log(cfg.secrecy_outage_max) / ch.eve_rate[k];
}

double eve_sinr(double power_w, double eve_fading_gain2, const SystemConfig& cfg,
                const ChannelRealization& ch, int k) {
    return eve_fading_gain2 / ch.eve_rate[k] * power_w / cfg.noise_eve_w;
}

LinkMetrics link_metrics(const Allocation& alloc, const ChannelRealization& ch,
                         const SystemConfig& cfg) {
    const int n = ch.users();
    LinkMetrics m;
    m.gamma = sinr_vector(alloc.power_w, alloc.beta, ch);
    m.bs_rate.resize(n);
    m.eve_gamma.resize(n);
    m.eve_rate.resize(n);
    m.redundancy = alloc.codeword_rate - alloc.secret_rate;
    m.theta.resize(n);
    m.outage_prob.resize(n);

    for (int k = 0; k < n; ++k) {
        m.bs_rate[k] = log2_1p(m.gamma[k]);
        m.eve_gamma[k] = eve_sinr(alloc.power_w[k], 1.0, cfg, ch, k);
        m.eve_rate[k] = log2_1p(m.eve_gamma[k]);
        double p = alloc.power_w[k];
        if (p <= 0.0) {
            // Nothing transmitted, nothing intercepted.
            m.theta[k] = std::numeric_limits<double>::infinity();
            m.outage_prob[k] = 0.0;
            continue;
        }
        double delta_s = std::exp2(alloc.secret_rate[k]);
        m.theta[k] =
            ((1.0 + m.gamma[k]) / delta_s - 1.0) * cfg.noise_eve_w / p;
        m.outage_prob[k] = std::min(1.0, std::exp(-m.theta[k] * ch.eve_rate[k]));
    }
    return m;
}

EnergyBreakdown total_energy(const Allocation& alloc, const SystemConfig& cfg,
                             double slot_fraction) {
    const int n = alloc.users();
    EnergyBreakdown e;
    e.local_j.resize(n);
    e.offload_j.resize(n);
    e.cpu_hz.resize(n);
    double t = cfg.deadline_s;
    for (int k = 0; k < n; ++k) {
        double c = cfg.cycles_per_bit[k];
        e.local_j[k] = cfg.capacitance[k] * c * c * c *
                       std::pow(alloc.local_bits[k], 3) / (t * t);
        e.offload_j[k] = alloc.power_w[k] * t * slot_fraction;
        e.cpu_hz[k] = c * alloc.local_bits[k] / t;
    }
    e.total_j = e.local_j.sum() + e.offload_j.sum();
    return e;
}

double max_secret_rate(const VectorXd& power_w, const MatrixXd& beta,
                       const ChannelRealization& ch, const SystemConfig& cfg,
                       int k) {
    double p = power_w[k];
    if (p <= 0.0) return 0.0;
    double gamma = ch.tau[k] * p / interference_plus_one(power_w, beta, ch, k);
    double divisor = 1.0 + secrecy_slope(cfg, ch, k) * p / cfg.noise_eve_w;
    double rate = std::log2((1.0 + gamma) / divisor);
    return std::max(0.0, rate);
}

FeasibilityReport feasibility_check(const Allocation& alloc,
                                    const ChannelRealization& ch,
                                    const SystemConfig& cfg, double tol,
                                    const FeasibilityOptions& opts) {
    const int n = ch.users();
    FeasibilityReport r;
    r.rate_deficit.resize(n);
    r.capacity_excess.resize(n);
    r.rate_order.resize(n);
    r.outage_excess.resize(n);
    r.power_negative = -alloc.power_w;
    r.local_bits_low = -alloc.local_bits;
    r.local_bits_high = alloc.local_bits - cfg.task_bits;
    r.order_violation = MatrixXd::Zero(n, n);
    r.pair_sum_violation = MatrixXd::Zero(n, n);
    r.binary_violation = MatrixXd::Zero(n, n);

    MatrixXd beta = alloc.beta;
    if (!opts.with_interference) beta.setZero();
    Allocation eff = alloc;
    eff.beta = beta;
    LinkMetrics m = link_metrics(eff, ch, cfg);

    double bits_per_rate =
        cfg.bandwidth_hz * cfg.deadline_s * opts.slot_fraction;
    double worst = 0.0;
    auto track = [&worst](double violation, double scale) {
        worst = std::max(worst, violation / std::max(1e-300, scale));
    };

    for (int k = 0; k < n; ++k) {
        double needed = (cfg.task_bits[k] - alloc.local_bits[k]) / bits_per_rate;
        r.rate_deficit[k] = needed - alloc.secret_rate[k];
        track(r.rate_deficit[k], std::max(1.0, cfg.task_bits[k] / bits_per_rate));

        r.capacity_excess[k] = alloc.codeword_rate[k] - m.bs_rate[k];
        track(r.capacity_excess[k], std::max(1.0, m.bs_rate[k]));

        r.rate_order[k] = alloc.secret_rate[k] - alloc.codeword_rate[k];
        track(r.rate_order[k], std::max(1.0, alloc.codeword_rate[k]));

        r.outage_excess[k] = m.outage_prob[k] - cfg.secrecy_outage_max;
        if (opts.check_secrecy) track(r.outage_excess[k], cfg.secrecy_outage_max);

        track(r.power_negative[k], 1.0);
        track(r.local_bits_low[k], std::max(1.0, cfg.task_bits[k]));
        track(r.local_bits_high[k], std::max(1.0, cfg.task_bits[k]));
    }

    if (opts.check_order) {
        double product_scale = 1e-300;
        for (int k = 0; k < n; ++k)
            product_scale =
                std::max(product_scale, ch.tau[k] * alloc.power_w[k]);
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < n; ++l) {
                if (k == l) continue;
                r.pair_sum_violation(k, l) =
                    std::abs(beta(k, l) + beta(l, k) - 1.0);
                track(r.pair_sum_violation(k, l), 1.0);
                r.binary_violation(k, l) =
                    std::min(alloc.beta(k, l), 1.0 - alloc.beta(k, l));
                track(r.binary_violation(k, l), 1.0);
                // Non-strict product comparison; ties satisfy either direction.
                if (alloc.beta(k, l) >= 0.5) {
                    double gap = ch.tau[l] * alloc.power_w[l] -
                                 ch.tau[k] * alloc.power_w[k];
                    r.order_violation(k, l) =
                        std::max(0.0, gap / product_scale);
                    track(r.order_violation(k, l), 1.0);
                }
            }
        }
    }

    r.max_rel_violation = worst;
    r.feasible = worst <= tol;
    return r;
}

}  // namespace secoff::model
