#pragma once

#include <utility>
#include <vector>

#include "secoff/types.hpp"

namespace secoff::transform {

/// Index map of the subproblem variable vector. Local bits are scaled by
/// B*T so every variable sits within a few orders of magnitude of one.
struct VarLayout {
    int users = 0;
    int n = 0;

    explicit VarLayout(int users_)
        : users(users_), n(10 * users_ + users_ * (users_ - 1)) {}

    int local(int k) const { return k; }
    int power(int k) const { return users + k; }
    int rate_t(int k) const { return 2 * users + k; }
    int rate_s(int k) const { return 3 * users + k; }
    int sinr_lb(int k) const { return 4 * users + k; }   // b
    int intf_ub(int k) const { return 5 * users + k; }   // pi
    int phi(int k) const { return 6 * users + k; }
    int u(int k) const { return 7 * users + k; }
    int w(int k) const { return 8 * users + k; }
    int delta(int k) const { return 9 * users + k; }
    int beta(int k, int l) const {
        return 10 * users + k * (users - 1) + (l < k ? l : l - 1);
    }
};

enum class RowTag {
    bound,
    rate_requirement,   // (L_k - l_k)/(B T) <= R_s,k
    rate_order,         // R_s,k <= R_t,k
    sinr_product,       // surrogate of b pi <= tau p
    interference,       // surrogate of 1 + sum beta tau p <= pi
    delta_product,      // surrogate of pi delta_s <= u
    phi_product,        // surrogate of phi w <= pi + tau p - u
    power_product,      // surrogate of p u <= w
    order_product,      // surrogate of beta_kl tau_l p_l <= tau_k p_k
    secrecy_floor,      // phi >= -ln(eps) / (sigma_e^2 d_e^alpha)
};

/// Affine inequality a^T x <= rhs.
struct AffineRow {
    VectorXd a;
    double rhs = 0.0;
    RowTag tag = RowTag::bound;
    int user = -1;
    int other = -1;
};

/// weight * (r^T x + s)^2 contribution to the objective.
struct SquaredTerm {
    VectorXd r;
    double s = 0.0;
    double weight = 0.0;
};

/// x[rate_var] <= log2(1 + x[arg_var]); convex, handled natively downstream.
struct LogRow {
    int rate_var = -1;
    int arg_var = -1;
};

/// 2^x[rate_var] <= x[cap_var]; the epigraph of delta_s = 2^{R_s}.
struct ExpRow {
    int rate_var = -1;
    int cap_var = -1;
};

/// One inner-iteration convex program: smooth convex objective (cubic local
/// energy, linear transmit energy, quadratic penalty families) over affine
/// surrogates plus the exact log/exp constraint rows.
struct ConvexSubproblem {
    VarLayout layout{0};
    VectorXd cubic;    ///< sum_i cubic[i] x_i^3 on x_i >= 0
    VectorXd linear;
    std::vector<SquaredTerm> squares;
    std::vector<AffineRow> rows;
    std::vector<LogRow> log_rows;
    std::vector<ExpRow> exp_rows;

    std::vector<char> is_fixed;  ///< pinned variables (frozen order, no-secrecy)
    VectorXd fixed_value;
    VectorXd anchor;             ///< expansion point of the surrogates

    double objective(const VectorXd& x) const;
    VectorXd objective_gradient(const VectorXd& x) const;
};

struct TransformOptions {
    bool optimize_order = true;  ///< beta free with penalty families and order rows
    bool secrecy = true;         ///< secrecy chain and confidential rates present
    double anchor_floor = 1e-9;  ///< lifts degenerate expansion anchors
};

/// Deterministic feasible start: half the task local, decode order by
/// descending tau, smallest per-user power meeting the secrecy-capped rate by
/// round-robin bisection, auxiliaries tight, mu = beta. Users whose secrecy
/// cap cannot reach the required rate at any power fall back to full local
/// computing at a floor power.
std::pair<Allocation, AuxPoint> init_point(const SystemConfig& cfg,
                                           const ChannelRealization& ch,
                                           const TransformOptions& opts = {});

/// First-order surrogates of every bilinear constraint around the anchor,
/// assembled with the current penalty terms into a convex subproblem.
ConvexSubproblem linearize(const Allocation& anchor_alloc,
                           const AuxPoint& anchor_aux, const SystemConfig& cfg,
                           const ChannelRealization& ch, const PddState& pdd,
                           const TransformOptions& opts = {});

/// Maps a physical point onto the subproblem variable vector.
VectorXd pack_point(const Allocation& alloc, const AuxPoint& aux,
                    const SystemConfig& cfg);

/// Inverse of pack_point; mu is carried through unchanged.
std::pair<Allocation, AuxPoint> extract_point(const VectorXd& x,
                                              const MatrixXd& mu,
                                              const SystemConfig& cfg,
                                              const TransformOptions& opts = {});

struct Violation {
    VectorXd g;
    double inf_norm = 0.0;
};

/// Stacked equality residuals: beta - mu, beta (1 - mu), and
/// beta_kl + beta_lk - 1 over unordered pairs.
Violation violation_vector(const Allocation& alloc, const AuxPoint& aux);

}  // namespace secoff::transform
