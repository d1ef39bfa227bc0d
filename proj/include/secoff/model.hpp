#pragma once

#include <cstdint>

#include "secoff/types.hpp"

namespace secoff::model {

/// Draws one block-fading realization. Fading powers are i.i.d. unit-mean
/// exponential; users are relabeled so tau is strictly descending (ties are
/// re-drawn). Deterministic for a given seed.
ChannelRealization sample_channels(const SystemConfig& cfg, std::uint64_t seed);

/// Reorders the per-user config arrays by the sorted-user permutation of a
/// realization, so cfg index k refers to the user with the k-th largest tau.
SystemConfig permute_users(const SystemConfig& cfg, const std::vector<int>& order);

/// Uplink SINR under a (possibly fractional) decoding-order matrix:
/// gamma_k = tau_k p_k / (sum_{l != k} beta_kl tau_l p_l + 1).
VectorXd sinr_vector(const VectorXd& power_w, const MatrixXd& beta,
                     const ChannelRealization& ch);

/// Interference-plus-one term of user k.
double interference_plus_one(const VectorXd& power_w, const MatrixXd& beta,
                             const ChannelRealization& ch, int k);

/// -ln(eps) / d_{e,k}^alpha, the outage threshold slope of user k.
double secrecy_slope(const SystemConfig& cfg, const ChannelRealization& ch, int k);

/// Eve's SINR for user k at a specific eavesdropper fading power.
double eve_sinr(double power_w, double eve_fading_gain2, const SystemConfig& cfg,
                const ChannelRealization& ch, int k);

/// Full per-user link metrics including the closed-form secrecy outage
/// probability. The outage threshold uses the decodable rate C_{b,k} in place
/// of R_{t,k}; P_so is 0 when p_k = 0 and clamps to 1 when theta_k < 0.
LinkMetrics link_metrics(const Allocation& alloc, const ChannelRealization& ch,
                         const SystemConfig& cfg);

/// Energy accounting. slot_fraction scales the active transmit time:
/// 1 for shared-spectrum offloading, 1/K for the equal-slot OMA benchmark.
/// The local-computing deadline is always the full frame.
EnergyBreakdown total_energy(const Allocation& alloc, const SystemConfig& cfg,
                             double slot_fraction = 1.0);

/// Largest confidential rate of user k whose closed-form outage probability
/// stays within epsilon, floored at zero:
///   R_s = log2( (1 + gamma_k) / (1 + t_k p_k / sigma_e^2) ).
/// Returns 0 when p_k = 0.
double max_secret_rate(const VectorXd& power_w, const MatrixXd& beta,
                       const ChannelRealization& ch, const SystemConfig& cfg, int k);

/// Evaluates every original constraint and returns signed violations.
/// Decoding-order rows use non-strict comparison with the lower-index-first
/// tie break so measure-zero ties never flag.
FeasibilityReport feasibility_check(const Allocation& alloc,
                                    const ChannelRealization& ch,
                                    const SystemConfig& cfg, double tol,
                                    const FeasibilityOptions& opts = {});

}  // namespace secoff::model
