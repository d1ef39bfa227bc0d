#pragma once

#include <cstdint>

#include "secoff/types.hpp"

namespace secoff::oracle {

/// Power grid for exhaustive search. Log-spaced because energy-optimal
/// transmit powers span several decades.
struct GridSpec {
    double power_min_w = 1e-6;
    double power_max_w = 1.0;
    int points = 60;
    bool include_zero = true;  ///< adds the exact p = 0 candidate per user
    int max_enum_users = 4;    ///< refuse full order enumeration beyond this

    std::vector<double> power_values() const;
};

struct GridResult {
    double best_energy_j = 0.0;
    Allocation best;
    std::vector<int> best_order;  ///< decode position -> user index
    std::uint64_t evaluations = 0;
    std::uint64_t feasible_points = 0;
};

/// Enumerates every decoding order and every grid power combination, keeping
/// only combinations whose products tau_k p_k are consistent with the order.
/// Codeword rates sit at capacity and confidential rates at the closed-form
/// secrecy cap, which is optimal for fixed powers. Deterministic: ties keep
/// the first (lexicographic order, then lexicographic grid index) candidate.
GridResult brute_force_grid(const SystemConfig& cfg, const ChannelRealization& ch,
                            const GridSpec& grid);

struct SopEstimate {
    VectorXd estimate;
    VectorXd std_error;
    std::uint64_t samples = 0;
};

/// Empirical secrecy outage frequency from n i.i.d. eavesdropper fading draws
/// per user, with binomial standard errors. Users with p_k = 0 report 0.
SopEstimate monte_carlo_sop(const Allocation& alloc, const ChannelRealization& ch,
                            const SystemConfig& cfg, std::uint64_t n,
                            std::uint64_t seed);

}  // namespace secoff::oracle
