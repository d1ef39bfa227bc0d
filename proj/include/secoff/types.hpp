#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace secoff {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Physical and task parameters of one uplink offloading scenario.
///
/// All quantities are stored in SI base units (W, Hz, s, m, bits);
/// dBm and other presentation units are converted at the config-parsing
/// boundary, never here.
struct SystemConfig {
    int users = 0;                 ///< K
    double bandwidth_hz = 0.0;     ///< B
    double deadline_s = 0.0;       ///< T
    double path_loss_exp = 0.0;    ///< alpha
    double noise_bs_w = 0.0;       ///< sigma_b^2
    double noise_eve_w = 0.0;      ///< sigma_e^2
    double secrecy_outage_max = 0.0;  ///< epsilon in (0,1)

    VectorXd task_bits;        ///< L_k
    VectorXd cycles_per_bit;   ///< C_k
    VectorXd capacitance;      ///< varsigma_k, J*s^2/cycle^3
    VectorXd dist_bs_m;        ///< d_k
    VectorXd dist_eve_m;       ///< d_{e,k}

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    /// Product B*T, the bits carried by one unit of spectral efficiency.
    double bits_per_rate_unit() const { return bandwidth_hz * deadline_s; }
};

/// One block-fading draw with users relabeled so tau is strictly descending.
struct ChannelRealization {
    VectorXd fading_gain2;   ///< |g_k|^2, unit-mean exponential
    VectorXd tau;            ///< d_k^-alpha |g_k|^2 / sigma_b^2, per watt
    VectorXd eve_rate;       ///< d_{e,k}^alpha, rate parameter of |h_{e,k}|^2
    std::vector<int> order;  ///< sorted position -> original user index

    int users() const { return static_cast<int>(tau.size()); }
};

/// Decision variables for one problem instance.
struct Allocation {
    VectorXd local_bits;     ///< l_k
    VectorXd power_w;        ///< p_k
    VectorXd codeword_rate;  ///< R_{t,k}, bits/s/Hz
    VectorXd secret_rate;    ///< R_{s,k}, bits/s/Hz
    MatrixXd beta;           ///< decoding-order matrix, diagonal unused

    static Allocation zeros(int users);
    int users() const { return static_cast<int>(power_w.size()); }
};

/// Per-user link quantities derived from an allocation.
struct LinkMetrics {
    VectorXd gamma;        ///< BS-side SINR
    VectorXd bs_rate;      ///< C_{b,k} = log2(1 + gamma_k)
    VectorXd eve_gamma;    ///< Eve SINR at the mean eavesdropper gain
    VectorXd eve_rate;     ///< C_{e,k} at the mean eavesdropper gain
    VectorXd redundancy;   ///< R_{e,k} = R_{t,k} - R_{s,k}
    VectorXd theta;        ///< outage threshold on |h_{e,k}|^2
    VectorXd outage_prob;  ///< P_{so,k} in [0,1]
};

/// Energy split of an allocation.
struct EnergyBreakdown {
    VectorXd local_j;    ///< varsigma_k C_k^3 l_k^3 / T^2
    VectorXd offload_j;  ///< p_k * active transmit time
    VectorXd cpu_hz;     ///< implied equal CPU frequency C_k l_k / T
    double total_j = 0.0;
};

/// Which parts of the original constraint set a feasibility check covers.
/// Benchmark schemes drop the families their formulation does not carry.
struct FeasibilityOptions {
    bool check_secrecy = true;   ///< P_so <= eps and R_t >= R_s
    bool check_order = true;     ///< decoding order consistent with tau_k p_k
    bool with_interference = true;  ///< false for the per-slot OMA model
    double slot_fraction = 1.0;     ///< fraction of T available for offloading
};

/// Signed violations of the original constraints; positive means violated.
struct FeasibilityReport {
    VectorXd rate_deficit;        ///< (L_k - l_k)/(B T_slot) - R_{s,k}
    VectorXd capacity_excess;     ///< R_{t,k} - C_{b,k}
    VectorXd rate_order;          ///< R_{s,k} - R_{t,k}
    VectorXd outage_excess;       ///< P_{so,k} - eps
    VectorXd power_negative;      ///< -p_k
    VectorXd local_bits_low;      ///< -l_k
    VectorXd local_bits_high;     ///< l_k - L_k
    MatrixXd order_violation;     ///< 1 where beta contradicts tau_k p_k order
    MatrixXd pair_sum_violation;  ///< |beta_kl + beta_lk - 1| for k != l
    MatrixXd binary_violation;    ///< min(beta, 1-beta) distance to {0,1}

    double max_rel_violation = 0.0;  ///< worst normalized violation
    bool feasible = false;           ///< max_rel_violation <= tol
};

/// Auxiliary and relaxation variables anchored at one iterate.
struct AuxPoint {
    VectorXd b;        ///< SINR lower bounds
    VectorXd pi;       ///< interference-plus-one upper bounds
    VectorXd phi;      ///< secrecy threshold auxiliaries
    VectorXd u;        ///< pi * delta_s upper bounds
    VectorXd w;        ///< p * u upper bounds
    VectorXd delta_s;  ///< 2^{R_{s,k}}, cached
    MatrixXd mu;       ///< relaxation of beta, diagonal unused
};

/// Penalty/dual state of the double-loop schedule plus run traces.
struct PddState {
    double rho = 10.0;
    MatrixXd lambda1;  ///< duals of beta = mu
    MatrixXd lambda2;  ///< duals of beta (1 - mu) = 0
    MatrixXd lambda3;  ///< duals of beta_kl + beta_lk = 1, lower triangle used

    int inner_index = 0;  ///< i
    int outer_index = 0;  ///< j

    double penalty_decrease = 0.6;       ///< c
    double violation_tol = 1e-4;         ///< outer delta on ||g||_inf
    double objective_tol = 1e-4;         ///< inner delta on relative change
    int inner_max_iterations = 50;       ///< I_max
    int outer_max_iterations = 100;
    double rho_floor = 1e-8;

    /// eta_j = 0.3^j for the current outer index.
    double eta() const;

    std::vector<double> energy_trace;     ///< physical objective per inner solve
    std::vector<double> al_trace;         ///< AL objective per inner solve
    std::vector<double> violation_trace;  ///< ||g||_inf per outer iteration
    std::vector<double> rho_trace;        ///< rho per outer iteration
    std::vector<int> dual_branch_trace;   ///< 1 dual update, 0 penalty update

    static PddState init(int users);
};

}  // namespace secoff
