#pragma once

#include "secoff/subsolver.hpp"
#include "secoff/transform.hpp"
#include "secoff/types.hpp"

namespace secoff::pdd {

struct PddConfig {
    double rho0 = 10.0;
    double penalty_decrease = 0.6;  ///< c
    double violation_tol = 1e-4;    ///< outer tolerance on ||g||_inf
    double objective_tol = 1e-4;    ///< inner tolerance on relative AL change
    int inner_max_iterations = 50;
    int outer_max_iterations = 100;
    double rho_floor = 1e-8;
    double feasibility_tol = 1e-6;
    subsolver::Options solver;
    transform::TransformOptions transform;
};

enum class SolveStatus { converged, iteration_cap, infeasible_final, solver_failure };

const char* to_string(SolveStatus s);

struct TraceRow {
    int outer = 0;
    int inner = 0;
    double energy_j = 0.0;
    double al_objective = 0.0;
    double violation_inf = 0.0;
    double rho = 0.0;
};

struct SolveResult {
    Allocation alloc;  ///< decoding order rounded binary, rates repaired
    AuxPoint aux;
    EnergyBreakdown energy;
    FeasibilityReport feasibility;
    SolveStatus status = SolveStatus::solver_failure;
    PddState state;
    std::vector<TraceRow> trace;
    double final_violation = 0.0;
    double max_kkt = 0.0;  ///< worst KKT residual over accepted subproblem solves
    int outer_iterations = 0;
    int inner_iterations = 0;
    double repair_delta_j = 0.0;  ///< energy added by the post-rounding repair
};

/// Closed-form minimizer of the two penalty families in mu, elementwise.
MatrixXd mu_update(const MatrixXd& beta, double rho, const MatrixXd& lambda1,
                   const MatrixXd& lambda2);

/// Physical energy plus the three quadratic penalty families.
double al_objective(const Allocation& alloc, const AuxPoint& aux,
                    const SystemConfig& cfg, const PddState& state,
                    bool order_penalties);

/// Alternates the mu update with one surrogate subproblem solve until the
/// relative AL-objective change drops below the inner tolerance. Updates the
/// anchor in place; returns false if the subsolver fails twice in a row.
bool inner_loop(PddState& state, Allocation& alloc, AuxPoint& aux,
                const SystemConfig& cfg, const ChannelRealization& ch,
                const PddConfig& config, std::vector<TraceRow>* trace,
                double* max_kkt);

/// Dual ascent when the violation is within the current threshold, penalty
/// shrink otherwise; advances the outer index either way.
void outer_update(PddState& state, const transform::Violation& g);

/// Binary decoding order from the products tau_k p_k, larger product decoded
/// first, exact ties broken toward the lower user index.
MatrixXd round_decoding_order(const VectorXd& power_w, const ChannelRealization& ch);

/// Full double-loop run: feasible start, inner/outer schedule, final order
/// rounding with a rate/local-bits repair pass, and a ground-truth
/// feasibility report on the original constraints.
SolveResult solve(const SystemConfig& cfg, const ChannelRealization& ch,
                  const PddConfig& config = {});

}  // namespace secoff::pdd
