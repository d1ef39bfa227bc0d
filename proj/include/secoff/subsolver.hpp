#pragma once

#include "secoff/transform.hpp"

namespace secoff::subsolver {

enum class Status { optimal, max_iterations, degenerate };

struct Options {
    double tol = 1e-8;              ///< KKT residual target
    int max_newton = 200;           ///< Newton step cap per phase
    double barrier_decrease = 0.2;  ///< factor applied to the barrier weight 1/t
    double ls_alpha = 0.01;         ///< Armijo slope fraction
    double ls_beta = 0.5;           ///< backtracking shrink factor
};

struct Solution {
    VectorXd x;             ///< full-length primal, fixed entries pinned
    VectorXd multipliers;   ///< affine rows, then log rows, then exp rows
    double objective = 0.0;
    double kkt = 0.0;
    int newton_iterations = 0;
    Status status = Status::degenerate;
    bool used_phase1 = false;
};

/// Log-barrier interior-point solve of one subproblem. A warm start that is
/// strictly feasible skips phase I and resumes near its own barrier
/// parameter, so re-solving from a returned optimum converges immediately.
/// Deterministic for identical inputs.
Solution solve(const transform::ConvexSubproblem& sub, const VectorXd& x0,
               const Options& opts = {});

inline Solution solve(const transform::ConvexSubproblem& sub, const VectorXd& x0,
                      double tol) {
    Options o;
    o.tol = tol;
    return solve(sub, x0, o);
}

/// max of stationarity (over free coordinates), primal violation, and
/// complementary-slackness violation, all in the infinity norm.
double kkt_residual(const transform::ConvexSubproblem& sub, const VectorXd& x,
                    const VectorXd& multipliers);

}  // namespace secoff::subsolver
