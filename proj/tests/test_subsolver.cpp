#include "secoff/subsolver.hpp"

#include <cmath>

#include "doctest.h"
#include "secoff/model.hpp"
#include "secoff/rng.hpp"
#include "test_util.hpp"

using namespace secoff;
using namespace secoff::subsolver;
using testutil::default_config;

namespace {

transform::ConvexSubproblem blank(int n) {
    transform::ConvexSubproblem sub;
    sub.layout = transform::VarLayout(0);
    sub.layout.n = n;
    sub.cubic = VectorXd::Zero(n);
    sub.linear = VectorXd::Zero(n);
    sub.is_fixed.assign(n, 0);
    sub.fixed_value = VectorXd::Zero(n);
    sub.anchor = VectorXd::Zero(n);
    return sub;
}

void add_row(transform::ConvexSubproblem& sub, const VectorXd& a, double rhs) {
    sub.rows.push_back({a, rhs, transform::RowTag::bound, -1, -1});
}

// min x^2 subject to x >= 1.
transform::ConvexSubproblem quadratic_toy() {
    auto sub = blank(1);
    sub.squares.push_back({VectorXd::Ones(1), 0.0, 1.0});
    add_row(sub, -VectorXd::Ones(1), -1.0);
    return sub;
}

// Single-user offloading: variables (scaled local bits, power, rate, sinr).
struct SingleUser {
    SystemConfig cfg = default_config(1, 1e5);
    ChannelRealization ch;
    double tau = 0.0;
    transform::ConvexSubproblem sub;
    VectorXd x0;

    SingleUser() {
        ch = model::sample_channels(cfg, 77);
        tau = ch.tau[0];
        sub = blank(4);
        double scale = cfg.bits_per_rate_unit();
        double task = cfg.task_bits[0] / scale;
        double c = cfg.cycles_per_bit[0];
        sub.cubic[0] = cfg.capacitance[0] * c * c * c * scale * scale * scale /
                       (cfg.deadline_s * cfg.deadline_s);
        sub.linear[1] = cfg.deadline_s;

        VectorXd a = VectorXd::Zero(4);
        a[0] = -1.0;
        a[2] = -1.0;
        add_row(sub, a, -task);  // task/scale <= l + R
        a.setZero();
        a[3] = 1.0;
        a[1] = -tau;
        add_row(sub, a, 0.0);  // b <= tau p
        add_row(sub, -VectorXd::Unit(4, 0), 0.0);
        add_row(sub, VectorXd::Unit(4, 0), task);
        add_row(sub, -VectorXd::Unit(4, 1), 0.0);
        add_row(sub, -VectorXd::Unit(4, 2), 0.0);
        add_row(sub, -VectorXd::Unit(4, 3), 0.0);
        sub.log_rows.push_back({2, 3});  // R <= log2(1 + b)

        x0.resize(4);
        double rate = 0.6 * task;
        double b = std::exp2(rate + 0.05) - 1.0;
        x0 << 0.5 * task, 2.0 * b / tau, rate, b;
    }

    double grid_best(int points) const {
        double best = std::numeric_limits<double>::infinity();
        double c = cfg.cycles_per_bit[0];
        for (int i = 0; i < points; ++i) {
            double l = cfg.task_bits[0] * i / (points - 1);
            double local = cfg.capacitance[0] * c * c * c * l * l * l /
                           (cfg.deadline_s * cfg.deadline_s);
            for (int j = 0; j < points; ++j) {
                double p = std::exp(std::log(1e-6) +
                                    (std::log(10.0) - std::log(1e-6)) * j /
                                        (points - 1));
                double rate = std::log2(1.0 + tau * p);
                if (cfg.bits_per_rate_unit() * rate < cfg.task_bits[0] - l)
                    continue;
                best = std::min(best, local + p * cfg.deadline_s);
            }
        }
        return best;
    }
};

}  // namespace

TEST_CASE("active bound toy lands on the constraint") {
    auto sub = quadratic_toy();
    auto sol = solve(sub, VectorXd::Constant(1, 3.0));
    CHECK(sol.status == Status::optimal);
    CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.kkt <= 1e-8);
    CHECK(sol.multipliers[0] == doctest::Approx(2.0).epsilon(1e-4));

    SUBCASE("warm start at the optimum converges immediately") {
        auto again = solve(sub, sol.x);
        CHECK(again.status == Status::optimal);
        CHECK(again.newton_iterations <= 2);
        CHECK_FALSE(again.used_phase1);
    }
    SUBCASE("infeasible start goes through phase one") {
        auto cold = solve(sub, VectorXd::Constant(1, -5.0));
        CHECK(cold.status == Status::optimal);
        CHECK(cold.used_phase1);
        CHECK(cold.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("kkt_residual definition") {
    auto sub = quadratic_toy();

    SUBCASE("analytic optimum with the exact multiplier") {
        VectorXd x = VectorXd::Ones(1);
        VectorXd mult = VectorXd::Constant(1, 2.0);
        CHECK(kkt_residual(sub, x, mult) <= 1e-12);
    }
    SUBCASE("interior point with zero multipliers reduces to the gradient") {
        VectorXd x = VectorXd::Constant(1, 2.5);
        VectorXd mult = VectorXd::Zero(1);
        CHECK(kkt_residual(sub, x, mult) == doctest::Approx(5.0));
    }
    SUBCASE("residual shrinks with the perturbation") {
        auto sol = solve(sub, VectorXd::Constant(1, 3.0));
        double prev = std::numeric_limits<double>::infinity();
        for (double h : {1e-3, 1e-4, 1e-5}) {
            VectorXd x = sol.x;
            x[0] += h;
            double r = kkt_residual(sub, x, sol.multipliers);
            CHECK(r < prev);
            prev = r;
        }
    }
}

TEST_CASE("single-user offloading matches a dense grid search") {
    SingleUser prob;
    auto sol = solve(prob.sub, prob.x0);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.kkt <= 1e-8);

    double grid = prob.grid_best(400);
    CHECK(sol.objective <= grid * (1.0 + 1e-9));
    CHECK(std::abs(sol.objective - grid) / grid < 0.01);

    SUBCASE("warm start from the optimum") {
        auto again = solve(prob.sub, sol.x);
        CHECK(again.newton_iterations <= 2);
        CHECK(again.objective == doctest::Approx(sol.objective).epsilon(1e-9));
    }
    SUBCASE("row scaling does not move the argmin") {
        auto scaled = prob.sub;
        scaled.rows[0].a *= 1e3;
        scaled.rows[0].rhs *= 1e3;
        auto sol2 = solve(scaled, prob.x0);
        REQUIRE(sol2.status == Status::optimal);
        CHECK(sol2.x.isApprox(sol.x, 1e-5));
    }
}

TEST_CASE("solver result is optimal against sampled feasible points") {
    SingleUser prob;
    auto sol = solve(prob.sub, prob.x0);
    REQUIRE(sol.status == Status::optimal);
    Rng rng(5);
    int tested = 0;
    while (tested < 50) {
        VectorXd x = sol.x;
        for (int i = 0; i < 4; ++i) x[i] *= rng.uniform(0.7, 1.4);
        bool feasible = true;
        for (const auto& r : prob.sub.rows)
            if (r.a.dot(x) - r.rhs > 0.0) feasible = false;
        if (x[2] - std::log2(1.0 + x[3]) > 0.0) feasible = false;
        if (!feasible) continue;
        ++tested;
        CHECK(prob.sub.objective(x) >= sol.objective - 1e-7);
    }
}

TEST_CASE("full linearized subproblem solves from its own anchor") {
    auto cfg = default_config();
    auto ch = model::sample_channels(cfg, 55);
    auto [alloc, aux] = transform::init_point(cfg, ch);
    auto state = PddState::init(cfg.users);
    auto sub = transform::linearize(alloc, aux, cfg, ch, state);
    VectorXd x0 = transform::pack_point(alloc, aux, cfg);

    auto sol = solve(sub, x0);
    REQUIRE(sol.status == Status::optimal);
    CHECK(sol.kkt <= 1e-8);
    // The anchor is feasible for its own surrogates, so the solve improves it.
    CHECK(sol.objective <= sub.objective(x0) + 1e-9);

    SUBCASE("fixed variables stay pinned") {
        auto topts = transform::TransformOptions{};
        topts.optimize_order = false;
        auto sub2 = transform::linearize(alloc, aux, cfg, ch, state, topts);
        auto sol2 = solve(sub2, x0);
        REQUIRE(sol2.status == Status::optimal);
        for (int k = 0; k < cfg.users; ++k)
            for (int l = 0; l < cfg.users; ++l)
                if (k != l)
                    CHECK(sol2.x[sub2.layout.beta(k, l)] == alloc.beta(k, l));
    }
}
