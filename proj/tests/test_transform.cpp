#include "secoff/transform.hpp"

#include <cmath>

#include "doctest.h"
#include "secoff/model.hpp"
#include "secoff/rng.hpp"
#include "test_util.hpp"

using namespace secoff;
using namespace secoff::transform;
using testutil::default_config;

namespace {

struct Fixture {
    SystemConfig cfg = default_config();
    ChannelRealization ch;
    Allocation alloc;
    AuxPoint aux;
    PddState state;

    explicit Fixture(std::uint64_t seed = 101) {
        ch = model::sample_channels(cfg, seed);
        std::tie(alloc, aux) = init_point(cfg, ch);
        state = PddState::init(cfg.users);
    }
};

const AffineRow& find_row(const ConvexSubproblem& sub, RowTag tag, int user,
                          int other = -1) {
    for (const auto& r : sub.rows)
        if (r.tag == tag && r.user == user && (other < 0 || r.other == other))
            return r;
    REQUIRE(false);
    return sub.rows.front();
}

double row_value(const AffineRow& r, const VectorXd& x) {
    return r.a.dot(x) - r.rhs;
}

// Random strictly positive point in the subproblem coordinates.
VectorXd random_point(const VarLayout& lay, Rng& rng) {
    VectorXd x(lay.n);
    for (int i = 0; i < lay.n; ++i) x[i] = rng.uniform(0.1, 3.0);
    return x;
}

}  // namespace

TEST_CASE("pack and extract round-trip") {
    Fixture f;
    VectorXd x = pack_point(f.alloc, f.aux, f.cfg);
    auto [alloc2, aux2] = extract_point(x, f.aux.mu, f.cfg);
    CHECK(alloc2.local_bits.isApprox(f.alloc.local_bits, 1e-14));
    CHECK(alloc2.power_w.isApprox(f.alloc.power_w, 1e-14));
    CHECK(alloc2.beta == f.alloc.beta);
    CHECK(aux2.w.isApprox(f.aux.w, 1e-14));
}

TEST_CASE("surrogates agree with their bilinear forms at the anchor") {
    Fixture f;
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    const auto& x = sub.anchor;
    const auto lay = sub.layout;

    for (int k = 0; k < f.cfg.users; ++k) {
        double b = x[lay.sinr_lb(k)], pi = x[lay.intf_ub(k)], p = x[lay.power(k)];
        double u = x[lay.u(k)], w = x[lay.w(k)], phi = x[lay.phi(k)];
        double ds = x[lay.delta(k)];
        double tau = f.ch.tau[k];

        CHECK(row_value(find_row(sub, RowTag::sinr_product, k), x) ==
              doctest::Approx(b * pi - tau * p).epsilon(1e-12));
        CHECK(row_value(find_row(sub, RowTag::delta_product, k), x) ==
              doctest::Approx(pi * ds - u).epsilon(1e-12));
        CHECK(row_value(find_row(sub, RowTag::phi_product, k), x) ==
              doctest::Approx(phi * w - (pi + tau * p - u)).epsilon(1e-12));
        CHECK(row_value(find_row(sub, RowTag::power_product, k), x) ==
              doctest::Approx(p * u - w).epsilon(1e-12));

        double intf = 0.0;
        for (int l = 0; l < f.cfg.users; ++l)
            if (l != k) intf += f.ch.tau[l] * x[lay.beta(k, l)] * x[lay.power(l)];
        CHECK(row_value(find_row(sub, RowTag::interference, k), x) ==
              doctest::Approx(1.0 + intf - pi).epsilon(1e-12));

        for (int l = 0; l < f.cfg.users; ++l) {
            if (l == k) continue;
            double truth = x[lay.beta(k, l)] * x[lay.power(l)] -
                           tau / f.ch.tau[l] * x[lay.power(k)];
            CHECK(row_value(find_row(sub, RowTag::order_product, k, l), x) ==
                  doctest::Approx(truth).epsilon(1e-12));
        }
    }
}

TEST_CASE("surrogate residual equals the product of deviations") {
    Fixture f;
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    const auto lay = sub.layout;
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        VectorXd x = random_point(lay, rng);
        for (int k = 0; k < f.cfg.users; ++k) {
            double db = x[lay.sinr_lb(k)] - sub.anchor[lay.sinr_lb(k)];
            double dpi = x[lay.intf_ub(k)] - sub.anchor[lay.intf_ub(k)];
            double truth =
                x[lay.sinr_lb(k)] * x[lay.intf_ub(k)] - f.ch.tau[k] * x[lay.power(k)];
            double surrogate = row_value(find_row(sub, RowTag::sinr_product, k), x);
            CHECK(truth - surrogate == doctest::Approx(db * dpi).epsilon(1e-10));

            double dphi = x[lay.phi(k)] - sub.anchor[lay.phi(k)];
            double dw = x[lay.w(k)] - sub.anchor[lay.w(k)];
            double truth_phi = x[lay.phi(k)] * x[lay.w(k)] -
                               (x[lay.intf_ub(k)] + f.ch.tau[k] * x[lay.power(k)] -
                                x[lay.u(k)]);
            double sur_phi = row_value(find_row(sub, RowTag::phi_product, k), x);
            CHECK(truth_phi - sur_phi == doctest::Approx(dphi * dw).epsilon(1e-10));
        }
    }
}

TEST_CASE("expansion around ones bounds the candidate below the true product") {
    Fixture f;
    f.aux.b.setOnes();
    f.aux.pi.setOnes();
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    const auto lay = sub.layout;
    VectorXd x = sub.anchor;
    x[lay.sinr_lb(0)] = 2.0;
    x[lay.intf_ub(0)] = 2.0;
    const auto& row = find_row(sub, RowTag::sinr_product, 0);
    double surrogate_product =
        row_value(row, x) + f.ch.tau[0] * x[lay.power(0)];
    CHECK(surrogate_product == doctest::Approx(3.0));
    CHECK(surrogate_product < 2.0 * 2.0);  // not a global upper bound
}

TEST_CASE("penalty families vanish on a consistent binary order") {
    Fixture f;
    f.state.rho = 10.0;
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    VectorXd x = pack_point(f.alloc, f.aux, f.cfg);
    double energy = model::total_energy(f.alloc, f.cfg).total_j;
    CHECK(sub.objective(x) == doctest::Approx(energy).epsilon(1e-12));
}

TEST_CASE("secrecy floor row carries the restored noise power") {
    Fixture f;
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    for (int k = 0; k < f.cfg.users; ++k) {
        const auto& row = find_row(sub, RowTag::secrecy_floor, k);
        double expect = model::secrecy_slope(f.cfg, f.ch, k) / f.cfg.noise_eve_w;
        CHECK(row.rhs == doctest::Approx(-expect).epsilon(1e-12));
        CHECK(expect == doctest::Approx(0.0230259).epsilon(1e-5));
    }
}

TEST_CASE("subproblem objective is convex along random directions") {
    Fixture f;
    f.state.rho = 0.05;
    f.state.lambda1.setConstant(0.3);
    f.state.lambda2.setConstant(-0.2);
    f.state.lambda3.setConstant(0.1);
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        VectorXd x = random_point(sub.layout, rng);
        VectorXd d(sub.layout.n);
        for (int i = 0; i < d.size(); ++i) d[i] = rng.uniform(-1.0, 1.0);
        d.normalize();
        const double h = 1e-4;
        VectorXd xp = x + h * d, xm = x - h * d;
        // Stay in the cubic domain.
        bool ok = true;
        for (int i = 0; i < x.size(); ++i)
            if (sub.cubic[i] > 0.0 && (xp[i] < 0.0 || xm[i] < 0.0)) ok = false;
        if (!ok) continue;
        double second =
            sub.objective(xp) - 2.0 * sub.objective(x) + sub.objective(xm);
        CHECK(second >= -1e-8);
    }
}

TEST_CASE("gradient matches central finite differences") {
    Fixture f;
    f.state.rho = 0.5;
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        VectorXd x = random_point(sub.layout, rng);
        VectorXd g = sub.objective_gradient(x);
        for (int i = 0; i < x.size(); i += 3) {
            double h = 1e-6 * std::max(1.0, std::abs(x[i]));
            VectorXd xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fd = (sub.objective(xp) - sub.objective(xm)) / (2.0 * h);
            CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("vanishing penalty weight dominates any bounded energy") {
    Fixture f;
    // Force fractional beta so the residuals cannot vanish.
    f.alloc.beta.setConstant(0.5);
    f.alloc.beta.diagonal().setZero();
    f.aux.mu = f.alloc.beta;

    auto penalty_at = [&](double rho) {
        PddState s = PddState::init(f.cfg.users);
        s.rho = rho;
        auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, s);
        VectorXd x = pack_point(f.alloc, f.aux, f.cfg);
        return sub.objective(x) - model::total_energy(f.alloc, f.cfg).total_j;
    };
    double small = penalty_at(1e-6), large = penalty_at(1e-2);
    CHECK(small > 1e3 * large);
    CHECK(small > 1e3 * model::total_energy(f.alloc, f.cfg).total_j);
}

TEST_CASE("init_point produces a feasible anchor") {
    SUBCASE("zero tasks sit at the power floor") {
        auto cfg = default_config(3, 0.0);
        auto ch = model::sample_channels(cfg, 3);
        auto [alloc, aux] = init_point(cfg, ch);
        CHECK(alloc.power_w.maxCoeff() <= 1e-9);
        CHECK(model::total_energy(alloc, cfg).total_j < 1e-9);
    }
    SUBCASE("single user baseline passes the ground-truth check") {
        auto cfg = default_config(1, 4e5);
        auto ch = model::sample_channels(cfg, 12);
        auto [alloc, aux] = init_point(cfg, ch);
        auto rep = model::feasibility_check(alloc, ch, cfg, 1e-9);
        CHECK(rep.feasible);
    }
    SUBCASE("three users, order residuals vanish by construction") {
        Fixture f;
        auto v = violation_vector(f.alloc, f.aux);
        CHECK(v.inf_norm == 0.0);
        auto rep = model::feasibility_check(f.alloc, f.ch, f.cfg, 1e-6);
        CHECK(rep.feasible);
    }
}

TEST_CASE("violation_vector stacks the three residual families") {
    auto cfg = default_config(2);
    Allocation a = Allocation::zeros(2);
    AuxPoint aux;
    aux.mu = MatrixXd::Zero(2, 2);

    SUBCASE("binary consistent point has no residual") {
        a.beta(0, 1) = 1.0;
        aux.mu = a.beta;
        auto v = violation_vector(a, aux);
        CHECK(v.inf_norm == 0.0);
    }
    SUBCASE("half-half split leaves only the product residual") {
        a.beta(0, 1) = a.beta(1, 0) = 0.5;
        aux.mu = a.beta;
        auto v = violation_vector(a, aux);
        REQUIRE(v.g.size() == 5);
        CHECK(v.g[0] == 0.0);                       // beta - mu
        CHECK(v.g[2] == doctest::Approx(0.25));     // beta (1 - mu)
        CHECK(v.g[4] == doctest::Approx(0.0));      // pair sum
        CHECK(v.inf_norm == doctest::Approx(0.25));
    }
    SUBCASE("unit beta against zero mu") {
        a.beta(0, 1) = 1.0;
        a.beta(1, 0) = 0.0;
        aux.mu.setZero();
        auto v = violation_vector(a, aux);
        CHECK(v.g[0] == doctest::Approx(1.0));  // beta - mu
        CHECK(v.g[2] == doctest::Approx(1.0));  // beta (1 - mu)
    }
}

TEST_CASE("degenerate anchors are lifted before expansion") {
    Fixture f;
    f.alloc.power_w.setZero();
    f.aux.w.setZero();
    f.aux.b.setZero();
    auto sub = linearize(f.alloc, f.aux, f.cfg, f.ch, f.state);
    const auto& row = find_row(sub, RowTag::phi_product, 0);
    CHECK(row.a[sub.layout.phi(0)] >= 1e-9);  // lifted w anchor
    const auto& srow = find_row(sub, RowTag::sinr_product, 0);
    CHECK(srow.a[sub.layout.intf_ub(0)] >= 1e-9);  // lifted b anchor
}
