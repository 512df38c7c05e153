#include "doctest.h"

#include "sechyp/flow.hpp"

using namespace sechyp;

namespace {
Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}
IntegratorConfig tight() {
    IntegratorConfig c;
    c.rel_tol = 1e-10;
    c.abs_tol = 1e-12;
    return c;
}
} // namespace

TEST_CASE("linear diag(1,-2) has closed-form flow") {
    auto f = make_linear(diag2(1, -2));
    Vec x0(2);
    x0 << 1, 1;
    Vec x1 = flow_map(f, x0, 1.0, tight());
    CHECK(std::abs(x1[0] - std::exp(1.0)) < 1e-8);
    CHECK(std::abs(x1[1] - std::exp(-2.0)) < 1e-8);
    CHECK(flow_map(f, x0, 0.0, tight()) == x0);
}

TEST_CASE("equilibrium stays put") {
    auto f = make_lorenz();
    Vec o = Vec::Zero(3);
    Vec x = flow_map(f, o, 5.0, tight());
    CHECK(x.norm() < 1e-9);
}

TEST_CASE("semigroup law on random Lorenz points") {
    auto f = make_lorenz();
    Rng rng(1234);
    Box box = *f.trapping_region();
    for (int i = 0; i < 20; ++i) {
        Vec x0 = rng.point_in_box(box);
        // move onto the attractor-ish region first
        x0 = flow_map(f, x0, 3.0, tight());
        for (double s : {0.5, 1.0, 2.0}) {
            double t = s;
            Vec a = flow_map(f, x0, s + t, tight());
            Vec b = flow_map(f, flow_map(f, x0, t, tight()), s, tight());
            CHECK((a - b).norm() <= 1e-6 * (1 + x0.norm()));
        }
    }
}

TEST_CASE("lorenz stays in the trapping box") {
    auto f = make_lorenz();
    Vec x0(3);
    x0 << 1, 1, 1;
    Vec x = flow_map(f, x0, 10.0, tight());
    CHECK(f.trapping_region()->contains(x));
}

TEST_CASE("blow-up raises") {
    Mat A = diag2(5, 5);
    auto f = make_linear(A);
    Vec x0(2);
    x0 << 1, 1;
    CHECK_THROWS_AS(flow_map(f, x0, 10.0, tight()), BlowUp);
}

TEST_CASE("tangent growth of linear diagonal flow") {
    auto f = make_linear(diag2(1, -2));
    Vec x0(2);
    x0 << 0.1, 0.1;
    Mat F = Mat::Identity(2, 2);
    auto traj = integrate(f, x0, 4.0, tight(), &F, 0.0, 0.5);
    auto g = tangent_norm_growth(traj);
    Vec tot = g.total();
    CHECK(std::abs(tot[0] - 1.0 * 4.0) < 1e-6);
    CHECK(std::abs(tot[1] - (-2.0) * 4.0) < 1e-6);
}

TEST_CASE("rotation field tangent growth vanishes") {
    Mat A(2, 2);
    A << 0, -1, 1, 0;
    auto f = make_linear(A);
    Vec x0(2);
    x0 << 1, 0;
    Mat F = Mat::Identity(2, 2);
    auto traj = integrate(f, x0, 6.0, tight(), &F, 0.0, 0.5);
    Vec tot = tangent_norm_growth(traj).total();
    CHECK(std::abs(tot[0]) < 1e-8);
    CHECK(std::abs(tot[1]) < 1e-8);
}

TEST_CASE("liouville identity on lorenz") {
    // log det Dphi_t equals the integral of div G along the orbit; for Lorenz
    // the divergence is the constant -(sigma+1+beta).
    auto f = make_lorenz();
    Vec x0(3);
    x0 << 2, 3, 25;
    x0 = flow_map(f, x0, 2.0, tight());
    double T = 2.0;
    Mat F = Mat::Identity(3, 3);
    auto traj = integrate(f, x0, T, tight(), &F, 0.0, 0.25);
    double logdet = tangent_norm_growth(traj).total().sum();
    double expect = -(10.0 + 1.0 + 8.0 / 3.0) * T;
    CHECK(std::abs(logdet - expect) / std::abs(expect) < 1e-4);
}

TEST_CASE("tangent flow matches finite differences") {
    auto f = make_lorenz();
    Vec x0(3);
    x0 << -3, 4, 21;
    double t = 1.0, h = 1e-5;
    auto [x1, M] = flow_with_tangent(f, x0, t, tight(), Mat::Identity(3, 3));
    for (int j = 0; j < 3; ++j) {
        Vec e = Vec::Zero(3);
        e[j] = h;
        Vec fp = flow_map(f, x0 + e, t, tight());
        Vec fm = flow_map(f, x0 - e, t, tight());
        Vec fd = (fp - fm) / (2 * h);
        CHECK((M.col(j) - fd).norm() < 5e-6 * std::max(1.0, M.col(j).norm()));
    }
}

TEST_CASE("determinism: identical inputs give identical trajectories") {
    auto f = make_lorenz();
    Vec x0(3);
    x0 << 1, 2, 3;
    auto a = integrate(f, x0, 7.0, tight(), nullptr, 0.5);
    auto b = integrate(f, x0, 7.0, tight(), nullptr, 0.5);
    REQUIRE(a.states.size() == b.states.size());
    for (size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);
}

TEST_CASE("trap_check classifies sinks, saddles and the lorenz box") {
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-8;
    cfg.abs_tol = 1e-10;
    Box b;
    b.lo = Vec(2);
    b.hi = Vec(2);
    b.lo << -1, -1;
    b.hi << 1, 1;
    auto sink = make_linear(diag2(-1, -1));
    CHECK(trap_check(sink, b, 3, 10.0, cfg).pass);
    auto saddle = make_linear(diag2(1, -1));
    CHECK_FALSE(trap_check(saddle, b, 3, 10.0, cfg).pass);

    auto lorenz = make_lorenz();
    auto rep = trap_check(lorenz, *lorenz.trapping_region(), 5, 50.0, cfg);
    CHECK(rep.pass);
    CHECK(rep.worst_margin > 0.5);
}

TEST_CASE("integrate samples on the requested grid") {
    auto f = make_lorenz();
    Vec x0(3);
    x0 << 1, 1, 20;
    auto traj = integrate(f, x0, 2.0, tight(), nullptr, 0.25);
    REQUIRE(traj.times.size() == 9);
    for (size_t i = 0; i < traj.times.size(); ++i)
        CHECK(traj.times[i] == doctest::Approx(0.25 * i).epsilon(1e-9));
}

TEST_CASE("suspension exact flow through integrate") {
    auto f = make_geolorenz_quotient();
    Vec x0(2);
    x0 << 0.3, 0.0;
    auto traj = integrate(f, x0, 3.0, tight(), nullptr, 1.0);
    REQUIRE(traj.states.size() == 4);
    const auto* m = f.map_model();
    CHECK(traj.states[1][0] == doctest::Approx(m->map(0.3)));
    CHECK(traj.states[3][0] == doctest::Approx(m->map(m->map(m->map(0.3)))));
}
