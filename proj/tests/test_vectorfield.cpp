#include "doctest.h"

#include "sechyp/vectorfield.hpp"

using namespace sechyp;

namespace {
Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}
} // namespace

TEST_CASE("linear field evaluates A x") {
    auto f = make_linear(diag2(1, -2));
    Vec x(2);
    x << 1, 1;
    Vec g = f.evaluate(x);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(-2.0));
    CHECK(f.jacobian(x) == diag2(1, -2));
}

TEST_CASE("lorenz right-hand side at fixed points and (1,1,1)") {
    auto f = make_lorenz();
    Vec o = Vec::Zero(3);
    CHECK(f.evaluate(o).norm() == doctest::Approx(0.0));
    Vec x(3);
    x << 1, 1, 1;
    Vec g = f.evaluate(x);
    CHECK(g[0] == doctest::Approx(0.0));
    CHECK(g[1] == doctest::Approx(26.0));
    CHECK(g[2] == doctest::Approx(1.0 - 8.0 / 3.0));
}

TEST_CASE("lorenz jacobian at the origin matches the hand derivative") {
    auto f = make_lorenz();
    Mat J = f.jacobian(Vec::Zero(3));
    Mat expect(3, 3);
    expect << -10, 10, 0, 28, -1, 0, 0, 0, -8.0 / 3.0;
    CHECK((J - expect).norm() == doctest::Approx(0.0));
}

TEST_CASE("analytic vs finite-difference jacobians on trapping-box samples") {
    for (auto name : {"lorenz", "bowen"}) {
        auto f = make_system(name, {});
        REQUIRE(f.has_analytic_jacobian());
        Box box = f.domain_box();
        int bad = 0;
        for (const Vec& x : halton_in_box(box, 100)) {
            Mat Ja = f.jacobian(x);
            double h = std::max(1e-6, 1e-6 * x.norm());
            Mat Jfd(f.dim(), f.dim());
            for (int j = 0; j < f.dim(); ++j) {
                Vec xp = x, xm = x;
                xp[j] += h;
                xm[j] -= h;
                Jfd.col(j) = (f.evaluate(xp) - f.evaluate(xm)) / (2 * h);
            }
            if ((Ja - Jfd).norm() >= 1e-4) ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("declared singularities are equilibria") {
    for (auto info : list_systems()) {
        auto f = make_system(info.name, {});
        for (const auto& s : f.singularities())
            CHECK(f.evaluate(s.location).norm() < 1e-10);
    }
}

TEST_CASE("bowen saddles satisfy the contraction-product inequality") {
    auto f = make_bowen();
    double prod_minus = 1.0, prod_plus = 1.0;
    int saddles = 0;
    for (const auto& s : f.singularities()) {
        double lp = -1e18, lm = 1e18;
        for (auto ev : s.eigenvalues) {
            lp = std::max(lp, ev.real());
            lm = std::min(lm, ev.real());
        }
        if (lm < 0 && lp > 0) {
            ++saddles;
            prod_minus *= -lm;
            prod_plus *= lp;
        }
    }
    CHECK(saddles == 2);
    CHECK(prod_minus > prod_plus);
    CHECK_THROWS_AS(make_bowen(2.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("perturb: zero parameter shift is the identity spec") {
    auto f = make_lorenz();
    Perturbation p;
    p.mode = Perturbation::Mode::ParameterShift;
    p.target_param = "rho";
    p.magnitude = 0.0;
    auto g = perturb(f, p);
    CHECK(f.same_spec(g));
    CHECK(c1_distance_estimate(f, g, f.domain_box(), 20) == doctest::Approx(0.0));
    p.target_param = "nope";
    CHECK_THROWS_AS(perturb(f, p), ConfigError);
}

TEST_CASE("parameter shift changes only the rho component") {
    auto f = make_lorenz();
    Perturbation p;
    p.mode = Perturbation::Mode::ParameterShift;
    p.target_param = "rho";
    p.magnitude = 0.1;
    auto g = perturb(f, p);
    Vec x(3);
    x << 3, -5, 17;
    Vec diff = g.evaluate(x) - f.evaluate(x);
    CHECK(diff[0] == doctest::Approx(0.0));
    CHECK(diff[1] == doctest::Approx(0.1 * 3));
    CHECK(diff[2] == doctest::Approx(0.0));
}

TEST_CASE("c1 distance of a rho shift is delta * max|x| + delta") {
    auto f = make_lorenz();
    Perturbation p;
    p.mode = Perturbation::Mode::ParameterShift;
    p.target_param = "rho";
    p.magnitude = 0.05;
    auto g = perturb(f, p);
    Box region;
    region.lo = Vec(3);
    region.hi = Vec(3);
    region.lo << -30, -30, 0;
    region.hi << 30, 30, 50;
    // difference field is (0, delta*x, 0); Jacobian difference has one entry delta
    double d = c1_distance_estimate(f, g, region, 400);
    double expect = 0.05 * 30 + 0.05;
    CHECK(d > 0.95 * expect);
    CHECK(d < 1.01 * expect);
    // monotone nondecreasing in n_samples on the fixed Halton sequence
    double d_small = c1_distance_estimate(f, g, region, 50);
    CHECK(d_small <= d + 1e-15);
}

TEST_CASE("bump perturbation respects the analytic C1 bound") {
    auto f = make_lorenz();
    Perturbation p;
    p.mode = Perturbation::Mode::Bump;
    p.magnitude = 0.01;
    p.bump_center = Vec(3);
    p.bump_center << 0, 0, 27;
    p.bump_radius = 5.0;
    p.bump_direction = Vec(3);
    p.bump_direction << 0, 0, 1;
    auto g = perturb(f, p);
    double d = c1_distance_estimate(f, g, f.domain_box(), 2000);
    double bound = 0.01 * (1.0 + kBumpChiPrimeMax / 5.0);
    CHECK(d <= bound * 1.0001);
    CHECK(d > 0.0);
    Perturbation z = p;
    z.magnitude = 0.0;
    CHECK(perturb(f, z).same_spec(f));
}

TEST_CASE("c1 distance is symmetric and satisfies the triangle inequality") {
    auto a = make_lorenz();
    auto b = make_lorenz(10, 28.2, 8.0 / 3.0);
    auto c = make_lorenz(10.15, 28.0, 8.0 / 3.0);
    Box box = a.domain_box();
    double ab = c1_distance_estimate(a, b, box, 64);
    double ba = c1_distance_estimate(b, a, box, 64);
    double ac = c1_distance_estimate(a, c, box, 64);
    double cb = c1_distance_estimate(c, b, box, 64);
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab <= ac + cb + 1e-12);
}

TEST_CASE("quotient suspension map model") {
    auto f = make_geolorenz_quotient();
    const auto* m = f.map_model();
    REQUIRE(m != nullptr);
    CHECK(m->map(0.25) == doctest::Approx(-0.5));
    CHECK(m->map(-0.25) == doctest::Approx(0.5));
    CHECK(m->map(1.0) == doctest::Approx(1.0));
    CHECK(m->roof == doctest::Approx(1.0));
    Vec x(2);
    x << 0.3, 0.25;
    Vec out;
    Mat F = Mat::Identity(2, 2);
    f.exact_flow(x, 2.0, out, &F);
    CHECK(out[0] == doctest::Approx(m->map(m->map(0.3))));
    CHECK(out[1] == doctest::Approx(0.25));
    CHECK(F(0, 0) == doctest::Approx(4.0));
    CHECK(F(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("registry lists the built-ins") {
    auto infos = list_systems();
    std::vector<std::string> names;
    for (auto& i : infos) names.push_back(i.name);
    for (auto want : {"linear", "lorenz", "geolorenz-quotient", "bowen", "double-lorenz"})
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
    CHECK_THROWS_AS(make_system("nope", {}), ConfigError);
}
