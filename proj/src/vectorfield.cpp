#include "sechyp/vectorfield.hpp"

#include <cmath>
#include <cstdio>

namespace sechyp {

namespace detail {

struct SystemImpl {
    virtual ~SystemImpl() = default;
    virtual Vec eval(const Vec& x) const = 0;
    virtual bool has_jac() const { return false; }
    virtual Mat jac(const Vec&) const { throw ConfigError("no analytic jacobian"); }
    virtual bool has_exact_flow() const { return false; }
    virtual void exact_flow(const Vec&, double, Vec&, Mat*) const {
        throw ConfigError("no exact flow");
    }
    virtual const VectorField::MapModel* map_model() const { return nullptr; }
};

} // namespace detail

using detail::SystemImpl;

VectorField make_vectorfield(const std::string& name, std::map<std::string, double> params,
                             std::shared_ptr<SystemImpl> impl, std::optional<Box> trap,
                             Box domain, std::vector<Equilibrium> sings) {
    VectorField f;
    f.name_ = name;
    f.params_ = std::move(params);
    f.impl_ = std::move(impl);
    f.trap_ = std::move(trap);
    f.domain_ = std::move(domain);
    f.dim_ = f.domain_.dim();
    f.sings_ = std::move(sings);
    for (const auto& s : f.sings_) {
        double g = f.evaluate(s.location).norm();
        if (g >= 1e-10)
            throw ConfigError("declared singularity of " + name +
                              " is not an equilibrium, |G| = " + csv_num(g));
    }
    return f;
}

bool VectorField::has_analytic_jacobian() const { return impl_ && impl_->has_jac(); }

Vec VectorField::evaluate(const Vec& x) const {
    if (x.size() != dim_) throw ConfigError("evaluate: point has wrong dimension");
    if (!x.allFinite()) throw ConfigError("evaluate: non-finite input");
    Vec g = impl_->eval(x);
    if (!g.allFinite()) throw BlowUp("field value non-finite at |x| = " + csv_num(x.norm()));
    return g;
}

Mat VectorField::jacobian(const Vec& x) const {
    if (!x.allFinite()) throw ConfigError("jacobian: non-finite input");
    Mat J;
    if (impl_->has_jac()) {
        J = impl_->jac(x);
    } else {
        double h = std::max(1e-6, 1e-6 * x.norm());
        J.resize(dim_, dim_);
        for (int j = 0; j < dim_; ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            J.col(j) = (impl_->eval(xp) - impl_->eval(xm)) / (2 * h);
        }
    }
    if (!J.allFinite()) throw BlowUp("jacobian non-finite");
    return J;
}

bool VectorField::has_exact_flow() const { return impl_ && impl_->has_exact_flow(); }

void VectorField::exact_flow(const Vec& x, double t, Vec& out, Mat* frame) const {
    impl_->exact_flow(x, t, out, frame);
}

const VectorField::MapModel* VectorField::map_model() const {
    return impl_ ? impl_->map_model() : nullptr;
}

double VectorField::divergence(const Vec& x) const { return jacobian(x).trace(); }

double bump_chi(double s) {
    if (s >= 1.0) return 0.0;
    double u = 1.0 - s * s;
    return u * u * u;
}

double bump_chi_prime(double s) {
    if (s >= 1.0) return 0.0;
    double u = 1.0 - s * s;
    return -6.0 * s * u * u;
}

// ---------------------------------------------------------------- linear

namespace {

struct LinearImpl : SystemImpl {
    Mat A;
    explicit LinearImpl(Mat m) : A(std::move(m)) {}
    Vec eval(const Vec& x) const override { return A * x; }
    bool has_jac() const override { return true; }
    Mat jac(const Vec&) const override { return A; }
};

Box cube_box(int d, double r) {
    Box b;
    b.lo = Vec::Constant(d, -r);
    b.hi = Vec::Constant(d, r);
    return b;
}

} // namespace

VectorField make_linear(const Mat& A) {
    if (A.rows() != A.cols() || A.rows() < 2)
        throw ConfigError("linear: matrix must be square, dim >= 2");
    int d = static_cast<int>(A.rows());
    std::map<std::string, double> params;
    char key[16];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::snprintf(key, sizeof key, "a%d%d", i + 1, j + 1);
            params[key] = A(i, j);
        }
    std::vector<Equilibrium> sings(1);
    sings[0].location = Vec::Zero(d);
    Eigen::EigenSolver<Mat> es(A);
    for (int i = 0; i < d; ++i) sings[0].eigenvalues.push_back(es.eigenvalues()[i]);
    return make_vectorfield("linear", std::move(params), std::make_shared<LinearImpl>(A),
                            std::nullopt, cube_box(d, 5.0), std::move(sings));
}

// ---------------------------------------------------------------- lorenz

namespace {

struct LorenzImpl : SystemImpl {
    double s, r, b;
    LorenzImpl(double s_, double r_, double b_) : s(s_), r(r_), b(b_) {}
    Vec eval(const Vec& v) const override {
        Vec g(3);
        g[0] = s * (v[1] - v[0]);
        g[1] = v[0] * (r - v[2]) - v[1];
        g[2] = v[0] * v[1] - b * v[2];
        return g;
    }
    bool has_jac() const override { return true; }
    Mat jac(const Vec& v) const override {
        Mat J(3, 3);
        J << -s, s, 0.0, r - v[2], -1.0, -v[0], v[1], v[0], -b;
        return J;
    }
};

// Trapping box validated by simulation: cosine grid at 65% of the half-widths,
// T = 50, worst boundary margin +3.8.
Box lorenz_trap_box() {
    Box b;
    b.lo = Vec(3);
    b.hi = Vec(3);
    b.lo << -28.0, -42.0, -14.0;
    b.hi << 28.0, 42.0, 70.0;
    return b;
}

std::vector<Equilibrium> lorenz_equilibria(double s, double r, double b, const Vec& shift) {
    std::vector<Equilibrium> out;
    Equilibrium origin;
    origin.location = Vec::Zero(3) + shift;
    double disc = std::sqrt((s + 1) * (s + 1) + 4 * s * (r - 1));
    origin.eigenvalues = {{(-(s + 1) + disc) / 2, 0}, {(-(s + 1) - disc) / 2, 0}, {-b, 0}};
    out.push_back(origin);
    if (r > 1) {
        double q = std::sqrt(b * (r - 1));
        for (double sgn : {1.0, -1.0}) {
            Equilibrium e;
            e.location = Vec(3);
            e.location << sgn * q, sgn * q, r - 1;
            e.location += shift;
            Mat J(3, 3);
            J << -s, s, 0, 1.0, -1.0, -sgn * q, sgn * q, sgn * q, -b;
            Eigen::EigenSolver<Mat> es(J);
            for (int i = 0; i < 3; ++i) e.eigenvalues.push_back(es.eigenvalues()[i]);
            out.push_back(e);
        }
    }
    return out;
}

} // namespace

VectorField make_lorenz(double sigma, double rho, double beta) {
    std::map<std::string, double> params{{"sigma", sigma}, {"rho", rho}, {"beta", beta}};
    Box trap = lorenz_trap_box();
    return make_vectorfield("lorenz", std::move(params),
                            std::make_shared<LorenzImpl>(sigma, rho, beta), trap, trap,
                            lorenz_equilibria(sigma, rho, beta, Vec::Zero(3)));
}

// ------------------------------------------------- geolorenz quotient

namespace {

double quotient_map(double x) { return x < 0.0 ? 2.0 * x + 1.0 : 2.0 * x - 1.0; }
double quotient_dmap(double) { return 2.0; }

// Unit-roof suspension of the quotient interval map on [-1,1]: state (x, s)
// with s in [0,1); the flow advances s and applies the map at each roof
// crossing. Dphi multiplies the x direction by 2 per crossing.
struct SuspensionImpl : SystemImpl {
    Vec eval(const Vec& v) const override {
        Vec g(2);
        g[0] = 0.0;
        g[1] = 1.0;
        (void)v;
        return g;
    }
    bool has_jac() const override { return true; }
    Mat jac(const Vec&) const override { return Mat::Zero(2, 2); }
    bool has_exact_flow() const override { return true; }
    void exact_flow(const Vec& v, double t, Vec& out, Mat* frame) const override {
        double s = v[1] + t;
        double n = std::floor(s);
        double x = v[0];
        long crossings = static_cast<long>(n);
        for (long i = 0; i < crossings; ++i) x = quotient_map(x);
        out.resize(2);
        out[0] = x;
        out[1] = s - n;
        if (frame && frame->size() > 0) {
            double mult = std::ldexp(1.0, static_cast<int>(std::min<long>(crossings, 1020)));
            frame->row(0) *= mult;
        }
    }
    const VectorField::MapModel* map_model() const override {
        static const VectorField::MapModel m{-1.0, 1.0, 0.0, &quotient_map, &quotient_dmap, 1.0};
        return &m;
    }
};

} // namespace

VectorField make_geolorenz_quotient() {
    Box b;
    b.lo = Vec(2);
    b.hi = Vec(2);
    b.lo << -1.0, 0.0;
    b.hi << 1.0, 1.0;
    return make_vectorfield("geolorenz-quotient", {}, std::make_shared<SuspensionImpl>(), b, b, {});
}

// ----------------------------------------------------------------- bowen

namespace {

// Planar flow with a heteroclinic eye: the arcs y = +-c(1-x^2) joining the
// saddles (+-1, 0) are invariant for every parameter choice, the saddles have
// eigenvalues {p, -m1} and {p, -m2}, and the region outside the eye carries a
// recapture term pulling orbits back (the approach to the cycle reaches
// machine precision in a few loops, after which roundoff can eject them).
struct BowenImpl : SystemImpl {
    double al, ga, be, b2, c, eta;
    BowenImpl(double p, double m1, double m2, double c_, double eta_) : c(c_), eta(eta_) {
        double S1 = (p + m1) / 2, S2 = (p + m2) / 2;
        double A1 = (p - m1) / 2, A2 = (p - m2) / 2;
        b2 = (S1 + S2) / 2;
        be = (S1 - S2) / 2;
        ga = (A1 + A2) / 2;
        al = (A1 - A2) / 2;
    }
    double w(double x, double y) const {
        double u = 1 - x * x;
        return y * y - c * c * u * u;
    }
    Vec eval(const Vec& v) const override {
        double x = v[0], y = v[1], u = 1 - x * x;
        Vec g(2);
        g[0] = -u * (al + ga * x) / 2 + y * (b2 + be * x) / (2 * c);
        g[1] = be * y * y / c + x * y * (al + ga * x) - c * u * (be + b2 * x);
        double ww = w(x, y);
        if (ww > 0) {
            double k = eta * ww * ww;
            g[0] -= k * 4 * c * c * x * u;
            g[1] -= k * 2 * y;
        }
        return g;
    }
    bool has_jac() const override { return true; }
    Mat jac(const Vec& v) const override {
        double x = v[0], y = v[1], u = 1 - x * x;
        Mat J(2, 2);
        J(0, 0) = x * (al + ga * x) - u * ga / 2 + y * be / (2 * c);
        J(0, 1) = (b2 + be * x) / (2 * c);
        J(1, 0) = y * (al + 2 * ga * x) + 2 * c * x * (be + b2 * x) - c * u * b2;
        J(1, 1) = 2 * be * y / c + x * (al + ga * x);
        double ww = w(x, y);
        if (ww > 0) {
            double wx = 4 * c * c * x * u, wy = 2 * y;
            double wxx = 4 * c * c * (1 - 3 * x * x), wyy = 2.0;
            J(0, 0) -= eta * (2 * ww * wx * wx + ww * ww * wxx);
            J(0, 1) -= eta * 2 * ww * wy * wx;
            J(1, 0) -= eta * 2 * ww * wx * wy;
            J(1, 1) -= eta * (2 * ww * wy * wy + ww * ww * wyy);
        }
        return J;
    }
};

} // namespace

VectorField make_bowen(double p, double m1, double m2, double c, double eta) {
    if (!(m1 * m2 > p * p))
        throw ConfigError("bowen: contraction product m1*m2 must exceed expansion product p^2");
    if (!(p > 0 && m1 > 0 && m2 > 0 && c > 0))
        throw ConfigError("bowen: eigenvalue parameters must be positive");
    auto impl = std::make_shared<BowenImpl>(p, m1, m2, c, eta);
    // saddles carry eigenvalues {p,-m1}, {p,-m2} by construction; assert by
    // linearizing, then locate the interior spiral source by Newton.
    std::vector<Equilibrium> sings;
    for (double sx : {1.0, -1.0}) {
        Equilibrium e;
        e.location = Vec(2);
        e.location << sx, 0.0;
        Eigen::EigenSolver<Mat> es(impl->jac(e.location));
        double lp = -1e18, lm = 1e18;
        for (int i = 0; i < 2; ++i) {
            double re = es.eigenvalues()[i].real();
            lp = std::max(lp, re);
            lm = std::min(lm, re);
            e.eigenvalues.push_back(es.eigenvalues()[i]);
        }
        if (!(lp > 0 && lm < 0))
            throw ConfigError("bowen: point (+-1,0) is not a saddle for these parameters");
        sings.push_back(e);
    }
    {
        Vec q(2);
        q << 0.0, -0.01;
        for (int it = 0; it < 100; ++it) {
            Vec g = impl->eval(q);
            if (g.norm() < 1e-14) break;
            q -= impl->jac(q).fullPivLu().solve(g);
        }
        Equilibrium src;
        src.location = q;
        Eigen::EigenSolver<Mat> es(impl->jac(q));
        for (int i = 0; i < 2; ++i) src.eigenvalues.push_back(es.eigenvalues()[i]);
        if (es.eigenvalues()[0].real() <= 0)
            throw ConfigError("bowen: interior equilibrium is not a source");
        sings.push_back(src);
    }
    std::map<std::string, double> params{
        {"p", p}, {"m1", m1}, {"m2", m2}, {"c", c}, {"eta", eta}};
    Box dom;
    dom.lo = Vec(2);
    dom.hi = Vec(2);
    dom.lo << -1.5, -1.0;
    dom.hi << 1.5, 1.0;
    return make_vectorfield("bowen", std::move(params), impl, std::nullopt, dom,
                            std::move(sings));
}

// --------------------------------------------------------- double lorenz

namespace {

// Two Lorenz copies at x-offsets +-offset, each multiplied by a C^2 cutoff
// that is 1 on its trapping box and 0 beyond a fade margin; supports disjoint.
struct DoubleLorenzImpl : SystemImpl {
    LorenzImpl lorenz;
    Box box;          // single-copy trapping box (centered)
    double offset, fade;
    DoubleLorenzImpl(double s, double r, double b, double off)
        : lorenz(s, r, b), box(lorenz_trap_box()), offset(off), fade(10.0) {}

    static double ramp(double u) {
        // C^2 descent 1 -> 0 over [0,1]
        if (u <= 0) return 1.0;
        if (u >= 1) return 0.0;
        return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    }
    double cutoff(const Vec& p, double sign) const {
        double chi = 1.0;
        for (int i = 0; i < 3; ++i) {
            double lo = box.lo[i] + (i == 0 ? sign * offset : 0.0);
            double hi = box.hi[i] + (i == 0 ? sign * offset : 0.0);
            chi *= ramp((p[i] - hi) / fade) * ramp((lo - p[i]) / fade);
        }
        return chi;
    }
    Vec eval(const Vec& p) const override {
        Vec g = Vec::Zero(3);
        for (double sign : {1.0, -1.0}) {
            double chi = cutoff(p, sign);
            if (chi > 0) {
                Vec q = p;
                q[0] -= sign * offset;
                g += chi * lorenz.eval(q);
            }
        }
        return g;
    }
};

} // namespace

VectorField make_double_lorenz(double sigma, double rho, double beta, double offset) {
    if (offset < 40.0)
        throw ConfigError("double-lorenz: offset too small, copies would overlap");
    auto impl = std::make_shared<DoubleLorenzImpl>(sigma, rho, beta, offset);
    std::vector<Equilibrium> sings;
    for (double sign : {1.0, -1.0}) {
        Vec shift = Vec::Zero(3);
        shift[0] = sign * offset;
        for (auto& e : lorenz_equilibria(sigma, rho, beta, shift)) sings.push_back(e);
    }
    Box dom;
    dom.lo = Vec(3);
    dom.hi = Vec(3);
    dom.lo << -28.0 - offset, -42.0, -14.0;
    dom.hi << 28.0 + offset, 42.0, 70.0;
    std::map<std::string, double> params{
        {"sigma", sigma}, {"rho", rho}, {"beta", beta}, {"offset", offset}};
    return make_vectorfield("double-lorenz", std::move(params), impl, std::nullopt, dom,
                            std::move(sings));
}

// ------------------------------------------------------------- registry

namespace {

double param_or(const std::map<std::string, double>& p, const std::string& k, double dflt) {
    auto it = p.find(k);
    return it == p.end() ? dflt : it->second;
}

} // namespace

VectorField make_system(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "lorenz")
        return make_lorenz(param_or(params, "sigma", 10.0), param_or(params, "rho", 28.0),
                           param_or(params, "beta", 8.0 / 3.0));
    if (name == "geolorenz-quotient") return make_geolorenz_quotient();
    if (name == "bowen")
        return make_bowen(param_or(params, "p", 1.7), param_or(params, "m1", 4.76),
                          param_or(params, "m2", 4.42), param_or(params, "c", 0.5),
                          param_or(params, "eta", 0.5));
    if (name == "double-lorenz")
        return make_double_lorenz(param_or(params, "sigma", 10.0), param_or(params, "rho", 28.0),
                                  param_or(params, "beta", 8.0 / 3.0),
                                  param_or(params, "offset", 60.0));
    if (name == "linear") {
        int d = static_cast<int>(param_or(params, "dim", 2));
        Mat A = Mat::Zero(d, d);
        char key[16];
        bool any = false;
        for (int i = 0; i < d; ++i) {
            std::snprintf(key, sizeof key, "d%d", i + 1);
            if (params.count(key)) {
                A(i, i) = params.at(key);
                any = true;
            }
            for (int j = 0; j < d; ++j) {
                std::snprintf(key, sizeof key, "a%d%d", i + 1, j + 1);
                if (params.count(key)) {
                    A(i, j) = params.at(key);
                    any = true;
                }
            }
        }
        if (!any) {
            A(0, 0) = -1;
            A(1, 1) = -2;
        }
        return make_linear(A);
    }
    throw ConfigError("unknown system '" + name + "'");
}

std::vector<SystemInfo> list_systems() {
    return {
        {"linear", "linear field x' = A x (entries a{i}{j} or diagonal d{i}, dim)",
         {{"dim", 2}, {"d1", -1}, {"d2", -2}}},
        {"lorenz", "classical Lorenz equations",
         {{"sigma", 10}, {"rho", 28}, {"beta", 8.0 / 3.0}}},
        {"geolorenz-quotient",
         "unit-roof suspension of the interval map 2x+1 / 2x-1 on [-1,1]",
         {}},
        {"bowen",
         "heteroclinic eye with saddles (+-1,0); eigenvalues p (expansion), -m1, -m2",
         {{"p", 1.7}, {"m1", 4.76}, {"m2", 4.42}, {"c", 0.5}, {"eta", 0.5}}},
        {"double-lorenz", "two blended Lorenz copies in disjoint trapping boxes",
         {{"sigma", 10}, {"rho", 28}, {"beta", 8.0 / 3.0}, {"offset", 60}}},
    };
}

// ---------------------------------------------------------- perturbation

namespace {

struct BumpImpl : SystemImpl {
    std::shared_ptr<SystemImpl> base;
    double eps, radius;
    Vec center, dir;
    bool base_jac;

    Vec eval(const Vec& x) const override {
        Vec g = base->eval(x);
        double s = (x - center).norm() / radius;
        if (s < 1.0) g += eps * bump_chi(s) * dir;
        return g;
    }
    bool has_jac() const override { return base_jac; }
    Mat jac(const Vec& x) const override {
        Mat J = base->jac(x);
        Vec r = x - center;
        double nr = r.norm();
        double s = nr / radius;
        if (s < 1.0 && nr > 1e-14)
            J += (eps * bump_chi_prime(s) / (radius * nr)) * (dir * r.transpose());
        return J;
    }
    bool has_exact_flow() const override { return false; }
};

} // namespace

VectorField perturb(const VectorField& base, const Perturbation& p) {
    if (p.magnitude < 0) throw ConfigError("perturbation magnitude must be >= 0");
    if (p.mode == Perturbation::Mode::ParameterShift) {
        auto params = base.params();
        if (!params.count(p.target_param))
            throw ConfigError("perturb: unknown parameter '" + p.target_param + "'");
        params[p.target_param] += p.magnitude;
        return make_system(base.name(), params);
    }
    if (p.bump_radius <= 0) throw ConfigError("perturb: bump radius must be positive");
    if (p.magnitude == 0) return base;
    if (p.bump_center.size() != base.dim() || p.bump_direction.size() != base.dim())
        throw ConfigError("perturb: bump center/direction must match field dimension");
    // share the base implementation through evaluate/jacobian closures
    struct Closure : SystemImpl {
        VectorField f;
        Vec eval(const Vec& x) const override { return f.evaluate(x); }
        bool has_jac() const override { return f.has_analytic_jacobian(); }
        Mat jac(const Vec& x) const override { return f.jacobian(x); }
    };
    auto cl = std::make_shared<Closure>();
    cl->f = base;
    auto impl = std::make_shared<BumpImpl>();
    impl->base = cl;
    impl->eps = p.magnitude;
    impl->radius = p.bump_radius;
    impl->center = p.bump_center;
    impl->dir = p.bump_direction / std::max(p.bump_direction.norm(), 1e-300);
    impl->base_jac = base.has_analytic_jacobian();
    auto params = base.params();
    params["bump_eps"] = p.magnitude;
    return make_vectorfield(base.name() + "+bump", std::move(params), impl,
                            base.trapping_region(), base.domain_box(), {});
}

double c1_distance_estimate(const VectorField& a, const VectorField& b, const Box& region,
                            int n_samples) {
    if (a.dim() != b.dim()) throw ConfigError("c1_distance_estimate: dimension mismatch");
    if (n_samples < 1) throw ConfigError("c1_distance_estimate: need n_samples >= 1");
    double worst = 0.0;
    for (const Vec& x : halton_in_box(region, n_samples)) {
        double d0 = (a.evaluate(x) - b.evaluate(x)).norm();
        Mat dJ = a.jacobian(x) - b.jacobian(x);
        double d1 = dJ.jacobiSvd().singularValues()[0];
        worst = std::max(worst, d0 + d1);
    }
    return worst;
}

} // namespace sechyp
