#include "sechyp/flow.hpp"

#include <cmath>

namespace sechyp {

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

constexpr double kBlowUp = 1e8;
constexpr double kMinStep = 1e-13;
constexpr double kGrace = 0.1;

struct Deriv {
    Vec dx;
    Mat dF;
};

Deriv eval_rhs(const VectorField& f, const Vec& x, const Mat& F) {
    Deriv d;
    d.dx = f.evaluate(x);
    if (F.size() > 0) d.dF = f.jacobian(x) * F;
    return d;
}

} // namespace

Stepper::Stepper(const VectorField& f, Vec x0, const IntegratorConfig& cfg, const Mat* frame0)
    : f_(f), cfg_(cfg), exact_(f.has_exact_flow()) {
    cfg_.validate();
    if (!x0.allFinite()) throw ConfigError("integrate: non-finite initial state");
    x_ = std::move(x0);
    x_prev_ = x_;
    if (frame0) frame_ = *frame0;
    if (!exact_) {
        d_ = f_.evaluate(x_);
        d_prev_ = d_;
        // initial step from the field scale
        h_ = std::min(cfg_.max_step, 0.01 / std::max(1.0, d_.norm() / std::max(1.0, x_.norm())));
    } else {
        h_ = cfg_.max_step;
    }
}

void Stepper::rk_step(double h, const Vec& x, const Mat& F, const Vec& k1x, const Mat& k1f,
                      Vec& x_out, Mat& f_out, Vec& err) const {
    auto stage = [&](const Vec& xs, const Mat& Fs) { return eval_rhs(f_, xs, Fs); };
    bool wf = F.size() > 0;
    Mat Fz;
    const Mat& F0 = wf ? F : Fz;

    Deriv k1{k1x, k1f};
    Deriv k2 = stage(x + h * a21 * k1.dx, wf ? Mat(F0 + h * a21 * k1.dF) : Fz);
    Deriv k3 = stage(x + h * (a31 * k1.dx + a32 * k2.dx),
                     wf ? Mat(F0 + h * (a31 * k1.dF + a32 * k2.dF)) : Fz);
    Deriv k4 = stage(x + h * (a41 * k1.dx + a42 * k2.dx + a43 * k3.dx),
                     wf ? Mat(F0 + h * (a41 * k1.dF + a42 * k2.dF + a43 * k3.dF)) : Fz);
    Deriv k5 = stage(x + h * (a51 * k1.dx + a52 * k2.dx + a53 * k3.dx + a54 * k4.dx),
                     wf ? Mat(F0 + h * (a51 * k1.dF + a52 * k2.dF + a53 * k3.dF + a54 * k4.dF))
                        : Fz);
    Deriv k6 = stage(
        x + h * (a61 * k1.dx + a62 * k2.dx + a63 * k3.dx + a64 * k4.dx + a65 * k5.dx),
        wf ? Mat(F0 + h * (a61 * k1.dF + a62 * k2.dF + a63 * k3.dF + a64 * k4.dF + a65 * k5.dF))
           : Fz);

    x_out = x + h * (b1 * k1.dx + b3 * k3.dx + b4 * k4.dx + b5 * k5.dx + b6 * k6.dx);
    if (wf) f_out = F0 + h * (b1 * k1.dF + b3 * k3.dF + b4 * k4.dF + b5 * k5.dF + b6 * k6.dF);
    Deriv k7 = stage(x_out, wf ? f_out : Fz);

    int n = static_cast<int>(x.size());
    int m = wf ? static_cast<int>(F.size()) : 0;
    err.resize(n + m);
    Vec ex = h * (e1 * k1.dx + e3 * k3.dx + e4 * k4.dx + e5 * k5.dx + e6 * k6.dx + e7 * k7.dx);
    for (int i = 0; i < n; ++i) {
        double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(x[i]), std::abs(x_out[i]));
        err[i] = ex[i] / sc;
    }
    if (wf) {
        Mat ef = h * (e1 * k1.dF + e3 * k3.dF + e4 * k4.dF + e5 * k5.dF + e6 * k6.dF +
                      e7 * k7.dF);
        const double* pf0 = F0.data();
        const double* pf1 = f_out.data();
        const double* pe = ef.data();
        for (int i = 0; i < m; ++i) {
            double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(pf0[i]), std::abs(pf1[i]));
            err[n + i] = pe[i] / sc;
        }
    }
}

bool Stepper::step(double t_end) {
    if (t_ >= t_end) return false;
    if (exact_) {
        double h = std::min(cfg_.max_step, t_end - t_);
        t_prev_ = t_;
        x_prev_ = x_;
        Vec out;
        f_.exact_flow(x_, h, out, frame_.size() > 0 ? &frame_ : nullptr);
        x_ = out;
        t_ += h;
        stats_.steps_accepted++;
        return true;
    }
    for (;;) {
        double h = std::min(h_, t_end - t_);
        if (h < kMinStep)
            throw StepSizeUnderflow("adaptive step fell below 1e-13 at t = " + csv_num(t_));
        Vec x_new, err;
        Mat f_new;
        rk_step(h, x_, frame_, d_, frame_.size() > 0 ? Mat(f_.jacobian(x_) * frame_) : Mat(),
                x_new, f_new, err);
        double en = std::sqrt(err.squaredNorm() / err.size());
        if (!x_new.allFinite() || !std::isfinite(en)) {
            h_ = h * 0.2;
            stats_.steps_rejected++;
            continue;
        }
        if (en <= 1.0) {
            t_prev_ = t_;
            x_prev_ = x_;
            d_prev_ = d_;
            t_ += h;
            x_ = x_new;
            if (frame_.size() > 0) frame_ = f_new;
            d_ = f_.evaluate(x_);
            stats_.steps_accepted++;
            stats_.max_error_estimate = std::max(stats_.max_error_estimate, en);
            if (x_.norm() > kBlowUp)
                throw BlowUp("state norm exceeded 1e8 at t = " + csv_num(t_));
            double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
            h_ = std::min(cfg_.max_step, h * std::min(5.0, std::max(0.2, fac)));
            return true;
        }
        stats_.steps_rejected++;
        h_ = h * std::min(1.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
    }
}

Vec Stepper::interpolate(double t) const {
    if (exact_) {
        Vec out;
        Mat none;
        f_.exact_flow(x_prev_, t - t_prev_, out, nullptr);
        return out;
    }
    double h = t_ - t_prev_;
    if (h <= 0) return x_;
    double th = (t - t_prev_) / h;
    double t2 = th * th, t3 = t2 * th;
    double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + th;
    double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * x_prev_ + (h10 * h) * d_prev_ + h01 * x_ + (h11 * h) * d_;
}

JetTrajectory integrate(const VectorField& f, const Vec& x0, double T,
                        const IntegratorConfig& cfg, const Mat* frame0, double sample_dt,
                        double qr_dt) {
    if (T <= 0) throw ConfigError("integrate: T must be positive");
    if (T > cfg.max_time) throw ConfigError("integrate: T exceeds max_time");
    JetTrajectory out;
    bool with_frame = frame0 && frame0->size() > 0;
    if (with_frame && frame0->rows() != f.dim())
        throw ConfigError("integrate: frame rows must match dimension");

    Stepper st(f, x0, cfg, with_frame ? frame0 : nullptr);
    auto emit = [&](double t, const Vec& x, const Mat& F) {
        out.times.push_back(t);
        out.states.push_back(x);
        if (with_frame) out.frames.push_back(F);
    };
    emit(0.0, x0, with_frame ? *frame0 : Mat());

    const double inf = std::numeric_limits<double>::infinity();
    double next_sample = sample_dt > 0 ? sample_dt : T;
    double next_qr = (with_frame && qr_dt > 0) ? qr_dt : inf;
    double t = 0;
    while (t < T - 1e-12) {
        double target = std::min({T, next_sample, next_qr});
        while (st.t1() < target - 1e-12) st.step(target);
        t = st.t1();
        bool cond_qr = false;
        if (with_frame) {
            const Mat& F = st.frame();
            double cmax = 0, cmin = inf;
            for (int j = 0; j < F.cols(); ++j) {
                double n = F.col(j).norm();
                cmax = std::max(cmax, n);
                cmin = std::min(cmin, n);
                if (n < 1e-300)
                    throw DegenerateFrame("frame column collapsed at t = " + csv_num(t));
            }
            cond_qr = cmax / std::max(cmin, 1e-300) > 1e6;
        }
        if (with_frame && (t >= next_qr - 1e-12 || cond_qr || t >= T - 1e-12)) {
            Mat F = st.frame();
            Eigen::HouseholderQR<Mat> qr(F);
            Mat Q = qr.householderQ() * Mat::Identity(F.rows(), F.cols());
            Mat R = qr.matrixQR().topRows(F.cols()).triangularView<Eigen::Upper>();
            Vec logs(F.cols());
            for (int j = 0; j < F.cols(); ++j) {
                double rjj = R(j, j);
                if (rjj < 0) Q.col(j) = -Q.col(j);
                double a = std::abs(rjj);
                if (a < 1e-300) throw DegenerateFrame("QR diagonal underflow");
                logs[j] = std::log(a);
            }
            out.qr_log_factors.push_back(logs);
            out.qr_times.push_back(t);
            st.set_frame(Q);
            while (next_qr <= t + 1e-12) next_qr += qr_dt;
        }
        if (t >= next_sample - 1e-12) {
            emit(t, st.x1(), st.frame());
            while (next_sample <= t + 1e-12) next_sample += sample_dt > 0 ? sample_dt : T;
        }
    }
    if (out.times.back() < T - 1e-12) emit(st.t1(), st.x1(), st.frame());
    out.stats = st.stats();
    return out;
}

Vec flow_map(const VectorField& f, const Vec& x0, double t, const IntegratorConfig& cfg) {
    if (t == 0) return x0;
    return integrate(f, x0, t, cfg).final_state();
}

std::pair<Vec, Mat> flow_with_tangent(const VectorField& f, const Vec& x0, double T,
                                      const IntegratorConfig& cfg, const Mat& F0) {
    if (f.has_exact_flow()) {
        Vec out;
        Mat F = F0;
        f.exact_flow(x0, T, out, &F);
        return {out, F};
    }
    Stepper st(f, x0, cfg, &F0);
    while (st.step(T)) {
    }
    return {st.x1(), st.frame()};
}

TangentGrowth tangent_norm_growth(const JetTrajectory& traj) {
    if (traj.qr_log_factors.empty())
        throw ConfigError("tangent_norm_growth: trajectory carries no frames");
    TangentGrowth g;
    g.times = traj.qr_times;
    g.log_factors = traj.qr_log_factors;
    return g;
}

TrapReport trap_check(const VectorField& f, const Box& box, int grid_n, double T,
                      const IntegratorConfig& cfg) {
    if (grid_n < 2) throw ConfigError("trap_check: grid_n must be >= 2");
    if (box.dim() != f.dim()) throw ConfigError("trap_check: box dimension mismatch");
    TrapReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    int d = f.dim();
    std::vector<double> axis(grid_n);
    for (int j = 0; j < grid_n; ++j)
        axis[j] = 0.65 * std::cos(M_PI * j / (grid_n - 1));

    long total = 1;
    for (int i = 0; i < d; ++i) total *= grid_n;
    Vec c = box.center(), hw = box.half_width();

    for (long idx = 0; idx < total; ++idx) {
        Vec x0(d);
        long rem = idx;
        for (int i = 0; i < d; ++i) {
            x0[i] = c[i] + hw[i] * axis[rem % grid_n];
            rem /= grid_n;
        }
        try {
            Stepper st(f, x0, cfg, nullptr);
            while (st.step(T)) {
                for (int q = 1; q <= 4; ++q) {
                    double tq = st.t0() + q * (st.t1() - st.t0()) / 4;
                    if (tq < kGrace) continue;
                    double m = box.margin(st.interpolate(tq));
                    rep.worst_margin = std::min(rep.worst_margin, m);
                }
            }
            double mfin = box.margin(st.x1());
            rep.worst_margin = std::min(rep.worst_margin, mfin);
        } catch (const Error& e) {
            rep.pass = false;
            rep.worst_margin = -std::numeric_limits<double>::infinity();
            rep.diagnostic = std::string("trajectory failure: ") + e.what();
            return rep;
        }
    }
    rep.pass = rep.worst_margin > 0;
    if (!rep.pass && rep.diagnostic.empty()) rep.diagnostic = "trajectory left the box";
    return rep;
}

} // namespace sechyp
