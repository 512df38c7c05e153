#pragma once

#include <optional>

#include "sechyp/vectorfield.hpp"

namespace sechyp {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.05;
    double max_time = 1e6;

    void validate() const {
        if (rel_tol <= 0 || abs_tol <= 0 || max_step <= 0)
            throw ConfigError("integrator tolerances and max_step must be positive");
    }
    IntegratorConfig tightened(double factor) const {
        IntegratorConfig c = *this;
        c.rel_tol *= factor;
        c.abs_tol *= factor;
        return c;
    }
};

struct IntegratorStats {
    long steps_accepted = 0;
    long steps_rejected = 0;
    double max_error_estimate = 0.0;
};

// Time-sampled orbit with an optional tangent frame evolved by the
// variational equation. Frames are QR re-orthonormalized on a fixed cadence;
// the discarded growth factors are logged so |Dphi_t| norms stay recoverable.
struct JetTrajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Mat> frames;                 // orthonormal after each QR event
    std::vector<Vec> qr_log_factors;         // log |R_ii| per QR event
    std::vector<double> qr_times;
    IntegratorStats stats;

    const Vec& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
};

// Integrate over [0, T] with output samples every `sample_dt` (<=0 means
// only endpoints). When `frame0` is given the variational flow runs
// alongside, re-orthonormalizing every `qr_dt` time units or when the frame
// condition number exceeds 1e6.
JetTrajectory integrate(const VectorField& f, const Vec& x0, double T,
                        const IntegratorConfig& cfg, const Mat* frame0 = nullptr,
                        double sample_dt = 0.0, double qr_dt = 0.5);

Vec flow_map(const VectorField& f, const Vec& x0, double t, const IntegratorConfig& cfg);

// Final state and un-normalized Dphi_T * F0 (only for |T| small enough that
// the raw product stays representable).
std::pair<Vec, Mat> flow_with_tangent(const VectorField& f, const Vec& x0, double T,
                                      const IntegratorConfig& cfg, const Mat& F0);

// Per-QR-interval log growth factors of the frame columns.
struct TangentGrowth {
    std::vector<double> times;               // QR event times
    std::vector<Vec> log_factors;            // per-column log growth
    Vec total() const {
        Vec s = Vec::Zero(log_factors.empty() ? 0 : log_factors[0].size());
        for (const auto& v : log_factors) s += v;
        return s;
    }
};
TangentGrowth tangent_norm_growth(const JetTrajectory& traj);

struct TrapReport {
    bool pass = false;
    double worst_margin = 0.0;
    std::string diagnostic;
};

// Empirical positive-invariance check: a grid_n^d cosine-clustered grid
// spanning 65% of each half-width is integrated to time T; pass iff every
// trajectory stays in the box for t in [0.1, T] and ends interior.
TrapReport trap_check(const VectorField& f, const Box& box, int grid_n, double T,
                      const IntegratorConfig& cfg);

// Low-level stepper used by the Poincare module: advances one accepted step
// at a time and exposes the cubic Hermite interpolant on the last step.
class Stepper {
public:
    Stepper(const VectorField& f, Vec x0, const IntegratorConfig& cfg, const Mat* frame0);

    // Returns false once t >= t_end (the final step is clamped to t_end).
    bool step(double t_end);

    double t0() const { return t_prev_; }
    double t1() const { return t_; }
    const Vec& x0() const { return x_prev_; }
    const Vec& x1() const { return x_; }
    const Mat& frame() const { return frame_; }
    void set_frame(const Mat& F) { frame_ = F; }
    Vec interpolate(double t) const;   // cubic Hermite on [t0, t1]
    const IntegratorStats& stats() const { return stats_; }

private:
    const VectorField& f_;
    IntegratorConfig cfg_;
    bool exact_;
    double t_ = 0, t_prev_ = 0, h_ = 0;
    Vec x_, x_prev_, d_, d_prev_;
    Mat frame_;
    IntegratorStats stats_;
    void rk_step(double h, const Vec& x, const Mat& F, const Vec& k1x, const Mat& k1f,
                 Vec& x_out, Mat& f_out, Vec& x_low) const;
};

} // namespace sechyp
