#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace sechyp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Axis-aligned box in R^d.
struct Box {
    Vec lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    Vec center() const { return 0.5 * (lo + hi); }
    Vec half_width() const { return 0.5 * (hi - lo); }
    bool contains(const Vec& x) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
    // Signed distance to the boundary, positive inside.
    double margin(const Vec& x) const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim(); ++i)
            m = std::min({m, x[i] - lo[i], hi[i] - x[i]});
        return m;
    }
};

// Deterministic RNG. Streams derive from a single seed; the uniform draw is
// built from raw 64-bit output so results do not depend on the C++ stdlib's
// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() {
        // splitmix64
        uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }
    double normal() {
        // Box-Muller on explicit uniforms, no state beyond the stream
        double u1 = std::max(uniform01(), 1e-300), u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    Vec unit_vector(int d) {
        Vec v(d);
        do {
            for (int i = 0; i < d; ++i) v[i] = normal();
        } while (v.norm() < 1e-12);
        return v / v.norm();
    }
    Vec point_in_box(const Box& b) {
        Vec v(b.dim());
        for (int i = 0; i < b.dim(); ++i) v[i] = uniform(b.lo[i], b.hi[i]);
        return v;
    }
    // Independent child stream (for index-ordered concurrent work).
    Rng child(uint64_t idx) const {
        Rng r(s_ ^ (0xd1342543de82ef95ull * (idx + 1)));
        r.next_u64();
        return r;
    }

private:
    uint64_t s_;
};

// Halton low-discrepancy sequence point i (1-based internally) in [0,1)^d.
Vec halton_point(int64_t i, int d);
// Halton points mapped into a box.
std::vector<Vec> halton_in_box(const Box& b, int n);

// Ordinary least squares of y against x: returns (slope, intercept, r2).
struct LineFit {
    double slope = 0, intercept = 0, r2 = 0, residual_rms = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Spearman rank correlation.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Distance between linear subspaces spanned by orthonormal frames E, F:
// max of the two one-sided sup distances of unit vectors (principal angles).
double subspace_distance(const Mat& E, const Mat& F);

// Deterministic parallel map: out[i] = f(i) for i in [0,n), reduced in index
// order. n_threads <= 1 runs inline; results are identical for any count.
void parallel_for(int n, int n_threads, const std::function<void(int)>& f);

// Effective thread count: explicit argument, else SECHYP_THREADS, else 1.
int resolve_threads(int requested);

// CSV helpers. Doubles are printed with %.17g so runs reproduce byte-for-byte.
std::string csv_num(double v);
struct CsvWriter {
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);
    void numeric_row(const std::vector<double>& cells);

private:
    struct Impl;
    Impl* impl_;
};
std::vector<std::vector<std::string>> read_csv(const std::string& path);

} // namespace sechyp
