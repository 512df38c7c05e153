#include "sechyp/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace sechyp {

static const int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                              31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

Vec halton_point(int64_t i, int d) {
    Vec p(d);
    for (int k = 0; k < d; ++k) {
        int base = kPrimes[k % 20];
        double f = 1.0, r = 0.0;
        int64_t n = i + 1;
        while (n > 0) {
            f /= base;
            r += f * (n % base);
            n /= base;
        }
        p[k] = r;
    }
    return p;
}

std::vector<Vec> halton_in_box(const Box& b, int n) {
    std::vector<Vec> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vec u = halton_point(i, b.dim());
        out.push_back(b.lo + (b.hi - b.lo).cwiseProduct(u));
    }
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit out;
    size_t n = x.size();
    if (n < 2 || y.size() != n) return out;
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0) return out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss_res = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = y[i] - (out.intercept + out.slope * x[i]);
        ss_res += e * e;
    }
    out.residual_rms = std::sqrt(ss_res / n);
    out.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    return out;
}

static std::vector<double> ranks(const std::vector<double>& v) {
    size_t n = v.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * (i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return 0.0;
    std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double subspace_distance(const Mat& E, const Mat& F) {
    if (E.cols() == 0 || F.cols() == 0) return (E.cols() == F.cols()) ? 0.0 : 1.0;
    // sup_{v in E, |v|=1} dist(v, F) = sqrt(1 - sigma_min(F^T E)^2) for
    // orthonormal frames; the paper's distance takes the max of both sides.
    auto one_side = [](const Mat& A, const Mat& B) {
        Eigen::JacobiSVD<Mat> svd(B.transpose() * A);
        double smin = svd.singularValues().size() > 0
                          ? svd.singularValues().minCoeff()
                          : 0.0;
        if (A.cols() > B.cols()) smin = 0.0; // some direction is lost entirely
        smin = std::min(1.0, std::max(0.0, smin));
        return std::sqrt(std::max(0.0, 1.0 - smin * smin));
    };
    return std::max(one_side(E, F), one_side(F, E));
}

void parallel_for(int n, int n_threads, const std::function<void(int)>& f) {
    n_threads = std::max(1, n_threads);
    if (n_threads == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    n_threads = std::min(n_threads, n);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += n_threads) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SECHYP_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream os;
};

CsvWriter::CsvWriter(const std::string& path) : impl_(new Impl) {
    impl_->os.open(path, std::ios::binary);
}
CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) impl_->os << ',';
        impl_->os << cells[i];
    }
    impl_->os << '\n';
}

void CsvWriter::numeric_row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(csv_num(v));
    row(s);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream is(path);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace sechyp
