#pragma once

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sechyp/errors.hpp"
#include "sechyp/util.hpp"

namespace sechyp {

struct Equilibrium {
    Vec location;
    std::vector<std::complex<double>> eigenvalues;
};

namespace detail {
struct SystemImpl;
}

// Immutable description of a smooth vector field on R^d. All built-in
// systems are registered by name; instances are cheap shared handles and
// safe to use concurrently.
class VectorField {
public:
    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    const std::map<std::string, double>& params() const { return params_; }
    bool has_analytic_jacobian() const;
    const std::optional<Box>& trapping_region() const { return trap_; }
    // Bounding box used for observable normalization and measure grids; the
    // trapping box when one is declared.
    const Box& domain_box() const { return domain_; }
    const std::vector<Equilibrium>& singularities() const { return sings_; }

    Vec evaluate(const Vec& x) const;
    Mat jacobian(const Vec& x) const;

    // Closed-form flow, available for systems that are not realized as an
    // ODE (the suspension semiflow). frame may be empty.
    bool has_exact_flow() const;
    void exact_flow(const Vec& x, double t, Vec& out, Mat* frame) const;

    // 1D first-return shortcut for suspension-type systems.
    struct MapModel {
        double lo, hi;          // map domain
        double discontinuity;   // branch break
        double (*map)(double);
        double (*dmap)(double);
        double roof;            // constant return time
    };
    const MapModel* map_model() const;

    // Divergence of the field (trace of the Jacobian).
    double divergence(const Vec& x) const;

    bool same_spec(const VectorField& other) const {
        return name_ == other.name_ && dim_ == other.dim_ && params_ == other.params_;
    }

    VectorField() = default;

private:
    friend VectorField make_vectorfield(const std::string&, std::map<std::string, double>,
                                        std::shared_ptr<detail::SystemImpl>,
                                        std::optional<Box>, Box, std::vector<Equilibrium>);
    std::string name_;
    int dim_ = 0;
    std::map<std::string, double> params_;
    std::shared_ptr<detail::SystemImpl> impl_;
    std::optional<Box> trap_;
    Box domain_;
    std::vector<Equilibrium> sings_;
};

struct Perturbation {
    enum class Mode { ParameterShift, Bump };
    Mode mode = Mode::ParameterShift;
    double magnitude = 0.0;
    std::string target_param;   // ParameterShift
    Vec bump_center;            // Bump
    double bump_radius = 1.0;
    Vec bump_direction;
};

// Built-in systems.
VectorField make_linear(const Mat& A);
VectorField make_lorenz(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0);
VectorField make_geolorenz_quotient();
VectorField make_bowen(double p = 1.7, double m1 = 4.76, double m2 = 4.42,
                       double c = 0.5, double eta = 0.5);
VectorField make_double_lorenz(double sigma = 10.0, double rho = 28.0,
                               double beta = 8.0 / 3.0, double offset = 60.0);

// Name + parameter-map construction (CLI surface). Unknown name or bad
// parameters raise ConfigError.
VectorField make_system(const std::string& name, const std::map<std::string, double>& params);

struct SystemInfo {
    std::string name;
    std::string summary;
    std::map<std::string, double> defaults;
};
std::vector<SystemInfo> list_systems();

VectorField perturb(const VectorField& base, const Perturbation& p);

// Empirical C^1 distance: max over a Halton sample of |Ga-Gb| + |DGa-DGb|_2.
double c1_distance_estimate(const VectorField& a, const VectorField& b,
                            const Box& region, int n_samples);

// C^2 bump profile used for bump perturbations and field blending:
// chi(s) = (1-s^2)^3 on [0,1), 0 beyond. sup|chi'| = 96/(25*sqrt(5)).
double bump_chi(double s);
double bump_chi_prime(double s);
inline constexpr double kBumpChiPrimeMax = 1.7173737073462297;

} // namespace sechyp
