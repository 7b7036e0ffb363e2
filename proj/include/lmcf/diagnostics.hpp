#pragma once

// Numeric probes for the analytic machinery: backwards heat kernel and
// Gaussian densities, blow-downs with plane detection, the static probe,
// the barrier V_{delta,B}, the angle decay envelope, and the Laplace-type
// circle integral.

#include <optional>
#include <vector>

#include "lmcf/solitons.hpp"
#include "lmcf/surface.hpp"

namespace lmcf::diag {

using ambient::AmbientVector;
using ambient::TwoFrame;
using surface::PatchSet;
using surface::ScalarField;
using surface::SurfacePatch;

constexpr double kDefaultSeed = 42;

// Phi_{x0,T}(x,t) = exp(-|x-x0|^2 / (4(T-t))) / (4 pi (T-t)), t < T.
double heat_kernel(const AmbientVector& x0, double T, const AmbientVector& x, double t);

struct DensityOptions {
    double truncation_tol = 1e-8;
    // quadratic area-growth constant C1 in H^2(L cap B_R) <= C1 R^2
    double area_growth = 4.0 * 3.14159265358979323846;
};

struct DensityReport {
    AmbientVector center;
    double tau = 0.0;               // T - t
    double value = 0.0;
    double truncation_radius = 0.0; // radius guaranteed covered by the patch
    double tail_bound = 0.0;
    bool truncated = false;
};

DensityReport gaussian_density(const PatchSet& patches, const AmbientVector& x0,
                               double T, double t, const DensityOptions& opts = {});

// Density of the family at fixed (x0, T) for increasing times; the patches
// are regenerated large enough for the requested truncation tolerance.
std::vector<DensityReport> density_series(const solitons::SolitonFamily& f,
                                          const AmbientVector& x0, double T,
                                          const std::vector<double>& times, double h,
                                          const DensityOptions& opts = {});

// lambda L_{s/lambda^2} sampled to cover |x| <= window_radius.
PatchSet blow_down(const solitons::SolitonFamily& f, double lambda, double s,
                   double window_radius = 1.5, double h_target = 0.02);

struct DetectedPlane {
    double angle = 0.0;       // Lagrangian angle in [0, pi)
    int multiplicity = 0;
    double residual = 0.0;    // max distance of cluster samples to the plane
    double density = 0.0;     // Gaussian density before rounding
    TwoFrame basis;           // orthonormal
};

struct PlaneConfiguration {
    std::vector<DetectedPlane> planes;  // sorted by angle

    int total_multiplicity() const {
        int m = 0;
        for (const auto& p : planes) m += p.multiplicity;
        return m;
    }
};

struct DetectOptions {
    double angle_tol = 1e-2;        // tangent-plane clustering metric
    double multiplicity_band = 0.2; // acceptance band around integers
    int max_planes = 8;             // practical cap, documented
};

// Clusters nodes inside B_R by tangent plane, fits a plane through the
// origin per cluster, and rounds the cluster's Gaussian density at scale
// T - t = R^2/16 to the multiplicity.
PlaneConfiguration detect_planes(const PatchSet& patches, double R,
                                 const DetectOptions& opts = {});

bool same_configuration(const PlaneConfiguration& a, const PlaneConfiguration& b,
                        double angle_tol = 2e-2);

struct ExpanderMeasure {
    double max_residual = 0.0;  // max |H - x_perp/(2s)| over interior nodes
    double sup_H = 0.0;
    std::size_t nodes = 0;
};

// Residual of the self-expander equation at time s over nodes with
// |x| <= within_radius (0 = the whole patch set).
ExpanderMeasure expander_residual(const PatchSet& patches, double s,
                                  double within_radius = 0.0);

enum class Verdict { static_solution, non_static, inconclusive };

struct StaticProbeOptions {
    double window_radius = 1.0;        // detection ball for s <= 0
    double positive_window_factor = 4.0;  // ball scale-up for s > 0
    double h_target = 0.02;
    double plane_H_tol = 0.02;         // sup |H| below which the s>0 limit counts as planes
    double config_angle_tol = 2e-2;
    double base_h = 0.02;              // resolution of the almost-calibrated check
    // a blow-down at scale lambda carries O(lambda) tangent dispersion, so
    // the clustering tolerance grows with the scale
    double cluster_tol_per_scale = 0.5;
};

struct BlowdownEntry {
    double lambda = 0.0;
    double s = 0.0;
    std::optional<PlaneConfiguration> config;
    std::optional<ExpanderMeasure> expander;
    bool ambiguous = false;  // multiplicity detection failed at this entry
};

struct BlowdownProbe {
    std::vector<BlowdownEntry> entries;  // ordered by scale, then s
    Verdict verdict = Verdict::inconclusive;  // at the smallest scale
    bool stable_across_scales = false;
    bool almost_calibrated = false;      // min cos(theta) > 0 on the base window
    double min_cos_theta = 0.0;
};

// pre: s_values include at least one negative and one positive entry.
// The verdict is taken at the smallest scale; per-scale agreement is
// reported in stable_across_scales.  A coarse-scale entry whose cluster
// density is ambiguous marks the entry (a nonzero-H limit at s > 0 still
// decides non_static); AmbiguousMultiplicityError propagates only when no
// scale yields a verdict.
BlowdownProbe static_probe(const solitons::SolitonFamily& f,
                           const std::vector<double>& scales,
                           const std::vector<double>& s_values,
                           const StaticProbeOptions& opts = {});

// V_{delta,B}(x) = B |x|^-alpha exp(-|x|/2) + delta exp(x1/2), alpha < 1/3.
double barrier_value(const AmbientVector& x, double alpha, double delta, double B);

struct BarrierResidual {
    ScalarField residual;          // Delta V - V (|H|^2+1)/4; 0 at excluded nodes
    std::vector<char> excluded;    // nodes with |x| < r_min
    std::size_t excluded_count = 0;
};

BarrierResidual barrier_residual(const SurfacePatch& p, double alpha, double delta,
                                 double B, double r_min = 0.1);

struct BarrierScan {
    double R0 = 0.0;               // largest |x| with positive residual
    std::size_t positive_nodes = 0;
    std::size_t excluded_count = 0;
};

// Sign scan over interior nodes (delta = 0 barrier part).
BarrierScan barrier_scan(const SurfacePatch& p, double alpha, double B,
                         double r_min = 0.1);

// I(r) = integral_0^{2pi} exp(-r - r cos t) dt, adaptive to 1e-10 absolute.
double laplace_integral(double r);

// Envelope margin B |x|^-alpha exp(-|x|/2 - x1/2) - (|theta - theta_bar| + |grad theta|).
ScalarField decay_envelope(const SurfacePatch& p, double theta_bar, double alpha,
                           double B);

// ---- translating-solution identity suite ----

struct IdentityReport {
    surface::FieldStats theta_affine;       // osc of theta + <J e1, x>
    surface::FieldStats speed_match;        // ||H| - |e1_perp||
    surface::FieldStats laplace_x1;         // |Delta x1 - |H|^2|
    surface::FieldStats theta_transport;    // |Delta theta + <grad theta, e1>|
    surface::FieldStats translator;         // |H - e1_perp|
    surface::FieldStats cos_theta;          // |Delta cos + <grad cos, e1> + cos |H|^2|
    surface::FieldStats eigenfunction;      // |Delta u - u(|H|^2+1)/4|
    surface::FieldStats h_vs_j_grad_theta;  // |H - J grad theta|
};

// `band`: boundary-band width in nodes (scale it with 1/h to compare
// residuals over the same parameter region across resolutions).
IdentityReport translator_identities(const SurfacePatch& p, double theta_bar = 0.0,
                                     std::size_t band = 4);

double min_cos_theta(const SurfacePatch& p);

}  // namespace lmcf::diag
