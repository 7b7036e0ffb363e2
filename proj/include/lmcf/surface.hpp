#pragma once

// Parametric surface patches in R^4 with the intrinsic calculus the rest
// of the project consumes: fundamental forms, mean curvature, Lagrangian
// angle, Laplace-Beltrami, flux and level-set machinery, and the
// covering-map decomposition.

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/ambient.hpp"
#include "lmcf/errors.hpp"

namespace lmcf::surface {

using ambient::AmbientVector;
using ambient::TwoFrame;

struct GridShape {
    std::size_t nu = 0;
    std::size_t nv = 0;
    double u0 = 0.0;
    double v0 = 0.0;
    double hu = 0.0;
    double hv = 0.0;
    bool periodic_u = false;

    std::size_t count() const { return nu * nv; }
    std::size_t index(std::size_t iu, std::size_t iv) const { return iu * nv + iv; }
    double u(std::size_t iu) const { return u0 + hu * static_cast<double>(iu); }
    double v(std::size_t iv) const { return v0 + hv * static_cast<double>(iv); }
};

struct ScalarField {
    std::string name;
    std::vector<double> v;

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

struct VectorField {
    std::vector<AmbientVector> v;

    AmbientVector& operator[](std::size_t i) { return v[i]; }
    const AmbientVector& operator[](std::size_t i) const { return v[i]; }
};

// Rectangular-grid immersion.  Positions are stored row-major with
// index(iu, iv) = iu * nv + iv.  Constructors that know the analytic
// tangent frame may fill tangent_u/tangent_v; finite differences are used
// otherwise.  Periodic u handles products with closed curves (no seam
// duplication: u covers [u0, u0 + nu*hu)).
struct SurfacePatch {
    GridShape grid;
    std::vector<AmbientVector> pos;
    std::vector<AmbientVector> tangent_u;  // optional, analytic
    std::vector<AmbientVector> tangent_v;  // optional, analytic
    std::string tag;

    bool has_analytic_tangents() const {
        return tangent_u.size() == pos.size() && tangent_v.size() == pos.size();
    }
    const AmbientVector& at(std::size_t iu, std::size_t iv) const {
        return pos[grid.index(iu, iv)];
    }
};

using PatchSet = std::vector<SurfacePatch>;

SurfacePatch make_patch(
    const GridShape& grid,
    const std::function<AmbientVector(double, double)>& position,
    std::string tag = {},
    const std::function<AmbientVector(double, double)>* du = nullptr,
    const std::function<AmbientVector(double, double)>* dv = nullptr);

// Per-node first-order data, all second-order finite differences (central
// inside, one-sided at non-periodic boundaries).
struct PatchGeometry {
    VectorField fu, fv;                     // tangents
    std::vector<double> E, F, G;            // first fundamental form
    std::vector<double> det_g, sqrt_g;
    std::vector<double> inv_uu, inv_uv, inv_vv;
    std::vector<TwoFrame> frame;            // orthonormal tangent frames
};

// Throws SingularMetricError (naming the node) when det g < 1e-10.
PatchGeometry compute_geometry(const SurfacePatch& p);

// ---- scalar/vector field helpers ----

ScalarField coordinate_field(const SurfacePatch& p, int axis);
ScalarField radius_field(const SurfacePatch& p);
ScalarField map_field(const SurfacePatch& p, std::string name,
                      const std::function<double(const AmbientVector&)>& f);

double integrate(const SurfacePatch& p, const PatchGeometry& g, const ScalarField& f);
double patch_area(const SurfacePatch& p, const PatchGeometry& g);

// max |field| split into interior nodes and the boundary band (nodes within
// `band` of a non-periodic edge); identity checks report the two separately.
// The default band of 4 also covers the zone where interior and one-sided
// stencil error terms mix.
struct FieldStats {
    double max_interior = 0.0;
    double max_boundary = 0.0;
};
FieldStats max_abs_stats(const SurfacePatch& p, const ScalarField& f, std::size_t band = 4);
bool is_interior_node(const GridShape& g, std::size_t iu, std::size_t iv, std::size_t band = 4);

// ---- intrinsic calculus ----

VectorField mean_curvature(const SurfacePatch& p);
VectorField mean_curvature(const SurfacePatch& p, const PatchGeometry& g);

// Normal projection of a constant ambient vector (e.g. e1 -> e1_perp).
VectorField normal_projection_field(const SurfacePatch& p, const PatchGeometry& g,
                                    const AmbientVector& dir);
// Normal projection of the position vector (x_perp).
VectorField position_normal_field(const SurfacePatch& p, const PatchGeometry& g);

// theta per node via arg Omega(F_u, F_v), unwrapped to a continuous branch
// by breadth-first propagation from node (0,0); branch anchored by
// theta(0,0) in (-pi, pi].  A nearest-branch jump above pi/2 across one
// grid edge raises UnwrapError.
ScalarField lagrangian_angle(const SurfacePatch& p);
ScalarField lagrangian_angle(const SurfacePatch& p, const PatchGeometry& g);

VectorField intrinsic_gradient(const SurfacePatch& p, const PatchGeometry& g,
                               const ScalarField& f);
ScalarField laplace_beltrami(const SurfacePatch& p, const PatchGeometry& g,
                             const ScalarField& f);

// Hessian eigenvalues of the local potential of the patch written as a
// gradient graph over the Lagrangian plane P_alpha, per node, descending.
std::vector<std::array<double, 2>> second_fundamental_eigen(const SurfacePatch& p,
                                                            double alpha);

// ---- boundary loops, flux, level sets ----

struct BoundaryLoop {
    std::vector<AmbientVector> nodes;      // ordered path
    bool closed = false;
    std::vector<double> seg_length;        // per segment
    std::vector<AmbientVector> conormal;   // per segment, unit, surface-tangent

    double length() const;
    double max_radius() const;
};

// Loop along the boundary of the index rectangle [iu0, iu1] x [iv0, iv1];
// conormal points away from the rectangle when outward, into it otherwise.
BoundaryLoop make_rect_loop(const SurfacePatch& p, const PatchGeometry& g,
                            std::size_t iu0, std::size_t iu1,
                            std::size_t iv0, std::size_t iv1, bool outward = true);

// For periodic-u patches: the closed loop iv = const running once around u.
// Conormal points toward increasing v when outward.
BoundaryLoop make_periodic_u_loop(const SurfacePatch& p, const PatchGeometry& g,
                                  std::size_t iv, bool outward = true);

// Trapezoid line integral of <conormal, direction>; requires a closed loop.
double flux_integral(const BoundaryLoop& loop, const AmbientVector& direction);

struct LevelSetResult {
    std::vector<BoundaryLoop> curves;
    double total_length = 0.0;
    double max_radius = 0.0;
};

// Marching-squares extraction of {f = a} in parameter space, mapped to R^4.
// A value of `a` hitting a node exactly is perturbed by 1e-12 * range(f).
LevelSetResult level_set(const SurfacePatch& p, const ScalarField& f, double a);

// ---- covering decomposition ----

struct DecompositionComponent {
    int covering_degree = 0;           // n_j
    double plane_angle = 0.0;          // reference angle used for the projection
    double mean_angle = 0.0;           // circular mean of the Lagrangian angle
    double radius = 0.0;               // R_j
    double derivative_bound = 0.0;     // S_j
    std::size_t node_count = 0;
    double sample_coverage = 1.0;      // fraction of sample points reached
};

struct DecompositionReport {
    std::vector<DecompositionComponent> components;
};

struct DecompositionOptions {
    double eps = 0.5;     // |*omega_alpha| membership threshold
    int samples = 16;     // preimage sample points on the circle 1.3 R
    // A graph asymptotic to P_alpha need not reach the plane sector shadowed
    // by the rest of the surface (for a translator wing, the sector behind
    // the neck).  With this set, unreached samples only lower
    // sample_coverage; the reached counts must still be constant.
    bool allow_uncovered_samples = false;
};

// Covering-map check over P_alpha: nodes with |*omega_alpha| >= eps
// projecting outside B_R are split into grid components; each must cover
// the sample circle (radius 1.3 R) with a constant preimage count.
// Throws NotACoveringError naming witness points.
DecompositionReport graphical_decomposition(const PatchSet& patches, double alpha,
                                            double R, const DecompositionOptions& = {});
DecompositionReport graphical_decomposition(const PatchSet& patches, double alpha,
                                            double R, double eps, int samples = 16);

// Hodge dual on the patch of the parallel volume form of P_alpha (signed).
ScalarField star_omega_alpha(const SurfacePatch& p, const PatchGeometry& g, double alpha);

// ---- Liouville form ----

struct HolonomyReport {
    std::vector<double> cycle_holonomies;   // one per independent cycle
    double cycle_length = 0.0;              // representative loop length
    double max_rect_circulation = 0.0;      // contractible-loop residual
    double rect_length = 0.0;
};

struct LiouvillePrimitive {
    ScalarField beta;
    HolonomyReport holonomy;
};

// Integrates the pullback of lambda over a spanning tree from node (0,0);
// holonomies are loop integrals over the independent cycles (periodic u).
LiouvillePrimitive liouville_primitive(const SurfacePatch& p);

// Circulation of lambda around the parameter rectangle, end-corrected
// trapezoid (4th order on smooth patches).
double loop_circulation(const SurfacePatch& p, const PatchGeometry& g,
                        std::size_t iu0, std::size_t iu1,
                        std::size_t iv0, std::size_t iv1);

// max node |omega(F_u, F_v)|; uses analytic tangents when present.
double lagrangian_residual(const SurfacePatch& p, bool use_analytic = false);

}  // namespace lmcf::surface
