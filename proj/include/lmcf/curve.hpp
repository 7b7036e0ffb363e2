#pragma once

// Planar curve discretization and curve-shortening flow, plus the two
// special curves the rest of the project is built from: the grim-reaper
// profile (-log cos y, y) and the self-expander w with curvature k = w_perp.

#include <complex>
#include <optional>
#include <vector>

#include "lmcf/errors.hpp"

namespace lmcf::curves {

using Point = std::complex<double>;

enum class Topology { open, closed };

// Discretized curve in C.  Open curves have clamped endpoints under the
// flow.  The optional `angles` field carries the tangent angle per point
// (filled by expander_curve and grim_reaper_profile).
struct PlanarCurve {
    std::vector<Point> points;
    Topology topology = Topology::open;
    std::vector<double> angles;
    // parameter step of the generating sampler (arc length for expander
    // curves, y for the grim-reaper profile); 0 when unknown
    double param_step = 0.0;

    bool closed() const { return topology == Topology::closed; }
    std::size_t size() const { return points.size(); }
    std::size_t segment_count() const {
        return closed() ? points.size() : points.size() - 1;
    }
    Point point(std::size_t i) const { return points[i % points.size()]; }

    double length() const;
    double min_segment() const;
    double max_segment() const;

    // >= 16 points, consecutive points distinct.
    void validate() const;
};

// Disjoint union of curves (e.g. w together with -w).
struct MultiCurve {
    std::vector<PlanarCurve> components;

    std::size_t total_points() const {
        std::size_t n = 0;
        for (const auto& c : components) n += c.size();
        return n;
    }
};

// Second-order finite-difference curvature vector at an interior (or, for
// closed curves, cyclic) index.
Point curvature_vector(const PlanarCurve& c, std::size_t i);

double max_curvature(const PlanarCurve& c);

// Signed shoelace area of the polygon through the curve points.
double enclosed_area(const PlanarCurve& c);

struct LoopInfo {
    double area = 0.0;
    std::size_t seg_a = 0;  // crossing segment indices, seg_a < seg_b
    std::size_t seg_b = 0;
    Point crossing;
};

// First self-intersection loop (smallest point span if several).
std::optional<LoopInfo> detect_loop(const PlanarCurve& c);

struct CurveFlowState {
    PlanarCurve curve;
    double time = 0.0;
    double max_curvature = 0.0;
    // Enclosed area for closed curves; detected loop area when loop
    // tracking is on and a loop exists.
    std::optional<double> area;
};

struct FlowOptions {
    double blowup_threshold = 1e3;
    // Resample to uniform arc length when max/min segment ratio exceeds this.
    double redistribution_ratio = 1.2;
    bool track_loops = false;
};

enum class StepStatus { ok, halted };

struct StepResult {
    CurveFlowState state;
    StepStatus status = StepStatus::ok;
};

CurveFlowState make_flow_state(PlanarCurve c, double time = 0.0,
                               bool track_loops = false);

// One explicit step: movable points advance by dt * k, then tangential
// redistribution.  dt must satisfy dt <= 0.4 * h_min^2.  If the current
// max curvature exceeds the blow-up threshold the step is not taken and
// the state comes back with status `halted`.
StepResult csf_step(const CurveFlowState& s, double dt, const FlowOptions& opts = {});

struct FlowTrace {
    std::vector<CurveFlowState> records;
    bool halted = false;
    CurveFlowState final;
};

// Advance with automatic step size (0.38 * h_min^2, clipped to land on
// t_end) until t_end or curvature blow-up.  Records every `record_every`
// steps; loop areas are evaluated on records only.
FlowTrace run_flow(CurveFlowState s, double t_end, const FlowOptions& opts = {},
                   int record_every = 50);

// Integrates w1' = cos(phi), w2' = sin(phi), phi' = w2 cos(phi) - w1 sin(phi)
// (the scalar form of k = w_perp) by RK4 from w = (shoot, 0), phi = pi/2,
// mirrored across the x1-axis to cover arc length [-span/2, span/2].
// The returned curve carries the tangent angle field.
PlanarCurve expander_curve(double shoot, double arclength_span, double h);

// Samples (-log cos y, y) on [y_min, y_max] within (-pi/2, pi/2).
PlanarCurve grim_reaper_profile(double y_min, double y_max, double h);

// w together with -w as a two-component set.
MultiCurve double_curve(const PlanarCurve& w);

// Asymptotic tangent angles {forward, backward} of an expander curve.
struct AsymptoticAngles {
    double forward;
    double backward;
};
AsymptoticAngles asymptotic_angles(const PlanarCurve& w);

double angle_oscillation(const PlanarCurve& c);

// Preset open curve for the loop-collapse experiment: a hairpin whose nose
// overshoots into a small self-intersection loop.  Tangent angle spans
// pi + 2*0.4.
PlanarCurve loop_preset(int n_points = 1600);

PlanarCurve circle(double radius, int n_points);
PlanarCurve segment(Point a, Point b, int n_points);

// Max over sample points of `a` of the distance to the polyline `b`.
double one_sided_hausdorff(const std::vector<Point>& a, const PlanarCurve& b);
double hausdorff_distance(const PlanarCurve& a, const PlanarCurve& b);

}  // namespace lmcf::curves
