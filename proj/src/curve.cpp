#include "lmcf/curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>
#include <limits>
#include <unordered_map>

namespace lmcf::curves {

namespace {

double seg_len(const Point& a, const Point& b) { return std::abs(b - a); }

// Catmull-Rom evaluation through p1 -> p2 at parameter u in [0,1].
Point catmull_rom(const Point& p0, const Point& p1, const Point& p2,
                  const Point& p3, double u) {
    const double u2 = u * u, u3 = u2 * u;
    return 0.5 * ((2.0 * p1) + (p2 - p0) * u +
                  (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 +
                  (3.0 * p1 - 3.0 * p2 + p3 - p0) * u3);
}

std::vector<double> cumulative_lengths(const PlanarCurve& c) {
    std::vector<double> s(c.segment_count() + 1, 0.0);
    for (std::size_t i = 0; i < c.segment_count(); ++i)
        s[i + 1] = s[i] + seg_len(c.point(i), c.point(i + 1));
    return s;
}

// Resample to uniform arc length with the same point count.  Endpoints of
// open curves stay fixed; closed curves keep point 0 anchored.
void redistribute(PlanarCurve& c) {
    const std::size_t n = c.size();
    const auto cum = cumulative_lengths(c);
    const double total = cum.back();
    const std::size_t nseg = c.segment_count();

    auto pt = [&](std::ptrdiff_t i) -> Point {
        if (c.closed()) {
            const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(n);
            return c.points[static_cast<std::size_t>(((i % m) + m) % m)];
        }
        if (i < 0) return 2.0 * c.points[0] - c.points[1];
        if (i >= static_cast<std::ptrdiff_t>(n))
            return 2.0 * c.points[n - 1] - c.points[n - 2];
        return c.points[static_cast<std::size_t>(i)];
    };

    std::vector<Point> out(n);
    out[0] = c.points[0];
    const std::size_t last = c.closed() ? n : n - 1;
    if (!c.closed()) out[n - 1] = c.points[n - 1];

    std::size_t seg = 0;
    for (std::size_t k = 1; k < last; ++k) {
        const double target = total * static_cast<double>(k) / static_cast<double>(c.closed() ? n : n - 1);
        while (seg + 1 < nseg && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double u = len > 0 ? (target - cum[seg]) / len : 0.0;
        out[k] = catmull_rom(pt(static_cast<std::ptrdiff_t>(seg) - 1),
                             pt(static_cast<std::ptrdiff_t>(seg)),
                             pt(static_cast<std::ptrdiff_t>(seg) + 1),
                             pt(static_cast<std::ptrdiff_t>(seg) + 2), u);
    }
    c.points = std::move(out);
    c.angles.clear();  // angle field is stale after any reparametrization
    c.param_step = 0.0;
}

std::optional<Point> segment_intersection(const Point& p1, const Point& p2,
                                          const Point& p3, const Point& p4) {
    const Point d1 = p2 - p1, d2 = p4 - p3;
    const double den = d1.real() * d2.imag() - d1.imag() * d2.real();
    if (std::abs(den) < 1e-30) return std::nullopt;
    const Point r = p3 - p1;
    const double t = (r.real() * d2.imag() - r.imag() * d2.real()) / den;
    const double u = (r.real() * d1.imag() - r.imag() * d1.real()) / den;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return p1 + t * d1;
}

double shoelace(const std::vector<Point>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        a += p.real() * q.imag() - q.real() * p.imag();
    }
    return a / 2.0;
}

double point_to_segment(const Point& p, const Point& a, const Point& b) {
    const Point d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    double t = ((p - a).real() * d.real() + (p - a).imag() * d.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

}  // namespace

double PlanarCurve::length() const {
    double total = 0.0;
    for (std::size_t i = 0; i < segment_count(); ++i)
        total += seg_len(point(i), point(i + 1));
    return total;
}

double PlanarCurve::min_segment() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segment_count(); ++i)
        m = std::min(m, seg_len(point(i), point(i + 1)));
    return m;
}

double PlanarCurve::max_segment() const {
    double m = 0.0;
    for (std::size_t i = 0; i < segment_count(); ++i)
        m = std::max(m, seg_len(point(i), point(i + 1)));
    return m;
}

void PlanarCurve::validate() const {
    if (points.size() < 16)
        throw MalformedCurveError("curve needs at least 16 points, has " +
                                  std::to_string(points.size()));
    for (std::size_t i = 0; i < segment_count(); ++i) {
        if (seg_len(point(i), point(i + 1)) < 1e-300)
            throw MalformedCurveError("coincident points at index " + std::to_string(i));
    }
}

Point curvature_vector(const PlanarCurve& c, std::size_t i) {
    const std::size_t n = c.size();
    if (!c.closed() && (i == 0 || i + 1 >= n))
        throw DomainError("curvature index must be interior for open curves");
    if (i >= n) throw DomainError("curvature index out of range");

    const Point prev = c.point((i + n - 1) % n);
    const Point cur = c.point(i);
    const Point next = c.point((i + 1) % n);
    const double h1 = seg_len(prev, cur);
    const double h2 = seg_len(cur, next);
    const double scale = std::max({1.0, std::abs(cur)});
    if (h1 < 1e-14 * scale || h2 < 1e-14 * scale)
        throw MalformedCurveError("degenerate segment at index " + std::to_string(i));
    return 2.0 / (h1 + h2) * ((next - cur) / h2 - (cur - prev) / h1);
}

double max_curvature(const PlanarCurve& c) {
    const std::size_t n = c.size();
    double m = 0.0;
    const std::size_t lo = c.closed() ? 0 : 1;
    const std::size_t hi = c.closed() ? n : n - 1;
    for (std::size_t i = lo; i < hi; ++i)
        m = std::max(m, std::abs(curvature_vector(c, i)));
    return m;
}

double enclosed_area(const PlanarCurve& c) { return shoelace(c.points); }

std::optional<LoopInfo> detect_loop(const PlanarCurve& c) {
    const std::size_t nseg = c.segment_count();
    const double cell = std::max(c.max_segment(), 1e-12);

    // Hash segments into a uniform grid so the scan stays near-linear.
    auto key = [&](double x, double y) {
        return std::pair<long, long>{static_cast<long>(std::floor(x / cell)),
                                     static_cast<long>(std::floor(y / cell))};
    };
    std::unordered_map<long long, std::vector<std::size_t>> grid;
    auto pack = [](std::pair<long, long> k) {
        return (static_cast<long long>(k.first) << 32) ^
               (static_cast<long long>(k.second) & 0xffffffffLL);
    };
    for (std::size_t i = 0; i < nseg; ++i) {
        const Point a = c.point(i), b = c.point(i + 1);
        const auto ka = key(a.real(), a.imag());
        const auto kb = key(b.real(), b.imag());
        for (long gx = std::min(ka.first, kb.first); gx <= std::max(ka.first, kb.first); ++gx)
            for (long gy = std::min(ka.second, kb.second); gy <= std::max(ka.second, kb.second); ++gy)
                grid[pack({gx, gy})].push_back(i);
    }

    std::optional<LoopInfo> best;
    for (std::size_t i = 0; i < nseg; ++i) {
        const Point a = c.point(i), b = c.point(i + 1);
        const auto ka = key(a.real(), a.imag());
        const auto kb = key(b.real(), b.imag());
        for (long gx = std::min(ka.first, kb.first) - 1; gx <= std::max(ka.first, kb.first) + 1; ++gx) {
            for (long gy = std::min(ka.second, kb.second) - 1; gy <= std::max(ka.second, kb.second) + 1; ++gy) {
                auto it = grid.find(pack({gx, gy}));
                if (it == grid.end()) continue;
                for (std::size_t j : it->second) {
                    if (j <= i + 1) continue;
                    if (c.closed() && i == 0 && j == nseg - 1) continue;
                    const auto hit = segment_intersection(a, b, c.point(j), c.point(j + 1));
                    if (!hit) continue;
                    if (best && (j - i) >= (best->seg_b - best->seg_a)) continue;
                    std::vector<Point> poly;
                    poly.reserve(j - i + 1);
                    poly.push_back(*hit);
                    for (std::size_t k = i + 1; k <= j; ++k) poly.push_back(c.point(k));
                    best = LoopInfo{std::abs(shoelace(poly)), i, j, *hit};
                }
            }
        }
    }
    return best;
}

CurveFlowState make_flow_state(PlanarCurve c, double time, bool track_loops) {
    c.validate();
    CurveFlowState s;
    s.curve = std::move(c);
    s.time = time;
    s.max_curvature = max_curvature(s.curve);
    if (s.curve.closed()) {
        s.area = std::abs(enclosed_area(s.curve));
    } else if (track_loops) {
        if (auto loop = detect_loop(s.curve)) s.area = loop->area;
    }
    return s;
}

StepResult csf_step(const CurveFlowState& s, double dt, const FlowOptions& opts) {
    const double h_min = s.curve.min_segment();
    const double dt_max = 0.4 * h_min * h_min;
    if (dt > dt_max) throw StabilityError(dt, dt_max);

    if (s.max_curvature > opts.blowup_threshold)
        return {s, StepStatus::halted};

    const std::size_t n = s.curve.size();
    PlanarCurve next = s.curve;
    const std::size_t lo = s.curve.closed() ? 0 : 1;
    const std::size_t hi = s.curve.closed() ? n : n - 1;
    for (std::size_t i = lo; i < hi; ++i)
        next.points[i] += dt * curvature_vector(s.curve, i);

    if (next.max_segment() > opts.redistribution_ratio * next.min_segment())
        redistribute(next);

    CurveFlowState out;
    out.curve = std::move(next);
    out.time = s.time + dt;
    out.max_curvature = max_curvature(out.curve);
    if (out.curve.closed()) out.area = std::abs(enclosed_area(out.curve));
    return {std::move(out), StepStatus::ok};
}

FlowTrace run_flow(CurveFlowState s, double t_end, const FlowOptions& opts,
                   int record_every) {
    FlowTrace trace;
    auto record = [&](CurveFlowState st) {
        if (!st.curve.closed() && opts.track_loops) {
            if (auto loop = detect_loop(st.curve)) st.area = loop->area;
        }
        trace.records.push_back(std::move(st));
    };
    record(s);

    // hot loop over reused buffers; the per-step semantics match csf_step
    PlanarCurve curve = s.curve;
    double time = s.time;
    double max_curv = s.max_curvature;
    const std::size_t n = curve.size();
    const bool closed = curve.closed();
    const std::size_t nseg = curve.segment_count();
    std::vector<double> seg(nseg);
    std::vector<Point> disp(n);

    auto measure_segments = [&]() {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t i = 0; i < nseg; ++i) {
            seg[i] = seg_len(curve.point(i), curve.point(i + 1));
            lo = std::min(lo, seg[i]);
            hi = std::max(hi, seg[i]);
        }
        return std::pair{lo, hi};
    };

    int since_record = 0;
    auto snapshot = [&]() {
        CurveFlowState st;
        st.curve = curve;
        st.time = time;
        st.max_curvature = max_curv;
        if (closed) st.area = std::abs(enclosed_area(curve));
        return st;
    };

    while (time < t_end) {
        auto [h_min, h_max] = measure_segments();
        if (h_max > opts.redistribution_ratio * h_min) {
            redistribute(curve);
            std::tie(h_min, h_max) = measure_segments();
        }
        const double dt = std::min(0.38 * h_min * h_min, t_end - time);

        const std::size_t lo = closed ? 0 : 1;
        const std::size_t hi = closed ? n : n - 1;
        double mc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double h1 = seg[(i + nseg - 1) % nseg];
            const double h2 = seg[i % nseg];
            const Point k = 2.0 / (h1 + h2) *
                            ((curve.point(i + 1) - curve.point(i)) / h2 -
                             (curve.point(i) - curve.point((i + n - 1) % n)) / h1);
            disp[i] = k;
            mc = std::max(mc, std::abs(k));
        }
        max_curv = mc;
        if (mc > opts.blowup_threshold) {
            trace.halted = true;
            break;
        }
        for (std::size_t i = lo; i < hi; ++i) curve.points[i] += dt * disp[i];
        time += dt;

        if (++since_record >= record_every) {
            since_record = 0;
            record(snapshot());
        }
    }
    record(snapshot());
    trace.final = snapshot();
    return trace;
}

PlanarCurve expander_curve(double shoot, double arclength_span, double h) {
    if (shoot <= 0.0) throw DomainError("expander shoot parameter must be positive");
    if (h > arclength_span / 100.0)
        throw DomainError("expander step h must be at most span/100");

    struct State {
        double w1, w2, phi;
    };
    auto rhs = [](const State& y) {
        return State{std::cos(y.phi), std::sin(y.phi),
                     y.w2 * std::cos(y.phi) - y.w1 * std::sin(y.phi)};
    };
    auto axpy = [](const State& y, double a, const State& d) {
        return State{y.w1 + a * d.w1, y.w2 + a * d.w2, y.phi + a * d.phi};
    };

    const auto n = static_cast<std::size_t>(std::ceil(arclength_span / 2.0 / h));
    std::vector<State> half;
    half.reserve(n + 1);
    State y{shoot, 0.0, std::acos(-1.0) / 2.0};
    half.push_back(y);
    for (std::size_t k = 0; k < n; ++k) {
        const State k1 = rhs(y);
        const State k2 = rhs(axpy(y, h / 2.0, k1));
        const State k3 = rhs(axpy(y, h / 2.0, k2));
        const State k4 = rhs(axpy(y, h, k3));
        y = {y.w1 + h / 6.0 * (k1.w1 + 2.0 * k2.w1 + 2.0 * k3.w1 + k4.w1),
             y.w2 + h / 6.0 * (k1.w2 + 2.0 * k2.w2 + 2.0 * k3.w2 + k4.w2),
             y.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi)};
        if (!std::isfinite(y.w1) || !std::isfinite(y.w2) || !std::isfinite(y.phi))
            throw IntegrationDivergedError("expander integration diverged at arc length " +
                                           std::to_string((k + 1) * h));
        half.push_back(y);
    }

    // The solution is symmetric: w1 even, w2 odd, phi(-s) = pi - phi(s).
    PlanarCurve c;
    c.topology = Topology::open;
    c.points.reserve(2 * n + 1);
    c.angles.reserve(2 * n + 1);
    const double pi = std::acos(-1.0);
    for (std::size_t k = n; k > 0; --k) {
        c.points.emplace_back(half[k].w1, -half[k].w2);
        c.angles.push_back(pi - half[k].phi);
    }
    for (std::size_t k = 0; k <= n; ++k) {
        c.points.emplace_back(half[k].w1, half[k].w2);
        c.angles.push_back(half[k].phi);
    }
    c.param_step = h;
    c.validate();
    return c;
}

PlanarCurve grim_reaper_profile(double y_min, double y_max, double h) {
    const double pi = std::acos(-1.0);
    if (!(y_min > -pi / 2.0 && y_max < pi / 2.0 && y_min < y_max))
        throw DomainError("grim reaper range must satisfy -pi/2 < y_min < y_max < pi/2");
    auto n = static_cast<std::size_t>(std::lround((y_max - y_min) / h));
    n = std::max<std::size_t>(n, 15);
    const double step = (y_max - y_min) / static_cast<double>(n);
    PlanarCurve c;
    c.topology = Topology::open;
    c.points.reserve(n + 1);
    c.angles.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double y = y_min + step * static_cast<double>(k);
        c.points.emplace_back(-std::log(std::cos(y)), y);
        c.angles.push_back(pi / 2.0 - y);
    }
    c.param_step = step;
    return c;
}

MultiCurve double_curve(const PlanarCurve& w) {
    if (w.closed()) throw DomainError("double_curve expects an open curve");
    PlanarCurve neg = w;
    for (auto& p : neg.points) p = -p;
    neg.param_step = w.param_step;
    const double pi = std::acos(-1.0);
    for (auto& a : neg.angles) a += pi;
    return MultiCurve{{w, neg}};
}

AsymptoticAngles asymptotic_angles(const PlanarCurve& w) {
    if (w.angles.size() != w.points.size())
        throw DomainError("curve carries no tangent angle field");
    return {w.angles.back(), w.angles.front()};
}

double angle_oscillation(const PlanarCurve& c) {
    if (c.angles.size() != c.points.size())
        throw DomainError("curve carries no tangent angle field");
    const auto [lo, hi] = std::minmax_element(c.angles.begin(), c.angles.end());
    return *hi - *lo;
}

PlanarCurve loop_preset(int n_points) {
    // Arms at pi/2 -+ delta joined by a tanh-profile turn of pi + 2*delta;
    // the arms cross below the nose leaving a small loop.
    const double pi = std::acos(-1.0);
    const double total = 5.0, width = 0.25, delta = 0.4;
    const double h = total / static_cast<double>(n_points);
    PlanarCurve c;
    c.topology = Topology::open;
    c.points.reserve(n_points + 1);
    Point p{0.0, 0.0};
    c.points.push_back(p);
    for (int i = 0; i < n_points; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * h;
        const double u = (s - total / 2.0) / width;
        const double theta = (pi / 2.0 - delta) +
                             (pi + 2.0 * delta) * 0.5 * (1.0 + std::tanh(u));
        p += h * Point{std::cos(theta), std::sin(theta)};
        c.points.push_back(p);
    }
    return c;
}

PlanarCurve circle(double radius, int n_points) {
    PlanarCurve c;
    c.topology = Topology::closed;
    c.points.reserve(n_points);
    const double pi = std::acos(-1.0);
    for (int k = 0; k < n_points; ++k) {
        const double t = 2.0 * pi * static_cast<double>(k) / n_points;
        c.points.emplace_back(radius * std::cos(t), radius * std::sin(t));
    }
    return c;
}

PlanarCurve segment(Point a, Point b, int n_points) {
    PlanarCurve c;
    c.topology = Topology::open;
    c.points.reserve(n_points);
    for (int k = 0; k < n_points; ++k) {
        const double t = static_cast<double>(k) / (n_points - 1);
        c.points.push_back(a + t * (b - a));
    }
    return c;
}

double one_sided_hausdorff(const std::vector<Point>& a, const PlanarCurve& b) {
    double worst = 0.0;
    for (const Point& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.segment_count(); ++j)
            best = std::min(best, point_to_segment(p, b.point(j), b.point(j + 1)));
        worst = std::max(worst, best);
    }
    return worst;
}

double hausdorff_distance(const PlanarCurve& a, const PlanarCurve& b) {
    return std::max(one_sided_hausdorff(a.points, b),
                    one_sided_hausdorff(b.points, a));
}

}  // namespace lmcf::curves
