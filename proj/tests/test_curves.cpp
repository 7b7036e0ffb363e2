#include "doctest.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "lmcf/curve.hpp"

using namespace lmcf;
using namespace lmcf::curves;

namespace {

constexpr double kPi = 3.14159265358979323846;

// analytic curvature of a graph x(y): |x''| / (1 + x'^2)^(3/2)
double graph_curvature(double xp, double xpp) {
    return std::abs(xpp) / std::pow(1.0 + xp * xp, 1.5);
}

double max_expander_residual(const PlanarCurve& w) {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        const auto k = curvature_vector(w, i);
        const auto p = w.points[i];
        const auto t = w.points[i + 1] - w.points[i - 1];
        const auto tn = t / std::abs(t);
        const double along = p.real() * tn.real() + p.imag() * tn.imag();
        const Point perp = p - along * tn;
        worst = std::max(worst, std::abs(k - perp));
    }
    return worst;
}

}  // namespace

TEST_CASE("curvature of a circle points to the center at 1/R") {
    for (int n : {128, 256}) {
        const auto c = circle(2.0, n);
        double worst = 0.0;
        for (std::size_t i = 0; i < c.size(); i += 7) {
            const auto k = curvature_vector(c, i);
            const auto expect = -c.points[i] / std::norm(c.points[i]) * 2.0 * 0.5;
            worst = std::max(worst, std::abs(k - expect) * 2.0);
        }
        // uniform circles are exact for the chord-based stencil
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("curvature of non-uniformly sampled circle converges at second order") {
    auto sample = [](int n) {
        PlanarCurve c;
        c.topology = Topology::closed;
        for (int k = 0; k < n; ++k) {
            const double t = 2.0 * kPi * k / n + 0.2 * std::sin(2.0 * kPi * k / n);
            c.points.emplace_back(std::cos(t), std::sin(t));
        }
        return c;
    };
    auto worst = [&](int n) {
        const auto c = sample(n);
        double w = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto k = curvature_vector(c, i);
            w = std::max(w, std::abs(k + c.points[i]));
        }
        return w;
    };
    const double e1 = worst(128), e2 = worst(256);
    CHECK(e1 / e2 > 3.5);
    CHECK(e2 < 1e-3);
}

TEST_CASE("curvature of a straight segment vanishes") {
    const auto s = segment({0, 0}, {3, 1}, 64);
    for (std::size_t i = 1; i + 1 < s.size(); ++i)
        CHECK(std::abs(curvature_vector(s, i)) < 1e-13);
}

TEST_CASE("curvature of the grim-reaper profile matches the analytic oracle") {
    const auto g = grim_reaper_profile(-1.2, 1.2, 0.004);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double y = g.points[i].imag();
        // x = -log cos y: x' = tan y, x'' = sec^2 y, curvature = cos y
        const double expect = graph_curvature(std::tan(y), 1.0 / std::pow(std::cos(y), 2));
        CHECK(expect == doctest::Approx(std::cos(y)).epsilon(1e-12));
        worst = std::max(worst, std::abs(std::abs(curvature_vector(g, i)) - expect));
    }
    CHECK(worst < 5e-5);
    CHECK(std::abs(g.points[g.size() / 2]) < 1e-12);  // y = 0 maps to the origin
}

TEST_CASE("curve validation and error paths") {
    PlanarCurve tiny;
    tiny.points = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(tiny.validate(), MalformedCurveError);

    auto seg = segment({0, 0}, {1, 0}, 32);
    seg.points[10] = seg.points[9];  // coincident neighbors
    CHECK_THROWS_AS(curvature_vector(seg, 10), MalformedCurveError);
    CHECK_THROWS_AS(curvature_vector(seg, 0), DomainError);   // endpoint of open curve
    CHECK_THROWS_AS(curvature_vector(seg, 99), DomainError);

    CHECK_THROWS_AS(grim_reaper_profile(-2.0, 1.0, 0.01), DomainError);
    CHECK_THROWS_AS(expander_curve(-1.0, 10.0, 0.01), DomainError);
    CHECK_THROWS_AS(expander_curve(1.0, 10.0, 0.5), DomainError);
    CHECK_THROWS_AS(
        expander_curve(std::numeric_limits<double>::infinity(), 16.0, 0.01),
        IntegrationDivergedError);
}

TEST_CASE("csf step rejects unstable steps with the required bound") {
    auto state = make_flow_state(circle(1.0, 64));
    const double h = state.curve.min_segment();
    try {
        csf_step(state, h * h);
        FAIL("expected StabilityError");
    } catch (const StabilityError& e) {
        CHECK(e.required_dt == doctest::Approx(0.4 * h * h));
        CHECK(e.requested_dt == doctest::Approx(h * h));
    }
}

TEST_CASE("csf halts on curvature overflow carrying the state") {
    auto state = make_flow_state(circle(5e-4, 64));
    CHECK(state.max_curvature > 1e3);
    const auto r = csf_step(state, 1e-10);
    CHECK(r.status == StepStatus::halted);
    CHECK(r.state.time == state.time);
    CHECK(r.state.curve.points[0] == state.curve.points[0]);
}

TEST_CASE("straight clamped segment is a fixed point of the flow") {
    auto state = make_flow_state(segment({0, 0}, {2, 0}, 32));
    const auto before = state.curve.points;
    for (int i = 0; i < 20; ++i) {
        const double h = state.curve.min_segment();
        state = csf_step(state, 0.38 * h * h).state;
    }
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(std::abs(state.curve.points[i] - before[i]) < 1e-12);
}

TEST_CASE("circle extinction time R^2/2 within one percent") {
    auto trace = run_flow(make_flow_state(circle(1.0, 192)), 10.0, {}, 1 << 30);
    CHECK(trace.halted);
    const double r_halt = 1.0 / trace.final.max_curvature;
    const double t_ext = trace.final.time + r_halt * r_halt / 2.0;
    CHECK(std::abs(t_ext - 0.5) < 0.005);
}

TEST_CASE("length decreases and the enclosed area shrinks at rate 2 pi") {
    // convex ellipse
    PlanarCurve ell;
    ell.topology = Topology::closed;
    const int n = 256;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * kPi * k / n;
        ell.points.emplace_back(1.2 * std::cos(t), 0.8 * std::sin(t));
    }
    auto state = make_flow_state(ell);
    double prev_len = state.curve.length();
    const double a0 = *state.area;
    const double t0 = state.time;
    for (int i = 0; i < 10; ++i) {
        const double h = state.curve.min_segment();
        state = csf_step(state, 0.38 * h * h).state;
        const double len = state.curve.length();
        CHECK(len <= prev_len + 1e-10);
        prev_len = len;
    }
    const double rate = (*state.area - a0) / (state.time - t0);
    CHECK(std::abs(rate + 2.0 * kPi) < 0.03 * 2.0 * kPi);
}

TEST_CASE("grim reaper translates under the flow") {
    auto profile = grim_reaper_profile(-1.45, 1.45, 0.004);
    const double tau = 0.5;
    auto trace = run_flow(make_flow_state(profile), tau, {}, 1 << 30);
    REQUIRE(!trace.halted);
    double worst = 0.0;
    for (const auto& p : trace.final.curve.points) {
        if (std::abs(p.imag()) > 1.0) continue;
        worst = std::max(worst,
                         std::abs(p.real() - (-std::log(std::cos(p.imag())) + tau)));
    }
    // 2% of the width pi of the translating strip
    CHECK(worst < 0.02 * kPi);
}

TEST_CASE("expander curve satisfies k = w_perp at second order") {
    const auto w1 = expander_curve(1.0, 16.0, 0.02);
    const auto w2 = expander_curve(1.0, 16.0, 0.01);
    const double e1 = max_expander_residual(w1);
    const double e2 = max_expander_residual(w2);
    CHECK(e1 < 1e-4);
    CHECK(e1 / e2 > 3.5);
}

TEST_CASE("expander oscillation and asymptotic angles match the golden integration") {
    std::ifstream in(std::string(LMCF_GOLDEN_DIR) + "/expander_oscillation.json");
    REQUIRE(in.good());
    nlohmann::json golden;
    in >> golden;

    struct Row {
        const char* key;
        double shoot;
    };
    for (const Row row : {Row{"shoot_0.5", 0.5}, Row{"shoot_1.0", 1.0}, Row{"shoot_2.0", 2.0}}) {
        const auto w = expander_curve(row.shoot, 16.0, 0.002);
        const double osc = angle_oscillation(w);
        const auto asym = asymptotic_angles(w);
        CHECK(osc == doctest::Approx(golden[row.key]["oscillation"].get<double>()).epsilon(1e-8));
        CHECK(asym.forward ==
              doctest::Approx(golden[row.key]["asymptotic_angle"].get<double>()).epsilon(1e-8));
        CHECK(asym.backward == doctest::Approx(kPi - asym.forward).epsilon(1e-12));
    }

    // oscillation grows with the shooting parameter on this family
    const double osc_small = golden["shoot_0.5"]["oscillation"].get<double>();
    const double osc_large = golden["shoot_2.0"]["oscillation"].get<double>();
    CHECK(osc_small < osc_large);
}

TEST_CASE("sqrt(2t) w solves curve shortening: evolve t=1 to t=1.2") {
    const auto w = expander_curve(1.0, 9.0, 0.01);
    PlanarCurve start = w;
    for (auto& p : start.points) p *= std::sqrt(2.0);
    start.angles.clear();
    PlanarCurve target = w;
    for (auto& p : target.points) p *= std::sqrt(2.0 * 1.2);
    target.angles.clear();

    auto trace = run_flow(make_flow_state(start), 0.2, {}, 1 << 30);
    REQUIRE(!trace.halted);

    // interior points only: clamped ends are off the exact solution
    const auto& pts = trace.final.curve.points;
    std::vector<Point> interior;
    double arc = 0.0;
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        arc += std::abs(pts[i] - pts[i - 1]);
        cum.push_back(arc);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (cum[i] > 1.2 && arc - cum[i] > 1.2) interior.push_back(pts[i]);
    REQUIRE(interior.size() > 100);

    double diameter = 0.0;
    for (const auto& p : target.points)
        diameter = std::max(diameter, 2.0 * std::abs(p));
    CHECK(one_sided_hausdorff(interior, target) < 0.02 * diameter);
}

TEST_CASE("double curve doubles the points and mirrors the half-line") {
    const auto w = segment({1, 0}, {5, 0}, 32);
    const auto pair = double_curve(w);
    REQUIRE(pair.components.size() == 2);
    CHECK(pair.components[0].size() + pair.components[1].size() == 2 * w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(std::abs(pair.components[1].points[i] + w.points[i]) < 1e-15);
    CHECK_THROWS_AS(double_curve(circle(1.0, 32)), DomainError);
}

TEST_CASE("scaled w~ converges to two crossing lines") {
    const auto asym = asymptotic_angles(expander_curve(1.0, 16.0, 0.01));

    // the limit lines through the origin in the ball of radius 2
    auto line_points = [&](double angle) {
        std::vector<Point> pts;
        for (double t = -2.0; t <= 2.0; t += 0.01) pts.emplace_back(t * std::cos(angle), t * std::sin(angle));
        return pts;
    };

    double prev = 1e9;
    for (const double lambda : {1e-1, 1e-2, 1e-3}) {
        const double scale = std::sqrt(lambda);
        // integrate far enough that the scaled curve fills the ball
        const auto w = expander_curve(1.0, 4.4 * 2.0 / scale + 8.0, 0.01);
        const auto wt = double_curve(w);
        std::vector<Point> sample;
        PlanarCurve scaled_all;
        scaled_all.topology = Topology::open;
        for (const auto& comp : wt.components)
            for (const auto& p : comp.points) {
                const auto q = scale * p;
                scaled_all.points.push_back(q);
                if (std::abs(q) <= 2.0) sample.push_back(q);
            }
        // symmetric Hausdorff on the ball: curve -> lines and lines -> curve
        double d = 0.0;
        PlanarCurve lineA, lineB;
        lineA.points = line_points(asym.forward);
        lineB.points = line_points(kPi - asym.forward);
        for (const auto& q : sample) {
            double best = 1e18;
            for (const auto& lp : lineA.points) best = std::min(best, std::abs(q - lp));
            for (const auto& lp : lineB.points) best = std::min(best, std::abs(q - lp));
            d = std::max(d, best);
        }
        for (const auto& lp : lineA.points) {
            double best = 1e18;
            for (const auto& q : scaled_all.points) best = std::min(best, std::abs(q - lp));
            d = std::max(d, best);
        }
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("loop preset carries a small loop that shrinks under the flow") {
    const auto c = loop_preset(1200);
    const auto loop = detect_loop(c);
    REQUIRE(loop.has_value());
    CHECK(loop->area > 0.08);
    CHECK(loop->area < 0.2);

    FlowOptions opts;
    opts.track_loops = true;
    auto trace = run_flow(make_flow_state(c, 0.0, true), 0.01, opts, 200);
    REQUIRE(trace.records.size() >= 2);
    REQUIRE(trace.records.front().area.has_value());
    REQUIRE(trace.records.back().area.has_value());
    CHECK(*trace.records.back().area < *trace.records.front().area);
}
