#include "lmcf/solitons.hpp"

#include <algorithm>
#include <cmath>

namespace lmcf::solitons {

using ambient::AmbientVector;
using surface::GridShape;
using surface::PatchSet;
using surface::SurfacePatch;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::size_t steps_for(double lo, double hi, double h) {
    return std::max<std::size_t>(3, static_cast<std::size_t>(std::lround((hi - lo) / h)));
}

// Extend the stored expander curve so that |w| reaches at least `target`
// on each wing.  Same step size, same shooting: re-integration reproduces
// the stored points.
curves::PlanarCurve curve_reaching(const SolitonFamily& f, double target) {
    curves::PlanarCurve w = f.curve;
    double span = f.curve_span;
    for (int tries = 0; tries < 16; ++tries) {
        if (std::abs(w.points.back()) >= target) return w;
        span *= 2.0;
        w = curves::expander_curve(f.shoot, span, f.curve_h);
    }
    throw DomainError("expander curve does not reach |w| = " + std::to_string(target));
}

// First arc length s >= 0 with |w(s)| >= value (the modulus is monotone on
// each wing).
double arclength_at_modulus(const curves::PlanarCurve& w, double h, double value) {
    const std::size_t mid = w.size() / 2;
    for (std::size_t k = mid; k < w.size(); ++k) {
        if (std::abs(w.points[k]) >= value)
            return static_cast<double>(k - mid) * h;
    }
    return static_cast<double>(w.size() - 1 - mid) * h;
}

struct JltEvaluator {
    const curves::PlanarCurve& w;
    double h;
    double t;

    std::size_t mid() const { return w.size() / 2; }

    // curve sample index for arc length s (must sit on the grid)
    std::size_t index(double s) const {
        const double fi = static_cast<double>(mid()) + s / h;
        const auto k = static_cast<std::ptrdiff_t>(std::lround(fi));
        if (k < 0 || k >= static_cast<std::ptrdiff_t>(w.size()))
            throw DomainError("jlt parameter outside the generating curve span");
        return static_cast<std::size_t>(k);
    }

    AmbientVector position(double x, std::size_t k) const {
        const auto wp = w.points[k];
        const double theta = w.angles[k];
        return {(std::norm(wp) - x * x) / 2.0 + t, -theta, x * wp.real(), x * wp.imag()};
    }
    AmbientVector tangent_x(double, std::size_t k) const {
        const auto wp = w.points[k];
        return {/*x deriv of (|w|^2-x^2)/2*/ 0.0, 0.0, wp.real(), wp.imag()};
    }
    AmbientVector tangent_x_full(double x, std::size_t k) const {
        const auto wp = w.points[k];
        return {-x, 0.0, wp.real(), wp.imag()};
    }
    AmbientVector tangent_y(double x, std::size_t k) const {
        const auto wp = w.points[k];
        const double theta = w.angles[k];
        const double c = std::cos(theta), s = std::sin(theta);
        const double theta_prime = wp.imag() * c - wp.real() * s;
        return {wp.real() * c + wp.imag() * s, -theta_prime, x * c, x * s};
    }
};

// Grid: u along the generating curve (its own arc-length sampling), v = x.
// This order orients the patch so that arg Omega recovers theta(y).
SurfacePatch jlt_patch(const curves::PlanarCurve& w, double curve_h, double t,
                       double x0, double x1, double hx, double y0, double y1,
                       double hy_request) {
    JltEvaluator ev{w, curve_h, t};
    const auto stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(hy_request / curve_h)));
    const double hy = static_cast<double>(stride) * curve_h;
    const std::size_t k_lo = ev.index(std::ceil(y0 / hy) * hy);
    std::size_t nu = 0;
    while (k_lo + nu * stride < w.size() &&
           static_cast<double>(k_lo + nu * stride) <=
               static_cast<double>(ev.mid()) + y1 / curve_h + 0.5)
        ++nu;
    const std::size_t nv = steps_for(x0, x1, hx) + 1;

    SurfacePatch p;
    p.tag = "jlt";
    p.grid = GridShape{nu, nv,
                       (static_cast<double>(k_lo) - static_cast<double>(ev.mid())) * curve_h,
                       x0, hy, (x1 - x0) / static_cast<double>(nv - 1), false};
    p.pos.resize(p.grid.count());
    p.tangent_u.resize(p.grid.count());
    p.tangent_v.resize(p.grid.count());
    for (std::size_t iu = 0; iu < nu; ++iu) {
        const std::size_t k = k_lo + iu * stride;
        for (std::size_t iv = 0; iv < nv; ++iv) {
            const double x = p.grid.v(iv);
            const std::size_t idx = p.grid.index(iu, iv);
            p.pos[idx] = ev.position(x, k);
            p.tangent_u[idx] = ev.tangent_y(x, k);
            p.tangent_v[idx] = ev.tangent_x_full(x, k);
        }
    }
    return p;
}

SurfacePatch product_patch(const curves::PlanarCurve& gamma, double v0, double v1,
                           double hv) {
    const std::size_t nu = gamma.closed() ? gamma.size() : gamma.size();
    const std::size_t nv = steps_for(v0, v1, hv) + 1;
    SurfacePatch p;
    p.tag = "product";
    const double hu = gamma.length() / static_cast<double>(gamma.segment_count());
    p.grid = GridShape{nu, nv, 0.0, v0, hu, (v1 - v0) / static_cast<double>(nv - 1),
                       gamma.closed()};
    p.pos.resize(p.grid.count());
    for (std::size_t iu = 0; iu < nu; ++iu) {
        const auto q = gamma.points[iu];
        for (std::size_t iv = 0; iv < nv; ++iv)
            p.pos[p.grid.index(iu, iv)] = {q.real(), q.imag(), p.grid.v(iv), 0.0};
    }
    return p;
}

void apply_scale(PatchSet& patches, double s) {
    if (s == 1.0) return;
    for (auto& p : patches) {
        for (auto& x : p.pos) x *= s;
        for (auto& x : p.tangent_u) x *= s;
        for (auto& x : p.tangent_v) x *= s;
        p.grid.u0 *= s;
        p.grid.v0 *= s;
        p.grid.hu *= s;
        p.grid.hv *= s;
    }
}

}  // namespace

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::plane: return "plane";
        case Kind::grim_reaper: return "grim-reaper";
        case Kind::jlt_translator: return "jlt";
        case Kind::product: return "product";
        case Kind::expander: return "expander";
    }
    return "?";
}

Kind kind_from_name(const std::string& name) {
    if (name == "plane") return Kind::plane;
    if (name == "grim-reaper" || name == "grim_reaper") return Kind::grim_reaper;
    if (name == "jlt") return Kind::jlt_translator;
    if (name == "product") return Kind::product;
    if (name == "expander") return Kind::expander;
    throw DomainError("unknown soliton kind: " + name);
}

void SolitonFamily::validate_time(double t) const {
    const double tb = t / (scale * scale);
    if (kind == Kind::expander && tb <= 0.0)
        throw DomainError("expander family requires t > 0");
    if (kind == Kind::product && tb < 0.0)
        throw DomainError("product family evolves forward from t = 0 only");
}

PatchSet SolitonFamily::patches(const Window& win, double t) const {
    validate_time(t);
    const double tb = t / (scale * scale);
    // windows are stated in the base (unscaled) frame
    PatchSet out;
    switch (kind) {
        case Kind::plane: {
            const std::size_t nu = steps_for(win.u0, win.u1, win.hu) + 1;
            const std::size_t nv = steps_for(win.v0, win.v1, win.hv) + 1;
            const double ca = std::cos(alpha), sa = std::sin(alpha);
            GridShape g{nu, nv, win.u0, win.v0,
                        (win.u1 - win.u0) / static_cast<double>(nu - 1),
                        (win.v1 - win.v0) / static_cast<double>(nv - 1), false};
            SurfacePatch p;
            p.tag = "plane";
            p.grid = g;
            p.pos.resize(g.count());
            p.tangent_u.assign(g.count(), {1.0, 0.0, 0.0, 0.0});
            p.tangent_v.assign(g.count(), {0.0, 0.0, ca, sa});
            for (std::size_t iu = 0; iu < nu; ++iu)
                for (std::size_t iv = 0; iv < nv; ++iv)
                    p.pos[g.index(iu, iv)] = {g.u(iu) + tb, 0.0, g.v(iv) * ca, g.v(iv) * sa};
            out.push_back(std::move(p));
            break;
        }
        case Kind::grim_reaper: {
            if (win.u0 <= -kPi / 2.0 || win.u1 >= kPi / 2.0)
                throw DomainError("grim reaper window must lie inside (-pi/2, pi/2)");
            const std::size_t nu = steps_for(win.u0, win.u1, win.hu) + 1;
            const std::size_t nv = steps_for(win.v0, win.v1, win.hv) + 1;
            GridShape g{nu, nv, win.u0, win.v0,
                        (win.u1 - win.u0) / static_cast<double>(nu - 1),
                        (win.v1 - win.v0) / static_cast<double>(nv - 1), false};
            SurfacePatch p;
            p.tag = "grim-reaper";
            p.grid = g;
            p.pos.resize(g.count());
            p.tangent_u.resize(g.count());
            p.tangent_v.assign(g.count(), {0.0, 0.0, 1.0, 0.0});
            for (std::size_t iu = 0; iu < nu; ++iu) {
                const double y = g.u(iu);
                for (std::size_t iv = 0; iv < nv; ++iv) {
                    p.pos[g.index(iu, iv)] = {-std::log(std::cos(y)) + tb, y, g.v(iv), 0.0};
                    p.tangent_u[g.index(iu, iv)] = {std::tan(y), 1.0, 0.0, 0.0};
                }
            }
            out.push_back(std::move(p));
            break;
        }
        case Kind::jlt_translator: {
            // window: u along the curve (y), v = x
            const double reach = std::abs(win.u0) + std::abs(win.u1) + 4.0;
            const auto w = curve_reaching(*this, reach);
            out.push_back(jlt_patch(w, curve_h, tb, win.v0, win.v1, win.hv,
                                    win.u0, win.u1, win.hu));
            break;
        }
        case Kind::product: {
            curves::PlanarCurve g = gamma;
            if (tb > 0.0) {
                auto trace = curves::run_flow(curves::make_flow_state(gamma), tb, {}, 1 << 30);
                if (trace.halted)
                    throw DomainError("product curve flow halted before t = " + std::to_string(tb));
                g = trace.final.curve;
            }
            out.push_back(product_patch(g, win.v0, win.v1, win.hv));
            break;
        }
        case Kind::expander: {
            const double grow = std::sqrt(2.0 * tb);
            const double reach = std::abs(win.v1) + 2.0;
            const auto w = curve_reaching(*this, reach);
            auto wings = curves::double_curve(w);
            for (const auto& comp : wings.components) {
                JltEvaluator ev{comp, curve_h, 0.0};
                const auto stride = std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::lround(win.hv / curve_h)));
                const double hy = static_cast<double>(stride) * curve_h;
                const std::size_t k_lo = ev.index(std::ceil(win.v0 / hy) * hy);
                std::size_t nv = 0;
                while (k_lo + nv * stride < comp.size() &&
                       static_cast<double>(k_lo + nv * stride) <=
                           static_cast<double>(ev.mid()) + win.v1 / curve_h + 0.5)
                    ++nv;
                const std::size_t nu = steps_for(win.u0, win.u1, win.hu) + 1;
                SurfacePatch p;
                p.tag = "expander";
                p.grid = GridShape{
                    nu, nv, grow * win.u0,
                    (static_cast<double>(k_lo) - static_cast<double>(ev.mid())) * curve_h,
                    grow * (win.u1 - win.u0) / static_cast<double>(nu - 1), hy, false};
                p.pos.resize(p.grid.count());
                p.tangent_u.assign(p.grid.count(), {1.0, 0.0, 0.0, 0.0});
                p.tangent_v.resize(p.grid.count());
                for (std::size_t iu = 0; iu < nu; ++iu) {
                    const double u = p.grid.u(iu);
                    for (std::size_t iv = 0; iv < nv; ++iv) {
                        const std::size_t k = k_lo + iv * stride;
                        const auto wp = comp.points[k];
                        const double th = comp.angles[k];
                        const std::size_t idx = p.grid.index(iu, iv);
                        p.pos[idx] = {u, 0.0, grow * wp.real(), grow * wp.imag()};
                        p.tangent_v[idx] = {0.0, 0.0, grow * std::cos(th), grow * std::sin(th)};
                    }
                }
                out.push_back(std::move(p));
            }
            break;
        }
    }
    apply_scale(out, scale);
    return out;
}

PatchSet SolitonFamily::patches_covering(double radius, double t, double h) const {
    validate_time(t);
    const double tb = t / (scale * scale);
    const double rb = radius / scale;
    const double hb = h / scale;
    PatchSet out;
    switch (kind) {
        case Kind::plane: {
            Window win{-tb - rb, -tb + rb, -rb, rb, hb, hb};
            SolitonFamily base = *this;
            base.scale = 1.0;
            out = base.patches(win, tb);
            break;
        }
        case Kind::grim_reaper: {
            if (tb > rb) break;  // the strip has moved past the ball
            if (tb < -(rb + 30.0)) {
                // far arms: two sheets parametrized by (x1, x2)
                const std::size_t n = steps_for(-rb, rb, hb) + 1;
                for (const double side : {+1.0, -1.0}) {
                    GridShape g{n, n, -rb, -rb, 2.0 * rb / static_cast<double>(n - 1),
                                2.0 * rb / static_cast<double>(n - 1), false};
                    SurfacePatch p;
                    p.tag = "grim-reaper-arm";
                    p.grid = g;
                    p.pos.resize(g.count());
                    for (std::size_t iu = 0; iu < n; ++iu) {
                        const double xi = g.u(iu);
                        const double c = std::exp(tb - xi);  // cos y on the arm
                        const double y = side * std::acos(std::min(c, 1.0));
                        for (std::size_t iv = 0; iv < n; ++iv)
                            p.pos[g.index(iu, iv)] = {xi, y, g.v(iv), 0.0};
                    }
                    out.push_back(std::move(p));
                }
                break;
            }
            const double c_min = std::exp(std::min(tb - rb, -1e-3));
            const double y_max = std::min(std::acos(c_min), kPi / 2.0 - 1e-8);
            Window win{-y_max, y_max, -rb, rb, hb, hb};
            // cap the y resolution; the metric stretches toward the arms
            const double n_y = 2.0 * y_max / win.hu;
            if (n_y > 1600.0) win.hu = 2.0 * y_max / 1600.0;
            if (n_y < 64.0) win.hu = 2.0 * y_max / 64.0;
            SolitonFamily base = *this;
            base.scale = 1.0;
            out = base.patches(win, tb);
            break;
        }
        case Kind::jlt_translator: {
            if (std::abs(tb) <= 4.0 * (rb + 5.0)) {
                const double x_max = std::sqrt(2.0 * (rb + std::abs(tb))) + 1.0;
                const double w_max = std::sqrt(2.0 * (rb + std::abs(tb)) + x_max * x_max) + 1.0;
                const auto w = curve_reaching(*this, w_max);
                const double s_hi = arclength_at_modulus(w, curve_h, w_max);
                const double hx = std::max(hb, 2.0 * x_max / 600.0);
                const double hy = std::max(hb, 2.0 * s_hi / 600.0);
                out.push_back(jlt_patch(w, curve_h, tb, -x_max, x_max, hx, -s_hi, s_hi, hy));
            } else if (tb < 0.0) {
                // two wing bands around |w| = sqrt(2|t|)
                const double a = -tb;
                const double w_lo = std::sqrt(std::max(2.0 * (a - rb), 0.25));
                const double x_max = 1.05 * rb / std::max(w_lo, 1.0) + 0.2;
                const double w_hi = std::sqrt(2.0 * (a + rb) + x_max * x_max) + 0.1;
                const auto w = curve_reaching(*this, w_hi);
                const double s_lo = arclength_at_modulus(w, curve_h, w_lo);
                const double s_hi = arclength_at_modulus(w, curve_h, w_hi);
                const double hx = std::min(hb, 2.0 * x_max / 48.0);
                const double hy = std::max(curve_h, std::min(hb, (s_hi - s_lo) / 48.0));
                out.push_back(jlt_patch(w, curve_h, tb, -x_max, x_max, hx, s_lo, s_hi, hy));
                out.push_back(jlt_patch(w, curve_h, tb, -x_max, x_max, hx, -s_hi, -s_lo, hy));
            } else {
                // two x-bands: the blow-up of R x sqrt(2s) w~ near the origin
                const double x_lo = std::sqrt(std::max(2.0 * (tb - rb) + shoot * shoot, 0.25));
                const double w_band = 1.05 * rb / x_lo + 0.1;
                const auto w = curve_reaching(*this, w_band);
                const double s_band = arclength_at_modulus(w, curve_h, w_band);
                const double x_hi = std::sqrt(2.0 * (tb + rb) + w_band * w_band);
                const double hx = std::min(hb, (x_hi - x_lo) / 48.0);
                const double hy = std::max(curve_h, std::min(hb, 2.0 * s_band / 48.0));
                out.push_back(jlt_patch(w, curve_h, tb, x_lo, x_hi, hx, -s_band, s_band, hy));
                out.push_back(jlt_patch(w, curve_h, tb, -x_hi, -x_lo, hx, -s_band, s_band, hy));
            }
            break;
        }
        case Kind::product: {
            Window win{0, 0, -rb, rb, hb, hb};
            SolitonFamily base = *this;
            base.scale = 1.0;
            out = base.patches(win, tb);
            break;
        }
        case Kind::expander: {
            const double grow = std::sqrt(2.0 * tb);
            const double c_max = rb / grow + 0.5;
            const auto w = curve_reaching(*this, c_max);
            const double s_max = arclength_at_modulus(w, curve_h, c_max);
            Window win{-rb, rb, -s_max, s_max, hb, std::max(curve_h, hb / grow)};
            SolitonFamily base = *this;
            base.scale = 1.0;
            base.curve = w;
            base.curve_span = 2.0 * s_max;
            out = base.patches(win, tb);
            break;
        }
    }
    apply_scale(out, scale);
    return out;
}

SolitonFamily SolitonFamily::scaled(double lambda) const {
    if (lambda <= 0.0) throw DomainError("blow-down scale must be positive");
    SolitonFamily f = *this;
    f.scale = scale * lambda;
    return f;
}

Window SolitonFamily::default_window(double h) const {
    switch (kind) {
        case Kind::plane: return {-3.0, 3.0, -3.0, 3.0, h, h};
        case Kind::grim_reaper: return {-1.4, 1.4, -1.4, 1.4, h, h};
        case Kind::jlt_translator: return {-3.0, 3.0, -3.0, 3.0, h, h};
        case Kind::product: return {0.0, 0.0, -1.5, 1.5, h, h};
        case Kind::expander: return {-2.0, 2.0, -3.0, 3.0, h, h};
    }
    return {};
}

SolitonFamily make_plane(double alpha) {
    SolitonFamily f;
    f.kind = Kind::plane;
    f.alpha = alpha;
    return f;
}

SolitonFamily make_grim_reaper() {
    SolitonFamily f;
    f.kind = Kind::grim_reaper;
    return f;
}

namespace {

void validate_expander_generator(const curves::PlanarCurve& w) {
    if (w.angles.size() != w.points.size())
        throw DomainError("generating curve carries no tangent-angle field");
    const std::size_t mid = w.size() / 2;
    if (std::abs(w.points[mid].imag()) > 1e-9)
        throw DomainError("generating curve vertex is not on the x-axis");
}

}  // namespace

SolitonFamily make_jlt(const curves::PlanarCurve& w) {
    validate_expander_generator(w);
    SolitonFamily f;
    f.kind = Kind::jlt_translator;
    f.curve = w;
    const std::size_t mid = w.size() / 2;
    f.shoot = w.points[mid].real();
    if (w.param_step <= 0.0)
        throw DomainError("generating curve carries no arc-length step");
    f.curve_h = w.param_step;
    f.curve_span = static_cast<double>(w.size() - 1) * f.curve_h;
    return f;
}

SolitonFamily make_product(const curves::PlanarCurve& gamma) {
    gamma.validate();
    SolitonFamily f;
    f.kind = Kind::product;
    f.gamma = gamma;
    return f;
}

SolitonFamily make_expander(const curves::MultiCurve& w_tilde) {
    if (w_tilde.components.size() != 2)
        throw DomainError("expander family needs the two components of w~");
    validate_expander_generator(w_tilde.components[0]);
    SolitonFamily f = make_jlt(w_tilde.components[0]);
    f.kind = Kind::expander;
    return f;
}

curves::AsymptoticAngles generator_asymptotic_angles(const SolitonFamily& f) {
    if (f.kind != Kind::jlt_translator && f.kind != Kind::expander)
        throw DomainError("family has no generating expander curve");
    return curves::asymptotic_angles(f.curve);
}

}  // namespace lmcf::solitons
