#include "lmcf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "lmcf/linalg.hpp"

namespace lmcf::surface {

namespace {

using linalg::Mat2;

constexpr double kPi = 3.14159265358979323846;

// First derivative along one axis: 4th-order central in the interior
// (keeps the metric coefficients from polluting the second-order operator
// stencils), one-sided second order within two nodes of a boundary.
template <class T, class At>
T d1(const At& at, std::size_t n, double h, bool periodic, std::size_t i) {
    if (periodic && n >= 5) {
        const std::size_t m2 = (i + n - 2) % n, m1 = (i + n - 1) % n;
        const std::size_t p1 = (i + 1) % n, p2 = (i + 2) % n;
        return (at(m2) - at(m1) * 8.0 + at(p1) * 8.0 - at(p2)) * (1.0 / (12.0 * h));
    }
    if (periodic) {
        return (at((i + 1) % n) - at((i + n - 1) % n)) * (1.0 / (2.0 * h));
    }
    if (i == 0) return (at(0) * -3.0 + at(1) * 4.0 - at(2)) * (1.0 / (2.0 * h));
    if (i == n - 1) return (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * (1.0 / (2.0 * h));
    if (n >= 6 && i >= 2 && i + 2 < n)
        return (at(i - 2) - at(i - 1) * 8.0 + at(i + 1) * 8.0 - at(i + 2)) *
               (1.0 / (12.0 * h));
    return (at(i + 1) - at(i - 1)) * (1.0 / (2.0 * h));
}

template <class T, class At>
T d2(const At& at, std::size_t n, double h, bool periodic, std::size_t i) {
    const double ih2 = 1.0 / (h * h);
    if (periodic) {
        return (at((i + 1) % n) - at(i) * 2.0 + at((i + n - 1) % n)) * ih2;
    }
    if (i == 0) return (at(0) * 2.0 - at(1) * 5.0 + at(2) * 4.0 - at(3)) * ih2;
    if (i == n - 1)
        return (at(n - 1) * 2.0 - at(n - 2) * 5.0 + at(n - 3) * 4.0 - at(n - 4)) * ih2;
    return (at(i + 1) - at(i) * 2.0 + at(i - 1)) * ih2;
}

template <class T>
std::vector<T> derivative_u(const GridShape& g, const std::vector<T>& data) {
    std::vector<T> out(data.size());
    for (std::size_t iv = 0; iv < g.nv; ++iv) {
        auto at = [&](std::size_t iu) -> const T& { return data[g.index(iu, iv)]; };
        for (std::size_t iu = 0; iu < g.nu; ++iu)
            out[g.index(iu, iv)] = d1<T>(at, g.nu, g.hu, g.periodic_u, iu);
    }
    return out;
}

template <class T>
std::vector<T> derivative_v(const GridShape& g, const std::vector<T>& data) {
    std::vector<T> out(data.size());
    for (std::size_t iu = 0; iu < g.nu; ++iu) {
        auto at = [&](std::size_t iv) -> const T& { return data[g.index(iu, iv)]; };
        for (std::size_t iv = 0; iv < g.nv; ++iv)
            out[g.index(iu, iv)] = d1<T>(at, g.nv, g.hv, false, iv);
    }
    return out;
}

template <class T>
std::vector<T> second_derivative_u(const GridShape& g, const std::vector<T>& data) {
    std::vector<T> out(data.size());
    for (std::size_t iv = 0; iv < g.nv; ++iv) {
        auto at = [&](std::size_t iu) -> const T& { return data[g.index(iu, iv)]; };
        for (std::size_t iu = 0; iu < g.nu; ++iu)
            out[g.index(iu, iv)] = d2<T>(at, g.nu, g.hu, g.periodic_u, iu);
    }
    return out;
}

template <class T>
std::vector<T> second_derivative_v(const GridShape& g, const std::vector<T>& data) {
    std::vector<T> out(data.size());
    for (std::size_t iu = 0; iu < g.nu; ++iu) {
        auto at = [&](std::size_t iv) -> const T& { return data[g.index(iu, iv)]; };
        for (std::size_t iv = 0; iv < g.nv; ++iv)
            out[g.index(iu, iv)] = d2<T>(at, g.nv, g.hv, false, iv);
    }
    return out;
}

void validate_grid(const GridShape& g) {
    const std::size_t min_u = g.periodic_u ? 4 : 4;
    if (g.nu < min_u || g.nv < 4)
        throw DomainError("patch grid needs at least 4 nodes per axis");
    if (g.hu <= 0.0 || g.hv <= 0.0) throw DomainError("grid spacings must be positive");
}

// 2x2 projection blocks of the tangent frame onto the plane basis of
// P_alpha and its J-image.
struct GraphBlocks {
    Mat2 onto_plane;    // rows: (E1, E2), columns: (F_u, F_v)
    Mat2 onto_j_plane;  // rows: (J E1, J E2)
};

GraphBlocks graph_blocks(const AmbientVector& fu, const AmbientVector& fv, double alpha) {
    const AmbientVector E1 = ambient::e1();
    const AmbientVector E2{0.0, 0.0, std::cos(alpha), std::sin(alpha)};
    const AmbientVector JE1 = ambient::apply_J(E1);
    const AmbientVector JE2 = ambient::apply_J(E2);
    return {{dot(fu, E1), dot(fv, E1), dot(fu, E2), dot(fv, E2)},
            {dot(fu, JE1), dot(fv, JE1), dot(fu, JE2), dot(fv, JE2)}};
}

}  // namespace

SurfacePatch make_patch(const GridShape& grid,
                        const std::function<AmbientVector(double, double)>& position,
                        std::string tag,
                        const std::function<AmbientVector(double, double)>* du,
                        const std::function<AmbientVector(double, double)>* dv) {
    validate_grid(grid);
    SurfacePatch p;
    p.grid = grid;
    p.tag = std::move(tag);
    p.pos.resize(grid.count());
    if (du && dv) {
        p.tangent_u.resize(grid.count());
        p.tangent_v.resize(grid.count());
    }
    for (std::size_t iu = 0; iu < grid.nu; ++iu) {
        for (std::size_t iv = 0; iv < grid.nv; ++iv) {
            const double u = grid.u(iu), v = grid.v(iv);
            const std::size_t k = grid.index(iu, iv);
            p.pos[k] = position(u, v);
            if (du && dv) {
                p.tangent_u[k] = (*du)(u, v);
                p.tangent_v[k] = (*dv)(u, v);
            }
        }
    }
    return p;
}

PatchGeometry compute_geometry(const SurfacePatch& p) {
    validate_grid(p.grid);
    const GridShape& g = p.grid;
    PatchGeometry geo;
    geo.fu.v = derivative_u(g, p.pos);
    geo.fv.v = derivative_v(g, p.pos);
    const std::size_t n = g.count();
    geo.E.resize(n);
    geo.F.resize(n);
    geo.G.resize(n);
    geo.det_g.resize(n);
    geo.sqrt_g.resize(n);
    geo.inv_uu.resize(n);
    geo.inv_uv.resize(n);
    geo.inv_vv.resize(n);
    geo.frame.resize(n);
    for (std::size_t iu = 0; iu < g.nu; ++iu) {
        for (std::size_t iv = 0; iv < g.nv; ++iv) {
            const std::size_t k = g.index(iu, iv);
            const AmbientVector& fu = geo.fu[k];
            const AmbientVector& fv = geo.fv[k];
            const double E = dot(fu, fu), F = dot(fu, fv), G = dot(fv, fv);
            const double det = E * G - F * F;
            if (!(det >= 1e-10)) throw SingularMetricError(iu, iv, det);
            geo.E[k] = E;
            geo.F[k] = F;
            geo.G[k] = G;
            geo.det_g[k] = det;
            geo.sqrt_g[k] = std::sqrt(det);
            geo.inv_uu[k] = G / det;
            geo.inv_uv[k] = -F / det;
            geo.inv_vv[k] = E / det;
            geo.frame[k] = ambient::orthonormalized({fu, fv});
        }
    }
    return geo;
}

ScalarField coordinate_field(const SurfacePatch& p, int axis) {
    static const char* names[4] = {"x1", "y1", "x2", "y2"};
    ScalarField f{names[axis], std::vector<double>(p.pos.size())};
    for (std::size_t k = 0; k < p.pos.size(); ++k) f.v[k] = p.pos[k][axis];
    return f;
}

ScalarField radius_field(const SurfacePatch& p) {
    ScalarField f{"r", std::vector<double>(p.pos.size())};
    for (std::size_t k = 0; k < p.pos.size(); ++k) f.v[k] = norm(p.pos[k]);
    return f;
}

ScalarField map_field(const SurfacePatch& p, std::string name,
                      const std::function<double(const AmbientVector&)>& f) {
    ScalarField out{std::move(name), std::vector<double>(p.pos.size())};
    for (std::size_t k = 0; k < p.pos.size(); ++k) out.v[k] = f(p.pos[k]);
    return out;
}

double integrate(const SurfacePatch& p, const PatchGeometry& g, const ScalarField& f) {
    // trapezoid weights: interior 1, edges 1/2, corners 1/4 (periodic u: all 1)
    const GridShape& gr = p.grid;
    double total = 0.0;
    for (std::size_t iu = 0; iu < gr.nu; ++iu) {
        for (std::size_t iv = 0; iv < gr.nv; ++iv) {
            double w = 1.0;
            if (!gr.periodic_u && (iu == 0 || iu == gr.nu - 1)) w *= 0.5;
            if (iv == 0 || iv == gr.nv - 1) w *= 0.5;
            const std::size_t k = gr.index(iu, iv);
            total += w * f.v[k] * g.sqrt_g[k];
        }
    }
    return total * gr.hu * gr.hv;
}

double patch_area(const SurfacePatch& p, const PatchGeometry& g) {
    ScalarField one{"1", std::vector<double>(p.pos.size(), 1.0)};
    return integrate(p, g, one);
}

bool is_interior_node(const GridShape& g, std::size_t iu, std::size_t iv, std::size_t band) {
    const bool u_ok = g.periodic_u || (iu >= band && iu + band < g.nu);
    const bool v_ok = iv >= band && iv + band < g.nv;
    return u_ok && v_ok;
}

FieldStats max_abs_stats(const SurfacePatch& p, const ScalarField& f, std::size_t band) {
    FieldStats s;
    for (std::size_t iu = 0; iu < p.grid.nu; ++iu)
        for (std::size_t iv = 0; iv < p.grid.nv; ++iv) {
            const double a = std::abs(f.v[p.grid.index(iu, iv)]);
            if (is_interior_node(p.grid, iu, iv, band))
                s.max_interior = std::max(s.max_interior, a);
            else
                s.max_boundary = std::max(s.max_boundary, a);
        }
    return s;
}

VectorField mean_curvature(const SurfacePatch& p) {
    return mean_curvature(p, compute_geometry(p));
}

VectorField mean_curvature(const SurfacePatch& p, const PatchGeometry& g) {
    const GridShape& gr = p.grid;
    const auto fuu = second_derivative_u(gr, p.pos);
    const auto fvv = second_derivative_v(gr, p.pos);
    const auto fuv = derivative_v(gr, g.fu.v);
    VectorField H;
    H.v.resize(gr.count());
    for (std::size_t k = 0; k < gr.count(); ++k) {
        const AmbientVector raw = g.inv_uu[k] * fuu[k] + 2.0 * g.inv_uv[k] * fuv[k] +
                                  g.inv_vv[k] * fvv[k];
        H.v[k] = ambient::normal_part(raw, g.frame[k]);
    }
    return H;
}

VectorField normal_projection_field(const SurfacePatch& p, const PatchGeometry& g,
                                    const AmbientVector& dir) {
    VectorField out;
    out.v.resize(p.grid.count());
    for (std::size_t k = 0; k < p.grid.count(); ++k)
        out.v[k] = ambient::normal_part(dir, g.frame[k]);
    return out;
}

VectorField position_normal_field(const SurfacePatch& p, const PatchGeometry& g) {
    VectorField out;
    out.v.resize(p.grid.count());
    for (std::size_t k = 0; k < p.grid.count(); ++k)
        out.v[k] = ambient::normal_part(p.pos[k], g.frame[k]);
    return out;
}

ScalarField lagrangian_angle(const SurfacePatch& p) {
    return lagrangian_angle(p, compute_geometry(p));
}

ScalarField lagrangian_angle(const SurfacePatch& p, const PatchGeometry& g) {
    const GridShape& gr = p.grid;
    std::vector<double> raw(gr.count());
    for (std::size_t k = 0; k < gr.count(); ++k) {
        const auto omega = ambient::holomorphic_volume({g.fu[k], g.fv[k]});
        raw[k] = std::arg(omega);
    }

    ScalarField theta{"theta", std::vector<double>(gr.count(), 0.0)};
    std::vector<char> seen(gr.count(), 0);
    std::deque<std::pair<std::size_t, std::size_t>> queue;
    theta.v[0] = raw[0];  // branch anchor: theta(origin node) in (-pi, pi]
    seen[0] = 1;
    queue.emplace_back(0, 0);
    const double two_pi = 2.0 * kPi;
    while (!queue.empty()) {
        const auto [iu, iv] = queue.front();
        queue.pop_front();
        const std::size_t k = gr.index(iu, iv);
        auto visit = [&](std::size_t ju, std::size_t jv) {
            const std::size_t j = gr.index(ju, jv);
            if (seen[j]) return;
            const double branch = std::round((theta.v[k] - raw[j]) / two_pi);
            const double candidate = raw[j] + two_pi * branch;
            if (std::abs(candidate - theta.v[k]) > kPi / 2.0)
                throw UnwrapError("Lagrangian angle jump above pi/2 between nodes (" +
                                  std::to_string(iu) + "," + std::to_string(iv) + ") and (" +
                                  std::to_string(ju) + "," + std::to_string(jv) + ")");
            theta.v[j] = candidate;
            seen[j] = 1;
            queue.emplace_back(ju, jv);
        };
        if (iu + 1 < gr.nu) visit(iu + 1, iv);
        else if (gr.periodic_u) visit(0, iv);
        if (iu > 0) visit(iu - 1, iv);
        else if (gr.periodic_u) visit(gr.nu - 1, iv);
        if (iv + 1 < gr.nv) visit(iu, iv + 1);
        if (iv > 0) visit(iu, iv - 1);
    }
    return theta;
}

VectorField intrinsic_gradient(const SurfacePatch& p, const PatchGeometry& g,
                               const ScalarField& f) {
    const GridShape& gr = p.grid;
    const auto fu = derivative_u(gr, f.v);
    const auto fv = derivative_v(gr, f.v);
    VectorField out;
    out.v.resize(gr.count());
    for (std::size_t k = 0; k < gr.count(); ++k) {
        const double cu = g.inv_uu[k] * fu[k] + g.inv_uv[k] * fv[k];
        const double cv = g.inv_uv[k] * fu[k] + g.inv_vv[k] * fv[k];
        out.v[k] = cu * g.fu[k] + cv * g.fv[k];
    }
    return out;
}

ScalarField laplace_beltrami(const SurfacePatch& p, const PatchGeometry& g,
                             const ScalarField& f) {
    // conservative form: sqrt(g) Delta f = d_u(A_uu f_u + A_uv f_v)
    //                                    + d_v(A_uv f_u + A_vv f_v),
    // diagonal terms as compact half-node fluxes, off-diagonal terms and
    // non-periodic boundary nodes through the expanded one-sided stencils
    const GridShape& gr = p.grid;
    const std::size_t n = gr.count();
    const auto fu = derivative_u(gr, f.v);
    const auto fv = derivative_v(gr, f.v);

    std::vector<double> auu(n), auv(n), avv(n);
    for (std::size_t k = 0; k < n; ++k) {
        auu[k] = g.sqrt_g[k] * g.inv_uu[k];
        auv[k] = g.sqrt_g[k] * g.inv_uv[k];
        avv[k] = g.sqrt_g[k] * g.inv_vv[k];
    }

    std::vector<double> pu(n), qv(n);  // A_uv f_v and A_uv f_u
    for (std::size_t k = 0; k < n; ++k) {
        pu[k] = auv[k] * fv[k];
        qv[k] = auv[k] * fu[k];
    }
    const auto dpu = derivative_u(gr, pu);
    const auto dqv = derivative_v(gr, qv);
    const auto fuu = second_derivative_u(gr, f.v);
    const auto fvv = second_derivative_v(gr, f.v);
    const auto dauu = derivative_u(gr, auu);
    const auto davv = derivative_v(gr, avv);

    ScalarField out{"laplace_" + f.name, std::vector<double>(n)};
    const double ihu2 = 1.0 / (gr.hu * gr.hu);
    const double ihv2 = 1.0 / (gr.hv * gr.hv);
    for (std::size_t iu = 0; iu < gr.nu; ++iu) {
        const bool u_inner = gr.periodic_u || (iu > 0 && iu + 1 < gr.nu);
        for (std::size_t iv = 0; iv < gr.nv; ++iv) {
            const bool v_inner = iv > 0 && iv + 1 < gr.nv;
            const std::size_t k = gr.index(iu, iv);
            double total = dpu[k] + dqv[k];
            if (u_inner) {
                const std::size_t kp = gr.index((iu + 1) % gr.nu, iv);
                const std::size_t km = gr.index((iu + gr.nu - 1) % gr.nu, iv);
                total += ihu2 * (0.5 * (auu[k] + auu[kp]) * (f.v[kp] - f.v[k]) -
                                 0.5 * (auu[km] + auu[k]) * (f.v[k] - f.v[km]));
            } else {
                total += auu[k] * fuu[k] + dauu[k] * fu[k];
            }
            if (v_inner) {
                const std::size_t kp = gr.index(iu, iv + 1);
                const std::size_t km = gr.index(iu, iv - 1);
                total += ihv2 * (0.5 * (avv[k] + avv[kp]) * (f.v[kp] - f.v[k]) -
                                 0.5 * (avv[km] + avv[k]) * (f.v[k] - f.v[km]));
            } else {
                total += avv[k] * fvv[k] + davv[k] * fv[k];
            }
            out.v[k] = total / g.sqrt_g[k];
        }
    }
    return out;
}

std::vector<std::array<double, 2>> second_fundamental_eigen(const SurfacePatch& p,
                                                            double alpha) {
    const auto g = compute_geometry(p);
    std::vector<std::array<double, 2>> out(p.grid.count());
    for (std::size_t iu = 0; iu < p.grid.nu; ++iu) {
        for (std::size_t iv = 0; iv < p.grid.nv; ++iv) {
            const std::size_t k = p.grid.index(iu, iv);
            const auto blocks = graph_blocks(g.fu[k], g.fv[k], alpha);
            const double scale = std::sqrt(norm_sq(g.fu[k]) * norm_sq(g.fv[k]));
            if (std::abs(blocks.onto_plane.det()) < 1e-8 * scale)
                throw NotGraphicalError("projection onto the reference plane degenerate at node (" +
                                        std::to_string(iu) + "," + std::to_string(iv) + ")");
            const Mat2 hess = mul(blocks.onto_j_plane, linalg::inverse(blocks.onto_plane));
            const double sym_b = 0.5 * (hess.b + hess.c);
            out[k] = linalg::sym_eigenvalues(hess.a, sym_b, hess.d);
        }
    }
    return out;
}

double BoundaryLoop::length() const {
    return std::accumulate(seg_length.begin(), seg_length.end(), 0.0);
}

double BoundaryLoop::max_radius() const {
    double m = 0.0;
    for (const auto& x : nodes) m = std::max(m, norm(x));
    return m;
}

namespace {

// Conormal for the segment a->b: project `out_dir` (a surface-tangent
// vector) orthogonal to the chord, normalize.
AmbientVector segment_conormal(const AmbientVector& a, const AmbientVector& b,
                               const AmbientVector& out_dir) {
    AmbientVector t = b - a;
    const double tl = norm(t);
    if (tl > 0) t *= 1.0 / tl;
    AmbientVector nu = out_dir - dot(out_dir, t) * t;
    const double nl = norm(nu);
    if (nl > 1e-14) nu *= 1.0 / nl;
    return nu;
}

void finalize_loop(BoundaryLoop& loop) {
    const std::size_t nseg = loop.closed ? loop.nodes.size() : loop.nodes.size() - 1;
    loop.seg_length.resize(nseg);
    for (std::size_t i = 0; i < nseg; ++i)
        loop.seg_length[i] = norm(loop.nodes[(i + 1) % loop.nodes.size()] - loop.nodes[i]);
}

}  // namespace

BoundaryLoop make_rect_loop(const SurfacePatch& p, const PatchGeometry& g,
                            std::size_t iu0, std::size_t iu1,
                            std::size_t iv0, std::size_t iv1, bool outward) {
    if (iu1 <= iu0 + 1 || iv1 <= iv0 + 1 || iu1 >= p.grid.nu || iv1 >= p.grid.nv)
        throw DomainError("rectangle loop indices out of range");
    const double sign = outward ? 1.0 : -1.0;
    BoundaryLoop loop;
    loop.closed = true;

    struct Step {
        std::size_t iu, iv;
        AmbientVector out_dir;
    };
    std::vector<Step> steps;
    for (std::size_t iu = iu0; iu < iu1; ++iu)  // bottom: outward -fv
        steps.push_back({iu, iv0, -1.0 * g.fv[p.grid.index(iu, iv0)]});
    for (std::size_t iv = iv0; iv < iv1; ++iv)  // right: outward +fu
        steps.push_back({iu1, iv, g.fu[p.grid.index(iu1, iv)]});
    for (std::size_t iu = iu1; iu > iu0; --iu)  // top: outward +fv
        steps.push_back({iu, iv1, g.fv[p.grid.index(iu, iv1)]});
    for (std::size_t iv = iv1; iv > iv0; --iv)  // left: outward -fu
        steps.push_back({iu0, iv, -1.0 * g.fu[p.grid.index(iu0, iv)]});

    loop.nodes.reserve(steps.size());
    for (const auto& s : steps) loop.nodes.push_back(p.at(s.iu, s.iv));
    finalize_loop(loop);
    loop.conormal.resize(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& a = loop.nodes[i];
        const auto& b = loop.nodes[(i + 1) % loop.nodes.size()];
        const AmbientVector out_dir =
            0.5 * (steps[i].out_dir + steps[(i + 1) % steps.size()].out_dir);
        loop.conormal[i] = sign * segment_conormal(a, b, out_dir);
    }
    return loop;
}

BoundaryLoop make_periodic_u_loop(const SurfacePatch& p, const PatchGeometry& g,
                                  std::size_t iv, bool outward) {
    if (!p.grid.periodic_u) throw TopologyError("patch is not periodic in u");
    const double sign = outward ? 1.0 : -1.0;
    BoundaryLoop loop;
    loop.closed = true;
    loop.nodes.reserve(p.grid.nu);
    for (std::size_t iu = 0; iu < p.grid.nu; ++iu) loop.nodes.push_back(p.at(iu, iv));
    finalize_loop(loop);
    loop.conormal.resize(p.grid.nu);
    for (std::size_t iu = 0; iu < p.grid.nu; ++iu) {
        const auto& a = loop.nodes[iu];
        const auto& b = loop.nodes[(iu + 1) % p.grid.nu];
        const AmbientVector out_dir = 0.5 * (g.fv[p.grid.index(iu, iv)] +
                                             g.fv[p.grid.index((iu + 1) % p.grid.nu, iv)]);
        loop.conormal[iu] = sign * segment_conormal(a, b, out_dir);
    }
    return loop;
}

double flux_integral(const BoundaryLoop& loop, const AmbientVector& direction) {
    if (!loop.closed)
        throw TopologyError("flux integral requires a closed loop");
    double total = 0.0;
    for (std::size_t i = 0; i < loop.seg_length.size(); ++i)
        total += dot(loop.conormal[i], direction) * loop.seg_length[i];
    return total;
}

// ---- marching squares ----

namespace {

// Grid-edge id: (iu, iv, along_u?).  Crossing points live on grid edges.
struct EdgeId {
    std::size_t iu, iv;
    bool along_u;
    bool operator<(const EdgeId& o) const {
        return std::tie(iu, iv, along_u) < std::tie(o.iu, o.iv, o.along_u);
    }
};

struct Crossing {
    AmbientVector pos;
    AmbientVector grad;  // interpolated intrinsic gradient (for the conormal)
};

}  // namespace

LevelSetResult level_set(const SurfacePatch& p, const ScalarField& f, double a) {
    const GridShape& gr = p.grid;
    const auto geo = compute_geometry(p);
    const auto grad = intrinsic_gradient(p, geo, f);

    const auto [mn_it, mx_it] = std::minmax_element(f.v.begin(), f.v.end());
    const double range = *mx_it - *mn_it;
    // deterministic tie-break when a hits a node value exactly
    for (double fv : f.v) {
        if (fv == a) {
            a += 1e-12 * (range > 0 ? range : std::max(1.0, std::abs(a)));
            break;
        }
    }

    LevelSetResult result;
    if (a < *mn_it || a > *mx_it) return result;

    std::map<EdgeId, Crossing> crossings;
    std::map<EdgeId, std::vector<EdgeId>> links;

    auto edge_crossing = [&](EdgeId id) -> bool {
        const std::size_t k0 = gr.index(id.iu, id.iv);
        const std::size_t k1 = id.along_u ? gr.index((id.iu + 1) % gr.nu, id.iv)
                                          : gr.index(id.iu, id.iv + 1);
        const double f0 = f.v[k0], f1 = f.v[k1];
        if ((f0 < a) == (f1 < a)) return false;
        if (!crossings.count(id)) {
            const double t = (a - f0) / (f1 - f0);
            crossings[id] = {p.pos[k0] + t * (p.pos[k1] - p.pos[k0]),
                             grad[k0] + t * (grad[k1] - grad[k0])};
        }
        return true;
    };

    const std::size_t nu_cells = gr.periodic_u ? gr.nu : gr.nu - 1;
    for (std::size_t iu = 0; iu < nu_cells; ++iu) {
        for (std::size_t iv = 0; iv + 1 < gr.nv; ++iv) {
            const std::size_t ju = (iu + 1) % gr.nu;
            const EdgeId bottom{iu, iv, true};
            const EdgeId top{iu, iv + 1, true};
            const EdgeId left{iu, iv, false};
            const EdgeId right{ju, iv, false};
            std::vector<EdgeId> hit;
            for (const EdgeId& e : {bottom, right, top, left})
                if (edge_crossing(e)) hit.push_back(e);
            if (hit.size() == 2) {
                links[hit[0]].push_back(hit[1]);
                links[hit[1]].push_back(hit[0]);
            } else if (hit.size() == 4) {
                // saddle: split by the cell-average side
                const double avg = 0.25 * (f.v[gr.index(iu, iv)] + f.v[gr.index(ju, iv)] +
                                           f.v[gr.index(iu, iv + 1)] + f.v[gr.index(ju, iv + 1)]);
                const bool corner_low = f.v[gr.index(iu, iv)] < a;
                // pair (bottom,right)+(top,left) or (bottom,left)+(top,right)
                const bool pair_br = (avg < a) == corner_low;
                const EdgeId first = pair_br ? right : left;
                const EdgeId second = pair_br ? left : right;
                links[bottom].push_back(first);
                links[first].push_back(bottom);
                links[top].push_back(second);
                links[second].push_back(top);
            }
        }
    }

    // chain crossings into paths (degree-1 starts) and remaining cycles
    std::map<EdgeId, char> used;
    auto walk = [&](EdgeId start) {
        std::vector<EdgeId> chain{start};
        used[start] = 1;
        EdgeId cur = start;
        bool closed = false;
        while (true) {
            const auto& nbrs = links[cur];
            bool advanced = false;
            for (const EdgeId& nb : nbrs) {
                if (nb.iu == start.iu && nb.iv == start.iv && nb.along_u == start.along_u &&
                    chain.size() > 2) {
                    closed = true;
                    break;
                }
                if (!used.count(nb)) {
                    chain.push_back(nb);
                    used[nb] = 1;
                    cur = nb;
                    advanced = true;
                    break;
                }
            }
            if (closed || !advanced) break;
        }
        BoundaryLoop loop;
        loop.closed = closed;
        loop.nodes.reserve(chain.size());
        std::vector<AmbientVector> grads;
        grads.reserve(chain.size());
        for (const EdgeId& e : chain) {
            loop.nodes.push_back(crossings[e].pos);
            grads.push_back(crossings[e].grad);
        }
        if (loop.nodes.size() < 2) return;
        finalize_loop(loop);
        const std::size_t nseg = loop.seg_length.size();
        loop.conormal.resize(nseg);
        for (std::size_t i = 0; i < nseg; ++i) {
            AmbientVector gmid = 0.5 * (grads[i] + grads[(i + 1) % grads.size()]);
            const double gl = norm(gmid);
            if (gl > 1e-14) gmid *= 1.0 / gl;
            const auto& x0 = loop.nodes[i];
            const auto& x1 = loop.nodes[(i + 1) % loop.nodes.size()];
            loop.conormal[i] = segment_conormal(x0, x1, gmid);
        }
        result.total_length += loop.length();
        result.max_radius = std::max(result.max_radius, loop.max_radius());
        result.curves.push_back(std::move(loop));
    };

    for (const auto& [id, nbrs] : links)
        if (nbrs.size() == 1 && !used.count(id)) walk(id);
    for (const auto& [id, nbrs] : links)
        if (!used.count(id)) walk(id);
    return result;
}

// ---- covering decomposition ----

ScalarField star_omega_alpha(const SurfacePatch& p, const PatchGeometry& g, double alpha) {
    const AmbientVector E1 = ambient::e1();
    const AmbientVector E2{0.0, 0.0, std::cos(alpha), std::sin(alpha)};
    ScalarField out{"star_omega", std::vector<double>(p.grid.count())};
    for (std::size_t k = 0; k < p.grid.count(); ++k) {
        const TwoFrame& fr = g.frame[k];
        out.v[k] = dot(fr.a, E1) * dot(fr.b, E2) - dot(fr.a, E2) * dot(fr.b, E1);
    }
    return out;
}

DecompositionReport graphical_decomposition(const PatchSet& patches, double alpha,
                                            double R, double eps, int samples) {
    DecompositionOptions opts;
    opts.eps = eps;
    opts.samples = samples;
    return graphical_decomposition(patches, alpha, R, opts);
}

DecompositionReport graphical_decomposition(const PatchSet& patches, double alpha,
                                            double R, const DecompositionOptions& opts) {
    const double eps = opts.eps;
    const int samples = opts.samples;
    const AmbientVector E1 = ambient::e1();
    const AmbientVector E2{0.0, 0.0, std::cos(alpha), std::sin(alpha)};
    DecompositionReport report;

    for (const auto& p : patches) {
        const auto g = compute_geometry(p);
        const auto star = star_omega_alpha(p, g, alpha);
        const GridShape& gr = p.grid;

        std::vector<char> member(gr.count(), 0);
        for (std::size_t k = 0; k < gr.count(); ++k) {
            const double pu = dot(p.pos[k], E1), pv = dot(p.pos[k], E2);
            member[k] = std::abs(star.v[k]) >= eps && std::hypot(pu, pv) > R;
        }

        // grid components over member nodes
        std::vector<int> comp(gr.count(), -1);
        int n_comp = 0;
        for (std::size_t seed = 0; seed < gr.count(); ++seed) {
            if (!member[seed] || comp[seed] >= 0) continue;
            const int id = n_comp++;
            std::deque<std::size_t> queue{seed};
            comp[seed] = id;
            while (!queue.empty()) {
                const std::size_t k = queue.front();
                queue.pop_front();
                const std::size_t iu = k / gr.nv, iv = k % gr.nv;
                auto push = [&](std::size_t ju, std::size_t jv) {
                    const std::size_t j = gr.index(ju, jv);
                    if (member[j] && comp[j] < 0) {
                        comp[j] = id;
                        queue.push_back(j);
                    }
                };
                if (iu + 1 < gr.nu) push(iu + 1, iv);
                else if (gr.periodic_u) push(0, iv);
                if (iu > 0) push(iu - 1, iv);
                else if (gr.periodic_u) push(gr.nu - 1, iv);
                if (iv + 1 < gr.nv) push(iu, iv + 1);
                if (iv > 0) push(iu, iv - 1);
            }
        }

        for (int id = 0; id < n_comp; ++id) {
            DecompositionComponent out;
            out.plane_angle = alpha;
            out.radius = R;

            double sin_sum = 0.0, cos_sum = 0.0;
            for (std::size_t k = 0; k < gr.count(); ++k) {
                if (comp[k] != id) continue;
                ++out.node_count;
                const auto omega = ambient::holomorphic_volume({g.fu[k], g.fv[k]});
                sin_sum += std::imag(omega) / std::abs(omega);
                cos_sum += std::real(omega) / std::abs(omega);
                const auto blocks = graph_blocks(g.fu[k], g.fv[k], alpha);
                if (std::abs(blocks.onto_plane.det()) > 1e-14) {
                    const Mat2 d = mul(blocks.onto_j_plane, linalg::inverse(blocks.onto_plane));
                    out.derivative_bound =
                        std::max(out.derivative_bound, linalg::singular_values(d)[0]);
                }
            }
            out.mean_angle = std::atan2(sin_sum, cos_sum);

            // preimage count of each sample point over full member cells
            const double r_samp = 1.3 * R;
            std::vector<int> counts(samples, 0);
            const std::size_t nu_cells = gr.periodic_u ? gr.nu : gr.nu - 1;
            for (std::size_t iu = 0; iu < nu_cells; ++iu) {
                for (std::size_t iv = 0; iv + 1 < gr.nv; ++iv) {
                    const std::size_t ju = (iu + 1) % gr.nu;
                    const std::size_t k00 = gr.index(iu, iv), k10 = gr.index(ju, iv);
                    const std::size_t k11 = gr.index(ju, iv + 1), k01 = gr.index(iu, iv + 1);
                    if (comp[k00] != id || comp[k10] != id || comp[k11] != id || comp[k01] != id)
                        continue;
                    auto proj = [&](std::size_t k) {
                        return std::array<double, 2>{dot(p.pos[k], E1), dot(p.pos[k], E2)};
                    };
                    const auto q00 = proj(k00), q10 = proj(k10), q11 = proj(k11), q01 = proj(k01);
                    auto in_tri = [](const std::array<double, 2>& a, const std::array<double, 2>& b,
                                     const std::array<double, 2>& c, double px, double py) {
                        auto cross = [&](const std::array<double, 2>& s, const std::array<double, 2>& t) {
                            return (t[0] - s[0]) * (py - s[1]) - (t[1] - s[1]) * (px - s[0]);
                        };
                        const double c1 = cross(a, b), c2 = cross(b, c), c3 = cross(c, a);
                        return (c1 >= 0 && c2 >= 0 && c3 >= 0) || (c1 <= 0 && c2 <= 0 && c3 <= 0);
                    };
                    for (int s = 0; s < samples; ++s) {
                        const double ang = 2.0 * kPi * (static_cast<double>(s) + 0.37) / samples;
                        const double px = r_samp * std::cos(ang), py = r_samp * std::sin(ang);
                        if (in_tri(q00, q10, q11, px, py) || in_tri(q00, q11, q01, px, py))
                            ++counts[s];
                    }
                }
            }
            int degree = 0;
            int reached = 0;
            for (int s = 0; s < samples; ++s) {
                const double ang = 2.0 * kPi * (static_cast<double>(s) + 0.37) / samples;
                if (counts[s] == 0 && opts.allow_uncovered_samples) continue;
                if (degree == 0) degree = counts[s];
                if (counts[s] != degree)
                    throw NotACoveringError(
                        "preimage count not constant: " + std::to_string(degree) + " vs " +
                        std::to_string(counts[s]) + " at sample angle " + std::to_string(ang));
            }
            for (int s = 0; s < samples; ++s) reached += counts[s] > 0;
            if (degree == 0)
                throw NotACoveringError("component reaches none of the sample points");
            out.covering_degree = degree;
            out.sample_coverage = static_cast<double>(reached) / samples;
            report.components.push_back(out);
        }
    }
    return report;
}

// ---- Liouville form ----

namespace {

double edge_lambda(const AmbientVector& a, const AmbientVector& b) {
    const AmbientVector d = b - a;
    return 0.5 * (ambient::liouville_form(a, d) + ambient::liouville_form(b, d));
}

}  // namespace

LiouvillePrimitive liouville_primitive(const SurfacePatch& p) {
    const GridShape& gr = p.grid;
    validate_grid(gr);
    LiouvillePrimitive out;
    out.beta = ScalarField{"beta", std::vector<double>(gr.count(), 0.0)};

    std::vector<char> seen(gr.count(), 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        const std::size_t iu = k / gr.nv, iv = k % gr.nv;
        auto visit = [&](std::size_t ju, std::size_t jv) {
            const std::size_t j = gr.index(ju, jv);
            if (seen[j]) return;
            out.beta.v[j] = out.beta.v[k] + edge_lambda(p.pos[k], p.pos[j]);
            seen[j] = 1;
            queue.push_back(j);
        };
        if (iu + 1 < gr.nu) visit(iu + 1, iv);
        else if (gr.periodic_u) visit(0, iv);
        if (iu > 0) visit(iu - 1, iv);
        else if (gr.periodic_u) visit(gr.nu - 1, iv);
        if (iv + 1 < gr.nv) visit(iu, iv + 1);
        if (iv > 0) visit(iu, iv - 1);
    }

    const auto geo = compute_geometry(p);
    if (gr.periodic_u) {
        for (std::size_t iv : {std::size_t{0}, gr.nv / 2, gr.nv - 1}) {
            double h = 0.0, len = 0.0;
            for (std::size_t iu = 0; iu < gr.nu; ++iu) {
                const auto& a = p.at(iu, iv);
                const auto& b = p.at((iu + 1) % gr.nu, iv);
                h += edge_lambda(a, b);
                len += norm(b - a);
            }
            out.holonomy.cycle_holonomies.push_back(h);
            if (iv == gr.nv / 2) out.holonomy.cycle_length = len;
        }
        const std::size_t half = gr.nu / 2;
        out.holonomy.max_rect_circulation =
            std::abs(loop_circulation(p, geo, 0, half, 0, gr.nv - 1));
        BoundaryLoop rect = make_rect_loop(p, geo, 0, half, 0, gr.nv - 1);
        out.holonomy.rect_length = rect.length();
    } else {
        out.holonomy.max_rect_circulation =
            std::abs(loop_circulation(p, geo, 0, gr.nu - 1, 0, gr.nv - 1));
        BoundaryLoop rect = make_rect_loop(p, geo, 0, gr.nu - 1, 0, gr.nv - 1);
        out.holonomy.rect_length = rect.length();
    }
    return out;
}

double loop_circulation(const SurfacePatch& p, const PatchGeometry& g,
                        std::size_t iu0, std::size_t iu1,
                        std::size_t iv0, std::size_t iv1) {
    const bool analytic = p.has_analytic_tangents();
    const auto& tu = analytic ? p.tangent_u : g.fu.v;
    const auto& tv = analytic ? p.tangent_v : g.fv.v;

    // end-corrected trapezoid in the index parameter (integrand = lambda
    // pulled back along the edge, values at nodes)
    auto edge_integral = [&](auto&& node_at, auto&& tangent_at, std::size_t count) {
        std::vector<double> f(count);
        for (std::size_t k = 0; k < count; ++k)
            f[k] = ambient::liouville_form(node_at(k), tangent_at(k));
        double total = 0.5 * (f[0] + f[count - 1]);
        for (std::size_t k = 1; k + 1 < count; ++k) total += f[k];
        const double d0 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / 2.0;
        const double d1 = (3.0 * f[count - 1] - 4.0 * f[count - 2] + f[count - 3]) / 2.0;
        return total - (d1 - d0) / 12.0;
    };

    double total = 0.0;
    // bottom: iu0 -> iu1 at iv0
    total += edge_integral(
        [&](std::size_t k) { return p.at(iu0 + k, iv0); },
        [&](std::size_t k) { return p.grid.hu * tu[p.grid.index(iu0 + k, iv0)]; },
        iu1 - iu0 + 1);
    // right: iv0 -> iv1 at iu1
    total += edge_integral(
        [&](std::size_t k) { return p.at(iu1, iv0 + k); },
        [&](std::size_t k) { return p.grid.hv * tv[p.grid.index(iu1, iv0 + k)]; },
        iv1 - iv0 + 1);
    // top: iu1 -> iu0 at iv1
    total += edge_integral(
        [&](std::size_t k) { return p.at(iu1 - k, iv1); },
        [&](std::size_t k) { return -p.grid.hu * tu[p.grid.index(iu1 - k, iv1)]; },
        iu1 - iu0 + 1);
    // left: iv1 -> iv0 at iu0
    total += edge_integral(
        [&](std::size_t k) { return p.at(iu0, iv1 - k); },
        [&](std::size_t k) { return -p.grid.hv * tv[p.grid.index(iu0, iv1 - k)]; },
        iv1 - iv0 + 1);
    return total;
}

double lagrangian_residual(const SurfacePatch& p, bool use_analytic) {
    double worst = 0.0;
    if (use_analytic && p.has_analytic_tangents()) {
        for (std::size_t k = 0; k < p.grid.count(); ++k)
            worst = std::max(worst,
                             std::abs(ambient::symplectic_form({p.tangent_u[k], p.tangent_v[k]})));
        return worst;
    }
    const auto g = compute_geometry(p);
    for (std::size_t k = 0; k < p.grid.count(); ++k)
        worst = std::max(worst, std::abs(ambient::symplectic_form({g.fu[k], g.fv[k]})));
    return worst;
}

}  // namespace lmcf::surface
