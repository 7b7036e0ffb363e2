#include "lmcf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lmcf/linalg.hpp"

namespace lmcf::diag {

namespace {

constexpr double kPi = 3.14159265358979323846;

double tau_of(double T, double t) {
    if (!(t < T)) throw DomainError("heat kernel requires t < T");
    return T - t;
}

// min |pos - x0| over the non-periodic boundary nodes of a patch
double rim_distance(const SurfacePatch& p, const AmbientVector& x0) {
    const auto& g = p.grid;
    double best = std::numeric_limits<double>::infinity();
    auto look = [&](std::size_t iu, std::size_t iv) {
        best = std::min(best, norm(p.at(iu, iv) - x0));
    };
    for (std::size_t iu = 0; iu < g.nu; ++iu) {
        look(iu, 0);
        look(iu, g.nv - 1);
    }
    if (!g.periodic_u) {
        for (std::size_t iv = 0; iv < g.nv; ++iv) {
            look(0, iv);
            look(g.nu - 1, iv);
        }
    }
    return best;
}

}  // namespace

double heat_kernel(const AmbientVector& x0, double T, const AmbientVector& x, double t) {
    const double tau = tau_of(T, t);
    return std::exp(-norm_sq(x - x0) / (4.0 * tau)) / (4.0 * kPi * tau);
}

DensityReport gaussian_density(const PatchSet& patches, const AmbientVector& x0,
                               double T, double t, const DensityOptions& opts) {
    const double tau = tau_of(T, t);
    DensityReport report;
    report.center = x0;
    report.tau = tau;

    double covered = std::numeric_limits<double>::infinity();
    for (const auto& p : patches) {
        const auto geo = surface::compute_geometry(p);
        const auto phi = surface::map_field(
            p, "phi", [&](const AmbientVector& x) { return heat_kernel(x0, T, x, t); });
        report.value += surface::integrate(p, geo, phi);
        covered = std::min(covered, rim_distance(p, x0));
    }
    if (patches.empty()) covered = 0.0;

    const double r_sig = std::sqrt(4.0 * tau * std::log(1.0 / opts.truncation_tol));
    report.truncation_radius = covered;
    report.truncated = covered < r_sig;

    // tail of C1 r^2 area growth beyond R = covered + |x0| around the origin:
    // integral_R^inf 2 C1 r Phi(r - d0) dr in closed form
    const double d0 = norm(x0);
    const double R = covered + d0;
    const double u = (R - d0) / (2.0 * std::sqrt(tau));
    report.tail_bound = opts.area_growth / (2.0 * kPi * tau) *
                        (2.0 * tau * std::exp(-u * u) +
                         d0 * std::sqrt(kPi * tau) * std::erfc(u));
    return report;
}

std::vector<DensityReport> density_series(const solitons::SolitonFamily& f,
                                          const AmbientVector& x0, double T,
                                          const std::vector<double>& times, double h,
                                          const DensityOptions& opts) {
    std::vector<DensityReport> out;
    out.reserve(times.size());
    for (double t : times) {
        const double tau = tau_of(T, t);
        const double r_sig = std::sqrt(4.0 * tau * std::log(1.0 / opts.truncation_tol));
        const auto patches = f.patches_covering(r_sig + norm(x0) + 1.0, t, h);
        out.push_back(gaussian_density(patches, x0, T, t, opts));
    }
    return out;
}

PatchSet blow_down(const solitons::SolitonFamily& f, double lambda, double s,
                   double window_radius, double h_target) {
    return f.scaled(lambda).patches_covering(window_radius, s, h_target);
}

PlaneConfiguration detect_planes(const PatchSet& patches, double R,
                                 const DetectOptions& opts) {
    struct Node {
        AmbientVector pos;
        TwoFrame frame;
        double weight;
    };
    std::vector<Node> nodes;
    for (const auto& p : patches) {
        const auto geo = surface::compute_geometry(p);
        for (std::size_t k = 0; k < p.grid.count(); ++k) {
            if (norm(p.pos[k]) > R) continue;
            nodes.push_back({p.pos[k], geo.frame[k],
                             geo.sqrt_g[k] * p.grid.hu * p.grid.hv});
        }
    }

    // greedy clustering by tangent-plane principal angle
    std::vector<TwoFrame> refs;
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        bool placed = false;
        for (std::size_t c = 0; c < refs.size(); ++c) {
            if (linalg::max_principal_angle(nodes[i].frame, refs[c]) < opts.angle_tol) {
                clusters[c].push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) {
            refs.push_back(nodes[i].frame);
            clusters.push_back({i});
        }
    }

    const double tau = R * R / 16.0;
    PlaneConfiguration config;
    for (const auto& members : clusters) {
        double density = 0.0;
        for (std::size_t i : members)
            density += nodes[i].weight *
                       std::exp(-norm_sq(nodes[i].pos) / (4.0 * tau)) / (4.0 * kPi * tau);
        const int mult = static_cast<int>(std::lround(density));
        if (std::abs(density - mult) > opts.multiplicity_band)
            throw AmbiguousMultiplicityError("cluster density " + std::to_string(density) +
                                             " not within " + std::to_string(opts.multiplicity_band) +
                                             " of an integer");
        if (mult == 0) continue;  // grid debris (e.g. neck slivers)

        // plane through the origin: top-2 eigenvectors of the second moment
        linalg::Mat4 m{};
        for (std::size_t i : members) {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    m[a][b] += nodes[i].weight * nodes[i].pos[a] * nodes[i].pos[b];
        }
        std::array<double, 4> evals;
        linalg::Mat4 evecs;
        linalg::sym_eigen4(m, evals, evecs);
        TwoFrame basis{{evecs[0][0], evecs[1][0], evecs[2][0], evecs[3][0]},
                       {evecs[0][1], evecs[1][1], evecs[2][1], evecs[3][1]}};
        basis = ambient::orthonormalized(basis);

        DetectedPlane plane;
        plane.basis = basis;
        plane.multiplicity = mult;
        plane.density = density;
        for (std::size_t i : members) {
            const AmbientVector off = ambient::normal_part(nodes[i].pos, basis);
            plane.residual = std::max(plane.residual, norm(off));
        }
        double angle = std::arg(ambient::holomorphic_volume(basis));
        if (angle < 0) angle += kPi;
        if (angle >= kPi) angle -= kPi;
        plane.angle = angle;
        config.planes.push_back(plane);
    }
    std::sort(config.planes.begin(), config.planes.end(),
              [](const DetectedPlane& a, const DetectedPlane& b) { return a.angle < b.angle; });
    if (static_cast<int>(config.planes.size()) > opts.max_planes)
        throw AmbiguousMultiplicityError("detected more than " +
                                         std::to_string(opts.max_planes) + " planes");
    return config;
}

bool same_configuration(const PlaneConfiguration& a, const PlaneConfiguration& b,
                        double angle_tol) {
    if (a.planes.size() != b.planes.size()) return false;
    for (std::size_t i = 0; i < a.planes.size(); ++i) {
        if (a.planes[i].multiplicity != b.planes[i].multiplicity) return false;
        if (std::abs(a.planes[i].angle - b.planes[i].angle) > angle_tol) return false;
    }
    return true;
}

ExpanderMeasure expander_residual(const PatchSet& patches, double s,
                                  double within_radius) {
    if (s <= 0.0) throw DomainError("expander residual needs s > 0");
    ExpanderMeasure m;
    for (const auto& p : patches) {
        const auto geo = surface::compute_geometry(p);
        const auto H = surface::mean_curvature(p, geo);
        for (std::size_t iu = 0; iu < p.grid.nu; ++iu) {
            for (std::size_t iv = 0; iv < p.grid.nv; ++iv) {
                if (!surface::is_interior_node(p.grid, iu, iv)) continue;
                const std::size_t k = p.grid.index(iu, iv);
                if (within_radius > 0 && norm(p.pos[k]) > within_radius) continue;
                const AmbientVector xperp = ambient::normal_part(p.pos[k], geo.frame[k]);
                m.max_residual = std::max(m.max_residual,
                                          norm(H[k] - (1.0 / (2.0 * s)) * xperp));
                m.sup_H = std::max(m.sup_H, norm(H[k]));
                ++m.nodes;
            }
        }
    }
    return m;
}

BlowdownProbe static_probe(const solitons::SolitonFamily& f,
                           const std::vector<double>& scales,
                           const std::vector<double>& s_values,
                           const StaticProbeOptions& opts) {
    bool has_neg = false, has_pos = false;
    for (double s : s_values) {
        has_neg |= s <= 0.0;
        has_pos |= s > 0.0;
    }
    if (!has_neg || !has_pos)
        throw DomainError("static probe needs negative and positive s values");

    BlowdownProbe probe;
    {
        const double t0 = f.kind == solitons::Kind::expander ? 0.5 : 0.0;
        const auto base = f.patches(f.default_window(opts.base_h), t0);
        probe.min_cos_theta = std::numeric_limits<double>::infinity();
        for (const auto& p : base)
            probe.min_cos_theta = std::min(probe.min_cos_theta, min_cos_theta(p));
        probe.almost_calibrated = probe.min_cos_theta > 0.0;
    }

    std::vector<double> sorted_scales = scales;
    std::sort(sorted_scales.begin(), sorted_scales.end(), std::greater<>());
    std::vector<double> sorted_s = s_values;
    std::sort(sorted_s.begin(), sorted_s.end());

    std::vector<Verdict> per_scale;
    for (double lambda : sorted_scales) {
        std::vector<BlowdownEntry> entries;
        for (double s : sorted_s) {
            BlowdownEntry entry;
            entry.lambda = lambda;
            entry.s = s;
            DetectOptions detect_opts;
            detect_opts.angle_tol =
                std::max(detect_opts.angle_tol, opts.cluster_tol_per_scale * lambda);
            if (s <= 0.0) {
                const auto patches = blow_down(f, lambda, s, 1.4 * opts.window_radius,
                                               opts.h_target);
                try {
                    entry.config = detect_planes(patches, opts.window_radius, detect_opts);
                } catch (const AmbiguousMultiplicityError&) {
                    entry.ambiguous = true;
                }
            } else {
                const double r_pos = opts.positive_window_factor * opts.window_radius;
                const auto patches = blow_down(f, lambda, s, 1.4 * r_pos, opts.h_target);
                entry.expander = expander_residual(patches, s, r_pos);
                if (entry.expander->sup_H <= opts.plane_H_tol) {
                    const auto near = blow_down(f, lambda, s, 1.4 * opts.window_radius,
                                                opts.h_target);
                    try {
                        entry.config = detect_planes(near, opts.window_radius, detect_opts);
                    } catch (const AmbiguousMultiplicityError&) {
                        entry.ambiguous = true;
                    }
                }
            }
            entries.push_back(std::move(entry));
        }

        // an s > 0 limit with nonzero mean curvature is decisive; ambiguity
        // only blocks the plane-configuration comparison
        Verdict v = Verdict::static_solution;
        bool expander_limit = false;
        bool any_ambiguous = false;
        for (const auto& e : entries) {
            expander_limit |= e.s > 0.0 && !e.config && !e.ambiguous;
            any_ambiguous |= e.ambiguous;
        }
        if (expander_limit) {
            v = Verdict::non_static;
        } else if (any_ambiguous) {
            v = Verdict::inconclusive;
        } else {
            const auto* first_config =
                entries.front().config ? &*entries.front().config : nullptr;
            for (const auto& e : entries) {
                if (!e.config ||
                    (first_config &&
                     !same_configuration(*first_config, *e.config, opts.config_angle_tol))) {
                    v = Verdict::non_static;
                    break;
                }
            }
        }
        per_scale.push_back(v);
        for (auto& e : entries) probe.entries.push_back(std::move(e));
    }

    bool all_inconclusive = true;
    bool any_ambiguous = false;
    for (const auto& e : probe.entries) any_ambiguous |= e.ambiguous;
    for (Verdict v : per_scale) all_inconclusive &= v == Verdict::inconclusive;
    if (all_inconclusive && any_ambiguous)
        throw AmbiguousMultiplicityError("every probed scale was ambiguous");

    probe.verdict = per_scale.back();  // smallest scale probes the limit
    probe.stable_across_scales = true;
    for (Verdict v : per_scale) probe.stable_across_scales &= v == probe.verdict;
    return probe;
}

double barrier_value(const AmbientVector& x, double alpha, double delta, double B) {
    if (alpha >= 1.0 / 3.0) throw DomainError("barrier exponent must satisfy alpha < 1/3");
    const double r = std::max(norm(x), 1e-8);
    return B * std::pow(r, -alpha) * std::exp(-r / 2.0) + delta * std::exp(x.x1 / 2.0);
}

BarrierResidual barrier_residual(const SurfacePatch& p, double alpha, double delta,
                                 double B, double r_min) {
    if (alpha >= 1.0 / 3.0) throw DomainError("barrier exponent must satisfy alpha < 1/3");
    const auto geo = surface::compute_geometry(p);
    const auto H = surface::mean_curvature(p, geo);
    const double r_clamp = r_min / 2.0;

    // clamped radius keeps the stencil finite near the origin; clamped
    // nodes are excluded from the report
    ScalarField V{"barrier", std::vector<double>(p.grid.count())};
    for (std::size_t k = 0; k < p.grid.count(); ++k) {
        const double r = std::max(norm(p.pos[k]), r_clamp);
        V.v[k] = B * std::pow(r, -alpha) * std::exp(-r / 2.0) +
                 delta * std::exp(p.pos[k].x1 / 2.0);
    }
    const auto lap = surface::laplace_beltrami(p, geo, V);

    BarrierResidual out;
    out.residual = ScalarField{"barrier_residual", std::vector<double>(p.grid.count(), 0.0)};
    out.excluded.assign(p.grid.count(), 0);
    for (std::size_t k = 0; k < p.grid.count(); ++k) {
        if (norm(p.pos[k]) < r_min) {
            out.excluded[k] = 1;
            ++out.excluded_count;
            continue;
        }
        const double h2 = norm_sq(H[k]);
        out.residual.v[k] = lap.v[k] - V.v[k] * (h2 + 1.0) / 4.0;
    }
    return out;
}

BarrierScan barrier_scan(const SurfacePatch& p, double alpha, double B, double r_min) {
    const auto res = barrier_residual(p, alpha, 0.0, B, r_min);
    BarrierScan scan;
    scan.excluded_count = res.excluded_count;
    scan.R0 = r_min;
    for (std::size_t iu = 0; iu < p.grid.nu; ++iu) {
        for (std::size_t iv = 0; iv < p.grid.nv; ++iv) {
            if (!surface::is_interior_node(p.grid, iu, iv)) continue;
            const std::size_t k = p.grid.index(iu, iv);
            if (res.excluded[k] || res.residual.v[k] <= 0.0) continue;
            ++scan.positive_nodes;
            scan.R0 = std::max(scan.R0, norm(p.pos[k]));
        }
    }
    return scan;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double laplace_integral(double r) {
    if (r < 0.0) throw DomainError("laplace integral needs r >= 0");
    const std::function<double(double)> f = [r](double t) {
        return std::exp(-r - r * std::cos(t));
    };
    const double a = 0.0, b = 2.0 * kPi;
    const double fa = f(a), fb = f(b), fm = f((a + b) / 2.0);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, 1e-11, 40);
}

ScalarField decay_envelope(const SurfacePatch& p, double theta_bar, double alpha,
                           double B) {
    if (alpha >= 1.0 / 3.0) throw DomainError("decay exponent must satisfy alpha < 1/3");
    const auto geo = surface::compute_geometry(p);
    const auto theta = surface::lagrangian_angle(p, geo);
    const auto grad = surface::intrinsic_gradient(p, geo, theta);
    ScalarField margin{"decay_margin", std::vector<double>(p.grid.count())};
    for (std::size_t k = 0; k < p.grid.count(); ++k) {
        const double r = std::max(norm(p.pos[k]), 1e-8);
        const double envelope = B * std::pow(r, -alpha) *
                                std::exp(-r / 2.0 - p.pos[k].x1 / 2.0);
        margin.v[k] = envelope - (std::abs(theta.v[k] - theta_bar) + norm(grad[k]));
    }
    return margin;
}

namespace {

surface::FieldStats osc_stats(const SurfacePatch& p, const ScalarField& f,
                              std::size_t band = 4) {
    double lo_i = std::numeric_limits<double>::infinity(), hi_i = -lo_i;
    double lo_b = lo_i, hi_b = -lo_i;
    for (std::size_t iu = 0; iu < p.grid.nu; ++iu)
        for (std::size_t iv = 0; iv < p.grid.nv; ++iv) {
            const double x = f.v[p.grid.index(iu, iv)];
            if (surface::is_interior_node(p.grid, iu, iv, band)) {
                lo_i = std::min(lo_i, x);
                hi_i = std::max(hi_i, x);
            } else {
                lo_b = std::min(lo_b, x);
                hi_b = std::max(hi_b, x);
            }
        }
    surface::FieldStats s;
    s.max_interior = hi_i > lo_i ? hi_i - lo_i : 0.0;
    s.max_boundary = hi_b > lo_b ? hi_b - lo_b : 0.0;
    return s;
}

}  // namespace

IdentityReport translator_identities(const SurfacePatch& p, double theta_bar,
                                     std::size_t band) {
    const auto geo = surface::compute_geometry(p);
    const auto H = surface::mean_curvature(p, geo);
    const auto theta = surface::lagrangian_angle(p, geo);
    const auto e1perp = surface::normal_projection_field(p, geo, ambient::e1());
    const auto grad_theta = surface::intrinsic_gradient(p, geo, theta);
    const auto lap_theta = surface::laplace_beltrami(p, geo, theta);
    const auto lap_x1 = surface::laplace_beltrami(p, geo, surface::coordinate_field(p, 0));

    const std::size_t n = p.grid.count();
    ScalarField affine{"", std::vector<double>(n)};
    ScalarField speed{"", std::vector<double>(n)};
    ScalarField lx1{"", std::vector<double>(n)};
    ScalarField transport{"", std::vector<double>(n)};
    ScalarField trans_res{"", std::vector<double>(n)};
    ScalarField hjt{"", std::vector<double>(n)};

    for (std::size_t k = 0; k < n; ++k) {
        const double h2 = norm_sq(H[k]);
        affine.v[k] = theta.v[k] + dot(ambient::apply_J(ambient::e1()), p.pos[k]);
        speed.v[k] = std::abs(norm(H[k]) - norm(e1perp[k]));
        lx1.v[k] = lap_x1.v[k] - h2;
        transport.v[k] = lap_theta.v[k] + dot(grad_theta[k], ambient::e1());
        trans_res.v[k] = norm(H[k] - e1perp[k]);
        hjt.v[k] = norm(H[k] - ambient::apply_J(grad_theta[k]));
    }

    ScalarField cos_field{"cos_theta", std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) cos_field.v[k] = std::cos(theta.v[k]);
    const auto grad_cos = surface::intrinsic_gradient(p, geo, cos_field);
    const auto lap_cos = surface::laplace_beltrami(p, geo, cos_field);
    ScalarField cos_res{"", std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k)
        cos_res.v[k] = lap_cos.v[k] + dot(grad_cos[k], ambient::e1()) +
                       cos_field.v[k] * norm_sq(H[k]);

    ScalarField u{"eigenfunction", std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k)
        u.v[k] = (theta.v[k] - theta_bar) * std::exp(p.pos[k].x1 / 2.0);
    const auto lap_u = surface::laplace_beltrami(p, geo, u);
    ScalarField eig_res{"", std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k)
        eig_res.v[k] = lap_u.v[k] - u.v[k] * (norm_sq(H[k]) + 1.0) / 4.0;

    IdentityReport report;
    report.theta_affine = osc_stats(p, affine, band);
    report.speed_match = surface::max_abs_stats(p, speed, band);
    report.laplace_x1 = surface::max_abs_stats(p, lx1, band);
    report.theta_transport = surface::max_abs_stats(p, transport, band);
    report.translator = surface::max_abs_stats(p, trans_res, band);
    report.cos_theta = surface::max_abs_stats(p, cos_res, band);
    report.eigenfunction = surface::max_abs_stats(p, eig_res, band);
    report.h_vs_j_grad_theta = surface::max_abs_stats(p, hjt, band);
    return report;
}

double min_cos_theta(const SurfacePatch& p) {
    const auto theta = surface::lagrangian_angle(p);
    double m = std::numeric_limits<double>::infinity();
    for (double t : theta.v) m = std::min(m, std::cos(t));
    return m;
}

}  // namespace lmcf::diag
