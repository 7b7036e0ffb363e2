#include "lmcf/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace lmcf::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_curve_csv(std::ostream& os, const curves::PlanarCurve& c) {
    os << "# planar-curve v1\n";
    os << "x,y\n";
    for (const auto& p : c.points)
        os << format_double(p.real()) << ',' << format_double(p.imag()) << '\n';
}

void write_curve_csv(std::ostream& os, const curves::MultiCurve& mc) {
    os << "# planar-curve v1\n";
    os << "x,y\n";
    for (std::size_t i = 0; i < mc.components.size(); ++i) {
        if (i > 0) os << '\n';
        for (const auto& p : mc.components[i].points)
            os << format_double(p.real()) << ',' << format_double(p.imag()) << '\n';
    }
}

curves::MultiCurve read_curve_csv(std::istream& is) {
    curves::MultiCurve mc;
    curves::PlanarCurve cur;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!cur.points.empty()) {
                mc.components.push_back(std::move(cur));
                cur = {};
            }
            continue;
        }
        if (line[0] == '#' || line == "x,y") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DomainError("malformed curve CSV line: " + line);
        cur.points.emplace_back(std::stod(line.substr(0, comma)),
                                std::stod(line.substr(comma + 1)));
    }
    if (!cur.points.empty()) mc.components.push_back(std::move(cur));
    return mc;
}

void write_patch_csv(std::ostream& os, const surface::SurfacePatch& p,
                     const std::vector<surface::ScalarField>& fields) {
    os << "# surface-patch v1\n";
    os << "u,v,x1,y1,x2,y2";
    for (const auto& f : fields) os << ',' << f.name;
    os << '\n';
    for (std::size_t iu = 0; iu < p.grid.nu; ++iu) {
        for (std::size_t iv = 0; iv < p.grid.nv; ++iv) {
            const std::size_t k = p.grid.index(iu, iv);
            const auto& x = p.pos[k];
            os << format_double(p.grid.u(iu)) << ',' << format_double(p.grid.v(iv)) << ','
               << format_double(x.x1) << ',' << format_double(x.y1) << ','
               << format_double(x.x2) << ',' << format_double(x.y2);
            for (const auto& f : fields) os << ',' << format_double(f.v[k]);
            os << '\n';
        }
    }
}

json family_to_json(const solitons::SolitonFamily& f, const solitons::Window& w) {
    json j;
    j["kind"] = solitons::kind_name(f.kind);
    switch (f.kind) {
        case solitons::Kind::plane:
            j["alpha"] = f.alpha;
            break;
        case solitons::Kind::grim_reaper:
            break;
        case solitons::Kind::jlt_translator:
        case solitons::Kind::expander:
            j["shoot"] = f.shoot;
            j["curve_h"] = f.curve_h;
            j["curve_span"] = f.curve_span;
            break;
        case solitons::Kind::product: {
            std::ostringstream os;
            write_curve_csv(os, f.gamma);
            j["curve_csv"] = os.str();
            j["closed"] = f.gamma.closed();
            break;
        }
    }
    j["window"] = {{"u0", w.u0}, {"u1", w.u1}, {"v0", w.v0},
                   {"v1", w.v1}, {"hu", w.hu}, {"hv", w.hv}};
    return j;
}

solitons::SolitonFamily family_from_json(const json& j) {
    const auto kind = solitons::kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
        case solitons::Kind::plane:
            return solitons::make_plane(j.value("alpha", 0.0));
        case solitons::Kind::grim_reaper:
            return solitons::make_grim_reaper();
        case solitons::Kind::jlt_translator: {
            const double shoot = j.value("shoot", 1.0);
            const double h = j.value("curve_h", 0.01);
            const double span = j.value("curve_span", 24.0);
            return solitons::make_jlt(curves::expander_curve(shoot, span, h));
        }
        case solitons::Kind::expander: {
            const double shoot = j.value("shoot", 1.0);
            const double h = j.value("curve_h", 0.01);
            const double span = j.value("curve_span", 24.0);
            return solitons::make_expander(
                curves::double_curve(curves::expander_curve(shoot, span, h)));
        }
        case solitons::Kind::product: {
            std::istringstream is(j.at("curve_csv").get<std::string>());
            auto mc = read_curve_csv(is);
            if (mc.components.size() != 1)
                throw DomainError("product family expects a single-component curve");
            auto& c = mc.components[0];
            c.topology = j.value("closed", false) ? curves::Topology::closed
                                                  : curves::Topology::open;
            return solitons::make_product(c);
        }
    }
    throw DomainError("unreachable family kind");
}

solitons::Window window_from_json(const json& j, const solitons::Window& fallback) {
    solitons::Window w = fallback;
    if (!j.is_object()) return w;
    w.u0 = j.value("u0", w.u0);
    w.u1 = j.value("u1", w.u1);
    w.v0 = j.value("v0", w.v0);
    w.v1 = j.value("v1", w.v1);
    w.hu = j.value("hu", w.hu);
    w.hv = j.value("hv", w.hv);
    return w;
}

json density_to_json(const diag::DensityReport& r) {
    json j;
    j["density"] = r.value;
    j["tail_bound"] = r.tail_bound;
    j["truncation_radius"] = r.truncation_radius;
    j["truncated"] = r.truncated;
    j["tau"] = r.tau;
    j["center"] = {r.center.x1, r.center.y1, r.center.x2, r.center.y2};
    return j;
}

json configuration_to_json(const diag::PlaneConfiguration& c) {
    json planes = json::array();
    for (const auto& p : c.planes) {
        planes.push_back({{"angle", p.angle},
                          {"multiplicity", p.multiplicity},
                          {"residual", p.residual},
                          {"density", p.density}});
    }
    return json{{"planes", planes}};
}

std::string verdict_name(diag::Verdict v) {
    switch (v) {
        case diag::Verdict::static_solution: return "static";
        case diag::Verdict::non_static: return "non_static";
        case diag::Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

json probe_to_json(const diag::BlowdownProbe& p) {
    json entries = json::array();
    for (const auto& e : p.entries) {
        json je{{"lambda", e.lambda}, {"s", e.s}};
        if (e.config) je["configuration"] = configuration_to_json(*e.config);
        if (e.expander) {
            je["expander"] = {{"residual", e.expander->max_residual},
                              {"sup_H", e.expander->sup_H},
                              {"nodes", e.expander->nodes}};
        }
        entries.push_back(std::move(je));
    }
    return json{{"verdict", verdict_name(p.verdict)},
                {"almost_calibrated", p.almost_calibrated},
                {"min_cos_theta", p.min_cos_theta},
                {"entries", entries}};
}

namespace {

json stats_to_json(const surface::FieldStats& s) {
    return {{"interior", s.max_interior}, {"boundary", s.max_boundary}};
}

}  // namespace

json identities_to_json(const diag::IdentityReport& r) {
    return json{{"theta_affine_osc", stats_to_json(r.theta_affine)},
                {"speed_match", stats_to_json(r.speed_match)},
                {"laplace_x1", stats_to_json(r.laplace_x1)},
                {"theta_transport", stats_to_json(r.theta_transport)},
                {"translator", stats_to_json(r.translator)},
                {"cos_theta", stats_to_json(r.cos_theta)},
                {"eigenfunction", stats_to_json(r.eigenfunction)},
                {"h_vs_j_grad_theta", stats_to_json(r.h_vs_j_grad_theta)}};
}

}  // namespace lmcf::io
