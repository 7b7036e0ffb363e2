#pragma once

// Constructors for the explicit solutions: Lagrangian planes P_alpha, the
// grim reaper, the translator built from an expander curve, curve products,
// and the expanding family R x sqrt(2s) w~.  Each family evaluates to
// surface patches at a requested parameter window and time, translating or
// scaling exactly at the constructor level.

#include <optional>
#include <string>

#include "lmcf/curve.hpp"
#include "lmcf/surface.hpp"

namespace lmcf::solitons {

enum class Kind { plane, grim_reaper, jlt_translator, product, expander };

std::string kind_name(Kind k);
Kind kind_from_name(const std::string& name);

struct Window {
    double u0 = -1.0, u1 = 1.0;
    double v0 = -1.0, v1 = 1.0;
    double hu = 0.05, hv = 0.05;
};

struct SolitonFamily {
    Kind kind = Kind::plane;
    double alpha = 0.0;              // plane angle
    double shoot = 0.0;              // expander-curve shooting parameter
    double curve_h = 0.0;            // arc-length step of the generating curve
    double curve_span = 0.0;         // arc length covered by the stored curve
    curves::PlanarCurve curve;       // w (jlt), w-component of w~ (expander)
    curves::PlanarCurve gamma;       // product base curve
    double scale = 1.0;              // blow-down prescale

    bool translating() const {
        return kind == Kind::plane || kind == Kind::grim_reaper ||
               kind == Kind::jlt_translator;
    }

    // Patches at time t over the window (see per-kind notes in solitons.cpp).
    surface::PatchSet patches(const Window& w, double t) const;

    // Patches covering the ball |x| <= radius at time t, target node
    // spacing h in position space.
    surface::PatchSet patches_covering(double radius, double t, double h) const;

    // The family lambda * L_{t/lambda^2}.
    SolitonFamily scaled(double lambda) const;

    // Throws DomainError when t is outside the family's time domain.
    void validate_time(double t) const;

    // Canonical verification window.
    Window default_window(double h) const;
};

SolitonFamily make_plane(double alpha);
SolitonFamily make_grim_reaper();

// pre: w produced by expander_curve (carries the tangent-angle field and a
// symmetric vertex on the x-axis).
SolitonFamily make_jlt(const curves::PlanarCurve& w);

SolitonFamily make_product(const curves::PlanarCurve& gamma);

// pre: w_tilde from double_curve(expander_curve(...)).
SolitonFamily make_expander(const curves::MultiCurve& w_tilde);

// Asymptotic tangent angles of the generating curve (jlt/expander kinds).
curves::AsymptoticAngles generator_asymptotic_angles(const SolitonFamily& f);

}  // namespace lmcf::solitons
