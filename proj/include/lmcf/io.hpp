#pragma once

// Serialization: curves and patches to CSV (17 significant digits, LF
// endings), family descriptors and probe reports to JSON with fixed field
// names.  All output is byte-deterministic for a given input.

#include <iosfwd>
#include <string>
#include <vector>

#include "lmcf/curve.hpp"
#include "lmcf/diagnostics.hpp"
#include "lmcf/solitons.hpp"
#include "lmcf/surface.hpp"

#include "json.hpp"

namespace lmcf::io {

using json = nlohmann::ordered_json;

// fixed float formatting: %.17g
std::string format_double(double x);

void write_curve_csv(std::ostream& os, const curves::PlanarCurve& c);
void write_curve_csv(std::ostream& os, const curves::MultiCurve& c);
curves::MultiCurve read_curve_csv(std::istream& is);

// columns u,v,x1,y1,x2,y2 plus one named column per extra field
void write_patch_csv(std::ostream& os, const surface::SurfacePatch& p,
                     const std::vector<surface::ScalarField>& fields = {});

json family_to_json(const solitons::SolitonFamily& f, const solitons::Window& w);
solitons::SolitonFamily family_from_json(const json& j);
solitons::Window window_from_json(const json& j, const solitons::Window& fallback = {});

json density_to_json(const diag::DensityReport& r);
json configuration_to_json(const diag::PlaneConfiguration& c);
json probe_to_json(const diag::BlowdownProbe& p);
json identities_to_json(const diag::IdentityReport& r);

std::string verdict_name(diag::Verdict v);

}  // namespace lmcf::io
