#pragma once

// JSON and CSV serialization for the CLI. Malformed input raises InvalidInput;
// an unknown model id raises BadConfig.

#include <iosfwd>
#include <string>
#include <vector>

#include "fiberlab/cech.hpp"
#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/moduli.hpp"
#include "json.hpp"

namespace fiberlab::io {

using json = nlohmann::json;

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// {"n": int, "disp": [reals]}
json to_json(const circle::CircleDiffeo& f);
circle::CircleDiffeo diffeo_from_json(const json& j);

/// {"base": "S2", "m": int, "overlaps": [{"i", "j", "samples"}]}. "m" (cover resolution)
/// is optional on input.
json to_json(const cech::Cocycle1& tau);
cech::Cocycle1 cocycle_from_json(const json& j);

/// Points are plain arrays: total_coords entries (quaternions as [w, i, j, k]) or
/// base_coords entries.
json to_json(const geometry::TotalPoint& p, const geometry::FibrationModel& model);
json to_json(const geometry::BasePoint& x, const geometry::FibrationModel& model);
geometry::TotalPoint point_from_json(const json& j, const geometry::FibrationModel& model);
geometry::BasePoint base_point_from_json(const json& j, const geometry::FibrationModel& model);

/// {"model": id, "nb": int, "nf": int, "vectors": [[reals]]}, vectors in (base, fiber) order.
json to_json(const fields::FieldGrid& X);
fields::FieldGrid field_from_json(const json& j);

/// {"model": id, "nb": int, "fibers": [[point arrays]]}
json to_json(const moduli::Fibering& F);
/// `fallback` is used when the document has no "model" key.
moduli::Fibering fibering_from_json(const json& j,
                                    const geometry::FibrationModel* fallback = nullptr);
/// A single fiber: {"model": id, "samples": [points]}, or a fibering with one fiber.
moduli::FiberShape shape_from_json(const json& j,
                                   const geometry::FibrationModel* fallback = nullptr);
json to_json(const moduli::FiberShape& S);

/// Writes a header row and rows of numbers with full round-trip precision.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string format_double(double v);

}  // namespace fiberlab::io
