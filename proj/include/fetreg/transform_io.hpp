#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "fetreg/affine.hpp"

namespace fetreg {

/// JSON object form: {"a11":..,"a12":..,"a21":..,"a22":..,"tx":..,"ty":..}.
nlohmann::json to_json(const AffineTransform& t);
AffineTransform transform_from_json(const nlohmann::json& j);

/// CSV with columns a11,a12,a21,a22,tx,ty, one row per frame pair. Written
/// with a header line and full double precision; the reader accepts files
/// with or without the header.
void save_transforms_csv(const std::vector<AffineTransform>& transforms,
                         const std::filesystem::path& path);
std::vector<AffineTransform> load_transforms_csv(const std::filesystem::path& path);

}  // namespace fetreg
