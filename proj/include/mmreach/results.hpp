#pragma once

#include "mmreach/config.hpp"
#include "mmreach/oracle.hpp"
#include "mmreach/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace mmreach {

inline constexpr const char* kResultSchemaVersion = "1";

nlohmann::json to_json(const Box& b);
nlohmann::json to_json(const Parallelotope& p);
nlohmann::json to_json(const Polygon2D& p);
nlohmann::json to_json(const ContainmentReport& r);

/// Full result document: {meta, system, initial_set, method, boxes,
/// parallelotopes, intersection_polygon?, area_curve?, volume?, reports?}.
nlohmann::json result_json(const ProblemConfig& cfg, const ReachOutcome& r);

/// Throws ConfigError naming the first path that does not match the schema.
void validate_result(const nlohmann::json& doc);

/// Current UTC time as an ISO-8601 string; the only nondeterministic field.
std::string utc_timestamp();

/// "k,area" rows with a header.
void write_area_curve_csv(std::ostream& os, const std::vector<double>& curve);
/// One "x y" vertex per line, 17 significant digits.
void write_polygon(std::ostream& os, const Polygon2D& p);
/// Header "x1,...,xn" then one point per row.
void write_points_csv(std::ostream& os, const std::vector<Vector>& pts);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

} // namespace mmreach
