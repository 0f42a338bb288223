#pragma once

// JSON documents: scenes, scene specs, fit reports and BEV grids.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lanespline/evaluation.hpp"
#include "lanespline/fit.hpp"
#include "lanespline/scene.hpp"
#include "lanespline/spatial_lift.hpp"

namespace lanespline {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSceneVersion = "lanespline-scene/1";
inline constexpr const char* kReportVersion = "lanespline-fit/1";
inline constexpr const char* kGridVersion = "lanespline-grid/1";

Json camera_to_json(const CameraModel& c);
CameraModel camera_from_json(const Json& j);

Json tensor_to_json(const Tensor3& t);
Tensor3 tensor_from_json(const Json& j);

Json lanes_to_json(const std::vector<GtLane>& lanes);
std::vector<GtLane> lanes_from_json(const Json& j);

Json scene_to_json(const SceneGroundTruth& s);
SceneGroundTruth scene_from_json(const Json& j);

// Every field optional; missing fields keep SceneSpec defaults.
SceneSpec spec_from_json(const Json& j);
Json spec_to_json(const SceneSpec& s);

Json report_to_json(const FitReport& r, const FitConfig& cfg, const std::string& scene_name,
                    int lane_samples = 100);

Json grid_to_json(const BevGrid& g, double surface_loss_value);

// Canonical text form: two-space indent plus trailing newline.
std::string dump(const Json& j);
Json parse_json(const std::string& text);  // InvalidInput on syntax errors

std::string read_file(const std::filesystem::path& p);  // InvalidInput if unreadable
// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& p, const std::string& content);

Json read_json_file(const std::filesystem::path& p);
SceneGroundTruth read_scene(const std::filesystem::path& p);
// Lanes from a scene file or a fit report.
std::vector<GtLane> read_lanes(const std::filesystem::path& p);

}  // namespace lanespline
