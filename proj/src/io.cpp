#include "lanespline/io.hpp"

#include <fstream>
#include <sstream>

namespace lanespline {

namespace {

template <class T>
T get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad field '") + key + "': " + e.what());
  }
}

template <class T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.is_object() && j.contains(key)) out = get<T>(j, key);
}

}  // namespace

Json camera_to_json(const CameraModel& c) {
  return Json{{"fx", c.fx},
              {"fy", c.fy},
              {"cx", c.cx},
              {"cy", c.cy},
              {"height", c.height},
              {"pitch", c.pitch},
              {"image_width", c.image_width},
              {"image_height", c.image_height}};
}

CameraModel camera_from_json(const Json& j) {
  CameraModel c;
  maybe(j, "fx", c.fx);
  maybe(j, "fy", c.fy);
  maybe(j, "cx", c.cx);
  maybe(j, "cy", c.cy);
  maybe(j, "height", c.height);
  maybe(j, "pitch", c.pitch);
  maybe(j, "image_width", c.image_width);
  maybe(j, "image_height", c.image_height);
  try {
    c.validate();
  } catch (const Error& e) {
    throw InvalidInput(std::string("camera: ") + e.what());
  }
  return c;
}

Json tensor_to_json(const Tensor3& t) {
  return Json{{"shape", {t.rows, t.cols, t.channels}}, {"data", t.data}};
}

Tensor3 tensor_from_json(const Json& j) {
  const auto shape = get<std::vector<int>>(j, "shape");
  if (shape.size() != 3) throw InvalidInput("tensor shape must have three entries");
  Tensor3 t;
  t.rows = shape[0];
  t.cols = shape[1];
  t.channels = shape[2];
  t.data = get<std::vector<double>>(j, "data");
  try {
    t.check_shape();
  } catch (const Error& e) {
    throw InvalidInput(std::string("tensor: ") + e.what());
  }
  return t;
}

Json lanes_to_json(const std::vector<GtLane>& lanes) {
  Json arr = Json::array();
  for (const auto& l : lanes) {
    Json x = Json::array(), y = Json::array(), z = Json::array(), v = Json::array();
    for (std::size_t i = 0; i < l.points.size(); ++i) {
      x.push_back(l.points[i].x);
      y.push_back(l.points[i].y);
      z.push_back(l.points[i].z);
      v.push_back(static_cast<int>(l.visibility[i]));
    }
    arr.push_back(Json{{"category", l.category}, {"x", x}, {"y", y}, {"z", z}, {"visibility", v}});
  }
  return arr;
}

std::vector<GtLane> lanes_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidInput("'lanes' must be an array");
  std::vector<GtLane> out;
  for (const auto& e : j) {
    const auto x = get<std::vector<double>>(e, "x");
    const auto y = get<std::vector<double>>(e, "y");
    const auto z = get<std::vector<double>>(e, "z");
    const auto v = get<std::vector<int>>(e, "visibility");
    if (x.size() != y.size() || x.size() != z.size() || x.size() != v.size())
      throw InvalidInput("lane arrays differ in length");
    GtLane l;
    l.category = get<std::string>(e, "category");
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (v[i] != 0 && v[i] != 1) throw InvalidInput("visibility entries must be 0 or 1");
      l.points.push_back({x[i], y[i], z[i]});
      l.visibility.push_back(static_cast<std::uint8_t>(v[i]));
    }
    l.validate();
    out.push_back(std::move(l));
  }
  return out;
}

Json scene_to_json(const SceneGroundTruth& s) {
  Json j{{"version", kSceneVersion},
         {"scenario", s.scenario},
         {"camera", camera_to_json(s.camera)},
         {"surface", {{"a", s.surface.a}, {"b", s.surface.b}, {"c", s.surface.c}}},
         {"lanes", lanes_to_json(s.lanes)}};
  if (s.features || s.depth) {
    Json t = Json::object();
    if (s.features) t["features"] = tensor_to_json(*s.features);
    if (s.depth) t["depth"] = tensor_to_json(*s.depth);
    j["tensors"] = t;
  }
  return j;
}

SceneGroundTruth scene_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("scene document must be an object");
  if (get<std::string>(j, "version") != kSceneVersion)
    throw InvalidInput("unsupported scene version");
  SceneGroundTruth s;
  maybe(j, "scenario", s.scenario);
  if (j.contains("camera")) s.camera = camera_from_json(j.at("camera"));
  if (j.contains("surface")) {
    const Json& sf = j.at("surface");
    maybe(sf, "a", s.surface.a);
    maybe(sf, "b", s.surface.b);
    maybe(sf, "c", s.surface.c);
  }
  if (!j.contains("lanes")) throw InvalidInput("missing field 'lanes'");
  s.lanes = lanes_from_json(j.at("lanes"));
  if (j.contains("tensors")) {
    const Json& t = j.at("tensors");
    if (t.contains("features")) s.features = tensor_from_json(t.at("features"));
    if (t.contains("depth")) s.depth = tensor_from_json(t.at("depth"));
  }
  return s;
}

SceneSpec spec_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("scene spec must be an object");
  SceneSpec s;
  maybe(j, "n_lanes", s.n_lanes);
  maybe(j, "lane_width", s.lane_width);
  maybe(j, "centerline", s.centerline);
  maybe(j, "arc_radius", s.arc_radius);
  if (j.contains("surface")) {
    const Json& sf = j.at("surface");
    maybe(sf, "a", s.surface.a);
    maybe(sf, "b", s.surface.b);
    maybe(sf, "c", s.surface.c);
  }
  if (j.contains("occlusions")) {
    for (const auto& lane : j.at("occlusions")) {
      std::vector<Interval> ivs;
      for (const auto& iv : lane) {
        const auto p = iv.get<std::vector<double>>();
        if (p.size() != 2) throw InvalidInput("occlusion intervals need two entries");
        ivs.push_back({p[0], p[1]});
      }
      s.occlusions.push_back(std::move(ivs));
    }
  }
  maybe(j, "noise", s.noise);
  if (j.contains("topology")) s.topology = parse_topology(get<std::string>(j, "topology"));
  maybe(j, "topology_y", s.topology_y);
  maybe(j, "topology_gap", s.topology_gap);
  maybe(j, "categories", s.categories);
  maybe(j, "seed", s.seed);
  maybe(j, "y_start", s.y_start);
  maybe(j, "y_end", s.y_end);
  maybe(j, "points_per_lane", s.points_per_lane);
  if (j.contains("camera")) s.camera = camera_from_json(j.at("camera"));
  maybe(j, "scenario", s.scenario);
  return s;
}

Json spec_to_json(const SceneSpec& s) {
  Json occ = Json::array();
  for (const auto& lane : s.occlusions) {
    Json l = Json::array();
    for (const auto& iv : lane) l.push_back({iv.lo, iv.hi});
    occ.push_back(l);
  }
  return Json{{"n_lanes", s.n_lanes},
              {"lane_width", s.lane_width},
              {"centerline", s.centerline},
              {"arc_radius", s.arc_radius},
              {"surface", {{"a", s.surface.a}, {"b", s.surface.b}, {"c", s.surface.c}}},
              {"occlusions", occ},
              {"noise", s.noise},
              {"topology", topology_name(s.topology)},
              {"topology_y", s.topology_y},
              {"topology_gap", s.topology_gap},
              {"categories", s.categories},
              {"seed", s.seed},
              {"y_start", s.y_start},
              {"y_end", s.y_end},
              {"points_per_lane", s.points_per_lane},
              {"camera", camera_to_json(s.camera)},
              {"scenario", s.scenario}};
}

namespace {

Json breakdown_json(const LossBreakdown<double>& b) {
  Json j = Json::object();
  for (LossTerm t : kLossTerms) j[loss_term_name(t)] = b[t];
  j["total"] = b.total;
  return j;
}

}  // namespace

Json report_to_json(const FitReport& r, const FitConfig& cfg, const std::string& scene_name,
                    int lane_samples) {
  Json priors = Json::array();
  if (cfg.priors.par) priors.push_back("par");
  if (cfg.priors.sm) priors.push_back("sm");
  if (cfg.priors.curv) priors.push_back("curv");
  Json hist = Json::array();
  for (const auto& b : r.history) hist.push_back(breakdown_json(b));
  Json assigned = Json::array();
  for (const auto& a : r.context.assignments)
    assigned.push_back({{"proposal", a.proposal}, {"gt", a.gt}, {"cost", a.cost}});
  return Json{{"version", kReportVersion},
              {"scene", scene_name},
              {"config",
               {{"learning_rate", cfg.learning_rate},
                {"steps", cfg.steps},
                {"seed", cfg.seed},
                {"priors", priors}}},
              {"final_loss", breakdown_json(r.final_loss)},
              {"gradient_check",
               {{"max_rel_err", r.check.max_rel_err}, {"checked", r.check.checked}}},
              {"window_violations", r.window_violations},
              {"assignments", assigned},
              {"representatives", r.context.representatives},
              {"lanes", lanes_to_json(fitted_lanes(r, lane_samples))},
              {"history", hist}};
}

Json grid_to_json(const BevGrid& g, double surface_loss_value) {
  Json valid = Json::array();
  for (auto v : g.valid) valid.push_back(static_cast<int>(v));
  return Json{{"version", kGridVersion},
              {"cells_x", g.config.cells_x},
              {"cells_y", g.config.cells_y},
              {"range",
               {g.config.range.x_min, g.config.range.x_max, g.config.range.y_min,
                g.config.range.y_max}},
              {"channels", g.channels},
              {"surface_loss", surface_loss_value},
              {"z", g.z},
              {"weight", g.weight},
              {"valid", valid},
              {"features", g.features}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + p.string());
    out << content;
    if (!out) throw InvalidInput("write failed for " + p.string());
  }
  std::filesystem::rename(tmp, p);
}

Json read_json_file(const std::filesystem::path& p) { return parse_json(read_file(p)); }

SceneGroundTruth read_scene(const std::filesystem::path& p) { return scene_from_json(read_json_file(p)); }

std::vector<GtLane> read_lanes(const std::filesystem::path& p) {
  const Json j = read_json_file(p);
  if (!j.is_object() || !j.contains("version")) throw InvalidInput("missing document version");
  const std::string v = get<std::string>(j, "version");
  if (v != kSceneVersion && v != kReportVersion) throw InvalidInput("unsupported document version");
  return lanes_from_json(j.at("lanes"));
}

}  // namespace lanespline
