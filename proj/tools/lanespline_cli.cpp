// Batch command-line front end: scene generation, fitting, evaluation, lift
// demo and gradient checks.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lanespline/evaluation.hpp"
#include "lanespline/fit.hpp"
#include "lanespline/gradcheck.hpp"
#include "lanespline/io.hpp"
#include "lanespline/svg.hpp"

namespace fs = std::filesystem;
using namespace lanespline;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInputError = 2, kDiverged = 3, kCheckFailed = 4 };

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

unsigned thread_cap() {
  if (const char* env = std::getenv("LANECPP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to thread_cap() workers. The exception of
// the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::min<std::size_t>(n, thread_cap());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string scene_name(const fs::path& p) {
  std::string s = p.stem().string();
  const std::string suffix = ".report";
  if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    s.resize(s.size() - suffix.size());
  return s;
}

// ---- gen-scene --------------------------------------------------------------

struct GenArgs {
  std::string spec;
  std::uint64_t seed = 0;
  std::string out;
  int count = 1;
};

int cmd_gen(const GenArgs& a) {
  SceneSpec spec;
  if (!a.spec.empty()) {
    if (!fs::exists(a.spec)) throw InvalidInput("spec file not found: " + a.spec);
    spec = spec_from_json(read_json_file(a.spec));
  }
  if (a.count == 1) {
    spec.seed = a.seed;
    write_file(a.out, dump(scene_to_json(gen_scene(spec))));
    return kOk;
  }
  fs::create_directories(a.out);
  parallel_for(static_cast<std::size_t>(a.count), [&](std::size_t i) {
    SceneSpec s = spec;
    s.seed = a.seed + i;
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04zu.json", i);
    write_file(fs::path(a.out) / name, dump(scene_to_json(gen_scene(s))));
  });
  return kOk;
}

// ---- fit ----------------------------------------------------------------------

struct FitArgs {
  std::string scene;
  std::string priors = "par,sm,curv";
  int steps = 1000;
  double lr = 0.05;
  std::uint64_t seed = 0;
  std::string out;
  std::string plot;
  int samples = 100;
};

PriorSwitches parse_priors(const std::string& s) {
  PriorSwitches p = PriorSwitches::none();
  if (s == "none" || s.empty()) return p;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (tok == "par")
      p.par = true;
    else if (tok == "sm")
      p.sm = true;
    else if (tok == "curv")
      p.curv = true;
    else
      throw InvalidInput("unknown prior '" + tok + "' (expected par, sm, curv or none)");
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return p;
}

void fit_one(const fs::path& in, const fs::path& out, const fs::path& plot, const FitConfig& cfg,
             int samples) {
  const SceneGroundTruth scene = read_scene(in);
  FitReport rep;
  try {
    rep = fit_scene(scene, cfg);
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.step(), in.string() + ": diverged at step " + std::to_string(e.step()));
  }
  write_file(out, dump(report_to_json(rep, cfg, scene_name(in), samples)));
  if (!plot.empty())
    write_file(plot, lanes_svg(scene.lanes, fitted_lanes(rep, samples), scene_name(in)));
}

int cmd_fit(const FitArgs& a) {
  FitConfig cfg;
  cfg.steps = a.steps;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.priors = parse_priors(a.priors);
  cfg.validate();
  if (!fs::exists(a.scene)) throw InvalidInput("scene not found: " + a.scene);
  if (!fs::is_directory(a.scene)) {
    fit_one(a.scene, a.out, a.plot, cfg, a.samples);
    return kOk;
  }
  const auto files = json_files(a.scene);
  fs::create_directories(a.out);
  if (!a.plot.empty()) fs::create_directories(a.plot);
  parallel_for(files.size(), [&](std::size_t i) {
    const std::string stem = scene_name(files[i]);
    fit_one(files[i], fs::path(a.out) / (stem + ".report.json"),
            a.plot.empty() ? fs::path() : fs::path(a.plot) / (stem + ".svg"), cfg, a.samples);
  });
  return kOk;
}

// ---- eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  for (const auto& p : {a.pred, a.gt})
    if (!fs::exists(p)) throw InvalidInput("not found: " + p);
  std::vector<std::pair<fs::path, fs::path>> jobs;  // (gt, pred)
  if (fs::is_directory(a.gt) != fs::is_directory(a.pred))
    throw InvalidInput("--pred and --gt must both be files or both be directories");
  if (fs::is_directory(a.gt)) {
    std::map<std::string, fs::path> preds;
    for (const auto& p : json_files(a.pred)) preds[scene_name(p)] = p;
    for (const auto& g : json_files(a.gt)) {
      const auto it = preds.find(scene_name(g));
      if (it == preds.end()) throw InvalidInput("no prediction for scene " + scene_name(g));
      jobs.emplace_back(g, it->second);
    }
  } else {
    jobs.emplace_back(a.gt, a.pred);
  }
  std::vector<SceneRow> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const SceneGroundTruth gt = read_scene(jobs[i].first);
    const std::vector<GtLane> pred = read_lanes(jobs[i].second);
    rows[i] = {scene_name(jobs[i].first), gt.scenario, evaluate(pred, gt.lanes)};
  });
  write_file(a.out, eval_csv(rows));
  return kOk;
}

// ---- lift-demo ------------------------------------------------------------------

struct LiftArgs {
  std::string scene;
  int hypotheses = 5;
  std::string depth = "onehot";
  std::string out;
  std::string plot;
  int rows = 45;
  int cols = 60;
};

// Constant, row and column ramps: enough to see where features land.
Tensor3 demo_features(int rows, int cols) {
  Tensor3 f(rows, cols, 3);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      f.at(r, c, 0) = 1.0;
      f.at(r, c, 1) = (r + 0.5) / rows;
      f.at(r, c, 2) = (c + 0.5) / cols;
    }
  return f;
}

// First crossing of the ray with the scene surface, by marching and bisection.
std::optional<Point3> surface_hit(const SceneGroundTruth& s, const Point3& o, const Point3& d) {
  auto gap = [&](double t) {
    const Point3 p = o + d * t;
    return p.z - s.surface.height(p.x, p.y);
  };
  constexpr double kStep = 0.25;
  double lo = 0.0;
  const double g0 = gap(0.0);
  for (double hi = kStep; hi <= kMaxRayDepth; hi += kStep) {
    if ((gap(hi) > 0.0) == (g0 > 0.0)) {
      lo = hi;
      continue;
    }
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((gap(mid) > 0.0) == (g0 > 0.0) ? lo : hi) = mid;
    }
    const Point3 p = o + d * (0.5 * (lo + hi));
    if (p.y <= 0.0) return std::nullopt;
    return p;
  }
  return std::nullopt;
}

// One-hot on the plane whose intersection lies closest to where the ray meets
// the scene surface. Rays that never meet the surface put their mass on a
// plane they miss, which drops them from the lift.
Tensor3 onehot_depth(const SceneGroundTruth& s, const SurfaceHypothesisSet& planes, int rows, int cols) {
  const int n = static_cast<int>(planes.pitch_deg.size());
  Tensor3 d(rows, cols, n);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const auto [u, v] = cell_pixel(s.camera, rows, cols, r, c);
      const auto truth = surface_hit(s, s.camera.center(), s.camera.ray_direction(u, v));
      int best = -1, missed = -1;
      double best_err = 0.0;
      for (int k = 0; k < n; ++k) {
        const auto hit = ray_plane_intersect(s.camera, u, v, planes.pitch_deg[k]);
        if (!hit) {
          if (missed < 0) missed = k;
          continue;
        }
        if (!truth) continue;
        const double err = norm(*hit - *truth);
        if (best < 0 || err < best_err) {
          best = k;
          best_err = err;
        }
      }
      if (best >= 0)
        d.at(r, c, best) = 1.0;
      else if (missed >= 0)
        d.at(r, c, missed) = 1.0;
      else
        for (int k = 0; k < n; ++k) d.at(r, c, k) = 1.0 / n;
    }
  return d;
}

int cmd_lift(const LiftArgs& a) {
  const SurfaceHypothesisSet planes = [&] {
    try {
      return hypothesis_planes(a.hypotheses);
    } catch (const InvalidConfiguration& e) {
      throw InvalidInput(e.what());
    }
  }();
  const SceneGroundTruth scene = read_scene(a.scene);
  const int n = static_cast<int>(planes.pitch_deg.size());
  Tensor3 features = demo_features(a.rows, a.cols);
  Tensor3 depth;
  if (a.depth == "onehot") {
    depth = onehot_depth(scene, planes, a.rows, a.cols);
  } else if (a.depth == "uniform") {
    depth = Tensor3(a.rows, a.cols, n, 1.0 / n);
  } else {
    const Json j = read_json_file(a.depth);
    if (j.contains("depth")) {
      depth = tensor_from_json(j.at("depth"));
      if (j.contains("features")) features = tensor_from_json(j.at("features"));
      else features = demo_features(depth.rows, depth.cols);
    } else {
      depth = tensor_from_json(j);
      features = demo_features(depth.rows, depth.cols);
    }
    if (depth.channels != n) throw InvalidInput("depth tensor channels do not match --hypotheses");
  }
  const FrustumCloud cloud = lift_features(features, depth, scene.camera, planes);
  const BevGrid grid = splat_to_bev(cloud, BevGridConfig{});
  const double loss = scene_surface_loss(scene, grid);
  std::printf("surface_loss %.9g\n", loss);
  write_file(a.out, dump(grid_to_json(grid, loss)));
  if (!a.plot.empty()) write_file(a.plot, grid_svg(grid, "BEV height, " + std::to_string(n) + " surface hypotheses"));
  return kOk;
}

// ---- gradcheck ------------------------------------------------------------------

struct GradArgs {
  std::uint64_t seed = 0;
  int states = 10;
  std::string flip;
};

int cmd_gradcheck(const GradArgs& a) {
  GradcheckConfig cfg;
  cfg.seed = a.seed;
  cfg.states = a.states;
  if (!a.flip.empty()) cfg.flip = parse_loss_term(a.flip);
  const GradcheckReport rep = run_gradcheck(cfg);
  std::string failed;
  for (const auto& t : rep.terms) {
    std::printf("%-10s max_rel_err %.3e checked %d %s\n", loss_term_name(t.term), t.max_rel_err, t.checked,
                t.passed ? "ok" : "FAIL");
    if (!t.passed) failed += std::string(failed.empty() ? "" : ",") + loss_term_name(t.term);
  }
  std::fflush(stdout);
  if (!rep.passed) throw CheckFailure("gradient check failed for: " + failed);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lane spline fitting, evaluation and lifting tools"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-scene", "Generate a synthetic ground-truth scene");
  g->add_option("--spec", gen.spec, "Scene spec JSON (defaults when omitted)");
  g->add_option("--seed", gen.seed, "Noise seed");
  g->add_option("--out", gen.out, "Output scene file (directory when --count > 1)")->required();
  g->add_option("--count", gen.count, "Number of scenes, seeds seed..seed+count-1")
      ->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit lane hypotheses to a scene");
  f->add_option("--scene", fit.scene, "Scene file or directory")->required();
  f->add_option("--priors", fit.priors, "Comma list of par,sm,curv or none");
  f->add_option("--steps", fit.steps, "Optimizer steps")->check(CLI::Range(1, 100000000));
  f->add_option("--lr", fit.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  f->add_option("--seed", fit.seed, "Initialization seed");
  f->add_option("--samples", fit.samples, "Points per fitted lane in the report")
      ->check(CLI::Range(2, 100000));
  f->add_option("--out", fit.out, "Report file (directory for directory input)")->required();
  f->add_option("--plot", fit.plot, "SVG plot file (directory for directory input)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate predictions against ground truth");
  e->add_option("--pred", ev.pred, "Prediction scene/report file or directory")->required();
  e->add_option("--gt", ev.gt, "Ground-truth scene file or directory")->required();
  e->add_option("--out", ev.out, "CSV output")->required();

  LiftArgs lift;
  auto* l = app.add_subcommand("lift-demo", "Lift features to BEV on surface hypotheses");
  l->add_option("--scene", lift.scene, "Scene file")->required();
  l->add_option("--hypotheses", lift.hypotheses, "Number of surface hypotheses (1, 3, 5, 15, 27)");
  l->add_option("--depth", lift.depth, "onehot, uniform or a tensor JSON file");
  l->add_option("--feature-rows", lift.rows, "Feature map rows")->check(CLI::PositiveNumber);
  l->add_option("--feature-cols", lift.cols, "Feature map columns")->check(CLI::PositiveNumber);
  l->add_option("--out", lift.out, "Grid JSON output")->required();
  l->add_option("--plot", lift.plot, "SVG height map");

  GradArgs grad;
  auto* gc = app.add_subcommand("gradcheck", "Check analytic loss gradients against finite differences");
  gc->add_option("--seed", grad.seed, "State seed");
  gc->add_option("--states", grad.states, "Random states per term")->check(CLI::PositiveNumber);
  gc->add_option("--inject-sign-flip", grad.flip, "Negate one term's analytic gradient")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*f) return cmd_fit(fit);
    if (*e) return cmd_eval(ev);
    if (*l) return cmd_lift(lift);
    if (*gc) return cmd_gradcheck(grad);
  } catch (const DivergenceError& err) {
    std::fprintf(stderr, "error: %s (step %d)\n", err.what(), err.step());
    return kDiverged;
  } catch (const CheckFailure& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kCheckFailed;
  } catch (const InvalidInput& err) {
    std::fprintf(stderr, "input error: %s\n", err.what());
    return kInputError;
  } catch (const InvalidConfiguration& err) {
    std::fprintf(stderr, "configuration error: %s\n", err.what());
    return kInputError;
  } catch (const fs::filesystem_error& err) {
    std::fprintf(stderr, "input error: %s\n", err.what());
    return kInputError;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kFailure;
  }
  return kOk;
}
