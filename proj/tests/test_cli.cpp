#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lanespline/io.hpp"

namespace fs = std::filesystem;
using lanespline::parse_json;
using lanespline::read_file;

namespace {

const fs::path& work() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("lanespline_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

// Runs the CLI with stdout and stderr captured; returns the exit status.
int run(const std::string& args, std::string* out = nullptr, const std::string& env = "") {
  const fs::path log = work() / "last.log";
  const std::string cmd = env + " \"" LANESPLINE_CLI "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  if (out) *out = read_file(log);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string p(const std::string& name) { return "\"" + (work() / name).string() + "\""; }

bool looks_like_svg(const std::string& s) {
  return s.find("<svg") != std::string::npos && s.find("xmlns=\"http://www.w3.org/2000/svg\"") != std::string::npos &&
         s.rfind("</svg>") != std::string::npos && s.rfind("</svg>") > s.find("<svg");
}

}  // namespace

TEST_CASE("gen-scene") {
  REQUIRE(run("gen-scene --seed 3 --out " + p("a.json")) == 0);
  REQUIRE(run("gen-scene --seed 3 --out " + p("b.json")) == 0);
  CHECK(read_file(work() / "a.json") == read_file(work() / "b.json"));
  const auto j = parse_json(read_file(work() / "a.json"));
  CHECK(j["lanes"].size() == 3);
  CHECK(run("gen-scene --spec " + p("missing_spec.json") + " --out " + p("c.json")) == 2);
  std::ofstream(work() / "bad_spec.json") << R"({"lane_width": -1})";
  CHECK(run("gen-scene --spec " + p("bad_spec.json") + " --out " + p("c.json")) == 2);
  std::ofstream(work() / "occ_spec.json")
      << R"({"n_lanes": 3, "occlusions": [[], [[50, 80]]], "noise": [0.05, 0.05, 0.02]})";
  CHECK(run("gen-scene --spec " + p("occ_spec.json") + " --seed 1 --out " + p("occ.json")) == 0);
}

TEST_CASE("fit") {
  REQUIRE(run("gen-scene --spec " + p("occ_spec.json") + " --seed 1 --out " + p("occ.json")) == 0);
  CHECK(run("fit --scene " + p("occ.json") + " --steps 0 --out " + p("r0.json")) == 2);
  CHECK(run("fit --scene " + p("nope.json") + " --steps 5 --out " + p("r0.json")) == 2);
  CHECK(run("fit --scene " + p("occ.json") + " --priors par,bogus --steps 5 --out " + p("r0.json")) == 2);
  REQUIRE(run("fit --scene " + p("occ.json") + " --priors none --steps 60 --out " + p("none.json")) == 0);
  REQUIRE(run("fit --scene " + p("occ.json") + " --priors par --steps 60 --out " + p("par.json") + " --plot " +
              p("par.svg")) == 0);
  REQUIRE(run("fit --scene " + p("occ.json") + " --priors par --steps 60 --out " + p("par2.json")) == 0);
  CHECK(read_file(work() / "par.json") == read_file(work() / "par2.json"));
  CHECK(read_file(work() / "par.json") != read_file(work() / "none.json"));
  CHECK(looks_like_svg(read_file(work() / "par.svg")));
  const auto j = parse_json(read_file(work() / "par.json"));
  CHECK(j["history"].size() == 60);
  CHECK(j["lanes"].size() == 3);
  CHECK(j["gradient_check"]["max_rel_err"].get<double>() < 1e-4);
}

TEST_CASE("fit divergence exits with 3") {
  REQUIRE(run("gen-scene --seed 2 --out " + p("d.json")) == 0);
  std::string out;
  CHECK(run("fit --scene " + p("d.json") + " --lr 1e9 --steps 20 --out " + p("dr.json"), &out) == 3);
  CHECK(out.find("step") != std::string::npos);
}

TEST_CASE("eval") {
  REQUIRE(run("gen-scene --seed 5 --out " + p("g.json")) == 0);
  REQUIRE(run("eval --pred " + p("g.json") + " --gt " + p("g.json") + " --out " + p("same.csv")) == 0);
  const std::string csv = read_file(work() / "same.csv");
  CHECK(csv.find(",100.000000,100.000000,100.000000,100.000000,0.000000,0.000000,0.000000,0.000000") !=
        std::string::npos);
  CHECK(csv.find("mean,all,100.000000") != std::string::npos);

  auto empty = parse_json(read_file(work() / "g.json"));
  empty["lanes"] = lanespline::Json::array();
  std::ofstream(work() / "empty.json") << lanespline::dump(empty);
  REQUIRE(run("eval --pred " + p("empty.json") + " --gt " + p("g.json") + " --out " + p("empty.csv")) == 0);
  CHECK(read_file(work() / "empty.csv").find("mean,all,0.000000") != std::string::npos);

  std::ofstream(work() / "broken.json") << R"({"version": "lanespline-scene/1", "lanes": [{"x": [1]}]})";
  CHECK(run("eval --pred " + p("broken.json") + " --gt " + p("g.json") + " --out " + p("x.csv")) == 2);
}

TEST_CASE("directory mode is deterministic across thread counts") {
  REQUIRE(run("gen-scene --spec " + p("occ_spec.json") + " --seed 10 --count 3 --out " + p("scenes")) == 0);
  CHECK(fs::exists(work() / "scenes" / "scene_0002.json"));
  REQUIRE(run("fit --scene " + p("scenes") + " --steps 30 --out " + p("fits1") + " --plot " + p("plots1"), nullptr,
              "LANECPP_THREADS=1") == 0);
  REQUIRE(run("fit --scene " + p("scenes") + " --steps 30 --out " + p("fits4"), nullptr, "LANECPP_THREADS=4") == 0);
  for (int i = 0; i < 3; ++i) {
    const std::string name = "scene_000" + std::to_string(i) + ".report.json";
    CHECK(read_file(work() / "fits1" / name) == read_file(work() / "fits4" / name));
  }
  CHECK(looks_like_svg(read_file(work() / "plots1" / "scene_0001.svg")));
  REQUIRE(run("eval --pred " + p("fits1") + " --gt " + p("scenes") + " --out " + p("dir.csv")) == 0);
  std::istringstream in(read_file(work() / "dir.csv"));
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 1 + 3 + 1);
}

TEST_CASE("lift-demo") {
  REQUIRE(run("gen-scene --seed 1 --out " + p("flat.json")) == 0);
  std::string out;
  REQUIRE(run("lift-demo --scene " + p("flat.json") + " --hypotheses 5 --depth onehot --out " + p("grid.json") +
                  " --plot " + p("grid.svg"),
              &out) == 0);
  CHECK(out.find("surface_loss") != std::string::npos);
  const auto g = parse_json(read_file(work() / "grid.json"));
  CHECK(g["surface_loss"].get<double>() < 1e-9);
  int valid = 0;
  for (std::size_t i = 0; i < g["valid"].size(); ++i) {
    if (g["valid"][i].get<int>() == 0) continue;
    ++valid;
    CHECK(std::abs(g["z"][i].get<double>()) < 1e-9);
  }
  CHECK(valid > 50);
  CHECK(looks_like_svg(read_file(work() / "grid.svg")));
  CHECK(run("lift-demo --scene " + p("flat.json") + " --hypotheses 4 --out " + p("g4.json")) == 2);
  CHECK(run("lift-demo --scene " + p("flat.json") + " --depth uniform --out " + p("gu.json")) == 0);
}

TEST_CASE("gradcheck") {
  std::string out;
  CHECK(run("gradcheck --seed 0 --states 2", &out) == 0);
  for (const char* term : {"presence", "category", "regression", "visibility", "prior", "surface"})
    CHECK(out.find(term) != std::string::npos);
  CHECK(run("gradcheck --states 1 --inject-sign-flip visibility", &out) == 4);
  CHECK(out.find("visibility") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run("") != 0);
  CHECK(run("no-such-command") == 2);
  CHECK(run("fit --steps 5") == 2);
}
