#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

fs::path workdir() {
  static fs::path d = [] {
    fs::path p = fs::temp_directory_path() / ("sheat_test_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

Result sheat(const std::string& args) {
  std::string cmd = "cd '" + workdir().string() + "' && '" SHEAT_CLI "' --cache-dir cache " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  Result r{0, {}};
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void write(const std::string& name, const std::string& text) { std::ofstream(workdir() / name) << text; }

}  // namespace

TEST_CASE("init prints a manifest that runs") {
  Result init = sheat("init semigroup_checks");
  REQUIRE(init.code == 0);
  auto j = nlohmann::json::parse(init.out);
  CHECK(j["experiment"] == "semigroup_checks");
  j["output_dir"] = "out_checks";
  write("checks.json", j.dump(2));
  Result run = sheat("run checks.json");
  CHECK(run.code == 0);
  CHECK(run.out.find("PASS") != std::string::npos);
  CHECK(run.out.find("FAIL") == std::string::npos);
  CHECK(fs::exists(workdir() / "out_checks" / "summary.json"));
  CHECK(fs::exists(workdir() / "out_checks" / "manifest.json"));
}

TEST_CASE("configuration errors exit 2") {
  write("typo.json", "{\n  \"spec\": {\"N\": 1, \"alhpa\": 2}\n}");
  Result r = sheat("run typo.json");
  CHECK(r.code == 2);
  CHECK(r.out.find("spec.alhpa") != std::string::npos);
  CHECK(r.out.find("line 2") != std::string::npos);

  write("bad.json", R"({"spec": {"N": 1, "m": 0, "gamma": 2.0}})");
  CHECK(sheat("run bad.json").code == 2);

  CHECK(sheat("run does_not_exist.json").code == 2);
  CHECK(sheat("init no_such_experiment").code == 2);
}

TEST_CASE("tmax run writes a trajectory") {
  write("tmax.json", R"({
  "experiment": "tmax",
  "spec": {"N": 1, "m": 1, "gamma": 0.5, "alpha": 1.0, "a": 1},
  "grid": {"L": 12, "n": 64},
  "profile": {"kind": "gaussian_derivative", "amplitude": 20.0},
  "output_dir": "out_tmax"
})");
  Result r = sheat("run tmax.json");
  CHECK(r.code == 0);
  CHECK(fs::exists(workdir() / "out_tmax" / "trajectory.csv"));
  std::ifstream in(workdir() / "out_tmax" / "summary.json");
  auto s = nlohmann::json::parse(in);
  CHECK(s["trajectory"]["status"] == "blew_up");
}
