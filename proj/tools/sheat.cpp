#include "sheat/experiments.hpp"
#include "sheat/log.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace sheat;

namespace {

fs::path default_cache_dir() {
  if (const char* env = std::getenv("SHEAT_CACHE_DIR")) return env;
  return ".sheat-cache";
}

void print_summary(const RunManifest& m, const ExperimentResult& r) {
  const auto& s = m.spec;
  std::cout << "experiment  " << to_string(m.experiment) << "\n";
  std::cout << "spec        N=" << s.N << " m=" << s.m << " gamma=" << s.gamma << " alpha=" << s.alpha
            << " a=" << s.sign_a << "\n";
  std::cout << "grid        L=" << m.L << " n=" << m.n << "\n";
  for (auto it = r.summary.begin(); it != r.summary.end(); ++it) {
    const auto& k = it.key();
    if (k == "experiment" || k == "spec" || k == "grid" || k == "gates") continue;
    std::string v = it.value().dump();
    if (v.size() > 100) v = v.substr(0, 97) + "...";
    std::cout << k << std::string(k.size() < 12 ? 12 - k.size() : 1, ' ') << v << "\n";
  }
  for (auto& [name, ok] : r.gates) std::cout << (ok ? "PASS  " : "FAIL  ") << name << "\n";
  for (auto& a : r.artifacts) std::cout << "wrote       " << a.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for u_t = Δu + a|u|^α u with singular anti-symmetric data"};
  app.require_subcommand(1);
  int workers = 1;
  int verbosity = 0;
  std::string cache_dir = default_cache_dir().string();
  app.add_option("-w,--workers", workers, "worker threads (0 = all cores)");
  app.add_option("--cache-dir", cache_dir, "psi cache directory (env SHEAT_CACHE_DIR)");
  app.add_flag("-v,--verbose", verbosity, "more logging; repeat for debug");

  std::string manifest_path;
  auto* run = app.add_subcommand("run", "run the experiment described by a manifest");
  run->add_option("manifest", manifest_path, "manifest JSON")->required();
  auto* cache = app.add_subcommand("cache_build", "build and persist the psi cache for a manifest");
  cache->add_option("manifest", manifest_path, "manifest JSON")->required();
  std::string kind;
  auto* init = app.add_subcommand("init", "print a default manifest");
  init->add_option("experiment", kind, "experiment kind")->default_val("semigroup_checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }
  set_verbosity(verbosity);

  try {
    if (*init) {
      RunManifest m;
      m.experiment = experiment_from_string(kind);
      std::cout << to_json(m).dump(2) << "\n";
      return exit_ok;
    }
    RunManifest m = load_manifest(manifest_path);
    if (*cache) {
      PsiCache c = cache_build(m, cache_dir);
      std::cout << "C_inf       " << std::setprecision(12) << c.C_inf << "\n";
      std::cout << "wrote       " << (fs::path(cache_dir) / psi_cache_name(m.spec, m.cache)).string() << "\n";
      return exit_ok;
    }
    RunOptions o;
    o.workers = workers;
    o.cache_dir = cache_dir;
    ExperimentResult r = run_experiment(m, o);
    print_summary(m, r);
    return r.exit_code();
  } catch (const ManifestError& e) {
    std::cerr << "manifest error";
    if (e.line() > 0) std::cerr << " at line " << e.line();
    std::cerr << ", field '" << e.field() << "': " << e.what() << "\n";
    return exit_config;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_gate;
  }
}
