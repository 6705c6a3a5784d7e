#include "sheat/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>

using namespace sheat;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("sheat_test_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("field binary round trip") {
  SectorSpec s{2, 1, 1.0, 0.5, -1};
  GridSpec g = GridSpec::for_sector(s, 3.0, 6);
  Eigen::ArrayXd v = Eigen::ArrayXd::LinSpaced(g.size(), -1.0, 2.0);
  Field f(s, g, v, 0.125);
  auto p = scratch("f.bin");
  write_field_binary(p, f);
  Field back = read_field_binary(p);
  CHECK(back.spec() == s);
  CHECK(back.grid() == g);
  CHECK((back.values() - v).abs().maxCoeff() == 0.0);
  REQUIRE(back.time_tag());
  CHECK(*back.time_tag() == 0.125);
  // header (4 + 4 + 4+4+8+8+4 + 4+8 + 2 + 1+8 + 8) then values
  CHECK(fs::file_size(p) == 4 + 4 + 28 + 12 + 2 + 9 + 8 + 8 * static_cast<std::size_t>(g.size()));

  Field untimed(s, g, v);
  write_field_binary(p, untimed);
  CHECK_FALSE(read_field_binary(p).time_tag());

  std::ofstream(p, std::ios::binary) << "JUNKJUNKJUNK";
  CHECK_THROWS(read_field_binary(p));
}

TEST_CASE("field csv") {
  SectorSpec s{1, 1, 0.5, 0.5, 1};
  GridSpec g = GridSpec::for_sector(s, 2.0, 3);
  auto p = scratch("f.csv");
  write_field_csv(p, Field(s, g, Eigen::ArrayXd::Constant(3, 0.25)));
  std::ifstream in(p);
  std::string header, cols, row;
  std::getline(in, header);
  std::getline(in, cols);
  std::getline(in, row);
  CHECK(header.rfind("# N=1 m=1", 0) == 0);
  CHECK(header.find("axes=antisymmetric") != std::string::npos);
  CHECK(cols == "x0,value");
  CHECK(row.find(",0.25") != std::string::npos);
}

TEST_CASE("psi cache persistence") {
  SectorSpec s{1, 1, 0.5, 0.5, 1};
  PsiCacheOptions o;
  o.radius = 6.0;
  o.h = 0.1;
  PsiCache c = build_psi_cache(s, o);
  auto p = scratch("c.bin");
  save_psi_cache(p, c);
  PsiCache back = load_psi_cache(p);
  CHECK(back.spec == s);
  CHECK(back.options == o);
  CHECK(back.C_inf == c.C_inf);
  CHECK((back.E - c.E).abs().maxCoeff() == 0.0);

  // a rebuild writes the same bytes
  auto p2 = scratch("c2.bin");
  save_psi_cache(p2, build_psi_cache(s, o));
  CHECK(slurp(p) == slurp(p2));

  std::string bytes = slurp(p);
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(p, std::ios::binary) << bytes;
  CHECK_THROWS_WITH(load_psi_cache(p), doctest::Contains("checksum mismatch"));

  bytes = slurp(p2);
  std::ofstream(p, std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS(load_psi_cache(p));
}

TEST_CASE("cache names ignore alpha and the sign") {
  PsiCacheOptions o;
  CHECK(psi_cache_name({1, 1, 0.5, 0.5, 1}, o) == psi_cache_name({1, 1, 0.5, 3.0, -1}, o));
  CHECK(psi_cache_name({1, 1, 0.5, 0.5, 1}, o) != psi_cache_name({1, 1, 0.6, 0.5, 1}, o));
  PsiCacheOptions o2 = o;
  o2.h = 0.05;
  CHECK(psi_cache_name({1, 1, 0.5, 0.5, 1}, o) != psi_cache_name({1, 1, 0.5, 0.5, 1}, o2));
  CHECK(psi_cache_name({2, 1, 1.0, 0.5, 1}, o).rfind("psi_N2_m1_", 0) == 0);
}

TEST_CASE("cached_psi builds once and reloads") {
  SectorSpec s{1, 0, 0.5, 1.0, 1};
  PsiCacheOptions o;
  o.radius = 5.0;
  o.h = 0.1;
  fs::path dir = scratch("cache_dir");
  fs::remove_all(dir);
  PsiCache a = cached_psi(s, o, dir);
  fs::path file = dir / psi_cache_name(s, o);
  REQUIRE(fs::exists(file));
  auto stamp = fs::last_write_time(file);
  PsiCache b = cached_psi(s, o, dir);
  CHECK(fs::last_write_time(file) == stamp);
  CHECK(a.C_inf == b.C_inf);
  CHECK(psi_cache_refinement_gap(a) < 1e-7);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("", 0) == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar", 6) == 0x85944171f73967e8ull);
}

TEST_CASE("manifest round trip") {
  RunManifest m;
  m.experiment = Experiment::sweep;
  m.spec = {2, 1, 1.0, 0.5, -1};
  m.axes = {AxisKind::antisymmetric, AxisKind::symmetric};
  m.profile.kind = ProfileKind::modulated_psi0;
  m.profile.modulation = Modulation::blocks;
  m.lambdas = {0.25, 4.0};
  m.sweep_mode = SweepMode::rescaled;
  m.controls.start = StartMode::direct;
  m.two_limit.indices = {2, 4, 6};
  m.two_limit.run_control = false;
  m.seed = 99;
  std::string text = to_json(m).dump(2);
  RunManifest back = parse_manifest(text);
  CHECK(same_manifest(m, back));
  CHECK(back.grid().axes == m.axes);
  CHECK(back.two_limit.indices == std::vector<int>{2, 4, 6});
  CHECK_FALSE(back.two_limit.run_control);

  RunManifest partial = parse_manifest(R"({"experiment": "picard", "spec": {"alpha": 0.25}})");
  CHECK(partial.experiment == Experiment::picard);
  CHECK(partial.spec.alpha == 0.25);
  CHECK(partial.spec.N == 1);
  CHECK(partial.n == RunManifest{}.n);
}

TEST_CASE("manifest diagnostics name the field and line") {
  auto err = [](const std::string& text) -> ManifestError {
    try {
      parse_manifest(text);
    } catch (const ManifestError& e) {
      return e;
    }
    FAIL("no error");
    return ManifestError("", 0, "");
  };
  ManifestError e1 = err("{\n  \"spec\": {\n    \"N\": 2,\n    \"gama\": 1.0\n  }\n}");
  CHECK(e1.field() == "spec.gama");
  CHECK(e1.line() == 4);

  ManifestError e2 = err("{\n  \"grid\": {\"n\": \"many\"}\n}");
  CHECK(e2.field() == "grid.n");
  CHECK(e2.line() == 2);

  ManifestError e3 = err("{\n  \"lambdas\": [1, 2,\n}");
  CHECK(e3.field() == "<syntax>");
  CHECK(e3.line() == 3);

  ManifestError e4 = err(R"({"spec": {"N": 1, "gamma": 1.5}})");
  CHECK(e4.field().rfind("spec", 0) == 0);

  ManifestError e5 = err(R"({"profile": {"kind": "custom"}})");
  CHECK(e5.field() == "profile.kind");

  ManifestError e6 = err(R"({"two_limit": {"control": 1}})");
  CHECK(e6.field() == "two_limit.control");

  CHECK_THROWS_AS(load_manifest(scratch("missing.json")), ManifestError);
}

TEST_CASE("trajectory and sweep artifacts") {
  TrajectoryRecord rec;
  rec.times = {0.0, 0.5, 0.9};
  rec.sup_norms = {1.0, 2.0, 10.0};
  rec.steps = {0.0, 0.5, 0.4};
  rec.status = TrajectoryStatus::blew_up;
  rec.tmax = 1.0;
  auto p = scratch("t.csv");
  write_trajectory_csv(p, rec);
  std::ifstream in(p);
  std::string line;
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 4);
  CHECK(last.find("blew_up") != std::string::npos);
  auto j = to_json(rec);
  CHECK(j["status"] == "blew_up");
  CHECK(j["tmax"] == 1.0);
}
