#pragma once

#include "sheat/lifespan.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace sheat {

namespace fs = std::filesystem;

/// Field binary layout, all little-endian:
///   "SHFD" | u32 version=1 | i32 N | i32 m | f64 gamma | f64 alpha | i32 a
///   | i32 n | f64 L | u8 axis kind × N | u8 has_time | f64 time
///   | u64 count | f64 × count (row-major, axis 0 slowest)
void write_field_binary(const fs::path& path, const Field& f);
Field read_field_binary(const fs::path& path);

/// "# N=.. m=.. gamma=.. alpha=.. a=.. n=.. L=.. axes=.." then x0,..,value rows.
void write_field_csv(const fs::path& path, const Field& f);

/// Cache layout: "SHPC" | u32 version=1 | spec | radius, h | quadrature
/// knobs | grid | C_inf | u64 count | f64 × count | u64 FNV-1a of all
/// preceding bytes.
void save_psi_cache(const fs::path& path, const PsiCache& cache);
PsiCache load_psi_cache(const fs::path& path);
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ull);
/// Deterministic file name keyed on spec and options.
std::string psi_cache_name(const SectorSpec& spec, const PsiCacheOptions& options);

/// Relative change of C_inf when the quadrature near the origin is refined.
double psi_cache_refinement_gap(const PsiCache& cache);

/// Loads a matching cache from dir, or builds and saves it.
PsiCache cached_psi(const SectorSpec& spec, const PsiCacheOptions& options, const fs::path& dir);

class ManifestError : public std::runtime_error {
 public:
  ManifestError(const std::string& msg, int line, std::string field)
      : std::runtime_error(msg), line_(line), field_(std::move(field)) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class Experiment { semigroup_checks, picard, tmax, sweep, dilation, criteria, two_limit, global_smallness };
std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct RunManifest {
  Experiment experiment = Experiment::semigroup_checks;
  SectorSpec spec{1, 1, 0.5, 0.5, 1};
  double L = 20.0;
  int n = 256;
  std::vector<AxisKind> axes;  // empty: anti-symmetric for i < m, symmetric otherwise
  ProfileDescriptor profile{};
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  SweepMode sweep_mode = SweepMode::direct;
  std::vector<double> times{0.25, 1.0, 4.0};
  TmaxControls controls{};
  PsiCacheOptions cache{};
  // picard
  double K = 1.0;
  int J = 32;
  // dilation
  Annulus annulus{};
  double probe_tolerance = 1e-6;
  // two_limit
  TwoLimitOptions two_limit{};
  // global_smallness
  SmallnessOptions smallness{};
  // semigroup_checks gates
  double agreement_tolerance = 1e-3;
  double law_tolerance = 5e-3;
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  GridSpec grid() const;
  void validate() const;
};

nlohmann::ordered_json to_json(const RunManifest& m);
/// Throws ManifestError naming the offending field; text gives line numbers.
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest parse_manifest(const std::string& text);
RunManifest load_manifest(const fs::path& path);
bool same_manifest(const RunManifest& a, const RunManifest& b);

/// t, sup_norm, dt rows plus a status column on the last row.
void write_trajectory_csv(const fs::path& path, const TrajectoryRecord& rec);
nlohmann::ordered_json to_json(const TrajectoryRecord& rec);
void write_sweep_csv(const fs::path& path, const LifespanCurve& curve);
nlohmann::ordered_json to_json(const LifespanCurve& curve);
void write_json(const fs::path& path, const nlohmann::ordered_json& j);

}  // namespace sheat
