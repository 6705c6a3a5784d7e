#pragma once

#include "sheat/picard.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace sheat {

struct BlowupSignal {
  Eigen::Index node;
  // Exact time left before the scalar flow blows up at that node.
  double remainder;
};

/// Exact flow of u' = a|u|^α u over dt, nodewise.
std::variant<Eigen::ArrayXd, BlowupSignal> nonlinear_flow(const Eigen::ArrayXd& u, double dt, int a,
                                                          double alpha);
std::variant<Field, BlowupSignal> nonlinear_substep(const Field& f, double dt, int a, double alpha);

/// Half nonlinear step, spectral heat step, half nonlinear step.
std::variant<Field, BlowupSignal> strang_step(const KernelPlan& plan, const Field& f, double dt);

enum class TrajectoryStatus { global_horizon_reached, blew_up, inconclusive };
enum class StartMode { automatic, picard, direct };

std::string to_string(TrajectoryStatus s);
std::string to_string(StartMode s);
StartMode start_mode_from_string(const std::string& s);

struct TmaxControls {
  double c_step = 1.0;
  double safety = 1.0;             // dt ≤ c_step · safety · h²
  double reaction_fraction = 0.1;  // dt ≤ c_step · fraction / (α‖u‖^α)
  double cap = 1e8;
  double residual_gate = 0.02;
  double horizon = 1e3;
  double handoff_fraction = 0.01;
  // The handoff time is raised to (resolution_factor · h)² when smaller.
  double resolution_factor = 2.0;
  int picard_J = 24;
  double picard_tolerance = 1e-10;
  StartMode start = StartMode::automatic;
  long max_steps = 5'000'000;
  int max_retries = 60;
  // Called after the start and after every accepted step; false stops the run.
  std::function<bool(double, const Field&)> observer;
};

struct PicardSummary {
  double K = 0.0, M = 0.0, T_picard = 0.0, t0 = 0.0;
  int iterations = 0;
  double final_norm = 0.0;
  double max_contraction = 0.0;
  bool converged = false;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> sup_norms;
  std::vector<double> steps;
  TrajectoryStatus status = TrajectoryStatus::inconclusive;
  double tmax = std::numeric_limits<double>::infinity();
  double uncertainty = 0.0;
  double tmax_fit = std::numeric_limits<double>::quiet_NaN();
  double fit_residual = std::numeric_limits<double>::quiet_NaN();
  double rate_deviation = std::numeric_limits<double>::quiet_NaN();
  int fit_window = 0;
  bool extrapolation_unjustified = false;
  bool handoff_underresolved = false;
  std::optional<PicardSummary> picard;
  std::string note;
  std::optional<Field> final_field;

  double tmax_lo() const { return tmax - uncertainty; }
  double tmax_hi() const { return tmax + uncertainty; }
};

/// Picard on (0, t0] for data unbounded at the origin, direct start
/// otherwise, then adaptive Strang steps until blow-up, the horizon, or a
/// stop. cache may be null for a direct start.
TrajectoryRecord estimate_tmax(const SectorSpec& spec, const GridSpec& grid, const PsiCache* cache,
                               std::shared_ptr<const SingularProfile> profile, const TmaxControls& controls);

/// Type-I extrapolation from a (t, ‖u‖) history; fills the tmax fields.
void fit_type_one(TrajectoryRecord& rec, double alpha, double residual_gate);

/// Blow-up time 1/(α c^α) of u' = |u|^α u started at c.
inline double ode_blowup_time(double c, double alpha) { return 1.0 / (alpha * std::pow(std::abs(c), alpha)); }

}  // namespace sheat
