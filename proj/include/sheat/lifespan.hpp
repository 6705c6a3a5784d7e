#pragma once

#include "sheat/evolve.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sheat {

/// Runs fn(i) for i in [0, count) on a pool of workers; each index is owned
/// by exactly one worker. Rethrows the first exception.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

enum class SweepMode { direct, rescaled };

struct LifespanEntry {
  double lambda = 0.0;
  TrajectoryStatus status = TrajectoryStatus::inconclusive;
  double tmax = 0.0;
  double uncertainty = 0.0;
  double scaled = 0.0;  // λ^σ T_max
  double fit_residual = 0.0;
  bool included = false;
  std::string note;
};

struct LifespanCurve {
  SectorSpec spec;
  ProfileDescriptor profile;
  double sigma = 0.0;
  SweepMode mode = SweepMode::direct;
  std::vector<LifespanEntry> entries;
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool monotone = true;
  bool fujita_consistent = true;
  int excluded = 0;
};

/// T_max(λf) for each λ. In rescaled mode the run uses the equivalent datum
/// τ^{−(γ+m)/2} f(·/√τ) with τ = λ^σ, whose life span is λ^σ T_max(λf).
LifespanCurve sweep_lifespan(const SectorSpec& spec, const GridSpec& grid, const PsiCache* cache,
                             const SingularProfile& profile, const std::vector<double>& lambdas,
                             const TmaxControls& controls, int workers = 1, SweepMode mode = SweepMode::direct);

struct Annulus {
  double r_in = 1.0;
  double r_out = 23.140692632779267;  // e^π
  int samples = 96;
};

struct DilationProbe {
  ProfileDescriptor profile;
  std::vector<double> lambdas;
  std::vector<Point> nodes;
  double cell_volume = 0.0;
  std::vector<Eigen::ArrayXd> probes;  // λ^{γ+m} f(λx) on the nodes
  Eigen::MatrixXd distances;           // grid-L¹ over the annulus
  std::vector<double> l1_norms;
  double psi0_l1 = 0.0;
  double ball_ratio = 0.0;  // max |probe| / ψ0
  bool converged = false;
  bool vanishing = false;
  std::vector<std::pair<int, int>> recurrences;
  std::vector<double> orbit_errors;  // modulated profiles: max |probe − z_{s}|/ψ0
};

DilationProbe dilation_limits(const SingularProfile& profile, const std::vector<double>& lambdas,
                              const Annulus& annulus = {}, double tolerance = 1e-6);

enum class Prediction { blowup_predicted, undetermined };
std::string to_string(Prediction p);

struct CriterionVerdict {
  Prediction prediction = Prediction::undetermined;
  std::string regime;
  double l1 = 0.0;
  double heat_sup = std::numeric_limits<double>::quiet_NaN();
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, bool>> gates;
};

/// Verdict of the blow-up criterion for a dilation limit z ≥ 0 on Ω.
CriterionVerdict blowup_criterion_check(const KernelPlan& plan, const Field& z, double l1_tolerance = 1e-10);

struct Subsequence {
  double phase = 0.0;
  std::vector<double> lambdas;
  std::vector<double> scaled;
  std::vector<double> uncertainties;
  std::vector<TrajectoryStatus> statuses;
  double limit = 0.0;
  double uncertainty = 0.0;
};

struct TwoLimitOptions {
  Modulation family = Modulation::sin2;
  double amplitude = 1.0;
  double epsilon = 0.1;
  double c1 = 1.0;
  double c2 = 2.0;
  double period = 3.14159265358979323846;
  double ramp = 0.25;
  double core = 1.0;
  std::vector<int> indices{1, 2, 3};
  bool run_control = true;
  int workers = 1;
  TmaxControls controls{};
};

struct TwoLimitReport {
  Subsequence A, B, control_A, control_B;
  double gap = 0.0;
  double combined_uncertainty = 0.0;
  bool separated = false;
  double control_gap = 0.0;
  double control_uncertainty = 0.0;
  bool control_separated = false;
  double T_psi0 = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool bracketed = false;
  bool valid = true;
  std::vector<std::pair<std::string, bool>> gates;
};

/// Scaled life spans along two subsequences λ_n = μ_n^{−(2/α−γ−m)} whose
/// rescaled data are two different phases of a log-periodic profile.
TwoLimitReport two_limit_experiment(const SectorSpec& spec, const GridSpec& grid, const PsiCache& cache,
                                    const TwoLimitOptions& options);

struct SmallnessOptions {
  double t0 = 0.5;
  double fraction = 0.5;  // λ as a fraction of the threshold
  double horizon_factor = 100.0;
  TmaxControls controls{};
};

struct SmallnessReport {
  double I_inf = 0.0;
  double threshold = 0.0;
  double lambda = 0.0;
  double M = 0.0;
  double max_ratio = 0.0;  // max |u(t)| / (M Ψ(t+t0))
  bool violated = false;
  double violation_time = 0.0;
  Eigen::Index violation_node = -1;
  TrajectoryStatus status = TrajectoryStatus::inconclusive;
  double horizon = 0.0;
  std::size_t steps = 0;
};

/// Evolves λΨ(t0) (or λ·data when given) and checks |u(t)| ≤ M Ψ(t+t0).
SmallnessReport global_smallness_check(const SectorSpec& spec, const GridSpec& grid,
                                       std::shared_ptr<const PsiCache> cache, const SmallnessOptions& options,
                                       std::shared_ptr<const SingularProfile> data = nullptr);

struct NonexistenceSignature {
  std::vector<double> t0;
  std::vector<double> ratio;  // ‖c e^{t0Δ}ψ0‖ / (α t0)^{−1/α}
  bool detected = false;
};

/// Lower bound ‖u(t0)‖ ≥ c‖Ψ(t0)‖ against the a-priori bound (αt0)^{−1/α}.
NonexistenceSignature nonexistence_signature(const SectorSpec& spec, double C_inf, double c,
                                             const std::vector<double>& t0);

}  // namespace sheat
