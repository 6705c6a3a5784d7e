#pragma once

#include "sheat/semigroup.hpp"

#include <memory>
#include <vector>

namespace sheat {

struct PicardConfig {
  double K = 1.0;
  double M = 2.0;
  double T = 0.0;
  int J = 32;
  // s_j = T (j/J)^p; p ≤ 0 selects 1/(1 − α(γ+m)/2).
  double grading = 0.0;
  int max_iterations = 80;
  double tolerance = 1e-10;
  bool keep_iterates = false;

  std::vector<double> mesh(const SectorSpec& spec) const;
};

/// M = 2K and the T with I(T) equal to 0.9 times the largest value allowed by
/// K + 2(α+1)M^{α+1} I ≤ M and 2(α+1)M^α I < 1.
struct Admissible {
  double M;
  double T;
  double I;
  double contraction_bound;  // 2(α+1)M^α I(T)
  double lipschitz_bound;    // 1/(1 − contraction_bound)
};
Admissible admissible_constants(const SectorSpec& spec, double C_inf, double K, double margin = 0.9);

struct PicardRun {
  PicardConfig config;
  SectorSpec spec;
  GridSpec grid;
  std::shared_ptr<const SingularProfile> profile;
  std::vector<double> times;
  std::vector<Field> linear;  // e^{s_j Δ}ψ
  std::vector<Field> slices;  // u(s_j)
  std::vector<std::vector<Field>> iterates;
  std::vector<double> iterate_norms;  // |||u^(k)|||
  std::vector<double> increments;     // |||u^(k+1) − u^(k)|||
  std::vector<double> contraction_ratios;
  double final_norm = 0.0;
  double max_contraction = 0.0;
  double contraction_bound = 0.0;
  double lipschitz_bound = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<Field> psi;  // Ψ(s_j) weights of the X_T norm
};

/// Product-integration weights on [a, b] for ∫ σ^{−β} ℓ(σ) dσ, where ℓ
/// interpolates σ^β G linearly; the first interval holds σ^β G constant.
std::pair<double, double> duhamel_weights(double a, double b, double beta);

/// One Duhamel evaluation at mesh index i (t = times[i]) by direct sum:
/// linear_i + a Σ_j w_ij e^{(t−s_j)Δ}(|u_j|^α u_j).
Field duhamel_step(const KernelPlan& plan, int i, const std::vector<double>& times,
                   const Field& linear_i, const std::vector<Field>& slices);

/// |||u||| = max_j sup |u(s_j)|/Ψ(s_j).
double xt_norm(const std::vector<Field>& u, const std::vector<Field>& psi);

/// Throws std::runtime_error if the measured ratio reaches 1.
PicardRun solve_picard(const KernelPlan& plan, const PsiCache& cache,
                       std::shared_ptr<const SingularProfile> profile, const PicardConfig& config);

struct LipschitzReport {
  double ratio;
  double data_distance;
  double solution_distance;
  double bound;
  bool within_bound;
};

/// |||u1 − u2||| / ‖ψ1 − ψ2‖_X with the X-norm sampled on the run grid.
LipschitzReport lipschitz_check(const PicardRun& a, const PicardRun& b, double slack = 0.05);

}  // namespace sheat
