#include "sheat/picard.hpp"

#include "sheat/log.hpp"
#include "sheat/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace sheat {

std::vector<double> PicardConfig::mesh(const SectorSpec& spec) const {
  if (!(T > 0.0) || J < 1) throw std::invalid_argument("Picard mesh needs T > 0 and J >= 1");
  const double p = grading > 0.0 ? grading : 1.0 / (1.0 - spec.beta());
  std::vector<double> s(J);
  for (int j = 1; j <= J; ++j) s[j - 1] = T * std::pow(static_cast<double>(j) / J, p);
  s.back() = T;
  return s;
}

Admissible admissible_constants(const SectorSpec& spec, double C_inf, double K, double margin) {
  if (!spec.subcritical())
    throw std::domain_error("admissible_constants needs alpha < 2/(gamma+m)");
  if (!(K > 0.0)) throw std::invalid_argument("admissible_constants needs K > 0");
  const double a = spec.alpha;
  const double M = 2.0 * K;
  const double IA = (M - K) / (2.0 * (a + 1.0) * std::pow(M, a + 1.0));
  const double IB = 1.0 / (2.0 * (a + 1.0) * std::pow(M, a));
  const double I = margin * std::min(IA, IB);
  const double b = spec.beta();
  const double T = std::pow(I * (1.0 - b) / std::pow(C_inf, a), 1.0 / (1.0 - b));
  Admissible r{M, T, I, 0.0, 0.0};
  r.contraction_bound = 2.0 * (a + 1.0) * std::pow(M, a) * I;
  r.lipschitz_bound = 1.0 / (1.0 - r.contraction_bound);
  return r;
}

std::pair<double, double> duhamel_weights(double a, double b, double beta) {
  if (a == 0.0) return {0.0, b / (1.0 - beta)};
  const double h = b - a;
  const double i1 = (std::pow(b, 1.0 - beta) - std::pow(a, 1.0 - beta)) / (1.0 - beta);
  const double i2 = (std::pow(b, 2.0 - beta) - std::pow(a, 2.0 - beta)) / (2.0 - beta);
  const double A = std::pow(a, beta) / h * (b * i1 - i2);
  const double B = std::pow(b, beta) / h * (i2 - a * i1);
  return {A, B};
}

namespace {

Eigen::ArrayXd nonlinearity(const Eigen::ArrayXd& u, double alpha) {
  return u.abs().pow(alpha) * u;
}

struct StepKernels {
  std::vector<Eigen::MatrixXd> axis;
};

Eigen::ArrayXd apply_step(const StepKernels& k, const GridSpec& g, const Eigen::ArrayXd& v) {
  auto ext = g.extents();
  Eigen::ArrayXd w = v;
  for (int a = 0; a < g.dim(); ++a) w = apply_along_axis<double>(k.axis[a], w, ext, a);
  return w;
}

}  // namespace

Field duhamel_step(const KernelPlan& plan, int i, const std::vector<double>& times, const Field& linear_i,
                   const std::vector<Field>& slices) {
  const auto& spec = plan.spec();
  if (i < 0 || i >= static_cast<int>(times.size()) || slices.size() < static_cast<std::size_t>(i + 1))
    throw std::invalid_argument("duhamel_step: slices do not cover (0, t)");
  if (spec.beta() >= 1.0) throw std::domain_error("duhamel_step: time singularity is not integrable");
  const double t = times[i];
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(linear_i.values().size());
  auto add = [&](int j, double w) {
    if (w == 0.0) return;
    Field F = slices[j].with_values(nonlinearity(slices[j].values(), spec.alpha));
    double lag = t - times[j];
    acc += w * (lag > 0.0 ? apply_kernel(plan, lag, F).values() : F.values());
  };
  for (int j = 0; j <= i; ++j) {
    double a = j == 0 ? 0.0 : times[j - 1];
    auto [A, B] = duhamel_weights(a, times[j], spec.beta());
    if (j > 0) add(j - 1, A);
    add(j, B);
  }
  return linear_i.with_values(linear_i.values() + spec.sign_a * acc, t);
}

double xt_norm(const std::vector<Field>& u, const std::vector<Field>& psi) {
  double m = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) m = std::max(m, weighted_sup_ratio(u[j], psi[j]));
  return m;
}

PicardRun solve_picard(const KernelPlan& plan, const PsiCache& cache,
                       std::shared_ptr<const SingularProfile> profile, const PicardConfig& config) {
  const auto& spec = plan.spec();
  const auto& g = plan.grid();
  if (!spec.subcritical()) throw std::domain_error("solve_picard needs alpha < 2/(gamma+m)");
  if (profile->x_norm_bound() > config.K * (1.0 + 1e-12))
    throw std::invalid_argument("solve_picard: profile X-norm exceeds K");
  PicardRun run;
  run.config = config;
  run.spec = spec;
  run.grid = g;
  run.profile = profile;
  run.times = config.mesh(spec);
  const int J = static_cast<int>(run.times.size());
  const double beta = spec.beta();
  const double I = alpha_time_integral(cache, config.T);
  run.contraction_bound = 2.0 * (spec.alpha + 1.0) * std::pow(config.M, spec.alpha) * I;
  run.lipschitz_bound = run.contraction_bound < 1.0 ? 1.0 / (1.0 - run.contraction_bound)
                                                    : std::numeric_limits<double>::infinity();

  std::vector<StepKernels> K(J);
  std::vector<std::pair<double, double>> W(J);
  for (int j = 0; j < J; ++j) {
    double a = j == 0 ? 0.0 : run.times[j - 1];
    W[j] = duhamel_weights(a, run.times[j], beta);
    if (j > 0)
      for (int ax = 0; ax < g.dim(); ++ax) K[j].axis.push_back(hat_kernel_matrix(g, ax, run.times[j] - a));
    run.psi.push_back(psi_fast(cache, run.times[j], g));
    run.linear.push_back(apply_kernel(plan, run.times[j], *profile));
  }

  std::vector<Field> u = run.linear;
  run.iterate_norms.push_back(xt_norm(u, run.psi));
  if (config.keep_iterates) run.iterates.push_back(u);
  double prev_inc = 0.0;
  for (int k = 0; k < config.max_iterations; ++k) {
    std::vector<Field> next;
    Eigen::ArrayXd D;
    Eigen::ArrayXd Fprev;
    for (int j = 0; j < J; ++j) {
      Eigen::ArrayXd F = nonlinearity(u[j].values(), spec.alpha);
      if (j == 0) {
        D = W[0].second * F;
      } else {
        D = apply_step(K[j], g, D + W[j].first * Fprev) + W[j].second * F;
      }
      Fprev = std::move(F);
      next.push_back(u[j].with_values(run.linear[j].values() + spec.sign_a * D, run.times[j]));
    }
    std::vector<Field> diff;
    for (int j = 0; j < J; ++j) diff.push_back(next[j].with_values(next[j].values() - u[j].values()));
    const double inc = xt_norm(diff, run.psi);
    u = std::move(next);
    run.increments.push_back(inc);
    run.iterate_norms.push_back(xt_norm(u, run.psi));
    if (config.keep_iterates) run.iterates.push_back(u);
    run.iterations = k + 1;
    if (prev_inc > 0.0 && inc > 1e3 * std::numeric_limits<double>::epsilon() * run.iterate_norms.back()) {
      double ratio = inc / prev_inc;
      run.contraction_ratios.push_back(ratio);
      run.max_contraction = std::max(run.max_contraction, ratio);
      if (ratio >= 1.0 && k >= 2)
        throw std::runtime_error("solve_picard: iteration is not contracting (ratio " + std::to_string(ratio) +
                                 " at sweep " + std::to_string(k + 1) +
                                 "); refine the grid or the time mesh");
    }
    prev_inc = inc;
    if (inc < config.tolerance) {
      run.converged = true;
      break;
    }
  }
  run.slices = std::move(u);
  run.final_norm = run.iterate_norms.back();
  if (!run.converged)
    log().warn("solve_picard: no convergence after {} sweeps (last increment {:.3e})", run.iterations,
               run.increments.empty() ? 0.0 : run.increments.back());
  return run;
}

LipschitzReport lipschitz_check(const PicardRun& a, const PicardRun& b, double slack) {
  if (!(a.grid == b.grid) || a.times != b.times || !(a.spec == b.spec))
    throw std::invalid_argument("lipschitz_check: runs do not share a configuration");
  auto psi0 = std::make_shared<const SingularProfile>(a.spec, ProfileDescriptor{});
  Field w = sample(a.spec, a.grid, psi0);
  Field fa = sample(a.spec, a.grid, a.profile);
  Field fb = sample(a.spec, a.grid, b.profile);
  const double dd = weighted_sup_ratio(fa.with_values(fa.values() - fb.values()), w);
  if (dd == 0.0) throw std::invalid_argument("lipschitz_check: identical data");
  std::vector<Field> diff;
  for (std::size_t j = 0; j < a.slices.size(); ++j)
    diff.push_back(a.slices[j].with_values(a.slices[j].values() - b.slices[j].values()));
  const double sd = xt_norm(diff, a.psi);
  LipschitzReport r{sd / dd, dd, sd, a.lipschitz_bound, false};
  r.within_bound = r.ratio <= r.bound * (1.0 + slack);
  return r;
}

}  // namespace sheat
