#include "sheat/lifespan.hpp"

#include "sheat/log.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace sheat {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<int>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

struct RunOutcome {
  TrajectoryStatus status = TrajectoryStatus::inconclusive;
  double tmax = 0.0;
  double uncertainty = 0.0;
  double fit_residual = 0.0;
  std::string note;
};

RunOutcome run_one(const SectorSpec& spec, const GridSpec& grid, const PsiCache* cache,
                   std::shared_ptr<const SingularProfile> p, const TmaxControls& controls) {
  RunOutcome o;
  try {
    TrajectoryRecord rec = estimate_tmax(spec, grid, cache, std::move(p), controls);
    o.status = rec.status;
    o.tmax = rec.tmax;
    o.uncertainty = rec.uncertainty;
    o.fit_residual = rec.fit_residual;
    o.note = rec.note;
  } catch (const std::exception& e) {
    o.note = e.what();
  }
  return o;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

LifespanCurve sweep_lifespan(const SectorSpec& spec, const GridSpec& grid, const PsiCache* cache,
                             const SingularProfile& profile, const std::vector<double>& lambdas,
                             const TmaxControls& controls, int workers, SweepMode mode) {
  if (lambdas.empty()) throw std::invalid_argument("sweep_lifespan: empty lambda grid");
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::invalid_argument("sweep_lifespan: lambdas must be positive");
  LifespanCurve curve;
  curve.spec = spec;
  curve.profile = profile.descriptor();
  curve.sigma = spec.sigma();
  curve.mode = mode;
  if (mode == SweepMode::rescaled && !std::isfinite(curve.sigma))
    throw std::domain_error("sweep_lifespan: rescaled mode needs a finite sigma");
  curve.entries.resize(lambdas.size());

  parallel_for(lambdas.size(), workers, [&](std::size_t i) {
    const double lam = lambdas[i];
    const double ls = std::isfinite(curve.sigma) ? std::pow(lam, curve.sigma) : 1.0;
    auto p = std::make_shared<const SingularProfile>(mode == SweepMode::direct ? profile.scaled(lam)
                                                                              : profile.rescaled(ls));
    RunOutcome o = run_one(spec, grid, cache, p, controls);
    LifespanEntry& e = curve.entries[i];
    e.lambda = lam;
    e.status = o.status;
    e.fit_residual = o.fit_residual;
    e.note = o.note;
    if (mode == SweepMode::direct) {
      e.tmax = o.tmax;
      e.uncertainty = o.uncertainty;
      e.scaled = ls * o.tmax;
    } else {
      e.scaled = o.tmax;
      e.tmax = o.tmax / ls;
      e.uncertainty = o.uncertainty / ls;
    }
    e.included = o.status == TrajectoryStatus::blew_up;
  });

  std::vector<double> lx, ly;
  for (auto& e : curve.entries) {
    if (!e.included) {
      ++curve.excluded;
      log().info("sweep_lifespan: lambda {} excluded ({}: {})", e.lambda, to_string(e.status), e.note);
      continue;
    }
    lx.push_back(std::log(e.lambda));
    ly.push_back(std::log(e.tmax));
  }
  if (lx.size() >= 2) curve.slope = least_squares_slope(lx, ly);

  std::vector<const LifespanEntry*> sorted;
  for (auto& e : curve.entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->lambda < b->lambda; });
  if (profile.nonnegative()) {
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const auto& lo = *sorted[i];
      const auto& hi = *sorted[i + 1];
      if (lo.status == TrajectoryStatus::inconclusive || hi.status == TrajectoryStatus::inconclusive) continue;
      if (lo.status == TrajectoryStatus::blew_up && hi.status == TrajectoryStatus::global_horizon_reached)
        curve.monotone = false;
      if (lo.included && hi.included && hi.tmax > lo.tmax + lo.uncertainty + hi.uncertainty + 1e-9 * lo.tmax)
        curve.monotone = false;
    }
    if (spec.sign_a > 0 && spec.alpha <= 2.0 / (spec.N + spec.m))
      for (auto& e : curve.entries)
        if (e.status == TrajectoryStatus::global_horizon_reached) curve.fujita_consistent = false;
  }
  if (!curve.monotone) log().warn("sweep_lifespan: T_max is not non-increasing in lambda");
  if (!curve.fujita_consistent)
    log().warn("sweep_lifespan: a point reached the horizon inside the Fujita range; raise the horizon");
  return curve;
}

DilationProbe dilation_limits(const SingularProfile& profile, const std::vector<double>& lambdas,
                              const Annulus& annulus, double tolerance) {
  const SectorSpec& spec = profile.spec();
  if (!(annulus.r_in > 0.0) || !(annulus.r_out > annulus.r_in) || annulus.samples < 2)
    throw std::invalid_argument("dilation_limits: bad annulus");
  DilationProbe d;
  d.profile = profile.descriptor();
  d.lambdas = lambdas;
  const GridSpec g = GridSpec::for_sector(spec, annulus.r_out, annulus.samples);
  d.cell_volume = 1.0;
  for (int a = 0; a < g.dim(); ++a) d.cell_volume *= g.spacing(a);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    Point x = g.point(k);
    double r = norm2(std::span<const double>(x.data(), spec.N));
    if (r > annulus.r_in && r < annulus.r_out) d.nodes.push_back(x);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(d.nodes.size());
  Eigen::ArrayXd w(n);
  for (Eigen::Index k = 0; k < n; ++k) w[k] = eval_psi0(spec, std::span<const double>(d.nodes[k].data(), spec.N));
  d.psi0_l1 = w.sum() * d.cell_volume;

  const double deg = spec.homogeneity();
  const bool modulated = profile.kind() == ProfileKind::modulated_psi0;
  for (double lam : lambdas) {
    Eigen::ArrayXd v(n);
    const double s = std::pow(lam, deg);
    for (Eigen::Index k = 0; k < n; ++k) {
      Point y = d.nodes[k];
      for (int i = 0; i < spec.N; ++i) y[i] *= lam;
      v[k] = s * profile(y);
    }
    d.ball_ratio = std::max(d.ball_ratio, (v.abs() / w).maxCoeff());
    d.l1_norms.push_back(v.abs().sum() * d.cell_volume);
    if (modulated) {
      // λ^{γ+m} f(λx) = A μ^{−(γ+m)} ψ0(x̃) g(log|x̃| + s + log λμ), core c/(λμ)
      ProfileDescriptor e = d.profile;
      const double lm = lam * e.dilation;
      e.amplitude *= std::pow(e.dilation, -deg);
      e.shift += std::log(lm);
      e.core /= lm;
      e.dilation = 1.0;
      SingularProfile z(spec, e);
      double err = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) err = std::max(err, std::abs(v[k] - z(d.nodes[k])) / w[k]);
      d.orbit_errors.push_back(err);
    }
    d.probes.push_back(std::move(v));
  }

  const int P = static_cast<int>(d.probes.size());
  d.distances = Eigen::MatrixXd::Zero(P, P);
  for (int i = 0; i < P; ++i)
    for (int j = i + 1; j < P; ++j) {
      double dist = (d.probes[i] - d.probes[j]).abs().sum() * d.cell_volume;
      d.distances(i, j) = d.distances(j, i) = dist;
      if (dist <= tolerance * d.psi0_l1) d.recurrences.emplace_back(i, j);
    }
  if (P >= 2) d.converged = d.distances(P - 2, P - 1) <= tolerance * d.psi0_l1;
  if (P >= 1) d.vanishing = d.l1_norms.back() <= tolerance * d.psi0_l1;
  return d;
}

std::string to_string(Prediction p) {
  return p == Prediction::blowup_predicted ? "blowup_predicted" : "undetermined";
}

CriterionVerdict blowup_criterion_check(const KernelPlan& plan, const Field& z, double l1_tolerance) {
  const SectorSpec& spec = plan.spec();
  const double sup = z.sup_norm();
  if (z.values().minCoeff() < -1e-12 * std::max(sup, 1.0))
    throw std::invalid_argument("blowup_criterion_check: z changes sign on the sector");
  CriterionVerdict v;
  v.l1 = grid_l1(z);
  const bool nonzero = v.l1 > l1_tolerance;
  const bool crit = spec.critical();
  v.regime = spec.subcritical() ? "subcritical" : crit ? "critical" : "supercritical";
  v.gates.emplace_back("nonnegative", true);
  v.gates.emplace_back("nonzero", nonzero);
  v.gates.emplace_back("theorem_applies", spec.sign_a > 0 && (spec.subcritical() || crit));
  if (spec.sign_a <= 0 || !nonzero) return v;
  if (spec.subcritical()) {
    v.prediction = Prediction::blowup_predicted;
  } else if (crit) {
    Field heat = z.origin() ? apply_kernel(plan, 1.0, *z.origin()) : apply_kernel(plan, 1.0, z);
    v.heat_sup = refined_sup(heat);
    v.threshold = std::pow(1.0 / spec.alpha, 1.0 / spec.alpha);
    const bool above = v.heat_sup > v.threshold;
    v.gates.emplace_back("heat_sup_above_threshold", above);
    if (above) v.prediction = Prediction::blowup_predicted;
  }
  return v;
}

TwoLimitReport two_limit_experiment(const SectorSpec& spec, const GridSpec& grid, const PsiCache& cache,
                                    const TwoLimitOptions& o) {
  spec.validate();
  if (!spec.subcritical()) throw std::domain_error("two_limit_experiment needs alpha < 2/(gamma+m)");
  if (!spec.type_one_regime())
    throw std::domain_error("two_limit_experiment needs (N-2) alpha < 4 for the type-I extrapolation");
  if (o.family == Modulation::none) throw std::invalid_argument("two_limit_experiment needs a modulation");
  if (o.indices.size() < 2) throw std::invalid_argument("two_limit_experiment needs at least two indices");

  ProfileDescriptor d;
  d.kind = ProfileKind::modulated_psi0;
  d.amplitude = o.amplitude;
  d.modulation = o.family;
  d.epsilon = o.epsilon;
  d.c1 = o.c1;
  d.c2 = o.c2;
  d.period = o.period;
  d.ramp = o.ramp;
  d.core = o.core;
  ProfileDescriptor dc = d;
  dc.kind = ProfileKind::psi0;
  dc.modulation = Modulation::none;
  if (o.family == Modulation::blocks) dc.amplitude = o.amplitude * o.c1;
  const SingularProfile f(spec, d), control(spec, dc);

  // g has period π (sin²) or 2P (blocks); the second phase is a half period.
  const double gp = o.family == Modulation::sin2 ? std::numbers::pi : 2.0 * o.period;
  const double phaseB = 0.5 * gp;
  const double sigma = spec.sigma();
  const double expo = 2.0 / spec.alpha - spec.homogeneity();

  struct Job {
    Subsequence* target;
    const SingularProfile* profile;
    std::size_t slot;
    double mu;
  };
  TwoLimitReport r;
  std::vector<Job> jobs;
  auto plan = [&](Subsequence& s, const SingularProfile& p, double phase) {
    s.phase = phase;
    s.lambdas.resize(o.indices.size());
    s.scaled.resize(o.indices.size());
    s.uncertainties.resize(o.indices.size());
    s.statuses.resize(o.indices.size());
    for (std::size_t k = 0; k < o.indices.size(); ++k) {
      double mu = std::exp(gp * o.indices[k] + phase);
      s.lambdas[k] = std::pow(mu, -expo);
      jobs.push_back({&s, &p, k, mu});
    }
  };
  plan(r.A, f, 0.0);
  plan(r.B, f, phaseB);
  if (o.run_control) {
    plan(r.control_A, control, 0.0);
    plan(r.control_B, control, phaseB);
  }
  RunOutcome ref;
  const std::size_t total = jobs.size() + 1;
  parallel_for(total, o.workers, [&](std::size_t i) {
    if (i == jobs.size()) {
      auto psi0 = std::make_shared<const SingularProfile>(spec, ProfileDescriptor{});
      ref = run_one(spec, grid, &cache, psi0, o.controls);
      return;
    }
    const Job& j = jobs[i];
    // λ^σ T_max(λf) = T_max(τ^{−(γ+m)/2} f(·/√τ)), τ = λ^σ = μ^{−2}
    const double lam = j.target->lambdas[j.slot];
    auto p = std::make_shared<const SingularProfile>(j.profile->rescaled(std::pow(lam, sigma)));
    RunOutcome out = run_one(spec, grid, &cache, p, o.controls);
    j.target->scaled[j.slot] = out.tmax;
    j.target->uncertainties[j.slot] = out.uncertainty;
    j.target->statuses[j.slot] = out.status;
    if (out.status != TrajectoryStatus::blew_up)
      log().warn("two_limit_experiment: mu = {:.4g} run is {} ({})", j.mu, to_string(out.status), out.note);
  });

  auto finish = [&](Subsequence& s) {
    const std::size_t n = s.scaled.size();
    s.limit = s.scaled[n - 1];
    s.uncertainty = std::abs(s.scaled[n - 1] - s.scaled[n - 2]) + s.uncertainties[n - 1];
    for (auto st : s.statuses)
      if (st != TrajectoryStatus::blew_up) r.valid = false;
  };
  finish(r.A);
  finish(r.B);
  r.gap = std::abs(r.A.limit - r.B.limit);
  r.combined_uncertainty = r.A.uncertainty + r.B.uncertainty;
  r.separated = r.gap > 5.0 * r.combined_uncertainty;
  if (o.run_control) {
    finish(r.control_A);
    finish(r.control_B);
    r.control_gap = std::abs(r.control_A.limit - r.control_B.limit);
    r.control_uncertainty = r.control_A.uncertainty + r.control_B.uncertainty;
    r.control_separated = r.control_gap > 5.0 * r.control_uncertainty;
  }
  if (ref.status != TrajectoryStatus::blew_up) r.valid = false;
  r.T_psi0 = ref.tmax;

  // Comparison: g_lo ψ0 ≤ g ψ0 ≤ g_hi ψ0 and T_max(cψ0) = c^{−σ} T_max(ψ0).
  double g_lo, g_hi;
  if (o.family == Modulation::sin2) {
    g_lo = o.epsilon;
    g_hi = 1.0 + o.epsilon;
  } else {
    g_lo = std::min(o.c1, o.c2);
    g_hi = std::max(o.c1, o.c2);
  }
  r.bracket_lo = std::pow(o.amplitude * g_hi, -sigma) * r.T_psi0;
  r.bracket_hi = std::pow(o.amplitude * g_lo, -sigma) * r.T_psi0;
  auto inside = [&](const Subsequence& s) {
    return s.limit + s.uncertainty >= r.bracket_lo - ref.uncertainty &&
           s.limit - s.uncertainty <= r.bracket_hi + ref.uncertainty;
  };
  r.bracketed = inside(r.A) && inside(r.B);

  r.gates.emplace_back("all_runs_blew_up", r.valid);
  r.gates.emplace_back("limits_separated", r.separated);
  if (o.run_control) r.gates.emplace_back("control_limits_agree", !r.control_separated);
  r.gates.emplace_back("limits_bracketed", r.bracketed);
  return r;
}

SmallnessReport global_smallness_check(const SectorSpec& spec, const GridSpec& grid,
                                       std::shared_ptr<const PsiCache> cache, const SmallnessOptions& o,
                                       std::shared_ptr<const SingularProfile> data) {
  spec.validate();
  if (spec.subcritical()) throw std::domain_error("global_smallness_check needs alpha > 2/(gamma+m)");
  if (spec.critical()) throw std::domain_error("global_smallness_check: I_inf diverges at the critical power");
  if (!cache || !(cache->spec == spec)) throw std::invalid_argument("global_smallness_check: cache mismatch");
  if (!(o.t0 > 0.0) || !(o.fraction >= 0.0) || !(o.horizon_factor > 0.0))
    throw std::invalid_argument("global_smallness_check: bad options");

  SmallnessReport r;
  const double a = spec.alpha;
  const double b = spec.beta();
  r.I_inf = std::pow(cache->C_inf, a) * std::pow(o.t0, 1.0 - b) / (b - 1.0);
  r.threshold = std::pow(1.0 / (2.0 * (a + 1.0) * std::pow(2.0, a + 1.0) * r.I_inf), 1.0 / a);
  r.lambda = o.fraction * r.threshold;
  r.M = 2.0 * r.lambda;
  r.horizon = o.horizon_factor * o.t0;

  const double t0 = o.t0;
  if (!data) {
    data = std::make_shared<const SingularProfile>(SingularProfile::custom(
        spec, [cache, t0, N = spec.N](std::span<const double> x) {
          Point p{0.0, 0.0, 0.0};
          for (int i = 0; i < N; ++i) p[i] = x[i];
          return cache->psi_at(t0, p);
        },
        -spec.homogeneity(), std::numeric_limits<double>::infinity(), true, false));
  }
  Field psi_t0 = psi_fast(*cache, t0, grid);
  Field f = sample(spec, grid, data);
  if ((f.values().abs() - psi_t0.values()).maxCoeff() > 1e-10 * psi_t0.sup_norm())
    throw std::invalid_argument("global_smallness_check: data exceeds e^{t0 Delta} psi0 on the grid");
  if (r.lambda == 0.0) {
    r.status = TrajectoryStatus::global_horizon_reached;
    return r;
  }

  TmaxControls c = o.controls;
  c.start = StartMode::direct;
  c.horizon = r.horizon;
  auto user = c.observer;
  c.observer = [&](double t, const Field& u) {
    Field bound = psi_fast(*cache, t + t0, grid);
    Eigen::Index node = 0;
    const double ratio = (u.values().abs() / bound.values()).maxCoeff(&node) / r.M;
    r.max_ratio = std::max(r.max_ratio, ratio);
    ++r.steps;
    if (ratio > 1.0 + 1e-8 && !r.violated) {
      r.violated = true;
      r.violation_time = t;
      r.violation_node = node;
      return false;
    }
    return user ? user(t, u) : true;
  };
  auto scaled = std::make_shared<const SingularProfile>(data->scaled(r.lambda));
  TrajectoryRecord rec = estimate_tmax(spec, grid, cache.get(), scaled, c);
  r.status = r.violated ? TrajectoryStatus::inconclusive : rec.status;
  if (r.violated)
    log().warn("global_smallness_check: bound violated at t = {:.4g}, node {}", r.violation_time,
               r.violation_node);
  return r;
}

NonexistenceSignature nonexistence_signature(const SectorSpec& spec, double C_inf, double c,
                                             const std::vector<double>& t0) {
  if (t0.empty()) throw std::invalid_argument("nonexistence_signature: no t0 values");
  NonexistenceSignature s;
  s.t0 = t0;
  std::sort(s.t0.begin(), s.t0.end(), std::greater<>());
  const double a = spec.alpha;
  for (double t : s.t0)
    s.ratio.push_back(c * C_inf * std::pow(t, -0.5 * spec.homogeneity()) / std::pow(a * t, -1.0 / a));
  bool increasing = true;
  for (std::size_t i = 1; i < s.ratio.size(); ++i) increasing = increasing && s.ratio[i] > s.ratio[i - 1];
  s.detected = spec.sign_a > 0 && !spec.subcritical() && !spec.critical() && increasing && s.ratio.back() > 1.0;
  return s;
}

}  // namespace sheat
