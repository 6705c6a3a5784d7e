#include "sheat/evolve.hpp"

#include "sheat/log.hpp"
#include "sheat/spectral.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <stdexcept>

namespace sheat {

std::string to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::global_horizon_reached: return "global_horizon_reached";
    case TrajectoryStatus::blew_up: return "blew_up";
    case TrajectoryStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(StartMode s) {
  switch (s) {
    case StartMode::automatic: return "automatic";
    case StartMode::picard: return "picard";
    case StartMode::direct: return "direct";
  }
  return "?";
}

StartMode start_mode_from_string(const std::string& s) {
  if (s == "automatic") return StartMode::automatic;
  if (s == "picard") return StartMode::picard;
  if (s == "direct") return StartMode::direct;
  throw std::invalid_argument("unknown start mode '" + s + "'");
}

std::variant<Eigen::ArrayXd, BlowupSignal> nonlinear_flow(const Eigen::ArrayXd& u, double dt, int a,
                                                          double alpha) {
  if (!(dt > 0.0)) throw std::invalid_argument("nonlinear step needs dt > 0");
  // u ↦ u (1 − aα dt |u|^α)^{−1/α}
  Eigen::ArrayXd q = 1.0 - a * alpha * dt * u.abs().pow(alpha);
  if (a > 0 && q.minCoeff() <= 0.0) {
    Eigen::Index node = 0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (q[i] <= 0.0 && std::abs(u[i]) > worst) {
        worst = std::abs(u[i]);
        node = i;
      }
    return BlowupSignal{node, 1.0 / (alpha * std::pow(worst, alpha))};
  }
  return Eigen::ArrayXd(u * q.pow(-1.0 / alpha));
}

std::variant<Field, BlowupSignal> nonlinear_substep(const Field& f, double dt, int a, double alpha) {
  auto r = nonlinear_flow(f.values(), dt, a, alpha);
  if (auto* s = std::get_if<BlowupSignal>(&r)) return *s;
  return f.with_values(std::move(std::get<Eigen::ArrayXd>(r)), f.time_tag());
}

std::variant<Field, BlowupSignal> strang_step(const KernelPlan& plan, const Field& f, double dt) {
  const auto& spec = plan.spec();
  auto r1 = nonlinear_flow(f.values(), 0.5 * dt, spec.sign_a, spec.alpha);
  if (auto* s = std::get_if<BlowupSignal>(&r1)) return *s;
  Eigen::ArrayXd v = plan.spectral().apply(dt, std::get<Eigen::ArrayXd>(r1));
  auto r2 = nonlinear_flow(v, 0.5 * dt, spec.sign_a, spec.alpha);
  if (auto* s = std::get_if<BlowupSignal>(&r2)) return *s;
  std::optional<double> t;
  if (f.time_tag()) t = *f.time_tag() + dt;
  return f.with_values(std::move(std::get<Eigen::ArrayXd>(r2)), t);
}

void fit_type_one(TrajectoryRecord& rec, double alpha, double residual_gate) {
  const auto& t = rec.times;
  const auto& S = rec.sup_norms;
  if (t.size() < 3) {
    rec.status = TrajectoryStatus::inconclusive;
    rec.note = "too few samples for a type-I fit";
    return;
  }
  const std::size_t last = t.size() - 1;
  std::size_t first = last;
  while (first > 0 && S[first - 1] >= S[last] / 10.0) --first;
  rec.fit_window = static_cast<int>(last - first + 1);
  const double T_est = t[last] + 1.0 / (alpha * std::pow(S[last], alpha));
  rec.tmax = T_est;
  if (rec.fit_window < 3) {
    rec.status = TrajectoryStatus::inconclusive;
    rec.note = "growth over the last decade spans fewer than 3 samples";
    return;
  }
  const double d = T_est - t[last];
  auto loss = [&](double u) {
    const double T = t[last] + std::exp(u);
    double s = 0.0;
    for (std::size_t k = first; k <= last; ++k) {
      double e = std::log(S[k]) + std::log(alpha * (T - t[k])) / alpha;
      s += e * e;
    }
    return s;
  };
  std::uintmax_t iters = 200;
  auto [u_best, l_best] =
      boost::math::tools::brent_find_minima(loss, std::log(d) - 6.0, std::log(d) + 4.0, 40, iters);
  rec.tmax_fit = t[last] + std::exp(u_best);
  // RMS relative residual of the least-squares fit; the max deviation from
  // the extrapolated T is kept separately as the rate check.
  double res = std::sqrt(l_best / rec.fit_window), rate = 0.0, spread = std::abs(rec.tmax_fit - T_est);
  for (std::size_t k = first; k <= last; ++k) {
    rate = std::max(rate, std::abs(S[k] * std::pow(alpha * (T_est - t[k]), 1.0 / alpha) - 1.0));
    double Tk = t[k] + 1.0 / (alpha * std::pow(S[k], alpha));
    spread = std::max(spread, std::abs(Tk - T_est));
  }
  rec.fit_residual = res;
  rec.rate_deviation = rate;
  rec.uncertainty = spread;
  if (res < residual_gate) {
    rec.status = TrajectoryStatus::blew_up;
  } else {
    rec.status = TrajectoryStatus::inconclusive;
    rec.note = "growth reached the cap without matching type-I behaviour";
  }
}

namespace {

bool needs_picard(const SingularProfile& p, const GridSpec& grid, double resolution_factor) {
  if (p.singular()) return true;
  const auto k = p.kind();
  return (k == ProfileKind::psi0 || k == ProfileKind::modulated_psi0) &&
         p.descriptor().core / p.descriptor().dilation < resolution_factor * grid.min_spacing();
}

}  // namespace

TrajectoryRecord estimate_tmax(const SectorSpec& spec, const GridSpec& grid, const PsiCache* cache,
                               std::shared_ptr<const SingularProfile> profile, const TmaxControls& c) {
  spec.validate();
  grid.validate(spec);
  TrajectoryRecord rec;
  rec.extrapolation_unjustified = !spec.type_one_regime();
  KernelPlan plan(spec, grid, HeatMethod::spectral);
  const double h = grid.min_spacing();

  bool picard = c.start == StartMode::picard ||
                (c.start == StartMode::automatic && needs_picard(*profile, grid, c.resolution_factor));
  double t = 0.0;
  std::optional<Field> u;
  if (picard) {
    if (!cache) throw std::invalid_argument("estimate_tmax: a Picard start needs a psi cache");
    const double K = profile->x_norm_bound();
    if (!std::isfinite(K)) throw std::invalid_argument("estimate_tmax: data outside X cannot start by Picard");
    Admissible adm = admissible_constants(spec, cache->C_inf, K);
    double t0 = std::max(c.handoff_fraction * adm.T, std::pow(c.resolution_factor * h, 2));
    if (t0 > adm.T) {
      t0 = adm.T;
      rec.handoff_underresolved = true;
      log().warn("estimate_tmax: handoff at the Picard horizon {:.3e} is below grid resolution", adm.T);
    }
    PicardConfig pc;
    pc.K = K;
    pc.M = adm.M;
    pc.T = t0;
    pc.J = c.picard_J;
    pc.tolerance = c.picard_tolerance;
    KernelPlan qplan(spec, grid, HeatMethod::quadrature);
    PicardRun run = solve_picard(qplan, *cache, profile, pc);
    rec.picard = PicardSummary{K, adm.M, adm.T, t0, run.iterations, run.final_norm, run.max_contraction,
                               run.converged};
    t = t0;
    u = run.slices.back();
  } else {
    if (profile->singular()) throw std::invalid_argument("estimate_tmax: singular data needs a Picard start");
    u = sample(spec, grid, profile);
  }
  u = u->with_values(u->values(), t);

  auto record = [&](double tt, double S, double dt) {
    rec.times.push_back(tt);
    rec.sup_norms.push_back(S);
    rec.steps.push_back(dt);
  };
  double S = u->sup_norm();
  record(t, S, 0.0);
  if (c.observer && !c.observer(t, *u)) {
    rec.note = "stopped by observer";
    rec.final_field = u;
    return rec;
  }

  const double a = spec.alpha;
  long steps = 0;
  bool hit_cap = false;
  while (true) {
    if (t >= c.horizon) {
      rec.status = TrajectoryStatus::global_horizon_reached;
      break;
    }
    const double cap = std::min(c.cap, std::pow(1e10 / (a * std::max(t, 1e-6)), 1.0 / a));
    if (S > cap) {
      hit_cap = true;
      break;
    }
    if (++steps > c.max_steps) {
      rec.note = "step budget exhausted";
      break;
    }
    double dt = c.c_step * c.safety * h * h;
    if (spec.sign_a > 0 && S > 0.0) dt = std::min(dt, c.c_step * c.reaction_fraction / (a * std::pow(S, a)));
    dt = std::min(dt, c.horizon - t);
    std::optional<Field> next;
    for (int r = 0; r <= c.max_retries && !next; ++r) {
      auto res = strang_step(plan, *u, dt);
      if (auto* f = std::get_if<Field>(&res)) next = std::move(*f);
      else dt *= 0.5;
    }
    if (!next) {
      rec.note = "step size collapsed under repeated blow-up signals";
      hit_cap = true;
      break;
    }
    t += dt;
    u = next->with_values(next->values(), t);
    S = u->sup_norm();
    record(t, S, dt);
    if (c.observer && !c.observer(t, *u)) {
      rec.note = "stopped by observer";
      break;
    }
  }
  if (hit_cap) fit_type_one(rec, a, c.residual_gate);
  rec.final_field = u;
  return rec;
}

}  // namespace sheat
