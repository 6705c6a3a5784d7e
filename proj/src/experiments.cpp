#include "sheat/experiments.hpp"

#include "sheat/log.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace sheat {

using nlohmann::ordered_json;

bool ExperimentResult::gates_pass() const {
  for (auto& [name, ok] : gates)
    if (!ok) return false;
  return true;
}

int ExperimentResult::exit_code() const {
  if (!gates_pass()) return exit_gate;
  if (inconclusive) return exit_inconclusive;
  return exit_ok;
}

PsiCache cache_build(const RunManifest& m, const fs::path& dir, double tolerance) {
  PsiCache c = build_psi_cache(m.spec, m.cache);
  const double gap = psi_cache_refinement_gap(c);
  if (gap > tolerance) {
    std::ostringstream msg;
    msg << "psi cache quadrature did not converge: refining the origin rule moves E by " << std::setprecision(3)
        << gap << " (tolerance " << tolerance << "); raise cache.dyadic_levels or cache.q_dyadic";
    throw std::runtime_error(msg.str());
  }
  save_psi_cache(dir / psi_cache_name(m.spec, m.cache), c);
  return c;
}

namespace {

ordered_json gates_json(const std::vector<std::pair<std::string, bool>>& g) {
  ordered_json j = ordered_json::object();
  for (auto& [k, v] : g) j[k] = v;
  return j;
}

double rel_sup_diff(const Field& a, const Field& b) {
  return (a.values() - b.values()).abs().maxCoeff() / std::max(a.sup_norm(), b.sup_norm());
}

ProfileDescriptor smooth_antisym() {
  ProfileDescriptor d;
  d.kind = ProfileKind::gaussian_derivative;
  d.t0 = 1.0;
  return d;
}

void semigroup_checks(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  const SectorSpec& s = m.spec;
  const GridSpec g = m.grid();
  PsiCache cache = cached_psi(s, m.cache, o.cache_dir);
  KernelPlan quad(s, g, HeatMethod::quadrature, m.cache.quad);
  KernelPlan spec_plan(s, g, HeatMethod::spectral);
  SingularProfile psi0(s, ProfileDescriptor{});

  ordered_json law = ordered_json::array();
  double worst = 0.0;
  for (double t : m.times) {
    double v = refined_sup(apply_kernel(quad, t, psi0)) * std::pow(t, 0.5 * s.homogeneity());
    double dev = std::abs(v / cache.C_inf - 1.0);
    worst = std::max(worst, dev);
    law.push_back({{"t", t}, {"scaled_sup", v}, {"deviation", dev}});
  }
  r.summary["C_inf"] = cache.C_inf;
  r.summary["sup_norm_law"] = law;
  r.gates.emplace_back("sup_norm_law", worst < m.law_tolerance);

  auto smooth = std::make_shared<const SingularProfile>(s, smooth_antisym());
  Field f = sample(s, g, smooth);
  const double agree = rel_sup_diff(apply_kernel(quad, 1.0, f), apply_spectral(spec_plan, 1.0, f));
  const double comp_spec = rel_sup_diff(apply_spectral(spec_plan, 0.3, apply_spectral(spec_plan, 0.7, f)),
                                        apply_spectral(spec_plan, 1.0, f));
  const double comp_quad =
      rel_sup_diff(apply_kernel(quad, 0.3, apply_kernel(quad, 0.7, f)), apply_kernel(quad, 1.0, f));
  r.summary["cross_method"] = agree;
  r.summary["composition_spectral"] = comp_spec;
  r.summary["composition_quadrature"] = comp_quad;
  r.gates.emplace_back("cross_method", agree < m.agreement_tolerance);
  r.gates.emplace_back("composition_spectral", comp_spec < 1e-6);
  r.gates.emplace_back("composition_quadrature", comp_quad < m.agreement_tolerance);

  std::mt19937_64 rng(m.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Eigen::ArrayXd rnd(g.size());
  for (auto& v : rnd) v = U(rng);
  Field pos = apply_kernel(quad, 0.5, f.with_values(rnd));
  const double pos_min = pos.values().minCoeff() / rnd.maxCoeff();
  Field mass = apply_kernel(quad, 0.5, f.with_values(Eigen::ArrayXd::Ones(g.size())));
  double asym = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    Eigen::MatrixXd K = hat_kernel_matrix(g, a, 0.5);
    // uniform hat weights: the assembled matrix is the kernel times h
    asym = std::max(asym, (K - K.transpose()).cwiseAbs().maxCoeff());
  }
  r.summary["positivity_min"] = pos_min;
  r.summary["sub_markov_max"] = mass.values().maxCoeff();
  r.summary["kernel_asymmetry"] = asym;
  r.gates.emplace_back("positivity", pos_min >= -1e-12);
  r.gates.emplace_back("sub_markov", mass.values().maxCoeff() <= 1.0 + 1e-10);
  r.gates.emplace_back("kernel_symmetry", asym < 1e-12);

  ProfileDescriptor md;
  md.kind = ProfileKind::modulated_psi0;
  md.modulation = Modulation::sin2;
  SingularProfile mod(s, md);
  Field w = sample(s, g, std::make_shared<const SingularProfile>(psi0));
  double C_meas = 0.0;
  for (double t : m.times)
    C_meas = std::max(C_meas, weighted_sup_ratio(apply_kernel(quad, t, mod), w) / mod.x_norm_bound());
  r.summary["x_norm_stability_constant"] = C_meas;

  const double lam = 2.0, tau = 0.25;
  Field lhs = dilate(apply_spectral(spec_plan, tau * lam * lam, f), lam);
  Field rhs = apply_spectral(spec_plan, tau, dilate(f, lam));
  const double comm = rel_sup_diff(lhs, rhs);
  r.summary["commutation"] = comm;
  r.gates.emplace_back("commutation", comm < 1e-4);
}

void picard_experiment(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  const SectorSpec& s = m.spec;
  PsiCache cache = cached_psi(s, m.cache, o.cache_dir);
  auto p = std::make_shared<const SingularProfile>(s, m.profile);
  const double K = std::max(m.K, p->x_norm_bound());
  Admissible adm = admissible_constants(s, cache.C_inf, K);
  PicardConfig pc;
  pc.K = K;
  pc.M = adm.M;
  pc.T = adm.T;
  pc.J = m.J;
  pc.tolerance = m.controls.picard_tolerance;
  KernelPlan plan(s, m.grid(), HeatMethod::quadrature, m.cache.quad);
  PicardRun run = solve_picard(plan, cache, p, pc);
  r.summary["K"] = K;
  r.summary["M"] = adm.M;
  r.summary["T"] = adm.T;
  r.summary["I_T"] = adm.I;
  r.summary["contraction_bound"] = run.contraction_bound;
  r.summary["max_contraction"] = run.max_contraction;
  r.summary["final_norm"] = run.final_norm;
  r.summary["iterations"] = run.iterations;
  r.gates.emplace_back("converged", run.converged);
  r.gates.emplace_back("contraction_within_bound", run.max_contraction <= run.contraction_bound * 1.05);
  r.gates.emplace_back("final_norm_within_ball", run.final_norm <= adm.M);
  if (o.write_artifacts) {
    fs::path csv = fs::path(m.output_dir) / "picard_sweeps.csv";
    fs::create_directories(csv.parent_path());
    std::ofstream out(csv);
    out << std::setprecision(17) << "sweep,increment,norm,ratio\n";
    for (std::size_t k = 0; k < run.increments.size(); ++k) {
      out << k + 1 << "," << run.increments[k] << "," << run.iterate_norms[k + 1] << ",";
      if (k > 0) out << run.increments[k] / run.increments[k - 1];
      out << "\n";
    }
    r.artifacts.push_back(csv);
  }
}

void tmax_experiment(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  auto p = std::make_shared<const SingularProfile>(m.spec, m.profile);
  std::optional<PsiCache> cache;
  if (m.spec.subcritical()) cache = cached_psi(m.spec, m.cache, o.cache_dir);
  TrajectoryRecord rec = estimate_tmax(m.spec, m.grid(), cache ? &*cache : nullptr, p, m.controls);
  r.summary["trajectory"] = to_json(rec);
  r.inconclusive = rec.status == TrajectoryStatus::inconclusive;
  if (o.write_artifacts) {
    fs::path csv = fs::path(m.output_dir) / "trajectory.csv";
    write_trajectory_csv(csv, rec);
    r.artifacts.push_back(csv);
  }
}

void sweep_experiment(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  SingularProfile p(m.spec, m.profile);
  std::optional<PsiCache> cache;
  if (m.spec.subcritical()) cache = cached_psi(m.spec, m.cache, o.cache_dir);
  LifespanCurve c =
      sweep_lifespan(m.spec, m.grid(), cache ? &*cache : nullptr, p, m.lambdas, m.controls, o.workers, m.sweep_mode);
  r.summary["sweep"] = to_json(c);
  r.gates.emplace_back("monotone", c.monotone);
  r.gates.emplace_back("fujita_consistent", c.fujita_consistent);
  // Homogeneous data: the σ-scaled life span must not depend on λ.
  if (p.kind() == ProfileKind::psi0 && m.profile.core == 0.0 && std::isfinite(c.sigma)) {
    double lo = INFINITY, hi = 0.0;
    for (auto& e : c.entries)
      if (e.included) {
        lo = std::min(lo, e.scaled);
        hi = std::max(hi, e.scaled);
      }
    if (hi > 0.0) {
      r.summary["scaled_spread"] = hi / lo - 1.0;
      r.gates.emplace_back("scaled_constant", hi / lo - 1.0 < 0.02);
    }
  }
  r.inconclusive = c.excluded > 0;
  if (o.write_artifacts) {
    fs::path csv = fs::path(m.output_dir) / "sweep.csv";
    write_sweep_csv(csv, c);
    r.artifacts.push_back(csv);
  }
}

void dilation_experiment(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  SingularProfile p(m.spec, m.profile);
  DilationProbe d = dilation_limits(p, m.lambdas, m.annulus, m.probe_tolerance);
  ordered_json dist = ordered_json::array();
  for (int i = 0; i < d.distances.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < d.distances.cols(); ++j) row.push_back(d.distances(i, j));
    dist.push_back(row);
  }
  r.summary["lambdas"] = d.lambdas;
  r.summary["l1_norms"] = d.l1_norms;
  r.summary["psi0_l1"] = d.psi0_l1;
  r.summary["distances"] = dist;
  r.summary["recurrences"] = d.recurrences;
  r.summary["converged"] = d.converged;
  r.summary["vanishing"] = d.vanishing;
  r.summary["ball_ratio"] = d.ball_ratio;
  if (!d.orbit_errors.empty()) r.summary["orbit_errors"] = d.orbit_errors;
  r.gates.emplace_back("ball_bound", d.ball_ratio <= p.x_norm_bound() * (1.0 + 1e-12));
  if (o.write_artifacts) {
    fs::path csv = fs::path(m.output_dir) / "probes.csv";
    fs::create_directories(csv.parent_path());
    std::ofstream out(csv);
    out << std::setprecision(17);
    for (int i = 0; i < m.spec.N; ++i) out << "x" << i << ",";
    out << "psi0";
    for (std::size_t k = 0; k < d.probes.size(); ++k) out << ",probe" << k;
    out << "\n";
    for (std::size_t n = 0; n < d.nodes.size(); ++n) {
      for (int i = 0; i < m.spec.N; ++i) out << d.nodes[n][i] << ",";
      out << eval_psi0(m.spec, std::span<const double>(d.nodes[n].data(), m.spec.N));
      for (auto& pr : d.probes) out << "," << pr[static_cast<Eigen::Index>(n)];
      out << "\n";
    }
    r.artifacts.push_back(csv);
  }
}

void criteria_experiment(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  const SectorSpec& s = m.spec;
  const GridSpec g = m.grid();
  SingularProfile f(s, m.profile);
  // Dilation limit candidate at the largest λ of the manifest grid.
  const double lam = *std::max_element(m.lambdas.begin(), m.lambdas.end());
  auto zp = std::make_shared<const SingularProfile>(f.dilated(lam).scaled(std::pow(lam, s.homogeneity())));
  Field z = sample(s, g, zp);
  KernelPlan plan(s, g, HeatMethod::quadrature, m.cache.quad);
  CriterionVerdict v = blowup_criterion_check(plan, z);
  r.summary["regime"] = v.regime;
  r.summary["prediction"] = to_string(v.prediction);
  r.summary["z_l1"] = v.l1;
  if (std::isfinite(v.heat_sup)) {
    r.summary["heat_sup"] = v.heat_sup;
    r.summary["threshold"] = v.threshold;
  }
  r.summary["verdict_gates"] = gates_json(v.gates);
  std::optional<PsiCache> cache;
  if (s.subcritical()) cache = cached_psi(s, m.cache, o.cache_dir);
  auto fp = std::make_shared<const SingularProfile>(f);
  TrajectoryRecord rec = estimate_tmax(s, g, cache ? &*cache : nullptr, fp, m.controls);
  r.summary["trajectory"] = to_json(rec);
  if (v.prediction == Prediction::blowup_predicted)
    r.gates.emplace_back("prediction_confirmed", rec.status == TrajectoryStatus::blew_up);
  r.inconclusive = rec.status == TrajectoryStatus::inconclusive;
}

ordered_json subsequence_json(const Subsequence& q) {
  ordered_json st = ordered_json::array();
  for (auto s : q.statuses) st.push_back(to_string(s));
  return {{"phase", q.phase},   {"lambdas", q.lambdas}, {"scaled", q.scaled}, {"uncertainties", q.uncertainties},
          {"statuses", st},     {"limit", q.limit},     {"uncertainty", q.uncertainty}};
}

void two_limit_run(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  PsiCache cache = cached_psi(m.spec, m.cache, o.cache_dir);
  TwoLimitOptions t = m.two_limit;
  t.controls = m.controls;
  t.workers = o.workers;
  TwoLimitReport rep = two_limit_experiment(m.spec, m.grid(), cache, t);
  r.summary["A"] = subsequence_json(rep.A);
  r.summary["B"] = subsequence_json(rep.B);
  if (t.run_control) {
    r.summary["control_A"] = subsequence_json(rep.control_A);
    r.summary["control_B"] = subsequence_json(rep.control_B);
    r.summary["control_gap"] = rep.control_gap;
  }
  r.summary["gap"] = rep.gap;
  r.summary["combined_uncertainty"] = rep.combined_uncertainty;
  r.summary["T_psi0"] = rep.T_psi0;
  r.summary["bracket"] = {rep.bracket_lo, rep.bracket_hi};
  for (auto& gte : rep.gates)
    if (gte.first != "all_runs_blew_up") r.gates.push_back(gte);
  r.inconclusive = !rep.valid;
}

void smallness_run(const RunManifest& m, const RunOptions& o, ExperimentResult& r) {
  auto cache = std::make_shared<const PsiCache>(cached_psi(m.spec, m.cache, o.cache_dir));
  SmallnessOptions so = m.smallness;
  so.controls = m.controls;
  SmallnessReport rep = global_smallness_check(m.spec, m.grid(), cache, so);
  r.summary["I_inf"] = rep.I_inf;
  r.summary["threshold"] = rep.threshold;
  r.summary["lambda"] = rep.lambda;
  r.summary["M"] = rep.M;
  r.summary["max_ratio"] = rep.max_ratio;
  r.summary["horizon"] = rep.horizon;
  r.summary["status"] = to_string(rep.status);
  if (rep.violated) r.summary["violation"] = {{"t", rep.violation_time}, {"node", rep.violation_node}};
  r.gates.emplace_back("bound_holds", !rep.violated);
  r.inconclusive = !rep.violated && rep.status != TrajectoryStatus::global_horizon_reached;
}

}  // namespace

ExperimentResult run_experiment(const RunManifest& m, const RunOptions& o) {
  m.validate();
  ExperimentResult r;
  r.summary["experiment"] = to_string(m.experiment);
  r.summary["spec"] = to_json(m)["spec"];
  r.summary["grid"] = to_json(m)["grid"];
  if (std::isfinite(m.spec.sigma())) r.summary["sigma"] = m.spec.sigma();
  switch (m.experiment) {
    case Experiment::semigroup_checks: semigroup_checks(m, o, r); break;
    case Experiment::picard: picard_experiment(m, o, r); break;
    case Experiment::tmax: tmax_experiment(m, o, r); break;
    case Experiment::sweep: sweep_experiment(m, o, r); break;
    case Experiment::dilation: dilation_experiment(m, o, r); break;
    case Experiment::criteria: criteria_experiment(m, o, r); break;
    case Experiment::two_limit: two_limit_run(m, o, r); break;
    case Experiment::global_smallness: smallness_run(m, o, r); break;
  }
  r.summary["gates"] = gates_json(r.gates);
  r.summary["inconclusive"] = r.inconclusive;
  r.summary["exit_code"] = r.exit_code();
  if (o.write_artifacts) {
    const fs::path dir(m.output_dir);
    write_json(dir / "manifest.json", to_json(m));
    write_json(dir / "summary.json", r.summary);
    r.artifacts.push_back(dir / "manifest.json");
    r.artifacts.push_back(dir / "summary.json");
  }
  return r;
}

}  // namespace sheat
