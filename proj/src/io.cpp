#include "sheat/io.hpp"

#include "sheat/log.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace sheat {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  const std::vector<char>& data() const { return buf_; }
  void save(const fs::path& path) const {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
  }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(const fs::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path_);
    buf_.assign(std::istreambuf_iterator<char>(in), {});
  }
  template <class T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }
  const char* data() const { return buf_.data(); }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw std::runtime_error(path_ + ": truncated file");
  }
  std::string path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

void put_spec(Writer& w, const SectorSpec& s) {
  w.put<std::int32_t>(s.N);
  w.put<std::int32_t>(s.m);
  w.put<double>(s.gamma);
  w.put<double>(s.alpha);
  w.put<std::int32_t>(s.sign_a);
}

SectorSpec get_spec(Reader& r) {
  SectorSpec s;
  s.N = r.get<std::int32_t>();
  s.m = r.get<std::int32_t>();
  s.gamma = r.get<double>();
  s.alpha = r.get<double>();
  s.sign_a = r.get<std::int32_t>();
  return s;
}

void put_grid(Writer& w, const GridSpec& g) {
  w.put<std::int32_t>(g.n);
  w.put<double>(g.L);
  for (auto k : g.axes) w.put<std::uint8_t>(static_cast<std::uint8_t>(k));
}

GridSpec get_grid(Reader& r, int N) {
  GridSpec g;
  g.n = r.get<std::int32_t>();
  g.L = r.get<double>();
  for (int i = 0; i < N; ++i) {
    auto k = r.get<std::uint8_t>();
    if (k > 2) throw std::runtime_error("bad axis kind in file");
    g.axes.push_back(static_cast<AxisKind>(k));
  }
  return g;
}

void put_values(Writer& w, const Eigen::ArrayXd& v) {
  w.put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
  w.bytes(v.data(), sizeof(double) * v.size());
}

Eigen::ArrayXd get_values(Reader& r, Eigen::Index expected) {
  auto count = r.get<std::uint64_t>();
  if (static_cast<Eigen::Index>(count) != expected) throw std::runtime_error("value count does not match the grid");
  Eigen::ArrayXd v(expected);
  r.bytes(v.data(), sizeof(double) * expected);
  return v;
}

void magic(Reader& r, const char* tag) {
  char m[4];
  r.bytes(m, 4);
  if (std::memcmp(m, tag, 4) != 0) throw std::runtime_error(std::string("not a ") + tag + " file");
  if (r.get<std::uint32_t>() != 1u) throw std::runtime_error("unsupported file version");
}

}  // namespace

void write_field_binary(const fs::path& path, const Field& f) {
  Writer w;
  w.bytes("SHFD", 4);
  w.put<std::uint32_t>(1);
  put_spec(w, f.spec());
  put_grid(w, f.grid());
  w.put<std::uint8_t>(f.time_tag() ? 1 : 0);
  w.put<double>(f.time_tag().value_or(0.0));
  put_values(w, f.values());
  w.save(path);
}

Field read_field_binary(const fs::path& path) {
  Reader r(path);
  magic(r, "SHFD");
  SectorSpec s = get_spec(r);
  s.validate();
  GridSpec g = get_grid(r, s.N);
  g.validate(s);
  bool has_t = r.get<std::uint8_t>() != 0;
  double t = r.get<double>();
  Eigen::ArrayXd v = get_values(r, g.size());
  if (!r.done()) throw std::runtime_error(path.string() + ": trailing bytes");
  return Field(s, g, std::move(v), has_t ? std::optional<double>(t) : std::nullopt);
}

void write_field_csv(const fs::path& path, const Field& f) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const auto& s = f.spec();
  const auto& g = f.grid();
  out << std::setprecision(17);
  out << "# N=" << s.N << " m=" << s.m << " gamma=" << s.gamma << " alpha=" << s.alpha << " a=" << s.sign_a
      << " n=" << g.n << " L=" << g.L << " axes=";
  for (int i = 0; i < g.dim(); ++i) out << (i ? "," : "") << to_string(g.axes[i]);
  out << "\n";
  for (int i = 0; i < g.dim(); ++i) out << "x" << i << ",";
  out << "value\n";
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    Point x = g.point(k);
    for (int i = 0; i < g.dim(); ++i) out << x[i] << ",";
    out << f.values()[k] << "\n";
  }
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

void save_psi_cache(const fs::path& path, const PsiCache& c) {
  Writer w;
  w.bytes("SHPC", 4);
  w.put<std::uint32_t>(1);
  put_spec(w, c.spec);
  w.put<double>(c.options.radius);
  w.put<double>(c.options.h);
  const auto& q = c.options.quad;
  for (int v : {q.dyadic_levels, q.q_dyadic, q.q_uniform, q.hermite_points}) w.put<std::int32_t>(v);
  for (double v : {q.cell, q.near_radius, q.window, q.tail_tolerance}) w.put<double>(v);
  put_grid(w, c.grid);
  w.put<double>(c.C_inf);
  put_values(w, c.E);
  w.put<std::uint64_t>(fnv1a(w.data().data(), w.data().size()));
  w.save(path);
}

PsiCache load_psi_cache(const fs::path& path) {
  Reader r(path);
  magic(r, "SHPC");
  PsiCache c;
  c.spec = get_spec(r);
  c.spec.validate();
  c.options.radius = r.get<double>();
  c.options.h = r.get<double>();
  auto& q = c.options.quad;
  q.dyadic_levels = r.get<std::int32_t>();
  q.q_dyadic = r.get<std::int32_t>();
  q.q_uniform = r.get<std::int32_t>();
  q.hermite_points = r.get<std::int32_t>();
  q.cell = r.get<double>();
  q.near_radius = r.get<double>();
  q.window = r.get<double>();
  q.tail_tolerance = r.get<double>();
  c.grid = get_grid(r, c.spec.N);
  c.grid.validate(c.spec);
  c.C_inf = r.get<double>();
  c.E = get_values(r, c.grid.size());
  const std::uint64_t expect = fnv1a(r.data(), r.pos());
  if (r.get<std::uint64_t>() != expect) throw std::runtime_error(path.string() + ": checksum mismatch");
  if (!r.done()) throw std::runtime_error(path.string() + ": trailing bytes");
  return c;
}

std::string psi_cache_name(const SectorSpec& spec, const PsiCacheOptions& o) {
  Writer w;
  SectorSpec s = spec;
  s.alpha = 0.0;  // E does not depend on α or a
  s.sign_a = 1;
  put_spec(w, s);
  w.put<double>(o.radius);
  w.put<double>(o.h);
  const auto& q = o.quad;
  for (int v : {q.dyadic_levels, q.q_dyadic, q.q_uniform, q.hermite_points}) w.put<std::int32_t>(v);
  for (double v : {q.cell, q.near_radius, q.window, q.tail_tolerance}) w.put<double>(v);
  std::ostringstream name;
  name << "psi_N" << spec.N << "_m" << spec.m << "_" << std::hex << std::setw(16) << std::setfill('0')
       << fnv1a(w.data().data(), w.data().size()) << ".bin";
  return name.str();
}

double psi_cache_refinement_gap(const PsiCache& c) {
  Eigen::Index k = 0;
  c.E.maxCoeff(&k);
  QuadratureOptions fine = c.options.quad;
  fine.dyadic_levels += 20;
  fine.q_dyadic += 4;
  fine.q_uniform += 4;
  fine.window *= 1.25;
  SingularProfile psi0(c.spec, ProfileDescriptor{});
  const double v = heat_at(c.spec, psi0, 1.0, c.grid.point(k), fine);
  return std::abs(v - c.E[k]) / std::abs(v);
}

PsiCache cached_psi(const SectorSpec& spec, const PsiCacheOptions& options, const fs::path& dir) {
  const fs::path file = dir / psi_cache_name(spec, options);
  if (fs::exists(file)) {
    try {
      PsiCache c = load_psi_cache(file);
      c.spec.alpha = spec.alpha;
      c.spec.sign_a = spec.sign_a;
      return c;
    } catch (const std::exception& e) {
      log().warn("discarding cache {}: {}", file.string(), e.what());
    }
  }
  PsiCache c = build_psi_cache(spec, options);
  save_psi_cache(file, c);
  return c;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::semigroup_checks: return "semigroup_checks";
    case Experiment::picard: return "picard";
    case Experiment::tmax: return "tmax";
    case Experiment::sweep: return "sweep";
    case Experiment::dilation: return "dilation";
    case Experiment::criteria: return "criteria";
    case Experiment::two_limit: return "two_limit";
    case Experiment::global_smallness: return "global_smallness";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  for (auto e : {Experiment::semigroup_checks, Experiment::picard, Experiment::tmax, Experiment::sweep,
                 Experiment::dilation, Experiment::criteria, Experiment::two_limit, Experiment::global_smallness})
    if (to_string(e) == s) return e;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

GridSpec RunManifest::grid() const {
  GridSpec g = GridSpec::for_sector(spec, L, n);
  if (!axes.empty()) g.axes = axes;
  return g;
}

void RunManifest::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) { throw ManifestError(msg, 0, field); };
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail("spec", e.what());
  }
  if (!(L > 0.0)) fail("grid.L", "must be positive");
  if (n < 2) fail("grid.n", "must be at least 2");
  try {
    grid().validate(spec);
  } catch (const std::exception& e) {
    fail("grid.axes", e.what());
  }
  for (double l : lambdas)
    if (!(l > 0.0)) fail("lambdas", "entries must be positive");
  for (double t : times)
    if (!(t > 0.0)) fail("times", "entries must be positive");
  auto pos = [&](double v, const char* f) {
    if (!(v > 0.0)) fail(f, "tolerance must be positive");
  };
  pos(controls.residual_gate, "controls.residual_gate");
  pos(controls.picard_tolerance, "controls.picard_tolerance");
  pos(controls.c_step, "controls.c_step");
  pos(controls.safety, "controls.safety");
  pos(controls.reaction_fraction, "controls.reaction_fraction");
  pos(controls.cap, "controls.cap");
  pos(controls.horizon, "controls.horizon");
  pos(probe_tolerance, "dilation.tolerance");
  pos(agreement_tolerance, "gates.agreement");
  pos(law_tolerance, "gates.law");
  pos(cache.h, "cache.h");
  pos(K, "picard.K");
  if (J < 1) fail("picard.J", "must be at least 1");
  if (output_dir.empty()) fail("output_dir", "must not be empty");
}

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json descriptor_json(const ProfileDescriptor& d) {
  return {{"kind", to_string(d.kind)}, {"amplitude", d.amplitude}, {"modulation", to_string(d.modulation)},
          {"epsilon", d.epsilon},      {"shift", d.shift},         {"c1", d.c1},
          {"c2", d.c2},                {"period", d.period},       {"ramp", d.ramp},
          {"t0", d.t0},                {"core", d.core},           {"dilation", d.dilation}};
}

// Walks a JSON object, tracking the dotted path for diagnostics and
// rejecting keys nobody asked for.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ManifestError("expected an object", 0, path_.empty() ? "<root>" : path_);
  }
  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ManifestError("unknown field", 0, field(it.key()));
  }
  std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  template <class T>
  void read(const std::string& k, T& out) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
        out = v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        out = v.get<T>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
        out = v.get<std::string>();
      } else {
        out = v.get<T>();
      }
    } catch (const std::exception& e) {
      throw ManifestError(e.what(), 0, field(k));
    }
  }
  template <class T, class F>
  void read_as(const std::string& k, T& out, F parse) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    try {
      if (!v.is_string()) throw std::invalid_argument("expected a string");
      out = parse(v.get<std::string>());
    } catch (const std::exception& e) {
      throw ManifestError(e.what(), 0, field(k));
    }
  }
  template <class F>
  void child(const std::string& k, F fn) {
    if (!has(k)) return;
    Obj o(j_.at(k), field(k));
    fn(o);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_descriptor(Obj& o, ProfileDescriptor& d) {
  o.read_as("kind", d.kind, [](const std::string& s) {
    auto k = profile_kind_from_string(s);
    if (k == ProfileKind::custom) throw std::invalid_argument("custom profiles cannot be given in a manifest");
    return k;
  });
  o.read("amplitude", d.amplitude);
  o.read_as("modulation", d.modulation, modulation_from_string);
  o.read("epsilon", d.epsilon);
  o.read("shift", d.shift);
  o.read("c1", d.c1);
  o.read("c2", d.c2);
  o.read("period", d.period);
  o.read("ramp", d.ramp);
  o.read("t0", d.t0);
  o.read("core", d.core);
  o.read("dilation", d.dilation);
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Line of the last key on a dotted path, found by scanning for each key in turn.
int locate(const std::string& text, const std::string& field) {
  std::size_t pos = 0, found = std::string::npos;
  std::stringstream ss(field);
  std::string key;
  while (std::getline(ss, key, '.')) {
    auto p = text.find("\"" + key + "\"", pos);
    if (p == std::string::npos) break;
    found = pos = p;
  }
  return found == std::string::npos ? 0 : line_of(text, found);
}

}  // namespace

nlohmann::ordered_json to_json(const RunManifest& m) {
  const auto& c = m.controls;
  const auto& q = m.cache.quad;
  const auto& t = m.two_limit;
  ordered_json j;
  j["experiment"] = to_string(m.experiment);
  j["spec"] = {{"N", m.spec.N}, {"m", m.spec.m}, {"gamma", m.spec.gamma}, {"alpha", m.spec.alpha}, {"a", m.spec.sign_a}};
  j["grid"] = {{"L", m.L}, {"n", m.n}};
  if (!m.axes.empty()) {
    ordered_json ax = ordered_json::array();
    for (auto k : m.axes) ax.push_back(to_string(k));
    j["grid"]["axes"] = ax;
  }
  j["profile"] = descriptor_json(m.profile);
  j["lambdas"] = m.lambdas;
  j["sweep_mode"] = m.sweep_mode == SweepMode::direct ? "direct" : "rescaled";
  j["times"] = m.times;
  j["controls"] = {{"c_step", c.c_step},
                   {"safety", c.safety},
                   {"reaction_fraction", c.reaction_fraction},
                   {"cap", c.cap},
                   {"residual_gate", c.residual_gate},
                   {"horizon", c.horizon},
                   {"handoff_fraction", c.handoff_fraction},
                   {"resolution_factor", c.resolution_factor},
                   {"picard_J", c.picard_J},
                   {"picard_tolerance", c.picard_tolerance},
                   {"start", to_string(c.start)},
                   {"max_steps", c.max_steps}};
  j["cache"] = {{"radius", m.cache.radius},         {"h", m.cache.h},
                {"dyadic_levels", q.dyadic_levels}, {"q_dyadic", q.q_dyadic},
                {"q_uniform", q.q_uniform},         {"cell", q.cell},
                {"near_radius", q.near_radius},     {"window", q.window},
                {"hermite_points", q.hermite_points}, {"tail_tolerance", q.tail_tolerance}};
  j["picard"] = {{"K", m.K}, {"J", m.J}};
  j["dilation"] = {{"r_in", m.annulus.r_in},
                   {"r_out", m.annulus.r_out},
                   {"samples", m.annulus.samples},
                   {"tolerance", m.probe_tolerance}};
  j["two_limit"] = {{"family", to_string(t.family)}, {"amplitude", t.amplitude}, {"epsilon", t.epsilon},
                    {"c1", t.c1},                    {"c2", t.c2},               {"period", t.period},
                    {"ramp", t.ramp},                {"core", t.core},           {"indices", t.indices},
                    {"control", t.run_control}};
  j["global_smallness"] = {{"t0", m.smallness.t0},
                           {"fraction", m.smallness.fraction},
                           {"horizon_factor", m.smallness.horizon_factor}};
  j["gates"] = {{"agreement", m.agreement_tolerance}, {"law", m.law_tolerance}};
  j["output_dir"] = m.output_dir;
  j["seed"] = m.seed;
  return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  {
    Obj root(j, "");
    root.read_as("experiment", m.experiment, experiment_from_string);
    root.child("spec", [&](Obj& o) {
      o.read("N", m.spec.N);
      o.read("m", m.spec.m);
      o.read("gamma", m.spec.gamma);
      o.read("alpha", m.spec.alpha);
      o.read("a", m.spec.sign_a);
    });
    root.child("grid", [&](Obj& o) {
      o.read("L", m.L);
      o.read("n", m.n);
      std::vector<std::string> ax;
      o.read("axes", ax);
      try {
        for (auto& a : ax) m.axes.push_back(axis_kind_from_string(a));
      } catch (const std::exception& e) {
        throw ManifestError(e.what(), 0, "grid.axes");
      }
    });
    root.child("profile", [&](Obj& o) { read_descriptor(o, m.profile); });
    root.read("lambdas", m.lambdas);
    root.read_as("sweep_mode", m.sweep_mode, [](const std::string& s) {
      if (s == "direct") return SweepMode::direct;
      if (s == "rescaled") return SweepMode::rescaled;
      throw std::invalid_argument("unknown sweep mode '" + s + "'");
    });
    root.read("times", m.times);
    root.child("controls", [&](Obj& o) {
      auto& c = m.controls;
      o.read("c_step", c.c_step);
      o.read("safety", c.safety);
      o.read("reaction_fraction", c.reaction_fraction);
      o.read("cap", c.cap);
      o.read("residual_gate", c.residual_gate);
      o.read("horizon", c.horizon);
      o.read("handoff_fraction", c.handoff_fraction);
      o.read("resolution_factor", c.resolution_factor);
      o.read("picard_J", c.picard_J);
      o.read("picard_tolerance", c.picard_tolerance);
      o.read_as("start", c.start, start_mode_from_string);
      o.read("max_steps", c.max_steps);
    });
    root.child("cache", [&](Obj& o) {
      auto& q = m.cache.quad;
      o.read("radius", m.cache.radius);
      o.read("h", m.cache.h);
      o.read("dyadic_levels", q.dyadic_levels);
      o.read("q_dyadic", q.q_dyadic);
      o.read("q_uniform", q.q_uniform);
      o.read("cell", q.cell);
      o.read("near_radius", q.near_radius);
      o.read("window", q.window);
      o.read("hermite_points", q.hermite_points);
      o.read("tail_tolerance", q.tail_tolerance);
    });
    root.child("picard", [&](Obj& o) {
      o.read("K", m.K);
      o.read("J", m.J);
    });
    root.child("dilation", [&](Obj& o) {
      o.read("r_in", m.annulus.r_in);
      o.read("r_out", m.annulus.r_out);
      o.read("samples", m.annulus.samples);
      o.read("tolerance", m.probe_tolerance);
    });
    root.child("two_limit", [&](Obj& o) {
      auto& t = m.two_limit;
      o.read_as("family", t.family, modulation_from_string);
      o.read("amplitude", t.amplitude);
      o.read("epsilon", t.epsilon);
      o.read("c1", t.c1);
      o.read("c2", t.c2);
      o.read("period", t.period);
      o.read("ramp", t.ramp);
      o.read("core", t.core);
      o.read("indices", t.indices);
      o.read("control", t.run_control);
    });
    root.child("global_smallness", [&](Obj& o) {
      o.read("t0", m.smallness.t0);
      o.read("fraction", m.smallness.fraction);
      o.read("horizon_factor", m.smallness.horizon_factor);
    });
    root.child("gates", [&](Obj& o) {
      o.read("agreement", m.agreement_tolerance);
      o.read("law", m.law_tolerance);
    });
    root.read("output_dir", m.output_dir);
    root.read("seed", m.seed);
  }
  m.validate();
  return m;
}

RunManifest parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError(e.what(), line_of(text, e.byte > 0 ? e.byte - 1 : 0), "<syntax>");
  }
  try {
    return manifest_from_json(j);
  } catch (const ManifestError& e) {
    throw ManifestError(e.what(), locate(text, e.field()), e.field());
  }
}

RunManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest " + path.string(), 0, "<file>");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

bool same_manifest(const RunManifest& a, const RunManifest& b) { return to_json(a) == to_json(b); }

namespace {

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

void write_trajectory_csv(const fs::path& path, const TrajectoryRecord& rec) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << std::setprecision(17) << "t,sup_norm,dt,status\n";
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    out << rec.times[k] << "," << rec.sup_norms[k] << "," << rec.steps[k] << ",";
    out << (k + 1 == rec.times.size() ? to_string(rec.status) : "running") << "\n";
  }
}

nlohmann::ordered_json to_json(const TrajectoryRecord& rec) {
  ordered_json j;
  j["status"] = to_string(rec.status);
  j["tmax"] = finite_or_null(rec.tmax);
  j["uncertainty"] = rec.uncertainty;
  j["tmax_fit"] = finite_or_null(rec.tmax_fit);
  j["fit_residual"] = finite_or_null(rec.fit_residual);
  j["rate_deviation"] = finite_or_null(rec.rate_deviation);
  j["fit_window"] = rec.fit_window;
  j["samples"] = rec.times.size();
  j["gates"] = {{"type_one_fit", rec.status == TrajectoryStatus::blew_up},
                {"extrapolation_justified", !rec.extrapolation_unjustified},
                {"handoff_resolved", !rec.handoff_underresolved}};
  if (rec.picard) {
    const auto& p = *rec.picard;
    j["picard"] = {{"K", p.K},
                   {"M", p.M},
                   {"T", p.T_picard},
                   {"t0", p.t0},
                   {"iterations", p.iterations},
                   {"final_norm", p.final_norm},
                   {"max_contraction", p.max_contraction},
                   {"converged", p.converged}};
  }
  j["note"] = rec.note;
  return j;
}

void write_sweep_csv(const fs::path& path, const LifespanCurve& curve) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << std::setprecision(17) << "lambda,tmax,uncertainty,scaled,status,included\n";
  for (const auto& e : curve.entries)
    out << e.lambda << "," << e.tmax << "," << e.uncertainty << "," << e.scaled << "," << to_string(e.status) << ","
        << (e.included ? 1 : 0) << "\n";
}

nlohmann::ordered_json to_json(const LifespanCurve& curve) {
  ordered_json j;
  j["sigma"] = finite_or_null(curve.sigma);
  j["mode"] = curve.mode == SweepMode::direct ? "direct" : "rescaled";
  j["slope"] = finite_or_null(curve.slope);
  j["excluded"] = curve.excluded;
  j["gates"] = {{"monotone", curve.monotone}, {"fujita_consistent", curve.fujita_consistent}};
  ordered_json pts = ordered_json::array();
  for (const auto& e : curve.entries)
    pts.push_back({{"lambda", e.lambda},
                   {"tmax", finite_or_null(e.tmax)},
                   {"uncertainty", e.uncertainty},
                   {"scaled", finite_or_null(e.scaled)},
                   {"status", to_string(e.status)},
                   {"note", e.note}});
  j["points"] = pts;
  return j;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace sheat
