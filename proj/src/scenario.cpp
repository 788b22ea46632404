#include "weakgeo/scenario.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "weakgeo/random.hpp"
#include "weakgeo/weakmeas.hpp"

namespace weakgeo {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

// Path-tracking view of a config node, so every validation message names
// the field it is about.
class Node {
public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigValidationError(path_.empty() ? "/" : path_, what);
  }

  [[nodiscard]] const json& raw() const { return j_; }
  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  [[nodiscard]] Node at(const std::string& key) const {
    require_object();
    if (!j_.contains(key)) Node(j_, path_ + "/" + key).fail("required field is missing");
    return {j_.at(key), path_ + "/" + key};
  }
  [[nodiscard]] Node at(std::size_t i) const { return {j_.at(i), path_ + "/" + std::to_string(i)}; }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }
  void only_keys(std::initializer_list<const char*> allowed) const {
    require_object();
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) Node(v, path_ + "/" + k).fail("unknown field");
  }
  std::size_t array_size(std::size_t min_size = 0) const {
    if (!j_.is_array()) fail("expected an array");
    if (j_.size() < min_size) fail("expected at least " + std::to_string(min_size) + " entries");
    return j_.size();
  }
  [[nodiscard]] double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  [[nodiscard]] long integer(long lo, long hi) const {
    if (!j_.is_number_integer()) fail("expected an integer");
    const auto v = j_.get<long long>();
    if (v < lo || v > hi) fail("expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<long>(v);
  }
  [[nodiscard]] std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

private:
  const json& j_;
  std::string path_;
};

ScenarioKind parse_kind(const Node& n) {
  const std::string s = n.string();
  for (auto k : {ScenarioKind::strong_shift, ScenarioKind::weak_shift, ScenarioKind::readout_scan,
                 ScenarioKind::triangle_phase, ScenarioKind::metric_check, ScenarioKind::sweep})
    if (to_string(k) == s) return k;
  n.fail("unknown scenario kind '" + s + "'");
}

Complex parse_complex(const Node& n) {
  if (n.raw().is_number()) return n.number();
  if (n.array_size() != 2) n.fail("expected a number or [re, im]");
  return {n.at(0).number(), n.at(1).number()};
}

BlochPoint parse_bloch(const Node& n) {
  if (n.array_size() != 2) n.fail("expected [theta, phi]");
  return {n.at(0).number(), n.at(1).number()};
}

// {"bloch": [theta, phi]} or {"amplitudes": [c0, c1, ...]} (rescaled to unit norm).
StateVector parse_state(const Node& n) {
  n.only_keys({"bloch", "amplitudes"});
  if (n.has("bloch") == n.has("amplitudes")) n.fail("give exactly one of 'bloch' or 'amplitudes'");
  if (n.has("bloch")) return state_from_bloch(parse_bloch(n.at("bloch")));
  const Node a = n.at("amplitudes");
  CVector v(static_cast<long>(a.array_size(1)));
  for (long i = 0; i < v.size(); ++i) v[i] = parse_complex(a.at(static_cast<std::size_t>(i)));
  if (v.norm() == 0.0) a.fail("zero vector is not a state");
  return StateVector::normalized(v);
}

HermitianOperator parse_observable(const Node& n) {
  if (n.raw().is_string()) {
    const std::string s = n.string();
    if (s == "sigma_x") return HermitianOperator::pauli_x();
    if (s == "sigma_y") return HermitianOperator::pauli_y();
    if (s == "sigma_z") return HermitianOperator::pauli_z();
    n.fail("unknown named observable '" + s + "' (sigma_x, sigma_y, sigma_z)");
  }
  n.only_keys({"matrix", "diagonal"});
  if (n.has("matrix") == n.has("diagonal")) n.fail("give exactly one of 'matrix' or 'diagonal'");
  try {
    if (n.has("diagonal")) {
      const Node d = n.at("diagonal");
      RVector o(static_cast<long>(d.array_size(1)));
      for (long i = 0; i < o.size(); ++i) o[i] = d.at(static_cast<std::size_t>(i)).number();
      return HermitianOperator(o.cast<Complex>().asDiagonal());
    }
    const Node m = n.at("matrix");
    const long rows = static_cast<long>(m.array_size(1));
    CMatrix mat(rows, rows);
    for (long r = 0; r < rows; ++r) {
      const Node row = m.at(static_cast<std::size_t>(r));
      if (static_cast<long>(row.array_size()) != rows) row.fail("matrix must be square");
      for (long c = 0; c < rows; ++c) mat(r, c) = parse_complex(row.at(static_cast<std::size_t>(c)));
    }
    return HermitianOperator(mat);
  } catch (const ConfigValidationError&) {
    throw;
  } catch (const InvalidArgument& e) {
    n.fail(e.what());
  }
}

GaussianSpec parse_gaussian(const Node& n) {
  n.only_keys({"center", "mean_momentum", "width", "chirp"});
  GaussianSpec g;
  if (n.has("center")) g.center = n.at("center").number();
  if (n.has("mean_momentum")) g.mean_momentum = n.at("mean_momentum").number();
  if (n.has("width")) g.width = n.at("width").number();
  if (n.has("chirp")) g.chirp = n.at("chirp").number();
  if (g.width <= 0.0) n.at("width").fail("width must be positive");
  return g;
}

Grid parse_grid(const Node& n) {
  n.only_keys({"x_min", "x_max", "points"});
  const Grid d = Grid::standard();
  const double lo = n.has("x_min") ? n.at("x_min").number() : d.x_min();
  const double hi = n.has("x_max") ? n.at("x_max").number() : d.x_max();
  const long m = n.has("points") ? n.at("points").integer(16, 1L << 22) : d.size();
  try {
    return {lo, hi, m};
  } catch (const InvalidArgument& e) {
    n.fail(e.what());
  }
}

void parse_meter(const Node& n, Scenario& s) {
  n.only_keys({"continuous", "finite"});
  if (n.has("continuous") == n.has("finite")) n.fail("give exactly one of 'continuous' or 'finite'");
  if (n.has("continuous")) {
    const Node c = n.at("continuous");
    c.only_keys({"gaussian", "grid"});
    ContinuousMeterSpec spec;
    if (c.has("gaussian")) spec.gaussian = parse_gaussian(c.at("gaussian"));
    if (c.has("grid")) spec.grid = parse_grid(c.at("grid"));
    s.continuous = spec;
    return;
  }
  const Node f = n.at("finite");
  f.only_keys({"momenta", "initial"});
  const Node p = f.at("momenta");
  std::vector<double> momenta(p.array_size(1));
  for (std::size_t i = 0; i < momenta.size(); ++i) momenta[i] = p.at(i).number();
  const StateVector initial = parse_state(f.at("initial"));
  if (initial.dim() != static_cast<long>(momenta.size()))
    f.at("initial").fail("meter state dimension " + std::to_string(initial.dim()) + " does not match " +
                         std::to_string(momenta.size()) + " momenta");
  s.finite = FiniteMeter(std::move(momenta), initial);
}

SweepSpec parse_sweep(const Node& n, const json& config) {
  n.only_keys({"base", "parameter", "values", "range"});
  SweepSpec out;
  out.base = parse_kind(n.at("base"));
  if (out.base == ScenarioKind::sweep) n.at("base").fail("a sweep cannot sweep another sweep");
  const Node param = n.at("parameter");
  out.parameter = param.string();
  try {
    const json::json_pointer ptr(out.parameter);
    if (!config.contains(ptr) || !config.at(ptr).is_number())
      param.fail("must point at an existing numeric field of this config");
  } catch (const json::exception&) {
    param.fail("not a valid JSON pointer");
  }
  if (n.has("values") == n.has("range")) n.fail("give exactly one of 'values' or 'range'");
  if (n.has("values")) {
    const Node v = n.at("values");
    for (std::size_t i = 0; i < v.array_size(1); ++i) out.values.push_back(v.at(i).number());
  } else {
    const Node r = n.at("range");
    r.only_keys({"from", "to", "steps"});
    const double from = r.at("from").number(), to = r.at("to").number();
    const long steps = r.at("steps").integer(1, 100000);
    for (long i = 0; i < steps; ++i)
      out.values.push_back(steps == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1));
  }
  return out;
}

json substitute(const json& config, const SweepSpec& sweep, double value) {
  json point = config;
  point["kind"] = to_string(sweep.base);
  point.erase("sweep");
  point[json::json_pointer(sweep.parameter)] = value;
  return point;
}

void require(bool ok, const Node& root, const std::string& field, ScenarioKind kind) {
  if (!ok) Node(root.raw(), "/" + field).fail("required for kind '" + to_string(kind) + "'");
}

void check_dims(const Scenario& s, const Node& root) {
  if (!s.alpha) return;
  const long n = s.alpha->dim();
  if (s.observable && s.observable->dim() != n)
    Node(root.raw(), "/system/observable")
        .fail("dimension " + std::to_string(s.observable->dim()) + " does not match alpha (" + std::to_string(n) + ")");
  if (s.beta && s.beta->dim() != n)
    Node(root.raw(), "/postselect")
        .fail("dimension " + std::to_string(s.beta->dim()) + " does not match alpha (" + std::to_string(n) + ")");
}

Check make_check(std::string name, std::string formula, std::string oracle_formula, std::string units,
                 double computed, double oracle, double tolerance, ToleranceKind kind = ToleranceKind::absolute) {
  Check c;
  c.name = std::move(name);
  c.formula = std::move(formula);
  c.oracle_formula = std::move(oracle_formula);
  c.units = std::move(units);
  c.computed = computed;
  c.oracle = oracle;
  c.base_tolerance = tolerance;
  c.kind = kind;
  return c;
}

// ---- scenario kinds ----

void run_strong_shift(const Scenario& s, Report& r) {
  const PointerWave w = gaussian_wave(s.continuous->gaussian, s.continuous->grid);
  const StrongCoupling c(*s.lambda, *s.observable);
  const double mean = expectation(*s.observable, *s.alpha);

  r.checks.push_back(make_check("pointer shift", "pointer_mean_shift", "lambda * expectation", "position",
                                pointer_mean_shift(*s.alpha, w, c), *s.lambda * mean, 1e-7));
  r.checks.push_back(make_check("phase-shift rate", "phase_shift_rate", "-lambda * expectation",
                                "rad per unit momentum", phase_shift_rate(*s.alpha, c), -*s.lambda * mean, 1e-9));
  r.checks.push_back(make_check("Fubini-Study speed", "fs_speed_finite_difference", "fs_speed",
                                "rad per unit momentum", fs_speed_finite_difference(*s.alpha, c),
                                fs_speed(*s.alpha, c), 1e-8, ToleranceKind::relative));
  r.values.push_back({"expectation", "expectation", "dimensionless", mean});
  r.values.push_back({"variance", "variance", "dimensionless", variance(*s.observable, *s.alpha)});

  const BipartiteState final_state = evolve_strong_continuous(*s.alpha, w, c);
  const RVector after = meter_position_density(final_state);
  const PointerStatistics stats = pointer_statistics(final_state, w.grid());
  r.values.push_back({"final pointer mean", "pointer_statistics", "position", stats.mean_q});
  r.values.push_back({"final pointer variance", "pointer_statistics", "position^2", stats.var_q});

  r.table = Table({"x", "density_initial", "density_final"});
  const Grid& g = w.grid();
  for (long j = 0; j < g.size(); ++j) r.table.add_row({g.x(j), std::norm(w.samples()[j]), after[j]});
}

void run_weak_shift(const Scenario& s, Report& r) {
  const PointerWave w = gaussian_wave(s.continuous->gaussian, s.continuous->grid);
  const double e = *s.epsilon;
  const std::array<double, 3> ladder{e, 2 * e, 4 * e};
  std::array<double, 3> shifts{};
  for (std::size_t i = 0; i < 3; ++i)
    shifts[i] = weak_shift_exact(*s.alpha, w, *s.beta, *s.observable, WeakCoupling(ladder[i]));

  const WeakValue wv = weak_value(*s.alpha, *s.beta, *s.observable);
  const double cov = covariance_term(w);
  const double slope = weak_shift_slope(ladder, shifts);
  const double first_order = wv.value.imag() * cov + wv.value.real();
  r.checks.push_back(make_check("shift slope", "weak_shift_slope(weak_shift_exact)",
                                "weak_shift_first_order / epsilon", "position per unit coupling", slope,
                                first_order, 1e-4, ToleranceKind::relative));
  r.values.push_back({"Re weak value", "weak_value", "dimensionless", wv.value.real()});
  r.values.push_back({"Im weak value", "weak_value", "dimensionless", wv.value.imag()});
  r.values.push_back({"|<beta|alpha>|", "inner_product", "dimensionless", std::abs(wv.overlap)});
  r.values.push_back({"covariance term", "covariance_term", "dimensionless", cov});

  r.table = Table({"epsilon", "shift_exact", "shift_first_order", "difference"});
  for (std::size_t i = 0; i < 3; ++i) {
    const double fo = weak_shift_first_order(wv, w, WeakCoupling(ladder[i]));
    r.table.add_row({ladder[i], shifts[i], fo, shifts[i] - fo});
  }
}

void run_readout_scan(const Scenario& s, Report& r) {
  const FiniteMeter& meter = *s.finite;
  const StrongCoupling c(*s.lambda, *s.observable);
  const StateVector a0 = indexed_state(*s.alpha, c, meter.momenta[0]);
  const StateVector a1 = indexed_state(*s.alpha, c, meter.momenta[1]);
  const Complex overlap = inner_product(a1, a0);
  const double theta = bloch_from_state(meter.initial).theta;
  const double amplitude = std::abs(overlap) * std::sin(theta);
  if (amplitude < 1e-9)
    throw UndefinedPhase("readout-scan: readout probability is flat in phi (|<A0|A1>| sin(theta) = " +
                         format_double(amplitude) + ")");
  const double peak = std::arg(overlap);

  const long n = s.scan_points;
  const double step = 2.0 * kPi / static_cast<double>(n);
  std::vector<double> traced(n), closed(n);
  CheckAccumulator agreement(make_check("readout probability vs closed form", "readout_probability",
                                        "1/2 + 1/2 |<A0|A1>| sin(theta) cos(phi - arg<A1|A0>)", "probability",
                                        0, 0, 1e-10));
  long best = 0;
  for (long i = 0; i < n; ++i) {
    const double phi = -kPi + static_cast<double>(i) * step;
    const FiniteMeter scanned = FiniteMeter::qubit(meter.momenta[0], meter.momenta[1], theta, phi);
    const DensityMatrix rho = partial_trace(evolve_strong_finite(*s.alpha, scanned, c), Factor::meter);
    traced[i] = readout_probability(rho, kReadoutReference);
    closed[i] = 0.5 + 0.5 * amplitude * std::cos(phi - peak);
    agreement.add(traced[i], closed[i]);
    if (traced[i] > traced[best]) best = i;
  }
  r.checks.push_back(agreement.result());
  const double phi_best = -kPi + static_cast<double>(best) * step;
  r.checks.push_back(make_check("readout argmax", "argmax of readout_probability scan", "arg<A1|A0>", "rad",
                                peak + wrap(phi_best - peak), peak, step));
  r.values.push_back({"|<A0|A1>|", "indexed_state", "dimensionless", std::abs(overlap)});
  r.values.push_back({"meter theta", "bloch_from_state", "rad", theta});

  if (s.beta) {
    const PostselectPhase pp = postselect_phase(*s.alpha, meter, c, *s.beta, n);
    r.checks.push_back(make_check("post-selection argmax shift", "postselect_phase.argmax_shift",
                                  "postselect_phase.phase", "rad", pp.phase + wrap(pp.argmax_shift - pp.phase),
                                  pp.phase, pp.scan_step));
  }

  r.table = Table({"phi", "probability", "closed_form", "is_argmax"});
  for (long i = 0; i < n; ++i)
    r.table.add_row({-kPi + static_cast<double>(i) * step, traced[i], closed[i], i == best ? 1.0 : 0.0});
}

void run_triangle_phase(const Scenario& s, Report& r) {
  if (!s.vertices.empty()) {
    const auto& v = s.vertices;
    const double phase =
        pancharatnam_phase(state_from_bloch(v[0]), state_from_bloch(v[1]), state_from_bloch(v[2]));
    const double omega = solid_angle(v[0], v[1], v[2]);
    r.checks.push_back(make_check("triangle phase vs solid angle", "pancharatnam_phase", "-solid_angle / 2 (mod 2 pi)",
                                  "rad", phase, phase - wrap(phase + omega / 2), 1e-9));
    r.values.push_back({"solid angle", "solid_angle", "sr", omega});
    r.table = Table({"theta1", "phi1", "theta2", "phi2", "theta3", "phi3", "phase", "solid_angle"});
    r.table.add_row({v[0].theta, v[0].phi, v[1].theta, v[1].phi, v[2].theta, v[2].phi, phase, omega});
    return;
  }
  const double e = *s.epsilon;
  const WeakValue wv = weak_value(*s.alpha, *s.beta, *s.observable);
  const double mean = expectation(*s.observable, *s.alpha);
  r.checks.push_back(make_check("triangle phase rate", "weak_triangle_rate", "-epsilon (Re O_w - expectation)",
                                "rad per unit momentum", weak_triangle_rate(*s.alpha, *s.beta, *s.observable, e),
                                -e * (wv.value.real() - mean), 1e-8));
  r.values.push_back({"Re weak value", "weak_value", "dimensionless", wv.value.real()});
  r.values.push_back({"expectation", "expectation", "dimensionless", mean});
  r.table = Table({"dy", "phase", "phase_over_dy"});
  for (double dy : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    const double t = weak_triangle_phase(*s.alpha, *s.beta, *s.observable, e, 0.0, dy);
    r.table.add_row({dy, t, t / dy});
  }
}

void run_metric_check(const Scenario& s, Report& r) {
  const StateVector& psi = *s.alpha;
  const LiftedCoordinates pc = projective_coords(psi);
  const long n = pc.n();
  // The lift differentiates the phase-free section (1, xi)/sqrt(1 + |xi|^2).
  const StateVector section = LiftedCoordinates{1.0, 0.0, pc.xi}.reconstruct();
  Rng rng = instance_rng(s.seed, 0);
  std::normal_distribution<double> normal;

  CheckAccumulator projector(make_check("coordinate vs projector form", "fs_metric_form",
                                        "1/2 |d(|psi><psi|)|_F^2", "rad^2", 0, 0, 1e-8));
  CheckAccumulator fibre(make_check("coordinate form vs sphere decomposition", "fs_metric_form",
                                    "sphere_metric_decomposition_check.fs_part", "rad^2", 0, 0, 1e-8));
  r.table = Table({"sample", "coordinate_form", "projector_form", "fs_part", "connection"});
  for (long i = 0; i < s.samples; ++i) {
    TangentDisplacement d{CVector(n)};
    for (long k = 0; k < n; ++k) d.dxi[k] = Complex(normal(rng), normal(rng));
    const double coord = fs_metric_form(pc, d);
    const CVector dpsi = lift_displacement(pc, d);
    const CMatrix dp = dpsi * section.amplitudes().adjoint() + section.amplitudes() * dpsi.adjoint();
    const double proj = 0.5 * dp.squaredNorm();
    const double fs_part = sphere_metric_decomposition_check(section, dpsi).fs_part;
    projector.add(coord, proj);
    fibre.add(coord, fs_part);
    r.table.add_row({static_cast<double>(i), coord, proj, fs_part, connection_eval(pc, d)});
  }
  if (s.samples > 0) {
    r.checks.push_back(projector.result());
    r.checks.push_back(fibre.result());
  }
  if (s.observable && s.lambda) {
    const StrongCoupling c(*s.lambda, *s.observable);
    r.checks.push_back(make_check("Fubini-Study speed", "fs_speed_finite_difference", "fs_speed",
                                  "rad per unit momentum", fs_speed_finite_difference(psi, c), fs_speed(psi, c), 1e-8,
                                  ToleranceKind::relative));
  }
}

void run_kind(const Scenario& s, Report& r);

void run_sweep(const Scenario& s, Report& r) {
  const SweepSpec& sw = *s.sweep;
  r.table = Table({"value", "computed", "oracle", "abs_error", "tolerance", "passed"});
  json points = json::array();
  for (double v : sw.values) {
    const Scenario point = validate_scenario(substitute(s.source, sw, v));
    Report sub;
    sub.tolerance_scale = r.tolerance_scale;
    run_kind(point, sub);
    for (Check c : sub.checks) {
      c.name += " @ " + sw.parameter + "=" + format_double(v);
      r.checks.push_back(std::move(c));
    }
    const Check& primary = sub.checks.front();
    r.notes["sweep_csv_check"] = primary.name;
    r.table.add_row({v, primary.computed, primary.oracle, primary.abs_error(),
                     primary.base_tolerance * r.tolerance_scale, primary.passed(r.tolerance_scale) ? 1.0 : 0.0});
  }
  r.notes["sweep_base"] = to_string(sw.base);
  r.notes["sweep_parameter"] = sw.parameter;
}

void run_kind(const Scenario& s, Report& r) {
  switch (s.kind) {
    case ScenarioKind::strong_shift: return run_strong_shift(s, r);
    case ScenarioKind::weak_shift: return run_weak_shift(s, r);
    case ScenarioKind::readout_scan: return run_readout_scan(s, r);
    case ScenarioKind::triangle_phase: return run_triangle_phase(s, r);
    case ScenarioKind::metric_check: return run_metric_check(s, r);
    case ScenarioKind::sweep: return run_sweep(s, r);
  }
}

}  // namespace

ConfigParseError::ConfigParseError(const std::string& what, long line, long column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                                  : what),
      line_(line),
      column_(column) {}

ConfigValidationError::ConfigValidationError(const std::string& path, const std::string& what)
    : InvalidArgument(path + ": " + what) {}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::strong_shift: return "strong-shift";
    case ScenarioKind::weak_shift: return "weak-shift";
    case ScenarioKind::readout_scan: return "readout-scan";
    case ScenarioKind::triangle_phase: return "triangle-phase";
    case ScenarioKind::metric_check: return "metric-check";
    case ScenarioKind::sweep: return "sweep";
  }
  return "?";
}

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the last character read.
    long line = 1, column = 0;
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 0;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("column "); pos != std::string::npos)
      if (const auto colon = what.find(": ", pos); colon != std::string::npos) what = what.substr(colon + 2);
    throw ConfigParseError(what, line, std::max(column, 1L));
  }
}

Scenario validate_scenario(const json& config) {
  const Node root(config, "");
  root.only_keys({"schema", "description", "kind", "seed", "system", "meter", "coupling", "postselect",
                  "triangle", "scan_points", "samples", "sweep"});
  if (root.at("schema").string() != kScenarioSchema)
    root.at("schema").fail(std::string("unsupported schema version (expected '") + kScenarioSchema + "')");
  if (root.has("description")) (void)root.at("description").string();

  Scenario s;
  s.source = config;
  s.kind = parse_kind(root.at("kind"));
  if (root.has("seed")) s.seed = static_cast<std::uint64_t>(root.at("seed").integer(0, std::numeric_limits<long>::max()));

  if (root.has("system")) {
    const Node sys = root.at("system");
    sys.only_keys({"dim", "alpha", "observable"});
    if (sys.has("alpha")) s.alpha = parse_state(sys.at("alpha"));
    if (sys.has("observable")) s.observable = parse_observable(sys.at("observable"));
    if (sys.has("dim")) {
      const long dim = sys.at("dim").integer(1, 64);
      if (s.alpha && s.alpha->dim() != dim) sys.at("alpha").fail("dimension does not match system.dim");
      if (s.observable && s.observable->dim() != dim) sys.at("observable").fail("dimension does not match system.dim");
    }
  }
  if (root.has("meter")) parse_meter(root.at("meter"), s);
  if (root.has("coupling")) {
    const Node c = root.at("coupling");
    c.only_keys({"lambda", "epsilon"});
    if (c.has("lambda")) s.lambda = c.at("lambda").number();
    if (c.has("epsilon")) s.epsilon = c.at("epsilon").number();
  }
  if (root.has("postselect")) s.beta = parse_state(root.at("postselect"));
  if (root.has("triangle")) {
    const Node t = root.at("triangle");
    t.only_keys({"vertices"});
    const Node v = t.at("vertices");
    if (v.array_size() != 3) v.fail("expected exactly three [theta, phi] vertices");
    for (std::size_t i = 0; i < 3; ++i) s.vertices.push_back(parse_bloch(v.at(i)));
  }
  if (root.has("scan_points")) s.scan_points = root.at("scan_points").integer(8, 1L << 20);
  if (root.has("samples")) s.samples = root.at("samples").integer(0, 1L << 20);
  check_dims(s, root);

  const ScenarioKind k = s.kind;
  switch (k) {
    case ScenarioKind::strong_shift:
      require(s.alpha.has_value(), root, "system/alpha", k);
      require(s.observable.has_value(), root, "system/observable", k);
      require(s.lambda.has_value(), root, "coupling/lambda", k);
      if (s.finite) root.at("meter").fail("strong-shift needs a continuous meter");
      if (!s.continuous) s.continuous = ContinuousMeterSpec{};
      break;
    case ScenarioKind::weak_shift: {
      require(s.alpha.has_value(), root, "system/alpha", k);
      require(s.observable.has_value(), root, "system/observable", k);
      require(s.beta.has_value(), root, "postselect", k);
      if (s.finite) root.at("meter").fail("weak-shift needs a continuous meter");
      if (!s.continuous) s.continuous = ContinuousMeterSpec{};
      if (!s.epsilon) s.epsilon = 1e-3;
      if (std::abs(*s.epsilon) * 4 > kWeakRegimeBound || *s.epsilon == 0.0)
        Node(config, "/coupling/epsilon").fail("need 0 < |epsilon| <= " + format_double(kWeakRegimeBound / 4) +
                                               " so the ladder epsilon, 2 epsilon, 4 epsilon stays weak");
      break;
    }
    case ScenarioKind::readout_scan:
      require(s.alpha.has_value(), root, "system/alpha", k);
      require(s.observable.has_value(), root, "system/observable", k);
      require(s.lambda.has_value(), root, "coupling/lambda", k);
      require(s.finite.has_value(), root, "meter/finite", k);
      if (s.finite->momenta.size() != 2) root.at("meter").at("finite").at("momenta").fail("readout-scan needs a two-state meter");
      break;
    case ScenarioKind::triangle_phase:
      if (s.vertices.empty()) {
        require(s.alpha.has_value(), root, "system/alpha", k);
        require(s.observable.has_value(), root, "system/observable", k);
        require(s.beta.has_value(), root, "postselect", k);
        if (!s.epsilon) s.epsilon = 1e-3;
      }
      break;
    case ScenarioKind::metric_check:
      require(s.alpha.has_value(), root, "system/alpha", k);
      if (s.alpha->dim() < 2) root.at("system").at("alpha").fail("metric-check needs dim >= 2");
      if (s.observable.has_value() != s.lambda.has_value())
        root.fail("metric-check speed comparison needs both system.observable and coupling.lambda");
      break;
    case ScenarioKind::sweep:
      require(root.has("sweep"), root, "sweep", k);
      s.sweep = parse_sweep(root.at("sweep"), config);
      for (double v : s.sweep->values) {
        try {
          (void)validate_scenario(substitute(config, *s.sweep, v));
        } catch (const ConfigValidationError& e) {
          root.at("sweep").fail(std::string("at ") + s.sweep->parameter + "=" + format_double(v) + ": " + e.what());
        }
      }
      break;
  }
  if (k != ScenarioKind::sweep && root.has("sweep")) root.at("sweep").fail("only valid for kind 'sweep'");
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigParseError("cannot open config file '" + path + "'", 0, 0);
  std::stringstream buf;
  buf << f.rdbuf();
  return validate_scenario(parse_config_text(buf.str()));
}

Report run_scenario(const Scenario& scenario, double tolerance_scale) {
  if (!(tolerance_scale > 0.0) || !std::isfinite(tolerance_scale))
    throw InvalidArgument("tolerance scale must be a positive finite number");
  const auto start = std::chrono::steady_clock::now();
  Report r;
  r.mode = "run";
  r.scenario = scenario.source;
  r.tolerance_scale = tolerance_scale;
  r.notes["kind"] = to_string(scenario.kind);
  r.notes["schema"] = kScenarioSchema;
  r.notes["seed"] = scenario.seed;
  run_kind(scenario, r);
  r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace weakgeo
