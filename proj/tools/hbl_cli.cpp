#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "hbl/config.hpp"
#include "hbl/function_spec.hpp"
#include "hbl/report.hpp"
#include "hbl/spectral.hpp"
#include "hbl/suites.hpp"

using namespace hbl;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0, kExitFail = 1, kExitUsage = 2;

struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

const ConfigSchema& schema() {
  using K = ValueKind;
  static const ConfigSchema s{
      {"global", {{"seed", K::integer}, {"tol", K::number}, {"threads", K::integer}, {"format", K::string}, {"out", K::string}}},
      {"verify",
       {{"pq_max", K::integer}, {"k_max", K::integer}, {"n_max", K::integer}, {"kmax", K::integer},
        {"orthogonality", K::boolean}, {"laguerre_table", K::string}}},
      {"expand",
       {{"f", K::string}, {"k", K::integer}, {"n", K::integer}, {"q_max", K::integer}, {"radius", K::number},
        {"probes", K::integer}}},
      {"tsm",
       {{"f", K::string}, {"n", K::integer}, {"radius", K::number}, {"points", K::string_list}, {"weight", K::string},
        {"center", K::string}, {"lambda", K::number}}},
      {"sphere",
       {{"f", K::string}, {"n", K::integer}, {"weight", K::string}, {"radii", K::number_list}, {"k_max", K::integer},
        {"centers", K::integer}}},
      {"cone",
       {{"f", K::string}, {"n", K::integer}, {"directions", K::string_list}, {"k_max", K::integer}, {"t_max", K::integer}}},
      {"zeros",
       {{"k_max", K::integer}, {"n_max", K::integer}, {"x_max", K::number}, {"resolution", K::number}}},
      {"heisenberg",
       {{"nz", K::integer}, {"slices", K::integer}, {"lz", K::number}, {"t_max", K::number}, {"lambda", K::number},
        {"refine", K::boolean}}},
  };
  return s;
}

struct Globals {
  std::string config_path;
  std::string out = "hbl-out";
  std::uint64_t seed = 1;
  double tol = 0;
  int threads = 0;
  std::string format = "json";
  CLI::Option *seed_opt = nullptr, *tol_opt = nullptr, *out_opt = nullptr, *threads_opt = nullptr, *format_opt = nullptr;
  Config config;
  std::vector<std::string> argv;

  std::optional<double> tolerance() const {
    if (tol_opt->count()) return tol;
    return config.number("global", "tol");
  }
};

// A CLI value, unless it was left at its default and the config supplies one.
template <class T>
T pick(const CLI::Option* opt, const T& cli, const std::optional<T>& cfg) {
  if (opt && opt->count()) return cli;
  return cfg ? *cfg : cli;
}

std::optional<int> cfg_int(const Config& c, const std::string& s, const std::string& k) {
  auto v = c.integer(s, k);
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

void finalize_globals(Globals& g) {
  if (!g.config_path.empty()) {
    g.config = Config::load(g.config_path);
    auto problems = g.config.validate(schema());
    if (!problems.empty()) throw config_error(problems);
  }
  g.seed = pick<std::uint64_t>(g.seed_opt, g.seed,
                               g.config.integer("global", "seed") ? std::optional<std::uint64_t>(*g.config.integer("global", "seed"))
                                                                  : std::nullopt);
  g.threads = pick(g.threads_opt, g.threads, cfg_int(g.config, "global", "threads"));
  g.out = pick(g.out_opt, g.out, g.config.string("global", "out"));
  g.format = pick(g.format_opt, g.format, g.config.string("global", "format"));
  if (g.format != "json" && g.format != "csv") throw config_error({"global.format: expected json or csv"});
  if (g.threads < 0 || g.threads > 256) throw usage_error("--threads must be in 0..256");
}

RunManifest manifest(const Globals& g, const std::string& command) {
  RunManifest m;
  m.command = command;
  m.config_path = g.config_path;
  m.overrides = g.argv;
  m.seed = g.seed;
  m.timestamp = manifest_timestamp();
  m.out_dir = g.out;
  return m;
}

void write_report(const Globals& g, const Report& r, const std::string& stem) {
  const fs::path path = fs::path(g.out) / (stem + "." + g.format);
  write_text(path, g.format == "json" ? r.to_json().dump(2) + "\n" : r.to_csv());
  std::cout << "report: " << path.string() << "\n";
}

void print_summary(const Report& r) {
  std::map<std::string, std::tuple<int, int, double>> per;  // identity -> (pass, fail, max residual)
  std::vector<std::string> order;
  for (const auto& row : r.rows()) {
    if (!per.count(row.identity)) order.push_back(row.identity);
    auto& [p, f, m] = per[row.identity];
    (row.pass ? p : f)++;
    if (!row.exact) m = std::max(m, row.residual);
  }
  for (const auto& id : order) {
    auto [p, f, m] = per[id];
    std::cout << (f ? "FAIL " : "ok   ") << id << ": " << p << " passed, " << f << " failed";
    if (m > 0) std::cout << ", max residual " << m;
    std::cout << "\n";
  }
  for (const auto* row : r.failures())
    std::cerr << "failing identity: " << row->identity << " " << row->parameters.dump() << " (" << anchor_for(row->identity)
              << ")\n";
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string suite;
  int pq_max = 3, k_max = 6, n_max = 3, kmax_numeric = 5;
  bool orthogonality = false;
  std::string laguerre_table;
  CLI::Option *pq_opt, *k_opt, *n_opt, *kmax_opt, *orth_opt, *table_opt;
};

int cmd_verify(Globals& g, VerifyArgs& a) {
  const Config& c = g.config;
  SymbolicRanges sr;
  sr.pq_max = pick(a.pq_opt, a.pq_max, cfg_int(c, "verify", "pq_max"));
  sr.k_max = pick(a.k_opt, a.k_max, cfg_int(c, "verify", "k_max"));
  sr.n_max = pick(a.n_opt, a.n_max, cfg_int(c, "verify", "n_max"));
  sr.threads = g.threads;
  NumericRanges nr;
  nr.orthogonality_only = pick(a.orth_opt, a.orthogonality, c.boolean("verify", "orthogonality"));
  nr.k_max = pick(a.kmax_opt, a.kmax_numeric, cfg_int(c, "verify", "kmax"));
  if (a.suite == "numeric" && (a.n_opt->count() || c.has("verify", "n_max"))) nr.n_max = sr.n_max;
  nr.tol = g.tolerance();
  nr.threads = g.threads;
  nr.seed = g.seed_opt->count() || c.has("global", "seed") ? g.seed : 17;
  const std::string table_path = pick(a.table_opt, a.laguerre_table, c.string("verify", "laguerre_table"));

  const bool all = a.suite == "all";
  if (all || a.suite == "symbolic") check_guardrails(sr);
  if (all || a.suite == "numeric") check_guardrails(nr);

  LaguerreTable table;
  if (!table_path.empty()) table = load_laguerre_table(table_path);

  Report report(manifest(g, "verify " + a.suite));
  auto add = [&](std::vector<ReportRow> rows) {
    for (auto& r : rows) report.add(std::move(r));
  };
  if (all || a.suite == "symbolic") add(symbolic_suite(sr));
  if (all || a.suite == "laguerre") add(laguerre_suite(LaguerreRanges{}, table));
  if (all || a.suite == "harmonics") add(harmonics_suite({std::max(sr.n_max, 1), std::min(sr.pq_max, 8), g.threads}));
  if (all || a.suite == "numeric") {
    auto rows = numeric_suite(nr);
    std::cout << "max residual (orthogonality, k <= " << nr.k_max << "): " << max_residual(rows, "orthogonality") << "\n";
    add(std::move(rows));
  }
  report.summary()["rows"] = report.rows().size();
  report.summary()["failures"] = report.failures().size();
  print_summary(report);
  write_report(g, report, "verify-" + a.suite);
  std::cout << (report.pass() ? "PASS" : "FAIL") << " verify " << a.suite << " (" << report.rows().size() << " checks)\n";
  return report.pass() ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- expand

struct ExpandArgs {
  std::string f;
  int k = 0, n = 1, q_max = -1, probes = 12;
  double radius = 2.0;
  CLI::Option *f_opt, *k_opt, *n_opt, *q_opt, *r_opt, *p_opt;
};

json table_json(const std::map<std::pair<int, int>, FloatBigraded>& table) {
  json rows = json::array();
  for (const auto& [pq, P] : table) {
    json terms = json::array();
    for (const auto& [m, c] : P.poly().terms()) {
      std::vector<int> al, be;
      for (int j = 0; j < P.dim(); ++j) al.push_back(m.alpha[j]), be.push_back(m.beta[j]);
      terms.push_back({{"alpha", al}, {"beta", be}, {"re", c.real()}, {"im", c.imag()}});
    }
    rows.push_back({{"p", pq.first}, {"q", pq.second}, {"terms", terms}});
  }
  return rows;
}

std::string monomial_label(const Monomial& m, int n) {
  std::string s;
  for (int j = 0; j < n; ++j) {
    if (m.alpha[j]) s += (s.empty() ? "" : " ") + std::string("z") + std::to_string(j + 1) + (m.alpha[j] > 1 ? "^" + std::to_string(m.alpha[j]) : "");
    if (m.beta[j]) s += (s.empty() ? "" : " ") + std::string("zb") + std::to_string(j + 1) + (m.beta[j] > 1 ? "^" + std::to_string(m.beta[j]) : "");
  }
  return s.empty() ? "1" : s;
}

int cmd_expand(Globals& g, ExpandArgs& a) {
  const Config& c = g.config;
  const std::string spec = pick(a.f_opt, a.f, c.string("expand", "f"));
  if (spec.empty()) throw usage_error("expand needs a function spec (--f or [expand] f)");
  const int n = pick(a.n_opt, a.n, cfg_int(c, "expand", "n"));
  const int k = pick(a.k_opt, a.k, cfg_int(c, "expand", "k"));
  const int q_max = pick(a.q_opt, a.q_max, cfg_int(c, "expand", "q_max"));
  const double radius = pick(a.r_opt, a.radius, c.number("expand", "radius"));
  const int probes = pick(a.p_opt, a.probes, cfg_int(c, "expand", "probes"));
  if (n < 1 || n > 2) throw guardrail_error("expand runs for n <= 2");
  if (k < 0 || k > 8) throw guardrail_error("expand runs for 0 <= k <= 8");
  if (probes < 1 || probes > 200) throw guardrail_error("expand takes 1..200 probes");
  if (!(radius > 0)) throw usage_error("--radius must be positive");

  TypeMixture f = parse_function_spec(spec, n);
  ExtractionOptions o;
  if (q_max >= 0) o.q_max = q_max;
  o.ball_radius = radius;
  auto e = extract_expansion(f.function(), k, n, o);

  // probes inside the ball of the tail bound
  auto pts = default_probes(n, 0.95 * radius / std::sqrt(2.0 * n), probes, g.seed);
  ProjectionOptions po;
  po.conv.threads = g.threads;
  auto direct = spectral_projection(f.function(), k, n, pts, po);
  const double tol = g.tolerance().value_or(1e-4);
  const double bound = e.tail.value + tol;

  RunManifest m = manifest(g, "expand");
  std::vector<std::vector<std::string>> coef_rows, cmp_rows;
  for (const auto& [pq, P] : e.table)
    for (const auto& [mono, v] : P.poly().terms())
      coef_rows.push_back({std::to_string(pq.first), std::to_string(pq.second), monomial_label(mono, n), fmt(v.real()), fmt(v.imag())});
  double worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const cplx ev = evaluate_expansion(e, pts[i]);
    const double res = std::abs(ev - direct[i]);
    worst = std::max(worst, res);
    std::vector<std::string> row;
    for (int j = 0; j < n; ++j) row.push_back(fmt(pts[i][j].real())), row.push_back(fmt(pts[i][j].imag()));
    for (double v : {ev.real(), ev.imag(), direct[i].real(), direct[i].imag(), res, bound}) row.push_back(fmt(v));
    cmp_rows.push_back(row);
  }
  std::vector<std::string> cmp_header;
  for (int j = 1; j <= n; ++j) cmp_header.push_back("re_z" + std::to_string(j)), cmp_header.push_back("im_z" + std::to_string(j));
  for (const char* h : {"expansion_re", "expansion_im", "projection_re", "projection_im", "residual", "bound"}) cmp_header.push_back(h);

  const fs::path out(g.out);
  write_text(out / "coefficients.csv", csv_table(m, {"p", "q", "monomial", "re", "im"}, coef_rows));
  write_text(out / "comparison.csv", csv_table(m, cmp_header, cmp_rows));
  const bool pass = worst <= bound;
  json doc = {{"manifest", m.to_json()},
              {"function", spec},
              {"k", k},
              {"n", n},
              {"q_max", e.q_max},
              {"table", table_json(e.table)},
              {"tail", {{"status", e.tail.claimed() ? "ok" : "not_claimed"}, {"value", e.tail.value}, {"radius", e.tail.radius},
                        {"threshold", e.tail.threshold}}},
              {"f_norm", e.f_norm},
              {"resolution_change", e.resolution_change},
              {"comparison", {{"max_residual", worst}, {"bound", bound}, {"pass", pass}}}};
  write_text(out / "expansion.json", doc.dump(2) + "\n");
  std::cout << "coefficient table: " << e.table.size() << " row(s)\n";
  for (const auto& [pq, P] : e.table) std::cout << "  (" << pq.first << "," << pq.second << ") " << P.poly().size() << " term(s)\n";
  std::cout << "tail bound (" << (e.tail.claimed() ? "ok" : "not_claimed") << "): " << e.tail.value << "\n";
  std::cout << "max |expansion - projection| = " << worst << " (bound " << bound << ")\n";
  std::cout << "wrote " << (out / "expansion.json").string() << ", coefficients.csv, comparison.csv\n";
  std::cout << (pass ? "PASS" : "FAIL") << " expand\n";
  return pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- tsm

struct TsmArgs {
  std::string f, weight, center;
  std::vector<std::string> points;
  int n = 1;
  double radius = 1.0, lambda = 1.0;
  CLI::Option *f_opt, *w_opt, *c_opt, *p_opt, *n_opt, *r_opt, *l_opt;
};

int cmd_tsm(Globals& g, TsmArgs& a) {
  const Config& c = g.config;
  const std::string spec = pick(a.f_opt, a.f, c.string("tsm", "f"));
  if (spec.empty()) throw usage_error("tsm needs a function spec (--f or [tsm] f)");
  const int n = pick(a.n_opt, a.n, cfg_int(c, "tsm", "n"));
  if (n < 1 || n > 2) throw guardrail_error("tsm runs for n <= 2");
  const double radius = pick(a.r_opt, a.radius, c.number("tsm", "radius"));
  const double lambda = pick(a.l_opt, a.lambda, c.number("tsm", "lambda"));
  const std::string weight = pick(a.w_opt, a.weight, c.string("tsm", "weight"));
  const std::string center = pick(a.c_opt, a.center, c.string("tsm", "center"));
  std::vector<std::string> points = pick(a.p_opt, a.points, c.strings("tsm", "points"));
  if (points.empty()) points.push_back(n == 1 ? "0" : "0 0");

  TypeMixture f = parse_function_spec(spec, n);
  SphereMeasureSpec s;
  s.radius = radius;
  if (!weight.empty()) s.weight = parse_weight_spec(weight, n);
  if (!center.empty()) s.center = parse_point(center, n);
  const SphereRule rule = make_sphere_rule(n, s.nodes);
  RunManifest m = manifest(g, "tsm");
  std::vector<std::vector<std::string>> rows;
  json vals = json::array();
  bool under = false;
  for (const auto& text : points) {
    Point z = parse_point(text, n);
    auto r = twisted_spherical_mean(f.function(), s, rule, z, lambda);
    under = under || r.under_resolved;
    rows.push_back({text, fmt(r.value.real()), fmt(r.value.imag()), r.under_resolved ? "1" : "0"});
    vals.push_back({{"point", text}, {"re", r.value.real()}, {"im", r.value.imag()}, {"under_resolved", r.under_resolved}});
    std::cout << "tsm(" << text << ") = " << r.value.real() << (r.value.imag() < 0 ? " - " : " + ") << std::abs(r.value.imag())
              << "i" << (r.under_resolved ? "  [under-resolved]" : "") << "\n";
  }
  const fs::path out(g.out);
  if (g.format == "json")
    write_text(out / "tsm.json", json({{"manifest", m.to_json()}, {"anchor", anchor_for("twisted_spherical_mean")}, {"function", spec},
                                      {"radius", radius}, {"lambda", lambda}, {"weight", weight}, {"values", vals}})
                                     .dump(2) + "\n");
  else
    write_text(out / "tsm.csv", csv_table(m, {"point", "re", "im", "under_resolved"}, rows));
  return under ? kExitFail : kExitPass;
}

// ---------------------------------------------------------------- experiments

struct SphereArgs {
  std::string f = "0", weight = "z1";
  std::vector<double> radii;
  int n = 1, k_max = 6, centers = 2;
  CLI::Option *f_opt, *w_opt, *r_opt, *n_opt, *k_opt, *c_opt;
};

int cmd_sphere(Globals& g, SphereArgs& a) {
  const Config& c = g.config;
  const std::string spec = pick(a.f_opt, a.f, c.string("sphere", "f"));
  const int n = pick(a.n_opt, a.n, cfg_int(c, "sphere", "n"));
  if (n < 1 || n > 2) throw guardrail_error("the sphere experiment runs for n <= 2");
  const std::string weight = pick(a.w_opt, a.weight, c.string("sphere", "weight"));
  std::vector<double> radii = pick(a.r_opt, a.radii, c.numbers("sphere", "radii"));
  if (radii.empty()) radii = {1.3, 2.1};
  SphereExperimentOptions o;
  o.k_max = pick(a.k_opt, a.k_max, cfg_int(c, "sphere", "k_max"));
  o.centers = pick(a.c_opt, a.centers, cfg_int(c, "sphere", "centers"));
  o.seed = g.seed;
  if (o.k_max < 0 || o.k_max > 12) throw guardrail_error("sphere experiment runs for k_max <= 12");
  for (double R : radii)
    if (!(R > 0)) throw usage_error("sphere radii must be positive");

  TypeMixture f = parse_function_spec(spec, n);
  auto profile = radial_part(f);
  FloatBigraded P = parse_weight_spec(weight, n);
  auto x = sphere_injectivity_experiment(profile, P, radii, o);

  const double tol = g.tolerance().value_or(1e-4);
  RunManifest m = manifest(g, "experiment sphere");
  std::vector<std::vector<std::string>> rows;
  json jr = json::array();
  for (const auto& rep : x.radii)
    for (const auto& row : rep.rows) {
      const cplx rec = row.recovered.value_or(cplx(NAN, NAN));
      rows.push_back({fmt(rep.R), std::to_string(row.k), row.constrained ? "1" : "0", row.pinned ? "1" : "0", fmt(row.phi_at_R),
                      fmt(row.root_distance), fmt(rec.real()), fmt(rec.imag()), fmt(row.truth), row.pinned_zero ? "1" : "0"});
      json j = {{"R", rep.R}, {"k", row.k}, {"constrained", row.constrained}, {"pinned", row.pinned}, {"phi_at_R", row.phi_at_R},
                {"root_distance", row.root_distance}, {"truth", row.truth}, {"pinned_zero", row.pinned_zero}};
      if (row.recovered) j["recovered"] = {row.recovered->real(), row.recovered->imag()};
      jr.push_back(j);
    }
  std::string verdict;
  if (x.all_pinned_zero)
    verdict = "all coefficients pinned";
  else if (x.unresolved.empty())
    verdict = "every constrained coefficient recovered";
  else
    verdict = "some coefficients unresolved at the sampled radii";
  const bool pass = x.max_recovery_error <= tol;
  const fs::path out(g.out);
  write_text(out / "sphere.csv", csv_table(m, {"R", "k", "constrained", "pinned", "phi_at_R", "root_distance", "recovered_re",
                                               "recovered_im", "truth", "pinned_zero"},
                                           rows));
  json doc = {{"manifest", m.to_json()}, {"anchor", anchor_for("sphere_injectivity")}, {"function", spec}, {"weight", weight},
              {"verdict", verdict}, {"rows", jr}, {"unresolved", x.unresolved}, {"unconstrained", x.unconstrained},
              {"decay_exponent", x.decay_exponent}, {"max_recovery_error", x.max_recovery_error}, {"tolerance", tol}, {"pass", pass}};
  write_text(out / "sphere.json", doc.dump(2) + "\n");
  std::cout << "verdict: " << verdict << "\n";
  if (!x.unresolved.empty()) {
    std::cout << "unresolved k:";
    for (int k : x.unresolved) std::cout << " " << k;
    std::cout << "\n";
  }
  if (!x.unconstrained.empty()) std::cout << "k < q unconstrained: " << x.unconstrained.size() << " index(es)\n";
  std::cout << "max recovery error " << x.max_recovery_error << " (tolerance " << tol << ")\n";
  std::cout << (pass ? "PASS" : "FAIL") << " experiment sphere\n";
  return pass ? kExitPass : kExitFail;
}

struct ConeArgs {
  std::string f;
  std::vector<std::string> directions;
  int n = 2, k_max = 2, t_max = 4;
  CLI::Option *f_opt, *d_opt, *n_opt, *k_opt, *t_opt;
};

int cmd_cone(Globals& g, ConeArgs& a) {
  const Config& c = g.config;
  const std::string spec = pick(a.f_opt, a.f, c.string("cone", "f"));
  if (spec.empty()) throw usage_error("the cone experiment needs a function spec (--f or [cone] f)");
  const int n = pick(a.n_opt, a.n, cfg_int(c, "cone", "n"));
  if (n < 1 || n > 2) throw guardrail_error("the cone experiment runs for n <= 2");
  std::vector<std::string> dirs = pick(a.d_opt, a.directions, c.strings("cone", "directions"));
  if (dirs.empty()) throw usage_error("the cone experiment needs at least one direction");
  ConeOptions o;
  o.k_max = pick(a.k_opt, a.k_max, cfg_int(c, "cone", "k_max"));
  o.t_max = pick(a.t_opt, a.t_max, cfg_int(c, "cone", "t_max"));
  o.seed = g.seed;
  if (o.k_max < 0 || o.k_max > 4 || o.t_max < 0 || o.t_max > 8) throw guardrail_error("cone experiment runs for k_max <= 4, t_max <= 8");

  TypeMixture f = parse_function_spec(spec, n);
  std::vector<Point> pts;
  for (const auto& d : dirs) {
    Point z = parse_point(d, n);
    const double r = z.norm();
    if (!(r > 0)) throw usage_error("cone direction must be nonzero");
    pts.push_back(z * (1 / r));
  }
  auto x = cone_injectivity_experiment(f, pts, o);

  const double tol = g.tolerance().value_or(1e-3);
  RunManifest m = manifest(g, "experiment cone");
  std::vector<std::vector<std::string>> rows;
  json jr = json::array();
  for (const auto& r : x.rows) {
    rows.push_back({std::to_string(r.k), std::to_string(r.direction), std::to_string(r.s), std::to_string(r.t), fmt(r.fitted.real()),
                    fmt(r.fitted.imag()), fmt(r.planted.real()), fmt(r.planted.imag()), r.forced_zero ? "1" : "0"});
    jr.push_back({{"k", r.k}, {"direction", r.direction}, {"s", r.s}, {"t", r.t}, {"fitted", {r.fitted.real(), r.fitted.imag()}},
                  {"planted", {r.planted.real(), r.planted.imag()}}, {"forced_zero", r.forced_zero}});
  }
  std::string verdict;
  if (x.non_injective_detected)
    verdict = "non-injective configuration detected";
  else if (x.injective_for_class)
    verdict = "planted coefficients recovered";
  else
    verdict = "inconclusive";
  const bool pass = x.max_rel_error <= tol;
  json types = json::array(), vanishing = json::array();
  for (auto [s, t] : x.present_types) types.push_back({s, t});
  for (auto [s, t] : x.vanishing_types) vanishing.push_back({s, t});
  const fs::path out(g.out);
  write_text(out / "cone.csv", csv_table(m, {"k", "direction", "s", "t", "fitted_re", "fitted_im", "planted_re", "planted_im", "forced_zero"}, rows));
  json doc = {{"manifest", m.to_json()}, {"anchor", anchor_for("cone_injectivity")}, {"function", spec}, {"directions", dirs},
              {"verdict", verdict}, {"rows", jr}, {"present_types", types}, {"vanishing_types", vanishing},
              {"max_condition", x.max_condition}, {"max_fit_residual", x.max_fit_residual}, {"max_rel_error", x.max_rel_error},
              {"max_weight_error", x.max_weight_error}, {"tolerance", tol}, {"pass", pass}};
  write_text(out / "cone.json", doc.dump(2) + "\n");
  std::cout << "verdict: " << verdict << "\n";
  std::cout << "max relative error " << x.max_rel_error << " (tolerance " << tol << "), max condition " << x.max_condition << "\n";
  std::cout << (pass ? "PASS" : "FAIL") << " experiment cone\n";
  return pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- zeros

struct ZerosArgs {
  int k_max = 20, n_max = 4;
  double x_max = 200, resolution = 1e-12;
  CLI::Option *k_opt, *n_opt, *x_opt, *r_opt;
};

int cmd_zeros(Globals& g, ZerosArgs& a) {
  const Config& c = g.config;
  const int k_max = pick(a.k_opt, a.k_max, cfg_int(c, "zeros", "k_max"));
  const int n_max = pick(a.n_opt, a.n_max, cfg_int(c, "zeros", "n_max"));
  const double x_max = pick(a.x_opt, a.x_max, c.number("zeros", "x_max"));
  const double res = pick(a.r_opt, a.resolution, c.number("zeros", "resolution"));
  if (k_max < 1 || k_max > 30) throw guardrail_error("zeros runs for 1 <= k_max <= 30");
  if (n_max < 1 || n_max > kMaxDim) throw guardrail_error("zeros runs for n <= 4");
  if (!(x_max > 0) || !(res > 0)) throw usage_error("x_max and resolution must be positive");

  Report report(manifest(g, "zeros"));
  std::size_t candidates = 0;
  for (int n = 1; n <= n_max; ++n) {
    LaguerreZeroScanner s(n - 1, to_rational(x_max), to_rational(res));
    for (int k1 = 1; k1 <= k_max; ++k1)
      for (int k2 = k1 + 1; k2 <= k_max; ++k2) {
        auto z = s.scan(k1, k2);
        candidates += z.candidates.size();
        ReportRow row{"zeros", "common_zeros", {{"n", n}, {"order", n - 1}, {"k1", k1}, {"k2", k2}},
                      true, z.candidates.empty() && z.gcd_degree == 0,
                      static_cast<double>(z.candidates.size()), 0,
                      "gcd degree " + std::to_string(z.gcd_degree) + ", roots " + std::to_string(z.roots1.size()) + "/" +
                          std::to_string(z.roots2.size())};
        report.add(row);
      }
  }
  report.summary()["candidates"] = candidates;
  print_summary(report);
  write_report(g, report, "zeros");
  std::cout << (report.pass() ? "PASS" : "FAIL") << " zeros: " << candidates << " coincidence candidate(s)\n";
  return report.pass() ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------- demo-heisenberg

struct DemoArgs {
  int nz = 16, slices = 17;
  double lz = 4.0, t_max = 5.0, lambda = 1.0;
  bool refine = false;
  CLI::Option *nz_opt, *s_opt, *lz_opt, *t_opt, *l_opt, *r_opt;
};

int cmd_demo(Globals& g, DemoArgs& a) {
  const Config& c = g.config;
  HeisenbergOptions o;
  o.nz = pick(a.nz_opt, a.nz, cfg_int(c, "heisenberg", "nz"));
  o.slices = pick(a.s_opt, a.slices, cfg_int(c, "heisenberg", "slices"));
  o.lz = pick(a.lz_opt, a.lz, c.number("heisenberg", "lz"));
  o.T = pick(a.t_opt, a.t_max, c.number("heisenberg", "t_max"));
  o.lambda = pick(a.l_opt, a.lambda, c.number("heisenberg", "lambda"));
  const bool refine = pick(a.r_opt, a.refine, c.boolean("heisenberg", "refine"));
  auto gauss = [](cplx z, double t) { return cplx(std::exp(-std::norm(z) - t * t)); };
  const double tol = g.tolerance().value_or(2e-2);
  Report report(manifest(g, "demo-heisenberg"));
  auto coarse = heisenberg_slice_demo(gauss, gauss, o);
  report.add(detail::numeric_row("demo", "heisenberg_slice", {{"nz", o.nz}, {"slices", o.slices}, {"lambda", o.lambda}}, coarse.residual,
                                 tol, "relative"));
  std::cout << "slices " << o.slices << ": residual " << coarse.residual << "\n";
  if (refine) {
    HeisenbergOptions f = o;
    f.slices = 2 * o.slices - 1;
    auto fine = heisenberg_slice_demo(gauss, gauss, f);
    std::cout << "slices " << f.slices << ": residual " << fine.residual << " (ratio " << coarse.residual / fine.residual << ")\n";
    report.add(detail::numeric_row("demo", "heisenberg_slice", {{"nz", f.nz}, {"slices", f.slices}, {"lambda", f.lambda}},
                                   fine.residual, coarse.residual / 2, "halves under refinement"));
  }
  write_report(g, report, "demo-heisenberg");
  std::cout << (report.pass() ? "PASS" : "FAIL") << " demo-heisenberg\n";
  return report.pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weyl-correspondence identities, Laguerre/harmonic checks, twisted-convolution numerics and spectral experiments",
               "hbl"};
  app.set_version_flag("--version", std::string(HBL_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(
      "Examples:\n"
      "  hbl verify symbolic --pq-max 3 --k-max 6 --n-max 3\n"
      "  hbl verify numeric --orthogonality --kmax 5\n"
      "  hbl verify all --laguerre-table tests/fixtures/corrupted_laguerre.json\n"
      "  hbl expand --f 'gauss(2)' --k 2 --n 1\n"
      "  hbl tsm --f 'phi(1,0)' --radius 1.5 --points '0.3+0.2i'\n"
      "  hbl experiment sphere --f 0 --weight z1 --radii 1.3\n"
      "  hbl experiment cone --config samples/cone.toml\n"
      "  hbl zeros --k-max 20 --n-max 4\n"
      "  hbl demo-heisenberg --refine\n"
      "Exit codes: 0 pass, 1 check failure or refused computation, 2 usage, config or guardrail error.\n"
      "Function specs: terms joined by + or -, each a product of a number, one radial profile gauss(w[,m]) or phi(k,a),\n"
      "and optional factors H(p,q[,i]), z<j>[^e], zb<j>[^e]; or corpus:<index>; or 0.");

  Globals g;
  for (int i = 1; i < argc; ++i) g.argv.push_back(argv[i]);
  app.add_option("--config", g.config_path, "TOML-style config file with [global] and per-command sections")->check(CLI::ExistingFile);
  g.out_opt = app.add_option("--out", g.out, "output directory")->capture_default_str();
  g.seed_opt = app.add_option("--seed", g.seed, "random seed (u64)")->capture_default_str();
  g.tol_opt = app.add_option("--tol", g.tol, "tolerance override for numeric checks");
  g.threads_opt = app.add_option("--threads", g.threads, "worker threads (0: hardware concurrency)")->capture_default_str();
  g.format_opt = app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  std::function<int()> run;

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run invariant suites; exit 0 iff every check passes");
  verify->add_option("suite", va.suite, "symbolic | laguerre | harmonics | numeric | all")
      ->required()
      ->check(CLI::IsMember({"symbolic", "laguerre", "harmonics", "numeric", "all"}));
  va.pq_opt = verify->add_option("--pq-max", va.pq_max, "max p+q (symbolic, harmonics)")->capture_default_str();
  va.k_opt = verify->add_option("--k-max", va.k_max, "max k (symbolic)")->capture_default_str();
  va.n_opt = verify->add_option("--n-max", va.n_max, "max n (symbolic 3; numeric defaults to 1)")->capture_default_str();
  va.kmax_opt = verify->add_option("--kmax", va.kmax_numeric, "max j, k for numeric orthogonality")->capture_default_str();
  va.orth_opt = verify->add_flag("--orthogonality", va.orthogonality, "numeric: orthogonality only");
  va.table_opt = verify->add_option("--laguerre-table", va.laguerre_table, "JSON Laguerre coefficient overrides (fault injection)");
  verify->callback([&] { run = [&] { return cmd_verify(g, va); }; });

  ExpandArgs ea;
  auto* expand = app.add_subcommand("expand", "extract the real-analytic expansion of f x phi_k and compare with the projection");
  ea.f_opt = expand->add_option("--f", ea.f, "function spec");
  ea.k_opt = expand->add_option("--k", ea.k, "projection index")->capture_default_str();
  ea.n_opt = expand->add_option("--n", ea.n, "dimension")->capture_default_str();
  ea.q_opt = expand->add_option("--q-max", ea.q_max, "largest q kept (default n+k+6)");
  ea.r_opt = expand->add_option("--radius", ea.radius, "ball radius of the tail bound")->capture_default_str();
  ea.p_opt = expand->add_option("--probes", ea.probes, "comparison probes")->capture_default_str();
  expand->callback([&] { run = [&] { return cmd_expand(g, ea); }; });

  TsmArgs ta;
  auto* tsm = app.add_subcommand("tsm", "twisted spherical means f x nu_r at points");
  ta.f_opt = tsm->add_option("--f", ta.f, "function spec");
  ta.n_opt = tsm->add_option("--n", ta.n, "dimension")->capture_default_str();
  ta.r_opt = tsm->add_option("--radius", ta.radius, "sphere radius")->capture_default_str();
  ta.l_opt = tsm->add_option("--lambda", ta.lambda, "twist parameter")->capture_default_str();
  ta.w_opt = tsm->add_option("--weight", ta.weight, "weight polynomial, e.g. H(1,0) or z1*zb2");
  ta.c_opt = tsm->add_option("--center", ta.center, "sphere center, complex coordinates");
  ta.p_opt = tsm->add_option("--points", ta.points, "evaluation points, complex coordinates separated by spaces");
  tsm->callback([&] { run = [&] { return cmd_tsm(g, ta); }; });

  auto* experiment = app.add_subcommand("experiment", "injectivity experiments");
  experiment->require_subcommand(1);
  SphereArgs sa;
  auto* sphere = experiment->add_subcommand("sphere", "weighted spherical means on spheres: which Laguerre coefficients are pinned");
  sa.f_opt = sphere->add_option("--f", sa.f, "radial function spec")->capture_default_str();
  sa.n_opt = sphere->add_option("--n", sa.n, "dimension")->capture_default_str();
  sa.w_opt = sphere->add_option("--weight", sa.weight, "harmonic weight, e.g. z1 or H(1,1)")->capture_default_str();
  sa.r_opt = sphere->add_option("--radii", sa.radii, "sphere radii");
  sa.k_opt = sphere->add_option("--k-max", sa.k_max, "largest Laguerre index")->capture_default_str();
  sa.c_opt = sphere->add_option("--centers", sa.centers, "sample centers per sphere")->capture_default_str();
  sphere->callback([&] { run = [&] { return cmd_sphere(g, sa); }; });
  ConeArgs ca;
  auto* cone = experiment->add_subcommand("cone", "spectral projections on complex lines through the origin");
  ca.f_opt = cone->add_option("--f", ca.f, "function spec");
  ca.n_opt = cone->add_option("--n", ca.n, "dimension")->capture_default_str();
  ca.d_opt = cone->add_option("--directions", ca.directions, "directions z0, complex coordinates separated by spaces");
  ca.k_opt = cone->add_option("--k-max", ca.k_max, "largest projection index")->capture_default_str();
  ca.t_opt = cone->add_option("--t-max", ca.t_max, "largest antiholomorphic degree fitted")->capture_default_str();
  cone->callback([&] { run = [&] { return cmd_cone(g, ca); }; });

  ZerosArgs za;
  auto* zeros = app.add_subcommand("zeros", "exact common-zero scan of L_{k1}^{n-1}, L_{k2}^{n-1}");
  za.k_opt = zeros->add_option("--k-max", za.k_max, "largest degree")->capture_default_str();
  za.n_opt = zeros->add_option("--n-max", za.n_max, "largest n (order n-1)")->capture_default_str();
  za.x_opt = zeros->add_option("--x-max", za.x_max, "scan interval [0, x_max]")->capture_default_str();
  za.r_opt = zeros->add_option("--resolution", za.resolution, "isolation resolution")->capture_default_str();
  zeros->callback([&] { run = [&] { return cmd_zeros(g, za); }; });

  DemoArgs da;
  auto* demo = app.add_subcommand("demo-heisenberg", "group convolution on the Heisenberg group versus the twisted convolution of slices");
  da.nz_opt = demo->add_option("--nz", da.nz, "z nodes per axis")->capture_default_str();
  da.s_opt = demo->add_option("--slices", da.slices, "t slices")->capture_default_str();
  da.lz_opt = demo->add_option("--lz", da.lz, "z half-width")->capture_default_str();
  da.t_opt = demo->add_option("--t-max", da.t_max, "t half-width")->capture_default_str();
  da.l_opt = demo->add_option("--lambda", da.lambda, "frequency")->capture_default_str();
  da.r_opt = demo->add_flag("--refine", da.refine, "repeat with 2 slices - 1 and require the residual to halve");
  demo->callback([&] { run = [&] { return cmd_demo(g, da); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    finalize_globals(g);
    return run ? run() : kExitUsage;
  } catch (const config_error& e) {
    std::cerr << "config error:\n";
    for (const auto& p : e.problems) std::cerr << "  " << p << "\n";
    return kExitUsage;
  } catch (const usage_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const guardrail_error& e) {
    std::cerr << "guardrail: " << e.what() << "\n";
    return kExitUsage;
  } catch (const precondition_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const hypothesis_error& e) {
    std::cerr << "hypothesis refused: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
