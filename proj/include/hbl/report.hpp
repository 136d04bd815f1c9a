#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hbl/core.hpp"
#include "json.hpp"

#ifndef HBL_VERSION
#define HBL_VERSION "0.0.0"
#endif

namespace hbl {

using nlohmann::json;

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;  // command-line tokens after the subcommand path
  std::uint64_t seed = 0;
  std::string version = HBL_VERSION;
  std::string timestamp;
  std::string out_dir;

  json to_json() const {
    return {{"command", command}, {"config", config_path}, {"overrides", overrides}, {"seed", seed},
            {"version", version}, {"timestamp", timestamp}, {"out_dir", out_dir}};
  }
};

// UTC ISO 8601; SOURCE_DATE_EPOCH pins it so that repeated runs are byte-identical.
inline std::string manifest_timestamp() {
  std::time_t t;
  if (const char* e = std::getenv("SOURCE_DATE_EPOCH"); e && *e)
    t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The identity each report row checks, written as a formula.
inline const std::map<std::string, std::string>& identity_anchors() {
  static const std::map<std::string, std::string> table{
      {"monomial_symbol", "(W_1^+)^p W_2^q phi_k^{n-1} = (-2)^{-(p+q)} z_1^p zbar_2^q phi_{k-p}^{n+p+q-1}, zero if k < p"},
      {"harmonic_symbol", "P(W~) phi_k^{n-1} = (-2)^{-(p+q)} P phi_{k-p}^{n+p+q-1} for P in H_{p,q}, lambda = 1; "
                          "drop q for lambda = -1; zero below the threshold"},
      {"tau_equals_tau_prime", "tau(P) phi = tau'(P) phi for harmonic P"},
      {"tau_non_harmonic", "tau'(z zbar) phi_0 - tau(z zbar) phi_0 = (lambda/2) phi_0"},
      {"commutator", "[W_j^+, -W_j] = (lambda/2) I"},
      {"special_hermite", "(-Delta + |z|^2/4) phi_k^{n-1} = (2k+n) phi_k^{n-1}"},
      {"laguerre_derivative", "d/dx L_k^a = -L_{k-1}^{a+1}"},
      {"laguerre_shift", "L_{k-1}^{a+1} + L_k^a = L_k^{a+1}"},
      {"generalized_derivative", "d/dx M_a^m + M_{a+1}^{m+1} = 0"},
      {"generalized_shift", "M_{a+1}^{m+1} + M_a^m = M_a^{m+1}"},
      {"harmonic_dimension", "dim ker Delta on P_{p,q} = (p+q+n-1)(p+n-2)!(q+n-2)!/(p! q! (n-1)! (n-2)!)"},
      {"harmonic_dimension_printed", "dim ker Delta on P_{p,q} = (p+q+n-1)(p+n-2)!(q+n-2)!/(p! q! (n-2)!)"},
      {"harmonic_kernel", "Delta Y = 0 for every basis element Y of H_{p,q}"},
      {"sup_norm_bound", "sup_S |P| <= sqrt(d(p,q)) ||P||_{L2(S)}"},
      {"orthogonality", "phi_j x phi_k = (2 pi)^n delta_{jk} phi_k"},
      {"radial_projection", "f x phi_k = B_k <f, phi_k> phi_k for radial f"},
      {"hecke_bochner", "(a P) x phi_k^{n-1} = c P phi_{k-p}^{n+p+q-1} int a phi_{k-p}^{n+p+q-1} t^{2(n+p+q)-1} dt, zero if k < p"},
      {"weighted_functional", "phi_k x nu_t = K t^{2(p+q)} phi_{k-q}^{g-1}(t) P phi_{k-q}^{g-1}"},
      {"common_zeros", "L_{k1}^{n-1} and L_{k2}^{n-1} share no zero on (0, X]"},
      {"heisenberg_slice", "(f * g)^lambda = f^lambda x_lambda g^lambda"},
      {"expansion", "f x phi_k = sum_{p<=k, q} P_{p,q}^k phi_{k-p}^{n+p+q-1}, |error| <= tail bound"},
      {"parseval", "||f x phi_k||^2 = sum |S| mean |P_{p,q}|^2 ||phi_{k-p}^{n+p+q-1}||^2"},
      {"sphere_injectivity", "int (f x nu_r)(z) phi_{k-q}^{g-1}(r) r^{2n-1} dr = c <f, phi_k> phi_{k-q}^{g-1}(R) P(z) on |z| = R"},
      {"cone_injectivity", "Q_k(r e^{i theta} z0) = sum P_{s,t}(z0) e^{i(s-t) theta} r^{s+t} phi_{k-s}^{n+s+t-1}(r)"},
      {"twisted_spherical_mean", "f x mu_r(z) with dnu_r = P dmu_r"},
  };
  return table;
}

inline const std::string& anchor_for(const std::string& identity) {
  auto it = identity_anchors().find(identity);
  if (it == identity_anchors().end()) throw precondition_error("no anchor for identity " + identity);
  return it->second;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

struct ReportRow {
  std::string suite;
  std::string identity;
  json parameters = json::object();
  bool exact = true;
  bool pass = true;
  double residual = 0;   // exact rows: number of nonzero residual terms
  double tolerance = 0;
  std::string branch;
};

class Report {
 public:
  explicit Report(RunManifest m) : manifest_(std::move(m)) {}

  void add(ReportRow row) {
    anchor_for(row.identity);
    rows_.push_back(std::move(row));
  }
  json& summary() { return summary_; }
  const std::vector<ReportRow>& rows() const { return rows_; }
  const RunManifest& manifest() const { return manifest_; }

  bool pass() const {
    for (const auto& r : rows_)
      if (!r.pass) return false;
    return true;
  }
  std::vector<const ReportRow*> failures() const {
    std::vector<const ReportRow*> out;
    for (const auto& r : rows_)
      if (!r.pass) out.push_back(&r);
    return out;
  }

  json to_json() const {
    json rows = json::array();
    for (const auto& r : rows_)
      rows.push_back({{"suite", r.suite},
                      {"identity", r.identity},
                      {"anchor", anchor_for(r.identity)},
                      {"parameters", r.parameters},
                      {"exact", r.exact},
                      {"pass", r.pass},
                      {"residual", r.residual},
                      {"tolerance", r.tolerance},
                      {"branch", r.branch}});
    return {{"manifest", manifest_.to_json()}, {"pass", pass()}, {"rows", rows}, {"summary", summary_}};
  }

  std::string to_csv() const {
    std::string out = "# manifest " + manifest_.to_json().dump() + "\n";
    out += "suite,identity,anchor,parameters,exact,pass,residual,tolerance,branch\n";
    for (const auto& r : rows_) {
      std::string params;
      for (const auto& [k, v] : r.parameters.items()) params += (params.empty() ? "" : ";") + k + "=" + scalar(v);
      out += csv_field(r.suite) + "," + csv_field(r.identity) + "," + csv_field(anchor_for(r.identity)) + "," +
             csv_field(params) + "," + (r.exact ? "1" : "0") + "," + (r.pass ? "1" : "0") + "," +
             json(r.residual).dump() + "," + json(r.tolerance).dump() + "," + csv_field(r.branch) + "\n";
    }
    return out;
  }

 private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  RunManifest manifest_;
  std::vector<ReportRow> rows_;
  json summary_ = json::object();
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// A plain table whose first line embeds the manifest.
inline std::string csv_table(const RunManifest& m, const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows) {
  std::string out = "# manifest " + m.to_json().dump() + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i]);
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

inline std::string fmt(double v) { return json(v).dump(); }

}  // namespace hbl
