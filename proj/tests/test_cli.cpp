#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hbl/config.hpp"
#include "hbl/function_spec.hpp"
#include "hbl/report.hpp"

using namespace hbl;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;  // stdout and stderr together
};

std::string cli() {
  const char* p = std::getenv("HBL_CLI");
  return p ? p : "hbl";
}

Run run(const std::string& args) {
  const std::string cmd = "SOURCE_DATE_EPOCH=1700000000 " + cli() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("hbl_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / ("hbl_cli_test_" + name + ".toml");
  std::ofstream(p) << text;
  return p;
}

const std::string kSource = HBL_SOURCE_DIR;

}  // namespace

// ---------------------------------------------------------------- function specs

TEST(FunctionSpec, RadialAndTypedTerms) {
  auto f = parse_function_spec("gauss(2)", 1);
  ASSERT_EQ(f.terms().size(), 1u);
  EXPECT_TRUE(f.radial());
  Point z(1);
  z[0] = cplx(0.3, -0.4);
  EXPECT_NEAR(f.function()(z).real(), std::exp(-0.25 / 2), 1e-14);

  auto g = parse_function_spec("2*gauss(1,2)*z1 - phi(1,0)", 1);
  ASSERT_EQ(g.terms().size(), 2u);
  const double r2 = 0.25;
  const cplx expect = 2.0 * r2 * std::exp(-r2) * z[0] - phi_radial(1, 0.0, 0.5);
  EXPECT_NEAR(std::abs(g.function()(z) - expect), 0, 1e-14);
}

TEST(FunctionSpec, MixedBidegreeInTwoDimensions) {
  auto f = parse_function_spec("gauss(3)*z1*zb2", 2);
  ASSERT_EQ(f.terms().size(), 1u);
  EXPECT_EQ(f.terms()[0].P.p(), 1);
  EXPECT_EQ(f.terms()[0].P.q(), 1);
  auto h = parse_function_spec("gauss(1)*H(1,1)", 2);
  EXPECT_EQ(h.terms()[0].P.p(), 1);
}

TEST(FunctionSpec, ZeroAndCorpus) {
  auto zero = parse_function_spec("0", 1);
  EXPECT_TRUE(zero.terms().empty());
  auto c = parse_function_spec("corpus:1", spectral_corpus()[0].f.dim());
  EXPECT_EQ(c.label(), spectral_corpus()[0].f.label());
  EXPECT_THROW(parse_function_spec("corpus:99", 1), spec_error);
}

TEST(FunctionSpec, RejectsMalformedInput) {
  for (const char* bad : {"", "gauss(2", "z1", "gauss(2)*phi(1,0)", "gauss(-1)", "gauss(2)*z3", "gauss(2) gauss(3)", "gauss(1)*H(1,0,9)"})
    EXPECT_THROW(parse_function_spec(bad, 2), spec_error) << bad;
  // z zbar is not harmonic on C
  EXPECT_THROW(parse_function_spec("gauss(1)*z1*zb1", 1), spec_error);
}

TEST(FunctionSpec, RadialPartAndWeights) {
  auto prof = radial_part(parse_function_spec("phi(2,0) + 0.5*gauss(1.5)", 1));
  EXPECT_NEAR(prof(0.7), phi_radial(2, 0.0, 0.7) + 0.5 * std::exp(-0.49 / 1.5), 1e-14);
  EXPECT_THROW(radial_part(parse_function_spec("gauss(1)*z1", 1)), spec_error);
  auto P = parse_weight_spec("z1*zb2", 2);
  EXPECT_EQ(P.p(), 1);
  EXPECT_EQ(P.q(), 1);
}

TEST(FunctionSpec, ComplexNumbersAndPoints) {
  EXPECT_EQ(parse_complex("1.5"), cplx(1.5, 0));
  EXPECT_EQ(parse_complex("-2i"), cplx(0, -2));
  EXPECT_EQ(parse_complex("i"), cplx(0, 1));
  EXPECT_EQ(parse_complex("0.5-0.25i"), cplx(0.5, -0.25));
  EXPECT_EQ(parse_complex("1e-3+2e+1i"), cplx(1e-3, 20));
  EXPECT_THROW(parse_complex("1.5x"), spec_error);
  auto p = parse_point("0 0.5+0.5i", 2);
  EXPECT_EQ(p[1], cplx(0.5, 0.5));
  EXPECT_THROW(parse_point("1", 2), spec_error);
}

// ---------------------------------------------------------------- config

TEST(Config, TypedValuesAndComments) {
  auto path = write_config("typed", "[global]\nseed = 7  # inline\ntol = 1e-6\n[sphere]\nradii = [1.3, 2.1]\nf = \"phi(2,0)\"\n"
                                    "[verify]\northogonality = true\n[cone]\ndirections = [\"0 1\", \"1 0\"]\n");
  auto c = Config::load(path.string());
  EXPECT_EQ(c.integer("global", "seed"), 7);
  EXPECT_EQ(c.number("global", "tol"), 1e-6);
  EXPECT_EQ(c.numbers("sphere", "radii"), (std::vector<double>{1.3, 2.1}));
  EXPECT_EQ(c.string("sphere", "f"), "phi(2,0)");
  EXPECT_EQ(c.boolean("verify", "orthogonality"), true);
  EXPECT_EQ(c.strings("cone", "directions"), (std::vector<std::string>{"0 1", "1 0"}));
  EXPECT_FALSE(c.has("global", "threads"));
  ConfigSchema s{{"global", {{"seed", ValueKind::integer}, {"tol", ValueKind::number}}},
                 {"sphere", {{"radii", ValueKind::number_list}, {"f", ValueKind::string}}},
                 {"verify", {{"orthogonality", ValueKind::boolean}}},
                 {"cone", {{"directions", ValueKind::string_list}}}};
  EXPECT_TRUE(c.validate(s).empty());
}

TEST(Config, ValidationListsEveryProblemWithPath) {
  auto path = write_config("bad", "[global]\nseed = 1.5\nextra = 2\n[unknown]\nx = 1\n[sphere]\nradii = [1, a]\n");
  auto c = Config::load(path.string());
  ConfigSchema s{{"global", {{"seed", ValueKind::integer}}}, {"sphere", {{"radii", ValueKind::number_list}}}};
  auto problems = c.validate(s);
  ASSERT_EQ(problems.size(), 4u);
  auto has = [&](const std::string& needle) {
    for (const auto& p : problems)
      if (p.find(needle) != std::string::npos) return true;
    return false;
  };
  EXPECT_TRUE(has("global.seed: expected an integer"));
  EXPECT_TRUE(has("global.extra: unknown key"));
  EXPECT_TRUE(has("[unknown]: unknown section"));
  EXPECT_TRUE(has("sphere.radii: expected a list of numbers"));
}

TEST(Config, TopLevelKeysAndSyntaxErrors) {
  EXPECT_THROW(Config::load(write_config("top", "seed = 1\n").string()), config_error);
  EXPECT_THROW(Config::load(write_config("syntax", "[global\nseed = 1\n").string()), config_error);
}

// ---------------------------------------------------------------- report

TEST(Report, RowsCarryAnchorsAndCsvEmbedsManifest) {
  RunManifest m;
  m.command = "verify test";
  m.timestamp = "2023-11-14T22:13:20Z";
  Report r(m);
  r.add({"s", "commutator", {{"j", 1}}, true, true, 0, 0, "lambda=1"});
  r.add({"s", "orthogonality", {{"j", 1}, {"k", 2}}, false, false, 2e-3, 1e-5, "relative"});
  EXPECT_THROW(r.add({"s", "not_an_identity"}), precondition_error);
  EXPECT_FALSE(r.pass());
  ASSERT_EQ(r.failures().size(), 1u);
  auto j = r.to_json();
  EXPECT_EQ(j["rows"][0]["anchor"], anchor_for("commutator"));
  EXPECT_EQ(j["manifest"]["command"], "verify test");
  auto csv = r.to_csv();
  EXPECT_EQ(csv.rfind("# manifest {", 0), 0u);
  EXPECT_NE(csv.find("suite,identity,anchor,parameters"), std::string::npos);
  EXPECT_NE(csv.find("j=1;k=2"), std::string::npos);
}

// ---------------------------------------------------------------- end-to-end

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("nosuch").code, 2);
  EXPECT_EQ(run("verify bogus").code, 2);
  EXPECT_EQ(run("--format xml verify symbolic").code, 2);
}

TEST(Cli, SymbolicVerifyPasses) {
  auto out = scratch("symbolic");
  auto r = run("--out " + out.string() + " verify symbolic --pq-max 3 --k-max 6 --n-max 3");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS verify symbolic"), std::string::npos);
  auto j = json::parse(slurp(out / "verify-symbolic.json"));
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_GT(j["rows"].size(), 1000u);
  for (const auto& row : j["rows"]) ASSERT_FALSE(row["anchor"].get<std::string>().empty());
}

TEST(Cli, GuardrailsExitTwo) {
  EXPECT_EQ(run("verify symbolic --pq-max 7").code, 2);
  EXPECT_EQ(run("verify symbolic --k-max 9").code, 2);
  EXPECT_EQ(run("verify symbolic --n-max 4").code, 2);
  EXPECT_EQ(run("verify numeric --n-max 3").code, 2);
  EXPECT_EQ(run("demo-heisenberg --slices 65").code, 2);
}

TEST(Cli, NumericOrthogonalityReportsMaxResidual) {
  auto out = scratch("orth");
  auto r = run("--out " + out.string() + " verify numeric --orthogonality --kmax 5");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max residual"), std::string::npos);
}

TEST(Cli, CorruptedLaguerreTableFailsAndNamesIdentity) {
  auto out = scratch("corrupt");
  auto r = run("--out " + out.string() + " verify laguerre --laguerre-table " + kSource + "/tests/fixtures/corrupted_laguerre.json");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("failing identity: laguerre_shift"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("failing identity: laguerre_derivative"), std::string::npos);
  EXPECT_EQ(run("verify laguerre --laguerre-table /nonexistent.json").code, 2);
}

TEST(Cli, ConfigErrorsListedWithPaths) {
  auto path = write_config("cli_bad", "[global]\nseed = abc\nbogus = 1\n[verify]\npq_max = 2.5\n[nosuch]\nx = 1\n");
  auto r = run("--config " + path.string() + " verify symbolic");
  EXPECT_EQ(r.code, 2);
  for (const char* p : {"global.seed", "global.bogus", "verify.pq_max", "[nosuch]"}) EXPECT_NE(r.out.find(p), std::string::npos) << p;
}

TEST(Cli, CommandLineOverridesConfig) {
  auto path = write_config("override", "[verify]\npq_max = 7\n");
  EXPECT_EQ(run("--config " + path.string() + " verify symbolic").code, 2);
  auto out = scratch("override");
  EXPECT_EQ(run("--out " + out.string() + " --config " + path.string() + " verify symbolic --pq-max 1 --k-max 2 --n-max 1").code, 0);
}

TEST(Cli, ExpandPlantedTypeGivesOneRow) {
  auto out = scratch("expand_planted");
  auto r = run("--out " + out.string() + " expand --f 'gauss(2)*z1' --k 2 --n 1");
  EXPECT_EQ(r.code, 0) << r.out;
  auto j = json::parse(slurp(out / "expansion.json"));
  ASSERT_EQ(j["table"].size(), 1u);
  EXPECT_EQ(j["table"][0]["p"], 1);
  EXPECT_EQ(j["table"][0]["q"], 0);
  EXPECT_TRUE(fs::exists(out / "coefficients.csv"));
  EXPECT_TRUE(fs::exists(out / "comparison.csv"));
}

TEST(Cli, ExpandRadialGaussianIsTypeZeroWithSmallResidual) {
  auto out = scratch("expand_radial");
  auto r = run("--out " + out.string() + " expand --f 'gauss(2)' --k 2 --n 1");
  EXPECT_EQ(r.code, 0) << r.out;
  auto j = json::parse(slurp(out / "expansion.json"));
  ASSERT_EQ(j["table"].size(), 1u);
  EXPECT_EQ(j["table"][0]["p"], 0);
  EXPECT_EQ(j["table"][0]["q"], 0);
  EXPECT_LT(j["comparison"]["max_residual"].get<double>(), 1e-4);
}

TEST(Cli, ExpandWithoutFunctionIsUsageError) {
  EXPECT_EQ(run("expand --k 2").code, 2);
  EXPECT_EQ(run("expand --f 'gauss(2' --k 2").code, 2);
}

TEST(Cli, SphereVerdicts) {
  auto out = scratch("sphere_zero");
  auto r = run("--out " + out.string() + " experiment sphere --f 0 --weight z1 --radii 1.3");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("all coefficients pinned"), std::string::npos);
  auto planted = run("--out " + out.string() + " --config " + kSource + "/samples/sphere.toml experiment sphere");
  EXPECT_EQ(planted.code, 0) << planted.out;
  EXPECT_TRUE(fs::exists(out / "sphere.csv"));
}

TEST(Cli, ConeVerdicts) {
  auto out = scratch("cone");
  auto bad = run("--out " + out.string() +
                 " experiment cone --n 2 --f 'gauss(2)*z1 + gauss(3)*z1*zb2' --directions '0 1' '0 0.70710678118654752+0.70710678118654752i'");
  EXPECT_NE(bad.out.find("non-injective configuration detected"), std::string::npos) << bad.out;
  auto good = run("--out " + out.string() + " experiment cone --n 2 --f 'gauss(2)*z1' --directions '0.70710678118654752 0.70710678118654752i'");
  EXPECT_EQ(good.code, 0) << good.out;
  auto j = json::parse(slurp(out / "cone.json"));
  EXPECT_FALSE(j["rows"].empty());
  EXPECT_LE(j["max_rel_error"].get<double>(), 1e-3);
}

TEST(Cli, ZerosAndHeisenbergDemo) {
  auto out = scratch("zeros");
  EXPECT_EQ(run("--out " + out.string() + " zeros --k-max 8 --n-max 2").code, 0);
  auto demo = run("--out " + out.string() + " demo-heisenberg --refine");
  EXPECT_EQ(demo.code, 0) << demo.out;
}

TEST(Cli, SymbolicReportIsDeterministic) {
  auto a = scratch("det_a"), b = scratch("det_b");
  const std::string args = " verify symbolic --pq-max 2 --k-max 3 --n-max 2";
  ASSERT_EQ(run("--out " + a.string() + " --threads 4" + args).code, 0);
  ASSERT_EQ(run("--out " + b.string() + " --threads 4" + args).code, 0);
  auto ja = json::parse(slurp(a / "verify-symbolic.json")), jb = json::parse(slurp(b / "verify-symbolic.json"));
  // only the output directory differs between the two manifests
  ja["manifest"].erase("out_dir"), ja["manifest"].erase("overrides");
  jb["manifest"].erase("out_dir"), jb["manifest"].erase("overrides");
  EXPECT_EQ(ja.dump(), jb.dump());

  // same manifest, same bytes
  auto c = scratch("det_c");
  ASSERT_EQ(run("--out " + c.string() + " --threads 4" + args).code, 0);
  const auto first = slurp(c / "verify-symbolic.json");
  ASSERT_EQ(run("--out " + c.string() + " --threads 1" + args).code, 0);
  auto one = json::parse(slurp(c / "verify-symbolic.json")), four = json::parse(first);
  EXPECT_EQ(one["rows"].dump(), four["rows"].dump());
  ASSERT_EQ(run("--out " + c.string() + " --threads 4" + args).code, 0);
  EXPECT_EQ(slurp(c / "verify-symbolic.json"), first);
}

TEST(Cli, CsvFormat) {
  auto out = scratch("csv");
  ASSERT_EQ(run("--out " + out.string() + " --format csv zeros --k-max 4 --n-max 1").code, 0);
  auto text = slurp(out / "zeros.csv");
  EXPECT_EQ(text.rfind("# manifest {", 0), 0u);
  EXPECT_NE(text.find("common_zeros"), std::string::npos);
}
