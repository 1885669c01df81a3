#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "steklov/commands.hpp"

using namespace steklov;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("steklov_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kBase = R"(
[profile]
term = poly 1 2 1
n = 3
[transversal]
source = circle
count = 12
)";

RunContext context(const std::string& text, const std::string& name, int workers = 1) {
  return RunContext(parse_config(text), scratch(name), Formats{true, true, true}, workers);
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(STEKLOV_CLI) + " " + args + " >/dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Config, ParsesSectionsAndTerms) {
  auto c = parse_config(R"(
# comment
[profile]
term = const 1      # trailing comment
term = bump 0.5 0.25 0.02
n = 2
omega = -50
[transversal]
source = sphere
dimension = 2
count = 4
[run]
modes = 1:2
branches = plus
normalization = both
fit_window = 5, 20
variant = paper-stated
[output]
formats = json, plotdata
)");
  EXPECT_EQ(c.profile.terms.size(), 2u);
  EXPECT_EQ(c.profile.n, 2);
  EXPECT_EQ(c.profile.omega, -50.0);
  EXPECT_EQ(c.spectrum().entries[1].mu, 2.0);
  EXPECT_EQ(c.selected_modes(4), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(c.run.branches.size(), 1u);
  EXPECT_EQ(c.run.normalizations.size(), 2u);
  EXPECT_EQ(c.run.fit_window.hi, 20.0);
  EXPECT_EQ(c.run.variant, RecursionVariant::PaperStated);
  EXPECT_FALSE(c.output.csv);
  EXPECT_TRUE(c.output.json);
  EXPECT_DOUBLE_EQ(c.warping_profile().value(0.9), 1.0);
}

TEST(Config, RejectsBadInput) {
  std::vector<std::string> bad = {
      "[profile]\nterm = const 1\ncolour = red\n[transversal]\nsource = circle\n",
      "[profile]\nterm = const 1\n[transversal]\nsource = torus\n",
      "[profile]\nterm = const 1\n[transversal]\nsource = circle\n[extra]\n",
      "[profile]\nterm = const 1\nn = 1\n[transversal]\nsource = circle\n",
      "[profile]\nterm = const -1\n[transversal]\nsource = circle\n",
      "[profile]\nterm = wave 1 2\n[transversal]\nsource = circle\n",
      "[profile]\nterm = const 1\n[transversal]\nsource = circle\ncount = 0\n",
      "[profile]\nterm = const 1\n[transversal]\nsource = circle\n[run]\ngrid = 10\n",
      "[profile]\nterm = const 1\n[transversal]\nsource = circle\n[run]\nmodes = 4:2\n",
      "[profile]\nterm = const 1\nn = 2\nn = 3\n[transversal]\nsource = circle\n",
      "[profile]\nterm = const 1\n",
      "term = const 1\n",
      "[profile]\nkind = tabulated\nx = 0, 1\nf = 1, 1\n[transversal]\nsource = circle\n",
      "[profile]\nterm = const 1\n[transversal]\nsource = custom\nvalues = 0, 3, 2\n",
      "[profile]\nterm = const 1\n[transversal]\nsource = circle\n[output]\nformats = xml\n"};
  for (const auto& t : bad) EXPECT_THROW(parse_config(t), ConfigError) << t;
}

TEST(Output, JsonRoundTripMatchesCsvBitForBit) {
  auto ctx = context(kBase, "roundtrip");
  auto t = spectrum_table(ctx);
  auto back = table_from_json(Json::parse(to_json(t).dump()), t.columns);
  EXPECT_EQ(to_csv(back), to_csv(t));
  auto a = asymptotics_table(ctx);
  auto ab = table_from_json(Json::parse(to_json(a).dump()), a.columns);
  EXPECT_EQ(to_csv(ab), to_csv(a));
  EXPECT_EQ(meta_csv(ab), meta_csv(a));
}

TEST(Output, DeterministicAcrossWorkerCounts) {
  auto a = context(kBase, "w1", 1);
  auto b = context(kBase, "w3", 3);
  EXPECT_EQ(to_csv(spectrum_table(a)), to_csv(spectrum_table(b)));
  EXPECT_EQ(to_csv(localize_table(a)), to_csv(localize_table(b)));
  EXPECT_THROW(cmd_flea(a), ConfigError);
}

TEST(Output, ExtendedColumnsAndNonFinite) {
  Table t;
  t.name = "x";
  t.columns = {{"v", ColumnKind::Extended}, {"r", ColumnKind::Real}};
  t.add_row({ExtScalar::from_log(-1, 5000.0), -std::numeric_limits<double>::infinity()});
  t.add_row({std::monostate{}, 0.1});
  auto csv = to_csv(t);
  EXPECT_NE(csv.find("v_log_magnitude,v_sign,r"), std::string::npos);
  EXPECT_NE(csv.find(",-1,-inf"), std::string::npos);
  EXPECT_NE(csv.find("0.10000000000000001"), std::string::npos);
  auto back = table_from_json(Json::parse(to_json(t).dump()), t.columns);
  EXPECT_EQ(to_csv(back), csv);
  EXPECT_THROW(t.add_row({0.0}), InvalidArgument);
}

TEST(Commands, SpectrumExample) {
  auto ctx = context("[profile]\nterm = const 1\n[transversal]\nsource = circle\ncount = 5\n", "flat");
  auto t = spectrum_table(ctx);
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_NEAR(std::get<double>(t.rows[1][6]), 1 / std::tanh(0.5), 1e-9);
  EXPECT_NEAR(std::get<double>(t.rows[0][7]), 0.0, 1e-9);
  for (const auto& r : t.rows) EXPECT_FALSE(std::get<ExtScalar>(r[10]) < std::get<ExtScalar>(r[11]));
}

TEST(Commands, EigenfunctionFiles) {
  auto ctx = context(
      "[profile]\nterm = const 1\nterm = edge 1 1 1\nn = 3\n[transversal]\nsource = circle\ncount = 21\n"
      "[run]\nmodes = 20\nbranches = minus\nnormalization = both\n",
      "eig");
  ASSERT_EQ(cmd_eigenfunction(ctx), 0);
  auto dir = ctx.sink.dir();
  EXPECT_TRUE(fs::exists(dir / "trace_20_minus_boundary.csv"));
  EXPECT_TRUE(fs::exists(dir / "lnw_20_minus.dat"));
  EXPECT_TRUE(fs::exists(dir / "lnwbulk_20_minus.dat"));
  auto j = Json::parse(slurp(dir / "trace_20_minus_bulk.json"));
  std::vector<double> x, y;
  double lmin = 0.0;
  for (const auto& r : j["rows"]) {
    x.push_back(r["x"].get<double>());
    double l = r["ln_abs_w"].get<double>();
    y.push_back(std::exp(2 * l) * ctx.model.p.value(x.back()));
  }
  EXPECT_NEAR(simpson(x, y), 1.0, 1e-10);
  auto bj = Json::parse(slurp(dir / "trace_20_minus_boundary.json"));
  for (const auto& r : bj["rows"])
    lmin = std::min(lmin, r["ln_abs_w"].get<double>());
  EXPECT_LT(lmin, -9.0);
  auto s = Json::parse(slurp(dir / "eigenfunction.json"));
  auto w0 = ext_from_json(s["rows"][0]["w0"]), w1 = ext_from_json(s["rows"][0]["w1"]);
  EXPECT_NEAR(w0.log_abs(), w1.log_abs(), 1e-9);
}

TEST(Commands, FleaSummary) {
  std::string cfg = std::string(
                        "[profile]\nterm = const 1\nterm = edge 1 1 1\nn = 3\n[transversal]\nsource = circle\ncount = 31\n") +
                    "[run]\ndeltas = 0, 1e-3, 1e-2\nperturbation = poly 0 0 0 0 0 0 0 1\n";
  auto ctx = context(cfg, "flea", 2);
  ASSERT_EQ(cmd_flea(ctx), 0);
  auto s = slurp(ctx.sink.dir() / "flea_summary.csv");
  EXPECT_NE(s.find("0.001,IIA"), std::string::npos);
  EXPECT_TRUE(fs::exists(ctx.sink.dir() / "masssplit-d1_all_plus.dat"));
}

TEST(Cli, ExitCodes) {
  auto dir = scratch("exit");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "ok.cfg") << "[profile]\nterm = const 1\n[transversal]\nsource = circle\ncount = 3\n";
    std::ofstream(dir / "bad.cfg") << "[profile]\nterm = const 1\nbogus = 1\n[transversal]\nsource = circle\n";
    // omega = pi^2 is a Dirichlet eigenvalue at mu = 0 for f = 1, n = 2
    std::ofstream(dir / "dirichlet.cfg") << "[profile]\nterm = const 1\nomega = 9.869604401089358\n"
                                            "[transversal]\nsource = circle\ncount = 3\n";
    std::ofstream(dir / "tab.cfg") << "[profile]\nkind = tabulated\nx = 0, 0.5, 1\nf = 1, 1.2, 1.1\n"
                                      "[transversal]\nsource = circle\ncount = 3\n";
  }
  std::string out = " --out " + (dir / "o").string();
  EXPECT_EQ(run_cli("spectrum --config " + (dir / "ok.cfg").string() + out), 0);
  EXPECT_EQ(run_cli("spectrum --config " + (dir / "ok.cfg").string() + out + " --format json,csv --workers 2"), 0);
  EXPECT_EQ(run_cli("spectrum --config " + (dir / "bad.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("spectrum --config " + (dir / "missing.cfg").string() + out), 2);
  EXPECT_EQ(run_cli("spectrum --config " + (dir / "ok.cfg").string() + out + " --format xml"), 2);
  EXPECT_EQ(run_cli("spectrum"), 2);
  EXPECT_EQ(run_cli("spectrum --config " + (dir / "dirichlet.cfg").string() + out), 3);
  EXPECT_EQ(run_cli("asymptotics --config " + (dir / "tab.cfg").string() + out), 3);
}
