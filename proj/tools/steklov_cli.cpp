#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steklov/commands.hpp"

using namespace steklov;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Flags {
  std::string config;
  std::string out;
  int workers = 0;
  std::vector<std::string> formats;
};

int dispatch(const std::string& cmd, const Flags& fl) {
  ExperimentConfig cfg = load_config(fl.config);
  Formats f{cfg.output.csv, cfg.output.json, cfg.output.plotdata};
  if (!fl.formats.empty()) {
    f = {false, false, false};
    for (const auto& s : fl.formats) {
      if (s == "csv") f.csv = true;
      else if (s == "json") f.json = true;
      else if (s == "plotdata") f.plotdata = true;
      else throw ConfigError("--format: unknown format '" + s + "'");
    }
  }
  std::string dir = fl.out.empty() ? cfg.output.directory : fl.out;
  int workers = fl.workers > 0 ? fl.workers : cfg.run.workers;
  RunContext ctx(std::move(cfg), dir, f, workers);
  if (cmd == "spectrum") return cmd_spectrum(ctx);
  if (cmd == "eigenfunction") return cmd_eigenfunction(ctx);
  if (cmd == "asymptotics") return cmd_asymptotics(ctx);
  if (cmd == "localize") return cmd_localize(ctx);
  if (cmd == "flea") return cmd_flea(ctx);
  return cmd_verify(ctx, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steklov spectra of warped products [0,1] x K"};
  app.require_subcommand(1);
  Flags fl;
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"spectrum", "DN blocks, eigenvalue pairs, gaps and splitting bounds per mode"},
      {"eigenfunction", "eigenfunction traces per mode, branch and normalization"},
      {"asymptotics", "measured gaps against the case-model predictions"},
      {"localize", "localization reports and bound residuals per mode and branch"},
      {"flea", "flea-on-the-elephant sweep over perturbation sizes"},
      {"verify", "oracle and property suite; exit 0 iff every counted check passes"}};
  for (const auto& [name, desc] : cmds) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", fl.config, "experiment file")->required();
    sub->add_option("--out", fl.out, "output directory (overrides [output] directory)");
    sub->add_option("--workers", fl.workers, "worker threads (overrides [run] workers)")
        ->check(CLI::Range(1, 1024));
    sub->add_option("--format", fl.formats, "csv, json or plotdata (repeatable; overrides [output] formats)")
        ->delimiter(',');
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, fl);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
