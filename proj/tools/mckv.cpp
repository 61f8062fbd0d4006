#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "mckv/cli.hpp"
#include "mckv/error.hpp"

int main(int argc, char** argv) {
  using namespace mckv::cli;

  CLI::App app{"McKean-Vlasov free energy and phase transition lab"};
  app.footer(help_text());
  app.require_subcommand(1);

  std::string config_path;
  bool plot = false;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  const std::map<std::string, std::string> about{
      {"analyze-potential", "spectrum, theta_sharp and stability class"},
      {"simulate", "IMEX evolution of the McKean-Vlasov equation"},
      {"solve", "stationary points and the free-energy minimizer at model.theta"},
      {"scan-theta", "minimizers over a theta grid with monotonicity checks"},
      {"locate-transition", "bracket the lower transition point theta_T"},
      {"scan-L", "theta_T over a ladder of torus sizes at fixed spacing"},
      {"check-basin", "decay of small perturbations below theta_sharp"},
      {"gen-fixtures", "regenerate the oracle fixture tables"}};
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    auto* cfg = sub->add_option("--config", config_path, "configuration file");
    if (name != "gen-fixtures") cfg->required();
    sub->add_flag("--plot", plot, "write SVG plots");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "seed for randomized initial data (overrides random.seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const Command command = *parse_command(name);

  RunConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read " << config_path << '\n';
      return 1;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      config = parse_config(ss.str());
    } catch (const mckv::Error& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 1;
    }
  }
  if (plot) config.plot = true;
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (seed) config.seed = *seed;
  return run(command, config, std::cerr);
}
