// tubalcast: ingest -> pretrain -> train-optimizer -> forecast / benchmark,
// plus completion and rank analysis utilities.

#include <iostream>
#include <memory>

#include "cli.hpp"

int main(int argc, char** argv) {
  using namespace tubalcast::cli;
  CLI::App app{"Traffic forecasting with tensor generative models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");
  app.set_config("--config", "", "key=value file for the subcommand's flags; flags given on the command line win");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();

  Runner selected;
  add_synth(app, selected);
  add_ingest(app, selected);
  add_pretrain(app, selected);
  add_train_optimizer(app, selected);
  add_forecast(app, selected);
  add_benchmark(app, selected);
  add_complete(app, selected);
  add_analyze_rank(app, selected);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    return selected ? selected() : kUsage;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << "\n";
    return f.code;
  } catch (const tubalcast::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
