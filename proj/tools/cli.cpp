#include "cli.hpp"

#include <CLI11.hpp>

#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "emos/config.hpp"
#include "emos/error.hpp"
#include "emos/pipeline.hpp"

namespace emos::cli {

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> stations;
  std::vector<std::string> models;
  std::optional<std::string> reference;
  std::optional<std::string> scheme;
  std::optional<std::string> data_dir;
  std::optional<std::string> output_dir;
  std::optional<unsigned> threads;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "configuration file (key = value lines)");
  cmd.add_option("--seed", f.seed, "random seed");
  cmd.add_option("--stations", f.stations, "comma-separated station ids")->delimiter(',');
  cmd.add_option("--models", f.models, "comma-separated model ids in predictor order")
      ->delimiter(',');
  cmd.add_option("--reference", f.reference, "reference strategy for skill scores");
  cmd.add_option("--scheme", f.scheme, "seam transition scheme")
      ->check(CLI::IsMember({"none", "t1", "t2"}));
  cmd.add_option("--data", f.data_dir, "input data directory");
  cmd.add_option("--output", f.output_dir, "output directory");
  cmd.add_option("--threads", f.threads, "worker threads, 0 = all cores");
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) apply_config_file(c, f.config);
  if (f.seed) c.scenario.seed = *f.seed;
  if (!f.models.empty()) c.models = f.models;
  if (f.reference) c.reference = *f.reference;
  if (f.scheme) c.transition.scheme = parse_scheme(*f.scheme);
  if (f.data_dir) c.data_dir = *f.data_dir;
  if (f.output_dir) c.output_dir = *f.output_dir;
  if (f.threads) c.threads = *f.threads;
  c.validate();
  return c;
}

int run_command(const std::string& name, const Flags& flags, std::ostream& out, std::ostream& err) {
  const RunConfig config = resolve(flags);
  if (name == "simulate") {
    pipeline::simulate(config);
    out << "simulated " << config.scenario.n_stations << " stations x " << config.scenario.n_days
        << " days into " << config.data_dir << '\n';
    return kOk;
  }
  if (name == "train") {
    const auto summary = pipeline::train(config, flags.stations);
    out << "trained " << summary.keys << " keys (" << summary.fresh_fits << " fits, "
        << summary.fallbacks << " fallbacks) into " << config.store_file() << '\n';
    for (const auto& p : summary.problems) {
      err << "warning: " << p.key.station_id << " lead " << p.key.lead_time << ' '
          << p.key.strategy.to_string() << ' ' << format_date(p.key.issue_date) << ": "
          << (p.error.empty() ? "not converged" : p.error) << '\n';
    }
    return summary.converged() ? kOk : kNonConvergence;
  }
  if (name == "predict") {
    pipeline::predict(config, flags.stations);
    out << "wrote " << config.predictions_file() << '\n';
    return kOk;
  }
  if (name == "transition") {
    pipeline::transition(config, config.transition.scheme);
    out << "wrote " << config.seamless_file(config.transition.scheme) << '\n';
    return kOk;
  }
  if (name == "verify") {
    const auto result = pipeline::verify(config, flags.stations);
    out << "verified " << result.cases << " cases into " << config.report_dir() << '\n';
    for (const auto& r : result.report.rows_for(Stratum::overall)) {
      out << "  " << r.strategy << " mean CRPS " << r.mean_crps << " CRPSS " << r.crpss << '\n';
    }
    return kOk;
  }
  if (name == "tpi") {
    pipeline::tpi(config, flags.stations);
    out << "wrote " << config.output_dir << "/tpi.csv\n";
    return kOk;
  }
  err << "unknown subcommand " << name << '\n';
  return kInputError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ensemble postprocessing with single-model and two-model EMOS"};
  app.name("emos");
  app.require_subcommand(1, 1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "write a synthetic scenario as CSV tables"},
      {"train", "fit coefficients for every station, lead time, strategy and issue date"},
      {"predict", "apply stored coefficients to the forecasts"},
      {"transition", "blend the two-model predictions into the single model at the horizon"},
      {"verify", "score predictions and raw ensembles and write report tables"},
      {"tpi", "topographic position index at each station"},
  };
  for (const auto& [name, help] : commands) add_flags(*app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kInputError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run_command(name, flags, out, err);
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace emos::cli
