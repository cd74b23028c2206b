// radon: experiment runner. Every subcommand reads one JSON config and
// prints a JSON summary on stdout; failures print {"error": ...} on stderr.

#include "radon/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace ex = radon::experiment;
using radon::json;

namespace {

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"R-adaptive DeepONet experiment runner"};
  app.require_subcommand(1);
  std::string config_path;
  std::string family;
  std::string analysis;
  bool rate_only = false;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto* datagen = app.add_subcommand("datagen", "generate train/validation/test splits");
  add_config(datagen);
  auto* preprocess = app.add_subcommand("preprocess", "equidistribute every sample");
  add_config(preprocess);
  auto* train = app.add_subcommand("train", "train one model family");
  add_config(train);
  train->add_option("-m,--model", family, "vanilla | shift | radaptive-coord | radaptive-sol | radaptive")
      ->required();
  auto* eval = app.add_subcommand("eval", "relative L2 table of every trained family");
  add_config(eval);
  auto* analyze = app.add_subcommand("analyze", "spectra, tails and rate studies");
  add_config(analyze);
  analyze->add_option("what", analysis, "spectrum | tail | appendixb | fem-rate")
      ->required()
      ->check(CLI::IsMember({"spectrum", "tail", "appendixb", "fem-rate"}));
  analyze->add_flag("--rate", rate_only, "appendixb / fem-rate: print only the fitted slopes");
  auto* config = app.add_subcommand("config", "config utilities");
  config->require_subcommand(1);
  auto* show = config->add_subcommand("show-defaults", "print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 64);
  }

  try {
    json out;
    if (show->parsed()) {
      out = ex::default_config().to_json();
    } else {
      const ex::ExperimentConfig cfg = ex::load_config(config_path);
      if (datagen->parsed()) {
        out = ex::cmd_datagen(cfg);
      } else if (preprocess->parsed()) {
        out = ex::cmd_preprocess(cfg);
      } else if (train->parsed()) {
        if (family == "radaptive") {
          out["radaptive-coord"] = ex::cmd_train(cfg, "radaptive-coord");
          out["radaptive-sol"] = ex::cmd_train(cfg, "radaptive-sol");
        } else {
          out = ex::cmd_train(cfg, family);
        }
      } else if (eval->parsed()) {
        out = ex::cmd_eval(cfg);
      } else if (analyze->parsed()) {
        if (rate_only && analysis != "appendixb" && analysis != "fem-rate")
          return fail("usage", "--rate applies to appendixb and fem-rate only", 64);
        out = ex::cmd_analyze(cfg, analysis);
        if (rate_only) {
          json slopes = json::object();
          for (const auto& [name, fit] : out.items()) slopes[name] = fit.at("slope");
          out = slopes;
        }
      }
    }
    std::cout << out.dump(2) << "\n";
  } catch (const radon::InvalidArgument& e) {
    return fail("invalid_argument", e.what(), 2);
  } catch (const radon::FormatError& e) {
    return fail("format", e.what(), 3);
  } catch (const radon::NumericalError& e) {
    return fail("numerical", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
