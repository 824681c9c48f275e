// Command-line entry point: runs the full curation pipeline or any single
// stage from a JSON config file.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lift/error.hpp"
#include "lift/pipeline.hpp"

namespace {

int fail(const std::string& code, const std::string& message) {
  nlohmann::json err;
  err["error"] = {{"code", code}, {"message", message}};
  std::cerr << err.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lift: instruction dataset expansion and curation"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string input_override;
  std::string output_override;
  bool quiet = false;

  struct Command {
    const char* name;
    const char* help;
    std::optional<lift::Stage> stage;  // nullopt = full run / config dump
  };
  const std::vector<Command> commands{
      {"expand", "rewrite the input dataset for k rounds and merge", lift::Stage::kExpand},
      {"embed", "embed every expanded record", lift::Stage::kEmbed},
      {"variety", "select the highest row-variance fraction", lift::Stage::kVariety},
      {"score", "score the variety-curated records with the judge", lift::Stage::kScore},
      {"quality", "keep the top records by fused quality score", lift::Stage::kQuality},
      {"report", "write composition, histogram and cost reports", lift::Stage::kReport},
      {"run", "run every stage, resuming from up-to-date artifacts", std::nullopt},
      {"config", "print the resolved configuration", std::nullopt},
  };

  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("-c,--config", config_path, "pipeline config file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override a config key, e.g. --set variety.keep_fraction=0.3");
    sub->add_option("--input", input_override, "override input_path");
    sub->add_option("--output-dir", output_override, "override output_dir");
    sub->add_flag("-q,--quiet", quiet, "suppress progress output");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto all = overrides;
    if (!input_override.empty())
      all.push_back("input_path=" + nlohmann::json(std::filesystem::absolute(input_override).string()).dump());
    if (!output_override.empty())
      all.push_back("output_dir=" + nlohmann::json(std::filesystem::absolute(output_override).string()).dump());
    lift::PipelineConfig cfg = lift::load_config(config_path, all);

    lift::PipelineHooks hooks;
    if (!quiet) hooks.log = [](const std::string& line) { std::cerr << line << "\n"; };

    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const std::string name = commands[i].name;
      if (name == "config") {
        std::cout << lift::config_to_json(cfg).dump(2) << "\n";
        return 0;
      }
      lift::Pipeline pipeline(std::move(cfg), hooks);
      const auto manifest = commands[i].stage ? pipeline.run_stage(*commands[i].stage) : pipeline.run_all();
      std::cout << manifest.dump(2) << "\n";
      return 0;
    }
  } catch (const lift::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
