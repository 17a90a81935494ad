// Command-line driver for the log analysis pipeline.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparqlog/report/Pipeline.h"

using namespace sparqlog;
using report::ConfigError;
using report::PipelineConfig;
using report::StageError;
using report::Workspace;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int fail(const std::string& message, const std::string& stage, int code) {
  nlohmann::ordered_json j;
  j["error"] = message;
  j["stage"] = stage;
  j["exitCode"] = code;
  std::cerr << j.dump() << "\n";
  return code;
}

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Command-line values that override the config file when given.
struct Overrides {
  PipelineConfig values;
  std::vector<std::function<void(PipelineConfig&)>> apply;
};

template <typename T>
void addOverride(CLI::App& app, Overrides& o, const std::string& flag, T PipelineConfig::*field,
                 const std::string& help) {
  auto* opt = app.add_option(flag, o.values.*field, help);
  o.apply.push_back([opt, field, &o](PipelineConfig& c) {
    if (opt->count() > 0) c.*field = o.values.*field;
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analyze SPARQL query logs: sessions, reformulations and intent models."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string configFile;
  app.add_option("--config", configFile, "JSON config file; flags override its fields");
  Overrides o;
  addOverride(app, o, "--input", &PipelineConfig::input, "Input NDJSON query log");
  addOverride(app, o, "--output", &PipelineConfig::output, "Artifact directory");
  addOverride(app, o, "--time-threshold-minutes", &PipelineConfig::timeThresholdMinutes,
              "Maximum gap inside a session");
  addOverride(app, o, "--bot-window-minutes", &PipelineConfig::botWindowMinutes,
              "Frequency bot window");
  addOverride(app, o, "--bot-max-in-window", &PipelineConfig::botMaxInWindow,
              "Maximum queries per window before a user is flagged");
  addOverride(app, o, "--loop-min-run", &PipelineConfig::loopMinRun,
              "Shortest template run removed as a loop");
  addOverride(app, o, "--ged-exact-size-limit", &PipelineConfig::gedExactSizeLimit,
              "Largest graph size for exact GED");
  addOverride(app, o, "--ged-time-budget-ms", &PipelineConfig::gedTimeBudgetMs,
              "Time budget of one exact GED search");
  addOverride(app, o, "--hmm-alpha", &PipelineConfig::hmmAlpha, "HMM smoothing constant");
  addOverride(app, o, "--percentile", &PipelineConfig::percentile,
              "Session length percentile capping the similarity matrices");
  addOverride(app, o, "--ged-sample", &PipelineConfig::gedSample,
              "Fraction of sessions used for the GED series");
  addOverride(app, o, "--seed", &PipelineConfig::seed, "Seed of the GED session sample");
  addOverride(app, o, "--workers", &PipelineConfig::workers, "Worker threads, 0 for all cores");

  auto* ingest = app.add_subcommand("ingest", "Read the log into per-dataset record files");
  auto* sessionize = app.add_subcommand("sessionize", "Filter bots and build sessions");
  auto* analyze = app.add_subcommand("analyze", "GED series, similarity matrices, lengths");
  auto* events = app.add_subcommand("events", "Reformulation events and their tables");
  auto* markov = app.add_subcommand("markov", "Result-count transition matrix");
  auto* hmmTrain = app.add_subcommand("hmm-train", "Train the intent HMM");
  auto* hmmDecode = app.add_subcommand("hmm-decode", "Most likely intent states per session");
  auto* suggest = app.add_subcommand("suggest", "Rank the next reformulation symbol");
  auto* report = app.add_subcommand("report", "Run every stage and write the report");

  std::string decodeSession, suggestSession, observations;
  hmmDecode->add_option("--session", decodeSession, "Session id (default: all sessions)");
  auto* suggestSessionOpt =
      suggest->add_option("--session", suggestSession, "Session id whose history is used");
  auto* observationsOpt = suggest->add_option(
      "--observations", observations, "Comma-separated symbol history; empty for a cold start");
  suggestSessionOpt->excludes(observationsOpt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(e.what(), "config", kExitConfig);
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    PipelineConfig config;
    if (!configFile.empty()) {
      std::ifstream in(configFile, std::ios::binary);
      if (!in) throw ConfigError("cannot open config " + configFile);
      std::stringstream ss;
      ss << in.rdbuf();
      config = PipelineConfig::fromJson(ss.str());
    }
    for (const auto& f : o.apply) f(config);
    Workspace ws(config);

    if (*ingest) {
      const auto r = ws.ingest();
      std::cout << nlohmann::ordered_json{{"records", r.records.size()},
                                          {"rejected", r.rejected.size()}}
                       .dump()
                << "\n";
    } else if (*sessionize) {
      std::cout << ws.sessionize().report.toJson() << "\n";
    } else if (*analyze) {
      ws.analyze();
      std::cout << nlohmann::ordered_json{{"artifacts",
                                           {"ged_series.csv", "similarity_matrices.csv",
                                            "session_length_histogram.csv"}}}
                       .dump()
                << "\n";
    } else if (*events) {
      std::cout << nlohmann::ordered_json{{"events", ws.events().size()}}.dump() << "\n";
    } else if (*markov) {
      std::cout << report::markovJson(ws.markov());
    } else if (*hmmTrain) {
      std::cout << intent::modelToJson(ws.hmmTrain()) << "\n";
    } else if (*hmmDecode) {
      std::optional<std::string> id;
      if (!decodeSession.empty()) id = decodeSession;
      for (const auto& line : ws.hmmDecode(id)) std::cout << line << "\n";
    } else if (*suggest) {
      std::optional<std::string> id;
      std::optional<std::vector<std::string>> history;
      if (suggestSessionOpt->count() > 0) id = suggestSession;
      if (observationsOpt->count() > 0) history = splitList(observations);
      if (!id && !history) throw ConfigError("suggest needs --session or --observations");
      std::cout << ws.suggest(id, history) << "\n";
    } else if (*report) {
      const auto bundle = ws.report();
      nlohmann::ordered_json j;
      auto artifacts = nlohmann::ordered_json::array();
      for (const auto& [name, content] : bundle.files()) {
        artifacts.push_back(ws.path(name).string());
      }
      j["artifacts"] = artifacts;
      j["warnings"] = bundle.warnings;
      std::cout << j.dump(2) << "\n";
    }
  } catch (const ConfigError& e) {
    return fail(e.what(), "config", kExitConfig);
  } catch (const StageError& e) {
    return fail(e.what(), stage, kExitData);
  } catch (const corpus::CorpusError& e) {
    return fail(e.what(), e.stage(), kExitData);
  } catch (const intent::IntentError& e) {
    return fail(e.what(), stage, kExitData);
  } catch (const std::exception& e) {
    return fail(e.what(), stage, kExitInternal);
  }
  return 0;
}
