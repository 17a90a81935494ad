#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparqlog/corpus/Corpus.h"
#include "sparqlog/report/Report.h"

namespace sparqlog::report {

// Invalid configuration (exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A stage could not run on the available data or artifacts (exit code 3).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  std::string input;
  std::string output = "sparqlog-out";
  int64_t timeThresholdMinutes = 60;
  int64_t botWindowMinutes = 30;
  int64_t botMaxInWindow = 30;
  int64_t loopMinRun = 4;
  int64_t gedExactSizeLimit = 8;
  int64_t gedTimeBudgetMs = 2000;
  double hmmAlpha = 1.0;
  double percentile = 95.0;
  double gedSample = 1.0;
  uint64_t seed = 1;
  int64_t workers = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
  corpus::CorpusConfig corpusConfig() const;

  // camelCase keys as above; unknown keys are rejected.
  static PipelineConfig fromJson(std::string_view text, const PipelineConfig& defaults);
  static PipelineConfig fromJson(std::string_view text);
  std::string toJson() const;
};

// Artifact directory shared by the pipeline stages. Each stage reads what the
// previous one wrote and fails with "run <stage> first" if it is missing.
class Workspace {
 public:
  explicit Workspace(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  std::filesystem::path path(const std::string& name) const;

  // Reads the input log and writes one record file per dataset.
  corpus::IngestResult ingest() const;
  // Filters and sessionizes the stored records.
  corpus::CorpusResult sessionize() const;
  // GED series, similarity matrices and the length histogram.
  void analyze() const;
  // Reformulation events and the operator / triple / locus / FILTER tables.
  std::vector<reformulation::ReformulationEvent> events() const;
  // Throws StageError("insufficient data") without any bigram.
  intent::TransitionMatrix markov() const;
  intent::HmmModel hmmTrain() const;
  // One JSON line per selected session (all sessions with a pair if none).
  std::vector<std::string> hmmDecode(const std::optional<std::string>& sessionId) const;
  // Ranked next-symbol scores for a session's observation history, or for
  // an explicit symbol list.
  std::string suggest(const std::optional<std::string>& sessionId,
                      const std::optional<std::vector<std::string>>& observations) const;
  // All stages from the input log; reports too little data as warnings.
  ReportBundle report() const;

  std::vector<corpus::Session> loadSessions() const;
  std::vector<reformulation::ReformulationEvent> loadEvents() const;
  intent::HmmModel loadModel() const;

 private:
  void write(const std::string& name, const std::string& content) const;
  std::string read(const std::string& name, const std::string& requiredStage) const;

  PipelineConfig config_;
};

// Runs every stage and returns the report bundle.
ReportBundle runPipeline(const PipelineConfig& config);

}  // namespace sparqlog::report
