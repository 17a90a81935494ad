#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparqlog/corpus/Types.h"

namespace sparqlog::corpus {

// A data problem that stops the pipeline; `stage` names the step that ran
// out of data or found the problem.
class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// "2024-03-01T12:00:00Z", optional fraction (truncated to milliseconds) and
// numeric offset ("+02:00"). nullopt if malformed.
std::optional<TimePoint> parseTimestamp(std::string_view text);
// "2024-03-01T12:00:00.000Z".
std::string formatTimestamp(TimePoint t);

struct RejectedLine {
  size_t line = 0;
  std::string reason;
  bool operator==(const RejectedLine&) const = default;
};

struct IngestResult {
  std::vector<LogRecord> records;
  std::vector<RejectedLine> rejected;
};

// Parses one NDJSON line; throws std::invalid_argument with the rejection
// reason ("missing field userId", "invalid timestamp", ...).
LogRecord parseRecordLine(std::string_view line, size_t lineNumber = 0);

// Record store line in the input schema.
std::string toJsonLine(const LogRecord& record);

// Orders by (dataset, user, timestamp, input line).
void sortRecords(std::vector<LogRecord>& records);

// Reads every non-blank line, rejecting malformed ones; records come back
// sorted. Throws CorpusError on a stream failure.
IngestResult ingest(std::istream& in);

using UserKey = std::pair<std::string, std::string>;  // (dataset, user)

struct FrequencyFilterResult {
  std::vector<LogRecord> kept;
  std::vector<UserKey> flagged;
  size_t droppedRecords = 0;
};

// Drops every record of a (dataset, user) with more than `maxInWindow`
// executions in some half-open window [t, t + window). Input must be sorted.
FrequencyFilterResult filterHighFrequencyUsers(
    const std::vector<LogRecord>& records,
    std::chrono::minutes window = std::chrono::minutes(30),
    size_t maxInWindow = 30);

// A record with its parsed query; `ast` is null on a parse error.
struct ParsedRecord {
  LogRecord record;
  std::shared_ptr<const sparql::QueryAst> ast;
  std::string parseError;
};

// Parses each distinct query text once.
std::vector<ParsedRecord> parseRecords(std::vector<LogRecord> records,
                                       size_t workers = 0);

struct LoopFilterResult {
  std::vector<ParsedRecord> kept;
  size_t removedSequences = 0;
  size_t droppedRecords = 0;
};

// Removes every maximal run of at least `minRunLength` consecutive queries
// of one (dataset, user) sharing a template. Parse errors break runs.
LoopFilterResult removeLoopSequences(std::vector<ParsedRecord> records,
                                     size_t minRunLength = 4);

struct SessionizeResult {
  std::vector<Session> sessions;
  size_t parseErrors = 0;
  size_t duplicatesCollapsed = 0;
};

// Drops parse errors, collapses contiguous identical texts to the first
// occurrence and splits each (dataset, user) stream where the gap exceeds
// `threshold` or consecutive term sets are disjoint. Session ids are
// "<dataset>/<user>/<k>" with k counting from 0 per user.
SessionizeResult sessionize(const std::vector<ParsedRecord>& records,
                            std::chrono::minutes threshold = std::chrono::minutes(60));

// Violations of the session constraints; empty if the session is valid.
std::vector<std::string> validateSession(const Session& session,
                                         std::chrono::minutes threshold);

struct FilterReport {
  size_t inputLines = 0;
  size_t rejectedLines = 0;
  size_t totalRecords = 0;
  size_t totalUsers = 0;
  size_t flaggedFrequencyUsers = 0;
  size_t frequencyDroppedRecords = 0;
  size_t loopSequencesRemoved = 0;
  size_t loopDroppedRecords = 0;
  // Executions surviving both robotic filters and their distinct texts.
  size_t organicExecutionCount = 0;
  size_t organicQueryCount = 0;
  size_t parseErrorRecords = 0;
  size_t duplicatesCollapsed = 0;
  size_t sessionRecords = 0;
  size_t sessionCount = 0;
  size_t singletonSessions = 0;

  // Every input line falls in exactly one bucket.
  bool partitionHolds() const;
  std::string toJson() const;
  static FilterReport fromJson(std::string_view text);
  bool operator==(const FilterReport&) const = default;
};

struct CorpusConfig {
  std::chrono::minutes botWindow{30};
  size_t botMaxInWindow = 30;
  size_t loopMinRun = 4;
  std::chrono::minutes timeThreshold{60};
  size_t workers = 0;
};

struct CorpusResult {
  std::vector<Session> sessions;
  FilterReport report;
  std::vector<UserKey> flaggedUsers;
};

// Filtering and sessionization of ingested records. Throws CorpusError when
// a stage leaves nothing to work with.
CorpusResult buildCorpus(const IngestResult& ingested, const CorpusConfig& config);

// Session store: one object per line with the queries in order.
std::string toJsonLine(const Session& session);
Session sessionFromJsonLine(std::string_view line);
void writeSessions(std::ostream& out, const std::vector<Session>& sessions);
std::vector<Session> readSessions(std::istream& in);

}  // namespace sparqlog::corpus
