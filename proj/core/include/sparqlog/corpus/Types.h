#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparqlog/sparql/QueryAst.h"

namespace sparqlog::corpus {

using TimePoint =
    std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

// One query execution from an endpoint log.
struct LogRecord {
  std::string datasetId;
  std::string userId;
  TimePoint timestamp;
  std::string queryText;
  std::optional<uint64_t> resultSize;
  std::optional<uint64_t> runtimeMs;
  // 1-based line number in the input, for diagnostics.
  size_t line = 0;

  bool operator==(const LogRecord&) const = default;
};

struct SessionQuery {
  std::string text;
  std::shared_ptr<const sparql::QueryAst> ast;
  TimePoint timestamp;
  std::optional<uint64_t> resultSize;
  std::optional<uint64_t> runtimeMs;
};

// A search session: one user's queries, each sharing a term with the previous
// one and separated by at most the time threshold.
struct Session {
  std::string sessionId;
  std::string datasetId;
  std::string userId;
  std::vector<SessionQuery> queries;

  size_t size() const { return queries.size(); }
  bool singleton() const { return queries.size() == 1; }
};

}  // namespace sparqlog::corpus
