#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sparqlog/corpus/Types.h"

namespace sparqlog::testing {

// A parsed session with one-minute spacing and the given result sizes
// (missing sizes are unknown).
inline corpus::Session makeSession(
    const std::string& id, const std::vector<std::string>& queries,
    const std::vector<std::optional<uint64_t>>& sizes = {},
    const std::string& dataset = "d") {
  corpus::Session s;
  s.sessionId = id;
  s.datasetId = dataset;
  s.userId = "u-" + id;
  for (size_t i = 0; i < queries.size(); ++i) {
    corpus::SessionQuery q;
    q.text = queries[i];
    q.ast = std::make_shared<sparql::QueryAst>(sparql::parseQuery(queries[i]));
    q.timestamp = corpus::TimePoint(std::chrono::minutes(i));
    if (i < sizes.size()) q.resultSize = sizes[i];
    s.queries.push_back(std::move(q));
  }
  return s;
}

}  // namespace sparqlog::testing
