#include "sparqlog/corpus/Corpus.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "sparqlog/sparql/Views.h"
#include "sparqlog/util/Parallel.h"

namespace sparqlog::corpus {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

namespace {

bool readInt(std::string_view s, size_t pos, size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return r.ec == std::errc();
}

UserKey keyOf(const LogRecord& r) { return {r.datasetId, r.userId}; }

bool sameUser(const LogRecord& a, const LogRecord& b) {
  return a.datasetId == b.datasetId && a.userId == b.userId;
}

// Calls fn(begin, end) for each run of records of one (dataset, user).
template <typename T, typename Get, typename Fn>
void forEachUser(const std::vector<T>& items, Get get, Fn fn) {
  size_t begin = 0;
  while (begin < items.size()) {
    size_t end = begin + 1;
    while (end < items.size() && sameUser(get(items[begin]), get(items[end]))) ++end;
    fn(begin, end);
    begin = end;
  }
}

std::optional<uint64_t> optionalCount(const Json& j, const char* field,
                                      const char* name) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_number_unsigned()) return it->get<uint64_t>();
  if (it->is_number_integer() && it->get<int64_t>() >= 0) {
    return static_cast<uint64_t>(it->get<int64_t>());
  }
  throw std::invalid_argument(std::string("invalid ") + name);
}

std::string requiredString(const Json& j, const char* field, const char* name) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    throw std::invalid_argument(std::string("missing field ") + name);
  }
  if (!it->is_string()) throw std::invalid_argument(std::string("invalid ") + name);
  auto s = it->get<std::string>();
  if (s.empty()) throw std::invalid_argument(std::string("missing field ") + name);
  return s;
}

Json optionalJson(const std::optional<uint64_t>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::optional<TimePoint> parseTimestamp(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec;
  if (!readInt(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !readInt(s, 5, 2, mo) ||
      s[7] != '-' || !readInt(s, 8, 2, d) || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      !readInt(s, 11, 2, h) || s[13] != ':' || !readInt(s, 14, 2, mi) || s[16] != ':' ||
      !readInt(s, 17, 2, sec)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (size_t i = digits; i < 3; ++i) millis *= 10;
  }
  minutes offset{0};
  if (pos == s.size()) return std::nullopt;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    int oh, om;
    if (!readInt(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !readInt(s, pos + 4, 2, om) || oh > 23 || om > 59) {
      return std::nullopt;
    }
    offset = minutes(oh * 60 + om);
    if (s[pos] == '-') offset = -offset;
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  return time_point_cast<milliseconds>(sys_days{ymd}) + hours(h) + minutes(mi) +
         seconds(sec) + milliseconds(millis) - offset;
}

std::string formatTimestamp(TimePoint t) {
  using namespace std::chrono;
  const auto dayPoint = floor<days>(t);
  const year_month_day ymd{dayPoint};
  auto rest = t - dayPoint;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto mi = duration_cast<minutes>(rest);
  rest -= mi;
  const auto sec = duration_cast<seconds>(rest);
  rest -= sec;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(mi.count()), static_cast<int>(sec.count()),
                static_cast<int>(rest.count()));
  return buf;
}

LogRecord parseRecordLine(std::string_view line, size_t lineNumber) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception&) {
    throw std::invalid_argument("malformed JSON");
  }
  if (!j.is_object()) throw std::invalid_argument("not a JSON object");
  LogRecord r;
  r.line = lineNumber;
  r.datasetId = requiredString(j, "dataset", "datasetId");
  r.userId = requiredString(j, "user", "userId");
  auto time = requiredString(j, "time", "timestamp");
  auto t = parseTimestamp(time);
  if (!t) throw std::invalid_argument("invalid timestamp");
  r.timestamp = *t;
  r.queryText = requiredString(j, "query", "queryText");
  r.resultSize = optionalCount(j, "resultSize", "resultSize");
  r.runtimeMs = optionalCount(j, "runtimeMs", "runtimeMs");
  return r;
}

std::string toJsonLine(const LogRecord& r) {
  OrderedJson j;
  j["dataset"] = r.datasetId;
  j["user"] = r.userId;
  j["time"] = formatTimestamp(r.timestamp);
  j["query"] = r.queryText;
  j["resultSize"] = optionalJson(r.resultSize);
  j["runtimeMs"] = optionalJson(r.runtimeMs);
  return j.dump();
}

void sortRecords(std::vector<LogRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const LogRecord& a, const LogRecord& b) {
                     return std::tie(a.datasetId, a.userId, a.timestamp, a.line) <
                            std::tie(b.datasetId, b.userId, b.timestamp, b.line);
                   });
}

IngestResult ingest(std::istream& in) {
  IngestResult out;
  std::string line;
  size_t lineNumber = 0;
  while (std::getline(in, line)) {
    ++lineNumber;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.records.push_back(parseRecordLine(line, lineNumber));
    } catch (const std::invalid_argument& e) {
      out.rejected.push_back({lineNumber, e.what()});
    }
  }
  if (in.bad()) {
    throw CorpusError("ingest", "read error after line " + std::to_string(lineNumber) +
                                    " (" + std::to_string(out.records.size()) +
                                    " records read)");
  }
  sortRecords(out.records);
  return out;
}

FrequencyFilterResult filterHighFrequencyUsers(const std::vector<LogRecord>& records,
                                               std::chrono::minutes window,
                                               size_t maxInWindow) {
  FrequencyFilterResult out;
  forEachUser(records, [](const LogRecord& r) -> const LogRecord& { return r; },
              [&](size_t begin, size_t end) {
                bool flagged = false;
                size_t j = begin;
                for (size_t i = begin; i < end && !flagged; ++i) {
                  j = std::max(j, i);
                  while (j < end && records[j].timestamp < records[i].timestamp + window) ++j;
                  flagged = j - i > maxInWindow;
                }
                if (flagged) {
                  out.flagged.push_back(keyOf(records[begin]));
                  out.droppedRecords += end - begin;
                } else {
                  out.kept.insert(out.kept.end(), records.begin() + begin,
                                  records.begin() + end);
                }
              });
  return out;
}

std::vector<ParsedRecord> parseRecords(std::vector<LogRecord> records, size_t workers) {
  std::unordered_map<std::string, size_t> index;
  std::vector<const std::string*> texts;
  for (const auto& r : records) {
    if (index.emplace(r.queryText, texts.size()).second) texts.push_back(&r.queryText);
  }
  std::vector<std::shared_ptr<const sparql::QueryAst>> asts(texts.size());
  std::vector<std::string> errors(texts.size());
  util::parallelFor(texts.size(), workers, [&](size_t i) {
    try {
      asts[i] = std::make_shared<const sparql::QueryAst>(sparql::parseQuery(*texts[i]));
    } catch (const sparql::ParseError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<ParsedRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    const size_t i = index.at(r.queryText);
    out.push_back({std::move(r), asts[i], errors[i]});
  }
  return out;
}

LoopFilterResult removeLoopSequences(std::vector<ParsedRecord> records,
                                     size_t minRunLength) {
  std::vector<std::optional<std::string>> templates(records.size());
  std::unordered_map<const sparql::QueryAst*, std::string> cache;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto* ast = records[i].ast.get();
    if (!ast) continue;
    auto it = cache.find(ast);
    if (it == cache.end()) {
      it = cache.emplace(ast, sparql::templateOf(*ast).canonicalText).first;
    }
    templates[i] = it->second;
  }
  LoopFilterResult out;
  std::vector<bool> drop(records.size(), false);
  forEachUser(records, [](const ParsedRecord& r) -> const LogRecord& { return r.record; },
              [&](size_t begin, size_t end) {
                size_t i = begin;
                while (i < end) {
                  size_t j = i + 1;
                  if (templates[i]) {
                    while (j < end && templates[j] == templates[i]) ++j;
                    if (j - i >= minRunLength) {
                      ++out.removedSequences;
                      out.droppedRecords += j - i;
                      std::fill(drop.begin() + i, drop.begin() + j, true);
                    }
                  }
                  i = j;
                }
              });
  for (size_t i = 0; i < records.size(); ++i) {
    if (!drop[i]) out.kept.push_back(std::move(records[i]));
  }
  return out;
}

SessionizeResult sessionize(const std::vector<ParsedRecord>& records,
                            std::chrono::minutes threshold) {
  SessionizeResult out;
  forEachUser(
      records, [](const ParsedRecord& r) -> const LogRecord& { return r.record; },
      [&](size_t begin, size_t end) {
        std::vector<const ParsedRecord*> stream;
        for (size_t i = begin; i < end; ++i) {
          const auto& r = records[i];
          if (!r.ast) {
            ++out.parseErrors;
          } else if (!stream.empty() && stream.back()->record.queryText == r.record.queryText) {
            ++out.duplicatesCollapsed;
          } else {
            stream.push_back(&r);
          }
        }
        size_t k = 0;
        Session* current = nullptr;
        const ParsedRecord* prev = nullptr;
        for (const auto* r : stream) {
          bool split = prev == nullptr ||
                       r->record.timestamp - prev->record.timestamp > threshold;
          if (!split) {
            const auto& t1 = prev->ast->termSet;
            const auto& t2 = r->ast->termSet;
            split = std::none_of(t1.begin(), t1.end(),
                                 [&](const auto& t) { return t2.count(t) > 0; });
          }
          if (split) {
            Session s;
            s.datasetId = r->record.datasetId;
            s.userId = r->record.userId;
            s.sessionId = s.datasetId + "/" + s.userId + "/" + std::to_string(k++);
            out.sessions.push_back(std::move(s));
            current = &out.sessions.back();
          }
          current->queries.push_back({r->record.queryText, r->ast, r->record.timestamp,
                                      r->record.resultSize, r->record.runtimeMs});
          prev = r;
        }
      });
  return out;
}

std::vector<std::string> validateSession(const Session& s, std::chrono::minutes threshold) {
  std::vector<std::string> out;
  if (s.queries.empty()) out.push_back("empty session");
  for (size_t i = 0; i + 1 < s.queries.size(); ++i) {
    const auto& a = s.queries[i];
    const auto& b = s.queries[i + 1];
    const std::string at = " at pair " + std::to_string(i);
    if (b.timestamp < a.timestamp) out.push_back("timestamps decrease" + at);
    if (b.timestamp - a.timestamp > threshold) out.push_back("gap above threshold" + at);
    if (a.text == b.text) out.push_back("identical consecutive queries" + at);
    if (a.ast && b.ast) {
      const auto& t2 = b.ast->termSet;
      if (std::none_of(a.ast->termSet.begin(), a.ast->termSet.end(),
                       [&](const auto& t) { return t2.count(t) > 0; })) {
        out.push_back("disjoint term sets" + at);
      }
    } else {
      out.push_back("unparsed query" + at);
    }
  }
  return out;
}

bool FilterReport::partitionHolds() const {
  return inputLines == rejectedLines + totalRecords &&
         totalRecords == frequencyDroppedRecords + loopDroppedRecords +
                             organicExecutionCount &&
         organicExecutionCount == parseErrorRecords + duplicatesCollapsed + sessionRecords;
}

#define SPARQLOG_REPORT_FIELDS(X)                                              \
  X(inputLines) X(rejectedLines) X(totalRecords) X(totalUsers)                 \
  X(flaggedFrequencyUsers) X(frequencyDroppedRecords) X(loopSequencesRemoved)  \
  X(loopDroppedRecords) X(organicExecutionCount) X(organicQueryCount)          \
  X(parseErrorRecords) X(duplicatesCollapsed) X(sessionRecords) X(sessionCount) \
  X(singletonSessions)

std::string FilterReport::toJson() const {
  OrderedJson j;
#define X(f) j[#f] = f;
  SPARQLOG_REPORT_FIELDS(X)
#undef X
  return j.dump(2);
}

FilterReport FilterReport::fromJson(std::string_view text) {
  FilterReport r;
  try {
    auto j = Json::parse(text);
#define X(f) r.f = j.at(#f).get<size_t>();
    SPARQLOG_REPORT_FIELDS(X)
#undef X
  } catch (const Json::exception& e) {
    throw CorpusError("report", std::string("malformed filter report: ") + e.what());
  }
  return r;
}

#undef SPARQLOG_REPORT_FIELDS

CorpusResult buildCorpus(const IngestResult& ingested, const CorpusConfig& config) {
  if (config.botWindow.count() <= 0 || config.botMaxInWindow == 0 ||
      config.loopMinRun == 0 || config.timeThreshold.count() <= 0) {
    throw std::invalid_argument("thresholds must be positive");
  }
  CorpusResult out;
  auto& rep = out.report;
  rep.rejectedLines = ingested.rejected.size();
  rep.totalRecords = ingested.records.size();
  rep.inputLines = rep.rejectedLines + rep.totalRecords;
  if (ingested.records.empty()) throw CorpusError("ingest", "no records ingested");
  {
    std::set<UserKey> users;
    for (const auto& r : ingested.records) users.insert(keyOf(r));
    rep.totalUsers = users.size();
  }

  auto freq = filterHighFrequencyUsers(ingested.records, config.botWindow,
                                       config.botMaxInWindow);
  rep.flaggedFrequencyUsers = freq.flagged.size();
  rep.frequencyDroppedRecords = freq.droppedRecords;
  out.flaggedUsers = freq.flagged;
  if (freq.kept.empty()) {
    throw CorpusError("frequency bot filter",
                      "no organic records left after the frequency bot filter");
  }

  auto loops = removeLoopSequences(parseRecords(std::move(freq.kept), config.workers),
                                   config.loopMinRun);
  rep.loopSequencesRemoved = loops.removedSequences;
  rep.loopDroppedRecords = loops.droppedRecords;
  if (loops.kept.empty()) {
    throw CorpusError("loop bot filter",
                      "no organic records left after the loop bot filter");
  }
  rep.organicExecutionCount = loops.kept.size();
  {
    std::set<std::pair<std::string_view, std::string_view>> distinct;
    for (const auto& r : loops.kept) {
      distinct.emplace(r.record.datasetId, r.record.queryText);
    }
    rep.organicQueryCount = distinct.size();
  }

  auto sessions = sessionize(loops.kept, config.timeThreshold);
  rep.parseErrorRecords = sessions.parseErrors;
  rep.duplicatesCollapsed = sessions.duplicatesCollapsed;
  rep.sessionCount = sessions.sessions.size();
  for (const auto& s : sessions.sessions) {
    rep.sessionRecords += s.size();
    if (s.singleton()) ++rep.singletonSessions;
  }
  if (sessions.sessions.empty()) {
    throw CorpusError("parse-error removal",
                      "no parseable queries left after removing parse errors");
  }
  out.sessions = std::move(sessions.sessions);
  return out;
}

std::string toJsonLine(const Session& s) {
  OrderedJson j;
  j["sessionId"] = s.sessionId;
  j["dataset"] = s.datasetId;
  j["user"] = s.userId;
  auto queries = OrderedJson::array();
  for (const auto& q : s.queries) {
    OrderedJson e;
    e["text"] = q.text;
    e["time"] = formatTimestamp(q.timestamp);
    e["resultSize"] = optionalJson(q.resultSize);
    e["runtimeMs"] = optionalJson(q.runtimeMs);
    queries.push_back(std::move(e));
  }
  j["queries"] = std::move(queries);
  return j.dump();
}

Session sessionFromJsonLine(std::string_view line) {
  Session s;
  try {
    auto j = Json::parse(line);
    s.sessionId = j.at("sessionId").get<std::string>();
    s.datasetId = j.value("dataset", std::string());
    s.userId = j.at("user").get<std::string>();
    for (const auto& q : j.at("queries")) {
      SessionQuery sq;
      sq.text = q.at("text").get<std::string>();
      auto t = parseTimestamp(q.at("time").get<std::string>());
      if (!t) throw std::invalid_argument("invalid timestamp");
      sq.timestamp = *t;
      sq.resultSize = optionalCount(q, "resultSize", "resultSize");
      sq.runtimeMs = optionalCount(q, "runtimeMs", "runtimeMs");
      sq.ast = std::make_shared<const sparql::QueryAst>(sparql::parseQuery(sq.text));
      s.queries.push_back(std::move(sq));
    }
  } catch (const std::exception& e) {
    throw CorpusError("session store", std::string("malformed session: ") + e.what());
  }
  if (s.queries.empty()) throw CorpusError("session store", "malformed session: no queries");
  return s;
}

void writeSessions(std::ostream& out, const std::vector<Session>& sessions) {
  for (const auto& s : sessions) out << toJsonLine(s) << '\n';
}

std::vector<Session> readSessions(std::istream& in) {
  std::vector<Session> out;
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sessionFromJsonLine(line));
    } catch (const CorpusError& e) {
      throw CorpusError("session store", "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sparqlog::corpus
