#include "sparqlog/report/Pipeline.h"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sparqlog/util/Parallel.h"

namespace sparqlog::report {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

namespace {

constexpr const char* kRecordsDir = "records";
constexpr const char* kIngestSummary = "ingest_summary.json";
constexpr const char* kSessions = "sessions.ndjson";
constexpr const char* kEvents = "events.ndjson";
constexpr const char* kModel = "hmm_model.json";

std::string fileSafe(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out[0] == '.') out.insert(out.begin(), '_');
  return out;
}

size_t workers(const PipelineConfig& c) { return static_cast<size_t>(c.workers); }

struct AnalyzeTables {
  Table gedSeries;
  Table similarity;
  Table histogram;
};

AnalyzeTables analyzeTables(const PipelineConfig& c,
                            const std::vector<corpus::Session>& sessions) {
  analytics::GedEvolvementOptions ged;
  ged.ged.exactSizeLimit = static_cast<size_t>(c.gedExactSizeLimit);
  ged.ged.timeBudget = std::chrono::milliseconds(c.gedTimeBudgetMs);
  ged.sampleFraction = c.gedSample;
  ged.seed = c.seed;
  ged.workers = workers(c);
  analytics::SimilarityOptions sim;
  sim.size = analytics::lengthPercentile(sessions, c.percentile);
  sim.workers = workers(c);
  std::vector<std::pair<analytics::SimilarityMetric, analytics::SessionMatrix>> matrices;
  for (auto m : {analytics::SimilarityMetric::CosineFeature,
                 analytics::SimilarityMetric::KlFeature,
                 analytics::SimilarityMetric::CosineTerm,
                 analytics::SimilarityMetric::KlTerm}) {
    matrices.emplace_back(m, analytics::similarityMatrix(sessions, m, sim));
  }
  return {gedSeriesTable(analytics::gedEvolvement(sessions, ged)),
          similarityTable(matrices), sessionLengthHistogram(sessions)};
}

std::vector<reformulation::ReformulationEvent> computeEvents(
    const std::vector<corpus::Session>& sessions, size_t n) {
  std::vector<std::vector<reformulation::ReformulationEvent>> parts(sessions.size());
  util::parallelFor(sessions.size(), n,
                    [&](size_t i) { parts[i] = reformulation::pairEvents(sessions[i]); });
  std::vector<reformulation::ReformulationEvent> out;
  for (auto& p : parts) {
    out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  return out;
}

std::vector<size_t> symbolIndices(const std::vector<intent::ObservationSymbol>& os) {
  std::vector<size_t> out;
  for (auto u : os) out.push_back(static_cast<size_t>(u));
  return out;
}

OrderedJson symbolNames(const std::vector<size_t>& os) {
  auto out = OrderedJson::array();
  for (size_t u : os) out.push_back(intent::toString(intent::kAllSymbols.at(u)));
  return out;
}

}  // namespace

// _____________________________________________________________________________
void PipelineConfig::validate() const {
  auto positive = [](int64_t v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(timeThresholdMinutes, "timeThresholdMinutes");
  positive(botWindowMinutes, "botWindowMinutes");
  positive(botMaxInWindow, "botMaxInWindow");
  positive(loopMinRun, "loopMinRun");
  positive(gedExactSizeLimit, "gedExactSizeLimit");
  positive(gedTimeBudgetMs, "gedTimeBudgetMs");
  if (!(hmmAlpha >= 0.0) || !std::isfinite(hmmAlpha)) {
    throw ConfigError("hmmAlpha must be a non-negative number");
  }
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw ConfigError("percentile must be in (0, 100]");
  }
  if (!(gedSample > 0.0 && gedSample <= 1.0)) {
    throw ConfigError("gedSample must be in (0, 1]");
  }
  if (workers < 0) throw ConfigError("workers must not be negative");
  if (output.empty()) throw ConfigError("output must not be empty");
}

corpus::CorpusConfig PipelineConfig::corpusConfig() const {
  corpus::CorpusConfig c;
  c.botWindow = std::chrono::minutes(botWindowMinutes);
  c.botMaxInWindow = static_cast<size_t>(botMaxInWindow);
  c.loopMinRun = static_cast<size_t>(loopMinRun);
  c.timeThreshold = std::chrono::minutes(timeThresholdMinutes);
  c.workers = static_cast<size_t>(workers);
  return c;
}

#define SPARQLOG_CONFIG_FIELDS(X)                                               \
  X(input) X(output) X(timeThresholdMinutes) X(botWindowMinutes) X(botMaxInWindow) \
  X(loopMinRun) X(gedExactSizeLimit) X(gedTimeBudgetMs) X(hmmAlpha) X(percentile)  \
  X(gedSample) X(seed) X(workers)

PipelineConfig PipelineConfig::fromJson(std::string_view text,
                                        const PipelineConfig& defaults) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("malformed config: not a JSON object");
  PipelineConfig c = defaults;
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    try {
#define X(f)                                 \
  if (key == #f) {                           \
    value.get_to(c.f);                       \
    known = true;                            \
  }
      SPARQLOG_CONFIG_FIELDS(X)
#undef X
    } catch (const Json::exception&) {
      throw ConfigError("config field " + key + " has the wrong type");
    }
    if (!known) throw ConfigError("unknown config field " + key);
  }
  return c;
}

PipelineConfig PipelineConfig::fromJson(std::string_view text) {
  return fromJson(text, PipelineConfig{});
}

std::string PipelineConfig::toJson() const {
  OrderedJson j;
#define X(f) j[#f] = f;
  SPARQLOG_CONFIG_FIELDS(X)
#undef X
  return j.dump(2);
}

#undef SPARQLOG_CONFIG_FIELDS

// _____________________________________________________________________________
Workspace::Workspace(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
}

fs::path Workspace::path(const std::string& name) const {
  return fs::path(config_.output) / name;
}

void Workspace::write(const std::string& name, const std::string& content) const {
  const auto p = path(name);
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string Workspace::read(const std::string& name,
                            const std::string& requiredStage) const {
  std::ifstream in(path(name), std::ios::binary);
  if (!in) throw StageError(requiredStage, "run " + requiredStage + " first");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

corpus::IngestResult Workspace::ingest() const {
  if (config_.input.empty()) throw ConfigError("input must be set for ingest");
  std::ifstream in(config_.input, std::ios::binary);
  if (!in) throw ConfigError("cannot open input " + config_.input);
  auto result = corpus::ingest(in);

  fs::remove_all(path(kRecordsDir));
  std::map<std::string, std::string> files;
  for (const auto& r : result.records) {
    auto& f = files[r.datasetId];
    f += corpus::toJsonLine(r);
    f += '\n';
  }
  for (const auto& [dataset, content] : files) {
    write(std::string(kRecordsDir) + "/" + fileSafe(dataset) + ".ndjson", content);
  }
  OrderedJson summary;
  summary["inputLines"] = result.records.size() + result.rejected.size();
  summary["records"] = result.records.size();
  auto rejected = OrderedJson::array();
  for (const auto& r : result.rejected) {
    rejected.push_back(OrderedJson{{"line", r.line}, {"reason", r.reason}});
  }
  summary["rejected"] = rejected;
  write(kIngestSummary, summary.dump(2) + "\n");
  return result;
}

corpus::CorpusResult Workspace::sessionize() const {
  const auto summary = Json::parse(read(kIngestSummary, "ingest"));
  corpus::IngestResult ingested;
  for (const auto& r : summary.at("rejected")) {
    ingested.rejected.push_back({r.at("line").get<size_t>(), r.at("reason").get<std::string>()});
  }
  std::vector<fs::path> files;
  if (fs::exists(path(kRecordsDir))) {
    for (const auto& e : fs::directory_iterator(path(kRecordsDir))) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    auto part = corpus::ingest(in);
    if (!part.rejected.empty()) {
      throw StageError("sessionize", "corrupt record store " + f.string());
    }
    for (auto& r : part.records) ingested.records.push_back(std::move(r));
  }
  corpus::sortRecords(ingested.records);

  auto result = corpus::buildCorpus(ingested, config_.corpusConfig());
  std::ostringstream out;
  corpus::writeSessions(out, result.sessions);
  write(kSessions, out.str());
  write(kArtifactNames[8], result.report.toJson() + "\n");
  return result;
}

std::vector<corpus::Session> Workspace::loadSessions() const {
  std::istringstream in(read(kSessions, "sessionize"));
  return corpus::readSessions(in);
}

std::vector<reformulation::ReformulationEvent> Workspace::loadEvents() const {
  std::istringstream in(read(kEvents, "events"));
  std::vector<reformulation::ReformulationEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(reformulation::eventFromJsonLine(line));
  }
  return out;
}

intent::HmmModel Workspace::loadModel() const {
  return intent::modelFromJson(read(kModel, "hmm-train"));
}

void Workspace::analyze() const {
  const auto sessions = loadSessions();
  auto t = analyzeTables(config_, sessions);
  write(kArtifactNames[5], t.gedSeries.toCsv());
  write(kArtifactNames[6], t.similarity.toCsv());
  write(kArtifactNames[4], t.histogram.toCsv());
}

std::vector<reformulation::ReformulationEvent> Workspace::events() const {
  const auto sessions = loadSessions();
  auto events = computeEvents(sessions, workers(config_));
  std::string lines;
  for (const auto& e : events) {
    lines += reformulation::toJsonLine(e);
    lines += '\n';
  }
  write(kEvents, lines);
  write(kArtifactNames[0], operatorTable(sessions, events).toCsv());
  write(kArtifactNames[1], tripleTable(sessions, events).toCsv());
  write(kArtifactNames[2], locusTable(events).toCsv());
  write(kArtifactNames[3], filterTable(events).toCsv());
  write("form_changes.csv", formChangeTable(sessions, events).toCsv());
  return events;
}

intent::TransitionMatrix Workspace::markov() const {
  const auto sessions = loadSessions();
  std::optional<intent::TransitionMatrix> m;
  try {
    m = intent::markovMatrix(sessions);
  } catch (const intent::IntentError& e) {
    write(kArtifactNames[7], markovTable(std::nullopt).toCsv());
    write("markov_matrix.json", markovJson(std::nullopt));
    throw StageError("markov", e.what());
  }
  write(kArtifactNames[7], markovTable(m).toCsv());
  write("markov_matrix.json", markovJson(m));
  return *m;
}

intent::HmmModel Workspace::hmmTrain() const {
  const auto sessions = loadSessions();
  const auto events = loadEvents();
  intent::HmmModel model;
  try {
    model = intent::trainIntentModel(sessions, events, config_.hmmAlpha);
  } catch (const intent::IntentError& e) {
    fs::remove(path(kModel));
    fs::remove(path("hmm_parameters.csv"));
    throw StageError("hmm-train", e.what());
  }
  write(kModel, intent::modelToJson(model) + "\n");
  write("hmm_parameters.csv", hmmParameterTable(model).toCsv());
  return model;
}

std::vector<std::string> Workspace::hmmDecode(
    const std::optional<std::string>& sessionId) const {
  const auto model = loadModel();
  const auto sessions = loadSessions();
  const auto events = loadEvents();
  std::vector<std::string> out;
  bool found = false;
  for (const auto& s : sessions) {
    if (sessionId ? s.sessionId != *sessionId : s.size() < 2) continue;
    found = true;
    const auto os = symbolIndices(intent::observationSequence(s, events));
    OrderedJson j;
    j["sessionId"] = s.sessionId;
    j["observations"] = symbolNames(os);
    if (os.empty()) {
      j["states"] = OrderedJson::array();
      j["logProbability"] = nullptr;
    } else {
      const auto path = intent::decode(model, os);
      auto states = OrderedJson::array();
      for (size_t h : path.states) {
        states.push_back(intent::toString(intent::kAllRcStates.at(h)));
      }
      j["states"] = states;
      if (std::isfinite(path.logProbability)) {
        j["logProbability"] = path.logProbability;
      } else {
        j["logProbability"] = nullptr;
      }
    }
    out.push_back(j.dump());
  }
  if (sessionId && !found) throw StageError("hmm-decode", "unknown session " + *sessionId);
  return out;
}

std::string Workspace::suggest(
    const std::optional<std::string>& sessionId,
    const std::optional<std::vector<std::string>>& observations) const {
  const auto model = loadModel();
  std::vector<size_t> os;
  OrderedJson j;
  if (observations) {
    for (const auto& name : *observations) {
      auto u = intent::symbolFromString(name);
      if (!u) throw ConfigError("unknown observation symbol " + name);
      os.push_back(static_cast<size_t>(*u));
    }
  } else if (sessionId) {
    const auto sessions = loadSessions();
    auto it = std::find_if(sessions.begin(), sessions.end(),
                           [&](const auto& s) { return s.sessionId == *sessionId; });
    if (it == sessions.end()) throw StageError("suggest", "unknown session " + *sessionId);
    os = symbolIndices(intent::observationSequence(*it, loadEvents()));
    j["sessionId"] = *sessionId;
  }
  j["observations"] = symbolNames(os);
  auto ranked = OrderedJson::array();
  try {
    for (const auto& [u, p] : intent::suggest(model, os)) {
      ranked.push_back(OrderedJson{{"symbol", intent::toString(intent::kAllSymbols.at(u))},
                                   {"score", p}});
    }
  } catch (const intent::IntentError& e) {
    throw StageError("suggest", e.what());
  }
  j["suggestions"] = ranked;
  return j.dump();
}

ReportBundle Workspace::report() const {
  ReportBundle b;
  ingest();
  auto corpus = sessionize();
  const auto& sessions = corpus.sessions;
  b.filterReport = corpus.report;

  auto analyzed = analyzeTables(config_, sessions);
  write(kArtifactNames[5], analyzed.gedSeries.toCsv());
  write(kArtifactNames[6], analyzed.similarity.toCsv());
  write(kArtifactNames[4], analyzed.histogram.toCsv());
  b.gedSeries = std::move(analyzed.gedSeries);
  b.similarityMatrices = std::move(analyzed.similarity);
  b.sessionLengthHistogram = std::move(analyzed.histogram);

  const auto events = this->events();
  b.operatorTable = operatorTable(sessions, events);
  b.tripleTable = tripleTable(sessions, events);
  b.locusTable = locusTable(events);
  b.filterTable = filterTable(events);
  b.formChanges = formChangeTable(sessions, events);

  try {
    b.markovMatrix = markovTable(markov());
  } catch (const StageError& e) {
    b.markovMatrix = markovTable(std::nullopt);
    b.warnings.push_back(std::string("markov: ") + e.what());
  }
  try {
    hmmTrain();
  } catch (const StageError& e) {
    b.warnings.push_back(std::string("hmm-train: ") + e.what());
  }
  return b;
}

ReportBundle runPipeline(const PipelineConfig& config) {
  return Workspace(config).report();
}

}  // namespace sparqlog::report
