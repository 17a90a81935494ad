#include "sparqlog/intent/Intent.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"

namespace sparqlog::intent {

using reformulation::Element;
using reformulation::EventKind;
using reformulation::ReformulationEvent;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logOf(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double logSumExp(const std::vector<double>& xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

void checkModel(const HmmModel& model) {
  const size_t h = model.numStates();
  if (h == 0 || model.a.size() != h || model.b.size() != h) {
    throw IntentError("malformed model");
  }
  for (size_t i = 0; i < h; ++i) {
    if (model.a[i].size() != h || model.b[i].size() != model.numSymbols()) {
      throw IntentError("malformed model");
    }
  }
}

void checkSymbols(const HmmModel& model, const std::vector<size_t>& os) {
  for (size_t u : os) {
    if (u >= model.numSymbols()) {
      throw IntentError("observation symbol " + std::to_string(u) +
                        " outside the model alphabet");
    }
  }
}

// Log forward variables after consuming all of `os`.
std::vector<double> logAlphas(const HmmModel& model,
                              const std::vector<size_t>& os) {
  const size_t h = model.numStates();
  std::vector<double> alpha(h);
  for (size_t i = 0; i < h; ++i) {
    alpha[i] = logOf(model.pi[i]) + logOf(model.b[i][os[0]]);
  }
  std::vector<double> next(h), terms(h);
  for (size_t t = 1; t < os.size(); ++t) {
    for (size_t j = 0; j < h; ++j) {
      for (size_t i = 0; i < h; ++i) terms[i] = alpha[i] + logOf(model.a[i][j]);
      next[j] = logSumExp(terms) + logOf(model.b[j][os[t]]);
    }
    alpha.swap(next);
  }
  return alpha;
}

}  // namespace

std::string_view toString(RcState s) {
  switch (s) {
    case RcState::Decrease: return "-1";
    case RcState::Unchanged: return "0";
    case RcState::Increase: return "+1";
  }
  return "?";
}

std::optional<RcState> rcStateFromString(std::string_view s) {
  for (RcState r : kAllRcStates) {
    if (toString(r) == s) return r;
  }
  if (s == "1") return RcState::Increase;
  return std::nullopt;
}

int sign(RcState s) { return static_cast<int>(s) - 1; }

std::vector<std::optional<RcState>> rcStates(const corpus::Session& session) {
  std::vector<std::optional<RcState>> out;
  for (size_t i = 0; i + 1 < session.queries.size(); ++i) {
    const auto& r1 = session.queries[i].resultSize;
    const auto& r2 = session.queries[i + 1].resultSize;
    if (!r1 || !r2) {
      out.emplace_back();
    } else if (*r2 > *r1) {
      out.emplace_back(RcState::Increase);
    } else if (*r2 < *r1) {
      out.emplace_back(RcState::Decrease);
    } else {
      out.emplace_back(RcState::Unchanged);
    }
  }
  return out;
}

std::vector<RcState> rcSequence(const corpus::Session& session) {
  std::vector<RcState> out;
  for (const auto& s : rcStates(session)) {
    if (s) out.push_back(*s);
  }
  return out;
}

std::vector<std::vector<RcState>> rcRuns(
    const std::vector<std::optional<RcState>>& states) {
  std::vector<std::vector<RcState>> out;
  std::vector<RcState> run;
  for (const auto& s : states) {
    if (s) {
      run.push_back(*s);
    } else if (!run.empty()) {
      out.push_back(std::move(run));
      run.clear();
    }
  }
  if (!run.empty()) out.push_back(std::move(run));
  return out;
}

uint64_t TransitionMatrix::total() const {
  uint64_t n = 0;
  for (const auto& row : counts) {
    for (uint64_t c : row) n += c;
  }
  return n;
}

TransitionMatrix markovMatrix(
    const std::vector<std::vector<std::optional<RcState>>>& sequences) {
  TransitionMatrix m;
  for (const auto& seq : sequences) {
    for (const auto& run : rcRuns(seq)) {
      for (size_t i = 0; i + 1 < run.size(); ++i) {
        ++m.counts[static_cast<size_t>(run[i])][static_cast<size_t>(run[i + 1])];
      }
    }
  }
  if (m.total() == 0) throw IntentError("insufficient data");
  for (size_t i = 0; i < kRcStateCount; ++i) {
    uint64_t rowTotal = 0;
    for (uint64_t c : m.counts[i]) rowTotal += c;
    if (rowTotal == 0) continue;
    std::array<double, kRcStateCount> row{};
    for (size_t j = 0; j < kRcStateCount; ++j) {
      row[j] = static_cast<double>(m.counts[i][j]) / static_cast<double>(rowTotal);
    }
    m.probabilities[i] = row;
  }
  return m;
}

TransitionMatrix markovMatrix(const std::vector<corpus::Session>& sessions) {
  std::vector<std::vector<std::optional<RcState>>> sequences;
  sequences.reserve(sessions.size());
  for (const auto& s : sessions) sequences.push_back(rcStates(s));
  return markovMatrix(sequences);
}

std::string_view toString(ObservationSymbol s) {
  switch (s) {
    case ObservationSymbol::Add: return "Add";
    case ObservationSymbol::Remove: return "Remove";
    case ObservationSymbol::SubSubject: return "SubSubject";
    case ObservationSymbol::SubPredicate: return "SubPredicate";
    case ObservationSymbol::SubObject: return "SubObject";
    case ObservationSymbol::SubCombined: return "SubCombined";
    case ObservationSymbol::NoTripleChange: return "NoTripleChange";
  }
  return "?";
}

std::optional<ObservationSymbol> symbolFromString(std::string_view s) {
  for (ObservationSymbol u : kAllSymbols) {
    if (toString(u) == s) return u;
  }
  return std::nullopt;
}

ObservationSymbol observationOf(const std::vector<ReformulationEvent>& pairEvents) {
  bool added = false;
  bool removed = false;
  bool combined = false;
  std::set<Element> substituted;
  for (const auto& e : pairEvents) {
    switch (e.kind) {
      case EventKind::TripleAdded: added = true; break;
      case EventKind::TripleRemoved: removed = true; break;
      case EventKind::TripleSubstituted:
        if (e.combined()) combined = true;
        substituted.insert(e.elements.begin(), e.elements.end());
        break;
      default: break;
    }
  }
  if (combined || substituted.size() > 1) return ObservationSymbol::SubCombined;
  if (substituted.size() == 1) {
    switch (*substituted.begin()) {
      case Element::Subject: return ObservationSymbol::SubSubject;
      case Element::Predicate: return ObservationSymbol::SubPredicate;
      case Element::Object: return ObservationSymbol::SubObject;
    }
  }
  if (added) return ObservationSymbol::Add;
  if (removed) return ObservationSymbol::Remove;
  return ObservationSymbol::NoTripleChange;
}

std::vector<ObservationSymbol> observationSequence(
    const corpus::Session& session, const std::vector<ReformulationEvent>& events) {
  const size_t pairs = session.size() < 2 ? 0 : session.size() - 1;
  std::vector<std::vector<ReformulationEvent>> byPair(pairs);
  for (const auto& e : events) {
    if (e.sessionId == session.sessionId && e.pair < pairs) {
      byPair[e.pair].push_back(e);
    }
  }
  std::vector<ObservationSymbol> out;
  out.reserve(pairs);
  for (const auto& p : byPair) out.push_back(observationOf(p));
  return out;
}

std::vector<LabeledSequence> labeledRuns(
    const std::vector<std::optional<RcState>>& states,
    const std::vector<ObservationSymbol>& observations) {
  if (states.size() != observations.size()) {
    throw IntentError("state and observation sequences differ in length");
  }
  std::vector<LabeledSequence> out;
  LabeledSequence run;
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i]) {
      run.emplace_back(static_cast<size_t>(*states[i]),
                       static_cast<size_t>(observations[i]));
    } else if (!run.empty()) {
      out.push_back(std::move(run));
      run.clear();
    }
  }
  if (!run.empty()) out.push_back(std::move(run));
  return out;
}

std::vector<double> smoothedDistribution(const std::vector<uint64_t>& counts,
                                         double alpha) {
  const size_t n = counts.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  double total = 0.0;
  for (uint64_t c : counts) total += static_cast<double>(c);
  const double denom = total + alpha * static_cast<double>(n);
  if (denom <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return out;
  }
  for (size_t i = 0; i < n; ++i) {
    out[i] = (static_cast<double>(counts[i]) + alpha) / denom;
  }
  return out;
}

HmmModel trainHmm(const std::vector<LabeledSequence>& sequences, size_t numStates,
                  size_t numSymbols, double alpha) {
  if (numStates == 0 || numSymbols == 0) throw IntentError("empty model shape");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw IntentError("smoothing alpha must be a non-negative number");
  }
  std::vector<uint64_t> piCounts(numStates, 0);
  std::vector<std::vector<uint64_t>> aCounts(numStates,
                                             std::vector<uint64_t>(numStates, 0));
  std::vector<std::vector<uint64_t>> bCounts(numStates,
                                             std::vector<uint64_t>(numSymbols, 0));
  size_t steps = 0;
  for (const auto& seq : sequences) {
    for (size_t t = 0; t < seq.size(); ++t) {
      const auto [h, u] = seq[t];
      if (h >= numStates || u >= numSymbols) {
        throw IntentError("training step outside the model alphabet");
      }
      if (t == 0) ++piCounts[h];
      if (t + 1 < seq.size()) ++aCounts[h][seq[t + 1].first];
      ++bCounts[h][u];
      ++steps;
    }
  }
  if (steps == 0) throw IntentError("no training pairs");

  HmmModel model;
  model.alpha = alpha;
  model.pi = smoothedDistribution(piCounts, alpha);
  for (size_t h = 0; h < numStates; ++h) {
    model.a.push_back(smoothedDistribution(aCounts[h], alpha));
    model.b.push_back(smoothedDistribution(bCounts[h], alpha));
  }
  return model;
}

double logForward(const HmmModel& model, const std::vector<size_t>& os) {
  checkModel(model);
  if (os.empty()) throw IntentError("empty observation sequence");
  checkSymbols(model, os);
  return logSumExp(logAlphas(model, os));
}

double forward(const HmmModel& model, const std::vector<size_t>& os) {
  return std::exp(logForward(model, os));
}

ViterbiPath decode(const HmmModel& model, const std::vector<size_t>& os) {
  checkModel(model);
  if (os.empty()) throw IntentError("empty observation sequence");
  checkSymbols(model, os);
  const size_t h = model.numStates();
  const size_t n = os.size();
  // best[t][i]: max log probability of emitting os[t+1..] after being in i at t.
  std::vector<std::vector<double>> best(n, std::vector<double>(h, 0.0));
  for (size_t t = n - 1; t > 0; --t) {
    for (size_t i = 0; i < h; ++i) {
      double m = kNegInf;
      for (size_t j = 0; j < h; ++j) {
        m = std::max(m, logOf(model.a[i][j]) + logOf(model.b[j][os[t]]) + best[t][j]);
      }
      best[t - 1][i] = m;
    }
  }
  // Walking forward and taking the first maximizer at every step yields the
  // lexicographically smallest optimal path.
  ViterbiPath path;
  path.states.assign(n, 0);
  double top = kNegInf;
  for (size_t i = 0; i < h; ++i) {
    const double s = logOf(model.pi[i]) + logOf(model.b[i][os[0]]) + best[0][i];
    if (s > top) {
      top = s;
      path.states[0] = i;
    }
  }
  path.logProbability = top;
  for (size_t t = 1; t < n; ++t) {
    const size_t prev = path.states[t - 1];
    double m = kNegInf;
    for (size_t j = 0; j < h; ++j) {
      const double s = logOf(model.a[prev][j]) + logOf(model.b[j][os[t]]) + best[t][j];
      if (s > m) {
        m = s;
        path.states[t] = j;
      }
    }
  }
  return path;
}

std::vector<std::pair<size_t, double>> suggest(const HmmModel& model,
                                               const std::vector<size_t>& os) {
  checkModel(model);
  checkSymbols(model, os);
  const size_t h = model.numStates();
  // Distribution of the hidden state at the next step.
  std::vector<double> nextState(h, 0.0);
  if (os.empty()) {
    nextState = model.pi;
  } else {
    const auto alpha = logAlphas(model, os);
    const double total = logSumExp(alpha);
    if (total == kNegInf) {
      throw IntentError("observation sequence has zero probability");
    }
    for (size_t i = 0; i < h; ++i) {
      const double w = std::exp(alpha[i] - total);
      for (size_t j = 0; j < h; ++j) nextState[j] += w * model.a[i][j];
    }
  }
  std::vector<std::pair<size_t, double>> out;
  for (size_t u = 0; u < model.numSymbols(); ++u) {
    double p = 0.0;
    for (size_t j = 0; j < h; ++j) p += nextState[j] * model.b[j][u];
    out.emplace_back(u, p);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return out;
}

HmmModel trainIntentModel(const std::vector<corpus::Session>& sessions,
                          const std::vector<ReformulationEvent>& events,
                          double alpha) {
  std::map<std::string, std::vector<ReformulationEvent>> bySession;
  for (const auto& e : events) bySession[e.sessionId].push_back(e);
  static const std::vector<ReformulationEvent> kNone;
  std::vector<LabeledSequence> sequences;
  for (const auto& s : sessions) {
    if (s.size() < 2) continue;
    auto it = bySession.find(s.sessionId);
    const auto obs = observationSequence(s, it == bySession.end() ? kNone : it->second);
    for (auto& run : labeledRuns(rcStates(s), obs)) sequences.push_back(std::move(run));
  }
  return trainHmm(sequences, kRcStateCount, kSymbolCount, alpha);
}

std::string modelToJson(const HmmModel& model) {
  checkModel(model);
  nlohmann::ordered_json j;
  j["schema"] = kModelSchema;
  j["alpha"] = model.alpha;
  auto states = nlohmann::ordered_json::array();
  if (model.numStates() == kRcStateCount) {
    for (RcState s : kAllRcStates) states.push_back(toString(s));
  } else {
    for (size_t i = 0; i < model.numStates(); ++i) states.push_back(std::to_string(i));
  }
  auto symbols = nlohmann::ordered_json::array();
  if (model.numSymbols() == kSymbolCount) {
    for (ObservationSymbol u : kAllSymbols) symbols.push_back(toString(u));
  } else {
    for (size_t i = 0; i < model.numSymbols(); ++i) symbols.push_back(std::to_string(i));
  }
  j["states"] = states;
  j["symbols"] = symbols;
  j["pi"] = model.pi;
  j["A"] = model.a;
  j["B"] = model.b;
  return j.dump(2);
}

HmmModel modelFromJson(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw IntentError(std::string("malformed model: ") + ex.what());
  }
  if (!j.is_object() || j.value("schema", std::string()) != kModelSchema) {
    throw IntentError("malformed model: missing or unknown schema tag");
  }
  HmmModel model;
  try {
    model.alpha = j.at("alpha").get<double>();
    model.pi = j.at("pi").get<std::vector<double>>();
    model.a = j.at("A").get<std::vector<std::vector<double>>>();
    model.b = j.at("B").get<std::vector<std::vector<double>>>();
    if (j.at("states").size() != model.numStates() ||
        j.at("symbols").size() != model.numSymbols()) {
      throw IntentError("malformed model: state or symbol list mismatch");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw IntentError(std::string("malformed model: ") + ex.what());
  }
  checkModel(model);
  return model;
}

}  // namespace sparqlog::intent
