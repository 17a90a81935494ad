#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparqlog/corpus/Types.h"
#include "sparqlog/reformulation/Events.h"

namespace sparqlog::intent {

class IntentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sign of the result-size change between consecutive queries. The
// enumerator value is the state index used in matrices.
enum class RcState : uint8_t { Decrease = 0, Unchanged = 1, Increase = 2 };

inline constexpr size_t kRcStateCount = 3;
inline constexpr std::array<RcState, kRcStateCount> kAllRcStates = {
    RcState::Decrease, RcState::Unchanged, RcState::Increase};

// "-1", "0", "+1".
std::string_view toString(RcState s);
std::optional<RcState> rcStateFromString(std::string_view s);
int sign(RcState s);

// One entry per consecutive pair; nullopt where a result size is unknown.
std::vector<std::optional<RcState>> rcStates(const corpus::Session& session);

// The known states only, in order.
std::vector<RcState> rcSequence(const corpus::Session& session);

// Maximal runs of consecutive pairs whose states are all known.
std::vector<std::vector<RcState>> rcRuns(
    const std::vector<std::optional<RcState>>& states);

struct TransitionMatrix {
  std::array<std::array<uint64_t, kRcStateCount>, kRcStateCount> counts{};
  // Row-normalized counts; nullopt for rows without any outgoing bigram.
  std::array<std::optional<std::array<double, kRcStateCount>>, kRcStateCount>
      probabilities{};

  uint64_t total() const;
};

// Bigrams of adjacent known states pooled over all sessions. Throws
// IntentError("insufficient data") when there is no bigram.
TransitionMatrix markovMatrix(const std::vector<corpus::Session>& sessions);
TransitionMatrix markovMatrix(
    const std::vector<std::vector<std::optional<RcState>>>& sequences);

// Triple-pattern change class of one query pair.
enum class ObservationSymbol : uint8_t {
  Add,
  Remove,
  SubSubject,
  SubPredicate,
  SubObject,
  SubCombined,
  NoTripleChange
};

inline constexpr size_t kSymbolCount = 7;
inline constexpr std::array<ObservationSymbol, kSymbolCount> kAllSymbols = {
    ObservationSymbol::Add,          ObservationSymbol::Remove,
    ObservationSymbol::SubSubject,   ObservationSymbol::SubPredicate,
    ObservationSymbol::SubObject,    ObservationSymbol::SubCombined,
    ObservationSymbol::NoTripleChange};

std::string_view toString(ObservationSymbol s);
std::optional<ObservationSymbol> symbolFromString(std::string_view s);

// Symbol of one pair's events. Precedence: combined substitution (one triple
// with several changed elements, or different elements changed across the
// pair) > single-element substitution > Add > Remove > NoTripleChange.
ObservationSymbol observationOf(
    const std::vector<reformulation::ReformulationEvent>& pairEvents);

// One symbol per consecutive pair; `events` may hold other sessions' events,
// only those tagged with this session are used.
std::vector<ObservationSymbol> observationSequence(
    const corpus::Session& session,
    const std::vector<reformulation::ReformulationEvent>& events);

// Aligned (hidden state, observation) steps of one run of known states.
using LabeledSequence = std::vector<std::pair<size_t, size_t>>;

// Splits a session into labeled runs at pairs with unknown result size.
std::vector<LabeledSequence> labeledRuns(
    const std::vector<std::optional<RcState>>& states,
    const std::vector<ObservationSymbol>& observations);

// Discrete HMM with row-stochastic parameters.
struct HmmModel {
  std::vector<double> pi;              // |H|
  std::vector<std::vector<double>> a;  // |H| x |H|
  std::vector<std::vector<double>> b;  // |H| x |U|
  double alpha = 1.0;

  size_t numStates() const { return pi.size(); }
  size_t numSymbols() const { return b.empty() ? 0 : b[0].size(); }
  bool operator==(const HmmModel&) const = default;
};

// (count + alpha) / (total + alpha * n); uniform when everything is zero.
std::vector<double> smoothedDistribution(const std::vector<uint64_t>& counts,
                                         double alpha);

// Supervised add-alpha maximum likelihood estimate. With alpha = 0, rows
// without any count become uniform. Throws IntentError on empty input.
HmmModel trainHmm(const std::vector<LabeledSequence>& sequences,
                  size_t numStates, size_t numSymbols, double alpha = 1.0);

// ln p(OS | model) by the forward recursion in log space; -inf if
// impossible. Throws IntentError for an empty sequence or unknown symbol.
double logForward(const HmmModel& model, const std::vector<size_t>& os);
double forward(const HmmModel& model, const std::vector<size_t>& os);

struct ViterbiPath {
  std::vector<size_t> states;
  double logProbability;  // ln p(path, OS)
};

// Most likely hidden path; among equally likely paths the lexicographically
// smallest one.
ViterbiPath decode(const HmmModel& model, const std::vector<size_t>& os);

// p(next = u | OS) for every symbol, highest first (ties by index). An empty
// OS uses the initial distribution.
std::vector<std::pair<size_t, double>> suggest(const HmmModel& model,
                                               const std::vector<size_t>& os);

// Intention model over RC states and observation symbols.
HmmModel trainIntentModel(const std::vector<corpus::Session>& sessions,
                          const std::vector<reformulation::ReformulationEvent>& events,
                          double alpha = 1.0);

// JSON artifact with explicit state and symbol orderings and a schema tag.
inline constexpr std::string_view kModelSchema = "sparqlog.hmm/1";
std::string modelToJson(const HmmModel& model);
HmmModel modelFromJson(std::string_view text);

}  // namespace sparqlog::intent
