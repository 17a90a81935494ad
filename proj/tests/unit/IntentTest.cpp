#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparqlog/intent/Intent.h"
#include "support/HmmOracles.h"
#include "support/Sessions.h"

using namespace sparqlog::intent;
using sparqlog::reformulation::Element;
using sparqlog::reformulation::EventKind;
using sparqlog::reformulation::ReformulationEvent;
using sparqlog::testing::makeSession;
using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

namespace {

constexpr size_t kDec = 0, kSame = 1, kInc = 2;
constexpr size_t kAdd = 0, kRemove = 1, kSubP = 3, kSubO = 4, kNone = 6;

std::vector<std::optional<uint64_t>> sizes(std::initializer_list<int> xs) {
  std::vector<std::optional<uint64_t>> out;
  for (int x : xs) {
    if (x < 0) out.emplace_back();
    else out.emplace_back(static_cast<uint64_t>(x));
  }
  return out;
}

sparqlog::corpus::Session sizedSession(std::initializer_list<int> xs) {
  std::vector<std::string> qs(xs.size(), "SELECT * WHERE { ?s <p> ?o }");
  return makeSession("s", qs, sizes(xs));
}

ReformulationEvent subst(std::vector<Element> elements) {
  ReformulationEvent e(EventKind::TripleSubstituted);
  e.elements = std::move(elements);
  return e;
}

HmmModel uniformModel(size_t states, size_t symbols) {
  HmmModel m;
  m.pi.assign(states, 1.0 / states);
  m.a.assign(states, std::vector<double>(states, 1.0 / states));
  m.b.assign(states, std::vector<double>(symbols, 1.0 / symbols));
  return m;
}

double relErr(double x, double y) {
  return std::abs(x - y) / std::max(std::abs(y), 1e-300);
}

}  // namespace

// _____________________________________________________________________________
TEST(RcSequence, SignRule) {
  EXPECT_THAT(rcSequence(sizedSession({5, 9, 9, 2})),
              ElementsAre(RcState::Increase, RcState::Unchanged, RcState::Decrease));
  EXPECT_THAT(rcSequence(sizedSession({3, 3})), ElementsAre(RcState::Unchanged));
}

TEST(RcSequence, UnknownSizesProduceNoState) {
  EXPECT_TRUE(rcSequence(sizedSession({5, -1, 7})).empty());
  auto states = rcStates(sizedSession({5, -1, 7, 8}));
  ASSERT_EQ(states.size(), 3u);
  EXPECT_FALSE(states[0]);
  EXPECT_FALSE(states[1]);
  EXPECT_EQ(states[2], RcState::Increase);
}

TEST(RcSequence, StringsAndSigns) {
  for (RcState s : kAllRcStates) EXPECT_EQ(rcStateFromString(toString(s)), s);
  EXPECT_EQ(sign(RcState::Decrease), -1);
  EXPECT_EQ(sign(RcState::Increase), 1);
  EXPECT_EQ(toString(RcState::Increase), "+1");
}

TEST(RcRuns, SplitAtUnknown) {
  auto runs = rcRuns(rcStates(sizedSession({1, 2, 3, -1, 3, 3, 1})));
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_THAT(runs[0], ElementsAre(RcState::Increase, RcState::Increase));
  EXPECT_THAT(runs[1], ElementsAre(RcState::Unchanged, RcState::Decrease));
}

// _____________________________________________________________________________
TEST(MarkovMatrix, Alternating) {
  // [-1, +1, -1, +1]: sizes 4 2 5 1 6.
  auto m = markovMatrix({sizedSession({4, 2, 5, 1, 6})});
  EXPECT_EQ(m.counts[kDec][kInc], 2u);
  EXPECT_EQ(m.counts[kInc][kDec], 1u);
  EXPECT_EQ(m.total(), 3u);
  ASSERT_TRUE(m.probabilities[kDec]);
  ASSERT_TRUE(m.probabilities[kInc]);
  EXPECT_EQ((*m.probabilities[kDec])[kInc], 1.0);
  EXPECT_EQ((*m.probabilities[kDec])[kDec], 0.0);
  EXPECT_EQ((*m.probabilities[kInc])[kDec], 1.0);
  EXPECT_FALSE(m.probabilities[kSame]);
}

TEST(MarkovMatrix, ConstantSequence) {
  auto m = markovMatrix({sizedSession({3, 3, 3, 3})});
  ASSERT_TRUE(m.probabilities[kSame]);
  EXPECT_EQ((*m.probabilities[kSame])[kSame], 1.0);
  EXPECT_FALSE(m.probabilities[kDec]);
  EXPECT_FALSE(m.probabilities[kInc]);
}

TEST(MarkovMatrix, BigramsDoNotCrossUnknownOrSessions) {
  // Each session has a single known state, or the states are split by an
  // unknown size.
  EXPECT_THROW(markovMatrix({sizedSession({1, 2}), sizedSession({2, 1}),
                             sizedSession({1, 2, -1, 3, 4})}),
               IntentError);
  try {
    markovMatrix({sizedSession({1})});
    FAIL();
  } catch (const IntentError& e) {
    EXPECT_STREQ(e.what(), "insufficient data");
  }
}

TEST(MarkovMatrix, RowsAreStochastic) {
  std::mt19937_64 rng(7);
  std::vector<std::vector<std::optional<RcState>>> seqs;
  std::uniform_int_distribution<int> d(-1, 2);
  for (int s = 0; s < 20; ++s) {
    std::vector<std::optional<RcState>> seq;
    for (int i = 0; i < 15; ++i) {
      int x = d(rng);
      if (x == 2) seq.emplace_back();
      else seq.emplace_back(static_cast<RcState>(x + 1));
    }
    seqs.push_back(seq);
  }
  auto m = markovMatrix(seqs);
  for (const auto& row : m.probabilities) {
    if (!row) continue;
    double total = 0.0;
    for (double p : *row) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

// _____________________________________________________________________________
TEST(Observation, Precedence) {
  ReformulationEvent add(EventKind::TripleAdded);
  ReformulationEvent rem(EventKind::TripleRemoved);
  ReformulationEvent filter(EventKind::FilterAdded);
  EXPECT_EQ(observationOf({}), ObservationSymbol::NoTripleChange);
  EXPECT_EQ(observationOf({filter}), ObservationSymbol::NoTripleChange);
  EXPECT_EQ(observationOf({rem}), ObservationSymbol::Remove);
  EXPECT_EQ(observationOf({rem, add}), ObservationSymbol::Add);
  EXPECT_EQ(observationOf({add, subst({Element::Object})}),
            ObservationSymbol::SubObject);
  EXPECT_EQ(observationOf({subst({Element::Subject}), subst({Element::Subject})}),
            ObservationSymbol::SubSubject);
  EXPECT_EQ(observationOf({subst({Element::Predicate}), add}),
            ObservationSymbol::SubPredicate);
  EXPECT_EQ(observationOf({subst({Element::Subject, Element::Object})}),
            ObservationSymbol::SubCombined);
  EXPECT_EQ(observationOf({subst({Element::Subject}), subst({Element::Object})}),
            ObservationSymbol::SubCombined);
}

TEST(Observation, StringsRoundTrip) {
  for (auto u : kAllSymbols) EXPECT_EQ(symbolFromString(toString(u)), u);
  EXPECT_FALSE(symbolFromString("Bogus"));
}

TEST(Observation, SessionSequence) {
  auto s = makeSession("x", {"SELECT * WHERE { ?s <p> ?o }",
                             "SELECT * WHERE { ?s <p> ?o . ?o <q> ?z }",
                             "SELECT * WHERE { ?s <p> ?o . ?o <r> ?z }",
                             "SELECT * WHERE { ?s <p> ?o . ?o <r> ?z } LIMIT 5"});
  auto events = sparqlog::reformulation::pairEvents(s);
  EXPECT_THAT(observationSequence(s, events),
              ElementsAre(ObservationSymbol::Add, ObservationSymbol::SubPredicate,
                          ObservationSymbol::NoTripleChange));
}

// _____________________________________________________________________________
TEST(Train, SmoothingOnly) {
  EXPECT_THAT(smoothedDistribution({0, 0, 0}, 1.0),
              Pointwise(DoubleNear(1e-15), std::vector<double>{1. / 3, 1. / 3, 1. / 3}));
  EXPECT_THAT(smoothedDistribution({0, 0}, 0.0), ElementsAre(0.5, 0.5));
  EXPECT_THAT(smoothedDistribution({3, 1}, 0.0), ElementsAre(0.75, 0.25));
}

TEST(Train, DegenerateEmission) {
  std::vector<LabeledSequence> seqs = {{{kInc, kAdd}, {kInc, kAdd}},
                                       {{kDec, kRemove}}};
  auto m = trainHmm(seqs, 3, 7, 0.0);
  EXPECT_EQ(m.b[kInc][kAdd], 1.0);
  EXPECT_EQ(m.b[kDec][kRemove], 1.0);
  EXPECT_EQ(m.a[kInc][kInc], 1.0);
  EXPECT_THAT(m.pi, ElementsAre(0.5, 0.0, 0.5));
}

TEST(Train, HandComputedTenPairCorpus) {
  const std::vector<LabeledSequence> seqs = {
      {{kInc, kAdd}, {kInc, kAdd}, {kDec, kSubO}},
      {{kSame, kNone}, {kDec, kRemove}, {kDec, kRemove}, {kInc, kAdd}},
      {{kDec, kSubP}, {kSame, kNone}, {kSame, kAdd}}};
  auto m = trainHmm(seqs, 3, 7, 1.0);
  auto near = [](std::vector<double> v) { return Pointwise(DoubleNear(1e-15), v); };
  EXPECT_THAT(m.pi, near({1. / 3, 1. / 3, 1. / 3}));
  EXPECT_THAT(m.a[kDec], near({1. / 3, 1. / 3, 1. / 3}));
  EXPECT_THAT(m.a[kSame], near({2. / 5, 2. / 5, 1. / 5}));
  EXPECT_THAT(m.a[kInc], near({2. / 5, 1. / 5, 2. / 5}));
  EXPECT_THAT(m.b[kDec], near({1. / 11, 3. / 11, 1. / 11, 2. / 11, 2. / 11,
                               1. / 11, 1. / 11}));
  EXPECT_THAT(m.b[kSame], near({.2, .1, .1, .1, .1, .1, .3}));
  EXPECT_THAT(m.b[kInc], near({.4, .1, .1, .1, .1, .1, .1}));
  EXPECT_EQ(m.alpha, 1.0);
}

TEST(Train, StochasticAndPositiveWithSmoothing) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<size_t> h(0, 2), u(0, 6), len(1, 6);
  std::vector<LabeledSequence> seqs(12);
  for (auto& s : seqs) {
    for (size_t i = len(rng); i > 0; --i) s.emplace_back(h(rng), u(rng));
  }
  auto m = trainHmm(seqs, 3, 7, 0.5);
  auto check = [](const std::vector<double>& row) {
    double total = 0.0;
    for (double p : row) {
      EXPECT_GT(p, 0.0);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  };
  check(m.pi);
  for (const auto& row : m.a) check(row);
  for (const auto& row : m.b) check(row);
}

TEST(Train, ErrorsOnEmptyInput) {
  EXPECT_THROW(trainHmm({}, 3, 7, 1.0), IntentError);
  EXPECT_THROW(trainHmm({{}}, 3, 7, 1.0), IntentError);
  EXPECT_THROW(trainHmm({{{5, 0}}}, 3, 7, 1.0), IntentError);
  EXPECT_THROW(trainHmm({{{0, 0}}}, 3, 7, -1.0), IntentError);
}

TEST(Train, MarkovCrossCheckWithoutSmoothing) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-1, 2);
  std::uniform_int_distribution<size_t> sym(0, 6);
  std::vector<std::vector<std::optional<RcState>>> states;
  std::vector<LabeledSequence> seqs;
  for (int s = 0; s < 30; ++s) {
    std::vector<std::optional<RcState>> seq;
    std::vector<ObservationSymbol> obs;
    for (int i = 0; i < 10; ++i) {
      int x = d(rng);
      if (x == 2) seq.emplace_back();
      else seq.emplace_back(static_cast<RcState>(x + 1));
      obs.push_back(kAllSymbols[sym(rng)]);
    }
    for (auto& r : labeledRuns(seq, obs)) seqs.push_back(r);
    states.push_back(seq);
  }
  auto markov = markovMatrix(states);
  auto model = trainHmm(seqs, 3, 7, 0.0);
  for (size_t i = 0; i < 3; ++i) {
    ASSERT_TRUE(markov.probabilities[i]);
    for (size_t j = 0; j < 3; ++j) EXPECT_EQ(model.a[i][j], (*markov.probabilities[i])[j]);
  }
}

TEST(Train, IntentModelFromSessions) {
  auto s = makeSession("x",
                       {"SELECT * WHERE { ?s <p> ?o }",
                        "SELECT * WHERE { ?s <p> ?o . ?o <q> ?z }",
                        "SELECT * WHERE { ?s <p> ?o . ?o <r> ?z }",
                        "SELECT * WHERE { ?s <p> ?o . ?o <r> ?z } LIMIT 5"},
                       sizes({5, 9, 9, 2}));
  auto m = trainIntentModel({s}, sparqlog::reformulation::pairEvents(s), 0.0);
  EXPECT_THAT(m.pi, ElementsAre(0.0, 0.0, 1.0));
  EXPECT_EQ(m.a[kInc][kSame], 1.0);
  EXPECT_EQ(m.a[kSame][kDec], 1.0);
  EXPECT_EQ(m.b[kInc][kAdd], 1.0);
  EXPECT_EQ(m.b[kSame][kSubP], 1.0);
  EXPECT_EQ(m.b[kDec][kNone], 1.0);
}

// _____________________________________________________________________________
TEST(Forward, UniformFactorizes) {
  EXPECT_NEAR(forward(uniformModel(3, 2), {0, 1}), 0.25, 1e-15);
}

TEST(Forward, BaseCase) {
  std::mt19937_64 rng(5);
  auto m = sparqlog::testing::randomHmm(rng, 3, 4);
  double expected = 0.0;
  for (size_t h = 0; h < 3; ++h) expected += m.pi[h] * m.b[h][2];
  EXPECT_NEAR(forward(m, {2}), expected, 1e-15);
}

TEST(Forward, MatchesEnumeration) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<size_t> len(1, 5);
  for (int c = 0; c < 30; ++c) {
    auto m = sparqlog::testing::randomHmm(rng, 3, 7);
    std::vector<size_t> os(len(rng));
    std::uniform_int_distribution<size_t> sym(0, 6);
    for (auto& u : os) u = sym(rng);
    EXPECT_LT(relErr(forward(m, os), sparqlog::testing::enumeratedForward(m, os)), 1e-9);
  }
}

TEST(Forward, LongSequencesDoNotUnderflow) {
  std::mt19937_64 rng(1);
  auto m = sparqlog::testing::randomHmm(rng, 3, 7);
  std::vector<size_t> os(2000, 3);
  double lp = logForward(m, os);
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_LT(lp, -1000.0);
}

TEST(Forward, Errors) {
  auto m = uniformModel(3, 7);
  EXPECT_THROW(forward(m, {}), IntentError);
  EXPECT_THROW(forward(m, {7}), IntentError);
  EXPECT_THROW(decode(m, {0, 9}), IntentError);
  EXPECT_THROW(suggest(m, {9}), IntentError);
}

TEST(Forward, ExtensionLaws) {
  std::mt19937_64 rng(9);
  auto m = sparqlog::testing::randomHmm(rng, 3, 7);
  std::vector<size_t> os = {1, 4, 4};
  double p = forward(m, os);
  double total = 0.0;
  for (size_t u = 0; u < 7; ++u) {
    auto ext = os;
    ext.push_back(u);
    double q = forward(m, ext);
    EXPECT_LE(q, p);
    total += q;
  }
  EXPECT_NEAR(total, p, 1e-9 * p);
}

// _____________________________________________________________________________
TEST(Decode, BijectionMirrorsObservations) {
  HmmModel m = uniformModel(3, 3);
  m.b = {{1, 0, 0}, {0, 0, 1}, {0, 1, 0}};
  EXPECT_THAT(decode(m, {0, 1, 2, 2, 0}).states, ElementsAre(0, 2, 1, 1, 0));
}

TEST(Decode, MatchesEnumeratedMaximum) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<size_t> len(1, 5), sym(0, 6);
  for (int c = 0; c < 30; ++c) {
    auto m = sparqlog::testing::randomHmm(rng, 3, 7);
    std::vector<size_t> os(len(rng));
    for (auto& u : os) u = sym(rng);
    auto path = decode(m, os);
    double best = sparqlog::testing::enumeratedViterbi(m, os);
    EXPECT_LT(relErr(std::exp(path.logProbability), best), 1e-12);
    EXPECT_LT(relErr(sparqlog::testing::jointProbability(m, path.states, os), best),
              1e-12);
    EXPECT_LE(path.logProbability, logForward(m, os) + 1e-12);
  }
}

TEST(Decode, TiesGoToLowerIndex) {
  // Every path is equally likely.
  HmmModel m = uniformModel(3, 2);
  std::vector<size_t> os = {0, 1, 1};
  size_t maxima = 0;
  double best = sparqlog::testing::enumeratedViterbi(m, os);
  sparqlog::testing::forEachPath(3, 3, [&](const std::vector<size_t>& p) {
    if (sparqlog::testing::jointProbability(m, p, os) == best) ++maxima;
  });
  EXPECT_EQ(maxima, 27u);
  EXPECT_THAT(decode(m, os).states, ElementsAre(0, 0, 0));

  // Two optimal paths: 1-2 and 2-1 via a symmetric model; 1-2 wins.
  HmmModel s;
  s.pi = {0.0, 0.5, 0.5};
  s.a = {{1, 0, 0}, {0, 0, 1}, {0, 1, 0}};
  s.b = {{1, 0}, {0, 1}, {0, 1}};
  EXPECT_THAT(decode(s, {1, 1}).states, ElementsAre(1, 2));
}

// _____________________________________________________________________________
TEST(Suggest, DeterministicChain) {
  HmmModel m;
  m.pi = {1, 0};
  m.a = {{0, 1}, {1, 0}};
  m.b = {{1, 0, 0}, {0, 0, 1}};
  auto r = suggest(m, {0});
  EXPECT_EQ(r[0].first, 2u);
  EXPECT_NEAR(r[0].second, 1.0, 1e-15);
}

TEST(Suggest, UniformModel) {
  for (const auto& [u, p] : suggest(uniformModel(3, 7), {1, 2})) {
    EXPECT_NEAR(p, 1.0 / 7, 1e-15);
  }
  auto r = suggest(uniformModel(3, 7), {});
  for (size_t i = 0; i < r.size(); ++i) EXPECT_EQ(r[i].first, i);
}

TEST(Suggest, MatchesEnumeration) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<size_t> sym(0, 6);
  for (int c = 0; c < 20; ++c) {
    auto m = sparqlog::testing::randomHmm(rng, 3, 7);
    std::vector<size_t> os(static_cast<size_t>(c % 4));
    for (auto& u : os) u = sym(rng);
    auto expected = sparqlog::testing::enumeratedPredictive(m, os);
    auto got = suggest(m, os);
    double total = 0.0;
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_LT(relErr(got[i].second, expected[got[i].first]), 1e-9);
      if (i > 0) EXPECT_GE(got[i - 1].second, got[i].second);
      total += got[i].second;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Suggest, ImpossibleHistory) {
  HmmModel m;
  m.pi = {1, 0};
  m.a = {{1, 0}, {0, 1}};
  m.b = {{1, 0}, {0, 1}};
  EXPECT_THROW(suggest(m, {1}), IntentError);
}

// _____________________________________________________________________________
TEST(ModelJson, RoundTrip) {
  std::mt19937_64 rng(2);
  auto m = sparqlog::testing::randomHmm(rng, 3, 7);
  m.alpha = 0.5;
  auto text = modelToJson(m);
  EXPECT_NE(text.find("\"schema\": \"sparqlog.hmm/1\""), std::string::npos);
  EXPECT_NE(text.find("\"SubCombined\""), std::string::npos);
  EXPECT_NE(text.find("\"+1\""), std::string::npos);
  EXPECT_EQ(modelFromJson(text), m);
}

TEST(ModelJson, RejectsBadInput) {
  EXPECT_THROW(modelFromJson("not json"), IntentError);
  EXPECT_THROW(modelFromJson("{\"schema\":\"other\"}"), IntentError);
  EXPECT_THROW(modelFromJson("{\"schema\":\"sparqlog.hmm/1\",\"alpha\":1,\"pi\":[1],"
                             "\"A\":[[1]],\"B\":[[1]],\"states\":[],\"symbols\":[]}"),
               IntentError);
}
