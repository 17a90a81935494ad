#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparqlog/analytics/Metrics.h"
#include "support/Sessions.h"

using namespace sparqlog::analytics;
using sparqlog::sparql::parseQuery;
using sparqlog::testing::makeSession;
using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

namespace {

FeatureVector fv(std::string_view q) { return featureVector(parseQuery(q)); }

}  // namespace

// _____________________________________________________________________________
TEST(FeatureVector, StarQuery) {
  EXPECT_EQ(fv("SELECT ?s WHERE {?s <p> ?o1 . ?s <q> ?o2}"),
            (FeatureVector{2, 1, 1, 0, 1, 0, 0, 2, 2, 2, 1}));
}

TEST(FeatureVector, NoJoins) {
  EXPECT_EQ(fv("ASK {?s <p> ?o}"),
            (FeatureVector{1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1}));
}

TEST(FeatureVector, Deterministic) {
  const char* q = "SELECT * { ?a <p> ?b . ?b <q> ?c OPTIONAL { ?c <r> ?a } }";
  EXPECT_EQ(fv(q), fv(q));
}

TEST(FeatureVector, UnionOfBlocksAndMeanDegree) {
  // ?b: in 1 out 2 (Hybrid, degree 3); ?a: out 2 across blocks (Star).
  auto v = fv(
      "SELECT ?a ?b { ?a <p> ?b . ?b <q> ?c OPTIONAL { ?b <r> ?d . ?a <s> ?e "
      "} }");
  EXPECT_EQ(v, (FeatureVector{4, 2, 2, 0, 1, 1, 0, 3, 2, 2.5, 1}));
}

TEST(FeatureVector, StructureOnly) {
  EXPECT_EQ(fv("SELECT ?s { ?s <p> ?o . ?o <q> <x> }"),
            fv("SELECT ?t { ?t <a> ?u . ?u <b> <y> }"));
}

// _____________________________________________________________________________
TEST(Normalize, SingleQuery) {
  auto out = normalizeSessionVectors({{2, 0, 5, 1}});
  EXPECT_EQ(out[0], (FeatureVector{1, 0, 1, 1}));
}

TEST(Normalize, PerCoordinateMax) {
  auto out = normalizeSessionVectors({{2, 0, 1}, {4, 0, 1}});
  EXPECT_EQ(out[0], (FeatureVector{0.5, 0, 1}));
  EXPECT_EQ(out[1], (FeatureVector{1.0, 0, 1}));
}

TEST(Normalize, OutputInUnitInterval) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0, 10);
  for (int round = 0; round < 200; ++round) {
    std::vector<FeatureVector> vs(1 + rng() % 6, FeatureVector(11));
    for (auto& v : vs) {
      for (auto& x : v) x = rng() % 3 == 0 ? 0.0 : d(rng);
    }
    for (const auto& v : normalizeSessionVectors(vs)) {
      for (double x : v) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
    }
  }
}

// _____________________________________________________________________________
TEST(Cosine, Examples) {
  std::vector<double> v{3, 1, 4};
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
  EXPECT_NEAR(cosine({1, 0, 1}, {0, 1, 1}), 0.5, 1e-12);
  EXPECT_EQ(cosine({1, 0, 0}, {0, 1, 1}), 0.0);
  EXPECT_THROW(cosine({0, 0}, {1, 1}), MetricError);
  try {
    cosine({0, 0}, {1, 1});
  } catch (const MetricError& e) {
    EXPECT_STREQ(e.what(), "undefined cosine");
  }
}

TEST(Kl, Examples) {
  std::vector<double> v{0.2, 0.5, 0.3};
  EXPECT_EQ(klDivergence(v, v), 0.0);
  EXPECT_NEAR(klDivergence({1, 1}, {1, 2}), -0.6931471805599453, 1e-9);
  EXPECT_NEAR(klDivergence({1, 2}, {1, 1}), 0.6931471805599453 * 2, 1e-9);
  // Only coordinates nonzero in both count.
  EXPECT_NEAR(klDivergence({1, 0, 2}, {2, 5, 0}), std::log(0.5), 1e-12);
  try {
    klDivergence({1, 0}, {0, 1});
    FAIL();
  } catch (const MetricError& e) {
    EXPECT_STREQ(e.what(), "empty support");
  }
}

// _____________________________________________________________________________
TEST(TermVector, Incidence) {
  Vocabulary vocab({"<a>", "<b>", "<c>"});
  EXPECT_EQ(termVector(parseQuery("ASK { <a> <b> 1 }"), vocab),
            (std::vector<double>{1, 1, 0}));
}

TEST(TermVector, EqualTermSetsGiveEqualVectors) {
  auto q1 = parseQuery("SELECT ?s { ?s <p> ?o }");
  auto q2 = parseQuery("SELECT ?s { ?o <p> ?s FILTER(?s != ?o) }");
  Vocabulary vocab = Vocabulary::fromQueries({&q1, &q2});
  EXPECT_EQ(termVector(q1, vocab), termVector(q2, vocab));
}

TEST(TermVector, EmptyBodyIsUnusableForCosine) {
  auto q = parseQuery("ASK {}");
  Vocabulary vocab({"<a>"});
  auto v = termVector(q, vocab);
  EXPECT_EQ(v, (std::vector<double>{0}));
  EXPECT_FALSE(tryCosine(v, v).has_value());
}

// _____________________________________________________________________________
TEST(GedEvolvement, IdenticalQueriesGiveZeroSeries) {
  const std::string q = "SELECT * { ?s <p> ?o }";
  auto r = gedEvolvement({makeSession("a", {q, q, q}), makeSession("b", {q, q})});
  EXPECT_THAT(r.contiguous.mean, ElementsAre(0.0, 0.0));
  EXPECT_THAT(r.fromInitial.mean, ElementsAre(0.0, 0.0));
}

TEST(GedEvolvement, PositionBookkeeping) {
  auto r = gedEvolvement({makeSession(
      "a", {"ASK { ?s <p> ?o }", "ASK { ?s <q> ?o }", "ASK { ?s <r> ?o }"})});
  EXPECT_EQ(r.contiguous.mean.size(), 2u);
  EXPECT_EQ(r.fromInitial.mean.size(), 2u);
  EXPECT_THAT(r.contiguous.support, ElementsAre(1u, 1u));
}

TEST(GedEvolvement, TwoSessionFixture) {
  // Per-pair GEDs: a: (0.25, 1/2 * (0 + 1)), from q1: (0.25, (0.25 + 1) / 2)
  //                b: (0.25)
  auto r = gedEvolvement(
      {makeSession("a", {"SELECT * { ?s <p1> ?o }", "SELECT * { ?s <p2> ?o }",
                         "SELECT * { ?s <p2> ?o OPTIONAL { ?o <q> ?z } }"}),
       makeSession("b", {"SELECT * { ?s <p> ?o }", "SELECT * { ?x <p> ?o }"})});
  EXPECT_THAT(r.contiguous.mean, Pointwise(DoubleNear(1e-12), {0.25, 0.5}));
  EXPECT_THAT(r.contiguous.variance, Pointwise(DoubleNear(1e-12), {0.0, 0.0}));
  EXPECT_THAT(r.contiguous.support, ElementsAre(2u, 1u));
  EXPECT_THAT(r.fromInitial.mean, Pointwise(DoubleNear(1e-12), {0.25, 0.625}));
  EXPECT_EQ(r.sessionsUsed, 2u);
}

TEST(GedEvolvement, VarianceIsPopulationVariance) {
  auto r = gedEvolvement(
      {makeSession("a", {"ASK { ?s <p> ?o }", "ASK { ?s <p> ?o }"}),
       makeSession("b", {"ASK { ?s <p> ?o }", "ASK { ?s <q> ?o }"})});
  EXPECT_NEAR(r.contiguous.mean[0], 0.125, 1e-12);
  EXPECT_NEAR(r.contiguous.variance[0], 0.125 * 0.125, 1e-12);
}

TEST(GedEvolvement, SamplingIsSeeded) {
  std::vector<sparqlog::corpus::Session> sessions;
  for (int i = 0; i < 40; ++i) {
    sessions.push_back(makeSession(std::to_string(i),
                                   {"ASK { ?s <p> ?o }", "ASK { ?s <q> ?o }"}));
  }
  GedEvolvementOptions opt;
  opt.sampleFraction = 0.5;
  opt.seed = 9;
  auto a = gedEvolvement(sessions, opt);
  auto b = gedEvolvement(sessions, opt);
  EXPECT_EQ(a.sessionsUsed, b.sessionsUsed);
  EXPECT_GT(a.sessionsUsed, 5u);
  EXPECT_LT(a.sessionsUsed, 35u);
}

// _____________________________________________________________________________
TEST(SimilarityMatrix, Diagonals) {
  std::vector<sparqlog::corpus::Session> sessions{
      makeSession("a", {"SELECT ?s { ?s <p> ?o }", "SELECT ?s { ?s <p> ?o . "
                                                   "?o <q> <x> }"}),
      makeSession("b", {"ASK { ?s <p> ?o }"})};
  for (auto metric : {SimilarityMetric::CosineFeature,
                      SimilarityMetric::CosineTerm}) {
    auto m = similarityMatrix(sessions, metric);
    for (size_t i = 0; i < m.size; ++i) EXPECT_NEAR(m.at(i, i), 1.0, 1e-12);
  }
  for (auto metric : {SimilarityMetric::KlFeature, SimilarityMetric::KlTerm}) {
    auto m = similarityMatrix(sessions, metric);
    for (size_t i = 0; i < m.size; ++i) EXPECT_NEAR(m.at(i, i), 0.0, 1e-12);
  }
}

TEST(SimilarityMatrix, HandComputedCells) {
  std::vector<sparqlog::corpus::Session> sessions{
      makeSession("a", {"ASK { ?s <p> ?o }",
                        "SELECT ?s { ?s <p> ?o . ?s <q> ?z }"}),
      makeSession("b", {"ASK { ?s <p> ?o }"})};
  // Normalized: q1 = [.5,1,0,0,0,0,0,0,0,0,1], q2 = [1,1,1,0,1,0,0,1,1,1,1].
  double expected = 2.5 / (std::sqrt(2.25) * std::sqrt(8.0));
  auto m = similarityMatrix(sessions, SimilarityMetric::CosineFeature);
  ASSERT_EQ(m.size, 2u);
  EXPECT_NEAR(m.at(0, 1), expected, 1e-12);
  EXPECT_NEAR(m.at(1, 0), expected, 1e-12);
  EXPECT_EQ(m.supportAt(0, 0), 2u);
  EXPECT_EQ(m.supportAt(0, 1), 1u);

  // KL of q1 against q2 over the shared support {0, 1, 10}:
  // .5 ln .5 + 0 + 0; reversed: 1 ln 2.
  auto kl = similarityMatrix(sessions, SimilarityMetric::KlFeature);
  EXPECT_NEAR(kl.at(0, 1), 0.5 * std::log(0.5), 1e-12);
  EXPECT_NEAR(kl.at(1, 0), std::log(2.0), 1e-12);
}

TEST(SimilarityMatrix, SupportFollowsLengthHistogram) {
  std::vector<sparqlog::corpus::Session> sessions;
  std::vector<size_t> lengths{1, 2, 2, 3, 5};
  for (size_t n : lengths) {
    std::vector<std::string> qs;
    for (size_t i = 0; i < n; ++i) {
      qs.push_back("SELECT ?s { ?s <p" + std::to_string(i) + "> ?o }");
    }
    sessions.push_back(makeSession(std::to_string(n) + "-" +
                                       std::to_string(sessions.size()),
                                   qs));
  }
  auto m = similarityMatrix(sessions, SimilarityMetric::CosineFeature);
  ASSERT_EQ(m.size, 5u);
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) {
      size_t expected = std::count_if(lengths.begin(), lengths.end(),
                                      [&](size_t n) { return n > std::max(i, j); });
      EXPECT_EQ(m.supportAt(i, j), expected);
    }
  }
  auto capped = similarityMatrix(sessions, SimilarityMetric::CosineFeature,
                                 {.size = 3});
  EXPECT_EQ(capped.size, 3u);
  EXPECT_EQ(capped.supportAt(2, 2), 2u);
}

TEST(SimilarityMatrix, UndefinedValuesAreSkipped) {
  std::vector<sparqlog::corpus::Session> sessions{
      makeSession("a", {"ASK {}", "ASK { <a> <b> <c> }"}),
      makeSession("b", {"ASK { <a> <b> <d> }", "ASK { <a> <b> <c> }"})};
  auto m = similarityMatrix(sessions, SimilarityMetric::CosineTerm);
  EXPECT_EQ(m.supportAt(0, 0), 1u);
  EXPECT_EQ(m.supportAt(1, 1), 2u);
  EXPECT_EQ(m.supportAt(0, 1), 1u);
  EXPECT_NEAR(m.at(0, 1), 2.0 / 3.0, 1e-12);
}

TEST(LengthPercentile, NearestRank) {
  std::vector<sparqlog::corpus::Session> sessions;
  for (size_t n = 1; n <= 20; ++n) {
    sessions.push_back(makeSession(std::to_string(n),
                                   std::vector<std::string>(n, "ASK {}")));
  }
  EXPECT_EQ(lengthPercentile(sessions, 95), 19u);
  EXPECT_EQ(lengthPercentile(sessions, 100), 20u);
  EXPECT_EQ(lengthPercentile({}, 95), 0u);
}
