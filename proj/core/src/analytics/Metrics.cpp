#include "sparqlog/analytics/Metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sparqlog/hypergraph/Hypergraph.h"
#include "sparqlog/util/Parallel.h"

namespace sparqlog::analytics {

using hypergraph::JoinKind;
using sparql::QueryAst;

FeatureVector featureVector(const QueryAst& ast) {
  FeatureVector v(kFeatureCount, 0.0);
  size_t triples = 0;
  size_t bgps = 0;
  sparql::forEachBlock(
      ast, [&](const sparql::OperatorBlock& b, const sparql::BlockPath&) {
        triples += b.triplePatterns.size();
        bgps += !b.triplePatterns.empty();
      });
  v[0] = static_cast<double>(triples);
  v[1] = static_cast<double>(bgps);
  v[2] = static_cast<double>(ast.projectionVars.size());
  auto joins = hypergraph::joinVertices(hypergraph::unionHypergraph(ast));
  if (!joins.empty()) {
    uint32_t maxDegree = 0;
    uint32_t minDegree = std::numeric_limits<uint32_t>::max();
    double sum = 0;
    for (const auto& j : joins) {
      switch (j.kind) {
        case JoinKind::Sink: v[3] += 1; break;
        case JoinKind::Star: v[4] += 1; break;
        case JoinKind::Hybrid: v[5] += 1; break;
        case JoinKind::Path: v[6] += 1; break;
      }
      maxDegree = std::max(maxDegree, j.degree());
      minDegree = std::min(minDegree, j.degree());
      sum += j.degree();
    }
    v[7] = maxDegree;
    v[8] = minDegree;
    v[9] = sum / static_cast<double>(joins.size());
  }
  v[10] = 1.0;
  return v;
}

std::vector<FeatureVector> normalizeSessionVectors(
    const std::vector<FeatureVector>& vectors) {
  if (vectors.empty()) return {};
  size_t dim = vectors[0].size();
  std::vector<double> max(dim, 0.0);
  for (const auto& v : vectors) {
    for (size_t k = 0; k < dim; ++k) max[k] = std::max(max[k], v[k]);
  }
  std::vector<FeatureVector> out = vectors;
  for (auto& v : out) {
    for (size_t k = 0; k < dim; ++k) v[k] = max[k] == 0 ? 0.0 : v[k] / max[k];
  }
  return out;
}

std::optional<double> tryCosine(const std::vector<double>& v1,
                                const std::vector<double>& v2) {
  double dot = 0, n1 = 0, n2 = 0;
  for (size_t k = 0; k < v1.size(); ++k) {
    dot += v1[k] * v2[k];
    n1 += v1[k] * v1[k];
    n2 += v2[k] * v2[k];
  }
  if (n1 == 0 || n2 == 0) return std::nullopt;
  return dot / (std::sqrt(n1) * std::sqrt(n2));
}

double cosine(const std::vector<double>& v1, const std::vector<double>& v2) {
  if (v1.size() != v2.size()) throw MetricError("vector length mismatch");
  auto r = tryCosine(v1, v2);
  if (!r) throw MetricError("undefined cosine");
  return *r;
}

std::optional<double> tryKlDivergence(const std::vector<double>& v1,
                                      const std::vector<double>& v2) {
  double sum = 0;
  bool any = false;
  for (size_t k = 0; k < v1.size(); ++k) {
    if (v1[k] == 0 || v2[k] == 0) continue;
    any = true;
    sum += v1[k] * std::log(v1[k] / v2[k]);
  }
  if (!any) return std::nullopt;
  return sum;
}

double klDivergence(const std::vector<double>& v1,
                    const std::vector<double>& v2) {
  if (v1.size() != v2.size()) throw MetricError("vector length mismatch");
  auto r = tryKlDivergence(v1, v2);
  if (!r) throw MetricError("empty support");
  return *r;
}

Vocabulary::Vocabulary(std::vector<std::string> terms)
    : terms_(std::move(terms)) {
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
}

Vocabulary Vocabulary::fromQueries(const std::vector<const QueryAst*>& queries) {
  std::vector<std::string> terms;
  for (const QueryAst* q : queries) {
    for (const auto& t : q->termSet) terms.push_back(t.value);
  }
  return Vocabulary(std::move(terms));
}

int64_t Vocabulary::indexOf(const std::string& term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
  if (it == terms_.end() || *it != term) return -1;
  return it - terms_.begin();
}

std::vector<double> termVector(const QueryAst& ast,
                               const Vocabulary& vocabulary) {
  std::vector<double> v(vocabulary.size(), 0.0);
  for (const auto& t : ast.termSet) {
    int64_t i = vocabulary.indexOf(t.value);
    if (i >= 0) v[i] = 1.0;
  }
  return v;
}

namespace {

bool fullyParsed(const corpus::Session& s) {
  return std::all_of(s.queries.begin(), s.queries.end(),
                     [](const corpus::SessionQuery& q) { return q.ast; });
}

PositionalSeries summarize(const std::vector<std::vector<double>>& perSession) {
  PositionalSeries out;
  size_t len = 0;
  for (const auto& s : perSession) len = std::max(len, s.size());
  out.mean.assign(len, 0.0);
  out.variance.assign(len, 0.0);
  out.support.assign(len, 0);
  for (const auto& s : perSession) {
    for (size_t i = 0; i < s.size(); ++i) {
      out.mean[i] += s[i];
      ++out.support[i];
    }
  }
  for (size_t i = 0; i < len; ++i) out.mean[i] /= out.support[i];
  for (const auto& s : perSession) {
    for (size_t i = 0; i < s.size(); ++i) {
      double d = s[i] - out.mean[i];
      out.variance[i] += d * d;
    }
  }
  for (size_t i = 0; i < len; ++i) out.variance[i] /= out.support[i];
  return out;
}

}  // namespace

GedEvolvement gedEvolvement(const std::vector<corpus::Session>& sessions,
                            const GedEvolvementOptions& options) {
  std::vector<const corpus::Session*> chosen;
  std::mt19937_64 rng(options.seed);
  std::bernoulli_distribution keep(std::clamp(options.sampleFraction, 0.0, 1.0));
  for (const auto& s : sessions) {
    if (s.size() < 2 || !fullyParsed(s)) continue;
    if (options.sampleFraction < 1.0 && !keep(rng)) continue;
    chosen.push_back(&s);
  }
  std::vector<std::vector<double>> contiguous(chosen.size());
  std::vector<std::vector<double>> initial(chosen.size());
  std::vector<size_t> approximate(chosen.size(), 0);
  util::parallelFor(chosen.size(), options.workers, [&](size_t k) {
    const auto& q = chosen[k]->queries;
    for (size_t i = 0; i + 1 < q.size(); ++i) {
      auto c = hypergraph::queryGed(*q[i].ast, *q[i + 1].ast, options.ged);
      contiguous[k].push_back(c.value);
      approximate[k] += !c.exact;
      if (i == 0) {
        initial[k].push_back(c.value);
      } else {
        auto a = hypergraph::queryGed(*q[0].ast, *q[i + 1].ast, options.ged);
        initial[k].push_back(a.value);
        approximate[k] += !a.exact;
      }
    }
  });
  GedEvolvement out;
  out.contiguous = summarize(contiguous);
  out.fromInitial = summarize(initial);
  out.sessionsUsed = chosen.size();
  for (size_t a : approximate) out.approximatePairs += a;
  return out;
}

std::string_view toString(SimilarityMetric metric) {
  switch (metric) {
    case SimilarityMetric::CosineFeature: return "cosine_feature";
    case SimilarityMetric::KlFeature: return "kl_feature";
    case SimilarityMetric::CosineTerm: return "cosine_term";
    case SimilarityMetric::KlTerm: return "kl_term";
  }
  return "?";
}

size_t lengthPercentile(const std::vector<corpus::Session>& sessions,
                        double percentile) {
  if (sessions.empty()) return 0;
  std::vector<size_t> lengths;
  for (const auto& s : sessions) lengths.push_back(s.size());
  std::sort(lengths.begin(), lengths.end());
  double rank = std::ceil(percentile / 100.0 * lengths.size());
  size_t idx = rank < 1 ? 0 : static_cast<size_t>(rank) - 1;
  return std::max<size_t>(1, lengths[std::min(idx, lengths.size() - 1)]);
}

SessionMatrix similarityMatrix(const std::vector<corpus::Session>& sessions,
                               SimilarityMetric metric,
                               const SimilarityOptions& options) {
  bool termBased = metric == SimilarityMetric::CosineTerm ||
                   metric == SimilarityMetric::KlTerm;
  bool kl = metric == SimilarityMetric::KlFeature ||
            metric == SimilarityMetric::KlTerm;

  std::vector<const corpus::Session*> usable;
  size_t longest = 0;
  for (const auto& s : sessions) {
    if (s.queries.empty() || !fullyParsed(s)) continue;
    usable.push_back(&s);
    longest = std::max(longest, s.size());
  }
  SessionMatrix m;
  m.size = options.size == 0 ? longest : options.size;
  m.mean.assign(m.size * m.size, 0.0);
  m.support.assign(m.size * m.size, 0);

  std::map<std::string, Vocabulary> vocabularies;
  if (termBased) {
    std::map<std::string, std::vector<const QueryAst*>> byDataset;
    for (const auto* s : usable) {
      for (const auto& q : s->queries) byDataset[s->datasetId].push_back(q.ast.get());
    }
    for (const auto& [d, qs] : byDataset) {
      vocabularies.emplace(d, Vocabulary::fromQueries(qs));
    }
  }

  // Per-session cell values; NaN marks an undefined metric.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> cells(usable.size());
  util::parallelFor(usable.size(), options.workers, [&](size_t k) {
    const auto& s = *usable[k];
    std::vector<std::vector<double>> vs;
    if (termBased) {
      const Vocabulary& vocab = vocabularies.at(s.datasetId);
      for (const auto& q : s.queries) {
        auto v = termVector(*q.ast, vocab);
        if (kl) {
          double total = 0;
          for (double x : v) total += x;
          if (total > 0) {
            for (double& x : v) x /= total;
          }
        }
        vs.push_back(std::move(v));
      }
    } else {
      for (const auto& q : s.queries) vs.push_back(featureVector(*q.ast));
      vs = normalizeSessionVectors(vs);
    }
    size_t n = std::min(vs.size(), m.size);
    auto& out = cells[k];
    out.assign(n * n, nan);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        auto r = kl ? tryKlDivergence(vs[i], vs[j]) : tryCosine(vs[i], vs[j]);
        if (r) out[i * n + j] = *r;
      }
    }
  });
  for (const auto& c : cells) {
    size_t n = static_cast<size_t>(std::sqrt(static_cast<double>(c.size())) + 0.5);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        double x = c[i * n + j];
        if (std::isnan(x)) continue;
        m.mean[i * m.size + j] += x;
        ++m.support[i * m.size + j];
      }
    }
  }
  for (size_t i = 0; i < m.mean.size(); ++i) {
    m.mean[i] = m.support[i] == 0 ? nan : m.mean[i] / m.support[i];
  }
  return m;
}

}  // namespace sparqlog::analytics
