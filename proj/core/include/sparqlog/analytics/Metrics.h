#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparqlog/corpus/Types.h"
#include "sparqlog/hypergraph/Ged.h"
#include "sparqlog/sparql/QueryAst.h"

namespace sparqlog::analytics {

// Thrown when a similarity is not defined for its inputs.
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Structural features of a query, with a constant 1 appended:
// triple patterns, BGPs, projected variables, sink / star / hybrid / path
// join vertices, max / min / mean join degree, 1.
inline constexpr size_t kFeatureCount = 11;
using FeatureVector = std::vector<double>;

FeatureVector featureVector(const sparql::QueryAst& ast);

// Divides every coordinate by its maximum over the session; 0/0 is 0.
std::vector<FeatureVector> normalizeSessionVectors(
    const std::vector<FeatureVector>& vectors);

// Cosine similarity. Throws MetricError("undefined cosine") on a zero vector.
double cosine(const std::vector<double>& v1, const std::vector<double>& v2);
std::optional<double> tryCosine(const std::vector<double>& v1,
                                const std::vector<double>& v2);

// Sum of v1(k) * ln(v1(k) / v2(k)) over coordinates where both are nonzero.
// Throws MetricError("empty support") if there is no such coordinate.
double klDivergence(const std::vector<double>& v1,
                    const std::vector<double>& v2);
std::optional<double> tryKlDivergence(const std::vector<double>& v1,
                                      const std::vector<double>& v2);

// Sorted term vocabulary of a dataset (IRIs, variables and blank nodes).
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);
  static Vocabulary fromQueries(
      const std::vector<const sparql::QueryAst*>& queries);

  size_t size() const { return terms_.size(); }
  // -1 if the term is unknown.
  int64_t indexOf(const std::string& term) const;
  const std::vector<std::string>& terms() const { return terms_; }

 private:
  std::vector<std::string> terms_;
};

// Binary incidence of the query's terms over the vocabulary.
std::vector<double> termVector(const sparql::QueryAst& ast,
                               const Vocabulary& vocabulary);

// Per-position mean and population variance of one series.
struct PositionalSeries {
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<size_t> support;
};

struct GedEvolvement {
  // Point i compares (q_{i+1}, q_{i+2}) (0-based i).
  PositionalSeries contiguous;
  // Point i compares (q_1, q_{i+2}).
  PositionalSeries fromInitial;
  size_t sessionsUsed = 0;
  size_t approximatePairs = 0;
};

struct GedEvolvementOptions {
  hypergraph::GedOptions ged;
  // Fraction of eligible sessions to include; sampling is seeded.
  double sampleFraction = 1.0;
  uint64_t seed = 1;
  size_t workers = 0;
};

GedEvolvement gedEvolvement(const std::vector<corpus::Session>& sessions,
                            const GedEvolvementOptions& options = {});

enum class SimilarityMetric : uint8_t {
  CosineFeature,
  KlFeature,
  CosineTerm,
  KlTerm
};

std::string_view toString(SimilarityMetric metric);

// Position-by-position mean of a metric over sessions. Cells without any
// defined value have support 0 and a NaN mean.
struct SessionMatrix {
  size_t size = 0;
  std::vector<double> mean;     // row-major size x size
  std::vector<size_t> support;  // row-major size x size

  double at(size_t i, size_t j) const { return mean[i * size + j]; }
  size_t supportAt(size_t i, size_t j) const { return support[i * size + j]; }
};

// Nearest-rank percentile of session lengths (at least 1 for non-empty
// input, 0 for no sessions).
size_t lengthPercentile(const std::vector<corpus::Session>& sessions,
                        double percentile);

struct SimilarityOptions {
  // Matrix dimension; 0 means the longest session.
  size_t size = 0;
  size_t workers = 0;
};

// Term vectors use one vocabulary per dataset. For KL the term vectors are
// scaled to sum to 1 first.
SessionMatrix similarityMatrix(const std::vector<corpus::Session>& sessions,
                               SimilarityMetric metric,
                               const SimilarityOptions& options = {});

}  // namespace sparqlog::analytics
