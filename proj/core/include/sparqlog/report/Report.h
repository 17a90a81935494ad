#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sparqlog/analytics/Metrics.h"
#include "sparqlog/corpus/Corpus.h"
#include "sparqlog/intent/Intent.h"
#include "sparqlog/reformulation/Events.h"
#include "sparqlog/report/Table.h"

namespace sparqlog::report {

// Per operator: queries using it, and pairs removing / adding it. Removal and
// addition percentages are relative to the usage count.
Table operatorTable(const std::vector<corpus::Session>& sessions,
                    const std::vector<reformulation::ReformulationEvent>& events);

// Query-form transitions with the number of pairs as denominator.
Table formChangeTable(const std::vector<corpus::Session>& sessions,
                      const std::vector<reformulation::ReformulationEvent>& events);

// Per block kind: triple additions, removals and substitutions against both
// the number of blocks shared by a pair and the number of triple changes;
// per-element substitution counts against the substitutions.
Table tripleTable(const std::vector<corpus::Session>& sessions,
                  const std::vector<reformulation::ReformulationEvent>& events);

// Substitution loci per join kind and position, against the join kind total.
Table locusTable(const std::vector<reformulation::ReformulationEvent>& events);

// FILTER changes, block vs specific substitutions and specific type tags.
Table filterTable(const std::vector<reformulation::ReformulationEvent>& events);

Table sessionLengthHistogram(const std::vector<corpus::Session>& sessions);

Table gedSeriesTable(const analytics::GedEvolvement& evolvement);

Table similarityTable(
    const std::vector<std::pair<analytics::SimilarityMetric, analytics::SessionMatrix>>&
        matrices);

// Counts with row totals; probabilities empty for undefined rows or when
// there is no matrix at all.
Table markovTable(const std::optional<intent::TransitionMatrix>& matrix);
// Rows of probabilities with null for undefined rows.
std::string markovJson(const std::optional<intent::TransitionMatrix>& matrix);

Table hmmParameterTable(const intent::HmmModel& model);

// The nine report artifacts plus the form-change table.
struct ReportBundle {
  Table operatorTable;
  Table tripleTable;
  Table locusTable;
  Table filterTable;
  Table sessionLengthHistogram;
  Table gedSeries;
  Table similarityMatrices;
  Table markovMatrix;
  corpus::FilterReport filterReport;
  Table formChanges;
  // Non-fatal gaps, e.g. too little data for the Markov matrix.
  std::vector<std::string> warnings;

  // (file name, content) of every artifact, in a fixed order.
  std::vector<std::pair<std::string, std::string>> files() const;
};

inline constexpr const char* kArtifactNames[] = {
    "operator_table.csv",     "triple_table.csv",   "locus_table.csv",
    "filter_table.csv",       "session_length_histogram.csv",
    "ged_series.csv",         "similarity_matrices.csv",
    "markov_matrix.csv",      "filter_report.json"};

}  // namespace sparqlog::report
