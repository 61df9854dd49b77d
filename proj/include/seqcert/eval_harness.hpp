#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqcert/uncertainty.hpp"

namespace seqcert {

enum class RetentionMetric { CorpusBleu, MeanSentenceBleu };

std::string_view to_string(RetentionMetric m);
/// "corpus" or "mean".
RetentionMetric parse_metric(std::string_view name);

struct RetentionPoint {
  double fraction = 0.0;
  /// BLEU in [0,1].
  double performance = 0.0;
};

struct RetentionCurve {
  /// "bs", "sp", "bleuvar", or a baseline name ("length", "random").
  std::string label;
  RetentionMetric metric = RetentionMetric::CorpusBleu;
  std::vector<RetentionPoint> points;
};

/// {0.05, 0.10, ..., 1.00}.
std::vector<double> default_fractions();

/// Number of rows kept at fraction f of m rows: ceil(f*m), with a 1e-9 slack
/// so that products like 0.3*10 do not round up to the next row.
std::size_t retained_count(double fraction, std::size_t m);

/// Metric over a whole row set. Mean sentence BLEU sums the qualities in
/// ascending order so the result depends only on the multiset of rows.
double dataset_metric(std::span<const ScoredSentence> rows, RetentionMetric metric);

/// Most-confident-first order: BS/SP descending, BLEUVar ascending, ties by
/// id. Throws std::invalid_argument on empty or mixed-measure input.
std::vector<std::size_t> confidence_order(std::span<const ScoredSentence> rows);

/// Performance on the first ceil(f*M) rows of an explicit ordering.
/// Fractions are sorted and deduplicated and 1.0 is appended if missing.
RetentionCurve curve_for_order(std::span<const ScoredSentence> rows, std::span<const std::size_t> order,
                               RetentionMetric metric, std::span<const double> fractions, std::string label);

/// Retention curve under the rows' own uncertainty ordering.
RetentionCurve retention_curve(std::span<const ScoredSentence> rows, RetentionMetric metric,
                               std::span<const double> fractions);

enum class BaselineOrdering { SentenceLength, Random, Uncertainty };

/// Shortest output first (ties by id); seeded shuffle of the id-sorted rows;
/// or the uncertainty ordering.
RetentionCurve baseline_curve(std::span<const ScoredSentence> rows, BaselineOrdering ordering,
                              RetentionMetric metric, std::span<const double> fractions,
                              std::uint64_t seed = 0);

/// Fisher-Yates over [0, n) driven by mt19937_64, with rejection sampling so
/// the permutation is identical across standard libraries.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct HistogramReport {
  std::vector<double> bin_edges;
  std::map<std::string, std::vector<std::size_t>> counts;
};

/// Equal-width bins over [min, max] of all populations jointly. When every
/// value is equal the range is widened to [v, v+1].
HistogramReport histogram(std::span<const std::pair<std::string, double>> values, int bins);

/// AUROC of "is OOD" against the uncertainty value (higher = more
/// uncertain), by rank sums with midranks for ties.
double ood_separation(std::span<const double> in_dist, std::span<const double> ood);

struct LengthBin {
  std::size_t lo = 0;
  /// Inclusive upper bound; nullopt for an open-ended last bin.
  std::optional<std::size_t> hi;
  std::string label() const;
};

/// 1-10, 11-20, 21-30, 31-40, 41-50, 51+.
std::vector<LengthBin> default_length_bins();

struct LengthBinRow {
  LengthBin bin;
  std::size_t count = 0;
  /// Mean display-scaled uncertainty; nullopt for an empty bin.
  std::optional<double> mean_uncertainty;
};

/// Groups rows by output token length. Outputs of length 0 fall into the
/// first bin.
std::vector<LengthBinRow> length_bins(std::span<const ScoredSentence> rows,
                                      std::span<const LengthBin> bins);

struct DensityPair {
  double uncertainty = 0.0;
  double quality = 0.0;
};

/// (display uncertainty, quality x 100) pairs, uncertainty ascending, ties by
/// id. Throws if a row lacks a reference.
std::vector<DensityPair> density_pairs(std::span<const ScoredSentence> rows);

}  // namespace seqcert
