#pragma once

#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqcert/eval_harness.hpp"

// CSV emitters for the report files. Every file has a header row, '.' as the
// decimal separator and LF line endings. Numbers use the shortest
// representation that round-trips.
namespace seqcert::csv {

std::string format_number(double v);

/// RFC 4180 quoting when the field contains a comma, quote or line break.
std::string field(std::string_view text);

/// id,output,uncertainty,quality  (display units; quality blank without a reference)
void write_scores(std::ostream& out, std::span<const ScoredSentence> rows);

/// measure,fraction,metric,value  (value is BLEU x 100)
void write_retention(std::ostream& out, std::span<const RetentionCurve> curves);

/// population,bin_lo,bin_hi,count
void write_histogram(std::ostream& out, const HistogramReport& report);

/// bin,mean_uncertainty,count  (mean blank for empty bins)
void write_length_bins(std::ostream& out, std::span<const LengthBinRow> rows);

/// uncertainty,quality
void write_density(std::ostream& out, std::span<const DensityPair> pairs);

}  // namespace seqcert::csv
