#include "seqcert/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace seqcert::csv {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf.data(), end);
}

std::string field(std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_scores(std::ostream& out, std::span<const ScoredSentence> rows) {
  out << "id,output,uncertainty,quality\n";
  for (const auto& r : rows) {
    out << field(r.id) << ',' << field(detokenize(r.output)) << ',' << format_number(display_value(r.uncertainty))
        << ',';
    if (r.sentence_quality) out << format_number(*r.sentence_quality * 100.0);
    out << '\n';
  }
}

void write_retention(std::ostream& out, std::span<const RetentionCurve> curves) {
  out << "measure,fraction,metric,value\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << field(c.label) << ',' << format_number(p.fraction) << ',' << to_string(c.metric) << ','
          << format_number(p.performance * 100.0) << '\n';
    }
  }
}

void write_histogram(std::ostream& out, const HistogramReport& report) {
  out << "population,bin_lo,bin_hi,count\n";
  for (const auto& [label, counts] : report.counts) {
    for (std::size_t k = 0; k < counts.size(); ++k) {
      out << field(label) << ',' << format_number(report.bin_edges[k]) << ',' << format_number(report.bin_edges[k + 1])
          << ',' << counts[k] << '\n';
    }
  }
}

void write_length_bins(std::ostream& out, std::span<const LengthBinRow> rows) {
  out << "bin,mean_uncertainty,count\n";
  for (const auto& r : rows) {
    out << r.bin.label() << ',';
    if (r.mean_uncertainty) out << format_number(*r.mean_uncertainty);
    out << ',' << r.count << '\n';
  }
}

void write_density(std::ostream& out, std::span<const DensityPair> pairs) {
  out << "uncertainty,quality\n";
  for (const auto& p : pairs) out << format_number(p.uncertainty) << ',' << format_number(p.quality) << '\n';
}

}  // namespace seqcert::csv
