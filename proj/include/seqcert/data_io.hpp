#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seqcert/eval_harness.hpp"
#include "seqcert/uncertainty.hpp"

namespace seqcert {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kSmoothingTag = "add-one-orders-2plus";

/// A file that violates its contract. line() is 1-based, 0 when the error is
/// not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& path, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses one JSONL sample record. Throws DataError tagged with `line`.
///
/// Schema (natural-log probabilities):
///   {"id": str, "source": str?, "population": str?, "reference": str?,
///    "samples": [{"tokens": [str] | "text": str, "logprob": num?}, ...],
///    "deterministic": {"tokens": [str] | "text": str, "logprob": num?}?}
SampleSet parse_sample_record(std::string_view json_line, const std::string& path, std::size_t line);

/// One JSON object per line, tokens-array form, keys sorted.
std::string to_json_line(const SampleSet& set);

/// Single-pass reader; holds one line at a time plus the ids seen so far.
class SampleReader {
 public:
  explicit SampleReader(const std::filesystem::path& path);

  /// Next record, or nullopt at end of file. Blank lines are skipped.
  std::optional<SampleSet> next();
  /// Line number of the record last returned.
  std::size_t line() const { return record_line_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::size_t record_line_ = 0;
  std::map<std::string, std::size_t> seen_;
};

std::vector<SampleSet> read_sample_file(const std::filesystem::path& path);

void write_sample_file(const std::filesystem::path& path, std::span<const SampleSet> sets);

struct ValidationReport {
  std::size_t lines = 0;
  std::size_t records = 0;
  std::size_t samples = 0;
  std::size_t with_reference = 0;
  std::size_t with_deterministic = 0;
  /// Records where every sample carries a logprob.
  std::size_t with_sample_logprobs = 0;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
};

/// Checks every line and keeps going past bad ones.
ValidationReport validate_sample_file(const std::filesystem::path& path);

struct CorpusPair {
  std::string source;
  std::string reference;
};

/// Line i of src pairs with line i of ref. Throws DataError on a count
/// mismatch or an empty reference line.
std::vector<CorpusPair> read_parallel_corpus(const std::filesystem::path& src_path,
                                             const std::filesystem::path& ref_path);

struct RunManifest {
  std::string command;
  std::string measure;
  std::size_t samples_per_set = 0;
  std::uint64_t seed = 0;
  std::string smoothing{kSmoothingTag};
  int bleu_max_order = kDefaultMaxOrder;
  std::string tool_version{kToolVersion};
  /// Everything else needed to rerun: input paths, metric, fractions, etc.
  std::map<std::string, std::string> parameters;
};

std::string manifest_json(const RunManifest& manifest);

struct ReportBundle {
  RunManifest manifest;
  std::vector<ScoredSentence> scores;
  std::vector<RetentionCurve> retention;
  std::optional<HistogramReport> histogram;
  std::vector<LengthBinRow> length_bins;
  std::vector<DensityPair> density;
};

namespace report_files {
inline constexpr std::string_view kManifest = "manifest.json";
inline constexpr std::string_view kScores = "scores.csv";
inline constexpr std::string_view kRetention = "retention.csv";
inline constexpr std::string_view kHistogram = "histogram.csv";
inline constexpr std::string_view kLengthBins = "length_bins.csv";
inline constexpr std::string_view kDensity = "density.csv";
}  // namespace report_files

/// Writes one CSV per nonempty part plus manifest.json, overwriting.
/// Returns the manifest path. Throws DataError on I/O failure.
std::filesystem::path write_reports(const ReportBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace seqcert
