#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "seqcert/bleu.hpp"

namespace seqcert {

inline constexpr double kLengthPenaltyAlpha = 0.6;

enum class Measure { BeamScore, SequenceProbability, BleuVariance };

std::string_view to_string(Measure m);
/// Accepts "bs", "sp", "bleuvar" (case-insensitive). Throws std::invalid_argument.
Measure parse_measure(std::string_view name);

/// BS and SP are confidences (higher = more certain); BLEUVar is a spread.
inline bool higher_is_more_uncertain(Measure m) { return m == Measure::BleuVariance; }

struct UncertaintyValue {
  Measure measure = Measure::BleuVariance;
  double value = 0.0;
};

/// Value oriented so that larger always means more uncertain.
double uncertainty_score(const UncertaintyValue& u);

/// Reporting scale: BLEUVar x 100 (so N = 10 spans [0, 9000]), BS/SP unchanged.
double display_value(const UncertaintyValue& u);

/// One decode: tokens and optional natural-log probability (<= 0).
struct Hypothesis {
  TokenSeq tokens;
  std::optional<double> logprob;
};

/// Thrown when a sample set lacks a field the requested measure needs.
class MissingFieldError : public std::invalid_argument {
 public:
  MissingFieldError(std::string record_id, std::string field);
  const std::string& record_id() const { return record_id_; }
  const std::string& field() const { return field_; }

 private:
  std::string record_id_;
  std::string field_;
};

/// One source sentence with N stochastic decodes.
struct SampleSet {
  std::string id;
  std::string source;
  std::vector<Hypothesis> samples;
  std::optional<TokenSeq> reference;
  /// Deterministic (dropout-off) decode; BS and SP report this output.
  std::optional<Hypothesis> deterministic;
  /// Free-form population tag, e.g. "in" / "ood". Empty when unset.
  std::string population;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

inline bool operator==(const Hypothesis& a, const Hypothesis& b) {
  return a.tokens == b.tokens && a.logprob == b.logprob;
}

/// BS = logprob / length_penalty(length, 0.6).
UncertaintyValue beam_score(double deterministic_logprob, std::size_t length);

/// SP = log(sum_i exp(logprob_i)) / length_penalty(length, 0.6), via the
/// max-shifted log-sum-exp. No 1/N factor.
UncertaintyValue sequence_probability(std::span<const double> sample_logprobs, std::size_t length);

/// Row-major N x N table of sentence_bleu(samples[i] as candidate,
/// samples[j] as reference). Diagonal is 1. A pair with exactly one empty
/// side scores 0; two empty decodes agree and score 1.
std::vector<double> pairwise_bleu(std::span<const TokenSeq> samples, unsigned threads = 1);

/// Sum over all N(N-1) ordered pairs of (1 - BLEU(y_i, y_j))^2.
/// Throws std::invalid_argument when N < 2.
UncertaintyValue bleuvar(std::span<const TokenSeq> samples, unsigned threads = 1);

struct MedoidChoice {
  std::size_t index = 0;
  TokenSeq output;
};

/// The sample with the smallest bidirectional BLEU-complement disagreement
/// with the others. Lowest index wins ties.
MedoidChoice medoid_select(std::span<const TokenSeq> samples, unsigned threads = 1);

/// One evaluation row.
struct ScoredSentence {
  std::string id;
  TokenSeq output;
  UncertaintyValue uncertainty;
  std::optional<TokenSeq> reference;
  /// sentence_bleu(output, reference) in [0,1]; present iff reference is.
  std::optional<double> sentence_quality;
};

/// BS/SP attach to the deterministic decode; BLEUVar attaches to the medoid.
/// Throws MissingFieldError when the measure's inputs are absent.
ScoredSentence score_sample_set(const SampleSet& set, Measure measure);

/// Scores every set, preserving input order regardless of thread count.
std::vector<ScoredSentence> score_all(std::span<const SampleSet> sets, Measure measure,
                                      unsigned threads = 1);

}  // namespace seqcert
