#include "seqcert/uncertainty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "seqcert/parallel.hpp"

namespace seqcert {

namespace {

void check_logprob(double lp, std::string_view what) {
  if (!std::isfinite(lp) || lp > 0.0) {
    throw std::invalid_argument(std::string(what) + ": log-probability must be finite and <= 0, got " +
                                std::to_string(lp));
  }
}

// Sums (1 - BLEU)^2 over ordered pairs in ascending order, so the result
// depends only on the multiset of pair scores and not on sample order.
double squared_complement_sum(const std::vector<double>& table, std::size_t n) {
  std::vector<double> terms;
  terms.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 1.0 - table[i * n + j];
      terms.push_back(c * c);
    }
  }
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

double pair_bleu(const TokenSeq& cand, const TokenSeq& ref) {
  if (ref.empty()) return cand.empty() ? 1.0 : 0.0;
  return sentence_bleu(cand, ref).value;
}

}  // namespace

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::BeamScore:
      return "bs";
    case Measure::SequenceProbability:
      return "sp";
    case Measure::BleuVariance:
      return "bleuvar";
  }
  return "?";
}

Measure parse_measure(std::string_view name) {
  std::string lower(name);
  std::ranges::transform(lower, lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "bs") return Measure::BeamScore;
  if (lower == "sp") return Measure::SequenceProbability;
  if (lower == "bleuvar") return Measure::BleuVariance;
  throw std::invalid_argument("unknown measure '" + std::string(name) + "' (expected bs, sp or bleuvar)");
}

double uncertainty_score(const UncertaintyValue& u) {
  return higher_is_more_uncertain(u.measure) ? u.value : -u.value;
}

double display_value(const UncertaintyValue& u) {
  return u.measure == Measure::BleuVariance ? u.value * 100.0 : u.value;
}

MissingFieldError::MissingFieldError(std::string record_id, std::string field)
    : std::invalid_argument("record '" + record_id + "': missing field '" + field + "'"),
      record_id_(std::move(record_id)),
      field_(std::move(field)) {}

UncertaintyValue beam_score(double deterministic_logprob, std::size_t length) {
  check_logprob(deterministic_logprob, "beam_score");
  return {Measure::BeamScore, deterministic_logprob / length_penalty(length, kLengthPenaltyAlpha)};
}

UncertaintyValue sequence_probability(std::span<const double> sample_logprobs, std::size_t length) {
  if (sample_logprobs.empty()) throw std::invalid_argument("sequence_probability: no samples");
  for (double lp : sample_logprobs) check_logprob(lp, "sequence_probability");
  const double peak = *std::ranges::max_element(sample_logprobs);
  double shifted = 0.0;
  for (double lp : sample_logprobs) shifted += std::exp(lp - peak);
  const double lse = peak + std::log(shifted);
  return {Measure::SequenceProbability, lse / length_penalty(length, kLengthPenaltyAlpha)};
}

std::vector<double> pairwise_bleu(std::span<const TokenSeq> samples, unsigned threads) {
  const std::size_t n = samples.size();
  std::vector<double> table(n * n, 1.0);
  detail::parallel_for(n * n, threads, [&](std::size_t k) {
    const std::size_t i = k / n;
    const std::size_t j = k % n;
    if (i != j) table[k] = pair_bleu(samples[i], samples[j]);
  });
  return table;
}

UncertaintyValue bleuvar(std::span<const TokenSeq> samples, unsigned threads) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("bleuvar: need at least 2 samples, got " + std::to_string(n));
  return {Measure::BleuVariance, squared_complement_sum(pairwise_bleu(samples, threads), n)};
}

MedoidChoice medoid_select(std::span<const TokenSeq> samples, unsigned threads) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("medoid_select: empty sample list");
  const auto table = pairwise_bleu(samples, threads);
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double cost = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cost += (1.0 - table[i * n + j]) + (1.0 - table[j * n + i]);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return {best, samples[best]};
}

ScoredSentence score_sample_set(const SampleSet& set, Measure measure) {
  ScoredSentence row;
  row.id = set.id;
  row.reference = set.reference;

  switch (measure) {
    case Measure::BeamScore: {
      if (!set.deterministic) throw MissingFieldError(set.id, "deterministic");
      if (!set.deterministic->logprob) throw MissingFieldError(set.id, "deterministic.logprob");
      row.output = set.deterministic->tokens;
      row.uncertainty = beam_score(*set.deterministic->logprob, row.output.length());
      break;
    }
    case Measure::SequenceProbability: {
      if (!set.deterministic) throw MissingFieldError(set.id, "deterministic");
      if (set.samples.empty()) throw MissingFieldError(set.id, "samples");
      std::vector<double> lps;
      lps.reserve(set.samples.size());
      for (std::size_t k = 0; k < set.samples.size(); ++k) {
        if (!set.samples[k].logprob) {
          throw MissingFieldError(set.id, "samples[" + std::to_string(k) + "].logprob");
        }
        lps.push_back(*set.samples[k].logprob);
      }
      row.output = set.deterministic->tokens;
      row.uncertainty = sequence_probability(lps, row.output.length());
      break;
    }
    case Measure::BleuVariance: {
      if (set.samples.size() < 2) {
        throw std::invalid_argument("record '" + set.id + "': bleuvar needs at least 2 samples, got " +
                                    std::to_string(set.samples.size()));
      }
      std::vector<TokenSeq> seqs;
      seqs.reserve(set.samples.size());
      for (const auto& h : set.samples) seqs.push_back(h.tokens);
      const auto table = pairwise_bleu(seqs);
      // bleuvar and medoid share one BLEU table.
      const std::size_t n = seqs.size();
      std::size_t best = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        double cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          cost += (1.0 - table[i * n + j]) + (1.0 - table[j * n + i]);
        }
        if (cost < best_cost) {
          best_cost = cost;
          best = i;
        }
      }
      row.output = seqs[best];
      row.uncertainty = {Measure::BleuVariance, squared_complement_sum(table, n)};
      break;
    }
  }

  if (row.reference) {
    if (row.reference->empty()) throw std::invalid_argument("record '" + set.id + "': empty reference");
    row.sentence_quality = sentence_bleu(row.output, *row.reference).value;
  }
  return row;
}

std::vector<ScoredSentence> score_all(std::span<const SampleSet> sets, Measure measure, unsigned threads) {
  std::vector<ScoredSentence> rows(sets.size());
  detail::parallel_for(sets.size(), threads, [&](std::size_t i) { rows[i] = score_sample_set(sets[i], measure); });
  return rows;
}

}  // namespace seqcert
