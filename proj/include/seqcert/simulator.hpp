#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "seqcert/uncertainty.hpp"

namespace seqcert {

/// Synthetic stochastic decoder. Each sentence has a random reference over
/// a token vocabulary "w0".."w{V-1}"; every sample independently substitutes
/// each reference token with probability noise_rate, drawing the substitute
/// from the same vocabulary pool minus the original token. When any sentence
/// is OOD the vocabulary splits in half: in-distribution sentences use the
/// lower half, OOD sentences the upper half with noise max(noise_rate, 0.6).
struct SimConfig {
  std::size_t vocab_size = 200;
  std::size_t sentence_count = 100;
  std::size_t min_length = 5;
  std::size_t max_length = 30;
  double noise_rate = 0.1;
  std::size_t samples = 10;
  std::uint64_t seed = 0;
  double ood_fraction = 0.0;

  /// Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

inline constexpr double kOodNoiseFloor = 0.6;

/// Number of trailing sentences marked OOD: round(ood_fraction * count).
std::size_t ood_count(const SimConfig& config);

/// Deterministic per (seed, sentence, sample); identical for any thread count.
///
/// Ids are "sim-000000", ...; population is "in" or "ood". The deterministic
/// decode is one more independent corruption of the reference. Every
/// hypothesis carries the pseudo-logprob (uncorrupted tokens - length),
/// which is ordered with the corruption but has no probabilistic meaning.
std::vector<SampleSet> simulate(const SimConfig& config, unsigned threads = 1);

}  // namespace seqcert
