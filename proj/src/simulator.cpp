#include "seqcert/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "seqcert/parallel.hpp"

namespace seqcert {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, sentence, slot). Slot 0 draws the reference,
// slot 1 the deterministic decode, slot 2+k sample k.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t sentence, std::uint64_t slot) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ sentence);
  h = splitmix64(h ^ slot);
  return std::mt19937_64(h);
}

double unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::uint64_t below(std::mt19937_64& gen, std::uint64_t range) {
  const std::uint64_t threshold = (0 - range) % range;
  std::uint64_t x;
  do {
    x = gen();
  } while (x < threshold);
  return x % range;
}

struct Pool {
  std::size_t first = 0;
  std::size_t size = 0;
};

std::string word(std::size_t index) {
  return "w" + std::to_string(index);
}

Hypothesis corrupt(const std::vector<std::size_t>& reference, Pool pool, double rate, std::mt19937_64& gen) {
  std::vector<std::string> tokens;
  tokens.reserve(reference.size());
  std::size_t kept = 0;
  for (std::size_t ref_tok : reference) {
    if (unit(gen) < rate) {
      // Uniform over the pool minus the original token.
      std::size_t pick = pool.first + below(gen, pool.size - 1);
      if (pick >= ref_tok) ++pick;
      tokens.push_back(word(pick));
    } else {
      tokens.push_back(word(ref_tok));
      ++kept;
    }
  }
  const double logprob = static_cast<double>(kept) - static_cast<double>(reference.size());
  return {TokenSeq(std::move(tokens)), logprob};
}

}  // namespace

void SimConfig::validate() const {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw std::invalid_argument("noise_rate must be in [0,1]");
  if (!(ood_fraction >= 0.0 && ood_fraction <= 1.0)) throw std::invalid_argument("ood_fraction must be in [0,1]");
  if (samples < 2) throw std::invalid_argument("samples (N) must be >= 2");
  if (min_length < 1) throw std::invalid_argument("min_length must be >= 1");
  if (max_length < min_length) throw std::invalid_argument("max_length must be >= min_length");
  if (vocab_size < 1) throw std::invalid_argument("vocab_size must be >= 1");
  const bool split = ood_count(*this) > 0;
  if (split && vocab_size < 4) throw std::invalid_argument("vocab_size must be >= 4 when OOD sentences are present");
  if (!split && noise_rate > 0.0 && vocab_size < 2) {
    throw std::invalid_argument("vocab_size must be >= 2 when noise_rate > 0");
  }
}

std::size_t ood_count(const SimConfig& config) {
  return static_cast<std::size_t>(std::llround(config.ood_fraction * static_cast<double>(config.sentence_count)));
}

std::vector<SampleSet> simulate(const SimConfig& config, unsigned threads) {
  config.validate();
  const std::size_t n_ood = ood_count(config);
  const std::size_t first_ood = config.sentence_count - n_ood;
  const bool split = n_ood > 0;
  const Pool full{0, config.vocab_size};
  const Pool lower{0, config.vocab_size / 2};
  const Pool upper{config.vocab_size / 2, config.vocab_size - config.vocab_size / 2};

  std::vector<SampleSet> out(config.sentence_count);
  detail::parallel_for(config.sentence_count, threads, [&](std::size_t i) {
    const bool is_ood = i >= first_ood;
    const Pool pool = !split ? full : (is_ood ? upper : lower);
    const double rate = is_ood ? std::max(config.noise_rate, kOodNoiseFloor) : config.noise_rate;

    auto ref_gen = stream(config.seed, i, 0);
    const std::size_t span = config.max_length - config.min_length + 1;
    const std::size_t length = config.min_length + below(ref_gen, span);
    std::vector<std::size_t> reference(length);
    std::vector<std::string> ref_words;
    ref_words.reserve(length);
    for (auto& tok : reference) {
      tok = pool.first + below(ref_gen, pool.size);
      ref_words.push_back(word(tok));
    }

    SampleSet& set = out[i];
    char id[32];
    std::snprintf(id, sizeof id, "sim-%06zu", i);
    set.id = id;
    set.population = is_ood ? "ood" : "in";
    set.reference = TokenSeq(ref_words);
    set.source = detokenize(*set.reference);

    auto det_gen = stream(config.seed, i, 1);
    set.deterministic = corrupt(reference, pool, rate, det_gen);
    set.samples.reserve(config.samples);
    for (std::size_t k = 0; k < config.samples; ++k) {
      auto gen = stream(config.seed, i, 2 + k);
      set.samples.push_back(corrupt(reference, pool, rate, gen));
    }
  });
  return out;
}

}  // namespace seqcert
