#include "seqcert/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace seqcert {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Maps the tokens of both sentences onto a shared small integer alphabet so
// n-gram comparison works on ints.
std::pair<std::vector<int>, std::vector<int>> intern(const TokenSeq& a, const TokenSeq& b) {
  std::unordered_map<std::string_view, int> ids;
  auto encode = [&ids](const TokenSeq& seq) {
    std::vector<int> out;
    out.reserve(seq.length());
    for (const auto& tok : seq) {
      auto [it, inserted] = ids.try_emplace(tok, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  auto ea = encode(a);
  auto eb = encode(b);
  return {std::move(ea), std::move(eb)};
}

using Gram = std::span<const int>;

bool gram_less(Gram x, Gram y) {
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

std::vector<Gram> sorted_grams(const std::vector<int>& ids, std::size_t order) {
  std::vector<Gram> grams;
  if (ids.size() < order) return grams;
  grams.reserve(ids.size() - order + 1);
  for (std::size_t i = 0; i + order <= ids.size(); ++i) {
    grams.emplace_back(ids.data() + i, order);
  }
  std::sort(grams.begin(), grams.end(), gram_less);
  return grams;
}

// Sum over distinct n-grams of min(candidate count, reference count).
std::size_t clipped_matches(const std::vector<Gram>& cand, const std::vector<Gram>& ref) {
  std::size_t matches = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < cand.size() && j < ref.size()) {
    if (gram_less(cand[i], ref[j])) {
      ++i;
    } else if (gram_less(ref[j], cand[i])) {
      ++j;
    } else {
      std::size_t ci = i;
      std::size_t rj = j;
      while (ci < cand.size() && std::ranges::equal(cand[ci], cand[i])) ++ci;
      while (rj < ref.size() && std::ranges::equal(ref[rj], ref[j])) ++rj;
      matches += std::min(ci - i, rj - j);
      i = ci;
      j = rj;
    }
  }
  return matches;
}

void check_order(int max_order) {
  if (max_order < 1) throw std::invalid_argument("BLEU max_order must be >= 1");
}

double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
  if (cand_len >= ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

}  // namespace

TokenSeq::TokenSeq(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.empty()) throw std::invalid_argument("TokenSeq: empty token");
  }
}

TokenSeq tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return TokenSeq(std::move(out));
}

std::string detokenize(const TokenSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.length(); ++i) {
    if (i) out += ' ';
    out += seq[i];
  }
  return out;
}

BleuStats::BleuStats(int max_order) {
  check_order(max_order);
  matches.assign(static_cast<std::size_t>(max_order), 0);
  totals.assign(static_cast<std::size_t>(max_order), 0);
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.max_order() != max_order()) throw std::invalid_argument("BleuStats: max_order mismatch");
  for (std::size_t n = 0; n < matches.size(); ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats ngram_stats(const TokenSeq& candidate, const TokenSeq& reference, int max_order) {
  BleuStats stats(max_order);
  stats.candidate_length = candidate.length();
  stats.reference_length = reference.length();
  auto [cand, ref] = intern(candidate, reference);
  for (int n = 1; n <= max_order; ++n) {
    const auto order = static_cast<std::size_t>(n);
    auto cg = sorted_grams(cand, order);
    auto rg = sorted_grams(ref, order);
    stats.totals[order - 1] = cg.size();
    stats.matches[order - 1] = clipped_matches(cg, rg);
  }
  return stats;
}

BleuScore sentence_bleu(const TokenSeq& candidate, const TokenSeq& reference, int max_order) {
  check_order(max_order);
  if (reference.empty()) throw std::invalid_argument("sentence_bleu: empty reference");

  BleuScore score;
  score.precisions.assign(static_cast<std::size_t>(max_order), 0.0);
  if (candidate.empty()) {
    score.brevity_penalty = 0.0;
    score.value = 0.0;
    return score;
  }

  const BleuStats stats = ngram_stats(candidate, reference, max_order);
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < stats.matches.size(); ++n) {
    double p;
    if (n == 0) {
      p = static_cast<double>(stats.matches[0]) / static_cast<double>(stats.totals[0]);
    } else {
      p = static_cast<double>(stats.matches[n] + 1) / static_cast<double>(stats.totals[n] + 1);
    }
    score.precisions[n] = p;
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  score.brevity_penalty = brevity_penalty(stats.candidate_length, stats.reference_length);
  if (zero) {
    score.value = 0.0;
  } else {
    score.value = std::min(1.0, score.brevity_penalty * std::exp(log_sum / max_order));
  }
  return score;
}

BleuScore bleu_from_stats(const BleuStats& stats) {
  BleuScore score;
  score.precisions.assign(stats.matches.size(), 0.0);
  if (stats.candidate_length == 0) {
    score.brevity_penalty = 0.0;
    return score;
  }

  double log_sum = 0.0;
  int used = 0;
  bool zero = false;
  for (std::size_t n = 0; n < stats.matches.size(); ++n) {
    if (stats.totals[n] == 0) continue;
    const double p = static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]);
    score.precisions[n] = p;
    ++used;
    if (p == 0.0) {
      zero = true;
    } else {
      log_sum += std::log(p);
    }
  }
  score.brevity_penalty = brevity_penalty(stats.candidate_length, stats.reference_length);
  if (!zero) score.value = std::min(1.0, score.brevity_penalty * std::exp(log_sum / used));
  return score;
}

BleuScore corpus_bleu(std::span<const BleuPair> pairs, int max_order) {
  check_order(max_order);
  if (pairs.empty()) throw std::invalid_argument("corpus_bleu: empty pair list");
  BleuStats pooled(max_order);
  for (const auto& [cand, ref] : pairs) {
    if (ref.empty()) throw std::invalid_argument("corpus_bleu: empty reference");
    pooled += ngram_stats(cand, ref, max_order);
  }
  return bleu_from_stats(pooled);
}

double length_penalty(std::size_t length, double alpha) {
  return std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
}

}  // namespace seqcert
