#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqcert {

/// A whitespace-tokenized sentence. Tokens are never empty.
class TokenSeq {
 public:
  TokenSeq() = default;
  /// Throws std::invalid_argument if any token is empty.
  explicit TokenSeq(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t length() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;

 private:
  std::vector<std::string> tokens_;
};

/// Splits on runs of whitespace. No case folding, punctuation stays attached.
TokenSeq tokenize(std::string_view text);

/// Joins tokens with single spaces.
std::string detokenize(const TokenSeq& seq);

inline constexpr int kDefaultMaxOrder = 4;

/// BLEU in [0,1] units. Multiply by 100 for display.
struct BleuScore {
  double value = 0.0;
  std::vector<double> precisions;
  double brevity_penalty = 1.0;
};

/// Sufficient statistics for BLEU: clipped matches and candidate n-gram
/// totals per order, plus lengths. Integer-valued, so pooling is exact.
struct BleuStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  explicit BleuStats(int max_order = kDefaultMaxOrder);

  int max_order() const { return static_cast<int>(matches.size()); }
  BleuStats& operator+=(const BleuStats& other);
};

/// Clipped n-gram statistics of one candidate against one reference.
BleuStats ngram_stats(const TokenSeq& candidate, const TokenSeq& reference,
                      int max_order = kDefaultMaxOrder);

/// Sentence BLEU with add-one smoothing on orders >= 2 (unigram precision is
/// unsmoothed). An empty candidate scores 0. Throws std::invalid_argument on
/// an empty reference or max_order < 1.
BleuScore sentence_bleu(const TokenSeq& candidate, const TokenSeq& reference,
                        int max_order = kDefaultMaxOrder);

/// Unsmoothed BLEU from pooled statistics. Orders whose pooled candidate
/// total is zero (every candidate shorter than n) are left out of the
/// geometric mean; a zero pooled candidate length scores 0.
BleuScore bleu_from_stats(const BleuStats& stats);

using BleuPair = std::pair<TokenSeq, TokenSeq>;

/// Standard corpus BLEU: clipped counts and lengths pooled over all pairs,
/// no smoothing. Throws std::invalid_argument on an empty list or an empty
/// reference.
BleuScore corpus_bleu(std::span<const BleuPair> pairs, int max_order = kDefaultMaxOrder);

/// ((5 + length) / 6)^alpha, the beam-search length normalizer.
double length_penalty(std::size_t length, double alpha);

}  // namespace seqcert
