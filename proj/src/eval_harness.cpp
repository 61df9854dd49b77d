#include "seqcert/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace seqcert {

namespace {

void check_rows(std::span<const ScoredSentence> rows) {
  if (rows.empty()) throw std::invalid_argument("no rows to evaluate");
  const Measure m = rows.front().uncertainty.measure;
  for (const auto& r : rows) {
    if (r.uncertainty.measure != m) {
      throw std::invalid_argument("mixed measures in rows ('" + std::string(to_string(m)) + "' and '" +
                                  std::string(to_string(r.uncertainty.measure)) + "')");
    }
  }
}

void check_references(std::span<const ScoredSentence> rows, RetentionMetric metric) {
  for (const auto& r : rows) {
    if (!r.reference) throw std::invalid_argument("row '" + r.id + "' has no reference");
    if (metric == RetentionMetric::MeanSentenceBleu && !r.sentence_quality) {
      throw std::invalid_argument("row '" + r.id + "' has no sentence quality");
    }
  }
}

double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<double> normalize_fractions(std::span<const double> fractions) {
  std::vector<double> out(fractions.begin(), fractions.end());
  for (double f : out) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("retention fraction out of (0,1]: " + std::to_string(f));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty() || out.back() != 1.0) out.push_back(1.0);
  return out;
}

std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t range) {
  const std::uint64_t threshold = (0 - range) % range;
  std::uint64_t x;
  do {
    x = gen();
  } while (x < threshold);
  return x % range;
}

std::vector<std::size_t> id_order(std::span<const ScoredSentence> rows) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].id < rows[b].id; });
  return order;
}

}  // namespace

std::string_view to_string(RetentionMetric m) {
  return m == RetentionMetric::CorpusBleu ? "corpus" : "mean";
}

RetentionMetric parse_metric(std::string_view name) {
  if (name == "corpus") return RetentionMetric::CorpusBleu;
  if (name == "mean") return RetentionMetric::MeanSentenceBleu;
  throw std::invalid_argument("unknown metric '" + std::string(name) + "' (expected corpus or mean)");
}

std::vector<double> default_fractions() {
  std::vector<double> out;
  for (int k = 1; k <= 20; ++k) out.push_back(k / 20.0);
  return out;
}

std::size_t retained_count(double fraction, std::size_t m) {
  const double raw = fraction * static_cast<double>(m);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(k, 1, m);
}

double dataset_metric(std::span<const ScoredSentence> rows, RetentionMetric metric) {
  if (rows.empty()) throw std::invalid_argument("no rows to evaluate");
  check_references(rows, metric);
  if (metric == RetentionMetric::MeanSentenceBleu) {
    std::vector<double> q;
    q.reserve(rows.size());
    for (const auto& r : rows) q.push_back(*r.sentence_quality);
    return sorted_mean(std::move(q));
  }
  BleuStats pooled;
  for (const auto& r : rows) pooled += ngram_stats(r.output, *r.reference);
  return bleu_from_stats(pooled).value;
}

std::vector<std::size_t> confidence_order(std::span<const ScoredSentence> rows) {
  check_rows(rows);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ua = uncertainty_score(rows[a].uncertainty);
    const double ub = uncertainty_score(rows[b].uncertainty);
    if (ua != ub) return ua < ub;
    return rows[a].id < rows[b].id;
  });
  return order;
}

RetentionCurve curve_for_order(std::span<const ScoredSentence> rows, std::span<const std::size_t> order,
                               RetentionMetric metric, std::span<const double> fractions, std::string label) {
  if (rows.empty()) throw std::invalid_argument("no rows to evaluate");
  if (order.size() != rows.size()) throw std::invalid_argument("ordering does not cover every row");
  check_references(rows, metric);

  RetentionCurve curve;
  curve.label = std::move(label);
  curve.metric = metric;
  const auto grid = normalize_fractions(fractions);
  const std::size_t m = rows.size();

  if (metric == RetentionMetric::CorpusBleu) {
    // Pooled counts are integers, so the running prefix is exact.
    BleuStats prefix;
    std::size_t taken = 0;
    for (double f : grid) {
      const std::size_t k = retained_count(f, m);
      for (; taken < k; ++taken) {
        const auto& r = rows[order[taken]];
        prefix += ngram_stats(r.output, *r.reference);
      }
      curve.points.push_back({f, bleu_from_stats(prefix).value});
    }
  } else {
    for (double f : grid) {
      const std::size_t k = retained_count(f, m);
      std::vector<double> q;
      q.reserve(k);
      for (std::size_t i = 0; i < k; ++i) q.push_back(*rows[order[i]].sentence_quality);
      curve.points.push_back({f, sorted_mean(std::move(q))});
    }
  }
  return curve;
}

RetentionCurve retention_curve(std::span<const ScoredSentence> rows, RetentionMetric metric,
                               std::span<const double> fractions) {
  const auto order = confidence_order(rows);
  return curve_for_order(rows, order, metric, fractions, std::string(to_string(rows.front().uncertainty.measure)));
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(gen, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

RetentionCurve baseline_curve(std::span<const ScoredSentence> rows, BaselineOrdering ordering,
                              RetentionMetric metric, std::span<const double> fractions, std::uint64_t seed) {
  check_rows(rows);
  switch (ordering) {
    case BaselineOrdering::Uncertainty:
      return retention_curve(rows, metric, fractions);
    case BaselineOrdering::SentenceLength: {
      std::vector<std::size_t> order(rows.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a].output.length() != rows[b].output.length()) {
          return rows[a].output.length() < rows[b].output.length();
        }
        return rows[a].id < rows[b].id;
      });
      return curve_for_order(rows, order, metric, fractions, "length");
    }
    case BaselineOrdering::Random: {
      const auto base = id_order(rows);
      const auto perm = seeded_permutation(rows.size(), seed);
      std::vector<std::size_t> order(rows.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = base[perm[i]];
      return curve_for_order(rows, order, metric, fractions, "random");
    }
  }
  throw std::invalid_argument("unknown baseline ordering");
}

HistogramReport histogram(std::span<const std::pair<std::string, double>> values, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
  if (values.empty()) throw std::invalid_argument("histogram: no values");
  double lo = values.front().second;
  double hi = lo;
  for (const auto& [label, v] : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("histogram: non-finite value in population '" + label + "'");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1.0;

  HistogramReport report;
  const double width = (hi - lo) / bins;
  report.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k < bins; ++k) report.bin_edges[static_cast<std::size_t>(k)] = lo + k * width;
  report.bin_edges.back() = hi;

  for (const auto& [label, v] : values) {
    auto& counts = report.counts[label];
    if (counts.empty()) counts.assign(static_cast<std::size_t>(bins), 0);
    auto idx = static_cast<std::size_t>(std::floor((v - lo) / width));
    idx = std::min(idx, static_cast<std::size_t>(bins) - 1);
    ++counts[idx];
  }
  return report;
}

double ood_separation(std::span<const double> in_dist, std::span<const double> ood) {
  if (in_dist.empty() || ood.empty()) throw std::invalid_argument("ood_separation: both populations must be nonempty");
  struct Item {
    double value;
    bool is_ood;
  };
  std::vector<Item> all;
  all.reserve(in_dist.size() + ood.size());
  for (double v : in_dist) all.push_back({v, false});
  for (double v : ood) all.push_back({v, true});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.value < b.value; });

  double ood_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    // Ranks i+1..j share their average.
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].is_ood) ood_rank_sum += midrank;
    }
    i = j;
  }
  const auto n_in = static_cast<double>(in_dist.size());
  const auto n_ood = static_cast<double>(ood.size());
  const double u = ood_rank_sum - n_ood * (n_ood + 1.0) / 2.0;
  return u / (n_in * n_ood);
}

std::string LengthBin::label() const {
  if (!hi) return std::to_string(lo) + "+";
  return std::to_string(lo) + "-" + std::to_string(*hi);
}

std::vector<LengthBin> default_length_bins() {
  return {{1, 10}, {11, 20}, {21, 30}, {31, 40}, {41, 50}, {51, std::nullopt}};
}

std::vector<LengthBinRow> length_bins(std::span<const ScoredSentence> rows, std::span<const LengthBin> bins) {
  if (bins.empty()) throw std::invalid_argument("length_bins: no bins");
  std::vector<LengthBinRow> out;
  std::vector<double> sums(bins.size(), 0.0);
  for (const auto& b : bins) out.push_back({b, 0, std::nullopt});
  for (const auto& r : rows) {
    const std::size_t len = r.output.length();
    std::size_t slot = bins.size();
    for (std::size_t k = 0; k < bins.size(); ++k) {
      const bool above = len >= bins[k].lo || (k == 0 && len < bins[0].lo);
      const bool below = !bins[k].hi || len <= *bins[k].hi;
      if (above && below) {
        slot = k;
        break;
      }
    }
    if (slot == bins.size()) continue;
    ++out[slot].count;
    sums[slot] += display_value(r.uncertainty);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].count > 0) out[k].mean_uncertainty = sums[k] / static_cast<double>(out[k].count);
  }
  return out;
}

std::vector<DensityPair> density_pairs(std::span<const ScoredSentence> rows) {
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& r : rows) {
    if (!r.sentence_quality) throw std::invalid_argument("row '" + r.id + "' has no reference");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ua = display_value(rows[a].uncertainty);
    const double ub = display_value(rows[b].uncertainty);
    if (ua != ub) return ua < ub;
    return rows[a].id < rows[b].id;
  });
  std::vector<DensityPair> out;
  out.reserve(rows.size());
  for (std::size_t i : order) out.push_back({display_value(rows[i].uncertainty), *rows[i].sentence_quality * 100.0});
  return out;
}

}  // namespace seqcert
