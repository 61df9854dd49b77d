#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "seqcert/eval_harness.hpp"
#include "seqcert/simulator.hpp"

using namespace seqcert;

namespace {

ScoredSentence row(std::string id, double unc, double quality, std::size_t len = 3,
                   Measure m = Measure::BleuVariance) {
  ScoredSentence r;
  r.id = std::move(id);
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < len; ++i) toks.push_back("t" + std::to_string(i));
  r.output = TokenSeq(toks);
  r.reference = r.output;
  r.uncertainty = {m, unc};
  r.sentence_quality = quality;
  return r;
}

std::vector<ScoredSentence> simulated_rows(double noise, std::size_t count, std::uint64_t seed) {
  SimConfig c;
  c.sentence_count = count;
  c.noise_rate = noise;
  c.seed = seed;
  c.vocab_size = 100;
  c.min_length = 5;
  c.max_length = 25;
  const auto sets = simulate(c);
  return score_all(sets, Measure::BleuVariance);
}

// Sentences whose noise level varies across the corpus but not with length.
std::vector<ScoredSentence> mixed_noise_rows(std::size_t per_level, std::uint64_t seed) {
  std::vector<ScoredSentence> corpus;
  for (int k = 0; k < 10; ++k) {
    auto part = simulated_rows(0.05 * k, per_level, seed + static_cast<std::uint64_t>(k));
    for (auto& r : part) {
      r.id += "-" + std::to_string(k);
      corpus.push_back(std::move(r));
    }
  }
  return corpus;
}

// Sort-and-average oracle for MEAN_SENT_BLEU retention.
double prefix_mean(std::vector<ScoredSentence> rows, double f) {
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.uncertainty.value != b.uncertainty.value) return a.uncertainty.value < b.uncertainty.value;
    return a.id < b.id;
  });
  const auto k = static_cast<std::size_t>(std::ceil(f * static_cast<double>(rows.size()) - 1e-9));
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += *rows[i].sentence_quality;
  return s / static_cast<double>(k);
}

}  // namespace

TEST_SUITE("eval_harness") {

TEST_CASE("retention_curve two-row example") {
  const std::vector<ScoredSentence> rows{row("a", 0.0, 1.0), row("b", 1.0, 0.0)};
  const std::vector<double> fr{0.5, 1.0};
  const auto c = retention_curve(rows, RetentionMetric::MeanSentenceBleu, fr);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].fraction == 0.5);
  CHECK(c.points[0].performance == 1.0);
  CHECK(c.points[1].fraction == 1.0);
  CHECK(c.points[1].performance == 0.5);
  CHECK(c.label == "bleuvar");
}

TEST_CASE("retention_curve is flat for constant quality") {
  std::vector<ScoredSentence> rows;
  for (int i = 0; i < 13; ++i) rows.push_back(row("r" + std::to_string(i), i * 0.7, 0.25));
  const auto c = retention_curve(rows, RetentionMetric::MeanSentenceBleu, default_fractions());
  CHECK(c.points.size() == 20);
  for (const auto& p : c.points) CHECK(p.performance == doctest::Approx(0.25));
}

TEST_CASE("retention_curve matches sort-and-average oracle on simulator rows") {
  const auto rows = simulated_rows(0.3, 20, 11);
  const auto fr = default_fractions();
  const auto c = retention_curve(rows, RetentionMetric::MeanSentenceBleu, fr);
  for (const auto& p : c.points) CHECK(p.performance == doctest::Approx(prefix_mean(rows, p.fraction)).epsilon(1e-12));
}

TEST_CASE("retention orientation for confidence measures") {
  // BS: higher value = more confident, kept first.
  const std::vector<ScoredSentence> rows{row("a", -5.0, 0.0, 3, Measure::BeamScore),
                                         row("b", -1.0, 1.0, 3, Measure::BeamScore)};
  const std::vector<double> fr{0.5};
  const auto c = retention_curve(rows, RetentionMetric::MeanSentenceBleu, fr);
  CHECK(c.points.front().performance == 1.0);
  CHECK(c.points.back().fraction == 1.0);
}

TEST_CASE("retention_curve errors") {
  CHECK_THROWS_AS(retention_curve({}, RetentionMetric::CorpusBleu, default_fractions()), std::invalid_argument);
  const std::vector<ScoredSentence> mixed{row("a", 0.0, 1.0), row("b", 0.0, 1.0, 3, Measure::BeamScore)};
  CHECK_THROWS_AS(retention_curve(mixed, RetentionMetric::CorpusBleu, default_fractions()), std::invalid_argument);
  auto no_ref = row("a", 0.0, 1.0);
  no_ref.reference.reset();
  const std::vector<ScoredSentence> one{no_ref};
  CHECK_THROWS_AS(retention_curve(one, RetentionMetric::CorpusBleu, default_fractions()), std::invalid_argument);
  const std::vector<ScoredSentence> ok{row("a", 0.0, 1.0)};
  const std::vector<double> bad{0.0};
  CHECK_THROWS_AS(retention_curve(ok, RetentionMetric::CorpusBleu, bad), std::invalid_argument);
}

TEST_CASE("retained_count rounds up without float drift") {
  CHECK(retained_count(0.3, 10) == 3);
  CHECK(retained_count(0.05, 20) == 1);
  CHECK(retained_count(0.5, 3) == 2);
  CHECK(retained_count(1.0, 7) == 7);
  CHECK(retained_count(0.01, 7) == 1);
}

TEST_CASE("endpoint identity and input-order invariance") {
  auto rows = simulated_rows(0.25, 60, 3);
  for (auto metric : {RetentionMetric::CorpusBleu, RetentionMetric::MeanSentenceBleu}) {
    const double full = dataset_metric(rows, metric);
    const auto fr = default_fractions();
    for (auto o : {BaselineOrdering::Uncertainty, BaselineOrdering::SentenceLength, BaselineOrdering::Random}) {
      const auto c = baseline_curve(rows, o, metric, fr, 42);
      CHECK(c.points.back().fraction == 1.0);
      CHECK(c.points.back().performance == full);
    }
    auto shuffled = rows;
    std::mt19937_64 gen(1);
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const auto a = retention_curve(rows, metric, fr);
    const auto b = retention_curve(shuffled, metric, fr);
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].performance == b.points[i].performance);
  }
}

TEST_CASE("oracle ordering dominates its reverse") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> q(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<ScoredSentence> good;
    std::vector<ScoredSentence> bad;
    for (int i = 0; i < 50; ++i) {
      const double quality = q(gen);
      good.push_back(row("r" + std::to_string(i), 1.0 - quality, quality));
      bad.push_back(row("r" + std::to_string(i), quality, quality));
    }
    const auto fr = default_fractions();
    const auto cg = retention_curve(good, RetentionMetric::MeanSentenceBleu, fr);
    const auto cb = retention_curve(bad, RetentionMetric::MeanSentenceBleu, fr);
    for (std::size_t i = 0; i < cg.points.size(); ++i) CHECK(cg.points[i].performance >= cb.points[i].performance);
  }
}

TEST_CASE("baseline orderings") {
  const auto rows = simulated_rows(0.2, 40, 5);
  const auto fr = default_fractions();
  const auto r1 = baseline_curve(rows, BaselineOrdering::Random, RetentionMetric::CorpusBleu, fr, 17);
  const auto r2 = baseline_curve(rows, BaselineOrdering::Random, RetentionMetric::CorpusBleu, fr, 17);
  CHECK(r1.label == "random");
  for (std::size_t i = 0; i < r1.points.size(); ++i) CHECK(r1.points[i].performance == r2.points[i].performance);

  const auto len = baseline_curve(rows, BaselineOrdering::SentenceLength, RetentionMetric::CorpusBleu, fr);
  CHECK(len.label == "length");

  // Shortest-first: the first retained row is a shortest one.
  std::vector<ScoredSentence> tiny{row("a", 0.0, 0.0, 9), row("b", 1.0, 1.0, 2), row("c", 2.0, 0.5, 5)};
  const std::vector<double> third{1.0 / 3.0};
  const auto lc = baseline_curve(tiny, BaselineOrdering::SentenceLength, RetentionMetric::MeanSentenceBleu, third);
  CHECK(lc.points.front().performance == 1.0);

  const auto p = seeded_permutation(10, 3);
  auto sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(sorted[i] == i);
  CHECK(seeded_permutation(10, 3) == p);
  CHECK(seeded_permutation(10, 4) != p);
}

TEST_CASE("uncertainty ordering beats length ordering when noise is length-independent") {
  const auto rows = mixed_noise_rows(30, 21);
  const auto fr = default_fractions();
  const auto unc = baseline_curve(rows, BaselineOrdering::Uncertainty, RetentionMetric::CorpusBleu, fr);
  const auto len = baseline_curve(rows, BaselineOrdering::SentenceLength, RetentionMetric::CorpusBleu, fr);
  for (std::size_t i = 0; i < fr.size(); ++i) {
    if (fr[i] <= 0.5) CHECK(unc.points[i].performance > len.points[i].performance);
  }
}

TEST_CASE("histogram binning") {
  const std::vector<std::pair<std::string, double>> flat{{"in", 3.0}, {"in", 3.0}, {"in", 3.0}};
  const auto h = histogram(flat, 4);
  const auto& c = h.counts.at("in");
  CHECK(std::count_if(c.begin(), c.end(), [](std::size_t x) { return x > 0; }) == 1);
  CHECK(c[0] == 3);

  std::vector<std::pair<std::string, double>> two;
  for (int i = 0; i < 5; ++i) two.emplace_back("in", 0.1);
  for (int i = 0; i < 5; ++i) two.emplace_back("ood", 0.9);
  const auto h2 = histogram(two, 2);
  CHECK(h2.counts.at("in") == std::vector<std::size_t>{5, 0});
  CHECK(h2.counts.at("ood") == std::vector<std::size_t>{0, 5});
  CHECK(h2.bin_edges.front() == 0.1);
  CHECK(h2.bin_edges.back() == 0.9);

  CHECK_THROWS_AS(histogram(two, 0), std::invalid_argument);
  CHECK_THROWS_AS(histogram(std::vector<std::pair<std::string, double>>{}, 3), std::invalid_argument);
}

TEST_CASE("histogram of mixed simulator output matches direct binning") {
  SimConfig c;
  c.sentence_count = 200;
  c.noise_rate = 0.05;
  c.ood_fraction = 0.5;
  c.seed = 2;
  const auto rows = score_all(simulate(c), Measure::BleuVariance);
  std::vector<std::pair<std::string, double>> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values.emplace_back(i < 100 ? "in" : "ood", display_value(rows[i].uncertainty));
  }
  const int bins = 10;
  const auto h = histogram(values, bins);
  double lo = values[0].second, hi = values[0].second;
  for (const auto& v : values) {
    lo = std::min(lo, v.second);
    hi = std::max(hi, v.second);
  }
  std::map<std::string, std::vector<std::size_t>> direct;
  for (const auto& [label, v] : values) {
    auto& d = direct[label];
    d.resize(bins);
    int k = 0;
    while (k < bins - 1 && v >= lo + (k + 1) * (hi - lo) / bins) ++k;
    ++d[static_cast<std::size_t>(k)];
  }
  CHECK(h.counts == direct);
  // Bimodal: in-dist mass in the lower half, OOD in the upper half.
  const auto& in = h.counts.at("in");
  const auto& ood = h.counts.at("ood");
  CHECK(std::accumulate(in.begin(), in.begin() + 5, std::size_t{0}) == 100);
  CHECK(std::accumulate(ood.begin() + 5, ood.end(), std::size_t{0}) == 100);

  auto permuted = values;
  std::reverse(permuted.begin(), permuted.end());
  CHECK(histogram(permuted, bins).counts == h.counts);
}

TEST_CASE("ood_separation") {
  CHECK(ood_separation(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == 1.0);
  CHECK(ood_separation(std::vector<double>{5, 5}, std::vector<double>{5, 5}) == 0.5);
  CHECK(ood_separation(std::vector<double>{1, 3}, std::vector<double>{2, 4}) == 0.75);
  CHECK_THROWS_AS(ood_separation(std::vector<double>{}, std::vector<double>{1}), std::invalid_argument);

  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> d(0, 6);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> a(1 + t % 9), b(1 + t % 5);
    for (auto& x : a) x = d(gen);
    for (auto& x : b) x = d(gen) + 1;
    const double v = ood_separation(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v == doctest::Approx(oracle::auroc_pairs(a, b)).epsilon(1e-12));
    CHECK(ood_separation(b, a) == doctest::Approx(1.0 - v).epsilon(1e-12));
  }
}

TEST_CASE("length_bins") {
  std::vector<ScoredSentence> rows{row("a", 1.0, 1.0, 5)};
  auto t = length_bins(rows, default_length_bins());
  REQUIRE(t.size() == 6);
  CHECK(t[0].bin.label() == "1-10");
  CHECK(t[5].bin.label() == "51+");
  CHECK(t[0].count == 1);
  CHECK(*t[0].mean_uncertainty == doctest::Approx(100.0));
  for (std::size_t k = 1; k < 6; ++k) {
    CHECK(t[k].count == 0);
    CHECK_FALSE(t[k].mean_uncertainty.has_value());
  }

  rows = {row("a", 2.0, 1.0, 5), row("b", 4.0, 1.0, 25), row("c", 0.0, 1.0, 60)};
  t = length_bins(rows, default_length_bins());
  CHECK(*t[0].mean_uncertainty == doctest::Approx(200.0));
  CHECK(*t[2].mean_uncertainty == doctest::Approx(400.0));
  CHECK(t[5].count == 1);

  // Group-by oracle on a simulator corpus.
  SimConfig c;
  c.sentence_count = 150;
  c.min_length = 1;
  c.max_length = 60;
  c.seed = 9;
  const auto sim = score_all(simulate(c), Measure::BleuVariance);
  const auto table = length_bins(sim, default_length_bins());
  std::map<std::size_t, std::pair<double, std::size_t>> groups;
  for (const auto& r : sim) {
    const std::size_t len = r.output.length();
    const std::size_t k = len > 50 ? 5 : (len == 0 ? 0 : (len - 1) / 10);
    groups[k].first += display_value(r.uncertainty);
    ++groups[k].second;
  }
  for (std::size_t k = 0; k < table.size(); ++k) {
    CHECK(table[k].count == groups[k].second);
    if (groups[k].second) {
      CHECK(*table[k].mean_uncertainty == doctest::Approx(groups[k].first / groups[k].second).epsilon(1e-12));
    }
  }
}

TEST_CASE("density_pairs") {
  const std::vector<ScoredSentence> one{row("a", 0.0, 1.0)};
  const auto d = density_pairs(one);
  REQUIRE(d.size() == 1);
  CHECK(d[0].uncertainty == 0.0);
  CHECK(d[0].quality == 100.0);

  const std::vector<ScoredSentence> two{row("a", 0.5, 0.1), row("b", 0.1, 0.9)};
  const auto d2 = density_pairs(two);
  CHECK(d2[0].uncertainty < d2[1].uncertainty);
  CHECK(d2[0].quality == doctest::Approx(90.0));

  const auto corpus = mixed_noise_rows(30, 100);
  const auto pairs = density_pairs(corpus);
  std::vector<double> u, q;
  for (const auto& p : pairs) {
    u.push_back(p.uncertainty);
    q.push_back(p.quality);
  }
  CHECK(std::is_sorted(u.begin(), u.end()));
  CHECK(oracle::spearman(u, q) <= -0.5);
}

}  // TEST_SUITE
