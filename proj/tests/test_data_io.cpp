#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "seqcert/data_io.hpp"
#include "seqcert/simulator.hpp"
#include "test_support.hpp"

using namespace seqcert;
namespace fs = std::filesystem;

TEST_SUITE("data_io") {

TEST_CASE("reads the committed fixture") {
  const auto sets = read_sample_file(fixture("three_records.jsonl"));
  REQUIRE(sets.size() == 3);
  CHECK(sets[0].id == "s1");
  CHECK(sets[0].samples.size() == 3);
  CHECK(sets[0].samples[1].tokens == tokenize("this is a home"));
  CHECK(sets[0].samples[1].logprob == -2.5);
  CHECK(sets[1].deterministic->tokens == tokenize("the dog barks"));
  CHECK(sets[2].reference == tokenize("the green bicycle is fast"));
}

TEST_CASE("valid two-line file") {
  TempDir dir;
  const auto p = dir.write("two.jsonl",
                           "{\"id\":\"a\",\"samples\":[{\"text\":\"x y\"}]}\n"
                           "\n"
                           "{\"id\":\"b\",\"samples\":[{\"tokens\":[\"z\"],\"logprob\":-0.1}]}\n");
  SampleReader reader(p);
  auto first = reader.next();
  REQUIRE(first);
  CHECK(reader.line() == 1);
  auto second = reader.next();
  REQUIRE(second);
  CHECK(reader.line() == 3);
  CHECK_FALSE(reader.next());
  CHECK(read_sample_file(p).size() == 2);
}

TEST_CASE("contract violations carry line numbers") {
  TempDir dir;
  auto expect_error = [&](const std::string& body, const std::string& needle, std::size_t line) {
    const auto p = dir.write("bad.jsonl", body);
    try {
      read_sample_file(p);
      FAIL("expected DataError for: " << body);
    } catch (const DataError& e) {
      CHECK(e.line() == line);
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  expect_error("{\"id\":\"a\",\"samples\":[{\"text\":\"x\"}]}\n{\"id\":\"b\",\"samples\":[\n", "malformed JSON", 2);
  expect_error("{\"id\":\"a\",\"samples\":[{\"text\":\"x\"}]}\n{\"id\":\"c\",\"samples\":[{\"text\":\"x\"}]}\n"
               "{\"id\":\"a\",\"samples\":[{\"text\":\"y\"}]}\n",
               "duplicate id 'a' (first seen on line 1)", 3);
  expect_error("{\"id\":\"a\",\"samples\":[]}\n", "empty 'samples'", 1);
  expect_error("{\"id\":\"a\",\"samples\":[{\"text\":\"x\",\"logprob\":0.5}]}\n", "positive", 1);
  expect_error("{\"samples\":[{\"text\":\"x\"}]}\n", "'id'", 1);
  expect_error("{\"id\":\"a\",\"samples\":[{\"tokens\":[\"x\",\"\"]}]}\n", "empty token", 1);
  expect_error("{\"id\":\"a\",\"samples\":[{\"text\":\"x\"}],\"reference\":\"  \"}\n", "empty reference", 1);
  expect_error("{\"id\":\"a\",\"samples\":[{}]}\n", "needs 'tokens' or 'text'", 1);
  CHECK_THROWS_AS(read_sample_file(dir.path() / "missing.jsonl"), DataError);
}

TEST_CASE("validate keeps going past bad lines") {
  TempDir dir;
  const auto p = dir.write("mixed.jsonl",
                           "{\"id\":\"a\",\"samples\":[{\"text\":\"x\",\"logprob\":-1}],\"reference\":\"x\"}\n"
                           "not json\n"
                           "{\"id\":\"a\",\"samples\":[{\"text\":\"x\"}]}\n"
                           "{\"id\":\"b\",\"samples\":[{\"text\":\"x\",\"logprob\":3}]}\n");
  const auto r = validate_sample_file(p);
  CHECK(r.lines == 4);
  CHECK(r.records == 1);
  CHECK(r.with_reference == 1);
  CHECK(r.with_sample_logprobs == 1);
  REQUIRE(r.errors.size() == 3);
  CHECK(r.errors[0].find(":2:") != std::string::npos);
  CHECK(r.errors[1].find("duplicate") != std::string::npos);
  CHECK(r.errors[2].find(":4:") != std::string::npos);
  CHECK(validate_sample_file(fixture("three_records.jsonl")).ok());
}

TEST_CASE("read -> write -> read round-trips sample sets") {
  TempDir dir;
  SimConfig c;
  c.sentence_count = 40;
  c.ood_fraction = 0.25;
  c.seed = 3;
  const auto sets = simulate(c);
  const auto p = dir.path() / "sim.jsonl";
  write_sample_file(p, sets);
  const auto back = read_sample_file(p);
  CHECK(back == sets);

  const auto fx = read_sample_file(fixture("three_records.jsonl"));
  write_sample_file(dir.path() / "fx.jsonl", fx);
  CHECK(read_sample_file(dir.path() / "fx.jsonl") == fx);
}

TEST_CASE("streaming reader handles a 100k-line file") {
  TempDir dir;
  const auto p = dir.path() / "big.jsonl";
  {
    std::ofstream out(p, std::ios::binary);
    for (int i = 0; i < 100000; ++i) {
      out << "{\"id\":\"r" << i << "\",\"samples\":[{\"text\":\"a b c\",\"logprob\":-1},{\"text\":\"a b d\"}]}\n";
    }
  }
  SampleReader reader(p);
  std::size_t n = 0;
  std::size_t tokens = 0;
  while (auto set = reader.next()) {
    ++n;
    tokens += set->samples[0].tokens.length();
  }
  CHECK(n == 100000);
  CHECK(tokens == 300000);
}

TEST_CASE("read_parallel_corpus") {
  TempDir dir;
  const auto src = dir.write("src.txt", "a\nb\nc\n");
  const auto ref = dir.write("ref.txt", "x\ny\nz\n");
  const auto pairs = read_parallel_corpus(src, ref);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[1].source == "b");
  CHECK(pairs[1].reference == "y");

  const auto short_ref = dir.write("ref2.txt", "x\ny\n");
  try {
    read_parallel_corpus(src, short_ref);
    FAIL("expected mismatch");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }

  const auto gap = dir.write("ref3.txt", "x\n\nz\n");
  try {
    read_parallel_corpus(src, gap);
    FAIL("expected empty reference error");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("write_reports") {
  TempDir dir;
  ReportBundle empty;
  empty.manifest.command = "test";
  const auto m = write_reports(empty, dir.path() / "empty");
  CHECK(fs::exists(m));
  CHECK(std::distance(fs::directory_iterator(dir.path() / "empty"), fs::directory_iterator{}) == 1);

  const auto sets = read_sample_file(fixture("three_records.jsonl"));
  ReportBundle full;
  full.manifest.command = "test";
  full.manifest.measure = "bleuvar";
  full.scores = score_all(sets, Measure::BleuVariance);
  full.retention.push_back(retention_curve(full.scores, RetentionMetric::CorpusBleu, default_fractions()));
  std::vector<std::pair<std::string, double>> vals;
  for (const auto& r : full.scores) vals.emplace_back("in", display_value(r.uncertainty));
  full.histogram = histogram(vals, 4);
  full.length_bins = length_bins(full.scores, default_length_bins());
  full.density = density_pairs(full.scores);
  const auto out = dir.path() / "full";
  write_reports(full, out);
  const std::vector<std::pair<std::string, std::string>> headers{
      {"scores.csv", "id,output,uncertainty,quality"},
      {"retention.csv", "measure,fraction,metric,value"},
      {"histogram.csv", "population,bin_lo,bin_hi,count"},
      {"length_bins.csv", "bin,mean_uncertainty,count"},
      {"density.csv", "uncertainty,quality"}};
  for (const auto& [name, header] : headers) {
    const std::string body = slurp(out / name);
    CHECK(body.rfind(header + "\n", 0) == 0);
    CHECK(body.find('\r') == std::string::npos);
  }
  const std::string first = slurp(out / "scores.csv") + slurp(out / "retention.csv") + slurp(out / "manifest.json");
  write_reports(full, out);
  CHECK(slurp(out / "scores.csv") + slurp(out / "retention.csv") + slurp(out / "manifest.json") == first);

  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"smoothing\"") != std::string::npos);
  CHECK(manifest.find("\"bleu_max_order\": 4") != std::string::npos);
}

}  // TEST_SUITE
