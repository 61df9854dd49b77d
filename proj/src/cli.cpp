#include "seqcert/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqcert/csv.hpp"
#include "seqcert/data_io.hpp"
#include "seqcert/eval_harness.hpp"
#include "seqcert/simulator.hpp"
#include "seqcert/uncertainty.hpp"

namespace seqcert::cli {

namespace {

// Bad flag values that CLI11 validators cannot express.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t env_seed() {
  const char* raw = std::getenv("SEQCERT_SEED");
  if (!raw || !*raw) return 0;
  std::uint64_t v = 0;
  const std::string_view s(raw);
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw UsageError("SEQCERT_SEED must be an unsigned integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::size_t max_samples(const std::vector<SampleSet>& sets) {
  std::size_t n = 0;
  for (const auto& s : sets) n = std::max(n, s.samples.size());
  return n;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::string join_numbers(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (double v : values) parts.push_back(csv::format_number(v));
  return join(parts);
}

std::vector<ScoredSentence> load_and_score(const std::string& path, Measure measure, unsigned threads) {
  const auto sets = read_sample_file(path);
  if (sets.empty()) throw DataError(path, 0, "no records");
  return score_all(sets, measure, threads);
}

const std::vector<std::string> kMeasures{"bs", "sp", "bleuvar"};

struct Common {
  std::string measure = "bleuvar";
  std::string out_dir = ".";
  unsigned threads = 1;
};

void add_measure(CLI::App* cmd, Common& c, bool required) {
  auto* opt = cmd->add_option("--measure,-m", c.measure, "Uncertainty measure: bs, sp or bleuvar")
                  ->check(CLI::IsMember(kMeasures, CLI::ignore_case));
  if (required) {
    opt->required();
  } else {
    opt->capture_default_str();
  }
}

void add_threads(CLI::App* cmd, Common& c) {
  cmd->add_option("--threads,-j", c.threads, "Worker threads for per-sentence scoring (output order is fixed)")
      ->check(CLI::Range(1U, 1024U))
      ->capture_default_str();
}

void add_out_dir(CLI::App* cmd, Common& c) {
  cmd->add_option("--out,-o", c.out_dir, "Output directory for CSV reports and manifest.json")->capture_default_str();
}

SimConfig load_sim_config(const std::string& path, bool& has_seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, 0, "cannot open config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path, 0, std::string("malformed JSON config: ") + e.what());
  }
  if (!j.is_object()) throw DataError(path, 0, "config must be a JSON object");
  SimConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "vocab_size") {
        c.vocab_size = value.get<std::size_t>();
      } else if (key == "sentence_count") {
        c.sentence_count = value.get<std::size_t>();
      } else if (key == "min_length") {
        c.min_length = value.get<std::size_t>();
      } else if (key == "max_length") {
        c.max_length = value.get<std::size_t>();
      } else if (key == "noise_rate") {
        c.noise_rate = value.get<double>();
      } else if (key == "samples") {
        c.samples = value.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
        has_seed = true;
      } else if (key == "ood_fraction") {
        c.ood_fraction = value.get<double>();
      } else {
        throw DataError(path, 0, "unknown config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path, 0, "bad value for '" + key + "': " + e.what());
    }
  }
  return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"seqcert: sequence-level uncertainty measures for translation outputs", "seqcert"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // score
  Common score_opts;
  std::string score_samples;
  auto* score = app.add_subcommand("score", "Score every record of a sample file with one measure");
  add_measure(score, score_opts, true);
  score->add_option("--samples,-s", score_samples, "Sample file (JSONL)")->required();
  add_out_dir(score, score_opts);
  add_threads(score, score_opts);

  // retention
  Common ret_opts;
  std::string ret_samples;
  std::string ret_metric = "corpus";
  std::vector<double> ret_fractions;
  std::vector<std::string> ret_orderings{"uncertainty", "length", "random"};
  std::optional<std::uint64_t> ret_seed;
  auto* retention = app.add_subcommand("retention", "Performance-retention curves with referral baselines");
  add_measure(retention, ret_opts, true);
  retention->add_option("--samples,-s", ret_samples, "Sample file (JSONL) with references")->required();
  retention->add_option("--metric", ret_metric, "Performance on retained rows: corpus (corpus BLEU) or mean (mean sentence BLEU)")
      ->check(CLI::IsMember({"corpus", "mean"}))
      ->capture_default_str();
  retention->add_option("--fractions", ret_fractions, "Comma-separated retained fractions in (0,1] (default 0.05,0.10,...,1)")
      ->delimiter(',');
  retention->add_option("--orderings", ret_orderings, "Comma-separated orderings: uncertainty, length, random")
      ->delimiter(',')
      ->check(CLI::IsMember({"uncertainty", "length", "random"}))
      ->capture_default_str();
  retention->add_option("--seed", ret_seed, "Seed for the random referral ordering (default $SEQCERT_SEED or 0)");
  add_out_dir(retention, ret_opts);
  add_threads(retention, ret_opts);

  // histogram
  Common hist_opts;
  std::vector<std::string> hist_populations;
  int hist_bins = 20;
  auto* hist = app.add_subcommand("histogram", "Joint histogram of display-scaled uncertainty per population");
  add_measure(hist, hist_opts, false);
  hist->add_option("--populations,-p", hist_populations, "LABEL=FILE pairs, comma-separated (e.g. in=a.jsonl,ood=b.jsonl)")
      ->required()
      ->delimiter(',');
  hist->add_option("--bins,-b", hist_bins, "Number of equal-width bins")->check(CLI::PositiveNumber)->capture_default_str();
  add_out_dir(hist, hist_opts);
  add_threads(hist, hist_opts);

  // bins
  Common bins_opts;
  std::string bins_samples;
  auto* bins = app.add_subcommand("bins", "Mean display-scaled uncertainty by output length (1-10, ..., 51+)");
  add_measure(bins, bins_opts, false);
  bins->add_option("--samples,-s", bins_samples, "Sample file (JSONL)")->required();
  add_out_dir(bins, bins_opts);
  add_threads(bins, bins_opts);

  // separation
  Common sep_opts;
  sep_opts.out_dir.clear();
  std::string sep_in;
  std::string sep_ood;
  auto* sep = app.add_subcommand("separation", "AUROC of in-distribution vs OOD uncertainty, printed to stdout");
  add_measure(sep, sep_opts, false);
  sep->add_option("--in", sep_in, "In-distribution sample file")->required();
  sep->add_option("--ood", sep_ood, "Out-of-distribution sample file")->required();
  sep->add_option("--out,-o", sep_opts.out_dir, "Optional directory for manifest.json");
  add_threads(sep, sep_opts);

  // simulate
  std::string sim_config_path;
  std::string sim_out;
  SimConfig sim_flags;
  unsigned sim_threads = 1;
  auto* sim = app.add_subcommand("simulate", "Write a synthetic sample file from a noisy-decoder simulator");
  sim->add_option("--config,-c", sim_config_path, "JSON config with any of the fields below; flags override it");
  sim->add_option("--out,-o", sim_out, "Output sample file (JSONL); manifest goes to <out>.manifest.json")->required();
  auto* o_vocab = sim->add_option("--vocab-size", sim_flags.vocab_size, "Vocabulary size")->capture_default_str();
  auto* o_count = sim->add_option("--sentences", sim_flags.sentence_count, "Number of sentences")->capture_default_str();
  auto* o_min = sim->add_option("--min-length", sim_flags.min_length, "Minimum reference length")->capture_default_str();
  auto* o_max = sim->add_option("--max-length", sim_flags.max_length, "Maximum reference length")->capture_default_str();
  auto* o_noise = sim->add_option("--noise", sim_flags.noise_rate, "Per-token substitution rate in [0,1]")->capture_default_str();
  auto* o_n = sim->add_option("--samples,-n", sim_flags.samples, "Samples per sentence (N >= 2)")->capture_default_str();
  auto* o_seed = sim->add_option("--seed", sim_flags.seed, "Seed (default $SEQCERT_SEED or 0)");
  auto* o_ood = sim->add_option("--ood-fraction", sim_flags.ood_fraction, "Fraction of sentences drawn OOD")->capture_default_str();
  sim->add_option("--threads,-j", sim_threads, "Worker threads (output is identical for any count)")
      ->check(CLI::Range(1U, 1024U))
      ->capture_default_str();

  // validate
  std::string val_samples;
  std::string val_src;
  std::string val_ref;
  auto* val = app.add_subcommand("validate", "Check a sample file (or a parallel corpus) against its contract");
  auto* o_vs = val->add_option("--samples,-s", val_samples, "Sample file (JSONL)");
  auto* o_src = val->add_option("--src", val_src, "Source side of a parallel corpus, one sentence per line");
  auto* o_ref = val->add_option("--ref", val_ref, "Reference side of a parallel corpus, one sentence per line");
  o_src->needs(o_ref);
  o_ref->needs(o_src);
  o_vs->excludes(o_src);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* failed = &app;
    for (auto* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kExitUsage;
  }

  try {
    if (score->parsed()) {
      const Measure m = parse_measure(score_opts.measure);
      ReportBundle bundle;
      const auto sets = read_sample_file(score_samples);
      if (sets.empty()) throw DataError(score_samples, 0, "no records");
      bundle.scores = score_all(sets, m, score_opts.threads);
      if (std::ranges::all_of(bundle.scores, [](const ScoredSentence& r) { return r.sentence_quality.has_value(); })) {
        bundle.density = density_pairs(bundle.scores);
      }
      bundle.manifest.command = "score";
      bundle.manifest.measure = std::string(to_string(m));
      bundle.manifest.samples_per_set = max_samples(sets);
      bundle.manifest.parameters["samples"] = score_samples;
      const auto manifest = write_reports(bundle, score_opts.out_dir);
      err << "scored " << bundle.scores.size() << " records; manifest " << manifest.string() << "\n";
      return kExitOk;
    }

    if (retention->parsed()) {
      const Measure m = parse_measure(ret_opts.measure);
      const RetentionMetric metric = parse_metric(ret_metric);
      const std::uint64_t seed = ret_seed ? *ret_seed : env_seed();
      const auto fractions = ret_fractions.empty() ? default_fractions() : ret_fractions;
      for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw UsageError("--fractions: " + csv::format_number(f) + " is outside (0,1]");
      }
      const auto sets = read_sample_file(ret_samples);
      if (sets.empty()) throw DataError(ret_samples, 0, "no records");
      const auto rows = score_all(sets, m, ret_opts.threads);
      ReportBundle bundle;
      for (const auto& name : ret_orderings) {
        const BaselineOrdering ordering = name == "length"   ? BaselineOrdering::SentenceLength
                                          : name == "random" ? BaselineOrdering::Random
                                                             : BaselineOrdering::Uncertainty;
        bundle.retention.push_back(baseline_curve(rows, ordering, metric, fractions, seed));
      }
      bundle.manifest.command = "retention";
      bundle.manifest.measure = std::string(to_string(m));
      bundle.manifest.samples_per_set = max_samples(sets);
      bundle.manifest.seed = seed;
      bundle.manifest.parameters["samples"] = ret_samples;
      bundle.manifest.parameters["metric"] = std::string(to_string(metric));
      bundle.manifest.parameters["fractions"] = join_numbers(fractions);
      bundle.manifest.parameters["orderings"] = join(ret_orderings);
      bundle.manifest.parameters["retained_count"] = "ceil(fraction * rows)";
      bundle.manifest.parameters["tie_break"] = "id";
      const auto manifest = write_reports(bundle, ret_opts.out_dir);
      err << "wrote " << bundle.retention.size() << " curves; manifest " << manifest.string() << "\n";
      return kExitOk;
    }

    if (hist->parsed()) {
      const Measure m = parse_measure(hist_opts.measure);
      std::vector<std::pair<std::string, double>> values;
      ReportBundle bundle;
      std::vector<std::string> spec;
      for (const auto& item : hist_populations) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
          throw UsageError("--populations: expected LABEL=FILE, got '" + item + "'");
        }
        const std::string label = item.substr(0, eq);
        const std::string file = item.substr(eq + 1);
        for (const auto& row : load_and_score(file, m, hist_opts.threads)) {
          values.emplace_back(label, display_value(row.uncertainty));
        }
        spec.push_back(item);
      }
      bundle.histogram = histogram(values, hist_bins);
      bundle.manifest.command = "histogram";
      bundle.manifest.measure = std::string(to_string(m));
      bundle.manifest.parameters["populations"] = join(spec);
      bundle.manifest.parameters["bins"] = std::to_string(hist_bins);
      const auto manifest = write_reports(bundle, hist_opts.out_dir);
      err << "histogram over " << values.size() << " values; manifest " << manifest.string() << "\n";
      return kExitOk;
    }

    if (bins->parsed()) {
      const Measure m = parse_measure(bins_opts.measure);
      const auto sets = read_sample_file(bins_samples);
      if (sets.empty()) throw DataError(bins_samples, 0, "no records");
      const auto rows = score_all(sets, m, bins_opts.threads);
      ReportBundle bundle;
      bundle.length_bins = length_bins(rows, default_length_bins());
      bundle.manifest.command = "bins";
      bundle.manifest.measure = std::string(to_string(m));
      bundle.manifest.samples_per_set = max_samples(sets);
      bundle.manifest.parameters["samples"] = bins_samples;
      const auto manifest = write_reports(bundle, bins_opts.out_dir);
      err << "binned " << rows.size() << " rows; manifest " << manifest.string() << "\n";
      return kExitOk;
    }

    if (sep->parsed()) {
      const Measure m = parse_measure(sep_opts.measure);
      std::vector<double> in_vals;
      std::vector<double> ood_vals;
      for (const auto& r : load_and_score(sep_in, m, sep_opts.threads)) in_vals.push_back(uncertainty_score(r.uncertainty));
      for (const auto& r : load_and_score(sep_ood, m, sep_opts.threads)) ood_vals.push_back(uncertainty_score(r.uncertainty));
      const double auroc = ood_separation(in_vals, ood_vals);
      out << csv::format_number(auroc) << "\n";
      if (!sep_opts.out_dir.empty()) {
        ReportBundle bundle;
        bundle.manifest.command = "separation";
        bundle.manifest.measure = std::string(to_string(m));
        bundle.manifest.parameters["in"] = sep_in;
        bundle.manifest.parameters["ood"] = sep_ood;
        bundle.manifest.parameters["auroc"] = csv::format_number(auroc);
        write_reports(bundle, sep_opts.out_dir);
      }
      return kExitOk;
    }

    if (sim->parsed()) {
      SimConfig config;
      bool seed_set = false;
      if (!sim_config_path.empty()) {
        config = load_sim_config(sim_config_path, seed_set);
      }
      if (o_vocab->count()) config.vocab_size = sim_flags.vocab_size;
      if (o_count->count()) config.sentence_count = sim_flags.sentence_count;
      if (o_min->count()) config.min_length = sim_flags.min_length;
      if (o_max->count()) config.max_length = sim_flags.max_length;
      if (o_noise->count()) config.noise_rate = sim_flags.noise_rate;
      if (o_n->count()) config.samples = sim_flags.samples;
      if (o_ood->count()) config.ood_fraction = sim_flags.ood_fraction;
      if (o_seed->count()) {
        config.seed = sim_flags.seed;
      } else if (!seed_set) {
        config.seed = env_seed();
      }
      try {
        config.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("simulate: ") + e.what());
      }
      const auto sets = simulate(config, sim_threads);
      write_sample_file(sim_out, sets);

      RunManifest manifest;
      manifest.command = "simulate";
      manifest.samples_per_set = config.samples;
      manifest.seed = config.seed;
      manifest.parameters["vocab_size"] = std::to_string(config.vocab_size);
      manifest.parameters["sentence_count"] = std::to_string(config.sentence_count);
      manifest.parameters["min_length"] = std::to_string(config.min_length);
      manifest.parameters["max_length"] = std::to_string(config.max_length);
      manifest.parameters["noise_rate"] = csv::format_number(config.noise_rate);
      manifest.parameters["ood_fraction"] = csv::format_number(config.ood_fraction);
      const std::string manifest_path = sim_out + ".manifest.json";
      std::ofstream mf(manifest_path, std::ios::binary | std::ios::trunc);
      mf << manifest_json(manifest);
      if (!mf) throw DataError(manifest_path, 0, "write failed");
      err << "simulated " << sets.size() << " sentences into " << sim_out << "\n";
      return kExitOk;
    }

    if (val->parsed()) {
      if (!val_src.empty()) {
        const auto pairs = read_parallel_corpus(val_src, val_ref);
        out << "pairs: " << pairs.size() << "\nerrors: 0\n";
        return kExitOk;
      }
      if (val_samples.empty()) throw UsageError("validate: give --samples or --src/--ref");
      const auto report = validate_sample_file(val_samples);
      out << "lines: " << report.lines << "\n"
          << "records: " << report.records << "\n"
          << "samples: " << report.samples << "\n"
          << "with_reference: " << report.with_reference << "\n"
          << "with_deterministic: " << report.with_deterministic << "\n"
          << "with_sample_logprobs: " << report.with_sample_logprobs << "\n"
          << "errors: " << report.errors.size() << "\n";
      for (const auto& e : report.errors) err << "error: " << e << "\n";
      return report.ok() ? kExitOk : kExitData;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace seqcert::cli
