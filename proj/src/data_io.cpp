#include "seqcert/data_io.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "seqcert/csv.hpp"

namespace seqcert {

using nlohmann::json;

namespace {

std::string where(const std::string& path, std::size_t line) {
  return line ? path + ":" + std::to_string(line) : path;
}

Hypothesis parse_hypothesis(const json& obj, const std::string& what, const std::string& path, std::size_t line) {
  if (!obj.is_object()) throw DataError(path, line, what + " must be an object");
  Hypothesis h;
  if (auto it = obj.find("tokens"); it != obj.end()) {
    if (!it->is_array()) throw DataError(path, line, what + ".tokens must be an array of strings");
    std::vector<std::string> toks;
    toks.reserve(it->size());
    for (const auto& t : *it) {
      if (!t.is_string()) throw DataError(path, line, what + ".tokens must be an array of strings");
      if (t.get_ref<const std::string&>().empty()) throw DataError(path, line, what + ".tokens contains an empty token");
      toks.push_back(t.get<std::string>());
    }
    h.tokens = TokenSeq(std::move(toks));
  } else if (auto tx = obj.find("text"); tx != obj.end()) {
    if (!tx->is_string()) throw DataError(path, line, what + ".text must be a string");
    h.tokens = tokenize(tx->get_ref<const std::string&>());
  } else {
    throw DataError(path, line, what + " needs 'tokens' or 'text'");
  }
  if (auto lp = obj.find("logprob"); lp != obj.end() && !lp->is_null()) {
    if (!lp->is_number()) throw DataError(path, line, what + ".logprob must be a number");
    const double v = lp->get<double>();
    if (!std::isfinite(v)) throw DataError(path, line, what + ".logprob must be finite");
    if (v > 0.0) {
      throw DataError(path, line, what + ".logprob = " + lp->dump() + " is positive (natural-log probabilities are <= 0)");
    }
    h.logprob = v;
  }
  return h;
}

json hypothesis_json(const Hypothesis& h) {
  json obj;
  obj["tokens"] = h.tokens.tokens();
  if (h.logprob) obj["logprob"] = *h.logprob;
  return obj;
}

std::string optional_string(const json& rec, const char* key, const std::string& path, std::size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return {};
  if (!it->is_string()) throw DataError(path, line, std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string(), 0, "cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError(path.string(), 0, "write failed");
}

}  // namespace

DataError::DataError(const std::string& path, std::size_t line, const std::string& message)
    : std::runtime_error(where(path, line) + ": " + message), line_(line) {}

SampleSet parse_sample_record(std::string_view json_line, const std::string& path, std::size_t line) {
  json rec;
  try {
    rec = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw DataError(path, line, std::string("malformed JSON: ") + e.what());
  }
  if (!rec.is_object()) throw DataError(path, line, "record must be a JSON object");

  SampleSet set;
  auto id = rec.find("id");
  if (id == rec.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
    throw DataError(path, line, "missing or non-string 'id'");
  }
  set.id = id->get<std::string>();
  const std::string tag = "record '" + set.id + "': ";

  set.source = optional_string(rec, "source", path, line);
  set.population = optional_string(rec, "population", path, line);

  auto samples = rec.find("samples");
  if (samples == rec.end() || !samples->is_array()) throw DataError(path, line, tag + "missing 'samples' array");
  if (samples->empty()) throw DataError(path, line, tag + "empty 'samples' array");
  for (std::size_t k = 0; k < samples->size(); ++k) {
    set.samples.push_back(parse_hypothesis((*samples)[k], tag + "samples[" + std::to_string(k) + "]", path, line));
  }

  if (auto det = rec.find("deterministic"); det != rec.end() && !det->is_null()) {
    set.deterministic = parse_hypothesis(*det, tag + "deterministic", path, line);
  }
  if (auto ref = rec.find("reference"); ref != rec.end() && !ref->is_null()) {
    if (!ref->is_string()) throw DataError(path, line, tag + "'reference' must be a string");
    auto toks = tokenize(ref->get_ref<const std::string&>());
    if (toks.empty()) throw DataError(path, line, tag + "empty reference");
    set.reference = std::move(toks);
  }
  return set;
}

std::string to_json_line(const SampleSet& set) {
  json rec;
  rec["id"] = set.id;
  rec["source"] = set.source;
  if (!set.population.empty()) rec["population"] = set.population;
  json samples = json::array();
  for (const auto& h : set.samples) samples.push_back(hypothesis_json(h));
  rec["samples"] = std::move(samples);
  if (set.deterministic) rec["deterministic"] = hypothesis_json(*set.deterministic);
  if (set.reference) rec["reference"] = detokenize(*set.reference);
  return rec.dump();
}

SampleReader::SampleReader(const std::filesystem::path& path) : path_(path.string()), in_(path, std::ios::binary) {
  if (!in_) throw DataError(path_, 0, "cannot open sample file");
}

std::optional<SampleSet> SampleReader::next() {
  std::string buf;
  while (std::getline(in_, buf)) {
    ++line_no_;
    if (is_blank(buf)) continue;
    strip_cr(buf);
    auto set = parse_sample_record(buf, path_, line_no_);
    auto [it, inserted] = seen_.try_emplace(set.id, line_no_);
    if (!inserted) {
      throw DataError(path_, line_no_,
                      "duplicate id '" + set.id + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    record_line_ = line_no_;
    return set;
  }
  if (in_.bad()) throw DataError(path_, line_no_, "read error");
  return std::nullopt;
}

std::vector<SampleSet> read_sample_file(const std::filesystem::path& path) {
  SampleReader reader(path);
  std::vector<SampleSet> out;
  while (auto set = reader.next()) out.push_back(std::move(*set));
  return out;
}

void write_sample_file(const std::filesystem::path& path, std::span<const SampleSet> sets) {
  auto out = open_out(path);
  for (const auto& s : sets) out << to_json_line(s) << '\n';
  finish(out, path);
}

ValidationReport validate_sample_file(const std::filesystem::path& path) {
  ValidationReport report;
  const std::string p = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    report.errors.push_back(DataError(p, 0, "cannot open sample file").what());
    return report;
  }
  std::map<std::string, std::size_t> seen;
  std::string buf;
  while (std::getline(in, buf)) {
    ++report.lines;
    if (is_blank(buf)) continue;
    strip_cr(buf);
    try {
      auto set = parse_sample_record(buf, p, report.lines);
      auto [it, inserted] = seen.try_emplace(set.id, report.lines);
      if (!inserted) {
        throw DataError(p, report.lines,
                        "duplicate id '" + set.id + "' (first seen on line " + std::to_string(it->second) + ")");
      }
      ++report.records;
      report.samples += set.samples.size();
      if (set.reference) ++report.with_reference;
      if (set.deterministic) ++report.with_deterministic;
      if (std::ranges::all_of(set.samples, [](const Hypothesis& h) { return h.logprob.has_value(); })) {
        ++report.with_sample_logprobs;
      }
    } catch (const DataError& e) {
      report.errors.emplace_back(e.what());
    }
  }
  return report;
}

std::vector<CorpusPair> read_parallel_corpus(const std::filesystem::path& src_path,
                                             const std::filesystem::path& ref_path) {
  auto read_lines = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError(p.string(), 0, "cannot open corpus file");
    std::vector<std::string> lines;
    std::string buf;
    while (std::getline(in, buf)) {
      strip_cr(buf);
      lines.push_back(std::move(buf));
    }
    return lines;
  };
  auto src = read_lines(src_path);
  auto ref = read_lines(ref_path);
  if (src.size() != ref.size()) {
    throw DataError(ref_path.string(), 0,
                    "line count mismatch: source has " + std::to_string(src.size()) + " lines, reference has " +
                        std::to_string(ref.size()));
  }
  std::vector<CorpusPair> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (tokenize(ref[i]).empty()) throw DataError(ref_path.string(), i + 1, "empty reference line");
    out.push_back({std::move(src[i]), std::move(ref[i])});
  }
  return out;
}

std::string manifest_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["measure"] = m.measure;
  j["samples_per_set"] = m.samples_per_set;
  j["seed"] = m.seed;
  j["smoothing"] = m.smoothing;
  j["bleu_max_order"] = m.bleu_max_order;
  j["tool_version"] = m.tool_version;
  j["parameters"] = m.parameters;
  return j.dump(2) + "\n";
}

std::filesystem::path write_reports(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError(out_dir.string(), 0, "cannot create output directory: " + ec.message());

  auto emit = [&](std::string_view name, auto&& writer) {
    const auto path = out_dir / name;
    auto out = open_out(path);
    writer(out);
    finish(out, path);
  };
  if (!bundle.scores.empty()) emit(report_files::kScores, [&](std::ostream& o) { csv::write_scores(o, bundle.scores); });
  if (!bundle.retention.empty()) {
    emit(report_files::kRetention, [&](std::ostream& o) { csv::write_retention(o, bundle.retention); });
  }
  if (bundle.histogram) {
    emit(report_files::kHistogram, [&](std::ostream& o) { csv::write_histogram(o, *bundle.histogram); });
  }
  if (!bundle.length_bins.empty()) {
    emit(report_files::kLengthBins, [&](std::ostream& o) { csv::write_length_bins(o, bundle.length_bins); });
  }
  if (!bundle.density.empty()) {
    emit(report_files::kDensity, [&](std::ostream& o) { csv::write_density(o, bundle.density); });
  }
  const auto manifest = out_dir / report_files::kManifest;
  emit(report_files::kManifest, [&](std::ostream& o) { o << manifest_json(bundle.manifest); });
  return manifest;
}

}  // namespace seqcert
