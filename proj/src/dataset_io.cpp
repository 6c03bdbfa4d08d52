#include "mmad/dataset_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "mmad/error.hpp"

namespace mmad {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kSegmentsHeader{"lp", "system", "doc", "seg_id", "source", "target", "reference"};
const std::vector<std::string> kGoldHeader{"lp", "system", "doc", "seg_id", "category", "severity", "span"};
const std::vector<std::string> kScoresHeader{"lp", "system", "seg_id", "score"};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    out.emplace_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

Table read_table(const fs::path& path) {
  const std::string text = read_file(path);
  Table t;
  std::size_t pos = 0, line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = split_tabs(line);
    if (!have_header) {
      if (line_no == 1 && cells[0].rfind("\xEF\xBB\xBF", 0) == 0) cells[0].erase(0, 3);
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError(path.string() + ": expected " + std::to_string(t.header.size()) + " columns, got " +
                        std::to_string(cells.size()),
                    line_no);
    }
    for (auto& c : cells) {
      try {
        c = unescape_tsv_cell(c);
      } catch (const InvalidInput& e) {
        throw IoError(path.string() + ": " + e.what(), line_no);
      }
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw IoError(path.string() + ": empty file (header row missing)");
  return t;
}

void expect_header(const Table& t, const std::vector<std::string>& want, const fs::path& path) {
  if (t.header != want) {
    std::string w;
    for (const auto& h : want) w += (w.empty() ? "" : ",") + h;
    throw IoError(path.string() + ": header must be " + w, 1);
  }
}

std::string join_row(std::initializer_list<std::string_view> cells) {
  std::string out;
  bool first = true;
  for (auto c : cells) {
    if (!first) out.push_back('\t');
    first = false;
    out += escape_tsv_cell(c);
  }
  out.push_back('\n');
  return out;
}

ordered_json annotation_to_json(const ErrorAnnotation& a) {
  ordered_json j;
  j["error_span"] = a.span.all ? std::string("all") : a.span.text;
  j["category"] = a.category.str();
  if (a.severity) {
    j["severity"] = std::string(to_string(*a.severity));
  } else {
    j["severity"] = nullptr;
  }
  j["is_source_error"] = a.is_source_error ? "yes" : "no";
  return j;
}

ErrorAnnotation annotation_from_json(const ordered_json& j) {
  ErrorAnnotation a;
  a.category = CategoryPath::parse(j.at("category").get<std::string>());
  const std::string span = j.at("error_span").get<std::string>();
  a.span = (a.is_non_translation() && span == "all") ? ErrorSpan::whole_segment() : ErrorSpan::of(span);
  if (!j.at("severity").is_null()) {
    a.severity = parse_severity(j.at("severity").get<std::string>());
    if (!a.severity) throw InvalidInput("bad severity " + j.at("severity").dump());
  }
  a.is_source_error = j.value("is_source_error", std::string("no")) == "yes";
  return a;
}

std::vector<std::string> jsonl_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
  }
  return out;
}

double parse_score(const std::string& s, const fs::path& path, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw IoError(path.string() + ": bad score '" + s + "'", line);
  return v;
}

}  // namespace

std::string escape_tsv_cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_tsv_cell(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 1 == s.size()) throw InvalidInput("dangling backslash in cell");
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '\\': out.push_back('\\'); break;
      default: throw InvalidInput(std::string("unknown escape \\") + s[i]);
    }
  }
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, p);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_digest(const fs::path& path) { return sha256_hex(read_file(path)); }

std::vector<TranslationUnit> load_segments(const fs::path& path) {
  const Table t = read_table(path);
  expect_header(t, kSegmentsHeader, path);
  std::vector<TranslationUnit> out;
  std::set<UnitKey> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    TranslationUnit u{r[0], r[2], r[3], r[1], r[4], r[5], std::nullopt};
    if (!r[6].empty()) u.reference_text = r[6];
    for (std::size_t k : {0, 1, 2, 3}) {
      if (r[k].empty()) throw IoError(path.string() + ": empty key column " + kSegmentsHeader[k], t.line_numbers[i]);
    }
    if (u.source_text.empty() || u.hypothesis_text.empty()) {
      throw IoError(path.string() + ": source and target must be nonempty", t.line_numbers[i]);
    }
    if (!seen.insert(u.key()).second) {
      throw IoError(path.string() + ": duplicate key " + u.key().str(), t.line_numbers[i]);
    }
    out.push_back(std::move(u));
  }
  return out;
}

void write_segments(const fs::path& path, std::span<const TranslationUnit> units) {
  std::string out = join_row({"lp", "system", "doc", "seg_id", "source", "target", "reference"});
  for (const auto& u : units) {
    out += join_row({u.language_pair, u.system_id, u.doc_id, u.seg_id, u.source_text, u.hypothesis_text,
                     u.reference_text.value_or("")});
  }
  write_file_atomic(path, out);
}

GoldData load_gold_annotations(const fs::path& path, const ScoreWeights& w) {
  const Table t = read_table(path);
  const bool has_rater = t.header.size() == kGoldHeader.size() + 1 && t.header.back() == "rater";
  if (has_rater) {
    const std::vector<std::string> base(t.header.begin(), t.header.end() - 1);
    Table probe;
    probe.header = base;
    expect_header(probe, kGoldHeader, path);
  } else {
    expect_header(t, kGoldHeader, path);
  }

  GoldData out;
  std::map<UnitKey, std::map<std::string, std::vector<ErrorAnnotation>>> per_rater;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    const UnitKey key{r[0], r[1], r[2], r[3]};
    std::vector<std::string> warns;
    ErrorAnnotation a;
    a.category = CategoryPath::parse(r[4], &warns);
    std::string sev;
    for (char c : r[5]) sev.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (sev == "neutral" || sev == "no-error") a.category = CategoryPath{TopCategory::no_error, ""};
    if (!a.is_no_error()) {
      a.severity = parse_severity(sev);
      if (!a.severity) {
        warns.push_back("severity '" + r[5] + "' for " + a.category.str() + " read as minor");
        a.severity = Severity::minor;
      }
    }
    a.span = (a.is_non_translation() && (r[6] == "all" || r[6].empty())) ? ErrorSpan::whole_segment()
                                                                         : ErrorSpan::of(r[6]);
    for (auto& wmsg : warns) out.warnings.push_back(path.string() + " line " + std::to_string(line) + ": " + wmsg);

    auto& set = out.sets[key];
    set.unit_key = key;
    set.provenance = Provenance::gold;
    set.annotations.push_back(a);
    per_rater[key][has_rater ? r[7] : std::string()].push_back(std::move(a));
  }
  for (const auto& [key, raters] : per_rater) {
    double sum = 0.0;
    for (const auto& [_, anns] : raters) sum += mqm_score(anns, w);
    out.scores[key] = sum / static_cast<double>(raters.size()) + 0.0;
  }
  return out;
}

std::vector<ScoreRecord> read_scores(const fs::path& path) {
  const Table t = read_table(path);
  expect_header(t, kScoresHeader, path);
  std::vector<ScoreRecord> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (!seen.emplace(r[0], r[1], r[2]).second) {
      throw IoError(path.string() + ": duplicate score key " + r[0] + "/" + r[1] + "/" + r[2], t.line_numbers[i]);
    }
    out.push_back({r[0], r[1], r[2], parse_score(r[3], path, t.line_numbers[i])});
  }
  return out;
}

std::string serialize_scores(std::span<const ScoreRecord> records) {
  std::string out = join_row({"lp", "system", "seg_id", "score"});
  for (const auto& r : records) out += join_row({r.language_pair, r.system_id, r.seg_id, format_number(r.score)});
  return out;
}

void write_scores(const fs::path& path, std::span<const ScoreRecord> records) {
  write_file_atomic(path, serialize_scores(records));
}

std::vector<ScoreRecord> read_gold_scores(const fs::path& path, const ScoreWeights& w) {
  const Table t = read_table(path);
  if (t.header == kScoresHeader) return read_scores(path);
  const GoldData g = load_gold_annotations(path, w);
  std::vector<ScoreRecord> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& [key, score] : g.scores) {
    if (!seen.emplace(key.language_pair, key.system_id, key.seg_id).second) {
      throw IoError(path.string() + ": segment id " + key.seg_id + " appears in two documents for system " +
                    key.system_id);
    }
    out.push_back({key.language_pair, key.system_id, key.seg_id, score});
  }
  return out;
}

std::vector<ScoredSegment> join_scores(std::span<const ScoreRecord> metric, std::span<const ScoreRecord> gold) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, double> g;
  for (const auto& r : gold) g[{r.language_pair, r.system_id, r.seg_id}] = r.score;
  std::vector<ScoredSegment> out;
  std::vector<std::string> missing_gold, missing_metric;
  std::set<Key> used;
  for (const auto& r : metric) {
    const Key k{r.language_pair, r.system_id, r.seg_id};
    const auto it = g.find(k);
    if (it == g.end()) {
      missing_gold.push_back(r.language_pair + "/" + r.system_id + "/" + r.seg_id);
      continue;
    }
    used.insert(k);
    out.push_back({r.language_pair, r.seg_id, r.system_id, r.score, it->second});
  }
  for (const auto& [k, _] : g) {
    if (!used.count(k)) missing_metric.push_back(std::get<0>(k) + "/" + std::get<1>(k) + "/" + std::get<2>(k));
  }
  if (!missing_gold.empty() || !missing_metric.empty()) {
    std::string msg = "score files do not share keys;";
    const auto list = [&](const char* label, const std::vector<std::string>& keys) {
      if (keys.empty()) return;
      msg += std::string(" ") + label + " (" + std::to_string(keys.size()) + "):";
      for (std::size_t i = 0; i < keys.size() && i < 10; ++i) msg += " " + keys[i];
      if (keys.size() > 10) msg += " ...";
    };
    list("missing from gold", missing_gold);
    list("missing from metric", missing_metric);
    throw InvalidInput(msg);
  }
  return out;
}

std::string serialize_annotations(std::span<const OutputRecord> records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["lp"] = r.language_pair;
    j["system"] = r.system_id;
    j["doc"] = r.doc_id;
    j["seg_id"] = r.seg_id;
    j["provenance"] = std::string(to_string(r.provenance));
    j["score"] = r.score;
    j["annotations"] = ordered_json::array();
    for (const auto& a : r.annotations) j["annotations"].push_back(annotation_to_json(a));
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void write_annotations(const fs::path& path, std::span<const OutputRecord> records) {
  write_file_atomic(path, serialize_annotations(records));
}

std::vector<OutputRecord> read_annotations(const fs::path& path) {
  std::vector<OutputRecord> out;
  const auto lines = jsonl_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      const auto j = ordered_json::parse(lines[i]);
      OutputRecord r;
      r.language_pair = j.at("lp").get<std::string>();
      r.system_id = j.at("system").get<std::string>();
      r.doc_id = j.at("doc").get<std::string>();
      r.seg_id = j.at("seg_id").get<std::string>();
      const auto prov = parse_provenance(j.at("provenance").get<std::string>());
      if (!prov) throw InvalidInput("unknown provenance");
      r.provenance = *prov;
      r.score = j.at("score").get<double>();
      for (const auto& a : j.at("annotations")) r.annotations.push_back(annotation_from_json(a));
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": " + e.what(), i + 1);
    }
  }
  return out;
}

std::string serialize_transcripts(std::span<const TranscriptRecord> records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["call_id"] = r.call_id;
    j["tag"] = r.call.tag.str();
    j["stage"] = r.call.tag.stage;
    j["dimension"] = r.call.tag.dimension;
    j["round"] = r.call.tag.round;
    j["request_digest"] = r.call.request_digest;
    j["messages"] = ordered_json::array();
    for (const auto& m : r.call.messages) {
      j["messages"].push_back(ordered_json{{"role", std::string(to_string(m.role))}, {"content", m.content}});
    }
    j["response_content"] = r.call.response_content;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void write_transcripts(const fs::path& path, std::span<const TranscriptRecord> records) {
  write_file_atomic(path, serialize_transcripts(records));
}

std::vector<TranscriptRecord> read_transcripts(const fs::path& path) {
  std::vector<TranscriptRecord> out;
  const auto lines = jsonl_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      const auto j = ordered_json::parse(lines[i]);
      TranscriptRecord r;
      r.call_id = j.at("call_id").get<std::int64_t>();
      const std::string tag = j.at("tag").get<std::string>();
      // The unit and speaker live only in the rendered tag.
      std::vector<std::string> parts;
      std::size_t pos = 0;
      while (true) {
        const auto bar = tag.find('|', pos);
        parts.push_back(tag.substr(pos, bar == std::string::npos ? std::string::npos : bar - pos));
        if (bar == std::string::npos) break;
        pos = bar + 1;
      }
      if (parts.size() != 5) throw InvalidInput("malformed tag " + tag);
      r.call.tag = CallTag{parts[0], j.at("stage").get<std::string>(), j.at("dimension").get<std::string>(),
                           j.at("round").get<int>(), parts[4]};
      r.call.request_digest = j.at("request_digest").get<std::string>();
      for (const auto& m : j.at("messages")) {
        const auto role = parse_role(m.at("role").get<std::string>());
        if (!role) throw InvalidInput("unknown role");
        r.call.messages.push_back({*role, m.at("content").get<std::string>()});
      }
      r.call.response_content = j.at("response_content").get<std::string>();
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": " + e.what(), i + 1);
    }
  }
  return out;
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  ordered_json j;
  j["run_id"] = m.run_id;
  j["command"] = m.command;
  j["config"] = m.config;
  j["template_versions"] = m.template_versions;
  j["dataset_digests"] = m.dataset_digests;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["calls_per_stage"] = m.calls_per_stage;
  j["total_calls"] = m.total_calls;
  j["cache_hits"] = m.cache_hits;
  j["remote_calls"] = m.remote_calls;
  j["units"] = m.units;
  j["hard_failures"] = m.hard_failures;
  j["warnings"] = m.warnings;
  j["errors"] = m.errors;
  write_file_atomic(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& path) {
  try {
    const auto j = ordered_json::parse(read_file(path));
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.template_versions = j.at("template_versions").get<std::map<std::string, int>>();
    m.dataset_digests = j.at("dataset_digests").get<std::map<std::string, std::string>>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.calls_per_stage = j.at("calls_per_stage").get<std::map<std::string, std::int64_t>>();
    m.total_calls = j.at("total_calls").get<std::int64_t>();
    m.cache_hits = j.at("cache_hits").get<std::int64_t>();
    m.remote_calls = j.at("remote_calls").get<std::int64_t>();
    m.units = j.at("units").get<std::int64_t>();
    m.hard_failures = j.at("hard_failures").get<std::int64_t>();
    m.warnings = j.at("warnings").get<std::int64_t>();
    m.errors = j.at("errors").get<std::int64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string render_bucket_report(const BucketDistribution& d, std::string_view title) {
  char buf[128];
  std::string out(title);
  out += "\nbucket\tcount\tpercent\n";
  const auto row = [&](const char* name, std::size_t count, double pct) {
    std::snprintf(buf, sizeof buf, "%s\t%zu\t%.2f\n", name, count, pct);
    out += buf;
  };
  row("HQ", d.n_hq, d.hq);
  row("MQ", d.n_mq, d.mq);
  row("LQ", d.n_lq, d.lq);
  std::snprintf(buf, sizeof buf, "total\t%zu\t%.2f\n", d.n, d.hq + d.mq + d.lq);
  out += buf;
  return out;
}

}  // namespace mmad
