#include "mmad/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <iostream>
#include <set>
#include <sstream>

#include "mmad/dataset_io.hpp"
#include "mmad/error.hpp"
#include "mmad/meta_eval.hpp"
#include "mmad/pipeline.hpp"
#include "mmad/prompts.hpp"

namespace fs = std::filesystem;

namespace mmad::cli {

namespace {

using Settings = std::map<std::string, std::string>;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Every key a config file may carry; a key valid for some other command is
// ignored rather than rejected so one file can serve several commands.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "config",   "segments",    "gold",        "out",         "backend",     "script",
      "model",    "api-base",    "api-key-env", "strategy",    "topic",       "max-rounds",
      "dimensions", "shots",     "temperature", "concurrency", "pool",        "epsilon",
      "method",   "lang-pair",   "scores",      "annotations", "cache-dir",   "assets",
      "max-tokens", "lean-minor", "allow-zero-shot", "substring-overlap"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Command {
 public:
  Command(CLI::App& parent, std::string name, std::string description)
      : app_(parent.add_subcommand(std::move(name), std::move(description))) {
    value("config", "flat key=value file; flags override it");
  }

  Command& value(const std::string& name, const std::string& description) {
    options_[name] = app_->add_option("--" + name, values_[name], description);
    return *this;
  }
  Command& flag(const std::string& name, const std::string& description) {
    options_[name] = app_->add_flag("--" + name, description);
    flags_.insert(name);
    return *this;
  }

  CLI::App* app() const { return app_; }
  bool parsed() const { return app_->parsed(); }

  Settings resolve() const {
    Settings s;
    if (options_.at("config")->count() > 0) {
      std::string text;
      try {
        text = read_file(values_.at("config"));
      } catch (const Error& e) {
        throw UsageError(std::string("cannot read config: ") + e.what());
      }
      Settings file;
      try {
        file = parse_config_text(text);
      } catch (const InvalidInput& e) {
        throw UsageError(e.what());
      }
      for (auto& [k, v] : file) {
        if (!known_keys().contains(k)) throw UsageError("unknown config key '" + k + "'");
        if (options_.contains(k) && k != "config") s[k] = v;
      }
    }
    for (const auto& [name, opt] : options_) {
      if (name == "config" || opt->count() == 0) continue;
      s[name] = flags_.contains(name) ? "true" : values_.at(name);
    }
    return s;
  }

 private:
  CLI::App* app_;
  std::map<std::string, CLI::Option*> options_;
  std::map<std::string, std::string> values_;
  std::set<std::string> flags_;
};

std::optional<std::string> lookup(const Settings& s, const std::string& key) {
  const auto it = s.find(key);
  if (it == s.end()) return std::nullopt;
  return it->second;
}

std::string require(const Settings& s, const std::string& key) {
  auto v = lookup(s, key);
  if (!v || v->empty()) throw UsageError("--" + key + " is required");
  return *v;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) throw UsageError("--" + key + " expects an integer, got '" + text + "'");
  return v;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) throw UsageError("--" + key + " expects a number, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw UsageError("--" + key + " expects true or false, got '" + text + "'");
}

bool get_bool(const Settings& s, const std::string& key, bool fallback) {
  const auto v = lookup(s, key);
  return v ? to_bool(key, *v) : fallback;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string abs_path(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Everything needed to execute (and later replay) an evaluate/baseline run.
struct RunSetup {
  RunConfig run;
  BackendConfig backend;
  fs::path segments;
  fs::path out;
  fs::path assets;
  std::optional<fs::path> script;
  std::optional<std::string> lang_pair;
  Settings resolved;  // canonical settings written to the manifest
};

RunSetup make_setup(const Settings& s, bool baseline) {
  RunSetup su;
  su.segments = abs_path(require(s, "segments"));
  su.out = abs_path(require(s, "out"));

  const std::string method = lookup(s, "method").value_or(baseline ? "" : "mmad");
  if (baseline && method.empty()) throw UsageError("--method is required (gemba or eaprompt)");
  const auto m = parse_method(method);
  if (!m || (baseline && *m == Method::mmad)) {
    throw UsageError("unknown method '" + method + "'" + (baseline ? " (gemba or eaprompt)" : ""));
  }
  su.run.method = *m;

  const std::string backend = lookup(s, "backend").value_or("remote");
  const auto kind = parse_backend_kind(backend);
  if (!kind) throw UsageError("unknown backend '" + backend + "' (remote, mock or replay)");
  su.backend.kind = *kind;
  su.backend.api_base = lookup(s, "api-base").value_or("https://api.openai.com/v1");
  su.backend.api_key_env = lookup(s, "api-key-env").value_or("OPENAI_API_KEY");
  su.backend.cache_dir = abs_path(lookup(s, "cache-dir").value_or((su.out / "cache").string()));
  if (*kind == BackendKind::mock) su.script = abs_path(require(s, "script"));

  su.run.request.model_id = lookup(s, "model").value_or(su.run.request.model_id);
  if (auto v = lookup(s, "temperature")) su.run.request.temperature = to_double("temperature", *v);
  if (auto v = lookup(s, "max-tokens")) su.run.request.max_tokens = static_cast<int>(to_integer("max-tokens", *v));

  if (auto v = lookup(s, "strategy")) {
    const auto st = parse_strategy(*v);
    if (!st) throw UsageError("unknown strategy '" + *v + "'");
    su.run.debate.strategy = *st;
  }
  if (auto v = lookup(s, "topic")) {
    const auto t = parse_debate_topic(*v);
    if (!t) throw UsageError("unknown topic '" + *v + "'");
    su.run.debate.topic = *t;
  }
  if (auto v = lookup(s, "max-rounds")) su.run.debate.max_rounds = static_cast<int>(to_integer("max-rounds", *v));
  su.run.debate.lean_minor = get_bool(s, "lean-minor", su.run.debate.lean_minor);

  if (auto v = lookup(s, "dimensions")) {
    su.run.dimensions.clear();
    for (const auto& item : split_list(*v)) {
      const auto d = parse_dimension(item);
      if (!d) throw UsageError("unknown dimension '" + item + "'");
      su.run.dimensions.push_back(*d);
    }
  }
  if (auto v = lookup(s, "shots")) {
    const auto n = to_integer("shots", *v);
    if (n < 0) throw UsageError("--shots must be non-negative");
    su.run.shots = static_cast<std::size_t>(n);
  }
  su.run.allow_zero_shot = get_bool(s, "allow-zero-shot", false);
  su.run.substring_overlap = get_bool(s, "substring-overlap", false);
  if (auto v = lookup(s, "concurrency")) su.run.concurrency = static_cast<int>(to_integer("concurrency", *v));
  su.backend.max_in_flight = su.run.concurrency;

  su.assets = abs_path(lookup(s, "assets").value_or(PromptRegistry::default_asset_dir().string()));
  su.lang_pair = lookup(s, "lang-pair");

  try {
    su.run.validate();
    su.backend.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }

  auto& r = su.resolved;
  r["method"] = std::string(to_string(su.run.method));
  r["backend"] = std::string(to_string(su.backend.kind));
  if (su.script) r["script"] = su.script->string();
  r["api-base"] = su.backend.api_base;
  r["api-key-env"] = su.backend.api_key_env;
  r["cache-dir"] = su.backend.cache_dir->string();
  r["model"] = su.run.request.model_id;
  r["temperature"] = format_number(su.run.request.temperature);
  if (su.run.request.max_tokens) r["max-tokens"] = std::to_string(*su.run.request.max_tokens);
  r["strategy"] = std::string(to_string(su.run.debate.strategy));
  r["topic"] = std::string(to_string(su.run.debate.topic));
  r["max-rounds"] = std::to_string(su.run.debate.max_rounds);
  r["lean-minor"] = su.run.debate.lean_minor ? "true" : "false";
  std::string dims;
  for (auto d : su.run.dimensions) dims += (dims.empty() ? "" : ",") + std::string(to_string(d));
  r["dimensions"] = dims;
  r["shots"] = std::to_string(su.run.shots);
  r["allow-zero-shot"] = su.run.allow_zero_shot ? "true" : "false";
  r["substring-overlap"] = su.run.substring_overlap ? "true" : "false";
  r["concurrency"] = std::to_string(su.run.concurrency);
  r["segments"] = su.segments.string();
  r["out"] = su.out.string();
  r["assets"] = su.assets.string();
  if (su.lang_pair) r["lang-pair"] = *su.lang_pair;
  return su;
}

std::vector<TranslationUnit> load_units(const RunSetup& su) {
  auto units = load_segments(su.segments);
  if (su.lang_pair) {
    std::erase_if(units, [&](const TranslationUnit& u) { return u.language_pair != *su.lang_pair; });
  }
  if (units.empty()) throw InvalidInput("no segments to evaluate in " + su.segments.string());
  return units;
}

struct RunOutcome {
  RunManifest manifest;
  Gateway::Stats stats;
};

RunOutcome execute_run(const RunSetup& su, const std::string& command, std::ostream& out, std::ostream& err) {
  const auto registry = PromptRegistry::load(su.assets);
  const auto units = load_units(su);
  MockScript script;
  if (su.script) script = MockScript::load_jsonl(*su.script);
  Gateway gateway(su.backend, std::move(script));

  RunManifest m;
  m.command = command;
  m.config = su.resolved;
  m.template_versions = registry.template_versions();
  m.dataset_digests["segments"] = file_digest(su.segments);
  if (su.script) m.dataset_digests["script"] = file_digest(*su.script);
  m.started_at = utc_now();
  m.run_id = sha256_hex(nlohmann::json(m.config).dump() + m.started_at).substr(0, 16);

  const auto results = run_units(units, su.run, registry, gateway);
  write_run_outputs(RunFiles::in(su.out), results, m);
  const auto stats = gateway.stats();
  m.cache_hits = stats.cache_hits;
  m.remote_calls = stats.remote_calls;
  m.finished_at = utc_now();
  write_manifest(RunFiles::in(su.out).manifest, m);

  std::string log;
  for (const auto& r : results) {
    if (r.failed) log += "failure\t" + r.failure + "\n";
    for (const auto& e : r.errors) log += "error\t" + e + "\n";
    for (const auto& w : r.warnings) log += "warning\t" + w + "\n";
  }
  write_file_atomic(su.out / "run.log", log);
  for (const auto& r : results) {
    if (r.failed) err << "unit failed: " << r.failure << "\n";
  }

  out << command << ": " << m.units << " units, " << m.hard_failures << " failed, " << m.total_calls
      << " calls (" << m.remote_calls << " remote, " << m.cache_hits << " cache hits), " << m.warnings
      << " warnings, " << m.errors << " errors\n";
  out << "outputs in " << su.out.string() << "\n";
  return {std::move(m), stats};
}

int cmd_run(const Command& c, bool baseline, std::ostream& out, std::ostream& err) {
  const auto su = make_setup(c.resolve(), baseline);
  const auto outcome = execute_run(su, baseline ? "baseline" : "evaluate", out, err);
  return outcome.manifest.hard_failures > 0 ? kExitFailure : kExitOk;
}

int cmd_replay(const Command& c, std::ostream& out, std::ostream& err) {
  const auto s = c.resolve();
  const fs::path run_dir = abs_path(require(s, "out"));
  const auto original = read_manifest(RunFiles::in(run_dir).manifest);
  if (original.command != "evaluate" && original.command != "baseline") {
    throw InvalidInput("manifest command '" + original.command + "' cannot be replayed");
  }
  Settings cfg = original.config;
  cfg["backend"] = "replay";
  cfg.erase("script");
  cfg["out"] = (run_dir / "replay").string();
  if (auto v = lookup(s, "cache-dir")) cfg["cache-dir"] = *v;
  if (auto v = lookup(s, "concurrency")) cfg["concurrency"] = *v;
  const auto su = make_setup(cfg, original.command == "baseline");

  const auto digest = file_digest(su.segments);
  if (const auto it = original.dataset_digests.find("segments");
      it != original.dataset_digests.end() && it->second != digest) {
    err << "replay: " << su.segments.string() << " changed since the run\n";
    return kExitFailure;
  }

  const auto outcome = execute_run(su, "replay", out, err);
  const auto a = RunFiles::in(run_dir);
  const auto b = RunFiles::in(su.out);
  const std::pair<fs::path, fs::path> compared[] = {
      {a.annotations, b.annotations}, {a.scores, b.scores}, {a.report, b.report}, {a.transcripts, b.transcripts}};
  bool identical = true;
  for (const auto& [x, y] : compared) {
    const bool same = read_file(x) == read_file(y);
    identical = identical && same;
    out << "replay " << (same ? "identical" : "DIFFERS") << ": " << x.filename().string() << "\n";
  }
  out << "replay remote calls: " << outcome.stats.remote_calls << "\n";
  if (!identical || outcome.stats.remote_calls != 0 || outcome.manifest.hard_failures > 0) return kExitFailure;
  return kExitOk;
}

template <class T>
void filter_lp(std::vector<T>& v, const std::optional<std::string>& lp) {
  if (lp) std::erase_if(v, [&](const T& r) { return r.language_pair != *lp; });
}

std::string num_or_undefined(const std::optional<double>& v) { return v ? format_number(*v) : "undefined"; }

std::string render_meta_report(const MetaReport& r) {
  std::string s = "meta-evaluation: " + r.label + "\n";
  s += "systems\t" + std::to_string(r.n_systems) + "\n";
  s += "segments\t" + std::to_string(r.n_segments) + "\n";
  s += "segment_pairs\t" + std::to_string(r.n_pairs) + "\n";
  s += "sys_pairwise_acc\t" + num_or_undefined(r.sys_pairwise_acc) + "\n";
  s += "sys_pearson\t" + num_or_undefined(r.sys_pearson) + "\n";
  s += "seg_acc_t\t" + num_or_undefined(r.seg_acc_t) + "\n";
  s += "seg_acc_t_epsilon\t" + format_number(r.seg_acc_t_epsilon) + "\n";
  s += "seg_pearson\t" + num_or_undefined(r.seg_pearson) + "\n";
  s += "meta\t" + num_or_undefined(r.meta) + "\n";
  for (const auto& n : r.notes) s += "note\t" + n + "\n";
  return s;
}

nlohmann::ordered_json meta_report_json(const MetaReport& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["n_systems"] = r.n_systems;
  j["n_segments"] = r.n_segments;
  j["n_pairs"] = r.n_pairs;
  j["sys_pairwise_acc"] = opt(r.sys_pairwise_acc);
  j["sys_pearson"] = opt(r.sys_pearson);
  j["seg_acc_t"] = opt(r.seg_acc_t);
  j["seg_acc_t_epsilon"] = r.seg_acc_t_epsilon;
  j["seg_pearson"] = opt(r.seg_pearson);
  j["meta"] = opt(r.meta);
  j["notes"] = r.notes;
  return j;
}

int cmd_meta_eval(const Command& c, std::ostream& out) {
  const auto s = c.resolve();
  auto metric = read_scores(require(s, "scores"));
  auto gold = read_gold_scores(require(s, "gold"));
  const auto lp = lookup(s, "lang-pair");
  filter_lp(metric, lp);
  filter_lp(gold, lp);
  MetaOptions opts;
  if (auto v = lookup(s, "epsilon")) {
    opts.epsilon = to_double("epsilon", *v);
    if (*opts.epsilon < 0.0) throw UsageError("--epsilon must be non-negative");
  }
  const auto joined = join_scores(metric, gold);
  if (joined.empty()) throw InvalidInput("no scored segments to meta-evaluate");

  std::vector<MetaReport> reports;
  for (auto& [label, r] : meta_evaluate_by_pair(joined, opts)) reports.push_back(std::move(r));
  if (get_bool(s, "pool", false)) reports.push_back(meta_evaluate_pooled(joined, opts));

  std::string text;
  auto json = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    text += (text.empty() ? "" : "\n") + render_meta_report(r);
    json.push_back(meta_report_json(r));
  }
  out << text;
  if (auto dir = lookup(s, "out")) {
    write_file_atomic(fs::path(*dir) / "meta_report.txt", text);
    write_file_atomic(fs::path(*dir) / "meta_report.json", json.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_span_eval(const Command& c, std::ostream& out, std::ostream& err) {
  const auto s = c.resolve();
  auto predicted = read_annotations(require(s, "annotations"));
  const auto gold = load_gold_annotations(require(s, "gold"));
  for (const auto& w : gold.warnings) err << "gold: " << w << "\n";
  filter_lp(predicted, lookup(s, "lang-pair"));

  std::vector<SpanPRF> per_segment;
  std::vector<std::string> missing;
  for (const auto& rec : predicted) {
    const auto it = gold.sets.find(rec.key());
    if (it == gold.sets.end()) {
      missing.push_back(rec.key().str());
      continue;
    }
    per_segment.push_back(span_prf(AnnotationSet{rec.key(), rec.annotations, rec.provenance}, it->second));
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " predicted segments have no gold annotations:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    throw InvalidInput(msg);
  }
  if (per_segment.empty()) throw InvalidInput("no predicted segments to compare");

  const auto micro = span_prf_micro(per_segment);
  std::string text = "span P/R/F1 (micro-averaged over " + std::to_string(per_segment.size()) + " segments)\n";
  text += "precision\t" + format_number(micro.precision) + "\n";
  text += "recall\t" + format_number(micro.recall) + "\n";
  text += "f1\t" + format_number(micro.f1) + "\n";
  text += "matches\t" + std::to_string(micro.matches) + "\n";
  text += "predicted\t" + std::to_string(micro.n_predicted) + "\n";
  text += "gold\t" + std::to_string(micro.n_gold) + "\n";
  out << text;
  if (auto dir = lookup(s, "out")) write_file_atomic(fs::path(*dir) / "span_report.txt", text);
  return kExitOk;
}

int cmd_report(const Command& c, std::ostream& out) {
  const auto s = c.resolve();
  auto scores = read_scores(require(s, "scores"));
  filter_lp(scores, lookup(s, "lang-pair"));
  const auto text = quality_report(scores);
  out << text;
  if (auto dir = lookup(s, "out")) write_file_atomic(fs::path(*dir) / "report.txt", text);
  return kExitOk;
}

void add_run_options(Command& c) {
  c.value("segments", "segments.tsv to evaluate")
      .value("out", "output directory")
      .value("backend", "remote, mock or replay (default remote)")
      .value("script", "mock script (JSON lines), required with --backend mock")
      .value("model", "model id (default gpt-4o-mini)")
      .value("api-base", "OpenAI-compatible base URL")
      .value("api-key-env", "environment variable holding the API key")
      .value("strategy", "consensus, deliberation, interactive_review or consultancy_review")
      .value("topic", "severity, category or entirety")
      .value("max-rounds", "debate rounds (default 3)")
      .value("lean-minor", "true/false: add the lean-minor clause to severity debates")
      .value("dimensions", "comma list of accuracy,fluency,terminology,style")
      .value("shots", "few-shot examples per prompt (0-4, default 4)")
      .value("temperature", "sampling temperature (default 0)")
      .value("max-tokens", "completion token limit")
      .value("concurrency", "units evaluated in parallel (default 4)")
      .value("method", "mmad, gemba or eaprompt")
      .value("lang-pair", "only evaluate this language pair")
      .value("cache-dir", "response cache (default <out>/cache)")
      .value("assets", "prompt and example asset directory")
      .flag("allow-zero-shot", "run language pairs without a few-shot pack")
      .flag("substring-overlap", "treat contained spans as duplicates in the judge fallback");
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::size_t lineno = 0;
  for (std::string line; std::getline(ss, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidInput("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.starts_with("--")) key.erase(0, 2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent MQM evaluation of machine translation", "mmad"};
  app.require_subcommand(1);

  Command evaluate(app, "evaluate", "run the three-stage multi-agent evaluation");
  add_run_options(evaluate);
  Command baseline(app, "baseline", "run a single-call baseline (--method gemba|eaprompt)");
  add_run_options(baseline);
  Command meta(app, "meta-eval", "correlate metric scores with gold MQM");
  meta.value("scores", "metric scores.tsv")
      .value("gold", "gold scores.tsv or gold.tsv")
      .value("epsilon", "fixed tie threshold instead of the sweep")
      .value("lang-pair", "only this language pair")
      .value("out", "directory for meta_report.txt/json")
      .flag("pool", "also report all language pairs together");
  Command span(app, "span-eval", "error-span precision/recall/F1 against gold");
  span.value("annotations", "predicted annotations.jsonl")
      .value("gold", "gold.tsv")
      .value("lang-pair", "only this language pair")
      .value("out", "directory for span_report.txt");
  Command report(app, "report", "HQ/MQ/LQ bucket table of a scores file");
  report.value("scores", "scores.tsv").value("lang-pair", "only this language pair").value("out", "directory for report.txt");
  Command replay(app, "replay", "re-run a finished run from its cache and compare outputs");
  replay.value("out", "directory of the run to replay")
      .value("cache-dir", "cache to replay from (default: the run's)")
      .value("concurrency", "units evaluated in parallel");

  std::vector<const Command*> commands = {&evaluate, &baseline, &meta, &span, &report, &replay};
  const auto usage = [&] {
    for (const auto* c : commands) {
      if (c->parsed()) return c->app()->help();
    }
    return app.help();
  };

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("mmad");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << usage();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return kExitUsage;
  }

  try {
    if (evaluate.parsed()) return cmd_run(evaluate, false, out, err);
    if (baseline.parsed()) return cmd_run(baseline, true, out, err);
    if (meta.parsed()) return cmd_meta_eval(meta, out);
    if (span.parsed()) return cmd_span_eval(span, out, err);
    if (report.parsed()) return cmd_report(report, out);
    if (replay.parsed()) return cmd_replay(replay, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << usage();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << usage();
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mmad::cli
