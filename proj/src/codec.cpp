#include "mmad/codec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <json.hpp>

#include "mmad/error.hpp"

namespace mmad {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 128) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower_ascii(s.substr(0, prefix.size())) == prefix;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

// Contents of ``` fenced blocks, in order of appearance.
std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("```", pos);
    if (open == std::string_view::npos) break;
    auto body = open + 3;
    // Skip an info string such as "json" on the fence line.
    const auto nl = text.find('\n', body);
    const auto close_probe = text.find("```", body);
    if (nl != std::string_view::npos && (close_probe == std::string_view::npos || nl < close_probe)) {
      const auto info = trim(text.substr(body, nl - body));
      if (std::all_of(info.begin(), info.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)); })) {
        body = nl + 1;
      }
    }
    const auto close = text.find("```", body);
    if (close == std::string_view::npos) {
      out.push_back(text.substr(body));
      break;
    }
    out.push_back(text.substr(body, close - body));
    pos = close + 3;
  }
  return out;
}

// Outermost brace-balanced regions. String literals are tracked only
// inside braces so apostrophes in surrounding prose do not matter.
std::vector<std::string_view> balanced_objects(std::string_view text) {
  std::vector<std::string_view> out;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (depth > 0 && in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"' && depth > 0) {
      in_string = true;
    } else if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}' && depth > 0) {
      --depth;
      if (depth == 0) out.push_back(text.substr(start, i - start + 1));
    }
  }
  return out;
}

std::optional<json> parse_json(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

// The printed prompts describe the schema as {"annotations":{...},{...}};
// models that copy it literally produce an object list without brackets.
std::optional<json> parse_with_repair(std::string_view candidate) {
  if (auto j = parse_json(candidate)) return j;
  std::string_view s = trim(candidate);
  if (s.size() < 2 || s.front() != '{' || s.back() != '}') return std::nullopt;
  std::string_view inner = trim(s.substr(1, s.size() - 2));
  static constexpr std::string_view key = "\"annotations\"";
  if (inner.substr(0, key.size()) != key) return std::nullopt;
  inner = trim(inner.substr(key.size()));
  if (inner.empty() || inner.front() != ':') return std::nullopt;
  inner = trim(inner.substr(1));
  if (inner.empty() || inner.front() != '{') return std::nullopt;
  std::string repaired = "{\"annotations\":[";
  repaired.append(inner);
  repaired += "]}";
  return parse_json(repaired);
}

bool json_flag(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = lower_ascii(trim(v.get<std::string>()));
    return s == "yes" || s == "true" || s == "y";
  }
  return false;
}

std::optional<ErrorAnnotation> decode_record(const json& rec, std::vector<std::string>& warnings) {
  if (!rec.is_object()) {
    warnings.push_back("skipped non-object annotation record");
    return std::nullopt;
  }
  ErrorAnnotation ann;
  if (rec.contains("category") && rec["category"].is_string()) {
    ann.category = CategoryPath::parse(rec["category"].get<std::string>(), &warnings);
  } else {
    warnings.push_back("annotation without category mapped to other");
  }
  if (ann.is_non_translation()) {
    ann.span = ErrorSpan::whole_segment();
    ann.category.sub.clear();
  } else if (rec.contains("error_span") && rec["error_span"].is_string()) {
    ann.span = ErrorSpan::of(rec["error_span"].get<std::string>());
  } else {
    warnings.push_back("skipped annotation without error_span");
    return std::nullopt;
  }
  if (rec.contains("severity") && rec["severity"].is_string()) {
    ann.severity = parse_severity(rec["severity"].get<std::string>());
    if (!ann.severity) warnings.push_back("unrecognized severity '" + rec["severity"].get<std::string>() + "'");
  } else if (!ann.is_no_error()) {
    warnings.push_back("annotation without severity");
  }
  if (rec.contains("is_source_error")) ann.is_source_error = json_flag(rec["is_source_error"]);
  return ann;
}

// At most one non-translation, and nothing else beside it.
void enforce_non_translation(std::vector<ErrorAnnotation>& anns, std::vector<std::string>& warnings) {
  auto it = std::find_if(anns.begin(), anns.end(), [](const ErrorAnnotation& a) { return a.is_non_translation(); });
  if (it == anns.end() || anns.size() == 1) return;
  ErrorAnnotation nt = *it;
  warnings.push_back("non-translation present; dropped " + std::to_string(anns.size() - 1) + " other annotations");
  anns.assign(1, std::move(nt));
}

std::optional<DecodedPayload> decode_candidate(std::string_view candidate) {
  auto j = parse_with_repair(candidate);
  if (!j || !j->is_object() || !j->contains("annotations")) return std::nullopt;
  const json& list = (*j)["annotations"];
  DecodedPayload out;
  if (list.is_array()) {
    for (const auto& rec : list) {
      if (auto ann = decode_record(rec, out.warnings)) out.annotations.push_back(std::move(*ann));
    }
  } else if (list.is_object()) {
    if (auto ann = decode_record(list, out.warnings)) out.annotations.push_back(std::move(*ann));
  } else if (!list.is_null()) {
    return std::nullopt;
  }
  if (j->contains("analysis")) {
    const json& a = (*j)["analysis"];
    out.analysis = a.is_string() ? a.get<std::string>() : a.dump(-1, ' ', false, json::error_handler_t::replace);
  }
  enforce_non_translation(out.annotations, out.warnings);
  return out;
}

std::optional<DecodedPayload> decode_last(std::string_view region) {
  const auto objects = balanced_objects(region);
  for (auto it = objects.rbegin(); it != objects.rend(); ++it) {
    if (auto d = decode_candidate(*it)) return d;
  }
  return std::nullopt;
}

// Text between the first pair of matching quotes (ASCII or typographic).
std::optional<std::pair<std::string, std::size_t>> quoted(std::string_view s) {
  struct QuotePair {
    std::string_view open, close;
  };
  static constexpr QuotePair pairs[] = {
      {"\"", "\""}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x9E", "\xE2\x80\x9C"}, {"\xC2\xAB", "\xC2\xBB"}};
  std::optional<std::pair<std::string, std::size_t>> best;
  std::size_t best_pos = std::string_view::npos;
  for (const auto& q : pairs) {
    const auto open = s.find(q.open);
    if (open == std::string_view::npos || open >= best_pos) continue;
    const auto body = open + q.open.size();
    const auto close = s.find(q.close, body);
    if (close == std::string_view::npos) continue;
    best_pos = open;
    best = std::make_pair(std::string(s.substr(body, close - body)), close + q.close.size());
  }
  return best;
}

// EAPrompt's trailing labels ("Mistranslation", "Awkward Style", ...).
CategoryPath category_from_label(std::string_view label) {
  const std::string l = lower_ascii(trim(label));
  if (l.find('/') != std::string::npos) {
    std::vector<std::string> ignored;
    return CategoryPath::parse(l, &ignored);
  }
  struct Rule {
    std::string_view keyword;
    TopCategory top;
    std::string_view sub;
  };
  static constexpr Rule rules[] = {
      {"mistranslation", TopCategory::accuracy, "mistranslation"},
      {"untranslated", TopCategory::accuracy, "untranslated-text"},
      {"omission", TopCategory::accuracy, "omission"},
      {"addition", TopCategory::accuracy, "addition"},
      {"grammar", TopCategory::fluency, "grammar"},
      {"spelling", TopCategory::fluency, "spelling"},
      {"punctuation", TopCategory::fluency, "punctuation"},
      {"register", TopCategory::fluency, "register"},
      {"encoding", TopCategory::fluency, "character-encoding"},
      {"inappropriate", TopCategory::terminology, "inappropriate-for-context"},
      {"inconsisten", TopCategory::fluency, "inconsistency"},
      {"terminology", TopCategory::terminology, "inappropriate-for-context"},
      {"awkward", TopCategory::style, "awkward"},
      {"style", TopCategory::style, "awkward"},
      {"fluency", TopCategory::fluency, ""},
      {"accuracy", TopCategory::accuracy, ""},
  };
  for (const auto& r : rules) {
    if (l.find(r.keyword) != std::string::npos) return CategoryPath{r.top, std::string(r.sub)};
  }
  return CategoryPath{TopCategory::other, ""};
}

std::string_view strip_dash_prefix(std::string_view s) {
  s = trim(s);
  for (std::string_view dash : {"\xE2\x80\x93", "\xE2\x80\x94", "-", ":"}) {
    if (s.substr(0, dash.size()) == dash) return trim(s.substr(dash.size()));
  }
  return s;
}

}  // namespace

DecodedPayload decode_annotation_payload(std::string_view text) {
  const auto blocks = fenced_blocks(text);
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (auto d = decode_last(*it)) return std::move(*d);
  }
  if (auto d = decode_last(text)) return std::move(*d);
  throw ParseError("no decodable annotation payload", std::string(text));
}

AnnotationSet extract_annotations(std::string_view text, std::vector<std::string>* warnings) {
  DecodedPayload d = decode_annotation_payload(text);
  if (warnings) warnings->insert(warnings->end(), d.warnings.begin(), d.warnings.end());
  AnnotationSet set;
  set.annotations = std::move(d.annotations);
  return set;
}

std::string encode_annotation_payload(std::span<const ErrorAnnotation> annotations) {
  if (annotations.empty()) return R"({"annotations": []})";
  ordered_json list = ordered_json::array();
  for (const auto& a : annotations) {
    ordered_json rec;
    rec["error_span"] = a.span.all ? std::string("all") : a.span.text;
    rec["category"] = a.category.str();
    if (a.severity) rec["severity"] = std::string(to_string(*a.severity));
    rec["is_source_error"] = a.is_source_error ? "yes" : "no";
    list.push_back(std::move(rec));
  }
  ordered_json j;
  j["annotations"] = std::move(list);
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

int extract_score_tag(std::string_view text) {
  const auto close = text.rfind("</score>");
  if (close == std::string_view::npos) throw ParseError("no <score> tag", std::string(text));
  const auto open = text.rfind("<score>", close);
  if (open == std::string_view::npos) throw ParseError("unmatched </score> tag", std::string(text));
  std::string_view body = trim(text.substr(open + 7, close - open - 7));
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || body.empty()) {
    throw ParseError("non-integer score tag '" + std::string(body) + "'", std::string(text));
  }
  return value;
}

bool extract_yes_no(std::string_view text) {
  bool yes = false;
  bool no = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j]))) ++j;
    const std::string word = lower_ascii(text.substr(i, j - i));
    if (word == "yes") yes = true;
    if (word == "no") no = true;
    i = j;
  }
  return yes && !no;
}

AnnotationSet parse_gemba_sections(std::string_view text, std::vector<std::string>* warnings) {
  std::vector<std::string> local;
  std::vector<std::string>& warn = warnings ? *warnings : local;
  AnnotationSet set;
  std::optional<Severity> current;
  bool any_header = false;

  const auto handle_item = [&](std::string_view item) {
    item = trim(item);
    if (item.empty() || !current) return;
    const std::string low = lower_ascii(item);
    if (low.rfind("no-error", 0) == 0 || low.rfind("no error", 0) == 0) return;
    std::string_view cat_text = item;
    std::string span_text;
    bool has_span = false;
    const auto dash = item.find(" - ");
    if (dash != std::string_view::npos) {
      cat_text = trim(item.substr(0, dash));
      const std::string_view rest = item.substr(dash + 3);
      if (auto q = quoted(rest)) {
        span_text = q->first;
      } else {
        span_text = std::string(trim(rest));
      }
      has_span = true;
    }
    ErrorAnnotation ann;
    ann.category = CategoryPath::parse(cat_text, &warn);
    ann.severity = current;
    if (ann.is_non_translation()) {
      ann.span = ErrorSpan::whole_segment();
      ann.category.sub.clear();
    } else if (has_span) {
      ann.span = ErrorSpan::of(std::move(span_text));
    } else {
      warn.push_back("GEMBA line without span: " + std::string(item));
      return;
    }
    set.annotations.push_back(std::move(ann));
  };

  for (std::string_view raw : split_lines(text)) {
    std::string_view line = trim(raw);
    struct Header {
      std::string_view name;
      Severity sev;
    };
    static constexpr Header headers[] = {
        {"critical:", Severity::major}, {"major:", Severity::major}, {"minor:", Severity::minor}};
    bool matched = false;
    for (const auto& h : headers) {
      if (starts_with_ci(line, h.name)) {
        current = h.sev;
        any_header = true;
        matched = true;
        handle_item(line.substr(h.name.size()));
        break;
      }
    }
    if (!matched) handle_item(line);
  }
  if (!any_header) throw ParseError("no Critical:/Major:/Minor: sections", std::string(text));
  enforce_non_translation(set.annotations, warn);
  set.provenance = Provenance::gemba;
  return set;
}

EapromptLists parse_eaprompt_lists(std::string_view text) {
  EapromptLists out;
  std::optional<Severity> current;
  for (std::string_view raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (starts_with_ci(line, "major error")) {
      current = Severity::major;
      out.found = true;
      continue;
    }
    if (starts_with_ci(line, "minor error")) {
      current = Severity::minor;
      out.found = true;
      continue;
    }
    if (!current || line.empty()) continue;
    // Items look like: (1) “Sie” – Mistranslation
    std::string_view item = line;
    if (item.front() == '(') {
      const auto close = item.find(')');
      if (close == std::string_view::npos) continue;
      item = trim(item.substr(close + 1));
    } else if (std::isdigit(static_cast<unsigned char>(item.front()))) {
      const auto dot = item.find_first_of(".)");
      if (dot == std::string_view::npos) continue;
      item = trim(item.substr(dot + 1));
    } else if (item.front() == '-' || item.front() == '*') {
      item = trim(item.substr(1));
    } else {
      // Prose following the lists ends the current section.
      if (!quoted(item)) current.reset();
      if (!current) continue;
    }
    auto q = quoted(item);
    if (!q) continue;  // "None", "No errors", ...
    ErrorAnnotation ann;
    ann.span = ErrorSpan::of(q->first);
    ann.category = category_from_label(strip_dash_prefix(item.substr(q->second)));
    ann.severity = current;
    out.annotations.push_back(std::move(ann));
  }
  return out;
}

}  // namespace mmad
