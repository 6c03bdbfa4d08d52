#include "mmad/prompts.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mmad/codec.hpp"
#include "mmad/error.hpp"

namespace mmad {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// Feeds literal chunks to lit and each ##name## token's name to ph.
template <typename Lit, typename Ph>
void scan_placeholders(std::string_view text, Lit&& lit, Ph&& ph) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("##", pos);
    if (open == std::string_view::npos) break;
    std::size_t end = open + 2;
    while (end < text.size() && is_name_char(text[end])) ++end;
    if (end > open + 2 && text.substr(end, 2) == "##") {
      lit(text.substr(pos, open - pos));
      ph(text.substr(open + 2, end - open - 2));
      pos = end + 2;
    } else {
      lit(text.substr(pos, open + 1 - pos));
      pos = open + 1;
    }
  }
  lit(text.substr(pos));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    const auto item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

FewShotExample example_from_json(const json& j, std::string lp, std::optional<Dimension> dim, const std::string& origin) {
  if (!j.is_object()) throw IoError(origin + ": example must be an object");
  FewShotExample ex;
  ex.language_pair = j.value("language_pair", std::move(lp));
  ex.dimension = dim;
  try {
    ex.source = j.at("source").get<std::string>();
    ex.translation = j.at("translation").get<std::string>();
    ex.annotations_payload = j.at("annotations").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError(origin + ": " + e.what());
  }
  return ex;
}

}  // namespace

std::string_view to_string(TemplateStage s) {
  switch (s) {
    case TemplateStage::stage1: return "stage1";
    case TemplateStage::debate_turn: return "debate_turn";
    case TemplateStage::consensus_check: return "consensus_check";
    case TemplateStage::judge: return "judge";
    case TemplateStage::gemba: return "gemba";
    case TemplateStage::eaprompt: return "eaprompt";
    case TemplateStage::reviewer: return "reviewer";
  }
  return "stage1";
}

std::optional<TemplateStage> parse_template_stage(std::string_view text) {
  for (auto s : {TemplateStage::stage1, TemplateStage::debate_turn, TemplateStage::consensus_check,
                 TemplateStage::judge, TemplateStage::gemba, TemplateStage::eaprompt, TemplateStage::reviewer}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

PromptTemplate PromptTemplate::parse(std::string_view text, const std::string& origin) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= text.size();) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  // A trailing newline yields one empty final line that is not content.
  if (!text.empty() && text.back() == '\n') lines.pop_back();

  if (lines.empty() || lines[0] != "---") throw IoError(origin + ": missing front-matter", 1);
  PromptTemplate t;
  std::size_t i = 1;
  bool closed = false;
  for (; i < lines.size(); ++i) {
    if (lines[i] == "---") {
      closed = true;
      ++i;
      break;
    }
    const auto colon = lines[i].find(':');
    if (colon == std::string_view::npos) throw IoError(origin + ": bad front-matter line", i + 1);
    const auto key = trim(lines[i].substr(0, colon));
    const auto value = trim(lines[i].substr(colon + 1));
    if (key == "id") {
      t.id = value;
    } else if (key == "stage") {
      auto st = parse_template_stage(value);
      if (!st) throw IoError(origin + ": unknown stage '" + std::string(value) + "'", i + 1);
      t.stage = *st;
    } else if (key == "dimension") {
      t.dimension = parse_dimension(value);
      if (!t.dimension) throw IoError(origin + ": unknown dimension '" + std::string(value) + "'", i + 1);
    } else if (key == "version") {
      try {
        t.version = std::stoi(std::string(value));
      } catch (const std::exception&) {
        throw IoError(origin + ": bad version", i + 1);
      }
    } else if (key == "placeholders") {
      t.placeholders = split_list(value);
    } else if (key == "system_from") {
      t.system_from = value;
    } else {
      throw IoError(origin + ": unknown front-matter key '" + std::string(key) + "'", i + 1);
    }
  }
  if (!closed) throw IoError(origin + ": unterminated front-matter");
  if (t.id.empty()) throw IoError(origin + ": template id missing");

  std::optional<TemplatePart> cur;
  std::vector<std::string_view> cur_lines;
  const auto flush = [&] {
    if (!cur) return;
    std::string joined;
    for (std::size_t k = 0; k < cur_lines.size(); ++k) {
      if (k) joined.push_back('\n');
      joined.append(cur_lines[k]);
    }
    cur->text = std::move(joined);
    t.body.push_back(std::move(*cur));
    cur.reset();
    cur_lines.clear();
  };
  for (; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.size() > 2 && line.substr(0, 2) == "@@") {
      const auto role = parse_role(trim(line.substr(2)));
      if (!role) throw IoError(origin + ": unknown role marker", i + 1);
      flush();
      cur = TemplatePart{*role, {}};
      continue;
    }
    if (!cur) {
      if (!trim(line).empty()) throw IoError(origin + ": text before the first role marker", i + 1);
      continue;
    }
    cur_lines.push_back(line);
  }
  flush();

  for (const auto& name : t.used_placeholders()) {
    if (std::find(t.placeholders.begin(), t.placeholders.end(), name) == t.placeholders.end()) {
      throw IoError(origin + ": placeholder ##" + name + "## is not declared");
    }
  }
  return t;
}

bool PromptTemplate::allows_examples() const {
  return stage == TemplateStage::stage1 || stage == TemplateStage::gemba;
}

std::vector<std::string> PromptTemplate::used_placeholders() const {
  std::vector<std::string> out;
  for (const auto& part : body) {
    scan_placeholders(
        part.text, [](std::string_view) {},
        [&](std::string_view name) {
          if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
        });
  }
  return out;
}

const std::vector<FewShotExample>& ExamplePack::examples(Dimension d) const {
  const auto it = by_dimension.find(d);
  if (it == by_dimension.end()) {
    throw LookupError("example pack " + language_pair + " has no " + std::string(to_string(d)) + " examples");
  }
  return it->second;
}

void ExamplePack::validate() const {
  for (Dimension d : kAllDimensions) {
    const auto it = by_dimension.find(d);
    const std::size_t n = it == by_dimension.end() ? 0 : it->second.size();
    if (n != kShots) {
      throw InvalidInput("example pack " + language_pair + " has " + std::to_string(n) + " " +
                         std::string(to_string(d)) + " examples; expected " + std::to_string(kShots));
    }
    for (const auto& ex : it->second) {
      try {
        decode_annotation_payload(ex.annotations_payload);
      } catch (const ParseError& e) {
        throw InvalidInput("example pack " + language_pair + ": undecodable payload: " + e.what());
      }
    }
  }
}

std::string substitute(std::string_view text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  scan_placeholders(
      text, [&](std::string_view lit) { out.append(lit); },
      [&](std::string_view name) {
        const auto it = bindings.find(name);
        if (it == bindings.end()) throw RenderError("unbound placeholder ##" + std::string(name) + "##");
        out.append(it->second);
      });
  return out;
}

std::vector<ChatMessage> render(const PromptTemplate& tmpl, const Bindings& bindings,
                                std::span<const FewShotExample> examples) {
  if (!examples.empty() && !tmpl.allows_examples()) {
    throw RenderError("template " + tmpl.id + " (stage " + std::string(to_string(tmpl.stage)) +
                      ") does not take few-shot examples");
  }
  std::vector<ChatMessage> out;
  const auto& b = tmpl.body;
  const bool seeded = tmpl.allows_examples() && b.size() == 3 && b[0].role == Role::system &&
                      b[1].role == Role::user && b[2].role == Role::assistant;
  if (!seeded) {
    if (!examples.empty()) throw RenderError("template " + tmpl.id + " has no example slot");
    for (const auto& part : b) out.push_back({part.role, substitute(part.text, bindings)});
    return out;
  }

  out.push_back({Role::system, substitute(b[0].text, bindings)});
  for (const auto& ex : examples) {
    Bindings eb = bindings;
    const auto [src, tgt] = resolve_language_names(ex.language_pair);
    eb["src_lng"] = src;
    eb["tgt_lng"] = tgt;
    eb["source_segment"] = ex.source;
    eb["target_segment"] = ex.translation;
    eb["annotations"] = ex.annotations_payload;
    out.push_back({Role::user, substitute(b[1].text, eb)});
    out.push_back({Role::assistant, substitute(b[2].text, eb)});
  }
  out.push_back({Role::user, substitute(b[1].text, bindings)});
  return out;
}

std::string language_name(std::string_view code) {
  static const std::map<std::string_view, std::string_view> names{
      {"ar", "Arabic"},   {"cs", "Czech"},    {"de", "German"},   {"en", "English"},  {"es", "Spanish"},
      {"fr", "French"},   {"he", "Hebrew"},   {"hr", "Croatian"}, {"ja", "Japanese"}, {"ko", "Korean"},
      {"pl", "Polish"},   {"pt", "Portuguese"}, {"ru", "Russian"}, {"uk", "Ukrainian"}, {"zh", "Chinese"},
  };
  const auto it = names.find(code);
  if (it == names.end()) throw LookupError("unknown language code '" + std::string(code) + "'");
  return std::string(it->second);
}

std::pair<std::string, std::string> resolve_language_names(std::string_view language_pair) {
  const auto dash = language_pair.find('-');
  if (dash == std::string_view::npos || language_pair.find('-', dash + 1) != std::string_view::npos) {
    throw LookupError("malformed language pair '" + std::string(language_pair) + "'");
  }
  try {
    return {language_name(language_pair.substr(0, dash)), language_name(language_pair.substr(dash + 1))};
  } catch (const LookupError&) {
    throw LookupError("unknown language pair '" + std::string(language_pair) + "'");
  }
}

void PromptRegistry::add_template(PromptTemplate t) {
  const std::string id = t.id;
  templates_.insert_or_assign(id, std::move(t));
}

void PromptRegistry::add_pack(ExamplePack pack) {
  const std::string lp = pack.language_pair;
  packs_.insert_or_assign(lp, std::move(pack));
}

const PromptTemplate& PromptRegistry::get(std::string_view id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw LookupError("no template '" + std::string(id) + "'");
  return it->second;
}

bool PromptRegistry::has(std::string_view id) const { return templates_.find(id) != templates_.end(); }

const ExamplePack* PromptRegistry::pack(std::string_view language_pair) const {
  const auto it = packs_.find(language_pair);
  return it == packs_.end() ? nullptr : &it->second;
}

std::map<std::string, int> PromptRegistry::template_versions() const {
  std::map<std::string, int> out;
  for (const auto& [id, t] : templates_) out[id] = t.version;
  return out;
}

fs::path PromptRegistry::default_asset_dir() {
  if (const char* env = std::getenv("MMAD_ASSETS"); env && *env) return env;
  return MMAD_ASSET_DIR;
}

PromptRegistry PromptRegistry::load_default() { return load(default_asset_dir()); }

PromptRegistry PromptRegistry::load(const fs::path& dir) {
  PromptRegistry reg;
  const fs::path prompts = dir / "prompts";
  if (!fs::is_directory(prompts)) throw IoError("no prompt directory at " + prompts.string());

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(prompts)) {
    if (e.is_regular_file() && e.path().extension() == ".tmpl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) reg.add_template(PromptTemplate::parse(read_file(f), f.string()));

  for (auto& [id, t] : reg.templates_) {
    if (t.system_from.empty()) continue;
    const auto src = reg.templates_.find(t.system_from);
    if (src == reg.templates_.end()) throw IoError(id + ": system_from names unknown template " + t.system_from);
    const auto& sb = src->second.body;
    if (sb.empty() || sb[0].role != Role::system) throw IoError(id + ": " + t.system_from + " has no system part");
    if (!t.body.empty() && t.body[0].role == Role::system) throw IoError(id + ": system part given twice");
    t.body.insert(t.body.begin(), sb[0]);
    for (const auto& name : t.used_placeholders()) {
      if (std::find(t.placeholders.begin(), t.placeholders.end(), name) == t.placeholders.end()) {
        t.placeholders.push_back(name);
      }
    }
  }

  const fs::path ex_dir = dir / "examples";
  if (!fs::is_directory(ex_dir)) return reg;
  std::vector<fs::path> packs;
  for (const auto& e : fs::directory_iterator(ex_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") packs.push_back(e.path());
  }
  std::sort(packs.begin(), packs.end());
  for (const auto& f : packs) {
    const std::string origin = f.string();
    json j;
    try {
      j = json::parse(read_file(f));
    } catch (const json::parse_error& e) {
      throw IoError(origin + ": " + e.what());
    }
    if (f.stem() == "gemba") {
      std::vector<FewShotExample> exs;
      for (const auto& item : j.at("examples")) {
        auto ex = example_from_json(item, "", std::nullopt, origin);
        try {
          parse_gemba_sections(ex.annotations_payload);
        } catch (const ParseError& e) {
          throw IoError(origin + ": undecodable GEMBA example: " + e.what());
        }
        exs.push_back(std::move(ex));
      }
      reg.gemba_examples_ = std::move(exs);
      continue;
    }
    ExamplePack pack;
    try {
      pack.language_pair = j.at("language_pair").get<std::string>();
      pack.version = j.value("version", 1);
      for (const auto& [dim_name, list] : j.at("examples").items()) {
        const auto dim = parse_dimension(dim_name);
        if (!dim) throw IoError(origin + ": unknown dimension '" + dim_name + "'");
        auto& out = pack.by_dimension[*dim];
        for (const auto& item : list) out.push_back(example_from_json(item, pack.language_pair, dim, origin));
      }
    } catch (const json::exception& e) {
      throw IoError(origin + ": " + e.what());
    }
    try {
      pack.validate();
    } catch (const InvalidInput& e) {
      throw IoError(origin + ": " + e.what());
    }
    reg.add_pack(std::move(pack));
  }
  return reg;
}

}  // namespace mmad
