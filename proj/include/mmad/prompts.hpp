#pragma once

// Prompt templates and few-shot packs loaded from text assets, plus the
// renderer that turns them into chat messages.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmad/gateway.hpp"
#include "mmad/mqm.hpp"

namespace mmad {

enum class TemplateStage { stage1, debate_turn, consensus_check, judge, gemba, eaprompt, reviewer };

std::string_view to_string(TemplateStage s);
std::optional<TemplateStage> parse_template_stage(std::string_view text);

struct TemplatePart {
  Role role = Role::user;
  std::string text;
};

struct PromptTemplate {
  std::string id;
  TemplateStage stage = TemplateStage::stage1;
  std::optional<Dimension> dimension;
  int version = 1;
  std::vector<std::string> placeholders;  // declared in front-matter
  std::vector<TemplatePart> body;
  std::string system_from;  // id whose system part is prepended at load

  /// Parses the asset format: a `---` front-matter block, then parts opened
  /// by `@@system`, `@@user` or `@@assistant` lines. Throws IoError.
  static PromptTemplate parse(std::string_view text, const std::string& origin = "<memory>");

  /// Only sample-seeded stages take few-shot examples.
  bool allows_examples() const;
  /// Placeholder names appearing in the body, in first-seen order.
  std::vector<std::string> used_placeholders() const;
};

struct FewShotExample {
  std::string language_pair;
  std::optional<Dimension> dimension;  // absent for GEMBA examples
  std::string source;
  std::string translation;
  std::string annotations_payload;  // verbatim assistant answer
};

struct ExamplePack {
  std::string language_pair;
  int version = 1;
  std::map<Dimension, std::vector<FewShotExample>> by_dimension;

  static constexpr std::size_t kShots = 4;

  /// Throws LookupError for a dimension the pack lacks.
  const std::vector<FewShotExample>& examples(Dimension d) const;
  /// Throws InvalidInput unless every dimension has kShots examples whose
  /// payloads decode.
  void validate() const;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Replaces every ##name## in one pass; substituted text is not rescanned.
/// Throws RenderError naming the first unbound placeholder.
std::string substitute(std::string_view text, const Bindings& bindings);

/// System part, then one (user, assistant) pair per example, then the final
/// user turn. Templates without examples emit every part in order.
std::vector<ChatMessage> render(const PromptTemplate& tmpl, const Bindings& bindings,
                                std::span<const FewShotExample> examples = {});

/// Display name of a language code ("zh" -> "Chinese"). Throws LookupError.
std::string language_name(std::string_view code);
/// "zh-en" -> ("Chinese", "English"). Throws LookupError.
std::pair<std::string, std::string> resolve_language_names(std::string_view language_pair);

class PromptRegistry {
 public:
  /// Reads <dir>/prompts/*.tmpl and <dir>/examples/*.json.
  static PromptRegistry load(const std::filesystem::path& dir);
  /// $MMAD_ASSETS when set, else the build-time asset directory.
  static PromptRegistry load_default();
  static std::filesystem::path default_asset_dir();

  void add_template(PromptTemplate t);
  void add_pack(ExamplePack pack);

  const PromptTemplate& get(std::string_view id) const;
  bool has(std::string_view id) const;
  /// nullptr when no pack is registered for the pair.
  const ExamplePack* pack(std::string_view language_pair) const;
  const std::vector<FewShotExample>& gemba_examples() const { return gemba_examples_; }
  void set_gemba_examples(std::vector<FewShotExample> ex) { gemba_examples_ = std::move(ex); }

  std::map<std::string, int> template_versions() const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
  std::map<std::string, ExamplePack, std::less<>> packs_;
  std::vector<FewShotExample> gemba_examples_;
};

}  // namespace mmad
