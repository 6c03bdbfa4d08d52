#pragma once

// Shared test data: the watch-review case study unit with its scripted
// model outputs, annotation builders, tag helpers and scratch directories.

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "mmad/codec.hpp"
#include "mmad/gateway.hpp"
#include "mmad/mqm.hpp"
#include "mmad/prompts.hpp"

namespace mmad::test {

inline ErrorAnnotation ann(std::string span, std::string category, std::optional<Severity> sev) {
  ErrorAnnotation a;
  a.span = span == "all" ? ErrorSpan::whole_segment() : ErrorSpan::of(std::move(span));
  a.category = CategoryPath::parse(category);
  a.severity = sev;
  return a;
}
inline ErrorAnnotation major(std::string span, std::string category) {
  return ann(std::move(span), std::move(category), Severity::major);
}
inline ErrorAnnotation minor(std::string span, std::string category) {
  return ann(std::move(span), std::move(category), Severity::minor);
}

inline AnnotationSet set_of(std::vector<ErrorAnnotation> anns, Provenance p = Provenance::stage1) {
  AnnotationSet s;
  s.annotations = std::move(anns);
  s.provenance = p;
  return s;
}

inline std::string payload(const std::vector<ErrorAnnotation>& anns) { return encode_annotation_payload(anns); }

inline std::string tag(const TranslationUnit& u, std::string stage, std::string dim, int round, std::string speaker) {
  return CallTag{u.key().str(), std::move(stage), std::move(dim), round, std::move(speaker)}.str();
}
inline std::string tag(const TranslationUnit& u, std::string stage, Dimension d, int round, std::string speaker) {
  return tag(u, std::move(stage), std::string(to_string(d)), round, std::move(speaker));
}

inline TranslationUnit make_unit(std::string lp, std::string system, std::string seg, std::string source,
                                 std::string hypothesis) {
  TranslationUnit u;
  u.language_pair = std::move(lp);
  u.system_id = std::move(system);
  u.doc_id = "doc1";
  u.seg_id = std::move(seg);
  u.source_text = std::move(source);
  u.hypothesis_text = std::move(hypothesis);
  return u;
}

inline const PromptRegistry& registry() {
  static const PromptRegistry r = PromptRegistry::load(MMAD_ASSET_DIR);
  return r;
}

inline BackendConfig mock_backend() {
  BackendConfig c;
  c.kind = BackendKind::mock;
  return c;
}

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mmad-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

// The zh-en watch-review case: gold score -4, EAPrompt -13, GEMBA-MQM -10.
namespace case_study {

inline TranslationUnit unit() {
  return make_unit("zh-en", "sysA", "1",
                   "表的走时是很准的，误差完全在可接受范围内，表的包装里有珠宝鉴定证书，表盘的12字那里是真钻石，"
                   "这个自己戴很合适，作为礼品送出去也很有面子。",
                   "The time of the watch is very accurate, and the error is completely within the acceptable "
                   "range. There is a jewelry appraisal certificate in the packaging of the watch, and there is a "
                   "real diamond on the 12 number on the dial.");
}

inline std::vector<ErrorAnnotation> stage1(Dimension d) {
  switch (d) {
    case Dimension::accuracy:
      return {major("there is a real diamond on the 12 number on the dial", "accuracy/mistranslation"),
              major("this is suitable for wearing", "accuracy/omission"),
              major("as a gift, it is also very impressive", "accuracy/omission")};
    case Dimension::fluency: return {minor("the 12 number", "fluency/grammar")};
    case Dimension::terminology: return {minor("12 number on the dial", "terminology/inappropriate-for-context")};
    case Dimension::style: return {minor("the 12 number on the dial", "style/awkward")};
  }
  return {};
}

inline std::vector<ErrorAnnotation> stage2(Dimension d) {
  auto out = stage1(d);
  for (auto& a : out) a.severity = Severity::minor;
  return out;
}

inline std::vector<ErrorAnnotation> stage3() {
  return {minor("there is a real diamond on the 12 number on the dial", "accuracy/mistranslation"),
          minor("this is suitable for wearing", "accuracy/omission"),
          minor("as a gift, it is also very impressive", "accuracy/omission"),
          minor("the 12 number on the dial", "style/awkward")};
}

inline std::string gemba_output() {
  return "Critical:\nno-error\nMajor:\naccuracy/mistranslation - \"12 number on the dial\"\n"
         "style/awkward - \"the error is completely within the acceptable range\"\nMinor:\nno-error";
}

inline std::string eaprompt_output() {
  return "Major errors:\n"
         "(1) \xE2\x80\x9Cthe 12 number\xE2\x80\x9D \xE2\x80\x93 Mistranslation\n"
         "(2) \xE2\x80\x9Con the dial\xE2\x80\x9D \xE2\x80\x93 Inappropriate for context\n"
         "\n"
         "Minor errors:\n"
         "(1) \xE2\x80\x9Cthe time of the watch\xE2\x80\x9D \xE2\x80\x93 Awkward Style\n"
         "(2) \xE2\x80\x9Cthere is a real diamond\xE2\x80\x9D \xE2\x80\x93 Awkward Style\n"
         "(3) \xE2\x80\x9Con the 12 number\xE2\x80\x9D \xE2\x80\x93 Awkward Style\n";
}

inline std::string judge_output() {
  return "The accuracy errors are minor once the context is considered; the fluency and terminology findings "
         "repeat the style span and are dropped.\n```json\n" +
         payload(stage3()) + "\n```";
}

/// Debate-pipeline consensus over all four dimensions: both debaters concede the
/// minor re-annotation in round 1 so the fast path ends every debate.
inline void add_mmad_script(MockScript& s, const TranslationUnit& u) {
  for (auto d : kAllDimensions) {
    s.add_for_tag(tag(u, "stage1", d, 0, "annotator"), payload(stage1(d)));
    s.add_for_tag(tag(u, "stage2", d, 1, "pro"), payload(stage2(d)));
    s.add_for_tag(tag(u, "stage2", d, 1, "con"), payload(stage2(d)));
  }
  s.add_for_tag(tag(u, "stage3", "", 0, "judge"), judge_output());
}

}  // namespace case_study

}  // namespace mmad::test
