#pragma once

// Decoders for every output shape the prompts elicit: the JSON annotation
// payload, EAPrompt's <score> tag and bullet lists, yes/no consensus
// verdicts, and GEMBA-MQM's Critical/Major/Minor sections. All pure.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmad/mqm.hpp"

namespace mmad {

struct DecodedPayload {
  std::vector<ErrorAnnotation> annotations;
  std::optional<std::string> analysis;  // Stage-3 judge free text, verbatim
  std::vector<std::string> warnings;
};

/// Locates the last decodable annotation payload: fenced code blocks first,
/// then outermost brace-balanced objects anywhere in the text. Throws
/// ParseError when none decodes.
DecodedPayload decode_annotation_payload(std::string_view text);

AnnotationSet extract_annotations(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Stage-1 payload format; the inverse of decode_annotation_payload.
std::string encode_annotation_payload(std::span<const ErrorAnnotation> annotations);

/// Integer inside the last <score>...</score> pair; ParseError otherwise.
int extract_score_tag(std::string_view text);

/// Isolated yes -> true, isolated no -> false; both or neither -> false.
bool extract_yes_no(std::string_view text);

/// GEMBA-MQM sectioned output. critical folds into major; ParseError when
/// no section header is present.
AnnotationSet parse_gemba_sections(std::string_view text, std::vector<std::string>* warnings = nullptr);

struct EapromptLists {
  std::vector<ErrorAnnotation> annotations;
  bool found = false;  // at least one "Major errors"/"Minor errors" header
};

/// The "Major errors:"/"Minor errors:" bullet lists of an EAPrompt answer.
EapromptLists parse_eaprompt_lists(std::string_view text);

}  // namespace mmad
