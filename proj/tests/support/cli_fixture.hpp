#pragma once

// Files and a runner for driving the command-line front end in-process.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmad/cli.hpp"
#include "mmad/dataset_io.hpp"
#include "support/fixtures.hpp"

namespace mmad::test {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

inline std::vector<TranslationUnit> case_study_units(int n) {
  std::vector<TranslationUnit> units;
  for (int i = 1; i <= n; ++i) {
    auto u = case_study::unit();
    u.seg_id = std::to_string(i);
    units.push_back(u);
  }
  return units;
}

/// Tag-keyed entries for every method, so scheduling order never matters.
inline std::string case_study_script(const std::vector<TranslationUnit>& units) {
  std::string text;
  auto line = [&](const std::string& tag, const std::string& response) {
    text += nlohmann::json{{"tag", tag}, {"response", response}}.dump() + "\n";
  };
  for (const auto& u : units) {
    for (auto d : kAllDimensions) {
      line(tag(u, "stage1", d, 0, "annotator"), payload(case_study::stage1(d)));
      line(tag(u, "stage2", d, 1, "pro"), payload(case_study::stage2(d)));
      line(tag(u, "stage2", d, 1, "con"), payload(case_study::stage2(d)));
    }
    line(tag(u, "stage3", "", 0, "judge"), case_study::judge_output());
    line(tag(u, "gemba", "", 0, "annotator"), case_study::gemba_output());
    line(tag(u, "eaprompt", "", 0, "annotator"), case_study::eaprompt_output());
  }
  return text;
}

struct CaseStudyFiles {
  std::filesystem::path segments;
  std::filesystem::path script;
};

inline CaseStudyFiles write_case_study_inputs(const std::filesystem::path& dir, int n = 3) {
  const auto units = case_study_units(n);
  CaseStudyFiles f{dir / "segments.tsv", dir / "script.jsonl"};
  write_segments(f.segments, units);
  write_file_atomic(f.script, case_study_script(units));
  return f;
}

}  // namespace mmad::test
