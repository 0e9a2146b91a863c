#pragma once

#include <string>

#include <json.hpp>

#include "pap/discdetect.hpp"
#include "pap/synthgen.hpp"
#include "pap/types.hpp"

namespace pap {

/// Everything a run needs, loadable from a JSON file. Unknown keys anywhere
/// in the file are rejected by name, so typos cannot silently fall back to
/// defaults. The effective (post-defaulting) config can be serialized back
/// out, and re-running from that echo reproduces the run.
struct RunConfig {
  Seed seed = 7;
  int workers = 1;
  std::string output_dir = "out";

  // Dataset shape for synthesis, and the manifest consumed by train/eval.
  int subjects = 100;
  int images_per_subject = 3;
  std::string manifest;

  SynthParams synth;
  MorphologyConfig morphology;

  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
  void write_effective(const std::string& path) const;
};

}  // namespace pap
