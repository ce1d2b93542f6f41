// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "keysig/llm.hpp"
#include "keysig/pipeline.hpp"
#include "keysig/ranking.hpp"
#include "keysig/slicing.hpp"

namespace keysig {

/// Everything one pipeline run needs. The key=value config file and the
/// CLI flags both map onto this; flags win over file values.
struct RunConfig {
    std::vector<std::string> sources;
    std::string top; // empty = auto-detect

    RankConfig rank;
    SliceOptions slice;

    EndpointConfig endpoint;
    GenerationOptions generation;
    std::string template_path; // non-empty replaces the builtin prompt
    std::string overview_path; // design overview / spec summary file
    int parallelism = 1;
    bool generate = true; // `run` skips the LLM stage when false

    std::string out_dir = "keysig-out";

    /// Throws ConfigError when a value is out of range.
    void validate() const;
};

/// `key = value` lines, '#' comments. Unknown keys throw ConfigError.
RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

/// Serializes every key so that replaying the file reproduces the run.
std::string config_to_text(const RunConfig& cfg);

} // namespace keysig
