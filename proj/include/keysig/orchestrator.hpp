// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "keysig/config.hpp"
#include "keysig/diagnostics.hpp"
#include "keysig/graph.hpp"
#include "keysig/hierarchy.hpp"
#include "keysig/pipeline.hpp"
#include "keysig/ranking.hpp"

namespace keysig {

/// Attributes a failure to the pipeline stage that raised it. exit_code
/// follows the CLI convention (1 usage/config, 2 parse, 3 pipeline).
class StageFailure : public Error {
public:
    StageFailure(std::string stage_name, int code, const std::string& message)
        : Error("stage " + stage_name + ": " + message), stage(std::move(stage_name)),
          exit_code(code) {}
    std::string stage;
    int exit_code;
};

struct PipelineResult {
    std::size_t modules = 0;
    std::string top;
    std::size_t graph_nodes = 0;
    std::size_t graph_edges = 0;
    std::size_t ranked = 0;
    std::vector<std::string> selected;
    bool generated = false;
    RunReport report;
    DiagnosticEngine diagnostics;
};

/// parse -> graph -> rank -> slice -> (optional) generate, writing every
/// artifact under cfg.out_dir: graph.json, graph.dot, ranking.json,
/// ranking.txt, slices/<signal>/..., assertions/, run_report.json and the
/// effective run.cfg. Partial artifacts from completed stages survive a
/// later stage failure.
PipelineResult run_pipeline(const RunConfig& cfg);

} // namespace keysig
