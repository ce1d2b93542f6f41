// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "keysig/llm.hpp"
#include "keysig/slicing.hpp"
#include "keysig/sva.hpp"

namespace keysig {

/// Prompt template with {signal} {class} {chain} {overview} {slice}
/// placeholders (all required) and an optional {class_instruction}.
struct PromptTemplate {
    std::string text;
    static PromptTemplate builtin();
    static PromptTemplate load(const std::string& path);
};

struct PromptBundle {
    std::string signal;
    std::string signal_class;
    std::string chain;
    std::string rendered;
    std::string template_id; // content hash of the template
    int token_estimate = 0;
    bool truncated_slice = false;
};

/// Deterministic rendering. A missing overview renders an explicit
/// "(no specification provided)" section. When prompt_token_budget > 0
/// and the rendered prompt would exceed it, slice lines are dropped from
/// the end and a truncation marker is inserted. Throws TemplateError for
/// unknown or missing placeholders.
PromptBundle build_prompt(const RtlSlice& slice, const std::string& overview,
                          const PromptTemplate& tmpl, int prompt_token_budget = 0);

struct GenerationOptions {
    int max_attempts = 3;
    int transport_retries = 2;
    bool attempt_feedback = false; // append prior lint failures to retry prompts
    int prompt_token_budget = 0;
    std::string external_verifier; // optional command template, {file} placeholder
    PromptTemplate prompt_template = PromptTemplate::builtin();
};

struct AttemptRecord {
    std::string prompt_hash;
    std::string response;
    std::vector<std::pair<std::string, LintResult>> assertions;
    long input_tokens = 0;
    long output_tokens = 0;
};

enum class GenStatus { Accepted, Skipped };

struct AssertionRecord {
    std::string signal;
    GenStatus status = GenStatus::Skipped;
    std::vector<AttemptRecord> attempts;
    std::vector<std::string> accepted;
};

/// build -> request -> validate loop, stopping at the first attempt that
/// yields at least one passing assertion; the signal is skipped after
/// max_attempts. Transport faults are retried without consuming a
/// generation attempt; AuthError propagates immediately.
AssertionRecord generate_for_signal(const RtlSlice& slice, const std::string& overview,
                                    LlmClient& client, const GenerationOptions& opts,
                                    TokenTally& tally);

struct RunReport {
    int signals = 0;
    int accepted = 0;
    int skipped = 0;
    long input_tokens = 0;
    long output_tokens = 0;
};

/// Drives generation for all slices with the given parallelism bound and
/// writes assertions/<signal>.json plus run_report.json under out_dir.
RunReport run_generation(const std::vector<RtlSlice>& slices, const std::string& overview,
                         const EndpointConfig& endpoint, const GenerationOptions& opts,
                         const std::string& out_dir, int parallelism = 1);

std::string record_to_json(const AssertionRecord& record);
std::string report_to_json(const RunReport& report, const std::vector<AssertionRecord>& records);

} // namespace keysig
