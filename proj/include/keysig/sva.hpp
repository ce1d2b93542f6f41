// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <vector>

namespace keysig {

/// Pulls candidate SVA statements out of an LLM response. Fenced code
/// blocks are preferred; when none exist the whole text is scanned.
/// Each returned string is one `[label :] assert property (...) ... ;`
/// statement.
std::vector<std::string> extract_assertions(const std::string& response);

struct LintContext {
    std::set<std::string> allowed_names; // slice signals, fragment decls, chain segments
    bool require_clocking = false;       // target signal is not purely combinational
    std::string external_command;        // optional verifier hook, {file} placeholder
};

struct LintResult {
    bool pass = false;
    std::string reason; // empty on pass
};

/// Structural check of one assertion: it must parse in this tool's SVA
/// subset, reference only allowed names, and carry a clocking event when
/// the context demands one. When an external command is configured its
/// exit status overrides the structural verdict.
LintResult lint_assertion(const std::string& assertion, const LintContext& ctx);

} // namespace keysig
