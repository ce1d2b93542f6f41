// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "keysig/ast.hpp"
#include "keysig/diagnostics.hpp"
#include "keysig/lexer.hpp"
#include "keysig/source.hpp"

namespace keysig {

/// Parses the given files (already registered with the SourceManager)
/// into one Ast. `include directives are resolved relative to the
/// including file and parsed inline. Syntax problems throw SyntaxError /
/// UnsupportedConstruct; identifier-resolution problems are reported as
/// error diagnostics but still yield an Ast.
Ast parse_sources(SourceManager& sm, const std::vector<std::uint32_t>& files, DiagnosticEngine& diags);

/// Convenience: load the given paths and parse.
Ast parse_files(SourceManager& sm, const std::vector<std::string>& paths, DiagnosticEngine& diags);

/// Test hooks: parse an isolated statement / module item from text.
StmtPtr parse_statement_text(SourceManager& sm, const std::string& text);
std::unique_ptr<Item> parse_item_text(SourceManager& sm, const std::string& text);

/// Per-module identifier resolution: every referenced identifier must be a
/// declared net, port, parameter or integer. Violations are reported as
/// error diagnostics. Returns the number of problems found.
std::size_t check_resolution(const Ast& ast, const SourceManager& sm, DiagnosticEngine& diags);

} // namespace keysig
