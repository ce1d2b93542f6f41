// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "keysig/diagnostics.hpp"
#include "keysig/source.hpp"

namespace keysig {

enum class TokKind {
    Identifier,  // plain or escaped (escaped keeps the leading backslash)
    SystemIdent, // $display, $past, ...
    Number,
    String,
    Operator, // punctuation and operators, text() distinguishes
    Directive, // `include, `define, ...
    Eof,
};

struct Token {
    TokKind kind = TokKind::Eof;
    std::string text;
    SourceSpan span;

    bool is(TokKind k) const { return kind == k; }
    bool is_op(std::string_view s) const { return kind == TokKind::Operator && text == s; }
    bool is_ident(std::string_view s) const { return kind == TokKind::Identifier && text == s; }
};

/// Single-file tokenizer for the supported Verilog subset plus the SVA
/// operators needed by the assertion lint (##, |->, |=>).
class Lexer {
public:
    Lexer(const SourceManager& sm, std::uint32_t file_id);

    Token next();
    const SourceManager& sources() const { return sm_; }
    std::uint32_t file_id() const { return file_; }

private:
    void skip_trivia();
    Token make(TokKind kind, std::uint32_t begin);

    const SourceManager& sm_;
    std::uint32_t file_;
    std::string_view text_;
    std::uint32_t pos_ = 0;
};

/// Lexes the whole file into a vector terminated by an Eof token.
std::vector<Token> lex_file(const SourceManager& sm, std::uint32_t file_id);

bool is_verilog_keyword(std::string_view s);

} // namespace keysig
