// SPDX-License-Identifier: Apache-2.0
#include "keysig/lexer.hpp"

#include <array>
#include <cctype>
#include <cstring>
#include <unordered_set>

namespace keysig {

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool digit(char c) {
    return std::isdigit(static_cast<unsigned char>(c));
}

// Multi-character operators, longest match first.
const std::array<std::string_view, 24> multi_ops = {
    "===", "!==", "<<<", ">>>", "|->", "|=>", "+:", "-:", "**", "<=", ">=", "==",
    "!=",  "&&",  "||",  "<<",  ">>",  "~&",  "~|", "~^", "^~", "##", "->", "@*"};

} // namespace

Lexer::Lexer(const SourceManager& sm, std::uint32_t file_id)
    : sm_(sm), file_(file_id), text_(sm.file(file_id).text) {}

void Lexer::skip_trivia() {
    while (pos_ < text_.size()) {
        char c = text_[pos_];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
            ++pos_;
        } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
            while (pos_ < text_.size() && text_[pos_] != '\n')
                ++pos_;
        } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
            std::uint32_t start = pos_;
            pos_ += 2;
            while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                ++pos_;
            if (pos_ + 1 >= text_.size()) {
                auto [line, col] = sm_.line_col(file_, start);
                throw SyntaxError(Diagnostic{Severity::Error, sm_.file(file_).path, line, col,
                                             "unterminated block comment"});
            }
            pos_ += 2;
        } else {
            break;
        }
    }
}

Token Lexer::make(TokKind kind, std::uint32_t begin) {
    Token t;
    t.kind = kind;
    t.span = SourceSpan{file_, begin, pos_};
    t.text = std::string(text_.substr(begin, pos_ - begin));
    return t;
}

Token Lexer::next() {
    skip_trivia();
    std::uint32_t begin = pos_;
    if (pos_ >= text_.size()) {
        Token t;
        t.kind = TokKind::Eof;
        t.span = SourceSpan{file_, begin, begin};
        return t;
    }
    char c = text_[pos_];

    if (ident_start(c)) {
        while (pos_ < text_.size() && ident_char(text_[pos_]))
            ++pos_;
        return make(TokKind::Identifier, begin);
    }

    // Escaped identifier: backslash up to whitespace, backslash kept.
    if (c == '\\') {
        ++pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return make(TokKind::Identifier, begin);
    }

    if (c == '$') {
        ++pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_]))
            ++pos_;
        return make(TokKind::SystemIdent, begin);
    }

    if (c == '`') {
        ++pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_]))
            ++pos_;
        return make(TokKind::Directive, begin);
    }

    // Numbers: plain decimal, or [size]'[s]base digits; the base part may
    // start a fresh token when the size is a separate expression.
    if (digit(c) || (c == '\'' && pos_ + 1 < text_.size())) {
        if (digit(c)) {
            while (pos_ < text_.size() && (digit(text_[pos_]) || text_[pos_] == '_'))
                ++pos_;
            // based literal directly attached: 8'hFF
            if (pos_ < text_.size() && text_[pos_] == '\'') {
                std::uint32_t save = pos_;
                ++pos_;
                if (pos_ < text_.size() && (text_[pos_] == 's' || text_[pos_] == 'S'))
                    ++pos_;
                if (pos_ < text_.size() && std::strchr("bodhBODH", text_[pos_])) {
                    ++pos_;
                    while (pos_ < text_.size() &&
                           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                            text_[pos_] == '?'))
                        ++pos_;
                } else {
                    pos_ = save; // a lone quote after a number is an error downstream
                }
            }
            return make(TokKind::Number, begin);
        }
        // 'hFF without a size
        std::uint32_t save = pos_;
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 's' || text_[pos_] == 'S'))
            ++pos_;
        if (pos_ < text_.size() && std::strchr("bodhBODH", text_[pos_])) {
            ++pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                    text_[pos_] == '?'))
                ++pos_;
            return make(TokKind::Number, begin);
        }
        pos_ = save;
    }

    if (c == '"') {
        ++pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size())
                ++pos_;
            ++pos_;
        }
        if (pos_ >= text_.size()) {
            auto [line, col] = sm_.line_col(file_, begin);
            throw SyntaxError(
                Diagnostic{Severity::Error, sm_.file(file_).path, line, col, "unterminated string"});
        }
        ++pos_;
        return make(TokKind::String, begin);
    }

    auto rest = text_.substr(pos_);
    for (auto op : multi_ops) {
        if (rest.substr(0, op.size()) == op) {
            pos_ += static_cast<std::uint32_t>(op.size());
            return make(TokKind::Operator, begin);
        }
    }
    static const std::string_view singles = "()[]{};:,.@#?=+-*/%<>!~&|^";
    if (singles.find(c) != std::string_view::npos) {
        ++pos_;
        return make(TokKind::Operator, begin);
    }

    auto [line, col] = sm_.line_col(file_, begin);
    throw SyntaxError(Diagnostic{Severity::Error, sm_.file(file_).path, line, col,
                                 std::string("unexpected character '") + c + "'"});
}

std::vector<Token> lex_file(const SourceManager& sm, std::uint32_t file_id) {
    Lexer lex(sm, file_id);
    std::vector<Token> out;
    for (;;) {
        Token t = lex.next();
        bool eof = t.is(TokKind::Eof);
        out.push_back(std::move(t));
        if (eof)
            break;
    }
    return out;
}

bool is_verilog_keyword(std::string_view s) {
    static const std::unordered_set<std::string_view> kw = {
        "module", "endmodule", "input", "output", "inout", "wire", "reg", "integer", "parameter",
        "localparam", "assign", "always", "begin", "end", "if", "else", "case", "casex", "casez",
        "endcase", "default", "for", "posedge", "negedge", "or", "and", "not", "signed", "initial",
        "function", "endfunction", "task", "endtask", "generate", "endgenerate", "genvar", "while",
        "repeat", "forever", "wait", "defparam", "specify", "endspecify", "real", "time", "event",
        "supply0", "supply1", "tri", "assert", "property", "endproperty", "disable", "iff",
        "throughout", "within", "intersect",
    };
    return kw.count(s) > 0;
}

} // namespace keysig
