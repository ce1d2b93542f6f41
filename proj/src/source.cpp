// SPDX-License-Identifier: Apache-2.0
#include "keysig/source.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "keysig/diagnostics.hpp"

namespace keysig {

bool is_valid_utf8(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = text[i];
        std::size_t extra;
        if (c < 0x80)
            extra = 0;
        else if ((c & 0xE0) == 0xC0)
            extra = 1;
        else if ((c & 0xF0) == 0xE0)
            extra = 2;
        else if ((c & 0xF8) == 0xF0)
            extra = 3;
        else
            return false;
        if (extra > 0 && i + extra >= text.size())
            return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80)
                return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string latin1_to_utf8(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

void SourceFile::index_lines() {
    line_starts.clear();
    line_starts.push_back(0);
    for (std::uint32_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n')
            line_starts.push_back(i + 1);
    }
}

std::pair<std::uint32_t, std::uint32_t> SourceFile::line_col(std::uint32_t offset) const {
    auto it = std::upper_bound(line_starts.begin(), line_starts.end(), offset);
    std::uint32_t line = static_cast<std::uint32_t>(it - line_starts.begin()); // 1-based
    std::uint32_t col = offset - line_starts[line - 1] + 1;
    return {line, col};
}

std::uint32_t SourceManager::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string raw = ss.str();
    if (raw.empty())
        throw IoError("'" + path + "' is empty");
    return add_virtual(path, std::move(raw));
}

std::uint32_t SourceManager::add_virtual(const std::string& path, std::string text) {
    if (!is_valid_utf8(text))
        text = latin1_to_utf8(text);
    SourceFile f;
    f.path = path;
    f.text = std::move(text);
    f.index_lines();
    files_.push_back(std::move(f));
    return static_cast<std::uint32_t>(files_.size() - 1);
}

std::string_view SourceManager::slice(const SourceSpan& span) const {
    const auto& f = files_.at(span.file);
    std::uint32_t end = std::min<std::uint32_t>(span.end, static_cast<std::uint32_t>(f.text.size()));
    if (span.begin > end)
        return {};
    return std::string_view(f.text).substr(span.begin, end - span.begin);
}

std::pair<std::uint32_t, std::uint32_t> SourceManager::line_col(std::uint32_t file, std::uint32_t offset) const {
    return files_.at(file).line_col(offset);
}

std::string Diagnostic::str() const {
    std::ostringstream os;
    os << path << ':' << line << ':' << col << ": "
       << (severity == Severity::Error ? "error" : "warning") << ": " << message;
    return os.str();
}

void DiagnosticEngine::report(Diagnostic d) {
    for (const auto& prev : diags_)
        if (prev.severity == d.severity && prev.path == d.path && prev.line == d.line &&
            prev.col == d.col && prev.message == d.message)
            return;
    diags_.push_back(std::move(d));
}

void DiagnosticEngine::report(Severity sev, const SourceManager& sm, SourceSpan span, std::string message) {
    auto [line, col] = sm.line_col(span.file, span.begin);
    report(Diagnostic{sev, sm.file(span.file).path, line, col, std::move(message)});
}

bool DiagnosticEngine::has_errors() const {
    return error_count() > 0;
}

std::size_t DiagnosticEngine::error_count() const {
    std::size_t n = 0;
    for (const auto& d : diags_)
        if (d.severity == Severity::Error)
            ++n;
    return n;
}

void DiagnosticEngine::print(std::ostream& os) const {
    for (const auto& d : diags_)
        os << d.str() << '\n';
}

} // namespace keysig
