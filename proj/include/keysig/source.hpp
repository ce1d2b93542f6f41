// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace keysig {

/// Byte range [begin, end) inside one source file. file is an index into
/// the owning SourceManager.
struct SourceSpan {
    std::uint32_t file = 0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    bool valid() const { return end >= begin; }
    bool operator==(const SourceSpan&) const = default;
};

/// One loaded source file with a line-start index for span -> line/col
/// mapping. Text is normalized to UTF-8 (Latin-1 bytes are transcoded on
/// load when the raw bytes are not valid UTF-8).
struct SourceFile {
    std::string path;
    std::string text;
    std::vector<std::uint32_t> line_starts; // byte offset of each line, line_starts[0] == 0

    void index_lines();
    // 1-based line/column for a byte offset.
    std::pair<std::uint32_t, std::uint32_t> line_col(std::uint32_t offset) const;
};

/// Owns all SourceFiles of a run. File ids in SourceSpan index into this.
class SourceManager {
public:
    // Loads from disk. Throws IoError if unreadable or empty.
    std::uint32_t load(const std::string& path);
    // Registers in-memory text under a pseudo path (tests, fragments).
    std::uint32_t add_virtual(const std::string& path, std::string text);

    const SourceFile& file(std::uint32_t id) const { return files_.at(id); }
    std::size_t size() const { return files_.size(); }

    std::string_view slice(const SourceSpan& span) const;
    std::pair<std::uint32_t, std::uint32_t> line_col(std::uint32_t file, std::uint32_t offset) const;

private:
    std::vector<SourceFile> files_;
};

/// True when every byte sequence in text forms valid UTF-8.
bool is_valid_utf8(std::string_view text);
/// Reinterprets each byte as a Latin-1 code point and re-encodes as UTF-8.
std::string latin1_to_utf8(std::string_view text);

} // namespace keysig
