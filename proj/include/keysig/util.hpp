// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace keysig {

/// Case-insensitive glob match supporting `*` and `?`.
bool glob_match(std::string_view pattern, std::string_view name);

/// Whitespace-delimited token count, used wherever a prompt/slice size
/// estimate is needed.
std::size_t count_tokens(std::string_view text);

/// FNV-1a 64-bit hash, rendered as "fnv1a64:<hex>". Stable across runs.
std::string fnv1a_hex(std::string_view data);

/// Replaces characters outside [A-Za-z0-9._-] so a qualified signal name
/// can be used as a file or directory name.
std::string sanitize_filename(std::string_view name);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

} // namespace keysig
