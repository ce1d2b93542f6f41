// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "keysig/source.hpp"

namespace keysig {

enum class Severity { Warning, Error };

/// One reported problem, formatted as "path:line:col: severity: message".
struct Diagnostic {
    Severity severity = Severity::Error;
    std::string path;
    std::uint32_t line = 0;
    std::uint32_t col = 0;
    std::string message;

    std::string str() const;
};

class DiagnosticEngine {
public:
    /// Exact duplicates (same severity, position and message) are
    /// suppressed so that parse-time and graph-time checks can overlap.
    void report(Diagnostic d);
    void report(Severity sev, const SourceManager& sm, SourceSpan span, std::string message);

    const std::vector<Diagnostic>& all() const { return diags_; }
    bool has_errors() const;
    std::size_t error_count() const;
    void print(std::ostream& os) const;
    void clear() { diags_.clear(); }

private:
    std::vector<Diagnostic> diags_;
};

// ---- error hierarchy -------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Parse-level failure carrying a positioned diagnostic.
class ParseError : public Error {
public:
    explicit ParseError(Diagnostic d) : Error(d.str()), diagnostic(std::move(d)) {}
    Diagnostic diagnostic;
};

class SyntaxError : public ParseError {
public:
    using ParseError::ParseError;
};

/// Recognized Verilog that this frontend deliberately rejects
/// (generate blocks, functions, tasks, most preprocessor directives).
class UnsupportedConstruct : public ParseError {
public:
    using ParseError::ParseError;
};

class HierarchyError : public Error {
public:
    using Error::Error;
};
class AmbiguousTop : public HierarchyError {
public:
    using HierarchyError::HierarchyError;
};
class CyclicInstantiation : public HierarchyError {
public:
    using HierarchyError::HierarchyError;
};
class UnresolvedModule : public HierarchyError {
public:
    using HierarchyError::HierarchyError;
};

class UnknownSignal : public Error {
public:
    using Error::Error;
};
class EmptyGraph : public Error {
public:
    using Error::Error;
};
class SpanMismatch : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};
class TransportError : public Error {
public:
    using Error::Error;
};
class AuthError : public Error {
public:
    using Error::Error;
};
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};
class EmptyBatch : public Error {
public:
    using Error::Error;
};

} // namespace keysig
