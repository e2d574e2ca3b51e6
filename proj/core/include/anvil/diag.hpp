#pragma once

#include "anvil/source.hpp"

#include <optional>
#include <string>
#include <vector>

namespace anvil {

enum class Severity { Error, Warning };

/// Stable machine-readable category for a diagnostic.
enum class DiagClass {
    Lex,
    Syntax,
    Resolve,
    ValueUse,
    RegMutation,
    SendCoverage,
    SendOverlap,
    SyncStatic,
    SyncDependent,
    Structure, // program-level wiring problems (endpoints, spawns, ...)
    Codegen,
    Internal,
};

const char* diag_class_name(DiagClass c);

struct DiagNote {
    std::string text;
    std::optional<SourceSpan> span;
};

struct Diagnostic {
    Severity severity = Severity::Error;
    DiagClass klass = DiagClass::Internal;
    std::string message;
    SourceSpan span;
    std::vector<DiagNote> notes;
};

/// Collects diagnostics, deduplicates them, and renders them in the
/// caret style used throughout the tool or as JSON.
class DiagnosticEngine {
  public:
    explicit DiagnosticEngine(const SourceManager& sm) : sm_(sm) {}

    void report(Diagnostic d);
    Diagnostic& note_on_last(std::string text, std::optional<SourceSpan> span = {});

    const std::vector<Diagnostic>& all() const { return diags_; }
    bool has_errors() const;
    size_t error_count() const;

    /// Sorts by (file, span, class); identical (class, span, message)
    /// entries collapse to one. Diagnostic output is deterministic.
    void finalize();

    std::string render_human() const;
    std::string render_json() const;

    static std::string render_one_human(const SourceManager& sm, const Diagnostic& d);

  private:
    const SourceManager& sm_;
    std::vector<Diagnostic> diags_;
};

} // namespace anvil
