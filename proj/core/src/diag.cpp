#include "anvil/diag.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <tuple>

#include "json.hpp"

namespace anvil {

const char* diag_class_name(DiagClass c) {
    switch (c) {
        case DiagClass::Lex: return "lex";
        case DiagClass::Syntax: return "syntax";
        case DiagClass::Resolve: return "resolve";
        case DiagClass::ValueUse: return "value-use";
        case DiagClass::RegMutation: return "register-mutation";
        case DiagClass::SendCoverage: return "send-coverage";
        case DiagClass::SendOverlap: return "send-overlap";
        case DiagClass::SyncStatic: return "sync-static";
        case DiagClass::SyncDependent: return "sync-dependent";
        case DiagClass::Structure: return "structure";
        case DiagClass::Codegen: return "codegen";
        case DiagClass::Internal: return "internal";
    }
    return "unknown";
}

void DiagnosticEngine::report(Diagnostic d) { diags_.push_back(std::move(d)); }

Diagnostic& DiagnosticEngine::note_on_last(std::string text, std::optional<SourceSpan> span) {
    diags_.back().notes.push_back({std::move(text), span});
    return diags_.back();
}

bool DiagnosticEngine::has_errors() const {
    return std::any_of(diags_.begin(), diags_.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

size_t DiagnosticEngine::error_count() const {
    return static_cast<size_t>(std::count_if(
        diags_.begin(), diags_.end(),
        [](const Diagnostic& d) { return d.severity == Severity::Error; }));
}

void DiagnosticEngine::finalize() {
    auto key = [](const Diagnostic& d) {
        return std::tuple(d.span.file, d.span.line_lo, d.span.col_lo, d.span.line_hi,
                          d.span.col_hi, static_cast<int>(d.klass), d.message);
    };
    std::stable_sort(diags_.begin(), diags_.end(),
                     [&](const Diagnostic& a, const Diagnostic& b) { return key(a) < key(b); });
    diags_.erase(std::unique(diags_.begin(), diags_.end(),
                             [&](const Diagnostic& a, const Diagnostic& b) {
                                 return key(a) == key(b);
                             }),
                 diags_.end());
}

static void render_span(const SourceManager& sm, const SourceSpan& s, std::string& out) {
    out += fmt::format("{}:{}:{}:\n", sm.name(s.file), s.line_lo, s.col_lo);
    std::string_view line = sm.line(s.file, s.line_lo);
    out += fmt::format("{:>7}| {}\n", s.line_lo, line);
    uint32_t first = s.col_lo;
    uint32_t last = s.line_hi == s.line_lo ? s.col_hi
                                           : static_cast<uint32_t>(line.size());
    if (last < first) last = first;
    std::string carets(first - 1, ' ');
    carets.append(last - first + 1, '^');
    out += fmt::format("       | {}\n", carets);
}

std::string DiagnosticEngine::render_one_human(const SourceManager& sm, const Diagnostic& d) {
    std::string out;
    out += d.message;
    out += '\n';
    render_span(sm, d.span, out);
    for (const DiagNote& n : d.notes) {
        out += fmt::format("note: {}\n", n.text);
        if (n.span) render_span(sm, *n.span, out);
    }
    return out;
}

std::string DiagnosticEngine::render_human() const {
    std::string out;
    for (const Diagnostic& d : diags_) {
        if (d.severity == Severity::Warning) out += "warning: ";
        out += render_one_human(sm_, d);
    }
    return out;
}

std::string DiagnosticEngine::render_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const Diagnostic& d : diags_) {
        nlohmann::json j;
        j["severity"] = d.severity == Severity::Error ? "error" : "warning";
        j["class"] = diag_class_name(d.klass);
        j["message"] = d.message;
        j["file"] = sm_.name(d.span.file);
        j["line_start"] = d.span.line_lo;
        j["col_start"] = d.span.col_lo;
        j["line_end"] = d.span.line_hi;
        j["col_end"] = d.span.col_hi;
        nlohmann::json notes = nlohmann::json::array();
        for (const DiagNote& n : d.notes) {
            nlohmann::json nj;
            nj["text"] = n.text;
            if (n.span) {
                nj["file"] = sm_.name(n.span->file);
                nj["line_start"] = n.span->line_lo;
                nj["col_start"] = n.span->col_lo;
                nj["line_end"] = n.span->line_hi;
                nj["col_end"] = n.span->col_hi;
            }
            notes.push_back(nj);
        }
        j["notes"] = notes;
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

} // namespace anvil
