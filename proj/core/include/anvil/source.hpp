#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace anvil {

using FileId = uint32_t;

/// Half-open byte-oriented source region with 1-based line/column endpoints.
/// `line_hi`/`col_hi` point at the last character of the region (inclusive).
struct SourceSpan {
    FileId file = 0;
    uint32_t line_lo = 1, col_lo = 1;
    uint32_t line_hi = 1, col_hi = 1;

    bool operator==(const SourceSpan&) const = default;

    /// True if `inner` lies entirely within this span.
    bool contains(const SourceSpan& inner) const {
        if (inner.file != file) return false;
        bool lo_ok = inner.line_lo > line_lo ||
                     (inner.line_lo == line_lo && inner.col_lo >= col_lo);
        bool hi_ok = inner.line_hi < line_hi ||
                     (inner.line_hi == line_hi && inner.col_hi <= col_hi);
        return lo_ok && hi_ok;
    }

    static SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
        SourceSpan s = a;
        if (b.line_lo < s.line_lo || (b.line_lo == s.line_lo && b.col_lo < s.col_lo)) {
            s.line_lo = b.line_lo;
            s.col_lo = b.col_lo;
        }
        if (b.line_hi > s.line_hi || (b.line_hi == s.line_hi && b.col_hi > s.col_hi)) {
            s.line_hi = b.line_hi;
            s.col_hi = b.col_hi;
        }
        return s;
    }
};

/// Owns the text of all compilation units and maps spans back to lines.
class SourceManager {
  public:
    FileId add(std::string name, std::string text);

    const std::string& name(FileId id) const { return files_[id].name; }
    const std::string& text(FileId id) const { return files_[id].text; }
    size_t file_count() const { return files_.size(); }

    /// 1-based line contents, without the trailing newline.
    std::string_view line(FileId id, uint32_t line_no) const;

  private:
    struct File {
        std::string name;
        std::string text;
        std::vector<size_t> line_starts;
    };
    std::vector<File> files_;
};

} // namespace anvil
