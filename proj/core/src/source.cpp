#include "anvil/source.hpp"

namespace anvil {

FileId SourceManager::add(std::string name, std::string text) {
    File f;
    f.name = std::move(name);
    f.text = std::move(text);
    f.line_starts.push_back(0);
    for (size_t i = 0; i < f.text.size(); ++i)
        if (f.text[i] == '\n') f.line_starts.push_back(i + 1);
    files_.push_back(std::move(f));
    return static_cast<FileId>(files_.size() - 1);
}

std::string_view SourceManager::line(FileId id, uint32_t line_no) const {
    const File& f = files_[id];
    if (line_no == 0 || line_no > f.line_starts.size()) return {};
    size_t begin = f.line_starts[line_no - 1];
    size_t end = line_no < f.line_starts.size() ? f.line_starts[line_no] : f.text.size();
    while (end > begin && (f.text[end - 1] == '\n' || f.text[end - 1] == '\r')) --end;
    return std::string_view(f.text).substr(begin, end - begin);
}

} // namespace anvil
