#pragma once

#include "lipfd/avdata.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lipfd::avdata {

struct CacheEntry {
    std::string name;  // {clip_id}_{start_frame}.png
    int label = 0;
};

/// A composite cache directory: PNG composites plus an index.tsv sidecar
/// mapping names to labels. Compressed bytes can be pinned in RAM once via
/// preload(); after that load() is pure decode and safe to call from
/// multiple threads.
class CacheDataset {
public:
    static CacheDataset open(const std::filesystem::path& dir);

    size_t size() const { return entries_.size(); }
    const CacheEntry& entry(size_t i) const { return entries_[i]; }
    const std::filesystem::path& dir() const { return dir_; }

    void preload();
    bool preloaded() const { return preloaded_; }

    WindowSample load(size_t i, const WindowLayout& layout) const;

    int count_label(int label) const;

    /// Parses "{clip_id}_{start}" out of a cache file name.
    static std::pair<std::string, int> parse_name(const std::string& name);

private:
    std::filesystem::path dir_;
    std::vector<CacheEntry> entries_;
    std::vector<std::vector<uint8_t>> bytes_;
    bool preloaded_ = false;
};

void write_cache_index(const std::filesystem::path& dir, const std::vector<CacheEntry>& entries);

}  // namespace lipfd::avdata
