#include "lipfd/dataset.hpp"

#include "lipfd/errors.hpp"

#include <fstream>

namespace lipfd::avdata {

CacheDataset CacheDataset::open(const std::filesystem::path& dir) {
    CacheDataset ds;
    ds.dir_ = dir;
    std::filesystem::path index = dir / "index.tsv";
    std::ifstream in(index);
    if (!in) throw ValidationError("cannot open cache index: " + index.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("cache index line missing tab", lineno);
        CacheEntry e;
        e.name = line.substr(0, tab);
        std::string lab = line.substr(tab + 1);
        if (lab == "0") e.label = 0;
        else if (lab == "1") e.label = 1;
        else throw ParseError("cache index label must be 0 or 1", lineno);
        ds.entries_.push_back(std::move(e));
    }
    return ds;
}

void CacheDataset::preload() {
    if (preloaded_) return;
    bytes_.resize(entries_.size());
    for (size_t i = 0; i < entries_.size(); ++i) {
        std::filesystem::path p = dir_ / entries_[i].name;
        std::ifstream f(p, std::ios::binary);
        if (!f) throw ValidationError("cache file missing: " + p.string());
        bytes_[i].assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
    preloaded_ = true;
}

WindowSample CacheDataset::load(size_t i, const WindowLayout& layout) const {
    const CacheEntry& e = entries_[i];
    Image composite;
    if (preloaded_) {
        composite = decode_image(bytes_[i]);
    } else {
        composite = load_png(dir_ / e.name);
    }
    auto [clip_id, start] = parse_name(e.name);
    return window_from_composite(clip_id, start, e.label, std::move(composite), layout);
}

int CacheDataset::count_label(int label) const {
    int n = 0;
    for (const auto& e : entries_) {
        if (e.label == label) ++n;
    }
    return n;
}

std::pair<std::string, int> CacheDataset::parse_name(const std::string& name) {
    std::string stem = name;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".png") {
        stem = stem.substr(0, stem.size() - 4);
    }
    size_t us = stem.rfind('_');
    if (us == std::string::npos || us + 1 >= stem.size()) {
        throw ValidationError("cache name not in {clip_id}_{start} form: " + name);
    }
    try {
        return {stem.substr(0, us), std::stoi(stem.substr(us + 1))};
    } catch (const std::exception&) {
        throw ValidationError("cache name has non-numeric start frame: " + name);
    }
}

void write_cache_index(const std::filesystem::path& dir, const std::vector<CacheEntry>& entries) {
    std::ofstream out(dir / "index.tsv", std::ios::binary);
    if (!out) throw ValidationError("cannot write cache index in " + dir.string());
    for (const auto& e : entries) {
        out << e.name << '\t' << e.label << '\n';
    }
}

}  // namespace lipfd::avdata
