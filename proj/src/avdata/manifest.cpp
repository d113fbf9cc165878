#include "lipfd/avdata.hpp"
#include "lipfd/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace lipfd::avdata {

namespace {

const std::vector<std::string> kManifestKeys = {
    "clip_id", "frame_dir", "audio_path", "label", "generator", "split", "fps", "sample_rate"};

int parse_label(const std::string& v, int lineno) {
    if (v == "real" || v == "0") return 0;
    if (v == "fake" || v == "1") return 1;
    throw ParseError("label must be real/fake/0/1, got '" + v + "'", lineno);
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> frames;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() == ".png") frames.push_back(entry.path());
    }
    // Zero-padded numeric names, so lexicographic order is frame order.
    std::sort(frames.begin(), frames.end());
    return frames;
}

}  // namespace

std::vector<ClipRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open manifest: " + path.string());
    const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";

    std::vector<ClipRecord> records;
    std::vector<std::string> missing_media;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::map<std::string, std::string> kv;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) {
            size_t eq = field.find('=');
            if (eq == std::string::npos) {
                throw ParseError("manifest field missing '=': '" + field + "'", lineno);
            }
            std::string key = field.substr(0, eq);
            if (std::find(kManifestKeys.begin(), kManifestKeys.end(), key) == kManifestKeys.end()) {
                throw ParseError("unknown manifest key: '" + key + "'", lineno);
            }
            if (!kv.emplace(key, field.substr(eq + 1)).second) {
                throw ParseError("duplicate manifest key: '" + key + "'", lineno);
            }
        }
        for (const auto& key : kManifestKeys) {
            if (kv.find(key) == kv.end()) {
                throw ParseError("manifest record missing key '" + key + "'", lineno);
            }
        }

        ClipRecord rec;
        rec.clip_id = kv["clip_id"];
        rec.frame_dir = std::filesystem::path(kv["frame_dir"]);
        if (rec.frame_dir.is_relative()) rec.frame_dir = base / rec.frame_dir;
        rec.audio_path = std::filesystem::path(kv["audio_path"]);
        if (rec.audio_path.is_relative()) rec.audio_path = base / rec.audio_path;
        rec.label = parse_label(kv["label"], lineno);
        rec.generator = kv["generator"];
        rec.split = kv["split"];
        if (rec.split != "train" && rec.split != "val" && rec.split != "test") {
            throw ParseError("split must be train/val/test, got '" + rec.split + "'", lineno);
        }
        try {
            rec.fps = std::stod(kv["fps"]);
            rec.sample_rate = std::stoi(kv["sample_rate"]);
        } catch (const std::exception&) {
            throw ParseError("bad numeric field in manifest record", lineno);
        }
        if (rec.fps <= 0.0) throw ParseError("fps must be positive", lineno);
        if (rec.sample_rate <= 0) throw ParseError("sample_rate must be positive", lineno);

        bool ok = true;
        if (!std::filesystem::is_directory(rec.frame_dir)) {
            ok = false;
        } else {
            rec.frames = list_frames(rec.frame_dir);
            rec.frame_count = static_cast<int>(rec.frames.size());
            if (rec.frame_count == 0) ok = false;
        }
        if (!std::filesystem::is_regular_file(rec.audio_path)) ok = false;
        if (!ok) missing_media.push_back(rec.clip_id);

        records.push_back(std::move(rec));
    }

    if (!missing_media.empty()) {
        std::string msg = "manifest references missing media for clip_ids:";
        for (const auto& id : missing_media) msg += " " + id;
        throw ValidationError(msg);
    }
    return records;
}

}  // namespace lipfd::avdata
