#include "lipfd/config.hpp"

#include "lipfd/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lipfd {

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for " + key + ": " + v);
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + key + ": " + v);
    }
}

int parse_int(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(n);
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + key + ": " + v);
    }
}

uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<uint64_t>(n);
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + key + ": " + v);
    }
}

std::array<double, 3> parse_ratio_triple(const std::string& v, const std::string& key) {
    std::array<double, 3> out{};
    std::stringstream ss(v);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= 3) throw ConfigError(key + ": expected three comma-separated values");
        out[static_cast<size_t>(i++)] = parse_double(item, key);
    }
    if (i != 3) throw ConfigError(key + ": expected three comma-separated values");
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "window_size") cfg.window_size = parse_int(value, key);
    else if (key == "frame_side") cfg.frame_side = parse_int(value, key);
    else if (key == "band_height") cfg.band_height = parse_int(value, key);
    else if (key == "crop_ratios") cfg.crop_ratios = parse_ratio_triple(value, key);
    else if (key == "anchor_mode") cfg.anchor_mode = value;
    else if (key == "sample_rate") cfg.sample_rate = parse_int(value, key);
    else if (key == "mel_bins") cfg.mel_bins = parse_int(value, key);
    else if (key == "mel_window_ms") cfg.mel_window_ms = parse_double(value, key);
    else if (key == "mel_hop_ms") cfg.mel_hop_ms = parse_double(value, key);
    else if (key == "log_floor") cfg.log_floor = parse_double(value, key);
    else if (key == "denoise") cfg.denoise = parse_bool(value, key);
    else if (key == "backbone") cfg.backbone = value;
    else if (key == "d_r") cfg.d_r = parse_int(value, key);
    else if (key == "region_c1") cfg.region_c1 = parse_int(value, key);
    else if (key == "region_c2") cfg.region_c2 = parse_int(value, key);
    else if (key == "region_input_side") cfg.region_input_side = parse_int(value, key);
    else if (key == "classifier_hidden") cfg.classifier_hidden = parse_int(value, key);
    else if (key == "k") cfg.k = parse_double(value, key);
    else if (key == "lambda_ra") cfg.lambda_ra = parse_double(value, key);
    else if (key == "unfreeze_backbone") cfg.unfreeze_backbone = parse_bool(value, key);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(value, key);
    else if (key == "batch_size") cfg.batch_size = parse_int(value, key);
    else if (key == "epochs") cfg.epochs = parse_int(value, key);
    else if (key == "workers") cfg.workers = parse_int(value, key);
    else if (key == "expand_factor") cfg.expand_factor = parse_int(value, key);
    else if (key == "augment_prob") cfg.augment_prob = parse_double(value, key);
    else if (key == "threshold") cfg.threshold = parse_double(value, key);
    else if (key == "synth_clip_seconds") cfg.synth_clip_seconds = parse_double(value, key);
    else if (key == "synth_fps") cfg.synth_fps = parse_double(value, key);
    else if (key == "synth_desync_seconds") cfg.synth_desync_seconds = parse_double(value, key);
    else if (key == "synth_fake_mode") cfg.synth_fake_mode = value;
    else if (key == "seed") cfg.seed = parse_u64(value, key);
    else if (key == "cache_root") cfg.cache_root = value;
    else throw ConfigError("unknown config key: " + key);
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line missing '=': " + s, lineno);
        }
        apply_config_line(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (window_size < 1) throw ConfigError("window_size must be >= 1");
    if (frame_side < 8) throw ConfigError("frame_side must be >= 8");
    if (band_height < 1) throw ConfigError("band_height must be >= 1");
    for (double r : crop_ratios) {
        if (!(r > 0.0 && r <= 1.0)) throw ConfigError("crop ratios must lie in (0,1]");
    }
    if (crop_ratios[0] < crop_ratios[1] || crop_ratios[1] < crop_ratios[2]) {
        throw ConfigError("crop ratios must be non-increasing (head, face, lip)");
    }
    if (anchor_mode != "fixed" && anchor_mode != "landmarks") {
        throw ConfigError("anchor_mode must be fixed or landmarks");
    }
    if (sample_rate < 1000) throw ConfigError("sample_rate too small");
    if (mel_bins < 4) throw ConfigError("mel_bins must be >= 4");
    if (mel_window_ms <= 0 || mel_hop_ms <= 0) throw ConfigError("mel window/hop must be positive");
    if (log_floor <= 0) throw ConfigError("log_floor must be positive");
    if (d_r < 1 || region_c1 < 1 || region_c2 < 1) throw ConfigError("region dims must be positive");
    if (region_input_side < 8) throw ConfigError("region_input_side must be >= 8");
    if (classifier_hidden < 1) throw ConfigError("classifier_hidden must be positive");
    if (k <= 0) throw ConfigError("k must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (expand_factor < 1) throw ConfigError("expand_factor must be >= 1");
    if (augment_prob < 0.0 || augment_prob > 1.0) throw ConfigError("augment_prob must be in [0,1]");
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("threshold must be in [0,1]");
    if (synth_fake_mode != "shift" && synth_fake_mode != "resample") {
        throw ConfigError("synth_fake_mode must be shift or resample");
    }
    if (synth_clip_seconds <= 0 || synth_fps <= 0) throw ConfigError("synth clip/fps must be positive");
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o.precision(17);
    o << "window_size=" << c.window_size << "\n";
    o << "frame_side=" << c.frame_side << "\n";
    o << "band_height=" << c.band_height << "\n";
    o << "crop_ratios=" << c.crop_ratios[0] << "," << c.crop_ratios[1] << "," << c.crop_ratios[2] << "\n";
    o << "anchor_mode=" << c.anchor_mode << "\n";
    o << "sample_rate=" << c.sample_rate << "\n";
    o << "mel_bins=" << c.mel_bins << "\n";
    o << "mel_window_ms=" << c.mel_window_ms << "\n";
    o << "mel_hop_ms=" << c.mel_hop_ms << "\n";
    o << "log_floor=" << c.log_floor << "\n";
    o << "denoise=" << (c.denoise ? "true" : "false") << "\n";
    o << "backbone=" << c.backbone << "\n";
    o << "d_r=" << c.d_r << "\n";
    o << "region_c1=" << c.region_c1 << "\n";
    o << "region_c2=" << c.region_c2 << "\n";
    o << "region_input_side=" << c.region_input_side << "\n";
    o << "classifier_hidden=" << c.classifier_hidden << "\n";
    o << "k=" << c.k << "\n";
    o << "lambda_ra=" << c.lambda_ra << "\n";
    o << "unfreeze_backbone=" << (c.unfreeze_backbone ? "true" : "false") << "\n";
    o << "learning_rate=" << c.learning_rate << "\n";
    o << "batch_size=" << c.batch_size << "\n";
    o << "epochs=" << c.epochs << "\n";
    o << "workers=" << c.workers << "\n";
    o << "expand_factor=" << c.expand_factor << "\n";
    o << "augment_prob=" << c.augment_prob << "\n";
    o << "threshold=" << c.threshold << "\n";
    o << "synth_clip_seconds=" << c.synth_clip_seconds << "\n";
    o << "synth_fps=" << c.synth_fps << "\n";
    o << "synth_desync_seconds=" << c.synth_desync_seconds << "\n";
    o << "synth_fake_mode=" << c.synth_fake_mode << "\n";
    o << "seed=" << c.seed << "\n";
    o << "cache_root=" << c.cache_root << "\n";
    return o.str();
}

std::filesystem::path resolve_cache_root(const RunConfig& cfg) {
    if (const char* env = std::getenv("LIPFD_CACHE"); env != nullptr && *env != '\0') {
        return std::filesystem::path(env);
    }
    return std::filesystem::path(cfg.cache_root);
}

}  // namespace lipfd
