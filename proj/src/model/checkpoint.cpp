#include "lipfd/model.hpp"

#include "lipfd/errors.hpp"

#include <cstring>
#include <fstream>

namespace lipfd::model {

namespace {

constexpr char kMagic[8] = {'L', 'F', 'D', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;

void w_u32(std::ostream& o, uint32_t v) { o.write(reinterpret_cast<const char*>(&v), 4); }
void w_u64(std::ostream& o, uint64_t v) { o.write(reinterpret_cast<const char*>(&v), 8); }
void w_str(std::ostream& o, const std::string& s) {
    w_u32(o, static_cast<uint32_t>(s.size()));
    o.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void w_tensor(std::ostream& o, const std::string& name, const Tensor& t) {
    w_str(o, name);
    w_u32(o, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) w_u32(o, static_cast<uint32_t>(d));
    w_u64(o, static_cast<uint64_t>(t.data.size()));
    o.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

uint32_t r_u32(std::istream& i) {
    uint32_t v = 0;
    i.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
uint64_t r_u64(std::istream& i) {
    uint64_t v = 0;
    i.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
std::string r_str(std::istream& i) {
    uint32_t n = r_u32(i);
    std::string s(n, '\0');
    i.read(s.data(), n);
    return s;
}
Tensor r_tensor(std::istream& i, std::string* name) {
    *name = r_str(i);
    uint32_t nd = r_u32(i);
    std::vector<int> shape(nd);
    for (uint32_t d = 0; d < nd; ++d) shape[d] = static_cast<int>(r_u32(i));
    uint64_t numel = r_u64(i);
    Tensor t;
    t.shape = std::move(shape);
    t.data.resize(numel);
    i.read(reinterpret_cast<char*>(t.data.data()),
           static_cast<std::streamsize>(numel * sizeof(double)));
    return t;
}

double meta_d(const std::map<std::string, std::string>& m, const std::string& k) {
    auto it = m.find(k);
    if (it == m.end()) throw ValidationError("checkpoint missing meta key: " + k);
    return std::stod(it->second);
}

int meta_i(const std::map<std::string, std::string>& m, const std::string& k) {
    auto it = m.find(k);
    if (it == m.end()) throw ValidationError("checkpoint missing meta key: " + k);
    return std::stoi(it->second);
}

std::string meta_s(const std::map<std::string, std::string>& m, const std::string& k) {
    auto it = m.find(k);
    if (it == m.end()) throw ValidationError("checkpoint missing meta key: " + k);
    return it->second;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const LipFdModel& model,
                     const Adam* opt, const CheckpointExtra& extra) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open checkpoint for write: " + path.string());
    out.write(kMagic, 8);
    w_u32(out, kVersion);

    std::map<std::string, std::string> meta = model.meta();
    for (const auto& [k, v] : extra.meta) meta[k] = v;
    if (opt != nullptr) meta["opt.step"] = std::to_string(opt->step_count());

    w_u32(out, static_cast<uint32_t>(meta.size()));
    for (const auto& [k, v] : meta) {
        w_str(out, k);
        w_str(out, v);
    }

    const ParamStore& store = model.params();
    std::vector<std::string> names = store.names();
    uint64_t count = names.size();
    if (opt != nullptr) {
        count += const_cast<Adam*>(opt)->moment1().size() + const_cast<Adam*>(opt)->moment2().size();
    }
    w_u64(out, count);
    for (const auto& n : names) w_tensor(out, n, store.get(n));
    if (opt != nullptr) {
        for (const auto& [n, t] : const_cast<Adam*>(opt)->moment1()) w_tensor(out, "opt.m." + n, t);
        for (const auto& [n, t] : const_cast<Adam*>(opt)->moment2()) w_tensor(out, "opt.v." + n, t);
    }
    if (!out) throw Error("checkpoint write failed: " + path.string());
}

LipFdModel load_checkpoint(const std::filesystem::path& path, Adam* opt, LoadedCheckpoint* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw ValidationError("not a checkpoint file: " + path.string());
    }
    uint32_t version = r_u32(in);
    if (version != kVersion) {
        throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    }

    uint32_t n_meta = r_u32(in);
    std::map<std::string, std::string> meta;
    for (uint32_t i = 0; i < n_meta; ++i) {
        std::string k = r_str(in);
        meta[k] = r_str(in);
    }

    ModelConfig cfg;
    cfg.t = meta_i(meta, "t");
    cfg.frame_side = meta_i(meta, "frame_side");
    cfg.band_height = meta_i(meta, "band_height");
    {
        std::string r = meta_s(meta, "ratios");
        size_t c1 = r.find(','), c2 = r.rfind(',');
        if (c1 == std::string::npos || c2 == c1) throw ValidationError("bad ratios in checkpoint");
        cfg.ratios = {std::stod(r.substr(0, c1)), std::stod(r.substr(c1 + 1, c2 - c1 - 1)),
                      std::stod(r.substr(c2 + 1))};
    }
    cfg.backbone_id = meta_s(meta, "backbone");
    cfg.anchor_mode = regions::anchor_mode_from(meta_s(meta, "anchor_mode"));
    cfg.d_r = meta_i(meta, "d_r");
    cfg.region_c1 = meta_i(meta, "region_c1");
    cfg.region_c2 = meta_i(meta, "region_c2");
    cfg.region_input_side = meta_i(meta, "region_input_side");
    cfg.classifier_hidden = meta_i(meta, "classifier_hidden");
    cfg.k = meta_d(meta, "k");
    cfg.lambda_ra = meta_d(meta, "lambda_ra");
    cfg.unfreeze_backbone = meta_s(meta, "unfreeze_backbone") == "true";
    cfg.seed = static_cast<uint64_t>(std::stoull(meta_s(meta, "seed")));

    LipFdModel model(cfg, true);

    uint64_t n_tensors = r_u64(in);
    size_t applied = 0;
    for (uint64_t i = 0; i < n_tensors; ++i) {
        std::string name;
        Tensor t = r_tensor(in, &name);
        if (!in) throw ValidationError("truncated checkpoint: " + path.string());
        if (name.rfind("opt.m.", 0) == 0) {
            if (opt != nullptr) opt->moment1()[name.substr(6)] = std::move(t);
            continue;
        }
        if (name.rfind("opt.v.", 0) == 0) {
            if (opt != nullptr) opt->moment2()[name.substr(6)] = std::move(t);
            continue;
        }
        if (!model.params().has(name)) {
            throw ValidationError("checkpoint has unexpected parameter: " + name);
        }
        Tensor& dst = model.params().get(name);
        if (dst.shape != t.shape) {
            throw ValidationError("checkpoint parameter shape mismatch: " + name);
        }
        dst = std::move(t);
        ++applied;
    }
    if (applied != model.params().size()) {
        throw ValidationError("checkpoint is missing parameters (" + std::to_string(applied) +
                              " of " + std::to_string(model.params().size()) + ")");
    }
    if (opt != nullptr && meta.count("opt.step") != 0) {
        opt->set_step_count(std::stoll(meta["opt.step"]));
    }
    if (info != nullptr) {
        info->config = cfg;
        info->meta = meta;
        info->epoch = meta.count("epoch") != 0 ? std::stoi(meta["epoch"]) : 0;
    }
    return model;
}

}  // namespace lipfd::model
