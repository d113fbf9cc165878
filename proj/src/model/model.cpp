#include "lipfd/model.hpp"

#include "lipfd/errors.hpp"
#include "lipfd/rng.hpp"

#include <cmath>
#include <sstream>
#include <thread>

namespace lipfd::model {

namespace {

Tensor tensor_from_image(const Image& img) {
    Tensor t = Tensor::zeros({3, img.height, img.width});
    const int64_t hw = static_cast<int64_t>(img.height) * img.width;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                t.data[static_cast<size_t>(c) * hw + static_cast<int64_t>(y) * img.width + x] =
                    img.at(y, x, c);
            }
        }
    }
    return t;
}

double vec_dot(const std::vector<double>& a, const double* w, size_t n) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += a[i] * w[i];
    return s;
}

}  // namespace

LipFdModel::LipFdModel(ModelConfig cfg, bool init)
    : cfg_(std::move(cfg)), spec_(backbone_spec(cfg_.backbone_id)) {
    if (cfg_.t < 1) throw ConfigError("model: window size must be >= 1");
    const int ch = composite_height();
    const int cw = composite_width();
    if (ch % spec_.input_side != 0 || cw % spec_.input_side != 0) {
        throw ConfigError("composite " + std::to_string(ch) + "x" + std::to_string(cw) +
                          " is not divisible by backbone input side " +
                          std::to_string(spec_.input_side));
    }
    if (spec_.input_side % spec_.patch != 0) {
        throw ConfigError("backbone input side must be divisible by patch size");
    }
    if (spec_.width % spec_.heads != 0) {
        throw ConfigError("backbone width must be divisible by head count");
    }
    if (init) {
        init_params();
        ready_ = true;
    }
}

void LipFdModel::init_params() {
    Rng rng(Rng::mix(cfg_.seed, Rng::hash_string("model-init")));
    const int vf = composite_height() / spec_.input_side;
    const int wf = composite_width() / spec_.input_side;
    const int w = spec_.width;
    const int p = spec_.patch;
    const int tokens = (spec_.input_side / p) * (spec_.input_side / p) + 1;
    const int patch_dim = 3 * p * p;

    // Stem starts as block mean-pooling: each output channel averages its own
    // input channel over the kernel footprint.
    Tensor stem = Tensor::zeros({3, 3, vf, wf});
    for (int o = 0; o < 3; ++o) {
        for (int ky = 0; ky < vf; ++ky) {
            for (int kx = 0; kx < wf; ++kx) {
                stem.data[((static_cast<size_t>(o) * 3 + o) * vf + ky) * wf + kx] =
                    1.0 / (static_cast<double>(vf) * wf);
            }
        }
    }
    params_.create("global.stem.w", std::move(stem));
    params_.create("global.stem.b", Tensor::zeros({3}));

    params_.create("global.vit.patch.w", xavier_uniform(rng, {patch_dim, w}, patch_dim, w));
    params_.create("global.vit.patch.b", Tensor::zeros({w}));
    params_.create("global.vit.cls", normal_init(rng, {1, w}, 0.02));
    params_.create("global.vit.pos", normal_init(rng, {tokens, w}, 0.02));
    for (int b = 0; b < spec_.depth; ++b) {
        std::string pre = "global.vit.blk" + std::to_string(b) + ".";
        params_.create(pre + "ln1.g", Tensor({w}, std::vector<double>(static_cast<size_t>(w), 1.0)));
        params_.create(pre + "ln1.b", Tensor::zeros({w}));
        params_.create(pre + "attn.wqkv", xavier_uniform(rng, {w, 3 * w}, w, 3 * w));
        params_.create(pre + "attn.bqkv", Tensor::zeros({3 * w}));
        params_.create(pre + "attn.wo", xavier_uniform(rng, {w, w}, w, w));
        params_.create(pre + "attn.bo", Tensor::zeros({w}));
        params_.create(pre + "ln2.g", Tensor({w}, std::vector<double>(static_cast<size_t>(w), 1.0)));
        params_.create(pre + "ln2.b", Tensor::zeros({w}));
        params_.create(pre + "mlp.w1", xavier_uniform(rng, {w, spec_.mlp_hidden}, w, spec_.mlp_hidden));
        params_.create(pre + "mlp.b1", Tensor::zeros({spec_.mlp_hidden}));
        params_.create(pre + "mlp.w2", xavier_uniform(rng, {spec_.mlp_hidden, w}, spec_.mlp_hidden, w));
        params_.create(pre + "mlp.b2", Tensor::zeros({w}));
    }
    params_.create("global.vit.ln.g", Tensor({w}, std::vector<double>(static_cast<size_t>(w), 1.0)));
    params_.create("global.vit.ln.b", Tensor::zeros({w}));
    if (spec_.out_dim != w) {
        params_.create("global.vit.proj.w", xavier_uniform(rng, {w, spec_.out_dim}, w, spec_.out_dim));
        params_.create("global.vit.proj.b", Tensor::zeros({spec_.out_dim}));
    }

    const int c1 = cfg_.region_c1, c2 = cfg_.region_c2, dr = cfg_.d_r, d = spec_.out_dim;
    params_.create("region.conv1.w", xavier_uniform(rng, {c1, 3, 3, 3}, 27, c1 * 9));
    params_.create("region.conv1.b", Tensor::zeros({c1}));
    params_.create("region.conv2.w", xavier_uniform(rng, {c2, c1, 3, 3}, c1 * 9, c2 * 9));
    params_.create("region.conv2.b", Tensor::zeros({c2}));
    params_.create("region.fc_pre.w", xavier_uniform(rng, {c2, dr}, c2, dr));
    params_.create("region.fc_pre.b", Tensor::zeros({dr}));
    params_.create("region.proj_g.w", xavier_uniform(rng, {d, dr}, d, dr));
    params_.create("region.proj_g.b", Tensor::zeros({dr}));
    params_.create("region.fc_final.w", xavier_uniform(rng, {dr, dr}, dr, dr));
    params_.create("region.fc_final.b", Tensor::zeros({dr}));

    // Zero awareness affine: every weight starts at sigmoid(0) = 0.5.
    params_.create("ra.w", Tensor::zeros({d + dr, 1}));
    params_.create("ra.b", Tensor::zeros({1}));

    const int hid = cfg_.classifier_hidden;
    params_.create("cls.w1", xavier_uniform(rng, {d + dr, hid}, d + dr, hid));
    params_.create("cls.b1", Tensor::zeros({hid}));
    // Zero head: the untrained classifier answers 0.5.
    params_.create("cls.w2", Tensor::zeros({hid, 1}));
    params_.create("cls.b2", Tensor::zeros({1}));

    if (!cfg_.unfreeze_backbone) {
        params_.set_trainable_prefix("global.", false);
    }
    if (cfg_.inference_only) {
        params_.set_trainable_prefix("", false);
    }
}

void LipFdModel::require_ready() const {
    if (!ready_) throw StateError("model parameters not initialized or loaded");
}

void LipFdModel::validate_composite(const Image& composite) const {
    if (composite.height != composite_height() || composite.width != composite_width()) {
        throw ConfigError("composite " + std::to_string(composite.height) + "x" +
                          std::to_string(composite.width) + " does not match configured " +
                          std::to_string(composite_height()) + "x" +
                          std::to_string(composite_width()));
    }
}

VarId LipFdModel::build_global(Tape& tape, TapeBindings& binds, const Image& composite,
                               bool with_grad) {
    validate_composite(composite);
    const int vf = composite_height() / spec_.input_side;
    const int wf = composite_width() / spec_.input_side;
    auto use = [&](const std::string& n) { return binds.use(tape, params_, n, with_grad); };

    VarId x = tape.leaf(tensor_from_image(composite), false);
    VarId stem = tape.conv2d(x, use("global.stem.w"), use("global.stem.b"), vf, wf,
                             PadMode::zero, 0, 0);

    VarId patches = tape.extract_patches(stem, spec_.patch);
    VarId tok = tape.add_rowvec(tape.matmul(patches, use("global.vit.patch.w")),
                                use("global.vit.patch.b"));
    VarId tokens = tape.concat_rows({use("global.vit.cls"), tok});
    tokens = tape.add(tokens, use("global.vit.pos"));

    const int heads = spec_.heads;
    const int hd = spec_.width / heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));
    for (int b = 0; b < spec_.depth; ++b) {
        std::string pre = "global.vit.blk" + std::to_string(b) + ".";
        VarId h = tape.layer_norm_rows(tokens, use(pre + "ln1.g"), use(pre + "ln1.b"));
        VarId qkv = tape.add_rowvec(tape.matmul(h, use(pre + "attn.wqkv")), use(pre + "attn.bqkv"));
        std::vector<VarId> outs;
        outs.reserve(static_cast<size_t>(heads));
        for (int hi = 0; hi < heads; ++hi) {
            VarId q = tape.slice_cols(qkv, hi * hd, (hi + 1) * hd);
            VarId kk = tape.slice_cols(qkv, spec_.width + hi * hd, spec_.width + (hi + 1) * hd);
            VarId v = tape.slice_cols(qkv, 2 * spec_.width + hi * hd, 2 * spec_.width + (hi + 1) * hd);
            VarId s = tape.scale(tape.matmul(q, tape.transpose(kk)), att_scale);
            VarId a = tape.softmax_rows(s);
            outs.push_back(tape.matmul(a, v));
        }
        VarId att = tape.add_rowvec(tape.matmul(tape.concat_cols(outs), use(pre + "attn.wo")),
                                    use(pre + "attn.bo"));
        tokens = tape.add(tokens, att);
        VarId h2 = tape.layer_norm_rows(tokens, use(pre + "ln2.g"), use(pre + "ln2.b"));
        VarId m = tape.add_rowvec(tape.matmul(h2, use(pre + "mlp.w1")), use(pre + "mlp.b1"));
        m = tape.gelu(m);
        m = tape.add_rowvec(tape.matmul(m, use(pre + "mlp.w2")), use(pre + "mlp.b2"));
        tokens = tape.add(tokens, m);
    }
    VarId final_ln = tape.layer_norm_rows(tokens, use("global.vit.ln.g"), use("global.vit.ln.b"));
    VarId cls_vec = tape.row(final_ln, 0);
    if (spec_.out_dim != spec_.width) {
        cls_vec = dense(tape, cls_vec, use("global.vit.proj.w"), use("global.vit.proj.b"));
    }
    return cls_vec;
}

VarId LipFdModel::build_region(Tape& tape, TapeBindings& binds, const Image& crop_img,
                               VarId global, bool with_grad, VarId* act_out) {
    auto use = [&](const std::string& n) { return binds.use(tape, params_, n, with_grad); };
    Image rs = resize(crop_img, cfg_.region_input_side, cfg_.region_input_side);
    VarId x = tape.leaf(tensor_from_image(rs), false);
    VarId a1 = tape.relu(tape.conv2d(x, use("region.conv1.w"), use("region.conv1.b"), 2, 2,
                                     PadMode::replicate, 1, 1));
    VarId a2 = tape.relu(tape.conv2d(a1, use("region.conv2.w"), use("region.conv2.b"), 2, 2,
                                     PadMode::replicate, 1, 1));
    if (act_out != nullptr) *act_out = a2;
    VarId g = tape.gap_hw(a2);
    VarId h = dense(tape, g, use("region.fc_pre.w"), use("region.fc_pre.b"));
    VarId cond = tape.add(h, dense(tape, global, use("region.proj_g.w"), use("region.proj_g.b")));
    VarId z = tape.gelu(cond);
    return dense(tape, z, use("region.fc_final.w"), use("region.fc_final.b"));
}

LipFdModel::ForwardOut LipFdModel::build_forward(Tape& tape, TapeBindings& binds,
                                                 const avdata::WindowSample& sample,
                                                 bool with_grad) {
    require_ready();
    if (static_cast<int>(sample.frames.size()) != cfg_.t) {
        throw ConfigError("sample has " + std::to_string(sample.frames.size()) +
                          " frames, model expects T=" + std::to_string(cfg_.t));
    }
    auto use = [&](const std::string& n) { return binds.use(tape, params_, n, with_grad); };

    ForwardOut out;
    out.pyramid = regions::crop_pyramid(sample, cfg_.anchor_mode, cfg_.ratios);
    out.global = build_global(tape, binds, sample.composite, with_grad);

    const int t = cfg_.t;
    out.region_feats.resize(static_cast<size_t>(3 * t));
    out.region_acts.resize(static_cast<size_t>(3 * t));
    std::vector<VarId> concat_entries(static_cast<size_t>(3 * t));
    for (int j = 0; j < 3; ++j) {
        const std::vector<Image>& crops = out.pyramid.scale(j);
        for (int i = 0; i < t; ++i) {
            VarId act = -1;
            VarId fr = build_region(tape, binds, crops[static_cast<size_t>(i)], out.global,
                                    with_grad, &act);
            out.region_feats[static_cast<size_t>(j) * t + i] = fr;
            out.region_acts[static_cast<size_t>(j) * t + i] = act;
            concat_entries[static_cast<size_t>(j) * t + i] = tape.concat_vec({out.global, fr});
        }
    }
    out.concat_mat = tape.stack_rows(concat_entries);

    VarId logits = tape.add_rowvec(tape.matmul(out.concat_mat, use("ra.w")), use("ra.b"));
    out.weights = tape.sigmoid(tape.reshape(logits, {3 * t}));

    const int d = spec_.out_dim + cfg_.d_r;
    VarId num = tape.matmul(tape.transpose(out.concat_mat), tape.reshape(out.weights, {3 * t, 1}));
    VarId den = tape.sum_all(out.weights);
    out.fused = tape.scale(tape.mul_scalarvar(tape.reshape(num, {d}), tape.recip(den)),
                           1.0 / static_cast<double>(t));

    VarId h1 = tape.gelu(dense(tape, out.fused, use("cls.w1"), use("cls.b1")));
    VarId logit = dense(tape, h1, use("cls.w2"), use("cls.b2"));
    out.prob = tape.sigmoid(logit);
    return out;
}

GlobalFeature LipFdModel::encode_global(const Image& composite) {
    require_ready();
    Tape tape;
    TapeBindings binds;
    VarId g = build_global(tape, binds, composite, false);
    return GlobalFeature{tape.val(g).data};
}

std::vector<RegionFeature> LipFdModel::encode_regions(const regions::CropPyramid& pyramid,
                                                      const GlobalFeature& global) {
    require_ready();
    if (static_cast<int>(global.v.size()) != spec_.out_dim) {
        throw ConfigError("global feature dim " + std::to_string(global.v.size()) +
                          " does not match backbone width " + std::to_string(spec_.out_dim));
    }
    Tape tape;
    TapeBindings binds;
    VarId g = tape.leaf(Tensor({spec_.out_dim}, global.v), false);
    std::vector<RegionFeature> feats;
    feats.reserve(static_cast<size_t>(3 * pyramid.t));
    for (int j = 0; j < 3; ++j) {
        const std::vector<Image>& crops = pyramid.scale(j);
        for (int i = 0; i < pyramid.t; ++i) {
            VarId fr = build_region(tape, binds, crops[static_cast<size_t>(i)], g, false, nullptr);
            feats.push_back(RegionFeature{tape.val(fr).data, j, i});
        }
    }
    return feats;
}

std::vector<double> LipFdModel::region_awareness(const FeatureStack& stack) const {
    require_ready();
    const Tensor& w = params_.get("ra.w");
    const double b = params_.get("ra.b").data[0];
    const size_t d = static_cast<size_t>(spec_.out_dim + cfg_.d_r);
    std::vector<double> out;
    out.reserve(stack.concat.size());
    for (const auto& vec : stack.concat) {
        if (vec.size() != d) throw ArgumentError("region_awareness: bad concat width");
        double z = vec_dot(vec, w.data.data(), d) + b;
        out.push_back(1.0 / (1.0 + std::exp(-z)));
    }
    return out;
}

double LipFdModel::classify_feature(const FusedFeature& fused) const {
    require_ready();
    const size_t d = static_cast<size_t>(spec_.out_dim + cfg_.d_r);
    if (fused.v.size() != d) throw ArgumentError("classify: bad fused feature width");
    const Tensor& w1 = params_.get("cls.w1");
    const Tensor& b1 = params_.get("cls.b1");
    const Tensor& w2 = params_.get("cls.w2");
    const double b2 = params_.get("cls.b2").data[0];
    const int hid = cfg_.classifier_hidden;
    double logit = b2;
    for (int h = 0; h < hid; ++h) {
        double z = b1.data[static_cast<size_t>(h)];
        for (size_t i = 0; i < d; ++i) z += fused.v[i] * w1.data[i * static_cast<size_t>(hid) + static_cast<size_t>(h)];
        double a = 0.5 * z * (1.0 + std::erf(z * 0.7071067811865475244));
        logit += a * w2.data[static_cast<size_t>(h)];
    }
    return 1.0 / (1.0 + std::exp(-logit));
}

LipFdModel::Prediction LipFdModel::predict(const avdata::WindowSample& sample) {
    require_ready();
    Tape tape;
    TapeBindings binds;
    ForwardOut fwd = build_forward(tape, binds, sample, false);

    Prediction pred;
    pred.prob = tape.val(fwd.prob).data[0];
    pred.stack.t = cfg_.t;
    pred.stack.global = tape.val(fwd.global).data;
    pred.stack.weights = tape.val(fwd.weights).data;
    const int t = cfg_.t;
    pred.stack.regions.reserve(static_cast<size_t>(3 * t));
    pred.stack.concat.reserve(static_cast<size_t>(3 * t));
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < t; ++i) {
            size_t idx = static_cast<size_t>(j) * t + i;
            pred.stack.regions.push_back(RegionFeature{tape.val(fwd.region_feats[idx]).data, j, i});
            const Tensor& cm = tape.val(fwd.concat_mat);
            int d = cm.dim(1);
            std::vector<double> row(cm.data.begin() + static_cast<int64_t>(idx) * d,
                                    cm.data.begin() + static_cast<int64_t>(idx + 1) * d);
            pred.stack.concat.push_back(std::move(row));
        }
    }
    return pred;
}

LipFdModel::BatchLoss LipFdModel::compute_loss(const std::vector<avdata::WindowSample>& batch) {
    require_ready();
    if (batch.empty()) throw ArgumentError("compute_loss: empty batch");
    const auto b = static_cast<int>(batch.size());
    for (const auto& s : batch) {
        if (s.label != 0 && s.label != 1) throw ArgumentError("compute_loss: label must be 0 or 1");
    }

    int workers = cfg_.workers > 0 ? cfg_.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers > b) workers = b;

    struct Partial {
        GradMap grads;
        double l_ra = 0.0;
        double l_cls = 0.0;
        std::exception_ptr error;
    };
    std::vector<Partial> partials(static_cast<size_t>(workers));

    auto run_chunk = [&](int w) {
        Partial& part = partials[static_cast<size_t>(w)];
        try {
            int lo = static_cast<int>(static_cast<int64_t>(w) * b / workers);
            int hi = static_cast<int>(static_cast<int64_t>(w + 1) * b / workers);
            for (int s = lo; s < hi; ++s) {
                Tape tape;
                TapeBindings binds;
                ForwardOut fwd = build_forward(tape, binds, batch[static_cast<size_t>(s)], true);
                VarId pc = tape.clamp(fwd.prob, kProbEps, 1.0 - kProbEps);
                VarId l_cls = batch[static_cast<size_t>(s)].label == 1
                                  ? tape.scale(tape.log(pc), -1.0)
                                  : tape.scale(tape.log(tape.affine(pc, -1.0, 1.0)), -1.0);
                VarId l_ra = tape.region_loss(fwd.weights, cfg_.k, cfg_.t);
                VarId contribution = tape.add(tape.scale(l_ra, cfg_.lambda_ra),
                                              tape.scale(l_cls, 1.0 / b));
                tape.backward(contribution);
                binds.collect(tape, part.grads);
                part.l_ra += tape.val(l_ra).data[0];
                part.l_cls += tape.val(l_cls).data[0];
            }
        } catch (...) {
            part.error = std::current_exception();
        }
    };

    if (workers == 1) {
        run_chunk(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) threads.emplace_back(run_chunk, w);
        for (auto& th : threads) th.join();
    }

    BatchLoss result;
    for (auto& part : partials) {
        if (part.error) std::rethrow_exception(part.error);
        accumulate_grads(result.grads, part.grads);
        result.bundle.l_ra += part.l_ra;
        result.bundle.l_cls += part.l_cls;
    }
    result.bundle.l_cls /= b;
    result.bundle.lambda_ra = cfg_.lambda_ra;
    result.bundle.k = cfg_.k;
    result.bundle.total = cfg_.lambda_ra * result.bundle.l_ra + result.bundle.l_cls;

    if (!std::isfinite(result.bundle.total)) {
        std::ostringstream diag;
        diag << "non-finite loss: l_ra=" << result.bundle.l_ra
             << " l_cls=" << result.bundle.l_cls << "; parameter stats:";
        for (const auto& name : params_.names()) {
            const Tensor& p = params_.get(name);
            double mx = 0.0;
            for (double v : p.data) mx = std::max(mx, std::abs(v));
            diag << " " << name << "|max|=" << mx;
        }
        throw NumericError(diag.str());
    }
    return result;
}

LossBundle LipFdModel::train_step(const std::vector<avdata::WindowSample>& batch, Adam& opt) {
    BatchLoss loss = compute_loss(batch);
    opt.step(params_, loss.grads);
    return loss.bundle;
}

std::vector<Image> LipFdModel::attention_maps(const avdata::WindowSample& sample, int scale) {
    require_ready();
    if (scale < 0 || scale > 2) throw ArgumentError("attention_maps: scale must be 0, 1 or 2");
    if (cfg_.inference_only) {
        throw StateError("model is inference-only; gradient attention is unavailable");
    }
    Tape tape;
    TapeBindings binds;
    ForwardOut fwd = build_forward(tape, binds, sample, true);
    tape.backward(fwd.prob);

    const int t = cfg_.t;
    std::vector<Image> maps;
    maps.reserve(static_cast<size_t>(t));
    for (int i = 0; i < t; ++i) {
        VarId act = fwd.region_acts[static_cast<size_t>(scale) * t + i];
        if (!tape.needs_grad(act)) {
            throw StateError("region encoder has no gradient path; was it frozen?");
        }
        const Tensor& a = tape.val(act);
        const Tensor& g = tape.grad(act);
        const int c = a.dim(0), hh = a.dim(1), ww = a.dim(2);
        const int64_t hw = static_cast<int64_t>(hh) * ww;

        std::vector<double> pooled(static_cast<size_t>(c), 0.0);
        for (int ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (int64_t q = 0; q < hw; ++q) s += g.data[static_cast<size_t>(ch) * hw + q];
            pooled[static_cast<size_t>(ch)] = s / static_cast<double>(hw);
        }
        Image map(hh, ww);
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (int y = 0; y < hh; ++y) {
            for (int x = 0; x < ww; ++x) {
                double v = 0.0;
                for (int ch = 0; ch < c; ++ch) {
                    v += a.data[static_cast<size_t>(ch) * hw + static_cast<int64_t>(y) * ww + x] *
                         pooled[static_cast<size_t>(ch)];
                }
                v /= c;
                map.at(y, x, 0) = v;
                if (first) {
                    lo = hi = v;
                    first = false;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
        double span = hi - lo;
        for (int y = 0; y < hh; ++y) {
            for (int x = 0; x < ww; ++x) {
                double v = span > 1e-12 ? (map.at(y, x, 0) - lo) / span : 0.0;
                map.at(y, x, 0) = v;
                map.at(y, x, 1) = v;
                map.at(y, x, 2) = v;
            }
        }
        int crop_side = fwd.pyramid.scale(scale)[static_cast<size_t>(i)].width;
        maps.push_back(resize(map, crop_side, crop_side));
    }
    return maps;
}

std::map<std::string, std::string> LipFdModel::meta() const {
    std::map<std::string, std::string> m;
    std::ostringstream ratios;
    ratios.precision(17);
    ratios << cfg_.ratios[0] << "," << cfg_.ratios[1] << "," << cfg_.ratios[2];
    m["t"] = std::to_string(cfg_.t);
    m["frame_side"] = std::to_string(cfg_.frame_side);
    m["band_height"] = std::to_string(cfg_.band_height);
    m["ratios"] = ratios.str();
    m["backbone"] = cfg_.backbone_id;
    m["anchor_mode"] = cfg_.anchor_mode == regions::AnchorMode::fixed ? "fixed" : "landmarks";
    m["d_r"] = std::to_string(cfg_.d_r);
    m["region_c1"] = std::to_string(cfg_.region_c1);
    m["region_c2"] = std::to_string(cfg_.region_c2);
    m["region_input_side"] = std::to_string(cfg_.region_input_side);
    m["classifier_hidden"] = std::to_string(cfg_.classifier_hidden);
    std::ostringstream kv;
    kv.precision(17);
    kv << cfg_.k;
    m["k"] = kv.str();
    std::ostringstream lv;
    lv.precision(17);
    lv << cfg_.lambda_ra;
    m["lambda_ra"] = lv.str();
    m["unfreeze_backbone"] = cfg_.unfreeze_backbone ? "true" : "false";
    m["seed"] = std::to_string(cfg_.seed);
    return m;
}

}  // namespace lipfd::model
