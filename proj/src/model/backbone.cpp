#include "lipfd/model.hpp"

#include "lipfd/errors.hpp"

#include <cmath>

namespace lipfd::model {

BackboneSpec backbone_spec(const std::string& id) {
    if (id == "tiny") {
        return BackboneSpec{"tiny", 112, 16, 32, 2, 2, 32, 128};
    }
    if (id == "vit_b16") {
        return BackboneSpec{"vit_b16", 224, 16, 768, 12, 12, 512, 3072};
    }
    if (id == "vit_l14") {
        return BackboneSpec{"vit_l14", 224, 14, 1024, 24, 16, 768, 4096};
    }
    throw ConfigError("unknown backbone id: " + id);
}

ModelConfig ModelConfig::from(const RunConfig& cfg) {
    ModelConfig m;
    m.t = cfg.window_size;
    m.frame_side = cfg.frame_side;
    m.band_height = cfg.band_height;
    m.ratios = cfg.crop_ratios;
    m.backbone_id = cfg.backbone;
    m.anchor_mode = regions::anchor_mode_from(cfg.anchor_mode);
    m.d_r = cfg.d_r;
    m.region_c1 = cfg.region_c1;
    m.region_c2 = cfg.region_c2;
    m.region_input_side = cfg.region_input_side;
    m.classifier_hidden = cfg.classifier_hidden;
    m.k = cfg.k;
    m.lambda_ra = cfg.lambda_ra;
    m.unfreeze_backbone = cfg.unfreeze_backbone;
    m.workers = cfg.workers;
    m.seed = cfg.seed;
    return m;
}

FusedFeature fuse(const FeatureStack& stack) {
    const size_t n = stack.concat.size();
    if (n == 0 || stack.weights.size() != n) {
        throw ArgumentError("fuse: stack needs matching concat vectors and weights");
    }
    if (stack.t < 1 || n != static_cast<size_t>(3 * stack.t)) {
        throw ArgumentError("fuse: expected 3*T stack entries");
    }
    const size_t d = stack.concat[0].size();
    double wsum = 0.0;
    for (double w : stack.weights) wsum += w;
    if (!(wsum > 0.0)) throw NumericError("fuse: weight sum is not positive");

    Tape tape;
    Tensor mat = Tensor::zeros({static_cast<int>(n), static_cast<int>(d)});
    for (size_t i = 0; i < n; ++i) {
        if (stack.concat[i].size() != d) throw ArgumentError("fuse: ragged concat vectors");
        std::copy(stack.concat[i].begin(), stack.concat[i].end(),
                  mat.data.begin() + static_cast<int64_t>(i * d));
    }
    VarId m = tape.leaf(std::move(mat), false);
    VarId w = tape.leaf(Tensor({static_cast<int>(n)}, stack.weights), false);
    VarId num = tape.matmul(tape.transpose(m), tape.reshape(w, {static_cast<int>(n), 1}));
    VarId den = tape.sum_all(w);
    VarId f = tape.scale(tape.mul_scalarvar(tape.reshape(num, {static_cast<int>(d)}), tape.recip(den)),
                         1.0 / stack.t);
    return FusedFeature{tape.val(f).data};
}

double loss_ra(const Tensor& weights_nt3, double k) {
    if (k <= 0.0) throw ArgumentError("loss_ra: k must be positive");
    if (weights_nt3.ndim() != 3 || weights_nt3.dim(2) != 3) {
        throw ArgumentError("loss_ra: weights must be shaped [N, T, 3]");
    }
    const int n = weights_nt3.dim(0);
    const int t = weights_nt3.dim(1);
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        // Repack one sample as the scale-major [3T] layout the tape op uses.
        Tensor w3t = Tensor::zeros({3 * t});
        for (int i = 0; i < t; ++i) {
            for (int s = 0; s < 3; ++s) {
                w3t.data[static_cast<size_t>(s) * t + i] =
                    weights_nt3.data[(static_cast<size_t>(j) * t + i) * 3 + s];
            }
        }
        Tape tape;
        VarId w = tape.leaf(std::move(w3t), false);
        total += tape.val(tape.region_loss(w, k, t)).data[0];
    }
    return total;
}

LossBundle loss_total(double prob, int label, double l_ra, double lambda_ra, double k) {
    if (label != 0 && label != 1) {
        throw ArgumentError("loss_total: label must be 0 or 1, got " + std::to_string(label));
    }
    double p = prob < kProbEps ? kProbEps : (prob > 1.0 - kProbEps ? 1.0 - kProbEps : prob);
    double l_cls = label == 1 ? -std::log(p) : -std::log(1.0 - p);
    LossBundle b;
    b.l_ra = l_ra;
    b.l_cls = l_cls;
    b.lambda_ra = lambda_ra;
    b.k = k;
    b.total = lambda_ra * l_ra + l_cls;
    return b;
}

}  // namespace lipfd::model
