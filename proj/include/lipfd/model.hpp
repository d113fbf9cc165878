#pragma once

#include "lipfd/avdata.hpp"
#include "lipfd/config.hpp"
#include "lipfd/image.hpp"
#include "lipfd/nn.hpp"
#include "lipfd/regions.hpp"
#include "lipfd/tape.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lipfd::model {

struct GlobalFeature {
    std::vector<double> v;  // D = backbone output width
};

struct RegionFeature {
    std::vector<double> v;  // D_r
    int scale = 0;          // 0 head, 1 face, 2 lip
    int frame = 0;          // 0..T-1
};

/// Everything the fusion stage consumes: the global feature, the 3xT region
/// features, their concatenations [F_G | F_R] (scale-major: index j*T + i),
/// and the awareness weights.
struct FeatureStack {
    std::vector<double> global;
    std::vector<RegionFeature> regions;
    std::vector<std::vector<double>> concat;
    std::vector<double> weights;
    int t = 0;
};

struct FusedFeature {
    std::vector<double> v;  // D + D_r
};

struct LossBundle {
    double l_ra = 0.0;
    double l_cls = 0.0;
    double total = 0.0;
    double lambda_ra = 1.0;
    double k = 1.0;
};

constexpr double kProbEps = 1e-7;

/// Weighted fusion: F = (1/T) * sum_i w_i * v_i / sum_i w_i over the 3T
/// concatenated vectors. Throws NumericError if the weight sum is not
/// positive (impossible for sigmoid outputs, guarded anyway).
FusedFeature fuse(const FeatureStack& stack);

/// Region-awareness loss over a batch of weight stacks shaped [N, T, 3]
/// (last axis ordered head, face, lip). Per (sample, frame):
/// k / exp(max_scale w - w_head); summed over all of them.
double loss_ra(const Tensor& weights_nt3, double k);

/// Binary cross-entropy on the clamped probability plus the weighted region
/// loss: total = lambda_ra * l_ra + l_cls.
LossBundle loss_total(double prob, int label, double l_ra, double lambda_ra, double k = 1.0);

struct BackboneSpec {
    std::string id;
    int input_side = 0;
    int patch = 0;
    int width = 0;
    int depth = 0;
    int heads = 0;
    int out_dim = 0;
    int mlp_hidden = 0;
};

/// Known backbone configurations. "tiny" is the 2-block width-32 test
/// transformer; the ViT entries mirror the published CLIP/ImageNet variants
/// (vit_l14 reports 768-wide embeddings).
BackboneSpec backbone_spec(const std::string& id);

struct ModelConfig {
    int t = 5;
    int frame_side = 224;
    int band_height = 224;
    std::array<double, 3> ratios{1.0, 0.65, 0.45};
    std::string backbone_id = "vit_l14";
    regions::AnchorMode anchor_mode = regions::AnchorMode::fixed;
    int d_r = 256;
    int region_c1 = 32;
    int region_c2 = 64;
    int region_input_side = 64;
    int classifier_hidden = 256;
    double k = 1.0;
    double lambda_ra = 1.0;
    bool unfreeze_backbone = false;
    bool inference_only = false;
    int workers = 0;  // 0 = hardware concurrency
    uint64_t seed = 42;

    static ModelConfig from(const RunConfig& cfg);
};

/// The detector: conv stem + transformer global encoder, per-crop
/// global-region encoder, region awareness weighting, weighted fusion and an
/// MLP head. The global encoder (stem + transformer) is frozen unless
/// unfreeze_backbone is set; the region, awareness and classifier parameters
/// always train.
class LipFdModel {
public:
    explicit LipFdModel(ModelConfig cfg, bool init_params = true);

    const ModelConfig& config() const { return cfg_; }
    const BackboneSpec& backbone() const { return spec_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    bool ready() const { return ready_; }

    int global_dim() const { return spec_.out_dim; }
    int composite_height() const { return cfg_.band_height + cfg_.frame_side; }
    int composite_width() const { return cfg_.t * cfg_.frame_side; }

    GlobalFeature encode_global(const Image& composite);
    std::vector<RegionFeature> encode_regions(const regions::CropPyramid& pyramid,
                                              const GlobalFeature& global);
    /// sigmoid(affine([F_G|F_R])) for every entry of the stack.
    std::vector<double> region_awareness(const FeatureStack& stack) const;
    double classify_feature(const FusedFeature& fused) const;

    struct Prediction {
        double prob = 0.0;
        FeatureStack stack;
    };
    Prediction predict(const avdata::WindowSample& sample);

    /// Forward + backward over a batch; no parameter update. The bundle sums
    /// the region loss over the batch (one term per sample and frame) and
    /// averages the classification loss.
    struct BatchLoss {
        LossBundle bundle;
        GradMap grads;
    };
    BatchLoss compute_loss(const std::vector<avdata::WindowSample>& batch);

    LossBundle train_step(const std::vector<avdata::WindowSample>& batch, Adam& opt);

    /// Gradient attention maps for one scale: per crop, channel-mean of
    /// (activations x spatially pooled gradients) at the last convolutional
    /// block of the region encoder, upsampled to the crop size and min-max
    /// normalized. Gradients are taken from the predicted probability.
    std::vector<Image> attention_maps(const avdata::WindowSample& sample, int scale);

    // Checkpoint support.
    void mark_ready() { ready_ = true; }
    std::map<std::string, std::string> meta() const;

private:
    struct ForwardOut {
        VarId prob = -1;
        VarId weights = -1;
        VarId fused = -1;
        VarId global = -1;
        VarId concat_mat = -1;
        std::vector<VarId> region_feats;  // 3T, scale-major
        std::vector<VarId> region_acts;   // 3T conv activations, scale-major
        regions::CropPyramid pyramid;
    };
    ForwardOut build_forward(Tape& tape, TapeBindings& binds, const avdata::WindowSample& sample,
                             bool with_grad);
    VarId build_global(Tape& tape, TapeBindings& binds, const Image& composite, bool with_grad);
    VarId build_region(Tape& tape, TapeBindings& binds, const Image& crop_img, VarId global,
                       bool with_grad, VarId* act_out);
    void init_params();
    void validate_composite(const Image& composite) const;
    void require_ready() const;

    ModelConfig cfg_;
    BackboneSpec spec_;
    ParamStore params_;
    bool ready_ = false;
};

/// Versioned checkpoint archive: parameter tensors keyed by module path plus
/// a metadata record (window size, ratios, backbone id, D_r, k, lambda_ra,
/// spectrogram parameters, training counters) and optional optimizer state.
struct CheckpointExtra {
    std::map<std::string, std::string> meta;  // merged into the archive
};

void save_checkpoint(const std::filesystem::path& path, const LipFdModel& model,
                     const Adam* opt = nullptr, const CheckpointExtra& extra = {});

struct LoadedCheckpoint {
    ModelConfig config;
    std::map<std::string, std::string> meta;
    int epoch = 0;
};

/// Rebuilds the model (and optionally the optimizer state) from an archive.
LipFdModel load_checkpoint(const std::filesystem::path& path, Adam* opt = nullptr,
                           LoadedCheckpoint* info = nullptr);

}  // namespace lipfd::model
