#pragma once

#include "lipfd/dataset.hpp"
#include "lipfd/model.hpp"
#include "lipfd/perturb.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lipfd::evalkit {

struct PredItem {
    std::string id;
    double prob = 0.0;
    int label = 0;
};

/// Thresholded rates plus ranking metrics. AP/AUC are flagged undefined
/// (empty optionals) when the set is single-class.
struct MetricsReport {
    double acc = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    std::optional<double> ap;
    std::optional<double> auc;
    double threshold = 0.5;
    int n_pos = 0;
    int n_neg = 0;
};

/// ACC/FPR/FNR at `threshold` (decision: prob >= threshold), AP as the
/// step-interpolated area under the precision-recall curve, AUC as the
/// Mann-Whitney rank statistic with half credit for ties.
MetricsReport compute_metrics(const std::vector<PredItem>& preds, double threshold = 0.5);

std::string format_metrics(const MetricsReport& report);

/// Per-sample normalized (head, face, lip) triple: each frame's weights are
/// normalized to unit sum, then averaged over frames.
struct WeightReport {
    double head = 0.0;
    double face = 0.0;
    double lip = 0.0;
};

WeightReport normalize_weights(const model::FeatureStack& stack);

/// Machine-readable record: one metric value per (kind, severity) cell.
struct Record {
    std::string kind;
    int severity = 0;
    std::string metric;
    double value = 0.0;
};

void write_records(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::filesystem::path& path);

struct SweepResult {
    std::vector<perturb::Kind> kinds;
    std::vector<int> severities;
    // auc[kind_index][severity_index]
    std::vector<std::vector<double>> auc;
    std::vector<double> mean_auc;  // per kind, across severities
    double clean_auc = 0.0;
};

/// AUC of the model over the dataset with an optional perturbation applied
/// to every window's frame band (nullopt = clean pass).
double evaluate_auc(model::LipFdModel& model, const avdata::CacheDataset& data,
                    const avdata::WindowLayout& layout,
                    const std::optional<perturb::PerturbationSpec>& spec, uint64_t seed);

SweepResult robustness_sweep(model::LipFdModel& model, const avdata::CacheDataset& data,
                             const avdata::WindowLayout& layout,
                             const std::vector<perturb::Kind>& kinds,
                             const std::vector<int>& severities, uint64_t seed);

std::vector<Record> sweep_records(const SweepResult& sweep);

/// Per-crop gradient attention heatmaps for one scale (see
/// LipFdModel::attention_maps).
std::vector<Image> gradient_attention_map(model::LipFdModel& model,
                                          const avdata::WindowSample& sample, int scale);

// ---------------------------------------------------------------------------
// Synthetic desk-scale benchmark
// ---------------------------------------------------------------------------

struct SynthConfig {
    int n_clips = 0;        // must be even (balanced real/fake)
    int t = 5;              // minimum window size the clips must support
    double fps = 20.0;
    double clip_seconds = 3.0;
    double desync_seconds = 0.4;
    int frame_side = 112;
    int sample_rate = 16000;
    std::string fake_mode = "shift";  // shift | resample

    static SynthConfig from(const RunConfig& cfg, int n) {
        SynthConfig s;
        s.n_clips = n;
        s.t = cfg.window_size;
        s.fps = cfg.synth_fps;
        s.clip_seconds = cfg.synth_clip_seconds;
        s.desync_seconds = cfg.synth_desync_seconds;
        s.frame_side = cfg.frame_side;
        s.sample_rate = cfg.sample_rate;
        s.fake_mode = cfg.synth_fake_mode;
        return s;
    }
};

/// Writes n_clips synthetic clips (frames + wav + manifest.tsv) under
/// out_dir and returns the manifest path. "real" clips animate an ellipse
/// mouth whose opening tracks the audio amplitude envelope; "fake" clips use
/// the same renderer driven by a desynchronized envelope. Byte-identical for
/// a fixed seed.
std::filesystem::path synth_benchmark(const SynthConfig& cfg,
                                      const std::filesystem::path& out_dir, uint64_t seed);

}  // namespace lipfd::evalkit
