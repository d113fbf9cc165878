#include "lipfd/evalkit.hpp"

#include "lipfd/errors.hpp"
#include "lipfd/rng.hpp"

namespace lipfd::evalkit {

double evaluate_auc(model::LipFdModel& model, const avdata::CacheDataset& data,
                    const avdata::WindowLayout& layout,
                    const std::optional<perturb::PerturbationSpec>& spec, uint64_t seed) {
    if (data.size() == 0) throw ArgumentError("evaluate_auc: empty dataset");
    std::vector<PredItem> preds;
    preds.reserve(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        avdata::WindowSample ws = data.load(i, layout);
        if (spec.has_value()) {
            uint64_t sample_seed = Rng::mix(seed, Rng::hash_string(data.entry(i).name));
            ws = perturb::apply_to_window(ws, *spec, sample_seed);
        }
        auto pred = model.predict(ws);
        preds.push_back(PredItem{data.entry(i).name, pred.prob, ws.label});
    }
    MetricsReport rep = compute_metrics(preds);
    if (!rep.auc.has_value()) {
        throw ValidationError("evaluate_auc: dataset needs both classes");
    }
    return *rep.auc;
}

SweepResult robustness_sweep(model::LipFdModel& model, const avdata::CacheDataset& data,
                             const avdata::WindowLayout& layout,
                             const std::vector<perturb::Kind>& kinds,
                             const std::vector<int>& severities, uint64_t seed) {
    if (kinds.empty() || severities.empty()) {
        throw ArgumentError("robustness_sweep: need at least one kind and severity");
    }
    SweepResult out;
    out.kinds = kinds;
    out.severities = severities;
    out.clean_auc = evaluate_auc(model, data, layout, std::nullopt, seed);
    out.auc.resize(kinds.size());
    out.mean_auc.resize(kinds.size(), 0.0);
    for (size_t ki = 0; ki < kinds.size(); ++ki) {
        out.auc[ki].resize(severities.size(), 0.0);
        for (size_t si = 0; si < severities.size(); ++si) {
            perturb::PerturbationSpec spec = perturb::resolve(kinds[ki], severities[si]);
            uint64_t cell_seed = Rng::mix(seed, Rng::hash_string(perturb::kind_name(kinds[ki]) +
                                                                 std::to_string(severities[si])));
            out.auc[ki][si] = evaluate_auc(model, data, layout, spec, cell_seed);
            out.mean_auc[ki] += out.auc[ki][si];
        }
        out.mean_auc[ki] /= static_cast<double>(severities.size());
    }
    return out;
}

std::vector<Image> gradient_attention_map(model::LipFdModel& model,
                                          const avdata::WindowSample& sample, int scale) {
    return model.attention_maps(sample, scale);
}

}  // namespace lipfd::evalkit
