#include "lipfd/evalkit.hpp"

#include "lipfd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lipfd::evalkit {

MetricsReport compute_metrics(const std::vector<PredItem>& preds, double threshold) {
    if (preds.empty()) throw ArgumentError("compute_metrics: empty prediction set");
    MetricsReport rep;
    rep.threshold = threshold;

    int fp = 0, fn = 0;
    for (const auto& it : preds) {
        if (it.prob < 0.0 || it.prob > 1.0) {
            throw ArgumentError("compute_metrics: probability outside [0,1]");
        }
        if (it.label != 0 && it.label != 1) {
            throw ArgumentError("compute_metrics: label must be 0 or 1");
        }
        bool decision = it.prob >= threshold;
        if (it.label == 1) {
            ++rep.n_pos;
            if (!decision) ++fn;
        } else {
            ++rep.n_neg;
            if (decision) ++fp;
        }
    }
    rep.fpr = rep.n_neg > 0 ? static_cast<double>(fp) / rep.n_neg : 0.0;
    rep.fnr = rep.n_pos > 0 ? static_cast<double>(fn) / rep.n_pos : 0.0;
    rep.acc = 1.0 - static_cast<double>(fp + fn) / static_cast<double>(preds.size());

    if (rep.n_pos == 0 || rep.n_neg == 0) {
        return rep;  // AP/AUC undefined for single-class sets
    }

    // AUC via average ranks (ties get the midrank).
    std::vector<const PredItem*> sorted;
    sorted.reserve(preds.size());
    for (const auto& it : preds) sorted.push_back(&it);
    std::sort(sorted.begin(), sorted.end(),
              [](const PredItem* a, const PredItem* b) { return a->prob < b->prob; });
    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j < sorted.size() && sorted[j]->prob == sorted[i]->prob) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t q = i; q < j; ++q) {
            if (sorted[q]->label == 1) rank_sum_pos += midrank;
        }
        i = j;
    }
    double n_pos = rep.n_pos, n_neg = rep.n_neg;
    rep.auc = (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);

    // AP: walk distinct score thresholds from high to low; step-interpolated
    // area under the precision-recall curve.
    std::sort(sorted.begin(), sorted.end(),
              [](const PredItem* a, const PredItem* b) { return a->prob > b->prob; });
    double ap = 0.0;
    double prev_recall = 0.0;
    int tp = 0, pred_pos = 0;
    i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j < sorted.size() && sorted[j]->prob == sorted[i]->prob) ++j;
        for (size_t q = i; q < j; ++q) {
            ++pred_pos;
            if (sorted[q]->label == 1) ++tp;
        }
        double recall = tp / n_pos;
        double precision = static_cast<double>(tp) / pred_pos;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    rep.ap = ap;
    return rep;
}

std::string format_metrics(const MetricsReport& r) {
    std::ostringstream o;
    o.precision(6);
    o << std::fixed;
    o << "n_pos=" << r.n_pos << " n_neg=" << r.n_neg << " threshold=" << r.threshold << "\n";
    o << "acc=" << r.acc << "\n";
    o << "fpr=" << r.fpr << "\n";
    o << "fnr=" << r.fnr << "\n";
    if (r.ap.has_value()) {
        o << "ap=" << *r.ap << "\n";
    } else {
        o << "ap=undefined (single-class set)\n";
    }
    if (r.auc.has_value()) {
        o << "auc=" << *r.auc << "\n";
    } else {
        o << "auc=undefined (single-class set)\n";
    }
    return o.str();
}

WeightReport normalize_weights(const model::FeatureStack& stack) {
    const int t = stack.t;
    if (t < 1 || stack.weights.size() != static_cast<size_t>(3 * t)) {
        throw ArgumentError("normalize_weights: stack weights must hold 3*T entries");
    }
    WeightReport rep;
    for (int i = 0; i < t; ++i) {
        double h = stack.weights[static_cast<size_t>(i)];
        double f = stack.weights[static_cast<size_t>(t + i)];
        double l = stack.weights[static_cast<size_t>(2 * t + i)];
        double sum = h + f + l;
        if (!(sum > 0.0)) throw NumericError("normalize_weights: non-positive weight sum");
        rep.head += h / sum;
        rep.face += f / sum;
        rep.lip += l / sum;
    }
    rep.head /= t;
    rep.face /= t;
    rep.lip /= t;
    return rep;
}

}  // namespace lipfd::evalkit
