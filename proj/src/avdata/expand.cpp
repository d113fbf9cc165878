#include "lipfd/avdata.hpp"
#include "lipfd/errors.hpp"
#include "lipfd/rng.hpp"

namespace lipfd::avdata {

std::vector<WindowRef> expand_dataset(const std::vector<ClipRecord>& records, int t,
                                      int factor, uint64_t seed) {
    if (t < 1) throw ArgumentError("expand_dataset: window size must be >= 1");
    if (factor < 1) throw ArgumentError("expand_dataset: factor must be >= 1");

    std::vector<WindowRef> out;
    out.reserve(records.size() * static_cast<size_t>(factor));
    for (size_t idx = 0; idx < records.size(); ++idx) {
        const ClipRecord& clip = records[idx];
        int avail = clip.frame_count - t + 1;
        if (avail < 1) {
            throw ValidationError("clip '" + clip.clip_id + "' has " +
                                  std::to_string(clip.frame_count) +
                                  " frames, fewer than window size " + std::to_string(t));
        }
        int want = std::min(factor, avail);
        // Per-clip child seed keyed by clip_id, so manifests can be reordered
        // or filtered without reshuffling every clip's offsets.
        Rng rng(Rng::mix(seed, Rng::hash_string(clip.clip_id)));
        std::vector<int> offsets = rng.sample_without_replacement(avail, want);
        for (int off : offsets) {
            out.push_back(WindowRef{static_cast<int>(idx), clip.clip_id, off});
        }
    }
    return out;
}

}  // namespace lipfd::avdata
