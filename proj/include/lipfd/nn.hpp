#pragma once

#include "lipfd/rng.hpp"
#include "lipfd/tape.hpp"
#include "lipfd/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lipfd {

/// Named parameter tensors keyed by module path (e.g. "global.vit.blk0.attn.wqkv").
/// std::map keeps iteration order stable, which the optimizer and checkpoint
/// writer rely on for determinism.
class ParamStore {
public:
    Tensor& create(const std::string& name, Tensor value, bool trainable = true);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const;
    bool trainable(const std::string& name) const;
    void set_trainable_prefix(const std::string& prefix, bool trainable);
    std::vector<std::string> names() const;
    size_t size() const { return entries_.size(); }
    int64_t total_elements() const;

private:
    struct Entry {
        Tensor value;
        bool trainable = true;
    };
    std::map<std::string, Entry> entries_;
};

using GradMap = std::map<std::string, Tensor>;

void accumulate_grads(GradMap& into, const GradMap& from);

/// Tracks which tape leaves correspond to which named parameters so gradients
/// can be pulled back out after backward().
class TapeBindings {
public:
    /// Binds a parameter as a tape leaf. The leaf requires grad only when
    /// the parameter is trainable and `with_grad` is set (inference passes
    /// skip gradient bookkeeping entirely).
    VarId use(Tape& tape, ParamStore& store, const std::string& name, bool with_grad = true);
    /// Adds every bound parameter's tape gradient into `grads`.
    void collect(const Tape& tape, GradMap& grads) const;

private:
    std::vector<std::pair<std::string, VarId>> items_;
};

/// x [d] -> [o] through weight [d,o] and bias [o].
VarId dense(Tape& tape, VarId x, VarId w, VarId b);

class Adam {
public:
    struct Config {
        double lr = 1e-4;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    Adam() = default;
    explicit Adam(Config cfg) : cfg_(cfg) {}

    void step(ParamStore& store, const GradMap& grads);
    int64_t step_count() const { return step_; }

    Config& config() { return cfg_; }
    const Config& config() const { return cfg_; }

    // Exposed for checkpointing.
    std::map<std::string, Tensor>& moment1() { return m_; }
    std::map<std::string, Tensor>& moment2() { return v_; }
    void set_step_count(int64_t s) { step_ = s; }

private:
    Config cfg_;
    int64_t step_ = 0;
    std::map<std::string, Tensor> m_, v_;
};

// Seeded initializers.
Tensor xavier_uniform(Rng& rng, std::vector<int> shape, int fan_in, int fan_out);
Tensor normal_init(Rng& rng, std::vector<int> shape, double stddev);

}  // namespace lipfd
