#include "lipfd/nn.hpp"

#include "lipfd/errors.hpp"

#include <cmath>

namespace lipfd {

Tensor& ParamStore::create(const std::string& name, Tensor value, bool trainable) {
    auto [it, inserted] = entries_.emplace(name, Entry{std::move(value), trainable});
    if (!inserted) throw StateError("parameter already exists: " + name);
    return it->second.value;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw StateError("unknown parameter: " + name);
    return it->second.value;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw StateError("unknown parameter: " + name);
    return it->second.value;
}

bool ParamStore::has(const std::string& name) const { return entries_.count(name) != 0; }

bool ParamStore::trainable(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw StateError("unknown parameter: " + name);
    return it->second.trainable;
}

void ParamStore::set_trainable_prefix(const std::string& prefix, bool trainable) {
    for (auto& [name, entry] : entries_) {
        if (name.rfind(prefix, 0) == 0) entry.trainable = trainable;
    }
}

std::vector<std::string> ParamStore::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
}

int64_t ParamStore::total_elements() const {
    int64_t n = 0;
    for (const auto& [_, e] : entries_) n += e.value.numel();
    return n;
}

void accumulate_grads(GradMap& into, const GradMap& from) {
    for (const auto& [name, g] : from) {
        auto it = into.find(name);
        if (it == into.end()) {
            into.emplace(name, g);
        } else {
            for (size_t i = 0; i < g.data.size(); ++i) it->second.data[i] += g.data[i];
        }
    }
}

VarId TapeBindings::use(Tape& tape, ParamStore& store, const std::string& name, bool with_grad) {
    VarId id = tape.leaf(store.get(name), with_grad && store.trainable(name));
    items_.emplace_back(name, id);
    return id;
}

void TapeBindings::collect(const Tape& tape, GradMap& grads) const {
    for (const auto& [name, id] : items_) {
        if (!tape.needs_grad(id)) continue;
        const Tensor& g = tape.grad(id);
        auto it = grads.find(name);
        if (it == grads.end()) {
            grads.emplace(name, g);
        } else {
            for (size_t i = 0; i < g.data.size(); ++i) it->second.data[i] += g.data[i];
        }
    }
}

VarId dense(Tape& tape, VarId x, VarId w, VarId b) {
    int d = tape.val(x).dim(0);
    int o = tape.val(w).dim(1);
    VarId xm = tape.reshape(x, {1, d});
    VarId y = tape.matmul(xm, w);
    VarId yb = tape.add_rowvec(y, b);
    return tape.reshape(yb, {o});
}

void Adam::step(ParamStore& store, const GradMap& grads) {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (const auto& [name, g] : grads) {
        if (!store.trainable(name)) continue;
        Tensor& p = store.get(name);
        if (p.data.size() != g.data.size()) throw StateError("adam: gradient shape mismatch for " + name);
        Tensor& m = m_.try_emplace(name, Tensor::zeros(p.shape)).first->second;
        Tensor& v = v_.try_emplace(name, Tensor::zeros(p.shape)).first->second;
        for (size_t i = 0; i < p.data.size(); ++i) {
            m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * g.data[i];
            v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * g.data[i] * g.data[i];
            double mhat = m.data[i] / bc1;
            double vhat = v.data[i] / bc2;
            p.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

Tensor xavier_uniform(Rng& rng, std::vector<int> shape, int fan_in, int fan_out) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(-limit, limit);
    return t;
}

Tensor normal_init(Rng& rng, std::vector<int> shape, double stddev) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = stddev * rng.normal();
    return t;
}

}  // namespace lipfd
