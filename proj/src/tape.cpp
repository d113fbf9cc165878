#include "lipfd/tape.hpp"

#include "lipfd/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <utility>

namespace lipfd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using MapM = Eigen::Map<RowMat>;

MapC as_mat(const Tensor& t, int rows, int cols) {
    return MapC(t.data.data(), rows, cols);
}

MapM as_mat(Tensor& t, int rows, int cols) {
    return MapM(t.data.data(), rows, cols);
}

void require(bool ok, const char* what) {
    if (!ok) throw Error(std::string("tape: ") + what);
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

}  // namespace

VarId Tape::push(Tensor value, bool needs_grad, std::function<void()> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.back = needs_grad ? std::move(back) : std::function<void()>();
    nodes_.push_back(std::move(n));
    return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::leaf(Tensor value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

Tensor& Tape::grad_mut(VarId id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_ready) {
        n.grad_store = Tensor::zeros(n.value.shape);
        n.grad_ready = true;
    }
    return n.grad_store;
}

const Tensor& Tape::grad(VarId id) const {
    const Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.grad_ready) throw StateError("tape: gradient not computed for this node");
    return n.grad_store;
}

void Tape::accum(VarId id, const Tensor& g) {
    Tensor& dst = grad_mut(id);
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g.data[i];
}

void Tape::accum_at(VarId id, int64_t index, double g) {
    grad_mut(id).data[static_cast<size_t>(index)] += g;
}

void Tape::backward(VarId root) {
    require(val(root).numel() == 1, "backward root must be scalar");
    if (!nodes_[static_cast<size_t>(root)].needs_grad) {
        throw StateError("tape: backward on a node with no gradient path");
    }
    grad_mut(root).data[0] = 1.0;
    for (auto id = static_cast<int64_t>(root); id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (n.needs_grad && n.grad_ready && n.back) n.back();
    }
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

VarId Tape::add(VarId a, VarId b) {
    require(val(a).same_shape(val(b)), "add: shape mismatch");
    Tensor out = val(a);
    const Tensor& vb = val(b);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += vb.data[i];
    bool ng = needs_grad(a) || needs_grad(b);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, b] {
            const Tensor& g = grad(id);
            if (needs_grad(a)) accum(a, g);
            if (needs_grad(b)) accum(b, g);
        };
    }
    return id;
}

VarId Tape::sub(VarId a, VarId b) {
    require(val(a).same_shape(val(b)), "sub: shape mismatch");
    Tensor out = val(a);
    const Tensor& vb = val(b);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= vb.data[i];
    bool ng = needs_grad(a) || needs_grad(b);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, b] {
            const Tensor& g = grad(id);
            if (needs_grad(a)) accum(a, g);
            if (needs_grad(b)) {
                Tensor& db = grad_mut(b);
                for (size_t i = 0; i < db.data.size(); ++i) db.data[i] -= g.data[i];
            }
        };
    }
    return id;
}

VarId Tape::mul(VarId a, VarId b) {
    require(val(a).same_shape(val(b)), "mul: shape mismatch");
    Tensor out = val(a);
    const Tensor& vb = val(b);
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= vb.data[i];
    bool ng = needs_grad(a) || needs_grad(b);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, b] {
            const Tensor& g = grad(id);
            const Tensor& va = val(a);
            const Tensor& vb2 = val(b);
            if (needs_grad(a)) {
                Tensor& da = grad_mut(a);
                for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += g.data[i] * vb2.data[i];
            }
            if (needs_grad(b)) {
                Tensor& db = grad_mut(b);
                for (size_t i = 0; i < db.data.size(); ++i) db.data[i] += g.data[i] * va.data[i];
            }
        };
    }
    return id;
}

VarId Tape::scale(VarId a, double s) { return affine(a, s, 0.0); }

VarId Tape::affine(VarId a, double m, double c) {
    Tensor out = val(a);
    for (double& v : out.data) v = m * v + c;
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, m] {
            const Tensor& g = grad(id);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += m * g.data[i];
        };
    }
    return id;
}

VarId Tape::relu(VarId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            const Tensor& g = grad(id);
            const Tensor& x = val(a);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) {
                if (x.data[i] > 0.0) da.data[i] += g.data[i];
            }
        };
    }
    return id;
}

VarId Tape::gelu(VarId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            const Tensor& g = grad(id);
            const Tensor& x = val(a);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) {
                double v = x.data[i];
                double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
                double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
                da.data[i] += g.data[i] * (cdf + v * pdf);
            }
        };
    }
    return id;
}

VarId Tape::sigmoid(VarId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            const Tensor& g = grad(id);
            const Tensor& y = val(id);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) {
                da.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
            }
        };
    }
    return id;
}

VarId Tape::exp(VarId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = std::exp(v);
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            const Tensor& g = grad(id);
            const Tensor& y = val(id);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += g.data[i] * y.data[i];
        };
    }
    return id;
}

VarId Tape::log(VarId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = std::log(v);
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            const Tensor& g = grad(id);
            const Tensor& x = val(a);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += g.data[i] / x.data[i];
        };
    }
    return id;
}

VarId Tape::recip(VarId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = 1.0 / v;
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            const Tensor& g = grad(id);
            const Tensor& y = val(id);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) {
                da.data[i] -= g.data[i] * y.data[i] * y.data[i];
            }
        };
    }
    return id;
}

VarId Tape::clamp(VarId a, double lo, double hi) {
    Tensor out = val(a);
    for (double& v : out.data) v = v < lo ? lo : (v > hi ? hi : v);
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, lo, hi] {
            const Tensor& g = grad(id);
            const Tensor& x = val(a);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) {
                if (x.data[i] > lo && x.data[i] < hi) da.data[i] += g.data[i];
            }
        };
    }
    return id;
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

VarId Tape::matmul(VarId a, VarId b) {
    const Tensor& va = val(a);
    const Tensor& vb = val(b);
    require(va.ndim() == 2 && vb.ndim() == 2 && va.dim(1) == vb.dim(0), "matmul: bad shapes");
    int m = va.dim(0), k = va.dim(1), n = vb.dim(1);
    Tensor out = Tensor::zeros({m, n});
    as_mat(out, m, n).noalias() = as_mat(va, m, k) * as_mat(vb, k, n);
    bool ng = needs_grad(a) || needs_grad(b);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, b, m, k, n] {
            MapC g = as_mat(grad(id), m, n);
            if (needs_grad(a)) {
                as_mat(grad_mut(a), m, k).noalias() += g * as_mat(val(b), k, n).transpose();
            }
            if (needs_grad(b)) {
                as_mat(grad_mut(b), k, n).noalias() += as_mat(val(a), m, k).transpose() * g;
            }
        };
    }
    return id;
}

VarId Tape::transpose(VarId a) {
    const Tensor& va = val(a);
    require(va.ndim() == 2, "transpose: need 2-D");
    int m = va.dim(0), n = va.dim(1);
    Tensor out = Tensor::zeros({n, m});
    as_mat(out, n, m) = as_mat(va, m, n).transpose();
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, m, n] {
            as_mat(grad_mut(a), m, n) += as_mat(grad(id), n, m).transpose();
        };
    }
    return id;
}

VarId Tape::add_rowvec(VarId a, VarId v) {
    const Tensor& va = val(a);
    const Tensor& vv = val(v);
    require(va.ndim() == 2 && vv.ndim() == 1 && va.dim(1) == vv.dim(0), "add_rowvec: bad shapes");
    int m = va.dim(0), n = va.dim(1);
    Tensor out = va;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) out.data[static_cast<size_t>(r) * n + c] += vv.data[static_cast<size_t>(c)];
    }
    bool ng = needs_grad(a) || needs_grad(v);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, v, m, n] {
            const Tensor& g = grad(id);
            if (needs_grad(a)) accum(a, g);
            if (needs_grad(v)) {
                Tensor& dv = grad_mut(v);
                for (int r = 0; r < m; ++r) {
                    for (int c = 0; c < n; ++c) dv.data[static_cast<size_t>(c)] += g.data[static_cast<size_t>(r) * n + c];
                }
            }
        };
    }
    return id;
}

VarId Tape::mul_scalarvar(VarId a, VarId s) {
    require(val(s).numel() == 1, "mul_scalarvar: s must be [1]");
    double sv = val(s).data[0];
    Tensor out = val(a);
    for (double& v : out.data) v *= sv;
    bool ng = needs_grad(a) || needs_grad(s);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, s] {
            const Tensor& g = grad(id);
            const Tensor& va = val(a);
            double svv = val(s).data[0];
            if (needs_grad(a)) {
                Tensor& da = grad_mut(a);
                for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += g.data[i] * svv;
            }
            if (needs_grad(s)) {
                double acc = 0.0;
                for (size_t i = 0; i < g.data.size(); ++i) acc += g.data[i] * va.data[i];
                accum_at(s, 0, acc);
            }
        };
    }
    return id;
}

VarId Tape::softmax_rows(VarId a) {
    const Tensor& va = val(a);
    require(va.ndim() == 2, "softmax_rows: need 2-D");
    int m = va.dim(0), n = va.dim(1);
    Tensor out = va;
    for (int r = 0; r < m; ++r) {
        double* row = out.data.data() + static_cast<size_t>(r) * n;
        double mx = row[0];
        for (int c = 1; c < n; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < n; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (int c = 0; c < n; ++c) row[c] /= sum;
    }
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, m, n] {
            const Tensor& g = grad(id);
            const Tensor& y = val(id);
            Tensor& da = grad_mut(a);
            for (int r = 0; r < m; ++r) {
                const double* yr = y.data.data() + static_cast<size_t>(r) * n;
                const double* gr = g.data.data() + static_cast<size_t>(r) * n;
                double* dr = da.data.data() + static_cast<size_t>(r) * n;
                double dot = 0.0;
                for (int c = 0; c < n; ++c) dot += yr[c] * gr[c];
                for (int c = 0; c < n; ++c) dr[c] += yr[c] * (gr[c] - dot);
            }
        };
    }
    return id;
}

VarId Tape::layer_norm_rows(VarId x, VarId gamma, VarId beta, double eps) {
    const Tensor& vx = val(x);
    require(vx.ndim() == 2, "layer_norm: need 2-D");
    int m = vx.dim(0), n = vx.dim(1);
    require(val(gamma).numel() == n && val(beta).numel() == n, "layer_norm: bad affine shapes");
    Tensor out = Tensor::zeros({m, n});
    auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(m) * n);
    auto inv_sd = std::make_shared<std::vector<double>>(static_cast<size_t>(m));
    const Tensor& vg = val(gamma);
    const Tensor& vb = val(beta);
    for (int r = 0; r < m; ++r) {
        const double* xr = vx.data.data() + static_cast<size_t>(r) * n;
        double mu = 0.0;
        for (int c = 0; c < n; ++c) mu += xr[c];
        mu /= n;
        double var = 0.0;
        for (int c = 0; c < n; ++c) var += (xr[c] - mu) * (xr[c] - mu);
        var /= n;
        double inv = 1.0 / std::sqrt(var + eps);
        (*inv_sd)[static_cast<size_t>(r)] = inv;
        for (int c = 0; c < n; ++c) {
            double h = (xr[c] - mu) * inv;
            (*xhat)[static_cast<size_t>(r) * n + c] = h;
            out.data[static_cast<size_t>(r) * n + c] = vg.data[static_cast<size_t>(c)] * h + vb.data[static_cast<size_t>(c)];
        }
    }
    bool ng = needs_grad(x) || needs_grad(gamma) || needs_grad(beta);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, x, gamma, beta, m, n, xhat, inv_sd] {
            const Tensor& g = grad(id);
            const Tensor& vg = val(gamma);
            for (int r = 0; r < m; ++r) {
                const double* gr = g.data.data() + static_cast<size_t>(r) * n;
                const double* hr = xhat->data() + static_cast<size_t>(r) * n;
                if (needs_grad(gamma)) {
                    Tensor& dg = grad_mut(gamma);
                    for (int c = 0; c < n; ++c) dg.data[static_cast<size_t>(c)] += gr[c] * hr[c];
                }
                if (needs_grad(beta)) {
                    Tensor& db = grad_mut(beta);
                    for (int c = 0; c < n; ++c) db.data[static_cast<size_t>(c)] += gr[c];
                }
                if (needs_grad(x)) {
                    double mean_dh = 0.0, mean_dh_h = 0.0;
                    for (int c = 0; c < n; ++c) {
                        double dh = gr[c] * vg.data[static_cast<size_t>(c)];
                        mean_dh += dh;
                        mean_dh_h += dh * hr[c];
                    }
                    mean_dh /= n;
                    mean_dh_h /= n;
                    double inv = (*inv_sd)[static_cast<size_t>(r)];
                    Tensor& dx = grad_mut(x);
                    double* dr = dx.data.data() + static_cast<size_t>(r) * n;
                    for (int c = 0; c < n; ++c) {
                        double dh = gr[c] * vg.data[static_cast<size_t>(c)];
                        dr[c] += inv * (dh - mean_dh - hr[c] * mean_dh_h);
                    }
                }
            }
        };
    }
    return id;
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

VarId Tape::sum_all(VarId a) {
    double s = 0.0;
    for (double v : val(a).data) s += v;
    bool ng = needs_grad(a);
    VarId id = push(Tensor::scalar(s), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            double g = grad(id).data[0];
            Tensor& da = grad_mut(a);
            for (double& v : da.data) v += g;
        };
    }
    return id;
}

VarId Tape::mean_all(VarId a) {
    int64_t n = val(a).numel();
    double s = 0.0;
    for (double v : val(a).data) s += v;
    bool ng = needs_grad(a);
    VarId id = push(Tensor::scalar(s / static_cast<double>(n)), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, n] {
            double g = grad(id).data[0] / static_cast<double>(n);
            Tensor& da = grad_mut(a);
            for (double& v : da.data) v += g;
        };
    }
    return id;
}

// ---------------------------------------------------------------------------
// shape
// ---------------------------------------------------------------------------

VarId Tape::reshape(VarId a, std::vector<int> shape) {
    require(Tensor::numel_of(shape) == val(a).numel(), "reshape: element count mismatch");
    Tensor out(std::move(shape), val(a).data);
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a] {
            const Tensor& g = grad(id);
            Tensor& da = grad_mut(a);
            for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += g.data[i];
        };
    }
    return id;
}

VarId Tape::row(VarId a, int r) {
    const Tensor& va = val(a);
    require(va.ndim() == 2 && r >= 0 && r < va.dim(0), "row: out of range");
    int n = va.dim(1);
    Tensor out = Tensor::zeros({n});
    std::copy_n(va.data.begin() + static_cast<int64_t>(r) * n, n, out.data.begin());
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, r, n] {
            const Tensor& g = grad(id);
            Tensor& da = grad_mut(a);
            for (int c = 0; c < n; ++c) da.data[static_cast<size_t>(r) * n + c] += g.data[static_cast<size_t>(c)];
        };
    }
    return id;
}

VarId Tape::slice_cols(VarId a, int c0, int c1) {
    const Tensor& va = val(a);
    require(va.ndim() == 2 && 0 <= c0 && c0 < c1 && c1 <= va.dim(1), "slice_cols: bad range");
    int m = va.dim(0), n = va.dim(1), w = c1 - c0;
    Tensor out = Tensor::zeros({m, w});
    for (int r = 0; r < m; ++r) {
        std::copy_n(va.data.begin() + static_cast<int64_t>(r) * n + c0, w,
                    out.data.begin() + static_cast<int64_t>(r) * w);
    }
    bool ng = needs_grad(a);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, a, c0, m, n, w] {
            const Tensor& g = grad(id);
            Tensor& da = grad_mut(a);
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < w; ++c) {
                    da.data[static_cast<size_t>(r) * n + c0 + c] += g.data[static_cast<size_t>(r) * w + c];
                }
            }
        };
    }
    return id;
}

VarId Tape::concat_cols(const std::vector<VarId>& xs) {
    require(!xs.empty(), "concat_cols: empty");
    int m = val(xs[0]).dim(0);
    int total = 0;
    bool ng = false;
    for (VarId x : xs) {
        require(val(x).ndim() == 2 && val(x).dim(0) == m, "concat_cols: row mismatch");
        total += val(x).dim(1);
        ng = ng || needs_grad(x);
    }
    Tensor out = Tensor::zeros({m, total});
    int off = 0;
    for (VarId x : xs) {
        int w = val(x).dim(1);
        for (int r = 0; r < m; ++r) {
            std::copy_n(val(x).data.begin() + static_cast<int64_t>(r) * w, w,
                        out.data.begin() + static_cast<int64_t>(r) * total + off);
        }
        off += w;
    }
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        auto parts = std::make_shared<std::vector<VarId>>(xs);
        nodes_.back().back = [this, id, parts, m, total] {
            const Tensor& g = grad(id);
            int off2 = 0;
            for (VarId x : *parts) {
                int w = val(x).dim(1);
                if (needs_grad(x)) {
                    Tensor& dx = grad_mut(x);
                    for (int r = 0; r < m; ++r) {
                        for (int c = 0; c < w; ++c) {
                            dx.data[static_cast<size_t>(r) * w + c] += g.data[static_cast<size_t>(r) * total + off2 + c];
                        }
                    }
                }
                off2 += w;
            }
        };
    }
    return id;
}

VarId Tape::concat_rows(const std::vector<VarId>& xs) {
    require(!xs.empty(), "concat_rows: empty");
    int n = val(xs[0]).dim(1);
    int total = 0;
    bool ng = false;
    for (VarId x : xs) {
        require(val(x).ndim() == 2 && val(x).dim(1) == n, "concat_rows: column mismatch");
        total += val(x).dim(0);
        ng = ng || needs_grad(x);
    }
    Tensor out = Tensor::zeros({total, n});
    int64_t off = 0;
    for (VarId x : xs) {
        std::copy(val(x).data.begin(), val(x).data.end(), out.data.begin() + off);
        off += val(x).numel();
    }
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        auto parts = std::make_shared<std::vector<VarId>>(xs);
        nodes_.back().back = [this, id, parts] {
            const Tensor& g = grad(id);
            int64_t off2 = 0;
            for (VarId x : *parts) {
                int64_t cnt = val(x).numel();
                if (needs_grad(x)) {
                    Tensor& dx = grad_mut(x);
                    for (int64_t i = 0; i < cnt; ++i) dx.data[static_cast<size_t>(i)] += g.data[static_cast<size_t>(off2 + i)];
                }
                off2 += cnt;
            }
        };
    }
    return id;
}

VarId Tape::concat_vec(const std::vector<VarId>& xs) {
    require(!xs.empty(), "concat_vec: empty");
    int total = 0;
    bool ng = false;
    for (VarId x : xs) {
        require(val(x).ndim() == 1, "concat_vec: need 1-D parts");
        total += val(x).dim(0);
        ng = ng || needs_grad(x);
    }
    Tensor out = Tensor::zeros({total});
    int off = 0;
    for (VarId x : xs) {
        std::copy(val(x).data.begin(), val(x).data.end(), out.data.begin() + off);
        off += val(x).dim(0);
    }
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        auto parts = std::make_shared<std::vector<VarId>>(xs);
        nodes_.back().back = [this, id, parts] {
            const Tensor& g = grad(id);
            int off2 = 0;
            for (VarId x : *parts) {
                int w = val(x).dim(0);
                if (needs_grad(x)) {
                    Tensor& dx = grad_mut(x);
                    for (int c = 0; c < w; ++c) dx.data[static_cast<size_t>(c)] += g.data[static_cast<size_t>(off2 + c)];
                }
                off2 += w;
            }
        };
    }
    return id;
}

VarId Tape::stack_rows(const std::vector<VarId>& xs) {
    require(!xs.empty(), "stack_rows: empty");
    int d = val(xs[0]).dim(0);
    bool ng = false;
    for (VarId x : xs) {
        require(val(x).ndim() == 1 && val(x).dim(0) == d, "stack_rows: dim mismatch");
        ng = ng || needs_grad(x);
    }
    int m = static_cast<int>(xs.size());
    Tensor out = Tensor::zeros({m, d});
    for (int r = 0; r < m; ++r) {
        std::copy(val(xs[static_cast<size_t>(r)]).data.begin(), val(xs[static_cast<size_t>(r)]).data.end(),
                  out.data.begin() + static_cast<int64_t>(r) * d);
    }
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        auto parts = std::make_shared<std::vector<VarId>>(xs);
        nodes_.back().back = [this, id, parts, d] {
            const Tensor& g = grad(id);
            for (size_t r = 0; r < parts->size(); ++r) {
                VarId x = (*parts)[r];
                if (!needs_grad(x)) continue;
                Tensor& dx = grad_mut(x);
                for (int c = 0; c < d; ++c) dx.data[static_cast<size_t>(c)] += g.data[r * static_cast<size_t>(d) + c];
            }
        };
    }
    return id;
}

// ---------------------------------------------------------------------------
// vision
// ---------------------------------------------------------------------------

VarId Tape::conv2d(VarId x, VarId w, VarId b, int stride_h, int stride_w,
                   PadMode pad_mode, int pad_h, int pad_w) {
    const Tensor& vx = val(x);
    const Tensor& vw = val(w);
    require(vx.ndim() == 3 && vw.ndim() == 4, "conv2d: need [C,H,W] and [Co,Ci,kh,kw]");
    int ci = vx.dim(0), h = vx.dim(1), wid = vx.dim(2);
    int co = vw.dim(0), kh = vw.dim(2), kw = vw.dim(3);
    require(vw.dim(1) == ci, "conv2d: channel mismatch");
    require(val(b).numel() == co, "conv2d: bias mismatch");
    int oh = (h + 2 * pad_h - kh) / stride_h + 1;
    int ow = (wid + 2 * pad_w - kw) / stride_w + 1;
    require(oh > 0 && ow > 0, "conv2d: empty output");

    int64_t rows = static_cast<int64_t>(oh) * ow;
    int cols_w = ci * kh * kw;
    auto cols = std::make_shared<std::vector<double>>(static_cast<size_t>(rows) * cols_w);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* dst = cols->data() + (static_cast<int64_t>(oy) * ow + ox) * cols_w;
            for (int c = 0; c < ci; ++c) {
                for (int ky = 0; ky < kh; ++ky) {
                    int sy = oy * stride_h + ky - pad_h;
                    for (int kx = 0; kx < kw; ++kx) {
                        int sx = ox * stride_w + kx - pad_w;
                        double v;
                        if (pad_mode == PadMode::replicate) {
                            int cy = sy < 0 ? 0 : (sy >= h ? h - 1 : sy);
                            int cx = sx < 0 ? 0 : (sx >= wid ? wid - 1 : sx);
                            v = vx.data[(static_cast<size_t>(c) * h + cy) * wid + cx];
                        } else {
                            v = (sy < 0 || sy >= h || sx < 0 || sx >= wid)
                                    ? 0.0
                                    : vx.data[(static_cast<size_t>(c) * h + sy) * wid + sx];
                        }
                        *dst++ = v;
                    }
                }
            }
        }
    }

    // outmat [rows, co] = cols [rows, cols_w] * Wmat^T
    Tensor out = Tensor::zeros({co, oh, ow});
    {
        RowMat outmat(rows, co);
        MapC colmap(cols->data(), rows, cols_w);
        MapC wmap(vw.data.data(), co, cols_w);
        outmat.noalias() = colmap * wmap.transpose();
        const Tensor& vb = val(b);
        for (int c = 0; c < co; ++c) {
            for (int64_t r = 0; r < rows; ++r) {
                out.data[static_cast<size_t>(c) * rows + r] = outmat(r, c) + vb.data[static_cast<size_t>(c)];
            }
        }
    }

    bool ng = needs_grad(x) || needs_grad(w) || needs_grad(b);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, x, w, b, cols, rows, cols_w, co, ci, h, wid, oh, ow,
                              kh, kw, stride_h, stride_w, pad_mode, pad_h, pad_w] {
            const Tensor& g = grad(id);
            RowMat gmat(rows, co);
            for (int c = 0; c < co; ++c) {
                for (int64_t r = 0; r < rows; ++r) gmat(r, c) = g.data[static_cast<size_t>(c) * rows + r];
            }
            if (needs_grad(b)) {
                Tensor& db = grad_mut(b);
                for (int c = 0; c < co; ++c) db.data[static_cast<size_t>(c)] += gmat.col(c).sum();
            }
            MapC colmap(cols->data(), rows, cols_w);
            if (needs_grad(w)) {
                as_mat(grad_mut(w), co, cols_w).noalias() += gmat.transpose() * colmap;
            }
            if (needs_grad(x)) {
                RowMat dcols(rows, cols_w);
                dcols.noalias() = gmat * as_mat(val(w), co, cols_w);
                Tensor& dx = grad_mut(x);
                for (int oy = 0; oy < oh; ++oy) {
                    for (int ox = 0; ox < ow; ++ox) {
                        const int64_t r = static_cast<int64_t>(oy) * ow + ox;
                        int idx = 0;
                        for (int c = 0; c < ci; ++c) {
                            for (int ky = 0; ky < kh; ++ky) {
                                int sy = oy * stride_h + ky - pad_h;
                                for (int kx = 0; kx < kw; ++kx, ++idx) {
                                    int sx = ox * stride_w + kx - pad_w;
                                    int cy = sy, cx = sx;
                                    if (pad_mode == PadMode::replicate) {
                                        cy = sy < 0 ? 0 : (sy >= h ? h - 1 : sy);
                                        cx = sx < 0 ? 0 : (sx >= wid ? wid - 1 : sx);
                                    } else if (sy < 0 || sy >= h || sx < 0 || sx >= wid) {
                                        continue;
                                    }
                                    dx.data[(static_cast<size_t>(c) * h + cy) * wid + cx] += dcols(r, idx);
                                }
                            }
                        }
                    }
                }
            }
        };
    }
    return id;
}

VarId Tape::gap_hw(VarId x) {
    const Tensor& vx = val(x);
    require(vx.ndim() == 3, "gap_hw: need [C,H,W]");
    int c = vx.dim(0), h = vx.dim(1), w = vx.dim(2);
    int64_t hw = static_cast<int64_t>(h) * w;
    Tensor out = Tensor::zeros({c});
    for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int64_t i = 0; i < hw; ++i) s += vx.data[static_cast<size_t>(ch) * hw + i];
        out.data[static_cast<size_t>(ch)] = s / static_cast<double>(hw);
    }
    bool ng = needs_grad(x);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, x, c, hw] {
            const Tensor& g = grad(id);
            Tensor& dx = grad_mut(x);
            for (int ch = 0; ch < c; ++ch) {
                double gv = g.data[static_cast<size_t>(ch)] / static_cast<double>(hw);
                for (int64_t i = 0; i < hw; ++i) dx.data[static_cast<size_t>(ch) * hw + i] += gv;
            }
        };
    }
    return id;
}

VarId Tape::extract_patches(VarId x, int p) {
    const Tensor& vx = val(x);
    require(vx.ndim() == 3, "extract_patches: need [C,H,W]");
    int c = vx.dim(0), h = vx.dim(1), w = vx.dim(2);
    require(h % p == 0 && w % p == 0, "extract_patches: size not divisible by patch");
    int gy = h / p, gx = w / p;
    int rows = gy * gx, cols = c * p * p;
    Tensor out = Tensor::zeros({rows, cols});
    for (int py = 0; py < gy; ++py) {
        for (int px = 0; px < gx; ++px) {
            double* dst = out.data.data() + (static_cast<int64_t>(py) * gx + px) * cols;
            for (int ch = 0; ch < c; ++ch) {
                for (int ky = 0; ky < p; ++ky) {
                    const double* src = vx.data.data() +
                                        (static_cast<size_t>(ch) * h + py * p + ky) * w + px * p;
                    std::copy_n(src, p, dst);
                    dst += p;
                }
            }
        }
    }
    bool ng = needs_grad(x);
    VarId id = push(std::move(out), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, x, p, c, h, w, gy, gx, cols] {
            const Tensor& g = grad(id);
            Tensor& dx = grad_mut(x);
            for (int py = 0; py < gy; ++py) {
                for (int px = 0; px < gx; ++px) {
                    const double* src = g.data.data() + (static_cast<int64_t>(py) * gx + px) * cols;
                    for (int ch = 0; ch < c; ++ch) {
                        for (int ky = 0; ky < p; ++ky) {
                            double* dst = dx.data.data() +
                                          (static_cast<size_t>(ch) * h + py * p + ky) * w + px * p;
                            for (int kx = 0; kx < p; ++kx) dst[kx] += *src++;
                        }
                    }
                }
            }
        };
    }
    return id;
}

// ---------------------------------------------------------------------------
// task-specific
// ---------------------------------------------------------------------------

VarId Tape::region_loss(VarId weights, double k, int t) {
    const Tensor& vw = val(weights);
    require(vw.numel() == 3 * t, "region_loss: weights must be [3T]");
    if (k <= 0.0) throw ArgumentError("region_loss: k must be positive");
    auto argmax = std::make_shared<std::vector<int>>(static_cast<size_t>(t));
    auto terms = std::make_shared<std::vector<double>>(static_cast<size_t>(t));
    double total = 0.0;
    for (int i = 0; i < t; ++i) {
        int jm = 0;
        double m = vw.data[static_cast<size_t>(i)];
        for (int j = 1; j < 3; ++j) {
            double v = vw.data[static_cast<size_t>(j) * t + i];
            if (v > m) {
                m = v;
                jm = j;
            }
        }
        double head = vw.data[static_cast<size_t>(i)];
        double term = k * std::exp(head - m);
        (*argmax)[static_cast<size_t>(i)] = jm;
        (*terms)[static_cast<size_t>(i)] = term;
        total += term;
    }
    bool ng = needs_grad(weights);
    VarId id = push(Tensor::scalar(total), ng, nullptr);
    if (ng) {
        nodes_.back().back = [this, id, weights, t, argmax, terms] {
            double g = grad(id).data[0];
            Tensor& dw = grad_mut(weights);
            for (int i = 0; i < t; ++i) {
                double term = (*terms)[static_cast<size_t>(i)];
                int jm = (*argmax)[static_cast<size_t>(i)];
                dw.data[static_cast<size_t>(i)] += g * term;                      // d/d(head)
                dw.data[static_cast<size_t>(jm) * t + i] -= g * term;             // d/d(max)
            }
        };
    }
    return id;
}

}  // namespace lipfd
