#pragma once

#include "lipfd/tensor.hpp"

#include <functional>
#include <vector>

namespace lipfd {

using VarId = int;

enum class PadMode { zero, replicate };

/// Reverse-mode autodiff tape. Forward values are computed eagerly as ops
/// are recorded; backward() walks the recorded nodes in reverse. One tape
/// per forward pass; tapes are cheap to build and are not reused.
///
/// All ops propagate a needs_grad flag so inference tapes skip closure
/// allocation entirely.
class Tape {
public:
    VarId leaf(Tensor value, bool requires_grad);

    const Tensor& val(VarId id) const { return nodes_[static_cast<size_t>(id)].value; }
    const Tensor& grad(VarId id) const;
    bool needs_grad(VarId id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }

    /// Backpropagate from a scalar root ([1]-shaped).
    void backward(VarId root);

    // ---- elementwise ----
    VarId add(VarId a, VarId b);
    VarId sub(VarId a, VarId b);
    VarId mul(VarId a, VarId b);
    VarId scale(VarId a, double s);
    VarId affine(VarId a, double mul, double add);  // mul*x + add
    VarId relu(VarId a);
    VarId gelu(VarId a);
    VarId sigmoid(VarId a);
    VarId exp(VarId a);
    VarId log(VarId a);
    VarId recip(VarId a);
    VarId clamp(VarId a, double lo, double hi);

    // ---- linear algebra ----
    VarId matmul(VarId a, VarId b);        // [m,k] x [k,n]
    VarId transpose(VarId a);              // 2-D
    VarId add_rowvec(VarId a, VarId v);    // [m,n] + [n]
    VarId mul_scalarvar(VarId a, VarId s); // a * s, s is [1]
    VarId softmax_rows(VarId a);
    VarId layer_norm_rows(VarId x, VarId gamma, VarId beta, double eps = 1e-6);

    // ---- reductions ----
    VarId sum_all(VarId a);   // -> [1]
    VarId mean_all(VarId a);  // -> [1]

    // ---- shape ----
    VarId reshape(VarId a, std::vector<int> shape);
    VarId row(VarId a, int r);                        // [n,d] -> [d]
    VarId slice_cols(VarId a, int c0, int c1);        // [m,n] -> [m,c1-c0]
    VarId concat_cols(const std::vector<VarId>& xs);  // [m,*] -> [m,sum]
    VarId concat_rows(const std::vector<VarId>& xs);  // [*,n] -> [sum,n]
    VarId concat_vec(const std::vector<VarId>& xs);   // 1-D concat
    VarId stack_rows(const std::vector<VarId>& xs);   // n x [d] -> [n,d]

    // ---- vision ----
    /// x [C,H,W], w [Co,Ci,kh,kw], b [Co]; output [Co,OH,OW].
    VarId conv2d(VarId x, VarId w, VarId b, int stride_h, int stride_w,
                 PadMode pad_mode, int pad_h, int pad_w);
    VarId gap_hw(VarId x);                 // [C,H,W] -> [C] (spatial mean)
    VarId extract_patches(VarId x, int p); // [C,H,W] -> [(H/p)*(W/p), C*p*p]

    // ---- task-specific ----
    /// Region-awareness loss for a single sample. Weights are scale-major,
    /// [3T]: index j*t + i for scale j in {0=head,1=face,2=lip}, frame i.
    /// Per frame i: k / exp(max_j w[j,i] - w[head,i]); summed over frames.
    VarId region_loss(VarId weights, double k, int t);

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad_store;
        bool needs_grad = false;
        bool grad_ready = false;
        std::function<void()> back;
    };
    std::vector<Node> nodes_;

    VarId push(Tensor value, bool needs_grad, std::function<void()> back);
    Tensor& grad_mut(VarId id);
    void accum(VarId id, const Tensor& g);
    void accum_at(VarId id, int64_t index, double g);
};

}  // namespace lipfd
