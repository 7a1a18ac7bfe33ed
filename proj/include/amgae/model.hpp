#pragma once

#include "amgae/ops.hpp"
#include "amgae/optim.hpp"
#include "amgae/rng.hpp"
#include "amgae/sparse.hpp"

#include <string>
#include <vector>

namespace amgae {

struct ModelConfig {
    index_t d_f = 0;  // input feature width (from the dataset)
    index_t d_h = 256;
    index_t enc_layers = 2;
    index_t dec_layers = 1;
    index_t disc_layers = 1;
    ops::Readout readout = ops::Readout::mean;
    double mask_ratio = 0.5;  // in [0,1)
    bool remask_decoder = true;
    double prelu_slope = 0.25;
    void validate() const;
};

// Generator parameters: mask_token (1 x d_f), enc.l{i}.{W,b}, dec.l{i}.{W,b}.
ParamStore init_generator(const ModelConfig& cfg, RngStream& rng);

// Discriminator parameters: disc.l{i}.{W,b} GNN layers plus disc.head.{W,b}.
ParamStore init_discriminator(const ModelConfig& cfg, RngStream& rng);

// Saved intermediates of one stack pass, consumed by the backward pass.
struct StackCache {
    std::vector<Tensor> inputs;  // per layer
    std::vector<Tensor> aggs;    // spmm(A, input)
    std::vector<Tensor> pres;    // agg * W + b
};

// layer l: act(spmm(A, input) * W_l + b_l); hidden activations are PReLU,
// the final one is `last_act`.
Tensor gnn_stack(const ParamStore& params, const std::string& prefix, index_t num_layers,
                 ops::Act last_act, double slope, const SparseOp& a_hat, const Tensor& x,
                 StackCache* cache = nullptr);

// Accumulates parameter grads when wanted (frozen passes skip them) and the
// input gradient when grad_input is non-null.
void gnn_stack_backward(ParamStore& params, const std::string& prefix, index_t num_layers,
                        ops::Act last_act, double slope, const SparseOp& a_hat,
                        const StackCache& cache, const Tensor& upstream,
                        bool accumulate_param_grads, Tensor* grad_input);

struct MaskResult {
    Tensor x_tilde;
    std::vector<index_t> masked;  // sorted ascending
};

// Replaces floor(ratio * N) uniformly chosen rows with the mask token;
// adjacency is untouched (feature-only corruption).
MaskResult mask_nodes(const Tensor& x, double ratio, const Tensor& mask_token, RngStream& rng);

// Routes masked-row gradients of x_tilde into the mask_token slot.
void mask_backward(ParamStore& gen, const std::vector<index_t>& masked,
                   const Tensor& grad_x_tilde);

Tensor encode(const ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
              const Tensor& x, StackCache* cache = nullptr);
void encode_backward(ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
                     const StackCache& cache, const Tensor& upstream,
                     bool accumulate_param_grads, Tensor* grad_x);

// Re-masks H (zeroing masked rows) when cfg.remask_decoder, then decodes back
// to feature space; the final activation is identity.
Tensor decode(const ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
              const Tensor& h, const std::vector<index_t>& masked,
              StackCache* cache = nullptr);
void decode_backward(ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
                     const std::vector<index_t>& masked, const StackCache& cache,
                     const Tensor& upstream, bool accumulate_param_grads, Tensor* grad_h);

struct DiscCache {
    StackCache stack;
    Tensor node_repr;  // stack output
    Tensor pooled;
    Tensor probs;
};

// GNN layers -> readout per boundaries -> linear head -> sigmoid; B x 1 probs.
Tensor discriminate(const ParamStore& disc, const ModelConfig& cfg, const SparseOp& a_hat,
                    const Tensor& x_in, const std::vector<index_t>& boundaries,
                    DiscCache* cache = nullptr);

// upstream is d loss / d probs. Parameter grads only when asked (the
// generator's adversarial pass keeps the discriminator frozen); grad wrt the
// input features only when grad_input is non-null.
void discriminate_backward(ParamStore& disc, const ModelConfig& cfg, const SparseOp& a_hat,
                           const std::vector<index_t>& boundaries, const DiscCache& cache,
                           const Tensor& upstream, bool accumulate_param_grads,
                           Tensor* grad_input);

// Inference path: encode WITHOUT masking, then readout -> B x d_h.
Tensor embed(const ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
             const Tensor& x, const std::vector<index_t>& boundaries);

}  // namespace amgae
