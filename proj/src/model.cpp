#include "amgae/model.hpp"

#include "amgae/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amgae {

namespace {

std::string layer_name(const std::string& prefix, index_t layer, const char* part) {
    return prefix + ".l" + std::to_string(layer) + "." + part;
}

Tensor xavier_uniform(index_t fan_in, index_t fan_out, RngStream& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w(fan_in, fan_out);
    for (index_t i = 0; i < w.size(); ++i)
        w.data()[i] = (rng.next_double() * 2.0 - 1.0) * bound;
    return w;
}

void add_stack_params(ParamStore& store, const std::string& prefix, index_t num_layers,
                      index_t d_in, index_t d_hidden, index_t d_out, RngStream& rng) {
    for (index_t l = 0; l < num_layers; ++l) {
        const index_t in = (l == 0) ? d_in : d_hidden;
        const index_t out = (l == num_layers - 1) ? d_out : d_hidden;
        store.add(layer_name(prefix, l, "W"), xavier_uniform(in, out, rng));
        store.add(layer_name(prefix, l, "b"), Tensor(1, out));
    }
}

Tensor zero_rows(const Tensor& t, const std::vector<index_t>& rows) {
    Tensor out = t;
    for (index_t r : rows) std::fill(out.row(r), out.row(r) + out.cols(), 0.0);
    return out;
}

}  // namespace

void ModelConfig::validate() const {
    if (d_f < 1) throw std::invalid_argument("model: d_f must be >= 1");
    if (d_h < 1) throw std::invalid_argument("model: d_h must be >= 1");
    if (enc_layers < 1 || dec_layers < 1 || disc_layers < 1)
        throw std::invalid_argument("model: layer counts must be >= 1");
    if (mask_ratio < 0.0 || mask_ratio >= 1.0)
        throw std::invalid_argument("model: mask_ratio must lie in [0,1)");
    if (!std::isfinite(prelu_slope)) throw std::invalid_argument("model: bad prelu slope");
}

ParamStore init_generator(const ModelConfig& cfg, RngStream& rng) {
    cfg.validate();
    ParamStore store;
    store.add("mask_token", Tensor(1, cfg.d_f));  // zero-initialized, learnable
    add_stack_params(store, "enc", cfg.enc_layers, cfg.d_f, cfg.d_h, cfg.d_h, rng);
    add_stack_params(store, "dec", cfg.dec_layers, cfg.d_h, cfg.d_h, cfg.d_f, rng);
    return store;
}

ParamStore init_discriminator(const ModelConfig& cfg, RngStream& rng) {
    cfg.validate();
    ParamStore store;
    add_stack_params(store, "disc", cfg.disc_layers, cfg.d_f, cfg.d_h, cfg.d_h, rng);
    store.add("disc.head.W", xavier_uniform(cfg.d_h, 1, rng));
    store.add("disc.head.b", Tensor(1, 1));
    return store;
}

Tensor gnn_stack(const ParamStore& params, const std::string& prefix, index_t num_layers,
                 ops::Act last_act, double slope, const SparseOp& a_hat, const Tensor& x,
                 StackCache* cache) {
    Tensor current = x;
    for (index_t l = 0; l < num_layers; ++l) {
        Tensor agg = ops::spmm(a_hat, current);
        Tensor pre;
        kernels::matmul(agg, params.value(layer_name(prefix, l, "W")), pre);
        kernels::add_bias_rows(pre, params.value(layer_name(prefix, l, "b")));
        const ops::Act act = (l == num_layers - 1) ? last_act : ops::Act::prelu;
        Tensor out = ops::activation(pre, act, slope);
        if (cache) {
            cache->inputs.push_back(std::move(current));
            cache->aggs.push_back(std::move(agg));
            cache->pres.push_back(std::move(pre));
        }
        current = std::move(out);
    }
    return current;
}

void gnn_stack_backward(ParamStore& params, const std::string& prefix, index_t num_layers,
                        ops::Act last_act, double slope, const SparseOp& a_hat,
                        const StackCache& cache, const Tensor& upstream,
                        bool accumulate_param_grads, Tensor* grad_input) {
    if (static_cast<index_t>(cache.inputs.size()) != num_layers)
        throw std::invalid_argument("gnn_stack_backward: cache depth mismatch");

    Tensor up = upstream;
    for (index_t l = num_layers - 1; l >= 0; --l) {
        const ops::Act act = (l == num_layers - 1) ? last_act : ops::Act::prelu;
        const auto li = static_cast<std::size_t>(l);

        Tensor grad_pre;
        ops::activation_backward(cache.pres[li], up, act, slope, grad_pre);

        const Tensor& w = params.value(layer_name(prefix, l, "W"));
        if (accumulate_param_grads) {
            ops::matmul_backward(cache.aggs[li], w, grad_pre,
                                 nullptr, &params.grad(layer_name(prefix, l, "W")));
            kernels::colsum(grad_pre, params.grad(layer_name(prefix, l, "b")),
                            /*accumulate=*/true);
        }
        const bool need_input_grad = l > 0 || grad_input != nullptr;
        if (!need_input_grad) break;

        Tensor grad_agg;
        ops::matmul_backward(cache.aggs[li], w, grad_pre, &grad_agg, nullptr);
        Tensor grad_in;
        ops::spmm_backward(a_hat, grad_agg, grad_in);
        up = std::move(grad_in);
    }
    if (grad_input) {
        if (grad_input->rows() == 0 && grad_input->cols() == 0)
            *grad_input = Tensor(up.rows(), up.cols());
        require_shape(*grad_input, up.rows(), up.cols(), "gnn_stack grad_input");
        double* dst = grad_input->data();
        const double* src = up.data();
        for (index_t i = 0; i < up.size(); ++i) dst[i] += src[i];
    }
}

MaskResult mask_nodes(const Tensor& x, double ratio, const Tensor& mask_token, RngStream& rng) {
    if (ratio < 0.0 || ratio >= 1.0)
        throw std::invalid_argument("mask_nodes: ratio must lie in [0,1)");
    require_shape(mask_token, 1, x.cols(), "mask_nodes token");

    const index_t n = x.rows();
    const auto count = static_cast<index_t>(std::floor(ratio * static_cast<double>(n)));

    MaskResult result;
    result.x_tilde = x;
    if (count == 0) return result;

    std::vector<index_t> ids(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    for (index_t i = 0; i < count; ++i) {
        index_t j = i + static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    ids.resize(static_cast<std::size_t>(count));
    std::sort(ids.begin(), ids.end());

    const double* token = mask_token.row(0);
    for (index_t r : ids) std::copy(token, token + x.cols(), result.x_tilde.row(r));
    result.masked = std::move(ids);
    return result;
}

void mask_backward(ParamStore& gen, const std::vector<index_t>& masked,
                   const Tensor& grad_x_tilde) {
    Tensor& token_grad = gen.grad("mask_token");
    for (index_t r : masked) {
        const double* src = grad_x_tilde.row(r);
        double* dst = token_grad.row(0);
        for (index_t j = 0; j < grad_x_tilde.cols(); ++j) dst[j] += src[j];
    }
}

Tensor encode(const ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
              const Tensor& x, StackCache* cache) {
    return gnn_stack(gen, "enc", cfg.enc_layers, ops::Act::prelu, cfg.prelu_slope, a_hat, x,
                     cache);
}

void encode_backward(ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
                     const StackCache& cache, const Tensor& upstream,
                     bool accumulate_param_grads, Tensor* grad_x) {
    gnn_stack_backward(gen, "enc", cfg.enc_layers, ops::Act::prelu, cfg.prelu_slope, a_hat,
                       cache, upstream, accumulate_param_grads, grad_x);
}

Tensor decode(const ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
              const Tensor& h, const std::vector<index_t>& masked, StackCache* cache) {
    const Tensor input = cfg.remask_decoder ? zero_rows(h, masked) : h;
    return gnn_stack(gen, "dec", cfg.dec_layers, ops::Act::identity, cfg.prelu_slope, a_hat,
                     input, cache);
}

void decode_backward(ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
                     const std::vector<index_t>& masked, const StackCache& cache,
                     const Tensor& upstream, bool accumulate_param_grads, Tensor* grad_h) {
    if (!grad_h) {
        gnn_stack_backward(gen, "dec", cfg.dec_layers, ops::Act::identity, cfg.prelu_slope,
                           a_hat, cache, upstream, accumulate_param_grads, nullptr);
        return;
    }
    Tensor grad_decoder_in;
    gnn_stack_backward(gen, "dec", cfg.dec_layers, ops::Act::identity, cfg.prelu_slope, a_hat,
                       cache, upstream, accumulate_param_grads, &grad_decoder_in);
    if (cfg.remask_decoder)
        for (index_t r : masked)
            std::fill(grad_decoder_in.row(r), grad_decoder_in.row(r) + grad_decoder_in.cols(),
                      0.0);
    if (grad_h->rows() == 0 && grad_h->cols() == 0)
        *grad_h = Tensor(grad_decoder_in.rows(), grad_decoder_in.cols());
    require_shape(*grad_h, grad_decoder_in.rows(), grad_decoder_in.cols(), "decode grad_h");
    for (index_t i = 0; i < grad_decoder_in.size(); ++i)
        grad_h->data()[i] += grad_decoder_in.data()[i];
}

Tensor discriminate(const ParamStore& disc, const ModelConfig& cfg, const SparseOp& a_hat,
                    const Tensor& x_in, const std::vector<index_t>& boundaries,
                    DiscCache* cache) {
    StackCache local_stack;
    StackCache* stack = cache ? &cache->stack : &local_stack;
    Tensor repr = gnn_stack(disc, "disc", cfg.disc_layers, ops::Act::prelu, cfg.prelu_slope,
                            a_hat, x_in, stack);
    Tensor pooled = ops::readout_pool(repr, boundaries, cfg.readout);
    Tensor logits;
    kernels::matmul(pooled, disc.value("disc.head.W"), logits);
    kernels::add_bias_rows(logits, disc.value("disc.head.b"));
    Tensor probs = ops::activation(logits, ops::Act::sigmoid);
    if (cache) {
        cache->node_repr = std::move(repr);
        cache->pooled = std::move(pooled);
        cache->probs = probs;
    }
    return probs;
}

void discriminate_backward(ParamStore& disc, const ModelConfig& cfg, const SparseOp& a_hat,
                           const std::vector<index_t>& boundaries, const DiscCache& cache,
                           const Tensor& upstream, bool accumulate_param_grads,
                           Tensor* grad_input) {
    require_shape(upstream, cache.probs.rows(), 1, "discriminate_backward upstream");

    // sigmoid backward straight from the saved probabilities
    Tensor grad_logits(cache.probs.rows(), 1);
    for (index_t i = 0; i < cache.probs.rows(); ++i) {
        const double p = cache.probs.at(i, 0);
        grad_logits.at(i, 0) = upstream.at(i, 0) * p * (1.0 - p);
    }

    Tensor grad_pooled;
    ops::matmul_backward(cache.pooled, disc.value("disc.head.W"), grad_logits, &grad_pooled,
                         accumulate_param_grads ? &disc.grad("disc.head.W") : nullptr);
    if (accumulate_param_grads)
        kernels::colsum(grad_logits, disc.grad("disc.head.b"), /*accumulate=*/true);

    Tensor grad_repr;
    ops::readout_pool_backward(cache.node_repr, boundaries, cfg.readout, grad_pooled,
                               grad_repr);
    gnn_stack_backward(disc, "disc", cfg.disc_layers, ops::Act::prelu, cfg.prelu_slope, a_hat,
                       cache.stack, grad_repr, accumulate_param_grads, grad_input);
}

Tensor embed(const ParamStore& gen, const ModelConfig& cfg, const SparseOp& a_hat,
             const Tensor& x, const std::vector<index_t>& boundaries) {
    return ops::readout_pool(encode(gen, cfg, a_hat, x), boundaries, cfg.readout);
}

}  // namespace amgae
