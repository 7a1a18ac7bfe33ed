#include "amgae/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace amgae {

namespace {

double probe(const std::function<double()>& loss_fn, double& coord, double analytic,
             const GradCheckConfig& cfg) {
    const double saved = coord;
    coord = saved + cfg.step;
    const double up = loss_fn();
    coord = saved - cfg.step;
    const double down = loss_fn();
    coord = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
        throw std::runtime_error("grad_check: non-finite loss during probing");
    const double fd = (up - down) / (2.0 * cfg.step);
    return std::abs(analytic - fd) /
           std::max({cfg.floor, std::abs(analytic), std::abs(fd)});
}

}  // namespace

double grad_check_tensor(const std::function<double()>& loss_fn, Tensor& x,
                         const Tensor& analytic_grad, RngStream& rng,
                         const GradCheckConfig& cfg) {
    if (!x.same_shape(analytic_grad))
        throw std::invalid_argument("grad_check_tensor: grad shape mismatch");
    std::vector<index_t> coords(static_cast<std::size_t>(x.size()));
    for (index_t i = 0; i < x.size(); ++i) coords[static_cast<std::size_t>(i)] = i;
    rng.shuffle(coords);
    const index_t n = std::min<index_t>(cfg.max_coords, x.size());

    double worst = 0.0;
    for (index_t k = 0; k < n; ++k) {
        const index_t i = coords[static_cast<std::size_t>(k)];
        worst = std::max(worst, probe(loss_fn, x.data()[i], analytic_grad.data()[i], cfg));
    }
    return worst;
}

double grad_check(const std::function<double()>& loss_fn,
                  const std::function<void()>& compute_grads, ParamStore& params,
                  RngStream& rng, const GradCheckConfig& cfg) {
    compute_grads();
    std::vector<Tensor> analytic;
    for (const GradSlot& s : params.slots()) analytic.push_back(s.grad);

    // flatten (slot, coord) pairs, then subsample
    std::vector<std::pair<std::size_t, index_t>> coords;
    for (std::size_t si = 0; si < params.slots().size(); ++si)
        for (index_t i = 0; i < params.slots()[si].value.size(); ++i) coords.emplace_back(si, i);
    rng.shuffle(coords);
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_coords),
                                                coords.size());

    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        auto [si, i] = coords[k];
        worst = std::max(worst, probe(loss_fn, params.slots()[si].value.data()[i],
                                      analytic[si].data()[i], cfg));
    }
    return worst;
}

}  // namespace amgae
