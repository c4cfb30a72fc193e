#include "trail/net.hpp"

#include <cmath>
#include <stdexcept>

namespace trail {

DenseNet::DenseNet(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("need at least one layer");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        if (dims_[l] < 1 || dims_[l + 1] < 1) throw std::invalid_argument("bad layer dim");
        w_off_.push_back(total);
        total += static_cast<std::size_t>(dims_[l]) * dims_[l + 1];
        b_off_.push_back(total);
        total += dims_[l + 1];
    }
    params_.assign(total, 0.0);
}

void DenseNet::init_he(std::mt19937_64& rng) {
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        // He-uniform on the ReLU layers; the linear output layer starts two
        // orders smaller so initial policies/heads are near their maximum
        // entropy defaults instead of committing to the init noise.
        const bool output_layer = l + 2 == dims_.size();
        double limit = std::sqrt(6.0 / dims_[l]) * (output_layer ? 0.01 : 1.0);
        std::uniform_real_distribution<double> u(-limit, limit);
        double* w = params_.data() + w_off_[l];
        for (int i = 0; i < dims_[l] * dims_[l + 1]; ++i) w[i] = u(rng);
        double* b = params_.data() + b_off_[l];
        for (int i = 0; i < dims_[l + 1]; ++i) b[i] = 0.0;
    }
}

std::vector<double> DenseNet::forward(const std::vector<double>& inputs, int n,
                                      Cache* cache) const {
    if (inputs.size() != static_cast<std::size_t>(n) * dims_.front())
        throw std::invalid_argument("input size mismatch");
    const std::size_t n_layers = dims_.size() - 1;
    if (cache) {
        cache->n = n;
        cache->acts.assign(dims_.size(), {});
        cache->acts[0] = inputs;
    }
    std::vector<double> cur = inputs;
    std::vector<double> next;
    std::vector<double> wt; // transposed weights; makes the inner loop contiguous
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int in = dims_[l], out = dims_[l + 1];
        const double* w = params_.data() + w_off_[l];
        const double* b = params_.data() + b_off_[l];
        const bool relu = l + 1 < n_layers;
        next.assign(static_cast<std::size_t>(n) * out, 0.0);
        wt.resize(static_cast<std::size_t>(in) * out);
        for (int o = 0; o < out; ++o)
            for (int k = 0; k < in; ++k)
                wt[static_cast<std::size_t>(k) * out + o] = w[static_cast<std::size_t>(o) * in + k];
        for (int i = 0; i < n; ++i) {
            const double* x = cur.data() + static_cast<std::size_t>(i) * in;
            double* y = next.data() + static_cast<std::size_t>(i) * out;
            for (int o = 0; o < out; ++o) y[o] = b[o];
            for (int k = 0; k < in; ++k) {
                const double xv = x[k];
                const double* wr = wt.data() + static_cast<std::size_t>(k) * out;
                for (int o = 0; o < out; ++o) y[o] += xv * wr[o];
            }
            if (relu)
                for (int o = 0; o < out; ++o) y[o] = y[o] < 0.0 ? 0.0 : y[o];
        }
        cur.swap(next);
        if (cache) cache->acts[l + 1] = cur;
    }
    return cur;
}

void DenseNet::backward(const Cache& cache, const std::vector<double>& upstream,
                        std::vector<double>& grad) const {
    const int n = cache.n;
    if (grad.size() != params_.size()) throw std::invalid_argument("grad size mismatch");
    if (upstream.size() != static_cast<std::size_t>(n) * dims_.back())
        throw std::invalid_argument("upstream size mismatch");
    std::vector<double> delta = upstream;
    std::vector<double> prev;
    for (std::size_t l = dims_.size() - 1; l-- > 0;) {
        const int in = dims_[l], out = dims_[l + 1];
        const double* w = params_.data() + w_off_[l];
        double* gw = grad.data() + w_off_[l];
        double* gb = grad.data() + b_off_[l];
        const std::vector<double>& x = cache.acts[l];
        for (int i = 0; i < n; ++i) {
            const double* xi = x.data() + static_cast<std::size_t>(i) * in;
            const double* di = delta.data() + static_cast<std::size_t>(i) * out;
            for (int o = 0; o < out; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                double* gwr = gw + static_cast<std::size_t>(o) * in;
                for (int k = 0; k < in; ++k) gwr[k] += d * xi[k];
                gb[o] += d;
            }
        }
        if (l == 0) break;
        prev.assign(static_cast<std::size_t>(n) * in, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* di = delta.data() + static_cast<std::size_t>(i) * out;
            const double* xi = x.data() + static_cast<std::size_t>(i) * in;
            double* pi = prev.data() + static_cast<std::size_t>(i) * in;
            for (int o = 0; o < out; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                const double* wr = w + static_cast<std::size_t>(o) * in;
                for (int k = 0; k < in; ++k) pi[k] += d * wr[k];
            }
            for (int k = 0; k < in; ++k)
                if (xi[k] <= 0.0) pi[k] = 0.0; // ReLU mask (hidden layers are post-ReLU)
        }
        delta.swap(prev);
    }
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace trail
