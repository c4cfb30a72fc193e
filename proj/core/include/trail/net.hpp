#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace trail {

// Fully-connected network with ReLU hidden layers and a linear output layer.
// Parameters live in one flat vector: per layer, row-major W[out][in] then b[out].
class DenseNet {
public:
    explicit DenseNet(std::vector<int> dims);

    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }
    const std::vector<int>& dims() const { return dims_; }
    std::size_t n_params() const { return params_.size(); }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& params() { return params_; }

    // He-uniform weights, zero biases.
    void init_he(std::mt19937_64& rng);

    struct Cache {
        int n = 0;
        // acts[0] is the input batch; acts[l+1] the (post-ReLU) output of layer l.
        std::vector<std::vector<double>> acts;
    };

    // Batched forward: `inputs` holds n rows of input_dim; returns n rows of
    // output_dim. The cache, when supplied, is sufficient for backward().
    std::vector<double> forward(const std::vector<double>& inputs, int n,
                                Cache* cache = nullptr) const;

    // Accumulates d(sum of per-sample losses)/d(params) into `grad` given
    // per-sample upstream gradients (n rows of output_dim).
    void backward(const Cache& cache, const std::vector<double>& upstream,
                  std::vector<double>& grad) const;

private:
    std::vector<int> dims_;
    std::vector<double> params_;
    std::vector<std::size_t> w_off_;
    std::vector<std::size_t> b_off_;
};

bool all_finite(const std::vector<double>& v);

} // namespace trail
