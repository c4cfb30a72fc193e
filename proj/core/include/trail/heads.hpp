#pragma once

#include <optional>
#include <random>
#include <vector>

namespace trail {

// Log-std clamp applied before exponentiation.
constexpr double kLogStdMin = -10.0;
constexpr double kLogStdMax = 3.0;

// Mixture-density head over a raw network output of size K + 2*K*d laid out as
// [logits (K)][center offsets (K*d)][log stds (K*d)]. Mode means are anchored:
// mu_k = anchor + c_k.
struct MdnSpec {
    int n_modes = 1;
    int dim = 1;
    int raw_size() const { return n_modes * (1 + 2 * dim); }
};

// Negative log-likelihood of `target` under the mixture, log-sum-exp
// stabilized. When `grad_raw` is non-null the exact gradient with respect to
// the raw head output is written there.
double mdn_nll(const MdnSpec& spec, const double* raw, const double* anchor, const double* target,
               double* grad_raw = nullptr);

std::vector<double> mdn_mode_mean(const MdnSpec& spec, const double* raw, const double* anchor,
                                  int mode);

// argmax over mixture logits, lowest index on ties.
int mdn_best_logit_mode(const MdnSpec& spec, const double* raw);

// Draws from the given mode, or from mode ~ softmax(logits) when unset.
std::vector<double> mdn_sample(const MdnSpec& spec, const double* raw, const double* anchor,
                               std::mt19937_64& rng, std::optional<int> mode = std::nullopt);

// Softmax cross-entropy; gradient (softmax - one_hot) written to `grad` when non-null.
double categorical_nll(const double* logits, int n, int label, double* grad = nullptr);

int argmax_lowest_tie(const double* v, int n);

} // namespace trail
