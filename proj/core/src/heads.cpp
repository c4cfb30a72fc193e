#include "trail/heads.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trail {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;

double clamp_log_std(double v) { return std::clamp(v, kLogStdMin, kLogStdMax); }
} // namespace

int argmax_lowest_tie(const double* v, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double mdn_nll(const MdnSpec& spec, const double* raw, const double* anchor, const double* target,
               double* grad_raw) {
    const int K = spec.n_modes, d = spec.dim;
    const double* logits = raw;
    const double* centers = raw + K;
    const double* log_stds = raw + K + K * d;

    // log softmax of the mixture logits
    double lmax = logits[argmax_lowest_tie(logits, K)];
    double lse = 0.0;
    for (int k = 0; k < K; ++k) lse += std::exp(logits[k] - lmax);
    const double log_z = lmax + std::log(lse);

    std::vector<double> comp(K); // log w_k + log N_k(target)
    std::vector<double> zbuf(static_cast<std::size_t>(K) * d);
    for (int k = 0; k < K; ++k) {
        double log_n = -0.5 * d * kLogTwoPi;
        for (int j = 0; j < d; ++j) {
            double ls = clamp_log_std(log_stds[k * d + j]);
            double z = (target[j] - anchor[j] - centers[k * d + j]) * std::exp(-ls);
            zbuf[k * d + j] = z;
            log_n -= ls + 0.5 * z * z;
        }
        comp[k] = (logits[k] - log_z) + log_n;
    }
    double cmax = comp[argmax_lowest_tie(comp.data(), K)];
    double csum = 0.0;
    for (int k = 0; k < K; ++k) csum += std::exp(comp[k] - cmax);
    const double log_lik = cmax + std::log(csum);

    if (grad_raw) {
        for (int k = 0; k < K; ++k) {
            const double r = std::exp(comp[k] - log_lik); // responsibility
            grad_raw[k] = std::exp(logits[k] - log_z) - r;
            for (int j = 0; j < d; ++j) {
                double ls = clamp_log_std(log_stds[k * d + j]);
                double z = zbuf[k * d + j];
                grad_raw[K + k * d + j] = -r * z * std::exp(-ls);
                double gs = -r * (z * z - 1.0);
                // clamp is part of the function: zero slope outside bounds
                if (log_stds[k * d + j] <= kLogStdMin || log_stds[k * d + j] >= kLogStdMax)
                    gs = 0.0;
                grad_raw[K + K * d + k * d + j] = gs;
            }
        }
    }
    return -log_lik;
}

std::vector<double> mdn_mode_mean(const MdnSpec& spec, const double* raw, const double* anchor,
                                  int mode) {
    if (mode < 0 || mode >= spec.n_modes) throw std::out_of_range("mdn mode out of range");
    std::vector<double> mu(spec.dim);
    const double* c = raw + spec.n_modes + mode * spec.dim;
    for (int j = 0; j < spec.dim; ++j) mu[j] = anchor[j] + c[j];
    return mu;
}

int mdn_best_logit_mode(const MdnSpec& spec, const double* raw) {
    return argmax_lowest_tie(raw, spec.n_modes);
}

std::vector<double> mdn_sample(const MdnSpec& spec, const double* raw, const double* anchor,
                               std::mt19937_64& rng, std::optional<int> mode) {
    const int K = spec.n_modes, d = spec.dim;
    int k;
    if (mode) {
        k = *mode;
        if (k < 0 || k >= K) throw std::out_of_range("mdn mode out of range");
    } else {
        double lmax = raw[argmax_lowest_tie(raw, K)];
        std::vector<double> w(K);
        double sum = 0.0;
        for (int i = 0; i < K; ++i) sum += w[i] = std::exp(raw[i] - lmax);
        std::uniform_real_distribution<double> u(0.0, sum);
        double r = u(rng);
        k = K - 1;
        for (int i = 0; i < K; ++i) {
            if (r < w[i]) {
                k = i;
                break;
            }
            r -= w[i];
        }
    }
    std::vector<double> out(d);
    const double* c = raw + K + k * d;
    const double* ls = raw + K + K * d + k * d;
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Only the upper clamp applies here: vanishing variance is fine when
    // sampling, the lower clamp exists to keep NLL training stable.
    for (int j = 0; j < d; ++j)
        out[j] = anchor[j] + c[j] + std::exp(std::min(ls[j], kLogStdMax)) * gauss(rng);
    return out;
}

double categorical_nll(const double* logits, int n, int label, double* grad) {
    if (label < 0 || label >= n) throw std::out_of_range("label out of range");
    double lmax = logits[argmax_lowest_tie(logits, n)];
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::exp(logits[i] - lmax);
    double log_z = lmax + std::log(sum);
    if (grad) {
        for (int i = 0; i < n; ++i)
            grad[i] = std::exp(logits[i] - log_z) - (i == label ? 1.0 : 0.0);
    }
    return log_z - logits[label];
}

} // namespace trail
