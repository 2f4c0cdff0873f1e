#pragma once

#include <cmath>
#include <vector>

#include "linn/tensor.hpp"

namespace linn {

struct AdamwConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;
};

// AdamW with decoupled weight decay: w -= lr*wd*w, then the Adam update
// from bias-corrected moments.
template <typename Real>
class Adamw {
public:
    explicit Adamw(AdamwConfig cfg = {}) : cfg_(cfg) {}

    void step(std::vector<ParamRef<Real>>& params, double lr) {
        ++step_count_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
        for (auto& ref : params) {
            Param<Real>& p = *ref.param;
            int64_t n = p.numel();
            for (int64_t i = 0; i < n; ++i) {
                double w = static_cast<double>(p.value[i]);
                double g = static_cast<double>(p.grad[i]);
                w -= lr * cfg_.weight_decay * w;
                double m = cfg_.beta1 * static_cast<double>(p.m[i]) + (1.0 - cfg_.beta1) * g;
                double v = cfg_.beta2 * static_cast<double>(p.v[i]) + (1.0 - cfg_.beta2) * g * g;
                p.m[i] = static_cast<Real>(m);
                p.v[i] = static_cast<Real>(v);
                double m_hat = m / bc1;
                double v_hat = v / bc2;
                w -= lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
                p.value[i] = static_cast<Real>(w);
            }
        }
    }

    int64_t step_count() const { return step_count_; }
    const AdamwConfig& config() const { return cfg_; }

private:
    AdamwConfig cfg_;
    int64_t step_count_ = 0;
};

struct LrSchedule {
    double lr_max = 1e-3;
    double lr_min = 1e-6;
    int total_epochs = 100;
};

// lr(s) = lr_min + 0.5*(lr_max-lr_min)*(1+cos(pi*s/total)); monotone
// non-increasing from lr_max at epoch 0 to lr_min at the final epoch.
inline double cosine_lr(int epoch, const LrSchedule& sched) {
    if (epoch < 0 || epoch > sched.total_epochs)
        throw ConfigError("cosine_lr: epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(sched.total_epochs) + "]");
    double t = static_cast<double>(epoch) / static_cast<double>(sched.total_epochs);
    return sched.lr_min +
           0.5 * (sched.lr_max - sched.lr_min) * (1.0 + std::cos(3.14159265358979323846 * t));
}

}  // namespace linn
