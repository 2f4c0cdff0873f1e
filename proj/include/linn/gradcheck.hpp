#pragma once

#include <functional>
#include <vector>

#include "linn/tensor.hpp"

namespace linn {

// Central finite-difference verification of hand-derived backward passes.
// Runs in 64-bit mode only.

struct GradCheckOptions {
    double eps = 1e-5;
    int64_t max_probes_per_tensor = 24;  // 0 = probe every element
    uint64_t seed = 1234;
};

struct GradProbe {
    double* slot;      // parameter or input element to perturb
    double analytic;   // hand-derived gradient at that element
};

// Max |analytic - central_difference| over the probes, normalized by the
// largest probed analytic gradient magnitude. loss_fn re-evaluates the
// scalar loss from the current values behind the probe slots.
inline double grad_check_probes(std::vector<GradProbe>& probes,
                                const std::function<double()>& loss_fn,
                                double eps) {
    double amax = 1e-8;
    for (const auto& p : probes) amax = std::max(amax, std::abs(p.analytic));
    double worst = 0.0;
    for (auto& p : probes) {
        double v0 = *p.slot;
        *p.slot = v0 + eps;
        double f_plus = loss_fn();
        *p.slot = v0 - eps;
        double f_minus = loss_fn();
        *p.slot = v0;
        double numeric = (f_plus - f_minus) / (2.0 * eps);
        worst = std::max(worst, std::abs(numeric - p.analytic));
    }
    return worst / amax;
}

// Sample probe indices across a set of parameter tensors whose .grad fields
// hold the analytic gradients.
inline double grad_check_params(std::vector<ParamRef<double>>& params,
                                const std::function<double()>& loss_fn,
                                const GradCheckOptions& opt = {}) {
    Rng rng(opt.seed);
    std::vector<GradProbe> probes;
    for (auto& ref : params) {
        Param<double>& p = *ref.param;
        int64_t n = p.numel();
        if (opt.max_probes_per_tensor <= 0 || n <= opt.max_probes_per_tensor) {
            for (int64_t i = 0; i < n; ++i) probes.push_back({&p.value[i], p.grad[i]});
        } else {
            for (int64_t j = 0; j < opt.max_probes_per_tensor; ++j) {
                int64_t i = rng.below(n);
                probes.push_back({&p.value[i], p.grad[i]});
            }
        }
    }
    return grad_check_probes(probes, loss_fn, opt.eps);
}

// Same idea for a plain value/gradient span (checking dL/dx of a block).
inline double grad_check_span(double* values, const double* analytic, int64_t n,
                              const std::function<double()>& loss_fn,
                              const GradCheckOptions& opt = {}) {
    Rng rng(opt.seed);
    std::vector<GradProbe> probes;
    if (opt.max_probes_per_tensor <= 0 || n <= opt.max_probes_per_tensor) {
        for (int64_t i = 0; i < n; ++i) probes.push_back({values + i, analytic[i]});
    } else {
        for (int64_t j = 0; j < opt.max_probes_per_tensor; ++j) {
            int64_t i = rng.below(n);
            probes.push_back({values + i, analytic[i]});
        }
    }
    return grad_check_probes(probes, loss_fn, opt.eps);
}

}  // namespace linn
