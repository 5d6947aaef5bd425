#pragma once

#include <span>
#include <string>
#include <vector>

#include "gaeco/types.hpp"

namespace gaeco {

struct AdamOptions {
    Real lr = 0.005;
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real eps = 1e-8;
    /// Global gradient-norm clip; 0 disables clipping.
    Real clip_norm = 0.0;
};

/// Bias-corrected Adam over a fixed list of parameter tensors.
class Adam {
public:
    explicit Adam(AdamOptions options = {}) : options_(options) {}

    /// Updates `params` in place. Shapes must stay fixed across calls;
    /// `names` (optional) label parameters in error messages.
    void step(std::span<Matrix* const> params, std::span<const Matrix> grads,
              std::span<const std::string> names = {});

    long steps() const { return t_; }
    const AdamOptions& options() const { return options_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }

private:
    AdamOptions options_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    long t_ = 0;
};

} // namespace gaeco
