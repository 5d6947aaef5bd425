#include "gaeco/adam.hpp"

#include <cmath>

namespace gaeco {

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix> grads, std::span<const std::string> names) {
    require(params.size() == grads.size(), "adam_step: parameter and gradient counts differ");
    const auto label = [&](std::size_t i) {
        return i < names.size() ? names[i] : "parameter " + std::to_string(i);
    };
    if (m_.empty()) {
        for (Matrix* p : params) {
            m_.push_back(Matrix::Zero(p->rows(), p->cols()));
            v_.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    require(m_.size() == params.size(), "adam_step: parameter count changed between steps");

    Real norm_sq = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix& g = grads[i];
        if (g.rows() != params[i]->rows() || g.cols() != params[i]->cols() || g.rows() != m_[i].rows() ||
            g.cols() != m_[i].cols()) {
            throw InvalidArgument("adam_step: shape mismatch for " + label(i));
        }
        if (!g.allFinite()) throw NumericError("adam_step: non-finite gradient for " + label(i));
        norm_sq += g.squaredNorm();
    }
    Real clip_scale = 1.0;
    if (options_.clip_norm > 0) {
        const Real norm = std::sqrt(norm_sq);
        if (norm > options_.clip_norm) clip_scale = options_.clip_norm / norm;
    }

    ++t_;
    const Real bc1 = 1.0 - std::pow(options_.beta1, static_cast<Real>(t_));
    const Real bc2 = 1.0 - std::pow(options_.beta2, static_cast<Real>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix g = grads[i] * clip_scale;
        m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
        v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseAbs2();
        const auto m_hat = m_[i].array() / bc1;
        const auto v_hat = v_[i].array() / bc2;
        params[i]->array() -= options_.lr * m_hat / (v_hat.sqrt() + options_.eps);
    }
}

} // namespace gaeco
