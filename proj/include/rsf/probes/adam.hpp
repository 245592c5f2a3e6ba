#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rsf/nn/matrix.hpp"

namespace rsf::probes {

using nn::Index;
using nn::Matrix;

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/**
 * @brief Adam with bias correction.
 *
 *   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
 *   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
 */
class Adam {
  public:
    Adam() = default;
    explicit Adam(AdamConfig config) : config_(config) {}

    const AdamConfig& config() const { return config_; }
    std::int64_t steps() const { return step_; }

    void step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
        if (params.size() != grads.size()) throw InvalidArgument("Adam::step: parameter/gradient count mismatch");
        if (m_.empty()) {
            for (const Matrix* p : params) {
                m_.push_back(Matrix::Zero(p->rows(), p->cols()));
                v_.push_back(Matrix::Zero(p->rows(), p->cols()));
            }
        }
        if (m_.size() != params.size()) throw InvalidArgument("Adam::step: parameter set changed between steps");
        ++step_;
        const double b1 = config_.beta1;
        const double b2 = config_.beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Matrix& p = *params[i];
            const Matrix& g = grads[i];
            if (g.rows() != p.rows() || g.cols() != p.cols()) throw InvalidArgument("Adam::step: gradient shape mismatch");
            Matrix& m = m_[i];
            Matrix& v = v_[i];
            for (Index k = 0; k < p.size(); ++k) {
                const double gk = g.data()[k];
                double& mk = m.data()[k];
                double& vk = v.data()[k];
                mk = b1 * mk + (1.0 - b1) * gk;
                vk = b2 * vk + (1.0 - b2) * gk * gk;
                p.data()[k] -= config_.learning_rate * (mk / c1) / (std::sqrt(vk / c2) + config_.epsilon);
            }
        }
    }

  private:
    AdamConfig config_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    std::int64_t step_ = 0;
};

}  // namespace rsf::probes
