#pragma once

#include <vector>

#include "mvm/net/unet.hpp"

namespace mvm::net {

/// Adaptive-moment optimizer with bias correction (beta1=0.9, beta2=0.999).
template <typename S>
class Adam {
public:
    explicit Adam(MTAttentionUNet<S>& model, double lr = 0.001, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : model_(model), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        model_.visit_params([this](const std::string&, Mat& w, Mat&) {
            m_.push_back(Mat::Zero(w.rows(), w.cols()));
            v_.push_back(Mat::Zero(w.rows(), w.cols()));
        });
    }

    void step() {
        ++t_;
        const S bc1 = static_cast<S>(1.0 - std::pow(beta1_, t_));
        const S bc2 = static_cast<S>(1.0 - std::pow(beta2_, t_));
        const S lr = static_cast<S>(lr_), b1 = static_cast<S>(beta1_), b2 = static_cast<S>(beta2_);
        const S eps = static_cast<S>(eps_);
        size_t i = 0;
        model_.visit_params([&, this](const std::string&, Mat& w, Mat& g) {
            Mat& m = m_[i];
            Mat& v = v_[i];
            m = b1 * m + (S(1) - b1) * g;
            v.array() = b2 * v.array() + (S(1) - b2) * g.array().square();
            w.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
            ++i;
        });
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    using Mat = typename Tensor<S>::Mat;
    MTAttentionUNet<S>& model_;
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Mat> m_, v_;
};

}  // namespace mvm::net
