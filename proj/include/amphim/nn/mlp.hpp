#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace amphim::nn {

enum class Activation { identity, tanh, elu };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::elu: return "elu";
  }
  return "?";
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "elu") return Activation::elu;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

// Layer widths include the input and the output width.
struct NetSpec {
  std::vector<int> widths;
  Activation hidden = Activation::elu;
  Activation output = Activation::identity;

  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }

  std::size_t num_params() const {
    std::size_t n = 0;
    for (int l = 0; l < num_layers(); ++l) {
      n += static_cast<std::size_t>(widths[l + 1]) * (widths[l] + 1);
    }
    return n;
  }

  void validate() const {
    if (widths.size() < 2) throw std::invalid_argument("NetSpec: need at least one layer");
    for (int w : widths) {
      if (w <= 0) throw std::invalid_argument("NetSpec: layer widths must be positive");
    }
  }

  bool operator==(const NetSpec&) const = default;
};

// Builds input -> hidden... -> output.
inline NetSpec make_spec(int input, const std::vector<int>& hidden, int output,
                         Activation act = Activation::elu,
                         Activation out_act = Activation::identity) {
  NetSpec s;
  s.widths.push_back(input);
  s.widths.insert(s.widths.end(), hidden.begin(), hidden.end());
  s.widths.push_back(output);
  s.hidden = act;
  s.output = out_act;
  s.validate();
  return s;
}

namespace detail {

template <typename M>
auto activate(Activation a, const M& x) {
  using Scalar = typename M::Scalar;
  using Plain = typename M::PlainObject;
  switch (a) {
    case Activation::tanh: return Plain(x.array().tanh().matrix());
    case Activation::elu:
      return Plain(x.unaryExpr([](Scalar v) { return v > Scalar(0) ? v : std::expm1(v); }));
    case Activation::identity: break;
  }
  return Plain(x);
}

// First derivative, expressed through the pre-activation.
template <typename M>
auto activate_d1(Activation a, const M& pre) {
  using Scalar = typename M::Scalar;
  using Plain = typename M::PlainObject;
  switch (a) {
    case Activation::tanh:
      return Plain(pre.unaryExpr([](Scalar v) {
        Scalar t = std::tanh(v);
        return Scalar(1) - t * t;
      }));
    case Activation::elu:
      return Plain(pre.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : std::exp(v); }));
    case Activation::identity: break;
  }
  return Plain(Plain::Ones(pre.rows(), pre.cols()));
}

template <typename M>
auto activate_d2(Activation a, const M& pre) {
  using Scalar = typename M::Scalar;
  using Plain = typename M::PlainObject;
  switch (a) {
    case Activation::tanh:
      return Plain(pre.unaryExpr([](Scalar v) {
        Scalar t = std::tanh(v);
        return Scalar(-2) * t * (Scalar(1) - t * t);
      }));
    case Activation::elu:
      return Plain(pre.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(0) : std::exp(v); }));
    case Activation::identity: break;
  }
  return Plain(Plain::Zero(pre.rows(), pre.cols()));
}

}  // namespace detail

/// Parameter gradients (flat, same layout as the network) plus the gradient
/// with respect to the input batch.
template <typename Scalar>
struct BasicGradTape {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> params;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> input;

  void zero() {
    params.setZero();
    input.setZero();
  }
};

/// Fully connected network. Batches are column-major: one sample per column.
/// Parameters live in one flat vector laid out as W_1, b_1, W_2, b_2, ...
template <typename Scalar>
class BasicMlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using GradTape = BasicGradTape<Scalar>;

  struct Cache {
    std::vector<Matrix> pre;   // pre[l] = W_l h_{l-1} + b_l, l = 1..L (index 0 unused)
    std::vector<Matrix> post;  // post[0] = input
  };

  BasicMlp() = default;

  explicit BasicMlp(NetSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    params_ = Vector::Zero(static_cast<Eigen::Index>(spec_.num_params()));
    offsets_.clear();
    std::size_t off = 0;
    for (int l = 0; l < spec_.num_layers(); ++l) {
      offsets_.push_back(off);
      off += static_cast<std::size_t>(spec_.widths[l + 1]) * (spec_.widths[l] + 1);
    }
  }

  const NetSpec& spec() const { return spec_; }
  int input_dim() const { return spec_.input_dim(); }
  int output_dim() const { return spec_.output_dim(); }
  int num_layers() const { return spec_.num_layers(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  Eigen::Map<const Matrix> weight(int l) const {
    return {params_.data() + offsets_[l], spec_.widths[l + 1], spec_.widths[l]};
  }
  Eigen::Map<Matrix> weight(int l) {
    return {params_.data() + offsets_[l], spec_.widths[l + 1], spec_.widths[l]};
  }
  Eigen::Map<const Vector> bias(int l) const {
    return {params_.data() + offsets_[l] + weight_size(l), spec_.widths[l + 1]};
  }
  Eigen::Map<Vector> bias(int l) {
    return {params_.data() + offsets_[l] + weight_size(l), spec_.widths[l + 1]};
  }

  /// Uniform fan-averaged init; the last layer is scaled by `output_gain`.
  template <typename Rng>
  void init(Rng& rng, Scalar output_gain = Scalar(1)) {
    for (int l = 0; l < num_layers(); ++l) {
      const double fan = spec_.widths[l] + spec_.widths[l + 1];
      double limit = std::sqrt(6.0 / fan);
      if (l + 1 == num_layers()) limit *= static_cast<double>(output_gain);
      std::uniform_real_distribution<double> dist(-limit, limit);
      auto w = weight(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(dist(rng));
      }
      bias(l).setZero();
    }
  }

  Matrix forward(const Matrix& x, Cache* cache = nullptr) const {
    if (x.rows() != input_dim()) {
      throw std::invalid_argument("forward: input width " + std::to_string(x.rows()) +
                                  " != " + std::to_string(input_dim()));
    }
    if (!x.allFinite()) throw std::invalid_argument("forward: non-finite input");
    if (cache) {
      cache->pre.assign(num_layers() + 1, Matrix());
      cache->post.assign(num_layers() + 1, Matrix());
      cache->post[0] = x;
    }
    Matrix h = x;
    for (int l = 0; l < num_layers(); ++l) {
      Matrix a = weight(l) * h;
      a.colwise() += bias(l);
      h = detail::activate(layer_activation(l), a);
      if (cache) {
        cache->pre[l + 1] = std::move(a);
        cache->post[l + 1] = h;
      }
    }
    return h;
  }

  /// Reverse pass. Adds parameter gradients into `param_grad` and returns the
  /// input gradient.
  Matrix backward_accumulate(const Cache& cache, const Matrix& out_grad, Vector& param_grad) const {
    check_cache(cache, out_grad);
    if (param_grad.size() != params_.size()) {
      throw std::invalid_argument("backward: gradient buffer size mismatch");
    }
    Matrix delta = out_grad.cwiseProduct(detail::activate_d1(layer_activation(num_layers() - 1),
                                                             cache.pre[num_layers()]));
    Matrix in_grad;
    for (int l = num_layers() - 1; l >= 0; --l) {
      Eigen::Map<Matrix> gw(param_grad.data() + offsets_[l], spec_.widths[l + 1], spec_.widths[l]);
      Eigen::Map<Vector> gb(param_grad.data() + offsets_[l] + weight_size(l), spec_.widths[l + 1]);
      gw.noalias() += delta * cache.post[l].transpose();
      gb += delta.rowwise().sum();
      Matrix up = weight(l).transpose() * delta;
      if (l == 0) {
        in_grad = std::move(up);
      } else {
        delta = up.cwiseProduct(detail::activate_d1(layer_activation(l - 1), cache.pre[l]));
      }
    }
    return in_grad;
  }

  GradTape backward(const Cache& cache, const Matrix& out_grad) const {
    GradTape tape;
    tape.params = Vector::Zero(params_.size());
    tape.input = backward_accumulate(cache, out_grad, tape.params);
    return tape;
  }

  /// d(output)/d(input) for a scalar-output network, one column per sample.
  Matrix input_gradient(const Matrix& x) const {
    require_scalar_output("input_gradient");
    Cache cache;
    forward(x, &cache);
    Vector scratch = Vector::Zero(params_.size());
    return backward_accumulate(cache, Matrix::Ones(1, x.cols()), scratch);
  }

  /// Computes weight * sum_b ||grad_x D(x_b)||^p and adds its gradient with
  /// respect to the parameters into `param_grad` (second-order reverse pass).
  Scalar gradient_norm_penalty(const Matrix& x, Scalar p, Scalar penalty_weight, Vector& param_grad,
                               Matrix* input_grads = nullptr) const {
    require_scalar_output("gradient_norm_penalty");
    if (param_grad.size() != params_.size()) {
      throw std::invalid_argument("gradient_norm_penalty: gradient buffer size mismatch");
    }
    const int L = num_layers();
    Cache cache;
    forward(x, &cache);

    // delta[l] = dD/da_l, u[l] = dD/dh_l (u[0] is the input gradient).
    std::vector<Matrix> delta(L + 1), u(L + 1), d1(L + 1);
    for (int l = 1; l <= L; ++l) d1[l] = detail::activate_d1(layer_activation(l - 1), cache.pre[l]);
    delta[L] = d1[L];
    for (int l = L; l >= 1; --l) {
      u[l - 1] = weight(l - 1).transpose() * delta[l];
      if (l > 1) delta[l - 1] = d1[l - 1].cwiseProduct(u[l - 1]);
    }
    const Matrix& g = u[0];
    if (input_grads) *input_grads = g;

    Scalar total = 0;
    Matrix g_bar(g.rows(), g.cols());
    for (Eigen::Index b = 0; b < g.cols(); ++b) {
      const Scalar n = g.col(b).norm();
      total += std::pow(n, p);
      if (n > Scalar(0)) {
        g_bar.col(b) = penalty_weight * p * std::pow(n, p - Scalar(2)) * g.col(b);
      } else {
        g_bar.col(b).setZero();
      }
    }

    auto gw = [&](int l) {
      return Eigen::Map<Matrix>(param_grad.data() + offsets_[l], spec_.widths[l + 1], spec_.widths[l]);
    };
    auto gb = [&](int l) {
      return Eigen::Map<Vector>(param_grad.data() + offsets_[l] + weight_size(l), spec_.widths[l + 1]);
    };

    // Adjoint of the input-gradient computation.
    std::vector<Matrix> a_bar(L + 1);
    Matrix u_bar = g_bar;           // adjoint of u[l-1]
    Matrix delta_bar;               // adjoint of delta[l]
    for (int l = 1; l <= L; ++l) {
      gw(l - 1).noalias() += delta[l] * u_bar.transpose();
      delta_bar = weight(l - 1) * u_bar;
      const Matrix d2 = detail::activate_d2(layer_activation(l - 1), cache.pre[l]);
      if (l < L) {
        a_bar[l] = d2.cwiseProduct(u[l]).cwiseProduct(delta_bar);
        u_bar = d1[l].cwiseProduct(delta_bar);
      } else {
        a_bar[l] = d2.cwiseProduct(delta_bar);
      }
    }

    // Push the pre-activation adjoints back through the forward pass.
    Matrix acc = a_bar[L];
    for (int l = L; l >= 1; --l) {
      gw(l - 1).noalias() += acc * cache.post[l - 1].transpose();
      gb(l - 1) += acc.rowwise().sum();
      if (l > 1) {
        acc = d1[l - 1].cwiseProduct(weight(l - 1).transpose() * acc) + a_bar[l - 1];
      }
    }
    return penalty_weight * total;
  }

  template <typename Other>
  BasicMlp<Other> cast() const {
    BasicMlp<Other> out(spec_);
    out.params() = params_.template cast<Other>();
    return out;
  }

 private:
  std::size_t weight_size(int l) const {
    return static_cast<std::size_t>(spec_.widths[l + 1]) * spec_.widths[l];
  }
  Activation layer_activation(int l) const {
    return l + 1 == num_layers() ? spec_.output : spec_.hidden;
  }
  void require_scalar_output(const char* what) const {
    if (output_dim() != 1) throw std::invalid_argument(std::string(what) + ": network output is not scalar");
  }
  void check_cache(const Cache& cache, const Matrix& out_grad) const {
    if (static_cast<int>(cache.post.size()) != num_layers() + 1 ||
        cache.post[0].rows() != input_dim() || cache.post.back().rows() != out_grad.rows() ||
        cache.post.back().cols() != out_grad.cols()) {
      throw std::invalid_argument("backward: stale cache (shape mismatch)");
    }
  }

  NetSpec spec_;
  Vector params_;
  std::vector<std::size_t> offsets_;
};

using Mlp = BasicMlp<double>;
using MlpF = BasicMlp<float>;
using GradTape = BasicGradTape<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace amphim::nn
