#include "amphim/him/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace amphim::him {
namespace {

constexpr double kMinNorm = 1e-12;

}  // namespace

void HimConfig::validate() const {
  if (history < 1 || obs_dim < 1 || latent_dim < 2) throw std::invalid_argument("him: invalid dimensions");
  if (!(temperature > 0.0)) throw std::invalid_argument("him: temperature must be positive");
  if (hidden.empty()) throw std::invalid_argument("him: need at least one hidden layer");
  if (!(lr > 0.0)) throw std::invalid_argument("him: lr must be positive");
}

Matrix normalize_columns(const Matrix& raw, Vector* norms) {
  Matrix z(raw.rows(), raw.cols());
  if (norms) norms->resize(raw.cols());
  for (Eigen::Index b = 0; b < raw.cols(); ++b) {
    const double n = raw.col(b).norm();
    if (norms) (*norms)[b] = n;
    if (n < kMinNorm) {
      z.col(b).setZero();
      z(0, b) = 1.0;
    } else {
      z.col(b) = raw.col(b) / n;
    }
  }
  return z;
}

Matrix normalize_columns_backward(const Matrix& z, const Vector& norms, const Matrix& grad_z) {
  Matrix g(z.rows(), z.cols());
  for (Eigen::Index b = 0; b < z.cols(); ++b) {
    if (norms[b] < kMinNorm) {
      g.col(b).setZero();
    } else {
      g.col(b) = (grad_z.col(b) - z.col(b) * z.col(b).dot(grad_z.col(b))) / norms[b];
    }
  }
  return g;
}

double velocity_loss(const Matrix& v_hat, const Matrix& v_true, Matrix* grad) {
  if (v_hat.rows() != v_true.rows() || v_hat.cols() != v_true.cols()) {
    throw std::invalid_argument("velocity_loss: dimension mismatch");
  }
  const double n = static_cast<double>(v_hat.size());
  if (n == 0) return 0.0;
  const Matrix diff = v_hat - v_true;
  if (grad) *grad = (2.0 / n) * diff;
  return diff.squaredNorm() / n;
}

double contrastive_loss(const Matrix& z, const Matrix& targets, double temperature, Matrix* grad_z) {
  if (z.cols() < 2) throw std::invalid_argument("contrastive_loss: batch must contain at least 2 rows");
  if (z.rows() != targets.rows() || z.cols() != targets.cols()) {
    throw std::invalid_argument("contrastive_loss: dimension mismatch");
  }
  const Eigen::Index B = z.cols();
  const Matrix logits = (z.transpose() * targets) / temperature;  // B x B, row i = anchor i
  Matrix probs(B, B);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    const double s = e.sum();
    loss += m + std::log(s) - logits(i, i);
    probs.row(i) = e / s;
  }
  loss /= static_cast<double>(B);
  if (grad_z) {
    Matrix dlogits = probs;
    dlogits.diagonal().array() -= 1.0;
    dlogits /= static_cast<double>(B);
    *grad_z = targets * dlogits.transpose() / temperature;  // d/dz_i = sum_j dlogits_ij t_j / tau
  }
  return loss;
}

HimEstimator::HimEstimator(HimConfig cfg, std::mt19937_64& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::vector<int> inner(cfg_.hidden.begin(), cfg_.hidden.end() - 1);
  trunk_ = Mlp(nn::make_spec(cfg_.input_dim(), inner, cfg_.hidden.back(), nn::Activation::elu, nn::Activation::elu));
  head_ = Mlp(nn::make_spec(cfg_.hidden.back(), {}, 3 + cfg_.latent_dim));
  proj_ = Mlp(nn::make_spec(cfg_.hidden.back(), {}, cfg_.latent_dim));
  trunk_.init(rng);
  head_.init(rng);
  proj_.init(rng);
  opt_ = nn::Adam(trunk_.params().size() + head_.params().size(), {cfg_.lr});
}

void HimEstimator::check_input(const Matrix& x, const char* what) const {
  if (x.rows() != cfg_.input_dim()) {
    throw std::invalid_argument(std::string(what) + ": history length mismatch (expected " +
                                std::to_string(cfg_.history) + " frames of " + std::to_string(cfg_.obs_dim) + ")");
  }
}

HimBatch HimEstimator::encode_batch(const Matrix& histories) const {
  check_input(histories, "encode");
  const Matrix out = head_.forward(trunk_.forward(histories));
  return {out.topRows(3), normalize_columns(out.bottomRows(cfg_.latent_dim))};
}

HimOutput HimEstimator::encode(const Vector& flat_history) const {
  const HimBatch b = encode_batch(flat_history);
  return {b.v_hat.col(0), b.z.col(0)};
}

HimOutput HimEstimator::encode(const sim::ObservationHistory& history) const {
  if (history.length() != cfg_.history || !history.full()) {
    throw std::invalid_argument("encode: history must hold exactly " + std::to_string(cfg_.history) + " frames");
  }
  return encode(history.flatten());
}

Matrix HimEstimator::targets(const Matrix& next_histories) const {
  check_input(next_histories, "targets");
  return normalize_columns(proj_.forward(trunk_.forward(next_histories)));
}

HimStats HimEstimator::loss(const Matrix& histories, const Matrix& next_histories, const Matrix& v_true,
                            Vector* grad) const {
  check_input(histories, "him loss");
  if (v_true.rows() != 3 || v_true.cols() != histories.cols()) {
    throw std::invalid_argument("him loss: v_true must be 3 x batch");
  }
  HimStats s;
  const Matrix tgt = targets(next_histories);
  Mlp::Cache tc, hc;
  const Matrix feat = trunk_.forward(histories, &tc);
  const Matrix out = head_.forward(feat, &hc);
  Vector norms;
  const Matrix z = normalize_columns(out.bottomRows(cfg_.latent_dim), &norms);

  Matrix gv, gz;
  s.velocity_loss = velocity_loss(out.topRows(3), v_true, &gv);
  s.contrastive_loss = contrastive_loss(z, tgt, cfg_.temperature, &gz);
  s.velocity_mae = (out.topRows(3) - v_true).cwiseAbs().mean();
  if (grad) {
    const Eigen::Index nt = trunk_.params().size(), nh = head_.params().size();
    if (grad->size() != nt + nh) throw std::invalid_argument("him loss: gradient buffer size mismatch");
    Matrix gout(out.rows(), out.cols());
    gout.topRows(3) = cfg_.velocity_weight * gv;
    gout.bottomRows(cfg_.latent_dim) = cfg_.contrastive_weight * normalize_columns_backward(z, norms, gz);
    Vector gh = grad->segment(nt, nh);
    const Matrix gfeat = head_.backward_accumulate(hc, gout, gh);
    grad->segment(nt, nh) = gh;
    Vector gt = grad->head(nt);
    trunk_.backward_accumulate(tc, gfeat, gt);
    grad->head(nt) = gt;
  }
  return s;
}

HimStats HimEstimator::update(const Matrix& histories, const Matrix& next_histories, const Matrix& v_true) {
  Vector grad = Vector::Zero(trunk_.params().size() + head_.params().size());
  const HimStats s = loss(histories, next_histories, v_true, &grad);
  nn::clip_grad_norm(grad, cfg_.grad_clip);
  Vector p = trainable();
  if (opt_.step(p, grad)) set_trainable(p);
  return s;
}

Vector HimEstimator::trainable() const {
  Vector p(trunk_.params().size() + head_.params().size());
  p << trunk_.params(), head_.params();
  return p;
}

void HimEstimator::set_trainable(const Vector& p) {
  const Eigen::Index nt = trunk_.params().size();
  if (p.size() != nt + head_.params().size()) throw std::invalid_argument("set_trainable: size mismatch");
  trunk_.params() = p.head(nt);
  head_.params() = p.tail(head_.params().size());
}

}  // namespace amphim::him
