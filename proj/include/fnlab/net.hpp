#ifndef FNLAB_NET_HPP
#define FNLAB_NET_HPP

#include <cmath>
#include <random>
#include <string>

#include "fnlab/datagen.hpp"
#include "fnlab/types.hpp"

namespace fnlab {

/// Weights of the two-layer ReLU CNN. Row k*m + r of `weights` is neuron
/// w_{k,r}; the second layer is fixed to the uniform 1/m average.
template <typename Scalar>
struct ModelParams {
  int num_classes = 0;
  int width = 0;
  int dim = 0;
  Scalar init_sigma = 0;
  Matrix<Scalar> weights;

  auto neuron(int k, int r) { return weights.row(k * width + r); }
  auto neuron(int k, int r) const { return weights.row(k * width + r); }
  auto block(int k) { return weights.middleRows(k * width, width); }
  auto block(int k) const { return weights.middleRows(k * width, width); }

  bool all_finite() const { return weights.allFinite(); }
};

template <typename Scalar>
ModelParams<Scalar> init_params(int num_classes, int width, int dim, Scalar init_sigma, Rng& rng) {
  if (num_classes < 1 || width < 1 || dim < 1) throw ConfigError("K, m, d must be >= 1");
  if (!(init_sigma >= 0)) throw ConfigError("sigma0 must be >= 0");
  ModelParams<Scalar> p{num_classes, width, dim, init_sigma,
                        Matrix<Scalar>(num_classes * width, dim)};
  std::normal_distribution<double> normal(0.0, static_cast<double>(init_sigma));
  // Row-major draw order so neuron (k, r) is drawn as one contiguous block.
  for (Eigen::Index row = 0; row < p.weights.rows(); ++row)
    for (Eigen::Index c = 0; c < p.weights.cols(); ++c)
      p.weights(row, c) = init_sigma == 0 ? Scalar(0) : static_cast<Scalar>(normal(rng));
  return p;
}

template <typename Scalar>
struct ForwardOut {
  Vector<Scalar> scores;  // F_k
  Vector<Scalar> logits;  // softmax(F)
  Matrix<Scalar> preacts; // (K*m) x 2, <w_{k,r}, x^{(j)}>
};

template <typename Scalar>
Scalar log_sum_exp(const Vector<Scalar>& f) {
  const Scalar top = f.maxCoeff();
  return top + std::log((f.array() - top).exp().sum());
}

// F_k = (1/m) * sum over neurons of relu(<w, x1>) + relu(<w, x2>), per class
// and per column of `pre1`/`pre2`.
template <typename Scalar>
Matrix<Scalar> class_scores(const Matrix<Scalar>& pre1, const Matrix<Scalar>& pre2, int num_classes,
                            int width) {
  Matrix<Scalar> scores(num_classes, pre1.cols());
  for (Eigen::Index i = 0; i < pre1.cols(); ++i)
    for (int k = 0; k < num_classes; ++k) {
      const Scalar a = pre1.col(i).segment(k * width, width).cwiseMax(Scalar(0)).sum();
      const Scalar b = pre2.col(i).segment(k * width, width).cwiseMax(Scalar(0)).sum();
      scores(k, i) = (a + b) / static_cast<Scalar>(width);
    }
  return scores;
}

template <typename Scalar>
Vector<Scalar> softmax(const Vector<Scalar>& f) {
  const Scalar top = f.maxCoeff();
  Vector<Scalar> e = (f.array() - top).exp().matrix();
  return e / e.sum();
}

template <typename Scalar>
ForwardOut<Scalar> forward(const ModelParams<Scalar>& w, const Sample<Scalar>& x) {
  if (x.patch1.size() != w.dim || x.patch2.size() != w.dim)
    throw ShapeError("sample dimension " + std::to_string(x.patch1.size()) +
                     " does not match model dimension " + std::to_string(w.dim));
  ForwardOut<Scalar> out;
  out.preacts.resize(w.weights.rows(), 2);
  out.preacts.col(0).noalias() = w.weights * x.patch1;
  out.preacts.col(1).noalias() = w.weights * x.patch2;
  const Matrix<Scalar> f = class_scores<Scalar>(out.preacts.col(0), out.preacts.col(1),
                                                w.num_classes, w.width);
  out.scores = f.col(0);
  out.logits = softmax<Scalar>(out.scores);
  return out;
}

/// -log softmax(F)_y in log-sum-exp form.
template <typename Scalar>
Scalar ce_loss(const ForwardOut<Scalar>& out, int y) {
  return log_sum_exp<Scalar>(out.scores) - out.scores(y);
}

template <typename Scalar>
struct BatchForward {
  Matrix<Scalar> pre1;    // (K*m) x n
  Matrix<Scalar> pre2;    // (K*m) x n
  Matrix<Scalar> scores;  // K x n
  Matrix<Scalar> logits;  // K x n
  Vector<Scalar> losses;  // n

  Scalar mean_loss() const { return losses.mean(); }
};

template <typename Scalar>
BatchForward<Scalar> forward_batch(const ModelParams<Scalar>& w, const Dataset<Scalar>& ds) {
  if (ds.dim() != w.dim) throw ShapeError("dataset dimension does not match model dimension");
  BatchForward<Scalar> out;
  out.pre1.noalias() = w.weights * ds.patch1;
  out.pre2.noalias() = w.weights * ds.patch2;
  out.scores = class_scores<Scalar>(out.pre1, out.pre2, w.num_classes, w.width);
  const auto n = ds.patch1.cols();
  out.logits.resize(w.num_classes, n);
  out.losses.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector<Scalar> f = out.scores.col(i);
    const Scalar lse = log_sum_exp<Scalar>(f);
    out.logits.col(i) = (f.array() - lse).exp().matrix();
    out.losses(i) = lse - f(ds.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Full-batch gradient of the mean cross-entropy; relu'(0) is taken as 0.
template <typename Scalar>
Matrix<Scalar> batch_gradient(const ModelParams<Scalar>& w, const Dataset<Scalar>& ds,
                              const BatchForward<Scalar>& fwd) {
  const auto n = ds.patch1.cols();
  if (n == 0) throw ConfigError("gradient needs a non-empty dataset");
  const int m = w.width;
  // coef(k, i) = logit_k - 1{y_i = k}
  Matrix<Scalar> coef = fwd.logits;
  for (Eigen::Index i = 0; i < n; ++i) coef(ds.labels[static_cast<std::size_t>(i)], i) -= Scalar(1);

  Matrix<Scalar> a1(w.weights.rows(), n), a2(w.weights.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < w.num_classes; ++k) {
      const Scalar c = coef(k, i);
      for (int r = 0; r < m; ++r) {
        const Eigen::Index row = k * m + r;
        a1(row, i) = fwd.pre1(row, i) > Scalar(0) ? c : Scalar(0);
        a2(row, i) = fwd.pre2(row, i) > Scalar(0) ? c : Scalar(0);
      }
    }
  Matrix<Scalar> grad(w.weights.rows(), w.dim);
  grad.noalias() = a1 * ds.patch1.transpose();
  grad.noalias() += a2 * ds.patch2.transpose();
  grad /= static_cast<Scalar>(m) * static_cast<Scalar>(n);
  return grad;
}

template <typename Scalar>
Matrix<Scalar> batch_gradient(const ModelParams<Scalar>& w, const Dataset<Scalar>& ds) {
  return batch_gradient(w, ds, forward_batch(w, ds));
}

template <typename Scalar>
ModelParams<Scalar> gd_step(const ModelParams<Scalar>& w, const Matrix<Scalar>& grad, Scalar eta) {
  if (!(eta > 0)) throw ConfigError("learning rate must be > 0");
  if (grad.rows() != w.weights.rows() || grad.cols() != w.weights.cols())
    throw ShapeError("gradient shape does not match weights");
  ModelParams<Scalar> next = w;
  next.weights -= eta * grad;
  return next;
}

void write_model(const ModelParams<double>& w, const std::string& path,
                 const std::vector<std::string>& header_comments = {});
ModelParams<double> read_model(const std::string& path);

}  // namespace fnlab

#endif  // FNLAB_NET_HPP
