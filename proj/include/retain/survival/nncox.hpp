#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "retain/random.hpp"
#include "retain/survival/cox.hpp"

namespace retain {

// Single-hidden-layer risk network: eta(x) = sum_k v_k tanh(w_k . z + b_k),
// where z is x standardized with the training means and scales. No output
// bias, since the partial likelihood is invariant to it.
struct NnCoxNetwork {
  Eigen::MatrixXd hidden_weights;  // hidden x features
  Eigen::VectorXd hidden_bias;     // hidden
  Eigen::VectorXd output_weights;  // hidden
  Eigen::VectorXd input_mean;      // features
  Eigen::VectorXd input_scale;     // features

  Eigen::Index hidden() const { return hidden_weights.rows(); }
  Eigen::Index inputs() const { return hidden_weights.cols(); }
  Eigen::Index parameter_count() const { return hidden() * inputs() + 2 * hidden(); }

  Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - input_mean.transpose()).array().rowwise() / input_scale.transpose().array();
  }

  // Flattened trainable parameters: W (row-major), b, v.
  Eigen::VectorXd parameters() const {
    Eigen::VectorXd theta(parameter_count());
    Eigen::Index k = 0;
    for (Eigen::Index h = 0; h < hidden(); ++h)
      for (Eigen::Index j = 0; j < inputs(); ++j) theta[k++] = hidden_weights(h, j);
    for (Eigen::Index h = 0; h < hidden(); ++h) theta[k++] = hidden_bias[h];
    for (Eigen::Index h = 0; h < hidden(); ++h) theta[k++] = output_weights[h];
    return theta;
  }

  void set_parameters(const Eigen::VectorXd& theta) {
    Eigen::Index k = 0;
    for (Eigen::Index h = 0; h < hidden(); ++h)
      for (Eigen::Index j = 0; j < inputs(); ++j) hidden_weights(h, j) = theta[k++];
    for (Eigen::Index h = 0; h < hidden(); ++h) hidden_bias[h] = theta[k++];
    for (Eigen::Index h = 0; h < hidden(); ++h) output_weights[h] = theta[k++];
  }

  // Predictor on already-standardized inputs.
  Eigen::VectorXd eta_standardized(const Eigen::MatrixXd& z) const {
    const Eigen::MatrixXd act = ((z * hidden_weights.transpose()).rowwise() + hidden_bias.transpose()).array().tanh();
    return act * output_weights;
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const { return eta_standardized(standardize(x)); }
};

struct NnCoxOptions {
  int hidden_units = 8;
  double learning_rate = 0.01;
  int epochs = 500;
  double init_range = 0.1;
};

inline NnCoxNetwork init_nncox(const Eigen::MatrixXd& x, const NnCoxOptions& options, std::uint64_t seed) {
  NnCoxNetwork net;
  const Eigen::Index p = x.cols();
  const Eigen::Index h = options.hidden_units;
  net.input_mean = x.colwise().mean().transpose();
  net.input_scale = Eigen::VectorXd::Ones(p);
  if (x.rows() > 1) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double sd = std::sqrt((x.col(j).array() - net.input_mean[j]).square().sum() / static_cast<double>(x.rows() - 1));
      if (sd > 0.0) net.input_scale[j] = sd;
    }
  }
  net.hidden_weights.resize(h, p);
  net.hidden_bias.resize(h);
  net.output_weights.resize(h);
  Rng rng(seed);
  Eigen::VectorXd theta(net.parameter_count());
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] = rng.uniform(-options.init_range, options.init_range);
  net.set_parameters(theta);
  return net;
}

// Partial log-likelihood of the network on standardized inputs `z`.
inline double nncox_loglik(const NnCoxNetwork& net, const Eigen::MatrixXd& z, const Eigen::VectorXd& time,
                           std::span<const int> event) {
  return breslow_loglik(net.eta_standardized(z), time, event);
}

// Backpropagated gradient with respect to the flattened parameters.
inline Eigen::VectorXd nncox_gradient(const NnCoxNetwork& net, const Eigen::MatrixXd& z, const Eigen::VectorXd& time,
                                      std::span<const int> event) {
  const Eigen::MatrixXd pre = (z * net.hidden_weights.transpose()).rowwise() + net.hidden_bias.transpose();
  const Eigen::MatrixXd act = pre.array().tanh();
  const Eigen::VectorXd eta = act * net.output_weights;
  const Eigen::VectorXd d_eta = breslow_loglik_eta_gradient(eta, time, event);

  const Eigen::VectorXd d_v = act.transpose() * d_eta;
  // d eta_i / d pre_ik = v_k (1 - tanh^2)
  const Eigen::MatrixXd d_pre =
      (1.0 - act.array().square()).matrix().array().rowwise() * net.output_weights.transpose().array();
  const Eigen::MatrixXd weighted = d_pre.array().colwise() * d_eta.array();
  const Eigen::MatrixXd d_w = weighted.transpose() * z;  // hidden x features
  const Eigen::VectorXd d_b = weighted.colwise().sum().transpose();

  Eigen::VectorXd grad(net.parameter_count());
  Eigen::Index k = 0;
  for (Eigen::Index h = 0; h < net.hidden(); ++h)
    for (Eigen::Index j = 0; j < net.inputs(); ++j) grad[k++] = d_w(h, j);
  for (Eigen::Index h = 0; h < net.hidden(); ++h) grad[k++] = d_b[h];
  for (Eigen::Index h = 0; h < net.hidden(); ++h) grad[k++] = d_v[h];
  return grad;
}

struct NnCoxFit {
  NnCoxNetwork network;
  double loglik = 0.0;
  int epochs = 0;
};

// Full-batch gradient ascent on the partial log-likelihood.
inline NnCoxFit fit_nncox(const CoxData& data, const NnCoxOptions& options, std::uint64_t seed) {
  NnCoxFit fit;
  fit.network = init_nncox(data.x, options, seed);
  const Eigen::MatrixXd z = fit.network.standardize(data.x);
  Eigen::VectorXd theta = fit.network.parameters();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const Eigen::VectorXd grad = nncox_gradient(fit.network, z, data.time, data.event);
    if (!grad.allFinite()) break;
    theta += options.learning_rate * grad;
    fit.network.set_parameters(theta);
    fit.epochs = epoch + 1;
  }
  fit.loglik = nncox_loglik(fit.network, z, data.time, data.event);
  return fit;
}

}  // namespace retain
