#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "retain/error.hpp"
#include "retain/survival/step_function.hpp"

namespace retain {

// Right-censored observations with a dense covariate matrix (rows = subjects).
struct CoxData {
  Eigen::MatrixXd x;
  Eigen::VectorXd time;
  std::vector<int> event;

  Eigen::Index size() const { return x.rows(); }
};

namespace detail {

// Subjects grouped by tied time, latest first; each block is [begin, end).
struct TimeBlocks {
  std::vector<Eigen::Index> order;
  std::vector<std::pair<std::size_t, std::size_t>> blocks;
};

inline TimeBlocks descending_time_blocks(const Eigen::VectorXd& time) {
  TimeBlocks tb;
  tb.order.resize(static_cast<std::size_t>(time.size()));
  std::iota(tb.order.begin(), tb.order.end(), Eigen::Index{0});
  std::stable_sort(tb.order.begin(), tb.order.end(), [&](auto a, auto b) { return time[a] > time[b]; });
  for (std::size_t k = 0; k < tb.order.size();) {
    std::size_t end = k;
    while (end < tb.order.size() && time[tb.order[end]] == time[tb.order[k]]) ++end;
    tb.blocks.emplace_back(k, end);
    k = end;
  }
  return tb;
}

}  // namespace detail

// Breslow partial log-likelihood as a function of the per-subject linear
// predictor eta:  sum_i delta_i eta_i - sum_t d_t log sum_{j in R(t)} e^{eta_j}.
inline double breslow_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& time, std::span<const int> event) {
  const auto tb = detail::descending_time_blocks(time);
  const double shift = eta.size() ? eta.maxCoeff() : 0.0;
  double risk_sum = 0.0, ll = 0.0;
  for (auto [b, e] : tb.blocks) {
    double deaths = 0.0, eta_sum = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const auto i = tb.order[k];
      risk_sum += std::exp(eta[i] - shift);
      if (event[static_cast<std::size_t>(i)]) {
        deaths += 1.0;
        eta_sum += eta[i];
      }
    }
    if (deaths > 0.0) ll += eta_sum - deaths * (std::log(risk_sum) + shift);
  }
  return ll;
}

// d loglik / d eta_i = delta_i - e^{eta_i} * sum_{t <= t_i} d_t / S0(t).
inline Eigen::VectorXd breslow_loglik_eta_gradient(const Eigen::VectorXd& eta, const Eigen::VectorXd& time,
                                                   std::span<const int> event) {
  const auto tb = detail::descending_time_blocks(time);
  const double shift = eta.size() ? eta.maxCoeff() : 0.0;
  // Risk-set sums per block, accumulated from the latest time backwards.
  std::vector<double> s0(tb.blocks.size()), deaths(tb.blocks.size(), 0.0);
  double risk_sum = 0.0;
  for (std::size_t bi = 0; bi < tb.blocks.size(); ++bi) {
    auto [b, e] = tb.blocks[bi];
    for (std::size_t k = b; k < e; ++k) {
      const auto i = tb.order[k];
      risk_sum += std::exp(eta[i] - shift);
      if (event[static_cast<std::size_t>(i)]) deaths[bi] += 1.0;
    }
    s0[bi] = risk_sum;
  }
  Eigen::VectorXd grad(eta.size());
  double hazard = 0.0;  // cumulative over blocks with time <= current
  for (std::size_t bi = tb.blocks.size(); bi-- > 0;) {
    if (deaths[bi] > 0.0) hazard += deaths[bi] / s0[bi];
    auto [b, e] = tb.blocks[bi];
    for (std::size_t k = b; k < e; ++k) {
      const auto i = tb.order[k];
      grad[i] = (event[static_cast<std::size_t>(i)] ? 1.0 : 0.0) - std::exp(eta[i] - shift) * hazard;
    }
  }
  return grad;
}

// Partial likelihood of the linear model eta = X beta with its score and
// information matrix accumulated directly over risk sets.
class CoxPartialLikelihood {
 public:
  explicit CoxPartialLikelihood(const CoxData& data) : data_(data), blocks_(detail::descending_time_blocks(data.time)) {}

  double value(const Eigen::VectorXd& beta) const {
    return breslow_loglik(data_.x * beta, data_.time, data_.event);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const {
    Eigen::VectorXd g;
    evaluate(beta, &g, nullptr);
    return g;
  }

  // Returns loglik; fills score and the negative Hessian when requested.
  double evaluate(const Eigen::VectorXd& beta, Eigen::VectorXd* score, Eigen::MatrixXd* information) const {
    const Eigen::Index p = data_.x.cols();
    const Eigen::VectorXd eta = data_.x * beta;
    const double shift = eta.size() ? eta.maxCoeff() : 0.0;
    double s0 = 0.0, ll = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, information ? p : 0);
    if (score) *score = Eigen::VectorXd::Zero(p);
    if (information) *information = Eigen::MatrixXd::Zero(p, p);
    for (auto [b, e] : blocks_.blocks) {
      double deaths = 0.0;
      Eigen::VectorXd x_death_sum = Eigen::VectorXd::Zero(p);
      double eta_death_sum = 0.0;
      for (std::size_t k = b; k < e; ++k) {
        const auto i = blocks_.order[k];
        const double r = std::exp(eta[i] - shift);
        const auto xi = data_.x.row(i).transpose();
        s0 += r;
        s1 += r * xi;
        if (information) s2.noalias() += r * xi * xi.transpose();
        if (data_.event[static_cast<std::size_t>(i)]) {
          deaths += 1.0;
          x_death_sum += xi;
          eta_death_sum += eta[i];
        }
      }
      if (deaths == 0.0) continue;
      ll += eta_death_sum - deaths * (std::log(s0) + shift);
      const Eigen::VectorXd mean = s1 / s0;
      if (score) *score += x_death_sum - deaths * mean;
      if (information) *information += deaths * (s2 / s0 - mean * mean.transpose());
    }
    return ll;
  }

 private:
  const CoxData& data_;
  detail::TimeBlocks blocks_;
};

struct CoxOptions {
  int max_iterations = 100;
  // Converged when max |score| / n falls below this.
  double score_tolerance = 1e-8;
};

struct CoxFit {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  StepFunction baseline_cumulative_hazard;
};

// Breslow estimate of the baseline cumulative hazard at distinct event times.
inline StepFunction breslow_baseline(const CoxData& data, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = data.x * beta;
  const auto tb = detail::descending_time_blocks(data.time);
  std::vector<std::pair<double, double>> jumps;
  double s0 = 0.0;
  for (auto [b, e] : tb.blocks) {
    double deaths = 0.0;
    for (std::size_t k = b; k < e; ++k) {
      const auto i = tb.order[k];
      s0 += std::exp(eta[i]);
      if (data.event[static_cast<std::size_t>(i)]) deaths += 1.0;
    }
    if (deaths > 0.0) jumps.emplace_back(data.time[tb.order[b]], deaths / s0);
  }
  StepFunction h;
  double cumulative = 0.0;
  for (auto it = jumps.rbegin(); it != jumps.rend(); ++it) {
    cumulative += it->second;
    h.times.push_back(it->first);
    h.values.push_back(cumulative);
  }
  return h;
}

// Newton-Raphson on the Breslow partial likelihood with step halving, so the
// log-likelihood never decreases across accepted steps. Monotone-likelihood
// data simply runs out of iterations and reports converged = false.
inline CoxFit fit_cox(const CoxData& data, const CoxOptions& options = {}) {
  const Eigen::Index p = data.x.cols();
  const double n = static_cast<double>(std::max<Eigen::Index>(1, data.size()));
  CoxPartialLikelihood pl(data);
  CoxFit fit;
  fit.beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd score;
  Eigen::MatrixXd info;
  fit.loglik = pl.evaluate(fit.beta, &score, &info);
  for (;;) {
    if (score.size() == 0 || score.cwiseAbs().maxCoeff() / n < options.score_tolerance) {
      fit.converged = true;
      break;
    }
    if (fit.iterations >= options.max_iterations) break;
    ++fit.iterations;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 1e-12).all()) {
      step = ldlt.solve(score);
    } else {
      // Near-singular information (collinear or separated covariates).
      const double ridge = 1e-6 * std::max(1.0, info.diagonal().cwiseAbs().maxCoeff());
      step = (info + ridge * Eigen::MatrixXd::Identity(p, p)).ldlt().solve(score);
    }
    Eigen::VectorXd next_score;
    Eigen::MatrixXd next_info;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Eigen::VectorXd candidate = fit.beta + step;
      const double ll = pl.evaluate(candidate, &next_score, &next_info);
      if (std::isfinite(ll) && ll >= fit.loglik) {
        fit.beta = candidate;
        fit.loglik = ll;
        score = next_score;
        info = next_info;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  fit.baseline_cumulative_hazard = breslow_baseline(data, fit.beta);
  return fit;
}

}  // namespace retain
