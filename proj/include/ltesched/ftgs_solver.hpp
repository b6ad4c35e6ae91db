#pragma once

// FTGS parameter optimization under Rayleigh fading.
//
// The FTGS metric of UE i is S_i = R_i / alpha_i with R_i = W log2(1 + g/Gamma)
// and g ~ Exp(mean gamma_bar_i). Given the weights, the access probability
// p(i) = P[S_i > max_{j!=i} S_j] and the conditional mean rate R_i^bar follow
// by quadrature. The weights are chosen so that every UE receives the same
// long-term throughput p(i) R_i^bar, which together with sum p(i) = 1 fixes
// p(i) = 1 / (R_i^bar sum_j 1/R_j^bar).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"
#include "linkadapt.hpp"

namespace ltesched {

/// Distribution of the FTGS metric S = W log2(1 + g/Gamma) / alpha.
struct MetricDistribution {
  double gamma_bar = 1.0;  // linear average SINR
  double alpha = 1.0;      // bit/s
  double gap = 1.0;        // Gamma, linear
  double bandwidth = 1.0;  // W, Hz

  void validate() const {
    detail::require(gamma_bar > 0.0, "metric distribution needs gamma_bar > 0");
    detail::require(alpha > 0.0 && gap > 0.0 && bandwidth > 0.0,
                    "metric distribution needs positive alpha, gap and bandwidth");
  }

  // c(s) = Gamma (1 - 2^{alpha s / W}), computed without cancellation.
  double c(double s) const {
    return -gap * std::expm1(std::numbers::ln2 * alpha * s / bandwidth);
  }

  /// Metric value whose upper-tail probability is `tail`.
  double quantile_upper(double tail) const {
    return bandwidth * std::log2(1.0 - gamma_bar * std::log(tail) / gap) / alpha;
  }
};

inline double metric_cdf(const MetricDistribution& d, double s) {
  detail::require(s >= 0.0, "metric_cdf requires s >= 0");
  return -std::expm1(d.c(s) / d.gamma_bar);
}

inline double metric_pdf(const MetricDistribution& d, double s) {
  detail::require(s >= 0.0, "metric_pdf requires s >= 0");
  const double c = d.c(s);
  return std::numbers::ln2 * d.alpha / (d.bandwidth * d.gamma_bar) * (d.gap - c) *
         std::exp(c / d.gamma_bar);
}

namespace detail {

inline constexpr double kTailMass = 1e-12;
inline constexpr double kQuadratureTol = 1e-12;

/// Integration limit beyond which every metric density carries < 1e-12 mass.
inline double metric_upper_limit(std::span<const MetricDistribution> dists) {
  double smax = 0.0;
  for (const auto& d : dists) smax = std::max(smax, d.quantile_upper(kTailMass));
  return smax;
}

/// int_0^smax s^moment p_i(s) prod_{j!=i} P_j(s) ds
inline double winner_integral(std::span<const MetricDistribution> dists, std::size_t i,
                              int moment, double quad_tol = kQuadratureTol) {
  const double smax = metric_upper_limit(dists);
  auto integrand = [&](double s) {
    double v = metric_pdf(dists[i], s);
    for (std::size_t j = 0; j < dists.size() && v > 0.0; ++j) {
      if (j != i) v *= metric_cdf(dists[j], s);
    }
    return moment == 0 ? v : v * s;
  };
  double err = 0.0;
  double l1 = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, smax, 20, quad_tol, &err, &l1);
  if (!(err <= 1e-8 * std::max(l1, 1e-300)) || !std::isfinite(val)) {
    throw NumericalError("metric quadrature did not converge (error estimate " +
                             std::to_string(err) + ")",
                         err);
  }
  return val;
}

}  // namespace detail

/// p(i) = P[S_i > max_{j != i} S_j].
inline double access_probability(std::span<const MetricDistribution> dists, std::size_t i) {
  detail::require(!dists.empty() && i < dists.size(), "access_probability: bad UE index");
  for (const auto& d : dists) d.validate();
  if (dists.size() == 1) return 1.0;
  return detail::winner_integral(dists, i, 0);
}

/// Mean rate (bit/s) of UE i over the TTIs in which it wins the argmax.
inline double conditional_mean_rate(std::span<const MetricDistribution> dists, std::size_t i) {
  detail::require(!dists.empty() && i < dists.size(), "conditional_mean_rate: bad UE index");
  const double p = access_probability(dists, i);
  detail::require(p > 0.0, "conditional_mean_rate requires p(i) > 0");
  return dists[i].alpha / p * detail::winner_integral(dists, i, 1);
}

struct FtgsParameters {
  std::vector<double> gamma_bar;  // linear
  std::vector<double> alpha;      // bit/s
  std::vector<double> p;
  std::vector<double> rbar;       // bit/s
  double bandwidth = 1.0;
  SnrGap gap;
  int iterations = 0;
  double residual = 0.0;  // max |ln(p_i R_i / p_0 R_0)| at exit

  std::size_t size() const { return alpha.size(); }
};

struct FtgsSolveOptions {
  double tol = 1e-10;
  int max_iterations = 50;
};

/// alpha of the weakest UE is reported as this multiple of its single-user
/// mean rate; the scheduling decisions only depend on alpha ratios.
inline constexpr double kAlphaPresentationScale = 2.3829643812820964;

namespace detail {

struct FtgsEvaluation {
  std::vector<double> p;
  std::vector<double> rbar;
  std::vector<double> residual;  // ln(x_i / x_0), i >= 1
};

inline std::vector<MetricDistribution> make_dists(std::span<const double> gamma_bars,
                                                  std::span<const double> alpha, double gap,
                                                  double bandwidth) {
  std::vector<MetricDistribution> d(gamma_bars.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = {gamma_bars[i], alpha[i], gap, bandwidth};
  return d;
}

inline FtgsEvaluation evaluate_ftgs(std::span<const double> gamma_bars,
                                    std::span<const double> alpha, double gap, double bandwidth) {
  const auto dists = make_dists(gamma_bars, alpha, gap, bandwidth);
  const std::size_t n = dists.size();
  FtgsEvaluation ev;
  ev.p.resize(n);
  ev.rbar.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev.p[i] = n == 1 ? 1.0 : winner_integral(dists, i, 0);
    if (!(ev.p[i] > 0.0)) {
      throw NumericalError("FTGS iterate starves UE " + std::to_string(i), ev.p[i]);
    }
    const double m1 = winner_integral(dists, i, 1);
    ev.rbar[i] = alpha[i] / ev.p[i] * m1;
  }
  ev.residual.resize(n - 1);
  const double x0 = std::log(ev.p[0] * ev.rbar[0]);
  for (std::size_t i = 1; i < n; ++i) ev.residual[i - 1] = std::log(ev.p[i] * ev.rbar[i]) - x0;
  return ev;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Solves for the FTGS weights, access probabilities and conditional mean
/// rates of UEs with the given linear average SINRs.
///
/// Damped Newton iteration on ln(alpha_i / alpha_0) with a forward-difference
/// Jacobian; the target is equal p(i) R_i^bar for all i. The initial guess
/// sets alpha_i to the single-user mean rate of UE i.
inline FtgsParameters solve_ftgs(std::span<const double> gamma_bars, const SnrGap& gap,
                                 double bandwidth, const FtgsSolveOptions& opts = {}) {
  detail::require(!gamma_bars.empty(), "FTGS solve needs at least one UE");
  detail::require(bandwidth > 0.0, "bandwidth must be positive");
  for (double g : gamma_bars) {
    detail::require(g > 0.0 && std::isfinite(g), "average SINRs must be positive and finite");
  }
  const std::size_t n = gamma_bars.size();

  std::vector<double> single(n);
  for (std::size_t i = 0; i < n; ++i) single[i] = bandwidth * rayleigh_mean_efficiency(gamma_bars[i], gap);

  std::vector<double> alpha = single;
  auto ev = detail::evaluate_ftgs(gamma_bars, alpha, gap.gamma, bandwidth);
  double res = detail::max_abs(ev.residual);
  int iter = 0;

  const auto m = static_cast<Eigen::Index>(n - 1);
  while (res > opts.tol) {
    if (iter >= opts.max_iterations) {
      throw NumericalError("FTGS solver did not converge after " + std::to_string(iter) +
                               " iterations, residual " + std::to_string(res),
                           res);
    }
    ++iter;
    Eigen::VectorXd f(m);
    for (Eigen::Index r = 0; r < m; ++r) f(r) = ev.residual[static_cast<std::size_t>(r)];

    Eigen::MatrixXd jac(m, m);
    constexpr double kStep = 1e-6;
    for (Eigen::Index c = 0; c < m; ++c) {
      auto trial = alpha;
      trial[static_cast<std::size_t>(c) + 1] *= std::exp(kStep);
      const auto ev_c = detail::evaluate_ftgs(gamma_bars, trial, gap.gamma, bandwidth);
      for (Eigen::Index r = 0; r < m; ++r) {
        jac(r, c) = (ev_c.residual[static_cast<std::size_t>(r)] - f(r)) / kStep;
      }
    }
    const Eigen::VectorXd step = jac.partialPivLu().solve(-f);
    if (!step.allFinite()) throw NumericalError("FTGS Jacobian is singular", res);

    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      auto trial = alpha;
      for (Eigen::Index r = 0; r < m; ++r) {
        trial[static_cast<std::size_t>(r) + 1] *= std::exp(lambda * step(r));
      }
      auto ev_t = detail::evaluate_ftgs(gamma_bars, trial, gap.gamma, bandwidth);
      const double res_t = detail::max_abs(ev_t.residual);
      if (res_t < res) {
        alpha = std::move(trial);
        ev = std::move(ev_t);
        res = res_t;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NumericalError("FTGS line search stalled, residual " + std::to_string(res), res);
    }
  }

  const auto weakest = static_cast<std::size_t>(
      std::min_element(gamma_bars.begin(), gamma_bars.end()) - gamma_bars.begin());
  const double scale = kAlphaPresentationScale * single[weakest] / alpha[weakest];
  for (auto& a : alpha) a *= scale;

  FtgsParameters out;
  out.gamma_bar.assign(gamma_bars.begin(), gamma_bars.end());
  out.alpha = std::move(alpha);
  out.p = std::move(ev.p);
  out.rbar = std::move(ev.rbar);
  out.bandwidth = bandwidth;
  out.gap = gap;
  out.iterations = iter;
  out.residual = res;
  return out;
}

}  // namespace ltesched
