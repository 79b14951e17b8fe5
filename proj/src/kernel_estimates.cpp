#include "conecalc/kernel_estimates.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

namespace conecalc::kernels {

namespace {

// Interior grid in t-increasing order: tau_k = exp(-(N - k) h - h),
// k = 0..N-1, h = R/(N+1). Returns log(tau).
RVec ascending_log_t(int N, double R) {
  const double h = R / (N + 1);
  RVec lt(N);
  for (int k = 0; k < N; ++k) lt(k) = -(N - k) * h;
  return lt;
}

}  // namespace

RMat hardy_matrix(int n, double eps, int N, double R) {
  if (N < 1 || !(R > 0.0) || !(eps > 0.0)) {
    throw InvalidRequestError("kernel matrix needs N >= 1, R > 0, eps > 0");
  }
  const double h = R / (N + 1);
  const RVec lt = ascending_log_t(N, R);
  RMat m = RMat::Zero(N, N);
  // Conjugating by t^{(n+1)/2} cancels the dimensional part of the kernel
  // exactly; in log coordinates the entries reduce to h e^{eps (lt_j-lt_i)}.
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j <= i; ++j) {
      m(i, j) = h * std::exp(eps * (lt(j) - lt(i)));
    }
  }
  (void)n;
  return m;
}

RVec hardy_apply(const cone::LogGrid& grid, int n, double eps, const RVec& u) {
  if (u.size() != grid.N) {
    throw InvalidRequestError("profile size does not match the grid");
  }
  const int N = grid.N;
  // grid.t is decreasing; work in t-increasing order and map back.
  RVec out(N);
  const double a = 0.5 * (n + 1);
  for (int i = 0; i < N; ++i) {
    const double ti = grid.t(i);
    double acc = 0.0;
    for (int j = N - 1; j >= i; --j) {  // t_j <= t_i along decreasing t
      const double tj = grid.t(j);
      acc += std::exp((-a + eps) * std::log(tj)) * u(j) *
             std::pow(tj, n + 1) * grid.h;
    }
    out(i) = std::exp((-a - eps) * std::log(ti)) * acc;
  }
  return out;
}

HardyResult hardy_norm(const HardyParams& params, double tolerance_factor) {
  if (!(params.p > 1.0)) {
    throw InvalidRequestError("norm exponent must exceed 1");
  }
  const RMat m = hardy_matrix(params.n, params.eps, params.N, params.R);
  const int N = params.N;
  double estimate = 0.0;
  if (params.p == 2.0) {
    if (N <= 400) {
      estimate = m.bdcSvd().singularValues()(0);
    } else {
      RVec v = RVec::Ones(N);
      for (int i = 0; i < N; ++i) v(i) += 0.01 * std::cos(0.7 * i);
      v /= v.norm();
      for (int it = 0; it < params.power_iterations; ++it) {
        RVec w = m * v;
        RVec u = m.transpose() * w;
        const double nu = u.norm();
        if (nu == 0.0) break;
        estimate = std::sqrt(nu);
        v = u / nu;
      }
    }
  } else {
    // Sampled lower bound on the p-norm with nonnegative probes (the kernel
    // is positivity preserving, so nonnegative probes carry the norm).
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto pnorm = [&](const RVec& v) {
      double acc = 0.0;
      for (int i = 0; i < N; ++i) acc += std::pow(std::abs(v(i)), params.p);
      return std::pow(acc, 1.0 / params.p);
    };
    auto probe = [&](const RVec& v) {
      estimate = std::max(estimate, pnorm(m * v) / pnorm(v));
    };
    probe(RVec::Ones(N));
    for (int s = 0; s < params.samples; ++s) {
      RVec v(N);
      for (int i = 0; i < N; ++i) v(i) = unif(rng);
      probe(v);
    }
  }
  HardyResult out;
  out.norm_estimate = estimate;
  out.bound = 1.0 / params.eps;
  out.ratio = estimate * params.eps;
  out.tolerance_factor = tolerance_factor;
  out.pass = out.ratio <= tolerance_factor;
  return out;
}

}  // namespace conecalc::kernels
