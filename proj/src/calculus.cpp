#include "conecalc/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "conecalc/parallel.hpp"

namespace conecalc::calc {

namespace {

// sum_k fine_c[k] R(node_k) and sum_k coarse_c[k] R(node_k), resolvents
// computed in parallel chunks, accumulation serial in index order so results
// do not depend on the thread count.
void accumulate_resolvent_sums(const ops::ResolventProvider& op,
                               const std::vector<Complex>& nodes,
                               const std::vector<Complex>& fine_c,
                               const std::vector<Complex>& coarse_c,
                               CMat& fine, CMat& coarse) {
  const int n = op.dim();
  const int total = static_cast<int>(nodes.size());
  fine.setZero(n, n);
  coarse.setZero(n, n);
  const int chunk =
      std::max(1, static_cast<int>(2'000'000 / std::max(1, n * n)));
  std::vector<CMat> terms(std::min(chunk, total));
  for (int base = 0; base < total; base += chunk) {
    const int count = std::min(chunk, total - base);
    parallel_for(count, [&](int i) {
      op.resolve_matrix(nodes[base + i], terms[i]);
    });
    for (int i = 0; i < count; ++i) {
      fine.noalias() += fine_c[base + i] * terms[i];
      if (coarse_c[base + i] != Complex(0.0, 0.0)) {
        coarse.noalias() += coarse_c[base + i] * terms[i];
      }
    }
  }
}

// Real spectral enclosure, from the provider or its dense eigenvalues.
std::pair<double, double> real_enclosure(const ops::ResolventProvider& op) {
  if (auto b = op.real_spectral_bounds()) return *b;
  if (auto a = op.dense()) {
    Eigen::ComplexEigenSolver<CMat> es(*a, false);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double imag = 0.0;
    double scale = 1.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex e = es.eigenvalues()(i);
      lo = std::min(lo, e.real());
      hi = std::max(hi, e.real());
      imag = std::max(imag, std::abs(e.imag()));
      scale = std::max(scale, std::abs(e));
    }
    if (imag <= 1e-9 * scale) return {lo, hi};
  }
  throw InvalidRequestError(
      "operation needs a real spectral enclosure for the operator");
}

CalcResult circle_quadrature(const ops::ResolventProvider& op,
                             const std::function<Complex(Complex)>& f,
                             double center, double radius, double tol,
                             int min_nodes, int max_nodes,
                             const std::string& path_name) {
  const int n = op.dim();
  CalcResult out;
  out.path = path_name;
  CMat prev;
  bool have_prev = false;
  double delta = std::numeric_limits<double>::infinity();
  for (int m = std::max(8, min_nodes); m <= max_nodes; m *= 2) {
    std::vector<Complex> nodes(m), coef(m), zero(m, Complex(0, 0));
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * kPi * j / m;
      const Complex e = std::polar(1.0, phi);
      nodes[j] = center + radius * e;
      coef[j] = radius / static_cast<double>(m) * e * f(nodes[j]);
    }
    CMat value(n, n), unused(n, n);
    accumulate_resolvent_sums(op, nodes, coef, zero, value, unused);
    if (have_prev) {
      delta = (value - prev).norm();
      if (delta <= tol * (1.0 + value.norm())) {
        out.value = value;
        out.error_estimate = delta;
        out.nodes_used = m;
        return out;
      }
    }
    prev = value;
    have_prev = true;
    out.nodes_used = m;
  }
  throw BudgetExceededError(
      "closed contour did not converge within the node budget", delta);
}

holo::HFunction exact_imaginary_power(double t) {
  return holo::user_defined(
      [t](Complex lambda) {
        return std::exp(Complex(0.0, t) * sectors::principal_log(lambda));
      },
      std::nullopt, 0.0, "lambda^{it} (exact)");
}

// Lagrange weights for extrapolating values at the given nodes to 0.
std::vector<double> lagrange_weights_at_zero(const std::vector<double>& x) {
  const int k = static_cast<int>(x.size());
  std::vector<double> w(k, 1.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      w[i] *= (0.0 - x[j]) / (x[i] - x[j]);
    }
  }
  return w;
}

}  // namespace

CalcResult dunford(const ops::ResolventProvider& op, const holo::HFunction& f,
                   const sectors::Contour& contour) {
  if (!f.certificate) {
    throw InvalidRequestError(
        "open-contour calculus needs a decay certificate on the function");
  }
  if (f.certificate->delta < contour.delta - 1e-12) {
    throw InvalidRequestError(
        "certificate decay is weaker than the contour assumes");
  }
  if (f.theta_ref < contour.theta - 1e-12) {
    throw InvalidRequestError(
        "certificate was established for a smaller aperture than the contour");
  }
  const int total = contour.total_nodes();
  std::vector<Complex> fine_c(total), coarse_c(total);
  for (int k = 0; k < total; ++k) {
    const Complex fv = f.eval(contour.nodes[k]);
    fine_c[k] = contour.weights[k] * fv;
    coarse_c[k] = contour.coarse_weights[k] * fv;
  }
  CMat fine, coarse;
  accumulate_resolvent_sums(op, contour.nodes, fine_c, coarse_c, fine, coarse);

  const double ratio = f.certificate->scale / contour.integrand_scale;
  const double op_delta = (fine - coarse).norm() * contour.richardson_beta;
  CalcResult out;
  out.value = std::move(fine);
  out.error_estimate = contour.tail_bound * ratio +
                       std::max(contour.disc_estimate * ratio, op_delta);
  out.nodes_used = total;
  out.path = "sector-boundary";
  return out;
}

CalcResult closed_path(const ops::ResolventProvider& op,
                       const holo::HFunction& f,
                       const ClosedPathOptions& options) {
  const auto [lo, hi] = real_enclosure(op);
  double center = 0.5 * (lo + hi);
  double radius;
  if (options.origin_singular) {
    if (!(lo > 0.0)) {
      throw InvalidRequestError(
          "closed path needs the spectrum bounded away from the origin");
    }
    const double mf = std::clamp(options.margin_factor, 0.05, 0.9);
    radius = 0.5 * (hi - lo) + mf * lo;
  } else {
    radius = 0.5 * (hi - lo) + 0.25 * (hi - lo) + 1.0;
  }
  return circle_quadrature(op, f.eval, center, radius, options.tol,
                           options.min_nodes, options.max_nodes,
                           "closed-circle");
}

CalcResult imaginary_power_closed_path(const ops::ResolventProvider& op,
                                       double t,
                                       const ClosedPathOptions& options) {
  return closed_path(op, exact_imaginary_power(t), options);
}

CalcResult imaginary_power_regularized_path(
    const ops::ResolventProvider& op, double t, const sectors::Sector& sector,
    const RegularizedPowerOptions& options) {
  const auto& eps = options.eps_seq;
  if (eps.size() < 2) {
    throw InvalidRequestError("extrapolation needs at least two exponents");
  }
  for (size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || (i > 0 && eps[i] >= eps[i - 1])) {
      throw InvalidRequestError(
          "regularization exponents must be positive and decreasing");
    }
  }
  const std::vector<double> w = lagrange_weights_at_zero(eps);
  const int n = op.dim();
  std::vector<CMat> values(eps.size());
  CalcResult out;
  out.path = "regularized-extrapolation";
  double propagated = 0.0;
  for (size_t i = 0; i < eps.size(); ++i) {
    const holo::HFunction fe =
        holo::imaginary_power_regularized(t, eps[i], sector);
    sectors::ContourOptions copt;
    copt.integrand_scale = fe.certificate->scale;
    copt.imag_order = std::abs(t);
    const sectors::Contour contour =
        sectors::boundary_contour(sector, eps[i], options.contour_tol,
                                  options.max_nodes_per_member, copt);
    const CalcResult r = dunford(op, fe, contour);
    values[i] = r.value;
    out.nodes_used += r.nodes_used;
    propagated += std::abs(w[i]) * r.error_estimate;
  }
  CMat value = CMat::Zero(n, n);
  for (size_t i = 0; i < eps.size(); ++i) value += w[i] * values[i];
  // Extrapolation residual proxy: drop the largest exponent and compare.
  std::vector<double> eps_drop(eps.begin() + 1, eps.end());
  const std::vector<double> wd = lagrange_weights_at_zero(eps_drop);
  CMat dropped = CMat::Zero(n, n);
  for (size_t i = 0; i < eps_drop.size(); ++i) {
    dropped += wd[i] * values[i + 1];
  }
  out.value = std::move(value);
  out.error_estimate = (out.value - dropped).norm() + propagated;
  return out;
}

CalcResult heat_semigroup(const ops::ResolventProvider& op, double tau,
                          const HeatOptions& options) {
  if (!(tau > 0.0)) {
    throw InvalidRequestError("heat semigroup needs tau > 0");
  }
  const auto [lo, hi] = real_enclosure(op);
  if (tau * std::max(std::abs(lo), std::abs(hi)) <= options.circle_cap) {
    holo::HFunction f;
    f.eval = [tau](Complex lambda) { return std::exp(-tau * lambda); };
    f.description = "exp(-tau lambda)";
    ClosedPathOptions copt;
    copt.tol = options.tol;
    copt.max_nodes = options.max_circle_nodes;
    copt.min_nodes = 32;
    copt.origin_singular = false;
    return closed_path(op, f, copt);
  }

  // Stiff regime: right-opening parabola w = mu (u + i)^2, lambda = w / tau.
  // The u sweep from -U to U winds clockwise around the spectrum, hence the
  // global minus sign.
  const double mu = options.parabola_mu;
  const double U = options.parabola_halfwidth;
  if (!(lo * tau > -0.5 * mu)) {
    throw InvalidRequestError(
        "spectrum extends left of the parabola contour; the stiff heat path "
        "needs an (almost) nonnegative real spectrum");
  }
  int m = options.parabola_nodes | 1;  // odd, so the coarse subrule nests
  if (m < 9) m = 9;
  const double du = 2.0 * U / (m - 1);
  std::vector<Complex> nodes(m), fine_c(m), coarse_c(m, Complex(0, 0));
  const Complex inv_2pii = 1.0 / Complex(0.0, 2.0 * kPi);
  for (int j = 0; j < m; ++j) {
    const double u = -U + j * du;
    const Complex base(u, 1.0);
    const Complex w = mu * base * base;
    nodes[j] = w / tau;
    const Complex dlam = 2.0 * mu * base / tau;
    const double trap = (j == 0 || j == m - 1) ? 0.5 * du : du;
    fine_c[j] = -trap * std::exp(-w) * dlam * inv_2pii;
    if (j % 2 == 0) {
      const double trap2 = (j == 0 || j == m - 1) ? du : 2.0 * du;
      coarse_c[j] = -trap2 * std::exp(-w) * dlam * inv_2pii;
    }
  }
  CMat fine, coarse;
  accumulate_resolvent_sums(op, nodes, fine_c, coarse_c, fine, coarse);
  CalcResult out;
  // Fine/coarse difference plus the roundoff floor amplified by e^{mu}.
  out.error_estimate = (fine - coarse).norm() + std::exp(mu) * 1e-16;
  out.value = std::move(fine);
  out.nodes_used = m;
  out.path = "parabola";
  return out;
}

std::vector<FamilyMember> default_bound_family(const sectors::Sector& sector,
                                               std::uint64_t seed,
                                               int random_members) {
  std::vector<FamilyMember> out;
  for (double d : {0.25, 0.5, 1.0}) {
    out.push_back({"power_quotient(" + std::to_string(d) + ")",
                   holo::power_quotient(d, sector)});
  }
  for (double t : {1.0, -1.0, 2.0, -2.0}) {
    out.push_back({"imaginary_power(t=" + std::to_string(t) + ")",
                   holo::imaginary_power_regularized(t, 1.0, sector)});
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < random_members; ++k) {
    const double d = 0.3 + 0.7 * unif(rng);
    const double a1 = std::pow(10.0, 2.0 * unif(rng) - 1.0);
    const double a2 = std::pow(10.0, 2.0 * unif(rng) - 1.0);
    holo::HFunction f = holo::product(
        holo::product(holo::power_quotient(d, sector),
                      holo::shifted_rational(a1, sector), sector),
        holo::shifted_rational(a2, sector), sector);
    out.push_back({"rational[" + std::to_string(k) + "]", std::move(f)});
  }
  return out;
}

BoundReport sup_calculus_bound(const ops::ResolventProvider& op,
                               const sectors::Sector& sector,
                               const std::vector<FamilyMember>& members,
                               double contour_tol, int max_nodes,
                               int node_multiplier) {
  BoundReport report;
  const RVec w = op.norm_weights();
  for (const FamilyMember& member : members) {
    if (!member.f.certificate) {
      throw InvalidRequestError("bound family members need certificates: " +
                                member.name);
    }
    sectors::ContourOptions copt;
    copt.integrand_scale = member.f.certificate->scale;
    copt.imag_order = member.f.imag_order;
    sectors::Contour contour = sectors::boundary_contour(
        sector, member.f.certificate->delta, contour_tol, max_nodes, copt);
    if (node_multiplier > 1) {
      copt.force_nodes_per_ray = contour.nodes_per_ray * node_multiplier;
      contour = sectors::boundary_contour(sector, member.f.certificate->delta,
                                          contour_tol, max_nodes, copt);
    }
    const CalcResult r = dunford(op, member.f, contour);
    const double num = ops::weighted_spectral_norm(r.value, w);
    const double den = holo::sup_norm_estimate(member.f, sector);
    report.member_ratios.emplace_back(member.name, num / den);
    report.total_nodes += r.nodes_used;
    report.bound = std::max(report.bound, num / den);
  }
  return report;
}

CauchyResult cauchy_solve(
    const std::vector<const ops::ResolventProvider*>& modes,
    const std::vector<std::function<CVec(double)>>& forcing,
    const sectors::Sector& sector, const CauchyOptions& options,
    const HeatOptions& heat_options) {
  if (modes.empty() || modes.size() != forcing.size()) {
    throw InvalidRequestError("modes and forcing samplers must pair up");
  }
  if (options.steps < 2) {
    throw InvalidRequestError("time grid needs at least 2 steps");
  }
  if (sector.theta > kPi / 2.0 + 1e-12) {
    throw InvalidRequestError(
        "time integration needs a spectral sector within the right "
        "half-plane");
  }
  // Sector verification gate: every mode must keep its spectrum inside the
  // closed complement sector and away from 0.
  for (size_t j = 0; j < modes.size(); ++j) {
    bool ok = false;
    if (auto b = modes[j]->real_spectral_bounds()) {
      ok = b->first > 0.0;
    } else if (modes[j]->dense()) {
      const auto loc = ops::spectrum_in_complement(
          *modes[j], sector, 1e-12 * modes[j]->scale_hint());
      ok = loc.pass;
    }
    if (!ok) {
      throw InvalidRequestError(
          "sector verification failed for mode " + std::to_string(j) +
          "; refusing to integrate");
    }
  }

  const int K = options.steps;
  const double dt = options.T / K;
  const size_t J = modes.size();
  CauchyResult result;
  result.times.resize(K + 1);
  for (int k = 0; k <= K; ++k) result.times(k) = k * dt;
  result.trajectories.resize(J);

  std::vector<CMat> e_half(J), e_full(J);
  for (size_t j = 0; j < J; ++j) {
    const CalcResult h = heat_semigroup(*modes[j], 0.5 * dt, heat_options);
    e_half[j] = h.value;
    e_full[j] = h.value * h.value;
    result.propagator_error_estimate = std::max(
        result.propagator_error_estimate, h.error_estimate * 2.0 * K);
    if (result.path.empty()) result.path = "exponential-midpoint(" + h.path + ")";
  }

  // March and collect per-time spatial norms of u', A u, f.
  std::vector<std::vector<CVec>> f_mid(J);
  for (size_t j = 0; j < J; ++j) {
    const int n = modes[j]->dim();
    CMat traj(K + 1, n);
    CVec u = (j < options.initial.size() && options.initial[j].size() == n)
                 ? options.initial[j]
                 : CVec::Zero(n);
    traj.row(0) = u.transpose();
    f_mid[j].resize(K);
    for (int k = 0; k < K; ++k) {
      f_mid[j][k] = forcing[j]((k + 0.5) * dt);
      if (f_mid[j][k].size() != n) {
        throw InvalidRequestError("forcing sample has the wrong dimension");
      }
      u = (e_full[j] * u + dt * (e_half[j] * f_mid[j][k])).eval();
      traj.row(k + 1) = u.transpose();
    }
    result.trajectories[j] = std::move(traj);
  }

  const double r = options.r_time;
  auto time_norm = [&](const std::vector<double>& vals) {
    double acc = 0.0;
    for (double v : vals) acc += std::pow(v, r);
    return std::pow(dt * acc, 1.0 / r);
  };

  // Interior times for u' and A u (centered differences), midpoints for f.
  std::vector<double> du_norms, au_norms, f_norms;
  for (int k = 1; k < K; ++k) {
    double du_sq = 0.0, au_sq = 0.0;
    for (size_t j = 0; j < J; ++j) {
      const CVec um = result.trajectories[j].row(k - 1).transpose();
      const CVec up = result.trajectories[j].row(k + 1).transpose();
      const CVec uc = result.trajectories[j].row(k).transpose();
      const CVec du = (up - um) / (2.0 * dt);
      CVec au;
      modes[j]->apply(uc, au);
      du_sq += std::pow(ops::weighted_norm(*modes[j], du), 2.0);
      au_sq += std::pow(ops::weighted_norm(*modes[j], au), 2.0);
    }
    du_norms.push_back(std::sqrt(du_sq));
    au_norms.push_back(std::sqrt(au_sq));
  }
  for (int k = 0; k < K; ++k) {
    double f_sq = 0.0;
    for (size_t j = 0; j < J; ++j) {
      f_sq += std::pow(ops::weighted_norm(*modes[j], f_mid[j][k]), 2.0);
    }
    f_norms.push_back(std::sqrt(f_sq));
  }
  result.norm_du = time_norm(du_norms);
  result.norm_au = time_norm(au_norms);
  result.norm_f = time_norm(f_norms);
  // Zero forcing propagates to the zero trajectory; report rho = 0 instead of
  // dividing by zero.
  result.rho = result.norm_f > 0.0
                   ? (result.norm_du + result.norm_au) / result.norm_f
                   : 0.0;
  return result;
}

}  // namespace conecalc::calc
