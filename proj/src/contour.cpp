#include "conecalc/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace conecalc::sectors {

namespace {

// Odd node counts growing by about 1.4x; odd counts keep the every-other-node
// subrule a valid trapezoid rule on the same ray.
constexpr std::array<int, 20> kSchedule = {7,   11,  15,   21,   29,   41,  57,
                                           81,  113, 159,  223,  313,  437, 611,
                                           855, 1197, 1675, 2345, 3283, 4597};

struct ScalarProbe {
  double fine_error;    // |I_m - exact| for the scalar self-test
  double coarse_delta;  // |I_m - I_(m+1)/2|
};

// Self-test integrand: lambda^{i t} lambda^delta / (1+lambda)^{2 delta},
// evaluated through logs to stay finite at extreme radii.
Complex self_test_integrand(Complex lambda, double delta, double imag_order) {
  const Complex lg = principal_log(lambda);
  const Complex lg1p = principal_log(1.0 + lambda);
  return std::exp(Complex(0.0, imag_order) * lg + delta * lg - 2.0 * delta * lg1p);
}

// Applies the two-ray trapezoid rule to the scalar spectrum {1} and compares
// with the known exact value 4^{-delta}.
ScalarProbe probe(double theta, double S, int m, double delta,
                  double imag_order) {
  const double h = 2.0 * S / (m - 1);
  Complex fine = 0.0;
  Complex coarse = 0.0;
  for (int k = 0; k < m; ++k) {
    const double s = -S + k * h;
    const double r = std::exp(s);
    const Complex up = std::polar(r, theta);
    const Complex lo = std::polar(r, -theta);
    const Complex g =
        self_test_integrand(lo, delta, imag_order) * lo / (lo - 1.0) -
        self_test_integrand(up, delta, imag_order) * up / (up - 1.0);
    double w = (k == 0 || k == m - 1) ? 0.5 * h : h;
    fine += w * g;
    if (k % 2 == 0) {
      double wc = (k == 0 || k == m - 1) ? h : 2.0 * h;
      coarse += wc * g;
    }
  }
  const Complex scale = Complex(0.0, 2.0 * kPi);
  fine /= scale;
  coarse /= scale;
  const double exact = std::pow(4.0, -delta);
  return ScalarProbe{std::abs(fine - exact), std::abs(fine - coarse)};
}

}  // namespace

Contour boundary_contour(const Sector& sector, double delta, double tol,
                         int max_nodes, const ContourOptions& options) {
  if (!(delta > 0.0)) {
    throw InvalidRequestError("contour decay exponent must be positive");
  }
  if (!(tol > 0.0)) {
    throw InvalidRequestError("contour tolerance must be positive");
  }
  if (max_nodes < 6 && options.force_nodes_per_ray <= 0) {
    throw BudgetExceededError("contour budget below the minimal rule", 1.0);
  }

  const double c = options.integrand_scale;
  const double M = options.resolvent_bound;
  const double kappa = std::clamp(options.tail_fraction, 0.05, 0.9);

  // Truncation radii from the tail bound c r^{-delta} M / delta per end,
  // both ends together held below kappa * tol.
  double S = std::log(2.0 * c * M / (delta * kappa * tol)) / delta;
  S = std::max(S, 3.0);
  if (S > 700.0) {
    throw InvalidRequestError(
        "truncation radius exceeds the double range; loosen tol or use a "
        "larger decay exponent");
  }
  const double tail_bound = 2.0 * c * M * std::exp(-delta * S) / delta;
  const double disc_floor = 1e-15 * std::max(1.0, c * M);

  int chosen_m = 0;
  ScalarProbe chosen{0.0, 0.0};
  double best_estimate = std::numeric_limits<double>::infinity();

  if (options.force_nodes_per_ray > 0) {
    chosen_m = std::max(3, options.force_nodes_per_ray | 1);
    chosen = probe(sector.theta, S, chosen_m, delta, options.imag_order);
  } else {
    int last_tried = 0;
    auto try_m = [&](int m) {
      const ScalarProbe p = probe(sector.theta, S, m, delta, options.imag_order);
      const double disc = std::max(p.fine_error, disc_floor);
      best_estimate = std::min(best_estimate, tail_bound + disc);
      last_tried = m;
      if (tail_bound + disc <= tol) {
        chosen_m = m;
        chosen = p;
      }
    };
    for (int m : kSchedule) {
      if (2 * m > max_nodes) break;
      try_m(m);
      if (chosen_m > 0) break;
    }
    // The geometric schedule can overshoot the budget while a rule that
    // exactly fills it would still converge; clamp one last candidate to the
    // full budget before giving up.
    if (chosen_m == 0) {
      const int clamp = ((max_nodes / 2) - 1) | 1;
      if (clamp > last_tried && clamp >= 3) try_m(clamp);
    }
    if (chosen_m == 0) {
      throw BudgetExceededError(
          "node budget cannot reach the requested contour tolerance",
          best_estimate);
    }
  }

  Contour out;
  out.theta = sector.theta;
  out.delta = delta;
  out.tol = tol;
  out.r_min = std::exp(-S);
  out.r_max = std::exp(S);
  out.nodes_per_ray = chosen_m;
  out.integrand_scale = c;
  out.resolvent_bound = M;
  out.tail_bound = tail_bound;
  out.disc_estimate = std::max(chosen.fine_error, disc_floor);
  out.error_estimate = out.tail_bound + out.disc_estimate;
  out.richardson_beta =
      (chosen.coarse_delta > disc_floor)
          ? std::min(1.0, out.disc_estimate / chosen.coarse_delta)
          : 1.0;

  const int m = chosen_m;
  const double h = 2.0 * S / (m - 1);
  out.nodes.resize(2 * m);
  out.weights.resize(2 * m);
  out.coarse_weights.assign(2 * m, Complex(0.0, 0.0));
  const Complex inv_2pii = 1.0 / Complex(0.0, 2.0 * kPi);
  for (int k = 0; k < m; ++k) {
    const double s = -S + k * h;
    const double r = std::exp(s);
    const double trap = (k == 0 || k == m - 1) ? 0.5 * h : h;
    const Complex up = std::polar(r, sector.theta);
    const Complex lo = std::polar(r, -sector.theta);
    // Positive orientation around the spectrum: inward along the upper ray,
    // outward along the lower; after flipping the upper ray to increasing s
    // its contribution carries a minus sign.
    out.nodes[k] = up;
    out.weights[k] = -trap * up * inv_2pii;
    out.nodes[m + k] = lo;
    out.weights[m + k] = trap * lo * inv_2pii;
    if (k % 2 == 0) {
      const double trap2 = (k == 0 || k == m - 1) ? h : 2.0 * h;
      out.coarse_weights[k] = -trap2 * up * inv_2pii;
      out.coarse_weights[m + k] = trap2 * lo * inv_2pii;
    }
  }
  return out;
}

}  // namespace conecalc::sectors
