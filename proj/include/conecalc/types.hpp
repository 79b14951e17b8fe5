#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace conecalc {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a quadrature cannot reach the requested tolerance within the
// node budget. Carries the best error estimate attainable inside the budget.
struct BudgetExceededError : Error {
  double achievable;
  BudgetExceededError(const std::string& msg, double achievable_estimate)
      : Error(msg), achievable(achievable_estimate) {}
};

// Thrown when a resolvent is requested at (or numerically on top of) a
// spectral point.
struct SingularResolventError : Error {
  using Error::Error;
};

// Thrown for structurally invalid requests (bad parameters, unsupported
// operator/path combinations, malformed configs).
struct InvalidRequestError : Error {
  using Error::Error;
};

// Result of evaluating a function of an operator through a quadrature path.
struct CalcResult {
  CMat value;
  double error_estimate = 0.0;
  int nodes_used = 0;
  std::string path;  // which quadrature realized the value
};

}  // namespace conecalc
