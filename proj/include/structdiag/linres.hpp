#pragma once

/// @file linres.hpp
/// Linear static residuals: elimination of unknowns along a back-substitution
/// order, and minimum-variance fusion of residuals sharing a target fault.
///
/// Each equation is read as `a.x + b.z + c.f + d.v = 0` over unknowns x,
/// known signals z, faults f and noise terms v. A residual is the known part
/// `r = K.z` left after substituting every unknown, which then equals
/// `F.f + N.v`. Elimination runs in exact rational arithmetic; floating point
/// enters only at the covariance and fusion stage.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "structdiag/model.hpp"
#include "structdiag/operators.hpp"

namespace structdiag {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "3", "-1/2", "0.25", "1e-3" exactly.
Rational parse_rational(std::string_view text);

struct LinearEquation {
  std::map<std::string, Rational> unknowns;
  std::map<std::string, Rational> knowns;
  std::map<std::string, Rational> faults;
  std::map<std::string, Rational> noise;
};

class LinearStaticModel {
 public:
  /// Checks the coefficient pattern against `structure`: nonzero unknown and
  /// fault coefficients exactly where the structural model has incidences,
  /// knowns declared on the equation, and a symmetric positive semidefinite
  /// noise covariance. Differential equations are rejected.
  LinearStaticModel(const StructuralModel& structure,
                    std::map<std::string, LinearEquation> equations,
                    std::vector<std::string> noise_ids, Eigen::MatrixXd noise_cov);

  const std::vector<std::string>& known_ids() const noexcept { return known_ids_; }
  const std::vector<std::string>& fault_ids() const noexcept { return fault_ids_; }
  const std::vector<std::string>& noise_ids() const noexcept { return noise_ids_; }
  const Eigen::MatrixXd& noise_cov() const noexcept { return noise_cov_; }
  const LinearEquation& equation(std::string_view id) const;

 private:
  std::vector<std::string> known_ids_;
  std::vector<std::string> fault_ids_;
  std::vector<std::string> noise_ids_;
  std::map<std::string, LinearEquation, std::less<>> equations_;
  Eigen::MatrixXd noise_cov_;
};

/// Reads the "linear" block of a model file:
/// {"noise": [ids], "noise_cov": [[...]], "equations": {eq: {"unknowns":
/// {id: c}, "knowns": {...}, "faults": {...}, "noise": {...}}}}. Coefficients
/// are JSON numbers or rational strings. A missing noise_cov means identity.
LinearStaticModel parse_linear_model(std::string_view text, const StructuralModel& structure);

struct ExactResidual {
  std::vector<Rational> known_gains;  ///< over LinearStaticModel::known_ids()
  std::vector<Rational> fault_gains;  ///< over fault_ids()
  std::vector<Rational> noise_gains;  ///< over noise_ids()
};

struct LinearResidual {
  std::vector<std::string> known_ids;
  std::vector<std::string> fault_ids;
  std::vector<std::string> noise_ids;
  std::vector<double> known_gains;
  std::vector<double> fault_gains;
  std::vector<double> noise_gains;
  double variance = 0.0;  ///< noise_gains' * cov * noise_gains

  double fault_gain(std::string_view fault) const;
};

/// Exact elimination along `order` into `residual_equation`, scaled so the
/// first nonzero fault gain is +1. Throws NumericError on a zero pivot
/// coefficient.
ExactResidual derive_residual_exact(const LinearStaticModel& lin,
                                    const ComputationOrder& order,
                                    std::string_view residual_equation);

/// As above with the order's single residual equation; throws
/// PreconditionError when the order leaves more than one.
LinearResidual derive_residual(const LinearStaticModel& lin, const ComputationOrder& order);
LinearResidual derive_residual(const LinearStaticModel& lin, const ComputationOrder& order,
                               std::string_view residual_equation);

struct WeightSolution {
  std::vector<double> weights;  ///< sum to one
  double variance = 0.0;
};

/// Affine weights minimizing w' C w subject to sum(w) = 1. For two residuals
/// this is k = (c22 - c12) / (c11 + c22 - 2 c12). Throws NumericError unless
/// C is symmetric positive definite.
WeightSolution min_variance_weights(const Eigen::MatrixXd& residual_cov);

/// Covariance of the residuals' noise parts, N_i' * noise_cov * N_j.
Eigen::MatrixXd residual_covariance(const std::vector<LinearResidual>& residuals,
                                    const Eigen::MatrixXd& noise_cov);

struct FusionResult {
  std::vector<double> weights;
  LinearResidual fused;
  double variance = 0.0;
  Eigen::MatrixXd residual_cov;
};

/// Fuses two or more residuals whose `target_fault` gain is 1 into the
/// minimum-variance affine combination.
FusionResult min_variance_fusion(const std::vector<LinearResidual>& residuals,
                                 std::string_view target_fault,
                                 const Eigen::MatrixXd& noise_cov);

}  // namespace structdiag
