//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_ANALYSIS_SVR_H_
#define DRP_ANALYSIS_SVR_H_

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace drp::analysis {

struct SvrConfig {
  double c = 10.0;
  double epsilon = 0.1;
  int degree = 3;
  // Kernel (gamma * x.y + coef0)^degree.
  double gamma = 1.0;
  double coef0 = 1.0;
  double tolerance = 1e-3;
  std::int64_t max_iterations = 100000;
};

struct SvrModel {
  SvrConfig config;
  Eigen::MatrixXd support;       // training rows with non-zero coefficient
  Eigen::VectorXd coefficients;  // alpha - alpha*, one per support row
  double bias = 0.0;
  // Coefficients for every training row (zeros included), in input order.
  Eigen::VectorXd all_coefficients;
  std::int64_t iterations = 0;
  double final_violation = 0.0;
  bool converged = false;
  // Non-empty when the solver stopped at the iteration cap.
  std::string warning;

  double Predict(std::span<const double> x) const;
  Eigen::VectorXd Predict(const Eigen::MatrixXd &x) const;
};

double PolyKernel(const SvrConfig &config, std::span<const double> a, std::span<const double> b);

// Epsilon-SVR by sequential minimal optimization over the 2n dual variables,
// selecting the maximal violating pair. Throws DomainError for n < 2 or
// mismatched sizes.
SvrModel SvrFit(const Eigen::MatrixXd &features, const Eigen::VectorXd &targets,
                const SvrConfig &config = {});

// Largest violation of the optimality conditions over the training points,
// recomputed from the fitted model: points strictly inside the tube must
// have zero coefficient, free points must sit on the tube edge, bounded
// points outside it.
double KktViolation(const SvrModel &model, const Eigen::MatrixXd &features,
                    const Eigen::VectorXd &targets);

}  // namespace drp::analysis

#endif  // DRP_ANALYSIS_SVR_H_
