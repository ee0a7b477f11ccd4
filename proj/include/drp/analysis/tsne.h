//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_ANALYSIS_TSNE_H_
#define DRP_ANALYSIS_TSNE_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace drp::analysis {

struct TsneConfig {
  // <= 0 selects n / 120 with a floor of 5.
  double perplexity = 0.0;
  int iterations = 3000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  // Momentum 0.5 before momentum_switch, 0.8 after.
  int momentum_switch = 250;
  // Entropy tolerance (nats) of the bandwidth search.
  double entropy_tolerance = 1e-5;
  int max_search_steps = 50;
  std::uint64_t seed = 0;
};

struct TsneResult {
  Eigen::MatrixXd embedding;  // n x 2
  double perplexity = 0.0;
  // Entropy of each conditional P_i minus log(perplexity).
  std::vector<double> entropy_error;
  // KL(P || Q) after each iteration (index 0 = iteration 1), with the
  // unexaggerated P.
  std::vector<double> kl;
};

// Exact t-SNE. Throws DomainError for n < 5, invalid perplexity or fewer
// than 250 iterations.
TsneResult Tsne(const Eigen::MatrixXd &points, const TsneConfig &config = {});

// Perplexity actually used for n points under config.
double EffectivePerplexity(int n, const TsneConfig &config);

// Row-normalized Gaussian affinities P_{j|i} for one row of squared
// distances (self excluded by the caller setting it to +inf). Returns the
// achieved entropy in nats.
double ConditionalAffinities(const Eigen::VectorXd &sq_dist, double perplexity, double tolerance,
                             int max_steps, Eigen::VectorXd &p);

// Residual of the best rigid (rotation/reflection + translation) fit of b
// onto a, relative to the spread of a.
double ProcrustesResidual(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b);

// Fraction of points whose nearest neighbour (Euclidean) shares their label.
double NearestNeighborPurity(const Eigen::MatrixXd &points, const std::vector<int> &labels);

// x,y,label CSV.
std::string FormatEmbeddingCsv(const Eigen::MatrixXd &embedding,
                               const std::vector<std::string> &labels);

}  // namespace drp::analysis

#endif  // DRP_ANALYSIS_TSNE_H_
