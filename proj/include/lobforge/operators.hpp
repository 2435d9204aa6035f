#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lobforge/rng.hpp"

namespace lobforge {

/// Box constraints on the scalar part of a candidate, one named entry per coordinate.
struct Bounds {
  std::vector<std::string> names;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  /// Throws InvalidConfig unless every lower < upper and all are finite.
  void validate() const;
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clamp(Eigen::VectorXd x) const;
  Eigen::VectorXd range() const { return upper - lower; }
  Eigen::VectorXd sample_uniform(Rng& rng) const;
  /// Index of a named coordinate, or -1.
  Eigen::Index find(const std::string& name) const;
};

/// Inverse CDF of the SBX spread factor density with index eta.
double sbx_alpha(double u, double eta);
/// Blend of one coordinate pair for spread factor alpha.
std::pair<double, double> sbx_blend(double x1, double x2, double alpha);

struct SbxOptions {
  double eta = 5.0;
  double probability = 0.7;  // per coordinate
};

std::pair<Eigen::VectorXd, Eigen::VectorXd> sbx_crossover(const Eigen::VectorXd& parent1,
                                                          const Eigen::VectorXd& parent2, const Bounds& bounds,
                                                          Rng& rng, const SbxOptions& options = {});

/// Perturbation for a uniform draw u in (0, 1); zero at u = 0.5, tends to -1 and 1 at the ends.
double poly_delta(double u, double eta);

struct MutationOptions {
  double eta = 10.0;
  double probability = 0.2;  // per coordinate
};

Eigen::VectorXd polynomial_mutation(const Eigen::VectorXd& x, const Bounds& bounds, Rng& rng,
                                    const MutationOptions& options = {});

struct KernelConfig {
  double w1 = 0.1;   // weight of the diffuse component
  double p1 = 0.0;   // local dof; 0 means d + 10
  double p2 = 0.0;   // diffuse dof; 0 means d + 2
  double w = 0.9;    // per-generation decay
  /// false: generation t of n gets weight w^(n-t); true: weight w^t.
  bool literal_weights = false;
  /// Scale the local component by (p1 - d - 1) so its mean is psi_n itself.
  bool match_mean = false;
  Eigen::MatrixXd psi_prior;  // empty means 0.5 I
};

/// Mixture of a local inverse-Wishart around the weighted history mean psi_n and a
/// diffuse inverse-Wishart around psi_prior.
class CovarianceKernel {
 public:
  struct Entry {
    Eigen::MatrixXd sigma;
    int rank = 1;
  };

  CovarianceKernel(Eigen::Index dim, KernelConfig config = {});

  Eigen::Index dim() const { return dim_; }
  const KernelConfig& config() const { return config_; }
  double p1() const { return p1_; }
  double p2() const { return p2_; }
  const Eigen::MatrixXd& psi_prior() const { return psi_prior_; }

  /// Appends one generation of accepted matrices with their ranks.
  void record_generation(std::vector<Entry> accepted);
  std::size_t generations() const { return history_.size(); }

  /// Weighted mean of the recorded matrices; psi_prior before any history.
  Eigen::MatrixXd psi_n() const;

  Eigen::MatrixXd sample(Rng& rng) const;
  Eigen::MatrixXd sample_local(Rng& rng) const;
  Eigen::MatrixXd sample_diffuse(Rng& rng) const;

 private:
  Eigen::Index dim_;
  KernelConfig config_;
  double p1_;
  double p2_;
  Eigen::MatrixXd psi_prior_;
  std::vector<Eigen::MatrixXd> generation_means_;
  std::vector<std::vector<Entry>> history_;
};

}  // namespace lobforge
