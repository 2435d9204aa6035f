#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lobforge/agents.hpp"
#include "lobforge/auxiliary.hpp"
#include "lobforge/operators.hpp"
#include "lobforge/pareto.hpp"
#include "lobforge/params_io.hpp"

namespace lobforge {

inline constexpr double kPenalty = 1e9;

/// Maps a bounded scalar vector (plus Sigma) onto AgentParams. Recognised names:
/// mu0_lo_passive, mu0_lo_direct, mu0_mo, gamma0 (every level and market orders),
/// gamma_lo_<i> (level index i = s + l_d - 1), gamma_mo, nu, sigma_mo, cancel_factor.
/// Parameters without bounds keep their value from `base`.
class ParamLayout {
 public:
  ParamLayout(Bounds bounds, AgentParams base);

  const Bounds& bounds() const { return bounds_; }
  const AgentParams& base() const { return base_; }
  Eigen::Index sigma_dim() const { return base_.levels(); }
  bool per_level_skew() const;

  /// Candidate to parameters; an empty sigma keeps the base Sigma.
  AgentParams build(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma) const;
  /// Parameters to the scalar vector (not clamped).
  Eigen::VectorXd extract(const AgentParams& theta) const;

 private:
  Bounds bounds_;
  AgentParams base_;
};

/// Bounds from {"name": [lower, upper], ...}. "gamma_lo": [l, u] expands to one
/// entry per level; names are put in canonical order.
Bounds bounds_from_json(const Json& j, int levels);
Json bounds_to_json(const Bounds& b);

struct ObjectiveValue {
  Objectives d;  // (D1, D2) squared L2 gaps of beta1 and beta2
  bool penalized = false;
  std::string failure;
};

/// Squared L2 gaps between simulated and target auxiliary coefficients.
Objectives coefficient_gaps(const AuxCoefficients& simulated, const AuxCoefficients& target);

/// Seed of realisation m under evaluation seed s.
std::uint64_t realisation_seed(std::uint64_t eval_seed, int m);

/// Simulates M days with seeds derived from eval_seed, fits the pooled auxiliary
/// models and returns the gaps. Any failure gives (kPenalty, kPenalty) with the flag set.
ObjectiveValue objective_vector(const AgentParams& theta, const AuxCoefficients& target, const SimConfig& sim,
                                int M, std::uint64_t eval_seed);

struct Candidate {
  Eigen::VectorXd x;
  Eigen::MatrixXd sigma;  // empty when the search has no covariance part
};

using Evaluator = std::function<ObjectiveValue(const Candidate&, std::uint64_t eval_seed)>;

struct Individual {
  Candidate candidate;
  Objectives objectives;
  int rank = 0;
  double crowding = 0.0;
  std::uint64_t eval_seed = 0;
  bool penalized = false;
};

struct GenerationTrace {
  int generation = 0;
  std::uint64_t eval_seed = 0;
  Objectives best;  // per-objective minimum over the selected population
  std::size_t front_size = 0;
  double psi_trace = 0.0;
  std::vector<Objectives> objectives;  // selected population
};

struct Nsga2Config {
  int population = 40;
  int generations = 40;
  SbxOptions sbx;
  MutationOptions mutation;
  /// 0 disables the covariance part of candidates.
  Eigen::Index sigma_dim = 0;
  KernelConfig kernel;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool keep_populations = false;
};

struct CoverageRow {
  std::vector<bool> covered;  // per coefficient
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int used = 0;
  int excluded = 0;
  double proportion = 0.0;
};

struct CoverageTable {
  std::vector<std::string> coefficients;
  std::vector<CoverageRow> rows;  // one per front member
  std::vector<double> per_coefficient;  // proportion of front members covering each coefficient
  double overall = 0.0;
};

struct CalibrationReport {
  std::vector<Individual> population;
  std::vector<Individual> front;
  std::vector<GenerationTrace> traces;
  std::vector<Eigen::MatrixXd> psi_history;  // psi_n after each generation
  std::vector<std::vector<Individual>> populations;  // filled when keep_populations
  std::optional<CoverageTable> coverage;
};

/// NSGA-II with elitist (parents + offspring) selection by rank then crowding,
/// binary tournaments, SBX, polynomial mutation and the covariance kernel.
/// Every individual of one generation is evaluated with the same seed.
CalibrationReport run_nsga2(const Bounds& bounds, const Evaluator& evaluate, const Nsga2Config& config);

/// Orders by rank, then larger crowding. Used by tournaments and reports.
bool crowded_less(const Individual& a, const Individual& b);

/// Evaluator for the agent model against fitted target coefficients.
Evaluator model_evaluator(const ParamLayout& layout, const AuxCoefficients& target, const SimConfig& sim, int M);

CalibrationReport run_nsga2(const ParamLayout& layout, const AuxCoefficients& target, const SimConfig& sim,
                            int M, Nsga2Config config);

using DistanceEvaluator = std::function<double(const Candidate&, std::uint64_t eval_seed)>;

struct SingleConfig {
  int iterations = 500;
  double local_probability = 0.5;
  /// Local proposals are Gaussian with a per-proposal scale drawn log-uniformly
  /// between these fractions of each coordinate's range.
  double local_scale_min = 1e-4;
  double local_scale_max = 0.1;
  Eigen::Index sigma_dim = 0;
  KernelConfig kernel;
  std::uint64_t seed = 1;
};

struct SingleReport {
  Candidate best;
  double best_distance = 0.0;
  std::vector<double> trace;  // best distance after each iteration
  int accepted = 0;
};

/// Keep-best random search: iteration 1 evaluates a uniform draw, later
/// iterations propose either a fresh uniform draw or a local move around the best.
SingleReport indirect_inference_single(const Bounds& bounds, const DistanceEvaluator& distance,
                                       const SingleConfig& config);

/// Euclidean distance, or sqrt(d' W d) when a weight matrix is given.
double coefficient_distance(const AuxCoefficients& simulated, const AuxCoefficients& target,
                            const std::optional<Eigen::MatrixXd>& weight = std::nullopt);

DistanceEvaluator model_distance(const ParamLayout& layout, const AuxCoefficients& target, const SimConfig& sim,
                                 int M, std::optional<Eigen::MatrixXd> weight = std::nullopt);

struct CoverageConfig {
  int replications = 50;
  double level = 0.95;
  SimConfig sim;
  std::uint64_t seed = 1;
  int jobs = 1;
};

inline constexpr int kMinReplications = 20;

/// Type-7 sample quantile of unsorted data.
double quantile(std::vector<double> values, double p);

/// For each front member, simulates `replications` days, fits the auxiliary
/// models per day and checks whether each target coefficient lies inside the
/// central empirical interval. Failed realisations are excluded and counted.
/// Throws InsufficientReplications below kMinReplications.
CoverageTable coverage_analysis(const std::vector<AgentParams>& front, const AuxCoefficients& target,
                                const CoverageConfig& config);

std::vector<std::string> coefficient_names();

Json report_to_json(const CalibrationReport& report, const ParamLayout* layout);
Json coverage_to_json(const CoverageTable& table);
/// One row per front member: scalar parameters, trace of Sigma, objectives.
std::string front_csv(const CalibrationReport& report, const ParamLayout& layout);

}  // namespace lobforge
