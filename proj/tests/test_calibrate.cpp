#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lobforge/calibrate.hpp"
#include "lobforge/error.hpp"
#include "lobforge/parallel.hpp"
#include "test_support.hpp"

using namespace lobforge;
using lobforge::testing::table1_row1;

namespace {

Bounds line(double lo, double hi) { return Bounds{{"x"}, Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)}; }

ObjectiveValue analytic(const Candidate& c, std::uint64_t) {
  const double x = c.x(0);
  return {{x * x, (x - 2) * (x - 2)}, false, {}};
}

Bounds model_bounds() {
  return bounds_from_json(Json::parse(R"({"mu0_lo_passive": [1, 50], "mu0_lo_direct": [0.5, 10],
      "mu0_mo": [0.1, 10], "gamma0": [-10, 10], "nu": [2.5, 50], "sigma_mo": [0.1, 10]})"),
                          8);
}

AuxCoefficients target_day(std::uint64_t seed, std::int64_t T) {
  SimConfig c;
  c.T = T;
  c.seed = seed;
  return fit_auxiliary(std::vector<SnapshotSeries>{simulate(table1_row1(), c).snapshots});
}

}  // namespace

TEST(Gaps, Examples) {
  AuxCoefficients a;
  a.beta1 << 1, 2, 3;
  AuxCoefficients b = a;
  EXPECT_EQ(coefficient_gaps(a, b), (Objectives{0, 0}));
  b.beta1 << 1, 2, 4;
  EXPECT_EQ(coefficient_gaps(a, b), (Objectives{1, 0}));
  b.beta2 << 0, 3, 0, 4;
  EXPECT_DOUBLE_EQ(coefficient_gaps(a, b)[1], 25.0);
  EXPECT_DOUBLE_EQ(coefficient_distance(a, b), std::sqrt(26.0));
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(7, 7);
  w(0, 0) = w(2, 2) = 4.0;
  EXPECT_DOUBLE_EQ(coefficient_distance(a, b, w), std::sqrt(4.0 + 25.0));
}

TEST(Layout, CanonicalNamesAndBuild) {
  const ParamLayout layout(model_bounds(), table1_row1());
  const auto& names = layout.bounds().names;
  EXPECT_EQ(names.front(), "mu0_lo_passive");
  EXPECT_EQ(names.back(), "sigma_mo");
  Eigen::VectorXd x = layout.extract(table1_row1());
  x(layout.bounds().find("nu")) = 7.5;
  const AgentParams p = layout.build(x, Eigen::MatrixXd());
  EXPECT_DOUBLE_EQ(p.nu, 7.5);
  EXPECT_EQ(p.sigma, table1_row1().sigma);
  EXPECT_EQ(layout.extract(p), x);
}

TEST(Layout, PerLevelSkew) {
  const Bounds b = bounds_from_json(Json::parse(R"({"gamma_lo": [-2, 2], "gamma_mo": [-2, 2]})"), 8);
  EXPECT_EQ(b.dim(), 9);
  const ParamLayout layout(b, table1_row1());
  EXPECT_TRUE(layout.per_level_skew());
  const Bounds mixed = bounds_from_json(Json::parse(R"({"gamma0": [-1, 1], "gamma_lo_2": [-1, 1]})"), 8);
  EXPECT_THROW(ParamLayout(mixed, table1_row1()), Error);
  EXPECT_THROW(bounds_from_json(Json::parse(R"({"unknown": [0, 1]})"), 8), Error);
}

TEST(Objective, DeterministicAndPenalised) {
  const AuxCoefficients target = target_day(1, 400);
  SimConfig sim;
  sim.T = 400;
  const ObjectiveValue a = objective_vector(table1_row1(), target, sim, 1, 77);
  const ObjectiveValue b = objective_vector(table1_row1(), target, sim, 1, 77);
  EXPECT_EQ(a.d, b.d);
  EXPECT_FALSE(a.penalized);
  // A frozen book has constant prices: the fit fails and is penalised.
  const AgentParams frozen =
      AgentParams::reference(1e-12, 1e-12, 1e-12, 0.0, 10.0, 1.0, Eigen::MatrixXd::Identity(8, 8));
  const ObjectiveValue p = objective_vector(frozen, target, sim, 1, 77);
  EXPECT_TRUE(p.penalized);
  EXPECT_EQ(p.d, (Objectives{kPenalty, kPenalty}));
}

TEST(Nsga2, AnalyticProblem) {
  Nsga2Config cfg;
  cfg.population = 40;
  cfg.generations = 40;
  cfg.seed = 3;
  const CalibrationReport r = run_nsga2(line(-5, 5), analytic, cfg);
  std::vector<Objectives> front;
  for (const auto& ind : r.front) {
    front.push_back(ind.objectives);
    EXPECT_GE(ind.candidate.x(0), -0.05);
    EXPECT_LE(ind.candidate.x(0), 2.05);
  }
  EXPECT_GE(hypervolume_2d(front, {5, 5}), 0.95 * lobforge::testing::analytic_front_hypervolume(5.0));
  for (std::size_t i = 0; i < front.size(); ++i)
    for (std::size_t j = 0; j < front.size(); ++j) EXPECT_FALSE(dominates(front[i], front[j]));
}

TEST(Nsga2, Deterministic) {
  Nsga2Config cfg;
  cfg.population = 12;
  cfg.generations = 5;
  cfg.sigma_dim = 3;
  cfg.jobs = 3;
  const CalibrationReport a = run_nsga2(line(-5, 5), analytic, cfg);
  cfg.jobs = 1;
  const CalibrationReport b = run_nsga2(line(-5, 5), analytic, cfg);
  ASSERT_EQ(a.population.size(), b.population.size());
  for (std::size_t i = 0; i < a.population.size(); ++i) {
    EXPECT_EQ(a.population[i].candidate.x, b.population[i].candidate.x);
    EXPECT_EQ(a.population[i].candidate.sigma, b.population[i].candidate.sigma);
    EXPECT_EQ(a.population[i].objectives, b.population[i].objectives);
  }
  EXPECT_EQ(report_to_json(a, nullptr).dump(), report_to_json(b, nullptr).dump());
}

TEST(Nsga2, ZeroGenerations) {
  Nsga2Config cfg;
  cfg.population = 10;
  cfg.generations = 0;
  const CalibrationReport r = run_nsga2(line(-5, 5), analytic, cfg);
  EXPECT_EQ(r.population.size(), 10u);
  EXPECT_EQ(r.traces.size(), 1u);
  for (const auto& ind : r.population) EXPECT_EQ(ind.objectives, analytic(ind.candidate, 0).d);
}

TEST(Nsga2, ElitismBoundsAndSpd) {
  Nsga2Config cfg;
  cfg.population = 16;
  cfg.generations = 15;
  cfg.sigma_dim = 4;
  cfg.keep_populations = true;
  cfg.seed = 9;
  const Bounds b = line(-5, 5);
  const CalibrationReport r = run_nsga2(b, analytic, cfg);
  ASSERT_EQ(r.populations.size(), 16u);
  std::vector<Objectives> seen;
  for (const auto& pop : r.populations) {
    const auto best = *std::min_element(pop.begin(), pop.end(), crowded_less);
    for (const auto& earlier : seen) EXPECT_FALSE(dominates(earlier, best.objectives));
    for (const auto& ind : pop) {
      seen.push_back(ind.objectives);
      EXPECT_TRUE(b.contains(ind.candidate.x));
      EXPECT_NO_THROW(cholesky_lower(ind.candidate.sigma));
    }
  }
  EXPECT_EQ(r.psi_history.size(), 16u);
}

TEST(Nsga2, CommonSeedsPerGeneration) {
  Nsga2Config cfg;
  cfg.population = 8;
  cfg.generations = 3;
  cfg.keep_populations = true;
  const CalibrationReport r = run_nsga2(line(-5, 5), analytic, cfg);
  for (std::size_t g = 1; g < r.traces.size(); ++g) EXPECT_NE(r.traces[g].eval_seed, r.traces[g - 1].eval_seed);
}

TEST(Nsga2, FailuresArePenalisedNotFatal) {
  Nsga2Config cfg;
  cfg.population = 8;
  cfg.generations = 2;
  const CalibrationReport r = run_nsga2(
      line(-5, 5),
      [](const Candidate& c, std::uint64_t) -> ObjectiveValue {
        if (c.x(0) > 0) return {{kPenalty, kPenalty}, true, "boom"};
        return {{c.x(0) * c.x(0), 1.0}, false, {}};
      },
      cfg);
  EXPECT_EQ(r.population.size(), 8u);
}

TEST(Single, OneIterationIsInitialDraw) {
  SingleConfig cfg;
  cfg.iterations = 1;
  cfg.seed = 4;
  const Bounds b = line(-5, 5);
  const SingleReport r = indirect_inference_single(b, [](const Candidate& c, std::uint64_t) { return std::fabs(c.x(0)); }, cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.best_distance, std::fabs(r.best.x(0)));
}

TEST(Single, MonotoneAndConverges) {
  std::vector<double> finals;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SingleConfig cfg;
    cfg.iterations = 500;
    cfg.seed = seed;
    const SingleReport r = indirect_inference_single(
        line(-5, 5),
        [](const Candidate& c, std::uint64_t) {
          // Concatenated analytic objective; zero at the utopia point is unattainable, so
          // measure the gap to the minimum of f1 + f2 (2 at x = 1).
          const double x = c.x(0);
          return x * x + (x - 2) * (x - 2) - 2.0;
        },
        cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
    finals.push_back(r.best_distance);
  }
  std::sort(finals.begin(), finals.end());
  EXPECT_LT(0.5 * (finals[4] + finals[5]), 1e-2);
}

TEST(Coverage, GuardAndProportions) {
  const AuxCoefficients target = target_day(5, 500);
  CoverageConfig cc;
  cc.sim.T = 500;
  cc.replications = 2;
  try {
    coverage_analysis({table1_row1()}, target, cc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientReplications);
  }
  cc.replications = 20;
  const CoverageTable t = coverage_analysis({table1_row1()}, target, cc);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.coefficients, coefficient_names());
  EXPECT_GE(t.overall, 0.0);
  EXPECT_LE(t.overall, 1.0);
  EXPECT_EQ(t.rows[0].used + t.rows[0].excluded, 20);
  for (double p : t.per_coefficient) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(Quantile, TypeSeven) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({0, 10}, 0.25), 2.5);
}

TEST(SelfCalibration, TruthBeatsRandomBaselines) {
  const ParamLayout layout(model_bounds(), table1_row1());
  SimConfig sim;
  sim.T = 500;
  std::vector<double> truth_d1, truth_d2, rand_d1, rand_d2;
  std::vector<std::vector<Objectives>> per_seed(20);
  parallel_for(20, default_jobs(), [&](std::size_t s) {
    const AuxCoefficients target = target_day(300 + s, 500);
    per_seed[s].push_back(objective_vector(table1_row1(), target, sim, 1, 900 + s).d);
    Rng rng(400 + s);
    const AgentParams random = layout.build(layout.bounds().sample_uniform(rng), Eigen::MatrixXd());
    per_seed[s].push_back(objective_vector(random, target, sim, 1, 900 + s).d);
  });
  for (const auto& v : per_seed) {
    truth_d1.push_back(v[0][0]);
    truth_d2.push_back(v[0][1]);
    rand_d1.push_back(v[1][0]);
    rand_d2.push_back(v[1][1]);
  }
  EXPECT_LE(5.0 * quantile(truth_d1, 0.5), quantile(rand_d1, 0.5));
  EXPECT_LE(5.0 * quantile(truth_d2, 0.5), quantile(rand_d2, 0.5));
}

TEST(Reports, FrontCsvColumns) {
  const ParamLayout layout(model_bounds(), table1_row1());
  CalibrationReport r;
  Individual ind;
  ind.candidate.x = layout.extract(table1_row1());
  ind.candidate.sigma = table1_row1().sigma;
  ind.objectives = {0.5, 0.25};
  ind.rank = 1;
  r.front.push_back(ind);
  const std::string csv = front_csv(r, layout);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "mu0_lo_passive,mu0_lo_direct,mu0_mo,gamma0,nu,sigma_mo,trace_sigma,d1,d2");
  const Json j = report_to_json(r, &layout);
  EXPECT_TRUE(j.contains("front"));
}
