#include "lobforge/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lobforge/error.hpp"
#include "lobforge/parallel.hpp"
#include "lobforge/snapshot.hpp"

namespace lobforge {

namespace {

const std::vector<std::string> kLeadingNames = {"mu0_lo_passive", "mu0_lo_direct", "mu0_mo", "gamma0"};
const std::vector<std::string> kTrailingNames = {"gamma_mo", "nu", "sigma_mo", "cancel_factor"};
const std::string kLevelPrefix = "gamma_lo_";

// Position of a name in the canonical order, or -1 if unknown.
int canonical_rank(const std::string& name, int levels) {
  for (std::size_t i = 0; i < kLeadingNames.size(); ++i)
    if (name == kLeadingNames[i]) return static_cast<int>(i);
  if (name.rfind(kLevelPrefix, 0) == 0) {
    const std::string idx = name.substr(kLevelPrefix.size());
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) return -1;
    const int i = std::stoi(idx);
    if (i >= levels) return -1;
    return static_cast<int>(kLeadingNames.size()) + i;
  }
  for (std::size_t i = 0; i < kTrailingNames.size(); ++i)
    if (name == kTrailingNames[i]) return static_cast<int>(kLeadingNames.size()) + levels + static_cast<int>(i);
  return -1;
}

int level_index(const std::string& name) { return std::stoi(name.substr(kLevelPrefix.size())); }

std::uint64_t generation_seed(std::uint64_t seed, int generation) {
  return splitmix64(seed ^ splitmix64(0x5eedULL + static_cast<std::uint64_t>(generation)));
}

bool finite_all(const Objectives& d) {
  return std::all_of(d.begin(), d.end(), [](double v) { return std::isfinite(v); });
}

void assign_fitness(std::vector<Individual>& pop) {
  std::vector<Objectives> pts;
  pts.reserve(pop.size());
  for (const auto& ind : pop) pts.push_back(ind.objectives);
  const auto ranks = non_dominated_sort(pts);
  for (const auto& front : fronts_from_ranks(ranks)) {
    std::vector<Objectives> fpts;
    for (int i : front) fpts.push_back(pts[static_cast<std::size_t>(i)]);
    const auto cd = crowding_distance(fpts);
    for (std::size_t k = 0; k < front.size(); ++k) {
      auto& ind = pop[static_cast<std::size_t>(front[k])];
      ind.rank = ranks[static_cast<std::size_t>(front[k])];
      ind.crowding = cd[k];
    }
  }
}

void evaluate_all(std::vector<Individual>& pop, const Evaluator& evaluate, std::uint64_t seed, int jobs) {
  parallel_for(pop.size(), jobs, [&](std::size_t i) {
    ObjectiveValue v = evaluate(pop[i].candidate, seed);
    if (v.d.empty() || !finite_all(v.d)) {
      v.d.assign(std::max<std::size_t>(v.d.size(), 2), kPenalty);
      v.penalized = true;
    }
    pop[i].objectives = std::move(v.d);
    pop[i].penalized = v.penalized;
    pop[i].eval_seed = seed;
  });
  for (const auto& ind : pop)
    if (ind.objectives.size() != pop.front().objectives.size())
      throw Error(ErrorCode::LengthMismatch, "evaluator returned objective vectors of different lengths");
}

std::vector<Individual> select_survivors(std::vector<Individual> combined, std::size_t n) {
  assign_fitness(combined);
  std::vector<std::size_t> order(combined.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return crowded_less(combined[a], combined[b]); });
  std::vector<Individual> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n && i < order.size(); ++i) out.push_back(std::move(combined[order[i]]));
  assign_fitness(out);
  return out;
}

const Individual& tournament(const std::vector<Individual>& pop, Rng& rng) {
  const auto a = static_cast<std::size_t>(rng.below(pop.size()));
  auto b = static_cast<std::size_t>(rng.below(pop.size() - 1));
  if (b >= a) ++b;
  return crowded_less(pop[b], pop[a]) ? pop[b] : pop[a];
}

GenerationTrace make_trace(int generation, std::uint64_t seed, const std::vector<Individual>& pop,
                           const std::optional<CovarianceKernel>& kernel) {
  GenerationTrace t;
  t.generation = generation;
  t.eval_seed = seed;
  const std::size_t k = pop.front().objectives.size();
  t.best.assign(k, std::numeric_limits<double>::infinity());
  for (const auto& ind : pop) {
    for (std::size_t j = 0; j < k; ++j) t.best[j] = std::min(t.best[j], ind.objectives[j]);
    if (ind.rank == 1) ++t.front_size;
    t.objectives.push_back(ind.objectives);
  }
  t.psi_trace = kernel ? kernel->psi_n().trace() : 0.0;
  return t;
}

void record_kernel(std::optional<CovarianceKernel>& kernel, const std::vector<Individual>& pop) {
  if (!kernel) return;
  std::vector<CovarianceKernel::Entry> entries;
  entries.reserve(pop.size());
  for (const auto& ind : pop) entries.push_back({ind.candidate.sigma, ind.rank});
  kernel->record_generation(std::move(entries));
}

Json objectives_json(const Objectives& d) {
  Json j = Json::array();
  for (double v : d) j.push_back(v);
  return j;
}

}  // namespace

ParamLayout::ParamLayout(Bounds bounds, AgentParams base) : bounds_(std::move(bounds)), base_(std::move(base)) {
  bounds_.validate();
  bool common = false;
  bool split = false;
  for (const auto& n : bounds_.names) {
    if (canonical_rank(n, base_.levels()) < 0) throw Error(ErrorCode::InvalidConfig, "unknown parameter '" + n + "'");
    if (n == "gamma0") common = true;
    if (n == "gamma_mo" || n.rfind(kLevelPrefix, 0) == 0) split = true;
  }
  if (common && split)
    throw Error(ErrorCode::InvalidConfig, "gamma0 cannot be combined with gamma_lo_<i> or gamma_mo");
  if (base_.skew_lo.size() != base_.levels() || base_.m_lo.size() != base_.levels())
    throw Error(ErrorCode::InvalidConfig, "base parameters have the wrong number of levels");
}

bool ParamLayout::per_level_skew() const {
  return std::any_of(bounds_.names.begin(), bounds_.names.end(),
                     [](const std::string& n) { return n.rfind(kLevelPrefix, 0) == 0; });
}

AgentParams ParamLayout::build(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma) const {
  if (x.size() != bounds_.dim()) throw Error(ErrorCode::LengthMismatch, "candidate and bounds differ in length");
  AgentParams p = base_;
  for (std::size_t i = 0; i < bounds_.names.size(); ++i) {
    const std::string& n = bounds_.names[i];
    const double v = x(static_cast<Eigen::Index>(i));
    if (n == "mu0_lo_passive") p.mu0_lo_passive = v;
    else if (n == "mu0_lo_direct") p.mu0_lo_direct = v;
    else if (n == "mu0_mo") p.mu0_mo = v;
    else if (n == "gamma0") {
      p.skew_lo.setConstant(v);
      p.skew_mo = v;
    } else if (n == "gamma_mo") p.skew_mo = v;
    else if (n == "nu") p.nu = v;
    else if (n == "sigma_mo") p.sigma_mo = v;
    else if (n == "cancel_factor") p.cancel_factor = v;
    else p.skew_lo(level_index(n)) = v;
  }
  if (sigma.size() > 0) p.sigma = sigma;
  return p;
}

Eigen::VectorXd ParamLayout::extract(const AgentParams& p) const {
  Eigen::VectorXd x(bounds_.dim());
  for (std::size_t i = 0; i < bounds_.names.size(); ++i) {
    const std::string& n = bounds_.names[i];
    double v = 0.0;
    if (n == "mu0_lo_passive") v = p.mu0_lo_passive;
    else if (n == "mu0_lo_direct") v = p.mu0_lo_direct;
    else if (n == "mu0_mo") v = p.mu0_mo;
    else if (n == "gamma0" || n == "gamma_mo") v = p.skew_mo;
    else if (n == "nu") v = p.nu;
    else if (n == "sigma_mo") v = p.sigma_mo;
    else if (n == "cancel_factor") v = p.cancel_factor;
    else v = p.skew_lo(level_index(n));
    x(static_cast<Eigen::Index>(i)) = v;
  }
  return x;
}

Bounds bounds_from_json(const Json& j, int levels) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "bounds must be a JSON object");
  std::vector<std::pair<int, std::pair<std::string, std::pair<double, double>>>> items;
  auto pair_of = [](const std::string& name, const Json& v) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw Error(ErrorCode::InvalidConfig, "bounds for '" + name + "' must be [lower, upper]");
    return std::make_pair(v[0].get<double>(), v[1].get<double>());
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "gamma_lo") {
      const auto lu = pair_of(key, value);
      for (int i = 0; i < levels; ++i) {
        const std::string n = kLevelPrefix + std::to_string(i);
        items.push_back({canonical_rank(n, levels), {n, lu}});
      }
      continue;
    }
    const int r = canonical_rank(key, levels);
    if (r < 0) throw Error(ErrorCode::InvalidConfig, "unknown parameter '" + key + "' in bounds");
    items.push_back({r, {key, pair_of(key, value)}});
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < items.size(); ++i)
    if (items[i].first == items[i - 1].first)
      throw Error(ErrorCode::InvalidConfig, "parameter '" + items[i].second.first + "' bounded twice");
  Bounds b;
  b.lower.resize(static_cast<Eigen::Index>(items.size()));
  b.upper.resize(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    b.names.push_back(items[i].second.first);
    b.lower(static_cast<Eigen::Index>(i)) = items[i].second.second.first;
    b.upper(static_cast<Eigen::Index>(i)) = items[i].second.second.second;
  }
  if (b.names.empty()) throw Error(ErrorCode::InvalidConfig, "bounds are empty");
  b.validate();
  return b;
}

Json bounds_to_json(const Bounds& b) {
  Json j = Json::object();
  for (std::size_t i = 0; i < b.names.size(); ++i)
    j[b.names[i]] = {b.lower(static_cast<Eigen::Index>(i)), b.upper(static_cast<Eigen::Index>(i))};
  return j;
}

Objectives coefficient_gaps(const AuxCoefficients& simulated, const AuxCoefficients& target) {
  return {(simulated.beta1 - target.beta1).squaredNorm(), (simulated.beta2 - target.beta2).squaredNorm()};
}

std::uint64_t realisation_seed(std::uint64_t eval_seed, int m) {
  return splitmix64(splitmix64(eval_seed) + static_cast<std::uint64_t>(m));
}

namespace {

AuxCoefficients simulate_and_fit(const AgentParams& theta, const SimConfig& sim, int M, std::uint64_t eval_seed) {
  theta.validate();
  std::vector<SnapshotSeries> days;
  days.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) {
    SimConfig c = sim;
    c.seed = realisation_seed(eval_seed, m);
    days.push_back(simulate(theta, c).snapshots);
  }
  return fit_auxiliary(days);
}

}  // namespace

ObjectiveValue objective_vector(const AgentParams& theta, const AuxCoefficients& target, const SimConfig& sim,
                                int M, std::uint64_t eval_seed) {
  if (M < 1) throw Error(ErrorCode::InvalidConfig, "M must be >= 1");
  ObjectiveValue out;
  try {
    out.d = coefficient_gaps(simulate_and_fit(theta, sim, M, eval_seed), target);
    if (!finite_all(out.d)) throw Error(ErrorCode::DegenerateSeries, "non-finite auxiliary coefficients");
  } catch (const std::exception& e) {
    out.d.assign(2, kPenalty);
    out.penalized = true;
    out.failure = e.what();
  }
  return out;
}

bool crowded_less(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

CalibrationReport run_nsga2(const Bounds& bounds, const Evaluator& evaluate, const Nsga2Config& config) {
  bounds.validate();
  if (config.population < 2) throw Error(ErrorCode::InvalidConfig, "population must be >= 2");
  if (config.generations < 0) throw Error(ErrorCode::InvalidConfig, "generations must be >= 0");
  const auto n = static_cast<std::size_t>(config.population);
  Rng rng(config.seed);
  std::optional<CovarianceKernel> kernel;
  if (config.sigma_dim > 0) kernel.emplace(config.sigma_dim, config.kernel);

  CalibrationReport report;
  std::vector<Individual> pop(n);
  for (auto& ind : pop) {
    ind.candidate.x = bounds.sample_uniform(rng);
    if (kernel) ind.candidate.sigma = kernel->sample_local(rng);
  }
  std::uint64_t seed = generation_seed(config.seed, 0);
  evaluate_all(pop, evaluate, seed, config.jobs);
  assign_fitness(pop);
  record_kernel(kernel, pop);
  report.traces.push_back(make_trace(0, seed, pop, kernel));
  if (kernel) report.psi_history.push_back(kernel->psi_n());
  if (config.keep_populations) report.populations.push_back(pop);

  for (int g = 1; g <= config.generations; ++g) {
    std::vector<Individual> offspring;
    offspring.reserve(n);
    while (offspring.size() < n) {
      const Individual& a = tournament(pop, rng);
      const Individual& b = tournament(pop, rng);
      auto [x1, x2] = sbx_crossover(a.candidate.x, b.candidate.x, bounds, rng, config.sbx);
      for (auto* x : {&x1, &x2}) {
        if (offspring.size() == n) break;
        Individual child;
        child.candidate.x = polynomial_mutation(*x, bounds, rng, config.mutation);
        if (kernel) child.candidate.sigma = kernel->sample(rng);
        offspring.push_back(std::move(child));
      }
    }
    seed = generation_seed(config.seed, g);
    evaluate_all(offspring, evaluate, seed, config.jobs);
    std::vector<Individual> combined = std::move(pop);
    for (auto& c : offspring) combined.push_back(std::move(c));
    pop = select_survivors(std::move(combined), n);
    record_kernel(kernel, pop);
    report.traces.push_back(make_trace(g, seed, pop, kernel));
    if (kernel) report.psi_history.push_back(kernel->psi_n());
    if (config.keep_populations) report.populations.push_back(pop);
  }

  report.population = pop;
  for (const auto& ind : pop)
    if (ind.rank == 1) report.front.push_back(ind);
  std::stable_sort(report.front.begin(), report.front.end(),
                   [](const Individual& a, const Individual& b) { return a.objectives < b.objectives; });
  return report;
}

Evaluator model_evaluator(const ParamLayout& layout, const AuxCoefficients& target, const SimConfig& sim, int M) {
  return [layout, target, sim, M](const Candidate& c, std::uint64_t seed) {
    try {
      return objective_vector(layout.build(c.x, c.sigma), target, sim, M, seed);
    } catch (const std::exception& e) {
      return ObjectiveValue{{kPenalty, kPenalty}, true, e.what()};
    }
  };
}

CalibrationReport run_nsga2(const ParamLayout& layout, const AuxCoefficients& target, const SimConfig& sim,
                            int M, Nsga2Config config) {
  config.sigma_dim = layout.sigma_dim();
  return run_nsga2(layout.bounds(), model_evaluator(layout, target, sim, M), config);
}

SingleReport indirect_inference_single(const Bounds& bounds, const DistanceEvaluator& distance,
                                       const SingleConfig& config) {
  bounds.validate();
  if (config.iterations < 1) throw Error(ErrorCode::InvalidConfig, "iterations must be >= 1");
  if (!(config.local_scale_min > 0.0 && config.local_scale_min <= config.local_scale_max))
    throw Error(ErrorCode::InvalidConfig, "local scales must satisfy 0 < min <= max");
  Rng rng(config.seed);
  std::optional<CovarianceKernel> kernel;
  if (config.sigma_dim > 0) kernel.emplace(config.sigma_dim, config.kernel);
  const std::uint64_t seed = generation_seed(config.seed, 0);
  auto eval = [&](const Candidate& c) {
    const double d = distance(c, seed);
    return std::isfinite(d) ? d : std::numeric_limits<double>::infinity();
  };

  SingleReport out;
  out.best.x = bounds.sample_uniform(rng);
  if (kernel) out.best.sigma = kernel->sample_local(rng);
  out.best_distance = eval(out.best);
  out.trace.push_back(out.best_distance);
  const double log_min = std::log(config.local_scale_min);
  const double log_max = std::log(config.local_scale_max);
  const Eigen::VectorXd range = bounds.range();
  for (int j = 2; j <= config.iterations; ++j) {
    Candidate c;
    if (rng.uniform() < config.local_probability) {
      const double scale = std::exp(log_min + rng.uniform() * (log_max - log_min));
      c.x = out.best.x;
      for (Eigen::Index k = 0; k < c.x.size(); ++k) c.x(k) += scale * range(k) * rng.normal();
      c.x = bounds.clamp(std::move(c.x));
      if (kernel) {
        const double shift = kernel->p1() - static_cast<double>(kernel->dim()) - 1.0;
        c.sigma = shift > 0.0 ? sample_inverse_wishart(shift * out.best.sigma, kernel->p1(), rng)
                              : kernel->sample_local(rng);
      }
    } else {
      c.x = bounds.sample_uniform(rng);
      if (kernel) c.sigma = kernel->sample_diffuse(rng);
    }
    const double d = eval(c);
    if (d < out.best_distance) {
      out.best = std::move(c);
      out.best_distance = d;
      ++out.accepted;
    }
    out.trace.push_back(out.best_distance);
  }
  return out;
}

double coefficient_distance(const AuxCoefficients& simulated, const AuxCoefficients& target,
                            const std::optional<Eigen::MatrixXd>& weight) {
  const Eigen::VectorXd d = simulated.concatenated() - target.concatenated();
  if (!weight) return d.norm();
  if (weight->rows() != d.size() || weight->cols() != d.size())
    throw Error(ErrorCode::LengthMismatch, "weight matrix must be 7 x 7");
  return std::sqrt(std::max(0.0, d.dot(*weight * d)));
}

DistanceEvaluator model_distance(const ParamLayout& layout, const AuxCoefficients& target, const SimConfig& sim,
                                 int M, std::optional<Eigen::MatrixXd> weight) {
  if (weight) cholesky_lower(*weight);
  return [layout, target, sim, M, weight](const Candidate& c, std::uint64_t seed) {
    try {
      return coefficient_distance(simulate_and_fit(layout.build(c.x, c.sigma), sim, M, seed), target, weight);
    } catch (const std::exception&) {
      return kPenalty;
    }
  };
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::DegenerateSeries, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<std::string> coefficient_names() {
  return {"a0", "a1", "b1", "theta_bid", "log_sigma_bid", "theta_ask", "log_sigma_ask"};
}

CoverageTable coverage_analysis(const std::vector<AgentParams>& front, const AuxCoefficients& target,
                                const CoverageConfig& config) {
  if (config.replications < kMinReplications)
    throw Error(ErrorCode::InsufficientReplications,
                "coverage needs at least " + std::to_string(kMinReplications) + " replications");
  if (front.empty()) throw Error(ErrorCode::InvalidConfig, "coverage needs a non-empty front");
  if (!(config.level > 0.0 && config.level < 1.0)) throw Error(ErrorCode::InvalidConfig, "level must lie in (0, 1)");
  const Eigen::VectorXd t = target.concatenated();
  const auto k = static_cast<std::size_t>(t.size());
  const auto reps = static_cast<std::size_t>(config.replications);
  const double tail = (1.0 - config.level) / 2.0;

  CoverageTable table;
  table.coefficients = coefficient_names();
  table.per_coefficient.assign(k, 0.0);
  for (const auto& theta : front) {
    std::vector<std::optional<Eigen::VectorXd>> fits(reps);
    parallel_for(reps, config.jobs, [&](std::size_t r) {
      try {
        fits[r] = simulate_and_fit(theta, config.sim, 1, realisation_seed(config.seed, static_cast<int>(r)))
                      .concatenated();
        if (!fits[r]->allFinite()) fits[r].reset();
      } catch (const std::exception&) {
        fits[r].reset();
      }
    });
    CoverageRow row;
    row.covered.assign(k, false);
    row.lower = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(k), std::numeric_limits<double>::quiet_NaN());
    row.upper = row.lower;
    std::vector<std::vector<double>> samples(k);
    for (const auto& f : fits) {
      if (!f) {
        ++row.excluded;
        continue;
      }
      ++row.used;
      for (std::size_t c = 0; c < k; ++c) samples[c].push_back((*f)(static_cast<Eigen::Index>(c)));
    }
    if (row.used >= 2) {
      int hits = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        row.lower(ci) = quantile(samples[c], tail);
        row.upper(ci) = quantile(samples[c], 1.0 - tail);
        row.covered[c] = t(ci) >= row.lower(ci) && t(ci) <= row.upper(ci);
        hits += row.covered[c] ? 1 : 0;
        if (row.covered[c]) table.per_coefficient[c] += 1.0;
      }
      row.proportion = static_cast<double>(hits) / static_cast<double>(k);
    }
    table.overall += row.proportion;
    table.rows.push_back(std::move(row));
  }
  const double m = static_cast<double>(front.size());
  for (auto& p : table.per_coefficient) p /= m;
  table.overall /= m;
  return table;
}

namespace {

Json individual_json(const Individual& ind, const ParamLayout* layout) {
  Json j;
  Json x = Json::object();
  for (Eigen::Index i = 0; i < ind.candidate.x.size(); ++i) {
    const std::string name = layout ? layout->bounds().names[static_cast<std::size_t>(i)] : "x" + std::to_string(i);
    x[name] = ind.candidate.x(i);
  }
  j["x"] = x;
  if (ind.candidate.sigma.size() > 0) {
    j["sigma"] = matrix_to_json(ind.candidate.sigma);
    j["trace_sigma"] = ind.candidate.sigma.trace();
  }
  if (layout) j["params"] = params_to_json(layout->build(ind.candidate.x, ind.candidate.sigma));
  j["objectives"] = objectives_json(ind.objectives);
  j["rank"] = ind.rank;
  j["crowding"] = std::isfinite(ind.crowding) ? Json(ind.crowding) : Json("inf");
  j["eval_seed"] = ind.eval_seed;
  j["penalized"] = ind.penalized;
  return j;
}

}  // namespace

Json coverage_to_json(const CoverageTable& table) {
  Json j;
  j["coefficients"] = table.coefficients;
  j["per_coefficient"] = table.per_coefficient;
  j["overall"] = table.overall;
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json row;
    row["covered"] = r.covered;
    Json lo = Json::array();
    Json hi = Json::array();
    for (Eigen::Index i = 0; i < r.lower.size(); ++i) {
      lo.push_back(std::isfinite(r.lower(i)) ? Json(r.lower(i)) : Json(nullptr));
      hi.push_back(std::isfinite(r.upper(i)) ? Json(r.upper(i)) : Json(nullptr));
    }
    row["lower"] = lo;
    row["upper"] = hi;
    row["used"] = r.used;
    row["excluded"] = r.excluded;
    row["proportion"] = r.proportion;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

Json report_to_json(const CalibrationReport& report, const ParamLayout* layout) {
  Json j;
  if (layout) j["bounds"] = bounds_to_json(layout->bounds());
  Json front = Json::array();
  for (const auto& ind : report.front) front.push_back(individual_json(ind, layout));
  j["front"] = front;
  Json pop = Json::array();
  for (const auto& ind : report.population) pop.push_back(individual_json(ind, layout));
  j["population"] = pop;
  Json traces = Json::array();
  for (const auto& t : report.traces) {
    Json tj;
    tj["generation"] = t.generation;
    tj["eval_seed"] = t.eval_seed;
    tj["best"] = objectives_json(t.best);
    tj["front_size"] = t.front_size;
    tj["psi_trace"] = t.psi_trace;
    Json objs = Json::array();
    for (const auto& o : t.objectives) objs.push_back(objectives_json(o));
    tj["objectives"] = objs;
    traces.push_back(tj);
  }
  j["traces"] = traces;
  Json psi = Json::array();
  for (const auto& m : report.psi_history) psi.push_back(matrix_to_json(m));
  j["psi_history"] = psi;
  if (!report.populations.empty()) {
    Json gens = Json::array();
    for (const auto& p : report.populations) {
      Json g = Json::array();
      for (const auto& ind : p) g.push_back(individual_json(ind, layout));
      gens.push_back(g);
    }
    j["populations"] = gens;
  }
  if (report.coverage) j["coverage"] = coverage_to_json(*report.coverage);
  return j;
}

std::string front_csv(const CalibrationReport& report, const ParamLayout& layout) {
  std::ostringstream out;
  const int levels = layout.base().levels();
  const bool per_level = layout.per_level_skew();
  out << "mu0_lo_passive,mu0_lo_direct,mu0_mo";
  if (per_level) {
    for (int i = 0; i < levels; ++i) out << ",gamma_lo_" << i;
    out << ",gamma_mo";
  } else {
    out << ",gamma0";
  }
  out << ",nu,sigma_mo,trace_sigma,d1,d2\n";
  for (const auto& ind : report.front) {
    const AgentParams p = layout.build(ind.candidate.x, ind.candidate.sigma);
    out << format_double(p.mu0_lo_passive) << ',' << format_double(p.mu0_lo_direct) << ','
        << format_double(p.mu0_mo);
    if (per_level) {
      for (int i = 0; i < levels; ++i) out << ',' << format_double(p.skew_lo(i));
      out << ',' << format_double(p.skew_mo);
    } else {
      out << ',' << format_double(p.skew_mo);
    }
    out << ',' << format_double(p.nu) << ',' << format_double(p.sigma_mo) << ',' << format_double(p.sigma.trace());
    for (double d : ind.objectives) out << ',' << format_double(d);
    out << '\n';
  }
  return out.str();
}

}  // namespace lobforge
