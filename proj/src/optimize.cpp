#include "lobforge/optimize.hpp"

#include <cmath>
#include <limits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "gsl_quiet.hpp"

namespace lobforge {

namespace {

struct Ctx {
  const ScalarObjective* f;
  double fd_step;
};

Eigen::VectorXd to_eigen(const gsl_vector* v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) x(static_cast<Eigen::Index>(i)) = gsl_vector_get(v, i);
  return x;
}

double safe_eval(const ScalarObjective& f, const Eigen::VectorXd& x) {
  const double y = f(x);
  return std::isfinite(y) ? y : std::numeric_limits<double>::infinity();
}

double gsl_f(const gsl_vector* v, void* p) {
  auto* c = static_cast<Ctx*>(p);
  return safe_eval(*c->f, to_eigen(v));
}

void gsl_df(const gsl_vector* v, void* p, gsl_vector* g) {
  auto* c = static_cast<Ctx*>(p);
  const Eigen::VectorXd grad = numeric_gradient(*c->f, to_eigen(v), c->fd_step);
  for (std::size_t i = 0; i < g->size; ++i) {
    const double gi = grad(static_cast<Eigen::Index>(i));
    gsl_vector_set(g, i, std::isfinite(gi) ? gi : 0.0);
  }
}

void gsl_fdf(const gsl_vector* v, void* p, double* f, gsl_vector* g) {
  *f = gsl_f(v, p);
  gsl_df(v, p, g);
}

OptimResult run_bfgs(const ScalarObjective& f, const Eigen::VectorXd& x0, const OptimOptions& o) {
  const auto n = static_cast<std::size_t>(x0.size());
  Ctx ctx{&f, o.fd_step};
  gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, n, &ctx};
  gsl_vector* x = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0(static_cast<Eigen::Index>(i)));
  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
  OptimResult r;
  gsl_multimin_fdfminimizer_set(s, &fn, x, o.initial_step, o.line_tol);
  int status = GSL_CONTINUE;
  int iter = 0;
  while (iter < o.max_iter && std::isfinite(s->f)) {
    ++iter;
    if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
    status = gsl_multimin_test_gradient(s->gradient, o.grad_tol);
    if (status == GSL_SUCCESS) break;
  }
  r.x = to_eigen(s->x);
  r.f = s->f;
  r.iterations = iter;
  r.converged = status == GSL_SUCCESS;
  if (!r.converged && std::isfinite(r.f)) {
    // bfgs2 stops when the line search makes no progress; accept if the gradient is small.
    const Eigen::VectorXd g = numeric_gradient(f, r.x, o.fd_step);
    r.converged = g.allFinite() && g.cwiseAbs().maxCoeff() < o.accept_tol;
  }
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);
  return r;
}

OptimResult run_simplex(const ScalarObjective& f, const Eigen::VectorXd& x0, const OptimOptions& o) {
  const auto n = static_cast<std::size_t>(x0.size());
  Ctx ctx{&f, o.fd_step};
  gsl_multimin_function fn{&gsl_f, n, &ctx};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0(static_cast<Eigen::Index>(i)));
    gsl_vector_set(step, i, o.initial_step);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  int iter = 0;
  bool done = false;
  while (iter < 20 * o.max_iter) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10) == GSL_SUCCESS) {
      done = true;
      break;
    }
  }
  OptimResult r{to_eigen(s->x), s->fval, iter, done};
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return r;
}

}  // namespace

Eigen::VectorXd numeric_gradient(const ScalarObjective& f, const Eigen::VectorXd& x, double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::fabs(x(i)));
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd numeric_hessian(const ScalarObjective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& steps) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd p = x;
  auto at = [&](Eigen::Index i, double di, Eigen::Index j, double dj) {
    p = x;
    p(i) += di;
    p(j) += dj;
    return f(p);
  };
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = steps(i);
    h(i, i) = (at(i, hi, i, 0.0) - 2.0 * f0 + at(i, -hi, i, 0.0)) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = steps(j);
      const double v = (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj)) / (4.0 * hi * hj);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

OptimResult minimize(const ScalarObjective& f, const Eigen::VectorXd& x0, const OptimOptions& options) {
  detail::gsl_quiet();
  OptimResult best = run_bfgs(f, x0, options);
  if (!best.converged || !std::isfinite(best.f)) {
    const Eigen::VectorXd start = std::isfinite(best.f) ? best.x : x0;
    OptimResult nm = run_simplex(f, start, options);
    if (std::isfinite(nm.f) && (!std::isfinite(best.f) || nm.f < best.f)) {
      // Polish the simplex point once more with the quasi-Newton method.
      OptimResult polish = run_bfgs(f, nm.x, options);
      if (std::isfinite(polish.f) && polish.f <= nm.f) nm = polish;
      nm.iterations += best.iterations;
      best = nm;
    }
  }
  return best;
}

}  // namespace lobforge
