#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "otmarl/distribution.hpp"
#include "otmarl/errors.hpp"
#include "otmarl/matrix.hpp"
#include "otmarl/transport_plan.hpp"

namespace otmarl {

/// Entropic solve output. Beyond the plan and report it carries the converged
/// dual potentials in two flavors, both in original (unnormalized) cost units
/// and defined over the full ground:
///
///  - gradient potentials: the derivative of the entropic transport value
///    with respect to the marginal weights. At positive-weight points these
///    include an eps*log(weight) term; at zero-weight points the finite
///    mass-free extension is substituted, so only interior entries carry the
///    exact gradient meaning.
///  - mass-free potentials: the soft c-transform values, finite on the whole
///    ground. These are the right signal for reward shaping and for the
///    debiased alignment gradient, where the log-weight terms cancel.
struct SinkhornResult {
  TransportPlan plan;
  SolverReport report;
  std::vector<double> source_gradient_potential;
  std::vector<double> target_gradient_potential;
  std::vector<double> source_massfree_potential;
  std::vector<double> target_massfree_potential;
  double cost_scale = 1.0;  // max entry of the powered ground cost
  double epsilon = 0.0;     // dimensionless regularization, as requested
  double p = 1.0;
};

namespace detail {

inline double lse_pair_max(const std::vector<double>& scratch, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) m = std::max(m, scratch[t]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t t = 0; t < n; ++t) s += std::exp(scratch[t] - m);
  return m + std::log(s);
}

}  // namespace detail

/// Entropic optimal transport by log-domain Sinkhorn iterations. The powered
/// cost matrix is normalized internally by its largest entry, so epsilon is
/// dimensionless; cost_value is reported back in original units. Potentials
/// are kept additively (log domain) with bounded multiplicative corrections;
/// whenever a correction leaves the safe range, or a kernel product
/// underflows, the sweep is redone with explicit logsumexp updates and the
/// corrections are absorbed into the potentials. Iteration stops when the
/// largest marginal violation of the current iterate drops to tol or the
/// sweep budget runs out; running out is reported, not thrown.
///
/// The returned plan is additionally projected onto the exact marginal
/// polytope (row/column scaling plus a rank-one top-up), so its own marginal
/// error is at rounding level regardless of tol; the report's violation field
/// describes the final unprojected iterate, which is what the stopping rule
/// measured.
inline SinkhornResult sinkhorn_ot(const DiscreteDistribution& mu,
                                  const DiscreteDistribution& nu, double p,
                                  double epsilon, double tol = 1e-8,
                                  int max_iter = 10000) {
  require_same_ground(mu, nu, "sinkhorn_ot");
  detail::require_exponent(p, "sinkhorn_ot");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw BadRegularization("sinkhorn_ot: epsilon must be a positive real");
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw BadRegularization("sinkhorn_ot: tolerance must be a positive real");
  if (max_iter < 1) throw BadRegularization("sinkhorn_ot: max_iter must be >= 1");

  const GroundSpace& ground = *mu.ground;
  const std::size_t n = ground.point_count();

  double scale = 0.0;
  for (double d : ground.cost().data())
    scale = std::max(scale, (p == 1.0) ? d : std::pow(d, p));
  const double scale_div = scale > 0.0 ? scale : 1.0;

  const std::vector<std::size_t> S = mu.support();
  const std::vector<std::size_t> T = nu.support();
  const std::size_t k = S.size(), l = T.size();
  std::vector<double> a(k), b(l);
  for (std::size_t i = 0; i < k; ++i) a[i] = mu.weights[S[i]];
  for (std::size_t j = 0; j < l; ++j) b[j] = nu.weights[T[j]];

  Matrix cn(k, l);  // normalized powered cost over the supports
  for (std::size_t i = 0; i < k; ++i) {
    const double* row = ground.cost().row(S[i]);
    double* dst = cn.row(i);
    for (std::size_t j = 0; j < l; ++j) {
      const double d = row[T[j]];
      dst[j] = ((p == 1.0) ? d : std::pow(d, p)) / scale_div;
    }
  }

  std::vector<double> f(k, 0.0), g(l, 0.0);  // additive duals, normalized units
  std::vector<double> u(k, 1.0), v(l, 1.0);  // bounded corrections
  Matrix kern(k, l);
  auto rebuild_kernel = [&]() {
    for (std::size_t i = 0; i < k; ++i) {
      const double fi = f[i];
      const double* c = cn.row(i);
      double* kr = kern.row(i);
      for (std::size_t j = 0; j < l; ++j) kr[j] = std::exp((fi + g[j] - c[j]) / epsilon);
    }
  };
  rebuild_kernel();

  std::vector<double> scratch(std::max(k, l));
  auto log_sweep = [&]() {
    // Fold the corrections that are still finite, then update both
    // potentials with explicit logsumexp reductions.
    for (std::size_t i = 0; i < k; ++i)
      if (std::isfinite(u[i]) && u[i] > 0.0) f[i] += epsilon * std::log(u[i]);
    for (std::size_t j = 0; j < l; ++j)
      if (std::isfinite(v[j]) && v[j] > 0.0) g[j] += epsilon * std::log(v[j]);
    std::fill(u.begin(), u.end(), 1.0);
    std::fill(v.begin(), v.end(), 1.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double* c = cn.row(i);
      for (std::size_t j = 0; j < l; ++j) scratch[j] = (g[j] - c[j]) / epsilon;
      f[i] = epsilon * std::log(a[i]) - epsilon * detail::lse_pair_max(scratch, l);
    }
    for (std::size_t j = 0; j < l; ++j) {
      for (std::size_t i = 0; i < k; ++i) scratch[i] = (f[i] - cn(i, j)) / epsilon;
      g[j] = epsilon * std::log(b[j]) - epsilon * detail::lse_pair_max(scratch, k);
    }
    rebuild_kernel();
  };

  std::vector<double> kv(k), ktu(l);
  auto compute_kv = [&]() {
    for (std::size_t i = 0; i < k; ++i) {
      const double* kr = kern.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < l; ++j) s += kr[j] * v[j];
      kv[i] = s;
    }
  };

  constexpr double kAbsorbLimit = 200.0;  // on |log u|, |log v|
  bool converged = false;
  int sweeps = 0;
  double last_violation = std::numeric_limits<double>::infinity();

  for (int it = 0; it < max_iter; ++it) {
    compute_kv();
    double viol = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < k; ++i) {
      const double rs = u[i] * kv[i];
      if (!std::isfinite(rs)) finite = false;
      viol = std::max(viol, std::abs(rs - a[i]));
    }
    if (finite) {
      last_violation = viol;
      if (viol <= tol) {
        converged = true;
        break;
      }
    }

    bool trouble = !finite;
    if (!trouble)
      for (std::size_t i = 0; i < k; ++i)
        if (!(kv[i] > 0.0) || !std::isfinite(kv[i])) {
          trouble = true;
          break;
        }
    if (!trouble) {
      for (std::size_t i = 0; i < k; ++i) u[i] = a[i] / kv[i];
      for (std::size_t j = 0; j < l; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += kern(i, j) * u[i];
        ktu[j] = s;
      }
      for (std::size_t j = 0; j < l; ++j)
        if (!(ktu[j] > 0.0) || !std::isfinite(ktu[j])) {
          trouble = true;
          break;
        }
      if (!trouble) for (std::size_t j = 0; j < l; ++j) v[j] = b[j] / ktu[j];
    }
    if (trouble) {
      log_sweep();
    } else {
      double worst = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        worst = std::max(worst, std::abs(std::log(u[i])));
      for (std::size_t j = 0; j < l; ++j)
        worst = std::max(worst, std::abs(std::log(v[j])));
      if (worst > kAbsorbLimit) {
        for (std::size_t i = 0; i < k; ++i) f[i] += epsilon * std::log(u[i]);
        for (std::size_t j = 0; j < l; ++j) g[j] += epsilon * std::log(v[j]);
        std::fill(u.begin(), u.end(), 1.0);
        std::fill(v.begin(), v.end(), 1.0);
        rebuild_kernel();
      }
    }
    ++sweeps;
  }
  if (!converged) {
    compute_kv();
    double viol = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      viol = std::max(viol, std::abs(u[i] * kv[i] - a[i]));
    if (std::isfinite(viol)) last_violation = viol;
  }

  // Fold the remaining corrections so f, g describe the final iterate alone.
  for (std::size_t i = 0; i < k; ++i)
    if (std::isfinite(u[i]) && u[i] > 0.0) f[i] += epsilon * std::log(u[i]);
  for (std::size_t j = 0; j < l; ++j)
    if (std::isfinite(v[j]) && v[j] > 0.0) g[j] += epsilon * std::log(v[j]);

  // Plan of the final iterate over the supports.
  Matrix gamma(k, l);
  for (std::size_t i = 0; i < k; ++i) {
    const double* c = cn.row(i);
    double* gr = gamma.row(i);
    const double fi = f[i];
    for (std::size_t j = 0; j < l; ++j) gr[j] = std::exp((fi + g[j] - c[j]) / epsilon);
  }

  // Projection onto the exact marginal polytope: scale rows down to their
  // budget, then columns, then spread the leftover as a rank-one product.
  {
    auto rows = gamma.row_sums();
    for (std::size_t i = 0; i < k; ++i) {
      if (rows[i] > a[i] && rows[i] > 0.0) {
        const double x = a[i] / rows[i];
        double* gr = gamma.row(i);
        for (std::size_t j = 0; j < l; ++j) gr[j] *= x;
      }
    }
    auto cols = gamma.col_sums();
    std::vector<double> colscale(l, 1.0);
    for (std::size_t j = 0; j < l; ++j)
      if (cols[j] > b[j] && cols[j] > 0.0) colscale[j] = b[j] / cols[j];
    for (std::size_t i = 0; i < k; ++i) {
      double* gr = gamma.row(i);
      for (std::size_t j = 0; j < l; ++j) gr[j] *= colscale[j];
    }
    rows = gamma.row_sums();
    cols = gamma.col_sums();
    std::vector<double> da(k), db(l);
    double missing = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      da[i] = std::max(0.0, a[i] - rows[i]);
      missing += da[i];
    }
    for (std::size_t j = 0; j < l; ++j) db[j] = std::max(0.0, b[j] - cols[j]);
    if (missing > 0.0) {
      double db_total = 0.0;
      for (double x : db) db_total += x;
      if (db_total > 0.0)
        for (std::size_t i = 0; i < k; ++i) {
          if (da[i] == 0.0) continue;
          const double w = da[i] / db_total;
          double* gr = gamma.row(i);
          for (std::size_t j = 0; j < l; ++j) gr[j] += w * db[j];
        }
    }
  }

  SinkhornResult out;
  out.cost_scale = scale;
  out.epsilon = epsilon;
  out.p = p;
  out.report.iterations = sweeps;
  out.report.converged = converged;
  out.report.max_marginal_violation = last_violation;
  out.report.regularization = epsilon;

  out.plan.entries = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < l; ++j)
      if (gamma(i, j) != 0.0) out.plan.entries(S[i], T[j]) = gamma(i, j);
  out.plan.source = mu;
  out.plan.target = nu;
  out.plan.p = p;
  out.plan.cost_value = plan_cost(out.plan.entries, ground, p);

  // Potentials over the full ground, rescaled to original cost units. The
  // mass-free values come from the soft c-transform against the other side's
  // converged potential; the gradient flavor adds eps*log(weight) on the
  // support and reuses the mass-free extension elsewhere.
  const double unit = scale_div;
  out.source_massfree_potential.assign(n, 0.0);
  out.target_massfree_potential.assign(n, 0.0);
  out.source_gradient_potential.assign(n, 0.0);
  out.target_gradient_potential.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const double* row = ground.cost().row(x);
    for (std::size_t j = 0; j < l; ++j) {
      const double d = row[T[j]];
      const double c = ((p == 1.0) ? d : std::pow(d, p)) / scale_div;
      scratch[j] = (g[j] - c) / epsilon;
    }
    out.source_massfree_potential[x] =
        -epsilon * detail::lse_pair_max(scratch, l) * unit;
  }
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t i = 0; i < k; ++i) {
      const double d = ground.cost_at(S[i], y);
      const double c = ((p == 1.0) ? d : std::pow(d, p)) / scale_div;
      scratch[i] = (f[i] - c) / epsilon;
    }
    out.target_massfree_potential[y] =
        -epsilon * detail::lse_pair_max(scratch, k) * unit;
  }
  out.source_gradient_potential = out.source_massfree_potential;
  out.target_gradient_potential = out.target_massfree_potential;
  for (std::size_t i = 0; i < k; ++i)
    out.source_gradient_potential[S[i]] = f[i] * unit;
  for (std::size_t j = 0; j < l; ++j)
    out.target_gradient_potential[T[j]] = g[j] * unit;
  return out;
}

/// Converged dual potentials, centered so the source side sums to zero (the
/// matching constant is moved onto the target side, keeping f_i + g_j fixed).
/// For strictly positive weights, d(entropic value)/d(mu_k) = f_k + constant.
/// Requesting potentials from a run that did not converge raises StaleDuals.
inline std::pair<std::vector<double>, std::vector<double>> dual_potentials(
    const SinkhornResult& result) {
  if (!result.report.converged)
    throw StaleDuals("dual_potentials: solver run did not converge; "
                     "potentials would not satisfy the gradient property");
  std::vector<double> f = result.source_gradient_potential;
  std::vector<double> g = result.target_gradient_potential;
  double mean = 0.0;
  for (double x : f) mean += x;
  mean /= static_cast<double>(f.size());
  for (double& x : f) x -= mean;
  for (double& x : g) x += mean;
  return {std::move(f), std::move(g)};
}

/// Value of the entropic transport objective at the converged duals, in
/// original cost units: <f, mu> + <g, nu> - eps * cost_scale. Its gradient in
/// the source weights is the source gradient potential (up to a constant).
inline double entropic_value(const SinkhornResult& result) {
  const auto& mu = result.plan.source;
  const auto& nu = result.plan.target;
  double total = 0.0;
  for (std::size_t i = 0; i < mu.weights.size(); ++i)
    if (mu.weights[i] > 0.0)
      total += result.source_gradient_potential[i] * mu.weights[i];
  for (std::size_t j = 0; j < nu.weights.size(); ++j)
    if (nu.weights[j] > 0.0)
      total += result.target_gradient_potential[j] * nu.weights[j];
  return total - result.epsilon * result.cost_scale;
}

}  // namespace otmarl
