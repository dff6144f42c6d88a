#pragma once

// Hamilton's equations, fixed-step integrators, conservation monitoring and
// the radial reductions of the deformed spaces.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sl2c/catalog.hpp"
#include "sl2c/coalgebra.hpp"
#include "sl2c/errors.hpp"
#include "sl2c/geometry.hpp"
#include "sl2c/phase.hpp"

namespace sl2c {

struct VectorField {
  std::vector<double> qdot;
  std::vector<double> pdot;
};

/// qdot = dH/dp, pdot = -dH/dq from exact gradients.
inline VectorField hamilton_rhs(const Observable& h, const PhaseState& s) {
  auto g = gradient(h, s);
  for (auto& x : g.dq) x = -x;
  return {std::move(g.dp), std::move(g.dq)};
}

namespace detail {

inline PhaseState axpy(const PhaseState& s, double a, const VectorField& f) {
  std::vector<double> q = s.q(), p = s.p();
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] += a * f.qdot[i];
    p[i] += a * f.pdot[i];
  }
  return {std::move(q), std::move(p)};
}

inline PhaseState midpoint_of(const PhaseState& a, const PhaseState& b) {
  std::vector<double> q(a.dim()), p(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    q[i] = 0.5 * (a.q()[i] + b.q()[i]);
    p[i] = 0.5 * (a.p()[i] + b.p()[i]);
  }
  return {std::move(q), std::move(p)};
}

}  // namespace detail

/// Implicit midpoint y1 = y0 + dt f((y0 + y1)/2), solved by fixed-point
/// iteration until the update is <= fp_tol max(1, |y|). A negative dt steps
/// backwards. `iterations`, if given, receives the iteration count.
inline PhaseState step_midpoint(const Observable& h, const PhaseState& s, double dt, double fp_tol = 1e-13,
                                int fp_maxiter = 50, int* iterations = nullptr) {
  if (!std::isfinite(dt) || dt == 0.0) throw InvalidArgument("time step must be finite and nonzero");
  if (fp_maxiter < 1) throw InvalidArgument("fp_maxiter must be >= 1");
  PhaseState y = detail::axpy(s, dt, hamilton_rhs(h, s));
  for (int k = 1; k <= fp_maxiter; ++k) {
    PhaseState next = detail::axpy(s, dt, hamilton_rhs(h, detail::midpoint_of(s, y)));
    double delta = 0.0, size = 1.0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
      delta = std::max({delta, std::abs(next.q()[i] - y.q()[i]), std::abs(next.p()[i] - y.p()[i])});
      size = std::max({size, std::abs(next.q()[i]), std::abs(next.p()[i])});
    }
    y = std::move(next);
    if (delta <= fp_tol * size) {
      if (iterations) *iterations = k;
      return y;
    }
  }
  throw ConvergenceError("implicit midpoint fixed-point iteration did not converge in " + std::to_string(fp_maxiter) +
                         " iterations (dt = " + std::to_string(dt) + ")");
}

/// Classical fourth-order Runge-Kutta step.
inline PhaseState step_rk4(const Observable& h, const PhaseState& s, double dt) {
  if (!std::isfinite(dt) || dt == 0.0) throw InvalidArgument("time step must be finite and nonzero");
  const VectorField k1 = hamilton_rhs(h, s);
  const VectorField k2 = hamilton_rhs(h, detail::axpy(s, dt / 2, k1));
  const VectorField k3 = hamilton_rhs(h, detail::axpy(s, dt / 2, k2));
  const VectorField k4 = hamilton_rhs(h, detail::axpy(s, dt, k3));
  std::vector<double> q = s.q(), p = s.p();
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] += dt / 6 * (k1.qdot[i] + 2 * k2.qdot[i] + 2 * k3.qdot[i] + k4.qdot[i]);
    p[i] += dt / 6 * (k1.pdot[i] + 2 * k2.pdot[i] + 2 * k3.pdot[i] + k4.pdot[i]);
  }
  return {std::move(q), std::move(p)};
}

enum class Integrator { midpoint, rk4 };

inline std::string to_string(Integrator i) { return i == Integrator::midpoint ? "midpoint" : "rk4"; }

inline Integrator parse_integrator(const std::string& s) {
  if (s == "midpoint") return Integrator::midpoint;
  if (s == "rk4") return Integrator::rk4;
  throw InvalidArgument("unknown integrator '" + s + "' (expected midpoint or rk4)");
}

struct Trajectory {
  double dt = 0.0;
  std::vector<std::string> monitor_names;  // "H" first
  std::vector<PhaseState> states;
  std::vector<std::vector<double>> values;  // values[k][m] at t_k

  std::size_t size() const noexcept { return states.size(); }
  double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt; }
};

struct MonitorDrift {
  std::string name;
  double initial = 0.0;
  double max_abs_drift = 0.0;
  double rel_drift = 0.0;  // max_abs_drift / (1 + |initial|)
  double slope = 0.0;      // least-squares slope of the relative deviation per step
};

struct DriftReport {
  Integrator integrator = Integrator::midpoint;
  double dt = 0.0;
  std::size_t steps = 0;            // requested
  std::size_t completed_steps = 0;  // performed
  int max_fp_iterations = 0;
  std::size_t total_fp_iterations = 0;
  bool aborted = false;
  std::string error;
  std::vector<MonitorDrift> monitors;

  const MonitorDrift& monitor(const std::string& name) const {
    for (const auto& m : monitors)
      if (m.name == name) return m;
    throw InvalidArgument("no monitor named '" + name + "'");
  }
};

struct SimulationResult {
  Trajectory trajectory;
  DriftReport drift;
};

/// Members of the matching integral family plus, for the maximally
/// superintegrable system on N = 2, the extra integral I_z.
inline std::vector<Observable> default_monitors(const SystemSpec& spec) {
  std::vector<Observable> out;
  if (spec.realization.n >= 2) out = integrals_for(spec.realization).distinct();
  if (spec.name == "z_ms" && spec.realization.n == 2 && spec.realization.centrifugal_free())
    out.push_back(extra_integral_ms(spec.realization.z, spec.params.at("sign")));
  return out;
}

inline DriftReport drift_report(const Trajectory& traj) {
  DriftReport rep;
  rep.dt = traj.dt;
  const std::size_t m = traj.monitor_names.size();
  const std::size_t n = traj.values.size();
  for (std::size_t j = 0; j < m; ++j) {
    MonitorDrift d;
    d.name = traj.monitor_names[j];
    if (n == 0) {
      rep.monitors.push_back(d);
      continue;
    }
    d.initial = traj.values[0][j];
    const double scale = 1.0 + std::abs(d.initial);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double dev = traj.values[k][j] - d.initial;
      d.max_abs_drift = std::max(d.max_abs_drift, std::abs(dev));
      const double x = static_cast<double>(k), y = dev / scale;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    d.rel_drift = d.max_abs_drift / scale;
    const double nn = static_cast<double>(n);
    const double den = nn * sxx - sx * sx;
    d.slope = den > 0.0 ? (nn * sxy - sx * sy) / den : 0.0;
    rep.monitors.push_back(d);
  }
  return rep;
}

/// Fixed-step run from s0. H is always monitored first; `monitors` follow. A
/// failing step stops the run: the trajectory ends at the last good state and
/// the report carries aborted = true and the error text. Invalid initial
/// states throw.
inline SimulationResult simulate(const Observable& h, const PhaseState& s0, double dt, std::size_t steps,
                                 const std::vector<Observable>& monitors, Integrator integrator = Integrator::midpoint,
                                 double fp_tol = 1e-13, int fp_maxiter = 50) {
  if (!std::isfinite(dt) || dt <= 0.0) throw InvalidArgument("dt must be positive");
  if (s0.dim() != h.dim())
    throw InvalidArgument("initial state has N = " + std::to_string(s0.dim()) + ", system has N = " +
                          std::to_string(h.dim()));
  std::vector<Observable> all{h.renamed("H")};
  all.insert(all.end(), monitors.begin(), monitors.end());

  const auto sample = [&](const PhaseState& s) {
    std::vector<double> v;
    v.reserve(all.size());
    for (const auto& o : all) v.push_back(evaluate(o, s));
    return v;
  };

  SimulationResult res;
  Trajectory& tr = res.trajectory;
  tr.dt = dt;
  for (const auto& o : all) tr.monitor_names.push_back(o.name());
  tr.states.reserve(steps + 1);
  tr.values.reserve(steps + 1);
  tr.states.push_back(s0);
  tr.values.push_back(sample(s0));
  hamilton_rhs(h, s0);

  int max_it = 0;
  std::size_t total_it = 0;
  std::optional<std::string> error;
  for (std::size_t k = 0; k < steps; ++k) {
    try {
      int it = 0;
      PhaseState next = integrator == Integrator::midpoint
                            ? step_midpoint(h, tr.states.back(), dt, fp_tol, fp_maxiter, &it)
                            : step_rk4(h, tr.states.back(), dt);
      auto vals = sample(next);
      max_it = std::max(max_it, it);
      total_it += static_cast<std::size_t>(it);
      tr.states.push_back(std::move(next));
      tr.values.push_back(std::move(vals));
    } catch (const Error& e) {
      error = "step " + std::to_string(k + 1) + ": " + e.what();
      break;
    }
  }

  res.drift = drift_report(tr);
  res.drift.integrator = integrator;
  res.drift.steps = steps;
  res.drift.completed_steps = tr.size() - 1;
  res.drift.max_fp_iterations = max_it;
  res.drift.total_fp_iterations = total_it;
  if (error) {
    res.drift.aborted = true;
    res.drift.error = *error;
  }
  return res;
}

inline SimulationResult simulate(const SystemSpec& spec, const PhaseState& s0, double dt, std::size_t steps,
                                 std::optional<std::vector<Observable>> monitors = std::nullopt,
                                 Integrator integrator = Integrator::midpoint) {
  return simulate(spec.hamiltonian, s0, dt, steps, monitors ? *monitors : default_monitors(spec), integrator);
}

// ---------------------------------------------------------------------------
// Polar chart dynamics

/// Kinetic Hamiltonian of the polar metric in the same convention as the
/// catalog (ds^2 = 2 A^{-1}): H = P^T g^{-1} P on (rho, theta; P_rho, P_theta).
inline Observable polar_hamiltonian(PolarKind kind, double lambda1sq, double lambda2sq) {
  if (lambda2sq == 0.0) throw InvalidArgument("lambda2^2 must be nonzero");
  if (kind == PolarKind::type_I)
    return Observable(
        "H_polar_I", 2,
        [lambda1sq, lambda2sq](auto q, auto p) {
          const auto c = ck_cos(-lambda1sq, q[0]), s = ck_sin(-lambda1sq, q[0]);
          return c * (p[0] * p[0]) + c * (p[1] * p[1]) / (lambda2sq * s * s);
        },
        {0});
  return Observable(
      "H_polar_ms", 2,
      [lambda1sq, lambda2sq](auto q, auto p) {
        const auto s = ck_sin(lambda1sq, q[0]);
        return p[0] * p[0] + (p[1] * p[1]) / (lambda2sq * s * s);
      },
      {0});
}

/// One-dimensional radial Hamiltonian at fixed Ctilde = p_theta^2, in the
/// normalization H~ = 2 H with p~ = 2 P:
///   type_I: (1/2) C p^2 + C Ctilde / (2 lambda2^2 S^2),  C, S with k = -lambda1^2
///   ms:     (1/2) p^2 + Ctilde / (2 lambda2^2 S^2),      S with k = lambda1^2
inline Observable reduce_radial(PolarKind kind, double lambda1sq, double lambda2sq, double ctilde) {
  if (!(ctilde >= 0.0)) throw InvalidArgument("Ctilde must be >= 0");
  if (lambda2sq == 0.0) throw InvalidArgument("lambda2^2 must be nonzero");
  if (kind == PolarKind::type_I)
    return Observable(
        "H_radial_I", 1,
        [lambda1sq, lambda2sq, ctilde](auto q, auto p) {
          const auto c = ck_cos(-lambda1sq, q[0]), s = ck_sin(-lambda1sq, q[0]);
          return 0.5 * c * (p[0] * p[0]) + c * ctilde / (2.0 * lambda2sq * s * s);
        },
        {0});
  return Observable(
      "H_radial_ms", 1,
      [lambda1sq, lambda2sq, ctilde](auto q, auto p) {
        const auto s = ck_sin(lambda1sq, q[0]);
        if (ctilde == 0.0) return 0.5 * (p[0] * p[0]);
        return 0.5 * (p[0] * p[0]) + ctilde / (2.0 * lambda2sq * s * s);
      },
      ctilde == 0.0 ? std::vector<std::size_t>{} : std::vector<std::size_t>{0});
}

}  // namespace sl2c
