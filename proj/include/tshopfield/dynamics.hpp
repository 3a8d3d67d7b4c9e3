#ifndef TSHOPFIELD_DYNAMICS_HPP
#define TSHOPFIELD_DYNAMICS_HPP

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tshopfield/certificates.hpp"
#include "tshopfield/network.hpp"
#include "tshopfield/timescale.hpp"

namespace tsh {

struct EquilibriumConfig {
  double tol = 1e-10;
  int max_iterations = 2000;
  double omega_floor = 1.0 / 16.0;
};

struct EquilibriumResult {
  Eigen::VectorXd u_star;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool within_r0 = false;
};

/// Solves -B u + A g(u) + J = 0 by damped fixed-point iteration
/// u <- (1-w) u + w B^{-1}(A g(u) + J), started at u = 0, with the
/// damping halved whenever the residual would grow and a guarded Newton
/// step as fallback once the damping floor is reached.
inline EquilibriumResult find_equilibrium(const HopfieldSystem& sys,
                                          const EquilibriumConfig& cfg = {}) {
  const Eigen::Index n = static_cast<Eigen::Index>(sys.size());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  double res = sys.rhs(u).norm();
  double omega = 1.0;
  EquilibriumResult out;
  int it = 0;
  while (it < cfg.max_iterations && res > cfg.tol) {
    ++it;
    const Eigen::VectorXd fp =
        sys.B_diag.cwiseInverse().cwiseProduct(sys.A * sys.activation.apply(u) + sys.J);
    bool accepted = false;
    double w = omega;
    while (w >= cfg.omega_floor) {
      const Eigen::VectorXd cand = (1.0 - w) * u + w * fp;
      const double cand_res = sys.rhs(cand).norm();
      if (cand_res < res) {
        u = cand;
        res = cand_res;
        omega = std::min(1.0, w * 2.0);
        accepted = true;
        break;
      }
      w *= 0.5;
    }
    if (!accepted) {
      // Newton with backtracking on the residual norm.
      const Eigen::VectorXd F = sys.rhs(u);
      const Eigen::VectorXd d = sys.rhs_jacobian(u).partialPivLu().solve(-F);
      double alpha = 1.0;
      while (alpha > 1e-8) {
        const Eigen::VectorXd cand = u + alpha * d;
        const double cand_res = sys.rhs(cand).norm();
        if (cand_res < res) {
          u = cand;
          res = cand_res;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (!accepted) break;  // stalled; report best iterate
  }
  out.u_star = u;
  out.residual = res;
  out.iterations = it;
  out.converged = res <= cfg.tol;
  out.within_r0 = u.norm() <= equilibrium_bound_r0(sys) + 1e-8;
  return out;
}

struct SimulateConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int samples_per_segment = 32;
};

struct TrajectorySample {
  double t;
  Eigen::VectorXd u;
  bool from_jump;  // landed here by a scattered step
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::size_t scattered_steps = 0;
  std::size_t continuous_segments = 0;
};

namespace detail {

template <typename System>
Trajectory simulate_impl(const System& sys, const TimeScale& ts,
                         const Eigen::VectorXd& u0, double t0, double tf,
                         const SimulateConfig& cfg) {
  namespace odeint = boost::numeric::odeint;
  if (!ts.contains(t0) || !ts.contains(tf)) {
    throw std::invalid_argument("simulate: t0 or tf not in the time scale");
  }
  Trajectory traj;
  Eigen::VectorXd u = u0;
  traj.samples.push_back({t0, u, false});
  const auto pieces = ts.decompose(t0, tf);
  for (const auto& piece : pieces) {
    if (const auto* j = std::get_if<ScatteredJump>(&piece)) {
      // Exact stepping identity u(sigma(t)) = u(t) + mu(t) f(u(t)).
      u = u + j->mu * sys.rhs(u);
      traj.samples.push_back({j->t + j->mu, u, true});
      ++traj.scattered_steps;
    } else {
      const auto& r = std::get<ContinuousRun>(piece);
      std::vector<double> state(u.data(), u.data() + u.size());
      auto rhs = [&sys](const std::vector<double>& x, std::vector<double>& dxdt,
                        double /*t*/) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(),
                                             static_cast<Eigen::Index>(x.size()));
        Eigen::VectorXd f = sys.rhs(xv);
        for (std::size_t k = 0; k < dxdt.size(); ++k) dxdt[k] = f[static_cast<Eigen::Index>(k)];
      };
      std::vector<double> times;
      const int m = std::max(1, cfg.samples_per_segment);
      for (int k = 0; k <= m; ++k) {
        times.push_back(r.a + (r.b - r.a) * k / m);
      }
      auto stepper = odeint::make_controlled(
          cfg.abs_tol, cfg.rel_tol,
          odeint::runge_kutta_cash_karp54<std::vector<double>>());
      std::vector<std::pair<double, Eigen::VectorXd>> recorded;
      try {
        odeint::integrate_times(
            stepper, rhs, state, times.begin(), times.end(),
            (r.b - r.a) / (8.0 * m),
            [&recorded](const std::vector<double>& x, double t) {
              recorded.emplace_back(
                  t, Eigen::Map<const Eigen::VectorXd>(
                         x.data(), static_cast<Eigen::Index>(x.size())));
            },
            odeint::max_step_checker(1000000));
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string("simulate: integrator failure: ") +
                                 e.what());
      }
      for (std::size_t k = 1; k < recorded.size(); ++k) {
        traj.samples.push_back({recorded[k].first, recorded[k].second, false});
      }
      u = recorded.back().second;
      ++traj.continuous_segments;
    }
  }
  return traj;
}

}  // namespace detail

inline Trajectory simulate(const HopfieldSystem& sys, const TimeScale& ts,
                           const Eigen::VectorXd& u0, double t0, double tf,
                           const SimulateConfig& cfg = {}) {
  return detail::simulate_impl(sys, ts, u0, t0, tf, cfg);
}

/// V(t) = ||u(t) - u*||^2 at each sample.
inline std::vector<double> lyapunov_trace(const Trajectory& traj,
                                          const Eigen::VectorXd& u_star) {
  std::vector<double> V;
  V.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    if (s.u.size() != u_star.size()) {
      throw std::invalid_argument("lyapunov_trace: dimension mismatch");
    }
    V.push_back((s.u - u_star).squaredNorm());
  }
  return V;
}

/// Divergence witness for the asymptotic-stability integral condition:
/// xi* * (horizon length) is the established lower bound on the
/// xi-integral; a positive xi* certifies divergence as the horizon grows.
struct XiWitness {
  double xi_star = 0.0;
  double lower_bound = 0.0;
  bool valid = false;
};

inline XiWitness xi_divergence_witness(const HopfieldSystem& sys, double t0,
                                       double tf, double mu_star) {
  XiWitness w;
  const double L = sys.max_lipschitz();
  const double normA = spectral_norm(sys.A);
  const double t = sys.b_max() + L * normA;
  w.xi_star = 2.0 * sys.b_min() - 2.0 * L * normA - mu_star * t * t;
  w.lower_bound = w.xi_star * (tf - t0);
  w.valid = w.xi_star > 0.0;
  return w;
}

struct EnvelopeViolation {
  double t;
  double norm_z;
  double bound;
};

struct EnvelopeCheck {
  double beta = 0.0;
  std::vector<EnvelopeViolation> violations;
  double max_ratio = 0.0;
  bool pass = false;
};

/// Checks ||u(t) - u*|| <= ||u0 - u*|| e_{-beta}(t, t0) (1 + slack) at
/// every sample; the relative slack absorbs integrator error.
inline EnvelopeCheck verify_envelope(const Trajectory& traj,
                                     const Eigen::VectorXd& u_star, double beta,
                                     const TimeScale& ts,
                                     double slack = 1e-8) {
  if (traj.samples.empty()) {
    throw std::invalid_argument("verify_envelope: empty trajectory");
  }
  EnvelopeCheck out;
  out.beta = beta;
  const double t0 = traj.samples.front().t;
  const double z0 = (traj.samples.front().u - u_star).norm();
  for (const auto& s : traj.samples) {
    const double bound = z0 * ts.exp_ts(-beta, s.t, t0);
    const double nz = (s.u - u_star).norm();
    if (bound > 0.0) {
      out.max_ratio = std::max(out.max_ratio, nz / bound);
    } else if (nz > 0.0) {
      out.max_ratio = std::numeric_limits<double>::infinity();
    }
    if (nz > bound * (1.0 + slack)) {
      out.violations.push_back({s.t, nz, bound});
    }
  }
  out.pass = out.violations.empty();
  return out;
}

/// The system in deviation coordinates z = u - u*:
/// z^Delta = -B z + A h(z) with h(z) = g(z + u*) - g(u*). The origin is
/// an equilibrium; h inherits bound 2 M_i and Lipschitz constant
/// lambda_i.
struct ShiftedSystem {
  const HopfieldSystem* base;
  Eigen::VectorXd u_star;
  Eigen::VectorXd g_star;  // g(u*)

  std::size_t size() const { return base->size(); }

  double h(std::size_t i, double z) const {
    return base->activation.value(i, z + u_star[static_cast<Eigen::Index>(i)]) -
           g_star[static_cast<Eigen::Index>(i)];
  }

  Eigen::VectorXd rhs(const Eigen::VectorXd& z) const {
    Eigen::VectorXd hz(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      hz[i] = h(static_cast<std::size_t>(i), z[i]);
    }
    return -base->B_diag.cwiseProduct(z) + base->A * hz;
  }
};

inline ShiftedSystem shifted_system(const HopfieldSystem& sys,
                                    const Eigen::VectorXd& u_star) {
  if (!u_star.allFinite()) {
    throw std::invalid_argument("shifted_system: u* must be finite");
  }
  return ShiftedSystem{&sys, u_star, sys.activation.apply(u_star)};
}

inline Trajectory simulate(const ShiftedSystem& sys, const TimeScale& ts,
                           const Eigen::VectorXd& z0, double t0, double tf,
                           const SimulateConfig& cfg = {}) {
  return detail::simulate_impl(sys, ts, z0, t0, tf, cfg);
}

}  // namespace tsh

#endif  // TSHOPFIELD_DYNAMICS_HPP
