#ifndef TSHOPFIELD_CERTIFICATES_HPP
#define TSHOPFIELD_CERTIFICATES_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tshopfield/network.hpp"
#include "tshopfield/timescale.hpp"

namespace tsh {

/// Generic condition verdict: an inequality lhs <= rhs with its slack and
/// an optional witness describing the failure.
struct Verdict {
  bool pass = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  std::string witness;
};

struct MMatrixVerdict {
  bool is_z_pattern = false;
  std::vector<double> eigen_real_parts;
  bool is_m_matrix = false;
  bool gershgorin_sufficient = false;
  bool marginal = false;   // min real part within tolerance of zero
  bool eigen_ok = true;    // false -> verdict degraded to Gershgorin only
  std::string witness;
};

struct GershgorinDisc {
  double center;
  double radius;
};

/// ||A||_2 = sqrt(lambda_max(A^T A)).
inline double spectral_norm(const Eigen::MatrixXd& A) {
  if (!A.allFinite()) {
    throw std::invalid_argument("spectral_norm: non-finite entries");
  }
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_norm: eigen solver failed");
  }
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline std::vector<GershgorinDisc> gershgorin_discs(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("gershgorin_discs: matrix not square");
  }
  std::vector<GershgorinDisc> discs;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double radius = A.row(i).cwiseAbs().sum() - std::abs(A(i, i));
    discs.push_back({A(i, i), radius});
  }
  return discs;
}

/// Z-pattern check (nonnegative diagonal, nonpositive off-diagonal), then
/// the exact eigenvalue real-part test with tolerance 1e-9; borderline
/// real parts are reported as marginal. Also evaluates the Gershgorin
/// sufficient condition Q_ii - rho_i > 0.
inline MMatrixVerdict is_m_matrix(const Eigen::MatrixXd& Q,
                                  double real_part_tol = 1e-9) {
  if (Q.rows() != Q.cols()) {
    throw std::invalid_argument("is_m_matrix: matrix not square");
  }
  MMatrixVerdict v;
  v.is_z_pattern = true;
  for (Eigen::Index i = 0; i < Q.rows() && v.is_z_pattern; ++i) {
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
      const bool ok = (i == j) ? Q(i, j) >= 0.0 : Q(i, j) <= 0.0;
      if (!ok) {
        v.is_z_pattern = false;
        v.witness = "Z-pattern violated at (" + std::to_string(i) + "," +
                    std::to_string(j) + ")";
        break;
      }
    }
  }
  v.gershgorin_sufficient = v.is_z_pattern;
  for (const auto& d : gershgorin_discs(Q)) {
    if (!(d.center - d.radius > 0.0)) v.gershgorin_sufficient = false;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(Q, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    v.eigen_ok = false;
    v.is_m_matrix = v.gershgorin_sufficient;
    v.witness += (v.witness.empty() ? "" : "; ");
    v.witness += "eigen solver failed, Gershgorin-only verdict";
    return v;
  }
  double min_re = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    const double re = es.eigenvalues()[i].real();
    v.eigen_real_parts.push_back(re);
    min_re = std::min(min_re, re);
  }
  v.marginal = std::abs(min_re) <= real_part_tol;
  v.is_m_matrix = v.is_z_pattern && min_re > real_part_tol;
  if (v.is_z_pattern && !v.is_m_matrix) {
    v.witness = "eigenvalue with real part " + std::to_string(min_re);
  }
  return v;
}

/// Lemma-style regressivity test: for each distinct graininess mu on the
/// horizon, (I - mu B) Lambda^{-1} - mu |A| must be an M-matrix.
struct RegressivityVerdict {
  bool pass = false;
  std::vector<double> graininess_values;
  std::vector<MMatrixVerdict> per_graininess;
};

inline RegressivityVerdict check_regressivity(const HopfieldSystem& sys,
                                              const TimeScale& ts, double t0,
                                              double tf) {
  const Eigen::Index n = static_cast<Eigen::Index>(sys.size());
  Eigen::VectorXd inv_lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_lambda[i] = 1.0 / sys.activation.lipschitz(static_cast<std::size_t>(i));
  }
  RegressivityVerdict out;
  out.pass = true;
  for (double mu : ts.distinct_graininess(t0, tf)) {
    Eigen::MatrixXd Q =
        (Eigen::MatrixXd::Identity(n, n) -
         mu * Eigen::MatrixXd(sys.B_diag.asDiagonal())) *
            Eigen::MatrixXd(inv_lambda.asDiagonal()) -
        mu * sys.A.cwiseAbs();
    auto v = is_m_matrix(Q);
    out.pass = out.pass && v.is_m_matrix;
    out.graininess_values.push_back(mu);
    out.per_graininess.push_back(std::move(v));
  }
  return out;
}

/// r0 = ( sum_i (1/b_i^2) (sum_j M_j |a_ij| + |J_i|)^2 )^{1/2}, the norm
/// bound on the equilibrium state.
inline double equilibrium_bound_r0(const HopfieldSystem& sys) {
  const Eigen::Index n = static_cast<Eigen::Index>(sys.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = std::abs(sys.J[i]);
    for (Eigen::Index j = 0; j < n; ++j) {
      row += sys.activation.bound(static_cast<std::size_t>(j)) *
             std::abs(sys.A(i, j));
    }
    acc += row * row / (sys.B_diag[i] * sys.B_diag[i]);
  }
  return std::sqrt(acc);
}

/// Uniqueness certificate: M-matrix test on Q = B Lambda^{-1} - |A|, with
/// Lambda^{-1} = diag(1/lambda_i) as literally defined.
inline MMatrixVerdict check_uniqueness(const HopfieldSystem& sys) {
  const Eigen::Index n = static_cast<Eigen::Index>(sys.size());
  Eigen::MatrixXd Q = -sys.A.cwiseAbs();
  for (Eigen::Index i = 0; i < n; ++i) {
    Q(i, i) += sys.B_diag[i] / sys.activation.lipschitz(static_cast<std::size_t>(i));
  }
  return is_m_matrix(Q);
}

/// Per-node degree condition k_i < lambda_i / (R_i (c + b)).
struct DegreeConditionVerdict {
  bool all_pass = false;
  std::vector<Verdict> per_node;  // lhs = k_i, rhs = bound, slack = rhs - lhs
};

inline DegreeConditionVerdict check_degree_condition(
    const Graph& g, const std::vector<NodeParams>& params,
    const PayoffSpec& p) {
  DegreeConditionVerdict out;
  out.all_pass = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Verdict v;
    v.lhs = static_cast<double>(g.degree(i));
    v.rhs = params[i].lambda / (params[i].R * (p.c + p.b));
    v.slack = v.rhs - v.lhs;
    v.pass = v.lhs < v.rhs;
    if (!v.pass) v.witness = "node " + std::to_string(i);
    out.all_pass = out.all_pass && v.pass;
    out.per_node.push_back(std::move(v));
  }
  return out;
}

/// Right-hand side of the asymptotic-stability inequalities:
/// (-1 - mu* b_max + sqrt(1 + 2 mu*(b_max + b_min))) / (mu* L),
/// evaluated in the cancellation-free form
/// (2 b_min - mu* b_max^2) / (L (sqrt(1 + 2 mu* (b_max + b_min)) + 1 + mu* b_max)),
/// which also yields the analytic limit b_min / L at mu* = 0.
inline double rhs_mu_bound(double b_max, double b_min, double L,
                           double mu_star) {
  if (mu_star < 0.0 || L <= 0.0) {
    throw std::invalid_argument("rhs_mu_bound: needs mu* >= 0 and L > 0");
  }
  const double s = 1.0 + 2.0 * mu_star * (b_max + b_min);
  return (2.0 * b_min - mu_star * b_max * b_max) /
         (L * (std::sqrt(s) + 1.0 + mu_star * b_max));
}

struct StabilityVerdict {
  Verdict condition;       // lhs vs rhs_mu_bound
  double xi_star = 0.0;    // 2 b_min - 2 L ||A||_2 - mu* (b_max + L ||A||_2)^2
  bool corollary_pass = false;  // xi* >= 0, using the true ||A||_2
  double spectral_norm_A = 0.0;
  double mu_star = 0.0;
  bool horizon_unbounded = false;
};

namespace detail {

inline StabilityVerdict stability_verdict(const HopfieldSystem& sys,
                                          double lhs, double mu_star,
                                          bool unbounded,
                                          const std::string& name) {
  StabilityVerdict out;
  out.mu_star = mu_star;
  out.horizon_unbounded = unbounded;
  out.spectral_norm_A = spectral_norm(sys.A);
  const double L = sys.max_lipschitz();
  out.condition.lhs = lhs;
  out.condition.rhs = rhs_mu_bound(sys.b_max(), sys.b_min(), L, mu_star);
  out.condition.slack = out.condition.rhs - out.condition.lhs;
  out.condition.pass = lhs <= out.condition.rhs;
  if (!out.condition.pass) out.condition.witness = name + " inequality violated";
  const double t = sys.b_max() + L * out.spectral_norm_A;
  out.xi_star = 2.0 * sys.b_min() - 2.0 * L * out.spectral_norm_A - mu_star * t * t;
  out.corollary_pass = out.xi_star >= 0.0;
  return out;
}

}  // namespace detail

/// Size-dependent asymptotic-stability condition:
/// sqrt(n)(b + c) max_i k_i/C_i <= rhs_mu_bound. Also evaluates the
/// direct corollary xi* >= 0 with the true spectral norm.
inline StabilityVerdict check_size_dependent(const HopfieldSystem& sys,
                                             const Graph& g,
                                             const std::vector<NodeParams>& params,
                                             const PayoffSpec& p,
                                             double mu_star,
                                             bool horizon_unbounded = true) {
  double max_ratio = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    max_ratio = std::max(max_ratio, g.degree(i) / params[i].C);
  }
  const double lhs = std::sqrt(static_cast<double>(g.size())) * (p.b + p.c) * max_ratio;
  return detail::stability_verdict(sys, lhs, mu_star, horizon_unbounded,
                                   "size-dependent");
}

/// Size-independent condition: (b + c) K*/C_* <= rhs_mu_bound, with
/// K* = max degree and C_* = min capacitance.
inline StabilityVerdict check_size_independent(const HopfieldSystem& sys,
                                               const Graph& g,
                                               const std::vector<NodeParams>& params,
                                               const PayoffSpec& p,
                                               double mu_star,
                                               bool horizon_unbounded = true) {
  double c_min = params.front().C;
  for (const auto& np : params) c_min = std::min(c_min, np.C);
  const double lhs = (p.b + p.c) * g.max_degree() / c_min;
  return detail::stability_verdict(sys, lhs, mu_star, horizon_unbounded,
                                   "size-independent");
}

/// Exponential-rate certificate: -b_min positively regressive on the
/// horizon and beta = b_min - L ||A||_2 > 0. Also evaluates the
/// degree-based sufficient version
/// b_min/L > min{ sqrt(n)(b+c) max k_i/C_i, (b+c) K*/C_* }.
struct ExponentialVerdict {
  bool pass = false;
  double beta = 0.0;
  bool regressive = false;   // 1 - mu(t) b_min > 0 on the horizon
  Verdict rate;              // lhs = L ||A||_2, rhs = b_min
  Verdict corollary;         // lhs = min of the two structural bounds, rhs = b_min/L
};

inline ExponentialVerdict check_exponential(const HopfieldSystem& sys,
                                            const Graph& g,
                                            const std::vector<NodeParams>& params,
                                            const PayoffSpec& p,
                                            const TimeScale& ts, double t0,
                                            double tf) {
  ExponentialVerdict out;
  const double b_min = sys.b_min();
  const double L = sys.max_lipschitz();
  const double normA = spectral_norm(sys.A);
  out.beta = b_min - L * normA;
  out.regressive =
      ts.is_positive_regressive([b_min](double) { return -b_min; }, t0, tf);
  out.rate.lhs = L * normA;
  out.rate.rhs = b_min;
  out.rate.slack = out.beta;
  out.rate.pass = out.beta > 0.0;
  double max_ratio = 0.0;
  double c_min = params.front().C;
  for (std::size_t i = 0; i < g.size(); ++i) {
    max_ratio = std::max(max_ratio, g.degree(i) / params[i].C);
    c_min = std::min(c_min, params[i].C);
  }
  const double size_dep = std::sqrt(static_cast<double>(g.size())) * (p.b + p.c) * max_ratio;
  const double size_indep = (p.b + p.c) * g.max_degree() / c_min;
  out.corollary.lhs = std::min(size_dep, size_indep);
  out.corollary.rhs = b_min / L;
  out.corollary.slack = out.corollary.rhs - out.corollary.lhs;
  out.corollary.pass = out.corollary.rhs > out.corollary.lhs;
  out.pass = out.regressive && out.rate.pass;
  if (!out.regressive) out.rate.witness = "-b_min not positively regressive";
  return out;
}

/// Aggregate of every certificate the report carries.
struct CertificateReport {
  RegressivityVerdict regressivity;
  bool equilibrium_exists = false;
  double r0 = 0.0;
  MMatrixVerdict uniqueness;
  DegreeConditionVerdict degree_condition;
  StabilityVerdict size_dependent;
  StabilityVerdict size_independent;
  ExponentialVerdict exponential;
  double norm_2 = 0.0;
  double norm_1 = 0.0;
  double norm_inf = 0.0;
  double sqrt_n_norm_inf = 0.0;
  // The uniqueness lemma's matrix as defined uses Lambda^{-1}; the degree
  // theorem's proof algebra uses lambda_i in the numerator. Flag raised
  // when the two routes disagree on this system.
  bool lambda_convention_disagreement = false;

  bool all_pass() const {
    return regressivity.pass && equilibrium_exists && uniqueness.is_m_matrix &&
           degree_condition.all_pass && size_dependent.condition.pass &&
           size_independent.condition.pass && exponential.pass;
  }
};

inline CertificateReport evaluate_certificates(
    const Graph& g, const std::vector<NodeParams>& params, const PayoffSpec& p,
    const HopfieldSystem& sys, const TimeScale& ts, double t0, double tf,
    std::optional<double> mu_star_override = std::nullopt) {
  CertificateReport rep;
  const double observed_mu = ts.mu_star(t0, tf);
  double mu_star = mu_star_override.value_or(observed_mu);
  if (mu_star < observed_mu - TimeScale::kMembershipTol) {
    throw std::invalid_argument(
        "evaluate_certificates: mu* below the observed graininess supremum");
  }
  rep.regressivity = check_regressivity(sys, ts, t0, tf);
  rep.r0 = equilibrium_bound_r0(sys);
  // Lemma route: S1 (regressivity) plus the bounded/Lipschitz activations
  // built into the system give existence.
  rep.equilibrium_exists = rep.regressivity.pass;
  rep.uniqueness = check_uniqueness(sys);
  rep.degree_condition = check_degree_condition(g, params, p);
  const bool unbounded = ts.unbounded_above();
  rep.size_dependent =
      check_size_dependent(sys, g, params, p, mu_star, unbounded);
  rep.size_independent =
      check_size_independent(sys, g, params, p, mu_star, unbounded);
  rep.exponential = check_exponential(sys, g, params, p, ts, t0, tf);
  rep.norm_2 = spectral_norm(sys.A);
  rep.norm_1 = sys.A.cwiseAbs().colwise().sum().maxCoeff();
  rep.norm_inf = sys.A.cwiseAbs().rowwise().sum().maxCoeff();
  rep.sqrt_n_norm_inf = std::sqrt(static_cast<double>(g.size())) * rep.norm_inf;
  // Gershgorin route on the literal Q vs the proof's per-node algebra.
  bool proof_algebra_pass = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lhs = params[i].lambda / (params[i].R * params[i].C) -
                       g.degree(i) * (p.c + p.b) / params[i].C;
    proof_algebra_pass = proof_algebra_pass && lhs > 0.0;
  }
  rep.lambda_convention_disagreement =
      proof_algebra_pass != rep.uniqueness.gershgorin_sufficient;
  return rep;
}

}  // namespace tsh

#endif  // TSHOPFIELD_CERTIFICATES_HPP
