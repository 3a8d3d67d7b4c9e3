#ifndef TSHOPFIELD_NETWORK_HPP
#define TSHOPFIELD_NETWORK_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsh {

/// Simple undirected graph: symmetric 0/1 adjacency, zero diagonal.
class Graph {
 public:
  explicit Graph(std::size_t n) : n_(n), adj_(Eigen::MatrixXi::Zero(n, n)) {
    if (n == 0) throw std::invalid_argument("Graph: node count must be > 0");
  }

  void add_edge(std::size_t i, std::size_t j) {
    check_index(i);
    check_index(j);
    if (i == j) throw std::invalid_argument("Graph: self-loops not allowed");
    adj_(i, j) = 1;
    adj_(j, i) = 1;
  }

  std::size_t size() const { return n_; }
  bool has_edge(std::size_t i, std::size_t j) const { return adj_(i, j) != 0; }
  const Eigen::MatrixXi& adjacency() const { return adj_; }

  int degree(std::size_t i) const {
    check_index(i);
    return adj_.row(i).sum();
  }

  int max_degree() const {
    int k = 0;
    for (std::size_t i = 0; i < n_; ++i) k = std::max(k, degree(i));
    return k;
  }

  std::vector<std::size_t> neighbors(std::size_t i) const {
    check_index(i);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n_; ++j) {
      if (adj_(i, j)) out.push_back(j);
    }
    return out;
  }

 private:
  void check_index(std::size_t i) const {
    if (i >= n_) throw std::out_of_range("Graph: node index out of range");
  }

  std::size_t n_;
  Eigen::MatrixXi adj_;
};

/// Prisoner's Dilemma constants: benefit b, cost c, with b > c > 0.
struct PayoffSpec {
  double b;
  double c;

  void validate() const {
    if (!(b > c) || !(c > 0.0)) {
      throw std::invalid_argument("PayoffSpec: requires b > c > 0");
    }
  }
};

/// Per-node physical and activation parameters.
struct NodeParams {
  double C = 1.0;       // capacitance, > 0
  double R = 1.0;       // resistance, > 0
  double lambda = 1.0;  // activation Lipschitz constant, > 0
  double M = 1.0;       // activation bound, > 0
  double J = 0.0;       // constant external input
  double theta = 0.0;   // activation midpoint offset
  double U = 0.0;       // payoff threshold, discrete game only

  void validate() const {
    if (!(C > 0.0) || !(R > 0.0) || !(lambda > 0.0) || !(M > 0.0)) {
      throw std::invalid_argument("NodeParams: C, R, lambda, M must be > 0");
    }
  }
};

enum class ActivationKind { ScaledTanh, ScaledLogistic, PiecewiseLinearClamp };

/// Family of per-node activations g_i, parametrized so that M_i is the
/// exact bound and lambda_i the exact (best) Lipschitz constant.
class ActivationFamily {
 public:
  ActivationFamily(ActivationKind kind, std::vector<double> M,
                   std::vector<double> lambda, std::vector<double> theta)
      : kind_(kind),
        M_(std::move(M)),
        lambda_(std::move(lambda)),
        theta_(std::move(theta)) {
    if (M_.size() != lambda_.size() || M_.size() != theta_.size()) {
      throw std::invalid_argument("ActivationFamily: size mismatch");
    }
  }

  ActivationKind kind() const { return kind_; }
  std::size_t size() const { return M_.size(); }
  double bound(std::size_t i) const { return M_.at(i); }
  double lipschitz(std::size_t i) const { return lambda_.at(i); }
  double max_lipschitz() const {
    double L = 0.0;
    for (double l : lambda_) L = std::max(L, l);
    return L;
  }

  double value(std::size_t i, double u) const {
    const double M = M_.at(i);
    const double lam = lambda_[i];
    const double x = u - theta_[i];
    switch (kind_) {
      case ActivationKind::ScaledTanh:
        return M * std::tanh(lam * x / M);
      case ActivationKind::ScaledLogistic:
        // Range (0, M), max slope lambda at the midpoint theta.
        return M / (1.0 + std::exp(-4.0 * lam * x / M));
      case ActivationKind::PiecewiseLinearClamp:
        return std::clamp(lam * x, -M, M);
    }
    throw std::logic_error("ActivationFamily: bad kind");
  }

  double derivative(std::size_t i, double u) const {
    const double M = M_.at(i);
    const double lam = lambda_[i];
    const double x = u - theta_[i];
    switch (kind_) {
      case ActivationKind::ScaledTanh: {
        const double c = std::cosh(lam * x / M);
        return lam / (c * c);
      }
      case ActivationKind::ScaledLogistic: {
        const double s = value(i, u) / M;
        return 4.0 * lam * s * (1.0 - s);
      }
      case ActivationKind::PiecewiseLinearClamp:
        return (std::abs(lam * x) < M) ? lam : 0.0;
    }
    throw std::logic_error("ActivationFamily: bad kind");
  }

  /// Inverse of g_i; s must lie strictly inside the range.
  double inverse(std::size_t i, double s) const {
    const double M = M_.at(i);
    const double lam = lambda_[i];
    const double th = theta_[i];
    switch (kind_) {
      case ActivationKind::ScaledTanh:
        if (std::abs(s) >= M) {
          throw std::domain_error("activation_inverse: value at saturation bound");
        }
        return th + (M / lam) * std::atanh(s / M);
      case ActivationKind::ScaledLogistic:
        if (s <= 0.0 || s >= M) {
          throw std::domain_error("activation_inverse: value at saturation bound");
        }
        return th + (M / (4.0 * lam)) * std::log(s / (M - s));
      case ActivationKind::PiecewiseLinearClamp:
        if (std::abs(s) >= M) {
          throw std::domain_error("activation_inverse: value at saturation bound");
        }
        return th + s / lam;
    }
    throw std::logic_error("ActivationFamily: bad kind");
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      out[i] = value(static_cast<std::size_t>(i), u[i]);
    }
    return out;
  }

 private:
  ActivationKind kind_;
  std::vector<double> M_;
  std::vector<double> lambda_;
  std::vector<double> theta_;
};

/// The compiled dynamic system u^Delta = -B u + A g(u) + J with diagonal
/// decay B, coupling A and saturating activations g.
struct HopfieldSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd B_diag;  // b_i = 1/(R_i C_i)
  Eigen::VectorXd J;
  ActivationFamily activation;

  std::size_t size() const { return static_cast<std::size_t>(B_diag.size()); }
  double b_max() const { return B_diag.maxCoeff(); }
  double b_min() const { return B_diag.minCoeff(); }
  double max_lipschitz() const { return activation.max_lipschitz(); }

  Eigen::VectorXd rhs(const Eigen::VectorXd& u) const {
    return -B_diag.cwiseProduct(u) + A * activation.apply(u) + J;
  }

  Eigen::MatrixXd rhs_jacobian(const Eigen::VectorXd& u) const {
    Eigen::MatrixXd Jf = -B_diag.asDiagonal().toDenseMatrix();
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      Jf.col(j) += A.col(j) * activation.derivative(static_cast<std::size_t>(j), u[j]);
    }
    return Jf;
  }
};

/// Binary strategy profile of the discrete game; 0 = defect, 1 = cooperate.
struct GameState {
  std::vector<int> S;
  double timestamp = 0.0;

  void validate() const {
    for (int s : S) {
      if (s != 0 && s != 1) {
        throw std::invalid_argument("GameState: entries must be 0 or 1");
      }
    }
  }
};

enum class UpdateMode { Synchronous, Sequential };

/// Payoff matrix [[b-c, b], [-c, 0]], rows = focal strategy C then D.
inline Eigen::Matrix2d payoff_matrix(const PayoffSpec& p) {
  p.validate();
  Eigen::Matrix2d P;
  P << p.b - p.c, p.b, -p.c, 0.0;
  return P;
}

/// Total payoff of node i: -k_i c S_i + sum over neighbors of b S_j.
inline double total_payoff(const Graph& g, const PayoffSpec& p,
                           const GameState& st, std::size_t i) {
  if (i >= g.size() || st.S.size() != g.size()) {
    throw std::out_of_range("total_payoff: bad index or state size");
  }
  double acc = -static_cast<double>(g.degree(i)) * p.c * st.S[i];
  for (std::size_t j : g.neighbors(i)) acc += p.b * st.S[j];
  return acc;
}

/// One step of the threshold rule: S'_i = 1 iff total payoff of i >= U_i.
/// Synchronous mode evaluates all payoffs on the old state; sequential
/// updates in index order.
inline GameState threshold_step(const Graph& g, const PayoffSpec& p,
                                const GameState& st,
                                const std::vector<double>& U, UpdateMode mode) {
  if (st.S.size() != g.size() || U.size() != g.size()) {
    throw std::invalid_argument("threshold_step: size mismatch");
  }
  GameState out = st;
  if (mode == UpdateMode::Synchronous) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      out.S[i] = total_payoff(g, p, st, i) >= U[i] ? 1 : 0;
    }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) {
      out.S[i] = total_payoff(g, p, out, i) >= U[i] ? 1 : 0;
    }
  }
  return out;
}

/// Assembles A, B, J from the graph and node parameters:
/// A_ii = -k_i c / C_i, A_ij = b d_ij / C_i, B_ii = 1/(R_i C_i).
inline HopfieldSystem build_system(const Graph& g,
                                   const std::vector<NodeParams>& params,
                                   const PayoffSpec& p,
                                   ActivationKind kind = ActivationKind::ScaledTanh) {
  p.validate();
  const std::size_t n = g.size();
  if (params.size() != n) {
    throw std::invalid_argument("build_system: params size mismatch");
  }
  std::vector<double> M, lambda, theta;
  M.reserve(n);
  lambda.reserve(n);
  theta.reserve(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd B(n), J(n);
  for (std::size_t i = 0; i < n; ++i) {
    params[i].validate();
    const double Ci = params[i].C;
    A(i, i) = -static_cast<double>(g.degree(i)) * p.c / Ci;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && g.has_edge(i, j)) A(i, j) = p.b / Ci;
    }
    B[i] = 1.0 / (params[i].R * Ci);
    J[i] = params[i].J;
    M.push_back(params[i].M);
    lambda.push_back(params[i].lambda);
    theta.push_back(params[i].theta);
  }
  return HopfieldSystem{std::move(A), std::move(B), std::move(J),
                        ActivationFamily(kind, std::move(M), std::move(lambda),
                                         std::move(theta))};
}

}  // namespace tsh

#endif  // TSHOPFIELD_NETWORK_HPP
