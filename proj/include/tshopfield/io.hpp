#ifndef TSHOPFIELD_IO_HPP
#define TSHOPFIELD_IO_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tshopfield/certificates.hpp"
#include "tshopfield/dynamics.hpp"
#include "tshopfield/network.hpp"
#include "tshopfield/timescale.hpp"

namespace tsh {

using json = nlohmann::json;

/// 17 significant digits: enough to round-trip any double.
inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Time-scale files. A file is an array of element objects (or an object
// with an "elements" array). Element forms:
//   {"interval": [a, b]}            b may be the string "inf"
//   {"point": t}
//   {"grid": {"start": a, "stop": b, "step": h}}
//   {"periodic": {"block": [elements...], "period": p, "repeat": n | "inf"}}
// ---------------------------------------------------------------------------

namespace detail {

inline double json_endpoint(const json& v, bool allow_inf) {
  if (v.is_string() && v.get<std::string>() == "inf") {
    if (!allow_inf) throw std::invalid_argument("timescale: \"inf\" not allowed here");
    return std::numeric_limits<double>::infinity();
  }
  if (!v.is_number()) throw std::invalid_argument("timescale: endpoint must be a number");
  return v.get<double>();
}

inline void append_simple_element(const json& e, std::vector<Interval>& out,
                                  bool allow_inf) {
  if (e.contains("interval")) {
    const auto& iv = e.at("interval");
    if (!iv.is_array() || iv.size() != 2) {
      throw std::invalid_argument("timescale: \"interval\" must be [a, b]");
    }
    out.push_back({json_endpoint(iv[0], false), json_endpoint(iv[1], allow_inf)});
  } else if (e.contains("point")) {
    const double t = json_endpoint(e.at("point"), false);
    out.push_back({t, t});
  } else if (e.contains("grid")) {
    const auto& gr = e.at("grid");
    const double start = gr.at("start").get<double>();
    const double stop = gr.at("stop").get<double>();
    const double step = gr.at("step").get<double>();
    if (!(step > 0.0) || stop < start) {
      throw std::invalid_argument("timescale: bad grid");
    }
    const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= count; ++k) {
      const double t = start + k * step;
      out.push_back({t, t});
    }
  } else {
    throw std::invalid_argument("timescale: unknown element form");
  }
}

}  // namespace detail

inline TimeScale parse_timescale(const json& doc) {
  const json& arr = doc.is_object() && doc.contains("elements")
                        ? doc.at("elements")
                        : doc;
  if (!arr.is_array() || arr.empty()) {
    throw std::invalid_argument("timescale: expected a nonempty element array");
  }
  std::vector<Interval> raw;
  struct TailSpec {
    std::vector<Interval> block;
    double period;
  };
  std::optional<TailSpec> tail;
  bool has_inf_interval = false;
  for (const auto& e : arr) {
    if (e.contains("periodic")) {
      const auto& pe = e.at("periodic");
      std::vector<Interval> block;
      for (const auto& be : pe.at("block")) {
        detail::append_simple_element(be, block, false);
      }
      const double period = pe.at("period").get<double>();
      const auto& rep = pe.at("repeat");
      if (rep.is_string() && rep.get<std::string>() == "inf") {
        if (tail) throw std::invalid_argument("timescale: multiple infinite tails");
        tail = TailSpec{std::move(block), period};
      } else {
        const long n = rep.get<long>();
        if (n < 1) throw std::invalid_argument("timescale: repeat must be >= 1");
        for (long m = 0; m < n; ++m) {
          for (const auto& iv : block) {
            raw.push_back({iv.a + m * period, iv.b + m * period});
          }
        }
      }
    } else {
      const std::size_t before = raw.size();
      detail::append_simple_element(e, raw, true);
      for (std::size_t k = before; k < raw.size(); ++k) {
        if (std::isinf(raw[k].b)) has_inf_interval = true;
      }
    }
  }
  if (raw.empty() && tail) {
    // Block covering the whole period: the union is a half-line.
    if (tail->block.size() == 1 &&
        std::abs((tail->block[0].b - tail->block[0].a) - tail->period) <=
            TimeScale::kMembershipTol) {
      return TimeScale::normalize(
          {{tail->block[0].a, std::numeric_limits<double>::infinity()}}, true);
    }
    // A pure periodic scale still needs a finite seed for normalize; use
    // the block's first repetition and start the tail one period later.
    for (const auto& iv : tail->block) raw.push_back(iv);
    std::vector<Interval> shifted;
    for (const auto& iv : tail->block) {
      shifted.push_back({iv.a + tail->period, iv.b + tail->period});
    }
    TimeScale ts = TimeScale::normalize(std::move(raw));
    return ts.with_periodic_tail(std::move(shifted), tail->period);
  }
  TimeScale ts = TimeScale::normalize(std::move(raw), has_inf_interval);
  if (tail) ts = ts.with_periodic_tail(tail->block, tail->period);
  return ts;
}

inline TimeScale load_timescale(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open timescale file: " + path);
  json doc = json::parse(in);
  return parse_timescale(doc);
}

// ---------------------------------------------------------------------------
// Network files:
// {"nodes":[{"id","C","R","lambda","M","J","theta","U"}...],
//  "edges":[[i,j]...], "payoff":{"b","c"},
//  "activation":"tanh"|"logistic"|"pwl"}
// ---------------------------------------------------------------------------

struct NetworkSpec {
  Graph graph;
  std::vector<NodeParams> params;
  PayoffSpec payoff;
  ActivationKind activation;
  std::vector<std::string> labels;

  HopfieldSystem build() const {
    return build_system(graph, params, payoff, activation);
  }
};

inline ActivationKind parse_activation(const std::string& s) {
  if (s == "tanh") return ActivationKind::ScaledTanh;
  if (s == "logistic") return ActivationKind::ScaledLogistic;
  if (s == "pwl") return ActivationKind::PiecewiseLinearClamp;
  throw std::invalid_argument("network: unknown activation \"" + s + "\"");
}

inline std::string activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::ScaledTanh: return "tanh";
    case ActivationKind::ScaledLogistic: return "logistic";
    case ActivationKind::PiecewiseLinearClamp: return "pwl";
  }
  return "tanh";
}

inline NetworkSpec parse_network(const json& doc) {
  const auto& nodes = doc.at("nodes");
  if (!nodes.is_array() || nodes.empty()) {
    throw std::invalid_argument("network: \"nodes\" must be a nonempty array");
  }
  const std::size_t n = nodes.size();
  Graph g(n);
  std::vector<NodeParams> params;
  std::vector<std::string> labels;
  for (const auto& nd : nodes) {
    NodeParams np;
    np.C = nd.value("C", 1.0);
    np.R = nd.value("R", 1.0);
    np.lambda = nd.value("lambda", 1.0);
    np.M = nd.value("M", 1.0);
    np.J = nd.value("J", 0.0);
    np.theta = nd.value("theta", 0.0);
    np.U = nd.value("U", 0.0);
    np.validate();
    params.push_back(np);
    if (nd.contains("id")) {
      labels.push_back(nd.at("id").is_string()
                           ? nd.at("id").get<std::string>()
                           : std::to_string(nd.at("id").get<long>()));
    } else {
      labels.push_back(std::to_string(labels.size()));
    }
  }
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 2) {
      throw std::invalid_argument("network: each edge must be [i, j]");
    }
    g.add_edge(e[0].get<std::size_t>(), e[1].get<std::size_t>());
  }
  PayoffSpec p{doc.at("payoff").at("b").get<double>(),
               doc.at("payoff").at("c").get<double>()};
  p.validate();
  const ActivationKind kind = parse_activation(doc.value("activation", "tanh"));
  return NetworkSpec{std::move(g), std::move(params), p, kind, std::move(labels)};
}

inline NetworkSpec load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  json doc = json::parse(in);
  return parse_network(doc);
}

inline json network_to_json(const NetworkSpec& spec) {
  json doc;
  doc["nodes"] = json::array();
  for (std::size_t i = 0; i < spec.graph.size(); ++i) {
    const auto& np = spec.params[i];
    doc["nodes"].push_back({{"id", spec.labels[i]},
                            {"C", np.C},
                            {"R", np.R},
                            {"lambda", np.lambda},
                            {"M", np.M},
                            {"J", np.J},
                            {"theta", np.theta},
                            {"U", np.U}});
  }
  doc["edges"] = json::array();
  for (std::size_t i = 0; i < spec.graph.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.graph.size(); ++j) {
      if (spec.graph.has_edge(i, j)) doc["edges"].push_back({i, j});
    }
  }
  doc["payoff"] = {{"b", spec.payoff.b}, {"c", spec.payoff.c}};
  doc["activation"] = activation_name(spec.activation);
  return doc;
}

// ---------------------------------------------------------------------------
// Report serialization. Every condition verdict carries
// {pass, lhs, rhs, slack, witness}.
// ---------------------------------------------------------------------------

inline json to_json(const Verdict& v) {
  return {{"pass", v.pass},
          {"lhs", v.lhs},
          {"rhs", v.rhs},
          {"slack", v.slack},
          {"witness", v.witness}};
}

inline json to_json(const MMatrixVerdict& v) {
  return {{"is_z_pattern", v.is_z_pattern},
          {"eigen_real_parts", v.eigen_real_parts},
          {"is_m_matrix", v.is_m_matrix},
          {"gershgorin_sufficient", v.gershgorin_sufficient},
          {"marginal", v.marginal},
          {"eigen_ok", v.eigen_ok},
          {"witness", v.witness}};
}

inline json to_json(const StabilityVerdict& v) {
  return {{"condition", to_json(v.condition)},
          {"xi_star", v.xi_star},
          {"corollary_pass", v.corollary_pass},
          {"spectral_norm_A", v.spectral_norm_A},
          {"mu_star", v.mu_star},
          {"horizon_unbounded", v.horizon_unbounded}};
}

inline json to_json(const CertificateReport& rep) {
  json reg;
  reg["pass"] = rep.regressivity.pass;
  reg["graininess_values"] = rep.regressivity.graininess_values;
  reg["per_graininess"] = json::array();
  for (const auto& v : rep.regressivity.per_graininess) {
    reg["per_graininess"].push_back(to_json(v));
  }
  json deg;
  deg["all_pass"] = rep.degree_condition.all_pass;
  deg["per_node"] = json::array();
  for (const auto& v : rep.degree_condition.per_node) {
    deg["per_node"].push_back(to_json(v));
  }
  json expo;
  expo["pass"] = rep.exponential.pass;
  expo["beta"] = rep.exponential.beta;
  expo["regressive"] = rep.exponential.regressive;
  expo["rate"] = to_json(rep.exponential.rate);
  expo["corollary"] = to_json(rep.exponential.corollary);
  return {{"regressivity", reg},
          {"equilibrium_exists", rep.equilibrium_exists},
          {"r0", rep.r0},
          {"uniqueness", to_json(rep.uniqueness)},
          {"degree_condition", deg},
          {"size_dependent", to_json(rep.size_dependent)},
          {"size_independent", to_json(rep.size_independent)},
          {"exponential", expo},
          {"norms",
           {{"spectral", rep.norm_2},
            {"one", rep.norm_1},
            {"inf", rep.norm_inf},
            {"sqrt_n_inf", rep.sqrt_n_norm_inf}}},
          {"lambda_convention_disagreement", rep.lambda_convention_disagreement},
          {"all_pass", rep.all_pass()}};
}

inline json to_json(const EquilibriumResult& r) {
  std::vector<double> u(r.u_star.data(), r.u_star.data() + r.u_star.size());
  return {{"u_star", u},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"within_r0", r.within_r0}};
}

inline json to_json(const EnvelopeCheck& c) {
  json viols = json::array();
  for (const auto& v : c.violations) {
    viols.push_back({{"t", v.t}, {"norm_z", v.norm_z}, {"bound", v.bound}});
  }
  return {{"beta", c.beta},
          {"max_ratio", c.max_ratio},
          {"pass", c.pass},
          {"violations", viols}};
}

/// Trajectory CSV: t,node_0,...,node_{n-1},V,envelope_bound.
/// envelope_bound is empty when no certified rate is available.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const Eigen::VectorXd& u_star,
                                 std::optional<double> beta,
                                 const TimeScale& ts) {
  const Eigen::Index n = traj.samples.empty() ? 0 : traj.samples.front().u.size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",node_" << i;
  os << ",V,envelope_bound\n";
  const double t0 = traj.samples.empty() ? 0.0 : traj.samples.front().t;
  const double z0 =
      traj.samples.empty() ? 0.0 : (traj.samples.front().u - u_star).norm();
  for (const auto& s : traj.samples) {
    os << fmt_double(s.t);
    for (Eigen::Index i = 0; i < n; ++i) os << "," << fmt_double(s.u[i]);
    os << "," << fmt_double((s.u - u_star).squaredNorm()) << ",";
    if (beta) os << fmt_double(z0 * ts.exp_ts(-*beta, s.t, t0));
    os << "\n";
  }
}

}  // namespace tsh

#endif  // TSHOPFIELD_IO_HPP
