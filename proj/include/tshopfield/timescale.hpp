#ifndef TSHOPFIELD_TIMESCALE_HPP
#define TSHOPFIELD_TIMESCALE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tsh {

/// Closed interval [a, b]; a == b encodes an isolated point.
struct Interval {
  double a;
  double b;
};

/// Point classification flags. isolated/dense are the derived combinations.
struct PointClass {
  bool right_scattered = false;
  bool right_dense = false;
  bool left_scattered = false;
  bool left_dense = false;

  bool isolated() const { return right_scattered && left_scattered; }
  bool dense() const { return right_dense && left_dense; }
};

/// One step of a horizon decomposition: either a right-scattered jump of
/// width mu starting at t, or a continuous run [a, b].
struct ScatteredJump {
  double t;
  double mu;
};
struct ContinuousRun {
  double a;
  double b;
};
using Piece = std::variant<ScatteredJump, ContinuousRun>;

namespace detail {

inline bool is_finite(double x) { return std::isfinite(x); }

// Adaptive Simpson on [a, b] with absolute tolerance.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double fa, double fm, double fb,
                               double whole, double tol, int depth) {
  if (depth > 60) {
    throw std::runtime_error("delta_integral: quadrature failed to converge");
  }
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

inline double integrate_segment(const std::function<double(double)>& f,
                                double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 0);
}

}  // namespace detail

/// The group operation on regressive constants: p + q + p*q*mu.
inline double circle_plus(double p, double q, double mu_t) {
  return p + q + p * q * mu_t;
}

/// A time scale: a normalized finite union of disjoint closed intervals,
/// optionally extended to +inf by a half-infinite final interval or by a
/// periodically repeated block. Immutable after construction; all queries
/// are pure.
class TimeScale {
 public:
  static constexpr double kMembershipTol = 1e-12;

  /// Infinite periodic tail: the union over m >= 0 of (block + m*period).
  /// Block coordinates are absolute (first repetition).
  struct PeriodicTail {
    std::vector<Interval> block;
    double period = 0.0;
  };

  /// Builds the normalized form: sorts, merges touching/overlapping
  /// elements. Throws on empty input or non-finite endpoints.
  static TimeScale normalize(std::vector<Interval> raw,
                             bool last_unbounded = false) {
    if (raw.empty()) {
      throw std::invalid_argument("TimeScale: a time scale is nonempty");
    }
    for (const auto& iv : raw) {
      const bool b_ok = detail::is_finite(iv.b) ||
                        (last_unbounded && iv.b == std::numeric_limits<double>::infinity());
      if (!detail::is_finite(iv.a) || !b_ok || iv.a > iv.b) {
        throw std::invalid_argument("TimeScale: invalid interval endpoint");
      }
    }
    std::sort(raw.begin(), raw.end(),
              [](const Interval& x, const Interval& y) { return x.a < y.a; });
    std::vector<Interval> merged;
    merged.push_back(raw.front());
    for (std::size_t i = 1; i < raw.size(); ++i) {
      if (raw[i].a <= merged.back().b + kMembershipTol) {
        merged.back().b = std::max(merged.back().b, raw[i].b);
      } else {
        merged.push_back(raw[i]);
      }
    }
    const bool unbounded =
        merged.back().b == std::numeric_limits<double>::infinity();
    TimeScale ts;
    ts.elements_ = std::move(merged);
    ts.unbounded_above_ = unbounded;
    return ts;
  }

  /// Attaches an infinite periodic tail. The block must be normalized,
  /// lie after all finite elements, and leave a strictly positive gap to
  /// its next repetition (a block covering the full period is accepted and
  /// collapses into a half-infinite interval).
  TimeScale with_periodic_tail(std::vector<Interval> block,
                               double period) const {
    if (block.empty() || period <= 0.0 || !detail::is_finite(period)) {
      throw std::invalid_argument("TimeScale: invalid periodic tail");
    }
    std::sort(block.begin(), block.end(),
              [](const Interval& x, const Interval& y) { return x.a < y.a; });
    const double a0 = block.front().a;
    const double bend = block.back().b;
    if (bend - a0 > period) {
      throw std::invalid_argument("TimeScale: periodic block longer than period");
    }
    TimeScale ts = *this;
    if (!ts.elements_.empty() && a0 <= ts.elements_.back().b + kMembershipTol) {
      throw std::invalid_argument(
          "TimeScale: periodic tail overlaps finite elements");
    }
    // Full-period block is just a half-line.
    if (block.size() == 1 && std::abs((bend - a0) - period) <= kMembershipTol) {
      ts.elements_.push_back({a0, std::numeric_limits<double>::infinity()});
      ts.unbounded_above_ = true;
      return ts;
    }
    if (a0 + period - bend <= kMembershipTol) {
      throw std::invalid_argument(
          "TimeScale: periodic block touches its next repetition");
    }
    ts.tail_ = PeriodicTail{std::move(block), period};
    return ts;
  }

  const std::vector<Interval>& elements() const { return elements_; }
  const std::optional<PeriodicTail>& periodic_tail() const { return tail_; }

  double inf_t() const { return elements_.front().a; }
  bool unbounded_above() const { return unbounded_above_ || tail_.has_value(); }
  /// sup T; +inf when unbounded.
  double sup_t() const {
    if (unbounded_above()) return std::numeric_limits<double>::infinity();
    return elements_.back().b;
  }

  bool contains(double t) const { return locate(t).has_value(); }

  /// Forward jump sigma(t) = inf{s in T : s > t}; sigma(sup T) = sup T.
  double sigma(double t) const {
    const Place p = require(t);
    if (p.t < p.b) return p.t;
    return p.next_a.value_or(p.t);
  }

  /// Backward jump rho(t) = sup{s in T : s < t}; rho(inf T) = inf T.
  double rho(double t) const {
    const Place p = require(t);
    if (p.t > p.a) return p.t;
    return p.prev_b.value_or(p.t);
  }

  /// Graininess mu(t) = sigma(t) - t.
  double mu(double t) const { return sigma(t) - t; }

  PointClass classify(double t) const {
    const Place p = require(t);
    PointClass pc;
    const double s = (p.t < p.b) ? p.t : p.next_a.value_or(p.t);
    const double r = (p.t > p.a) ? p.t : p.prev_b.value_or(p.t);
    pc.right_scattered = s > p.t;
    pc.right_dense = !pc.right_scattered;
    pc.left_scattered = r < p.t;
    pc.left_dense = !pc.left_scattered;
    return pc;
  }

  /// Splits [t0, tf] into scattered jumps and continuous runs, in order.
  std::vector<Piece> decompose(double t0, double tf) const {
    Place p0 = require(t0);
    require(tf);
    if (tf < p0.t) {
      throw std::invalid_argument("TimeScale: decompose needs t0 <= tf");
    }
    std::vector<Piece> pieces;
    double t = p0.t;
    while (t < tf) {
      const Place p = require(t);
      if (t < p.b) {
        const double end = std::min(p.b, tf);
        pieces.push_back(ContinuousRun{t, end});
        t = end;
      } else {
        if (!p.next_a) {
          throw std::logic_error("TimeScale: ran past sup T");
        }
        pieces.push_back(ScatteredJump{t, *p.next_a - t});
        t = *p.next_a;
      }
    }
    return pieces;
  }

  /// Supremum of graininess over [t0, tf].
  double mu_star(double t0, double tf) const {
    double m = 0.0;
    for (const auto& piece : decompose(t0, tf)) {
      if (const auto* j = std::get_if<ScatteredJump>(&piece)) {
        m = std::max(m, j->mu);
      }
    }
    return m;
  }

  /// The finitely many distinct graininess values observed on [t0, tf].
  /// Includes 0 when the horizon meets a continuous run.
  std::vector<double> distinct_graininess(double t0, double tf) const {
    std::vector<double> mus;
    for (const auto& piece : decompose(t0, tf)) {
      if (const auto* j = std::get_if<ScatteredJump>(&piece)) {
        mus.push_back(j->mu);
      } else {
        mus.push_back(0.0);
      }
    }
    std::sort(mus.begin(), mus.end());
    mus.erase(std::unique(mus.begin(), mus.end(),
                          [](double x, double y) {
                            return std::abs(x - y) <= kMembershipTol;
                          }),
              mus.end());
    return mus;
  }

  /// 1 + mu(t)p(t) != 0 at every point of [t0, tf]; only scattered points
  /// can fail.
  bool is_regressive(const std::function<double(double)>& p, double t0,
                     double tf) const {
    if (tf < t0) throw std::invalid_argument("TimeScale: empty horizon");
    for (const auto& piece : decompose(t0, tf)) {
      if (const auto* j = std::get_if<ScatteredJump>(&piece)) {
        if (1.0 + j->mu * p(j->t) == 0.0) return false;
      }
    }
    return true;
  }

  bool is_positive_regressive(const std::function<double(double)>& p,
                              double t0, double tf) const {
    if (tf < t0) throw std::invalid_argument("TimeScale: empty horizon");
    for (const auto& piece : decompose(t0, tf)) {
      if (const auto* j = std::get_if<ScatteredJump>(&piece)) {
        if (1.0 + j->mu * p(j->t) <= 0.0) return false;
      }
    }
    return true;
  }

  /// Time-scale exponential e_p(t, t0) for constant p: classical
  /// exponential across continuous runs times (1 + mu p) across scattered
  /// points. Accumulated in the log domain with separate sign parity, so
  /// long scattered runs with negative factors neither overflow nor lose
  /// the sign.
  double exp_ts(double p, double t, double t0) const {
    if (t < t0) throw std::invalid_argument("exp_ts: needs t >= t0");
    double log_mag = 0.0;
    int sign = 1;
    for (const auto& piece : decompose(t0, t)) {
      if (const auto* j = std::get_if<ScatteredJump>(&piece)) {
        const double factor = 1.0 + j->mu * p;
        if (factor == 0.0) {
          throw std::domain_error("exp_ts: p is not regressive (1 + mu p = 0)");
        }
        if (factor < 0.0) sign = -sign;
        log_mag += std::log(std::abs(factor));
      } else {
        const auto& r = std::get<ContinuousRun>(piece);
        log_mag += p * (r.b - r.a);
      }
    }
    return sign * std::exp(log_mag);
  }

  /// Definite delta-integral of f over [a, b): sum of mu(s) f(s) over
  /// scattered points plus adaptive quadrature over continuous runs.
  double delta_integral(const std::function<double(double)>& f, double a,
                        double b, double quad_tol = 1e-10) const {
    if (b < a) throw std::invalid_argument("delta_integral: needs a <= b");
    double total = 0.0;
    for (const auto& piece : decompose(a, b)) {
      if (const auto* j = std::get_if<ScatteredJump>(&piece)) {
        total += j->mu * f(j->t);
      } else {
        const auto& r = std::get<ContinuousRun>(piece);
        total += detail::integrate_segment(f, r.a, r.b, quad_tol);
      }
    }
    return total;
  }

 private:
  // Local neighborhood of a member point: the containing interval [a, b]
  // (snapped t inside), the previous element's end and next element's
  // start when they exist.
  struct Place {
    double t;
    double a;
    double b;
    std::optional<double> prev_b;
    std::optional<double> next_a;
  };

  std::optional<Place> locate(double t) const {
    if (!detail::is_finite(t)) return std::nullopt;
    // Finite part, binary search by interval start.
    auto it = std::upper_bound(
        elements_.begin(), elements_.end(), t,
        [](double v, const Interval& iv) { return v < iv.a; });
    if (it != elements_.begin()) {
      const auto cur = std::prev(it);
      if (t <= cur->b + kMembershipTol) {
        Place p;
        p.a = cur->a;
        p.b = cur->b;
        p.t = std::clamp(t, p.a, p.b);
        if (cur != elements_.begin()) p.prev_b = std::prev(cur)->b;
        if (it != elements_.end()) {
          p.next_a = it->a;
        } else if (tail_) {
          p.next_a = tail_->block.front().a;
        }
        return p;
      }
    } else if (t >= elements_.front().a - kMembershipTol) {
      // Within tolerance below the very first point.
      Place p;
      p.a = elements_.front().a;
      p.b = elements_.front().b;
      p.t = p.a;
      if (elements_.size() > 1) {
        p.next_a = elements_[1].a;
      } else if (tail_) {
        p.next_a = tail_->block.front().a;
      }
      return p;
    }
    if (!tail_) return std::nullopt;
    return locate_in_tail(t);
  }

  std::optional<Place> locate_in_tail(double t) const {
    const auto& blk = tail_->block;
    const double a0 = blk.front().a;
    const double period = tail_->period;
    if (t < a0 - kMembershipTol) return std::nullopt;
    // Candidate repetitions m and m+1 (t may sit within tolerance of the
    // next block's first point).
    const double m0 = std::floor((t - a0) / period);
    for (double m : {m0, m0 + 1.0}) {
      if (m < 0.0) continue;
      const double shift = m * period;
      const double local = t - shift;
      auto it = std::upper_bound(
          blk.begin(), blk.end(), local,
          [](double v, const Interval& iv) { return v < iv.a; });
      std::size_t idx;
      if (it != blk.begin() && local <= std::prev(it)->b + kMembershipTol) {
        idx = static_cast<std::size_t>(std::prev(it) - blk.begin());
      } else if (it != blk.end() && local >= it->a - kMembershipTol) {
        idx = static_cast<std::size_t>(it - blk.begin());
      } else {
        continue;
      }
      Place p;
      p.a = blk[idx].a + shift;
      p.b = blk[idx].b + shift;
      p.t = std::clamp(t, p.a, p.b);
      if (idx + 1 < blk.size()) {
        p.next_a = blk[idx + 1].a + shift;
      } else {
        p.next_a = a0 + shift + period;
      }
      if (idx > 0) {
        p.prev_b = blk[idx - 1].b + shift;
      } else if (m > 0.0) {
        p.prev_b = blk.back().b + shift - period;
      } else if (!elements_.empty()) {
        p.prev_b = elements_.back().b;
      }
      return p;
    }
    return std::nullopt;
  }

  Place require(double t) const {
    auto p = locate(t);
    if (!p) {
      throw std::domain_error("TimeScale: t = " + std::to_string(t) +
                              " is not a member of the time scale");
    }
    return *p;
  }

  std::vector<Interval> elements_;
  bool unbounded_above_ = false;
  std::optional<PeriodicTail> tail_;
};

}  // namespace tsh

#endif  // TSHOPFIELD_TIMESCALE_HPP
