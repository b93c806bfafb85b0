#include "newtonmr/line_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace newtonmr {

namespace {

void check_backtracking(double alpha0, double factor) {
  if (!(alpha0 > 0.0)) throw std::invalid_argument("line search: alpha0 must be positive");
  if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("line search: backtrack factor must lie in (0, 1)");
}

// Minimizer of the cubic matching phi and phi' at a and b; NaN if the cubic
// has no real minimizer.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0.0) return std::nan("");
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

struct Sample {
  double alpha;
  double f;
  double slope;  // <grad f(x + alpha p), p>
};

}  // namespace

LineSearchResult linesearch_grad_armijo(const ObjectiveOracle& oracle, const Vector& x, const Vector& g,
                                        const Vector& p, const Vector& hg, double rho, double alpha0,
                                        double backtrack_factor, std::size_t max_trials) {
  check_backtracking(alpha0, backtrack_factor);
  const double gg = g.squaredNorm();
  const double slope = p.dot(hg);
  LineSearchResult out;
  double alpha = alpha0;
  while (out.trials < max_trials) {
    ++out.trials;
    const Vector xt = x + alpha * p;
    const double ft = oracle.value(xt);
    const Vector gt = oracle.gradient(xt);
    if (std::isfinite(ft) && gt.allFinite() && gt.squaredNorm() <= gg + 2.0 * rho * alpha * slope) {
      out.alpha = alpha;
      out.success = true;
      return out;
    }
    alpha *= backtrack_factor;
  }
  return out;
}

LineSearchResult linesearch_armijo(const ObjectiveOracle& oracle, const Vector& x, double f0, const Vector& g,
                                   const Vector& p, double c1, double alpha0, double backtrack_factor,
                                   std::size_t max_trials) {
  check_backtracking(alpha0, backtrack_factor);
  const double slope = g.dot(p);
  if (!(slope < 0.0)) throw std::invalid_argument("linesearch_armijo: p is not a descent direction");
  LineSearchResult out;
  double alpha = alpha0;
  while (out.trials < max_trials) {
    ++out.trials;
    const double ft = oracle.value(x + alpha * p);
    if (std::isfinite(ft) && ft <= f0 + c1 * alpha * slope) {
      out.alpha = alpha;
      out.success = true;
      return out;
    }
    alpha *= backtrack_factor;
  }
  return out;
}

LineSearchResult wolfe_linesearch(const ObjectiveOracle& oracle, const Vector& x, double f0, const Vector& g,
                                  const Vector& p, double c1, double c2, double alpha0, std::size_t max_trials) {
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("wolfe_linesearch: need 0 < c1 < c2 < 1");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("wolfe_linesearch: alpha0 must be positive");
  const double d0 = g.dot(p);
  if (!(d0 < 0.0)) throw std::invalid_argument("wolfe_linesearch: p is not a descent direction");

  LineSearchResult out;
  auto sample = [&](double alpha) {
    ++out.trials;
    const Vector xt = x + alpha * p;
    const double ft = oracle.value(xt);
    const Vector gt = oracle.gradient(xt);
    double slope = gt.dot(p);
    if (!std::isfinite(ft) || !std::isfinite(slope)) return Sample{alpha, INFINITY, INFINITY};
    return Sample{alpha, ft, slope};
  };
  auto sufficient = [&](const Sample& s) { return s.f <= f0 + c1 * s.alpha * d0; };
  auto curvature = [&](const Sample& s) { return std::abs(s.slope) <= -c2 * d0; };
  auto accept = [&](double alpha) {
    out.alpha = alpha;
    out.success = true;
    return out;
  };

  // Zoom on a bracket [lo, hi] (unordered) containing a strong Wolfe point;
  // lo satisfies sufficient decrease and has the lowest f seen so far.
  auto zoom = [&](Sample lo, Sample hi) {
    while (out.trials < max_trials) {
      const double left = std::min(lo.alpha, hi.alpha);
      const double width = std::abs(hi.alpha - lo.alpha);
      double alpha = std::isfinite(hi.f) ? cubic_minimizer(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f, hi.slope)
                                          : std::nan("");
      if (!std::isfinite(alpha) || alpha < left + 0.1 * width || alpha > left + 0.9 * width) {
        alpha = 0.5 * (lo.alpha + hi.alpha);
      }
      if (width <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      const Sample s = sample(alpha);
      if (!sufficient(s) || s.f >= lo.f) {
        hi = s;
      } else {
        if (curvature(s)) return accept(s.alpha);
        if (s.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = s;
      }
    }
    return out;
  };

  constexpr double kExpansion = 2.0;
  Sample prev{0.0, f0, d0};
  double alpha = alpha0;
  while (out.trials < max_trials) {
    const Sample s = sample(alpha);
    if (!sufficient(s) || (out.trials > 1 && s.f >= prev.f)) return zoom(prev, s);
    if (curvature(s)) return accept(s.alpha);
    if (s.slope >= 0.0) return zoom(s, prev);
    prev = s;
    alpha *= kExpansion;
  }
  return out;
}

}  // namespace newtonmr
