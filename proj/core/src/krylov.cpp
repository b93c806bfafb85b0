#include "newtonmr/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace newtonmr {

namespace {

// Lanczos vectors with norm below this fraction of the start vector norm are
// treated as an exact invariant subspace.
constexpr double kBreakdownTol = 1e-14;


struct Reflection {
  double c;
  double s;
  double r;
};

// Symmetric (Householder-like) reflection [c s; s -c] mapping (a, b) to
// (r, 0) with r >= 0.
Reflection sym_ortho(double a, double b) {
  if (b == 0.0) {
    return {a == 0.0 ? 1.0 : std::copysign(1.0, a), 0.0, std::abs(a)};
  }
  if (a == 0.0) {
    return {0.0, std::copysign(1.0, b), std::abs(b)};
  }
  if (std::abs(b) > std::abs(a)) {
    const double t = a / b;
    const double s = std::copysign(1.0, b) / std::sqrt(1.0 + t * t);
    return {s * t, s, b / s};
  }
  const double t = b / a;
  const double c = std::copysign(1.0, a) / std::sqrt(1.0 + t * t);
  return {c, c * t, a / c};
}

// Symmetric Lanczos process with optional full reorthogonalization.
class Lanczos {
public:
  struct Step {
    Vector v;   // the vector this step was taken from
    Vector av;  // A v
    double alfa;
    double beta_next;
    bool breakdown;
  };

  Lanczos(const SymmetricOperator& op, const Vector& start, bool reorthogonalize, std::size_t& applications)
      : op_(op), reorthogonalize_(reorthogonalize), applications_(applications) {
    beta1_ = start.norm();
    v_ = start / beta1_;
    v_prev_ = Vector::Zero(start.size());
  }

  Step advance() {
    Vector av = op_(v_);
    ++applications_;
    Vector p = av;
    if (beta_ != 0.0) p -= beta_ * v_prev_;
    const double alfa = v_.dot(p);
    p -= alfa * v_;
    if (reorthogonalize_) {
      basis_.push_back(v_);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis_) p -= q.dot(p) * q;
      }
    }
    double betan = p.norm();
    const bool breakdown = betan <= kBreakdownTol * beta1_;
    if (breakdown) betan = 0.0;

    Step out{std::move(v_), std::move(av), alfa, betan, breakdown};
    v_prev_ = out.v;
    v_ = breakdown ? Vector::Zero(p.size()) : Vector(p / betan);
    beta_ = betan;
    return out;
  }

  double beta1() const { return beta1_; }
  /// The next Lanczos vector (zero after a breakdown).
  const Vector& v() const { return v_; }

private:
  const SymmetricOperator& op_;
  bool reorthogonalize_;
  std::size_t& applications_;
  double beta1_ = 0.0;
  double beta_ = 0.0;
  Vector v_, v_prev_;
  std::vector<Vector> basis_;
};

// Short-recurrence MINRES-QLP (QLP updates from the first iteration on).
//
// Solves min ||A x - b|| over K(A, b), so the projected right-hand side is
// beta1 * e1.
//
// Alongside x = W u the engine tracks A x = (A W) u using the stored
// products A v_k, so no extra operator applications are needed.
class MinresQlpEngine {
public:
  MinresQlpEngine(const SymmetricOperator& op, const Vector& b, bool reorthogonalize, double pivot_tol,
                  std::size_t& applications)
      : lanczos_(op, b, reorthogonalize, applications), pivot_tol_(pivot_tol) {
    const Index n = op.dim;
    phi_ = lanczos_.beta1();

    x_ = Vector::Zero(n);
    ax_ = Vector::Zero(n);
    xl2_ = Vector::Zero(n);
    axl2_ = Vector::Zero(n);
    w_ = Vector::Zero(n);
    wl_ = Vector::Zero(n);
    wl2_ = Vector::Zero(n);
    aw_ = Vector::Zero(n);
    awl_ = Vector::Zero(n);
    awl2_ = Vector::Zero(n);
  }

  // One Lanczos step plus the QLP update of x. Returns false once the
  // Krylov space is exhausted (breakdown) or the last pivot was singular.
  bool step() {
    ++k_;
    const double beta = beta_;
    const Lanczos::Step ls = lanczos_.advance();
    const Vector& v = ls.v;
    const Vector& av = ls.av;
    const double alfa = ls.alfa;
    const double betan = ls.beta_next;
    const bool breakdown = ls.breakdown;

    const double pnorm = std::sqrt(beta * beta + alfa * alfa + betan * betan);
    anorm_ = std::max(anorm_, pnorm);

    // Previous left reflection applied to the new column of T.
    const double dbar = dltan_;
    double dlta = cs_ * dbar + sn_ * alfa;
    const double gbar = sn_ * dbar - cs_ * alfa;
    eplnn_ = sn_ * betan;
    dltan_ = -cs_ * betan;

    // Current left reflection.
    gamal2_ = gamal_;
    gamal_ = gama_;
    const Reflection left = sym_ortho(gbar, betan);
    cs_ = left.c;
    sn_ = left.s;
    gama_ = left.r;
    taul2_ = taul_;
    taul_ = tau_;
    tau_ = cs_ * phi_;
    phi_ = sn_ * phi_;

    // Previous right reflection P_{k-2,k}.
    if (k_ > 2) {
      veplnl2_ = veplnl_;
      etal2_ = etal_;
      etal_ = eta_;
      const double dlta_tmp = sr2_ * vepln_ - cr2_ * dlta;
      veplnl_ = cr2_ * vepln_ + sr2_ * dlta;
      dlta = dlta_tmp;
      eta_ = sr2_ * gama_;
      gama_ = -cr2_ * gama_;
    }

    // Current right reflection P_{k-1,k}.
    if (k_ > 1) {
      const Reflection right = sym_ortho(gamal_, dlta);
      cr1_ = right.c;
      sr1_ = right.s;
      gamal_ = right.r;
      vepln_ = sr1_ * gama_;
      gama_ = -cr1_ * gama_;
    }

    anorm_ = std::max({anorm_, std::abs(gamal_), std::abs(gama_)});

    // Forward substitution with the last rows of L.
    ul4_ = ul3_;
    ul3_ = ul2_;
    if (k_ > 2) ul2_ = (taul2_ - etal2_ * ul4_ - veplnl2_ * ul3_) / gamal2_;
    if (k_ > 1) ul_ = (taul_ - etal_ * ul3_ - veplnl_ * ul2_) / gamal_;
    singular_ = !(std::abs(gama_) > pivot_tol_ * anorm_);
    u_ = singular_ ? 0.0 : (tau_ - eta_ * ul2_ - vepln_ * ul_) / gama_;

    // Columns of W = V P and of A W.
    if (k_ == 1) {
      wl2_ = wl_;
      wl_ = v * sr1_;
      w_ = -v * cr1_;
      awl2_ = awl_;
      awl_ = av * sr1_;
      aw_ = -av * cr1_;
    } else if (k_ == 2) {
      wl2_ = wl_;
      wl_ = w_ * cr1_ + v * sr1_;
      w_ = w_ * sr1_ - v * cr1_;
      awl2_ = awl_;
      awl_ = aw_ * cr1_ + av * sr1_;
      aw_ = aw_ * sr1_ - av * cr1_;
    } else {
      rotate_columns(wl2_, wl_, w_, v);
      rotate_columns(awl2_, awl_, aw_, av);
    }
    xl2_ += wl2_ * ul2_;
    axl2_ += awl2_ * ul2_;
    x_ = xl2_ + wl_ * ul_ + w_ * u_;
    ax_ = axl2_ + awl_ * ul_ + aw_ * u_;

    // Next right reflection P_{k-1,k+1} zeroes epsilon_{k+1}.
    const Reflection next = sym_ortho(gamal_, eplnn_);
    cr2_ = next.c;
    sr2_ = next.s;
    gamal_ = next.r;

    // Least-squares optimality estimate for the previous iterate.
    const double rootl = std::hypot(gbar, dltan_);
    rel_ls_residual_ = anorm_ > 0.0 ? rootl / anorm_ : 0.0;

    beta_ = betan;
    breakdown_ = breakdown;
    return !(breakdown_ || singular_);
  }

  const Vector& x() const { return x_; }
  const Vector& ax() const { return ax_; }
  std::size_t iterations() const { return k_; }
  bool breakdown() const { return breakdown_; }
  bool singular() const { return singular_; }
  double rel_ls_residual() const { return rel_ls_residual_; }

private:
  void rotate_columns(Vector& c2, Vector& c1, Vector& c0, const Vector& v) const {
    // c2 <- final column k-2, c1 <- column k-1, c0 <- column k.
    Vector old_l2 = std::move(c1);
    Vector old_l1 = std::move(c0);
    Vector col_k = old_l2 * sr2_ - v * cr2_;
    c2 = old_l2 * cr2_ + v * sr2_;
    c1 = old_l1 * cr1_ + col_k * sr1_;
    c0 = old_l1 * sr1_ - col_k * cr1_;
  }

  Lanczos lanczos_;
  double pivot_tol_;

  std::size_t k_ = 0;
  double beta_ = 0.0;

  double phi_ = 0.0, tau_ = 0.0, taul_ = 0.0, taul2_ = 0.0;
  double cs_ = -1.0, sn_ = 0.0, cr1_ = -1.0, sr1_ = 0.0, cr2_ = -1.0, sr2_ = 0.0;
  double dltan_ = 0.0, eplnn_ = 0.0;
  double gama_ = 0.0, gamal_ = 0.0, gamal2_ = 0.0;
  double eta_ = 0.0, etal_ = 0.0, etal2_ = 0.0;
  double vepln_ = 0.0, veplnl_ = 0.0, veplnl2_ = 0.0;
  double u_ = 0.0, ul_ = 0.0, ul2_ = 0.0, ul3_ = 0.0, ul4_ = 0.0;
  double anorm_ = 0.0;
  double rel_ls_residual_ = std::numeric_limits<double>::infinity();
  bool breakdown_ = false;
  bool singular_ = false;

  Vector x_, ax_, xl2_, axl2_;
  Vector w_, wl_, wl2_, aw_, awl_, awl2_;
};

// Range-restricted minimum residual: min ||A p + g|| over K_t(A, A g).
//
// With A V_t = V_{t+1} T_t and v_1 = A g / beta1, the objective is
// ||T_t y||^2 + 2 beta1 y_1 + ||g||^2, which needs only T_t and beta1, never
// a projection of g onto the (possibly no longer orthogonal) basis. Its
// minimizer solves T^T T y = -beta1 e1. With T = Q [R; 0], R^T z = -beta1 e1
// by forward substitution and p = V R^{-1} z = D z, so p updates one
// direction at a time like MINRES, and ||A p + g||^2 = ||g||^2 - ||z||^2.
// K_t(A, A g) lies in Range(A), where A is nonsingular, so T has full column
// rank and no QLP step is needed.
class RangeRestrictedEngine {
public:
  RangeRestrictedEngine(const SymmetricOperator& op, const Vector& hg, bool reorthogonalize, double pivot_tol,
                        std::size_t& applications)
      : lanczos_(op, hg, reorthogonalize, applications), pivot_tol_(pivot_tol) {
    const Index n = op.dim;
    p_ = Vector::Zero(n);
    ap_ = Vector::Zero(n);
    d_ = Vector::Zero(n);
    dl_ = Vector::Zero(n);
    ad_ = Vector::Zero(n);
    adl_ = Vector::Zero(n);
  }

  // Returns false after a breakdown or a negligible pivot; in the latter case
  // the iterate is left unchanged.
  bool step() {
    ++k_;
    const double beta = beta_;
    const Lanczos::Step ls = lanczos_.advance();
    anorm_ = std::max(anorm_, std::sqrt(beta * beta + ls.alfa * ls.alfa + ls.beta_next * ls.beta_next));

    const double oldeps = epsln_;
    const double delta = cs_ * dbar_ + sn_ * ls.alfa;
    const double gbar = sn_ * dbar_ - cs_ * ls.alfa;
    epsln_ = sn_ * ls.beta_next;
    dbar_ = -cs_ * ls.beta_next;
    const Reflection left = sym_ortho(gbar, ls.beta_next);
    cs_ = left.c;
    sn_ = left.s;
    beta_ = ls.beta_next;
    const double gamma = left.r;
    if (!(gamma > pivot_tol_ * anorm_)) {
      stalled_ = true;
      return false;
    }

    const double z = ((k_ == 1 ? -lanczos_.beta1() : 0.0) - oldeps * zl2_ - delta * zl_) / gamma;
    Vector d = (ls.v - oldeps * dl_ - delta * d_) / gamma;
    Vector ad = (ls.av - oldeps * adl_ - delta * ad_) / gamma;
    p_ += z * d;
    ap_ += z * ad;
    dl_ = std::move(d_);
    d_ = std::move(d);
    adl_ = std::move(ad_);
    ad_ = std::move(ad);
    zl2_ = zl_;
    zl_ = z;
    return !ls.breakdown;
  }

  const Vector& x() const { return p_; }
  const Vector& ax() const { return ap_; }
  std::size_t iterations() const { return k_; }
  bool stalled() const { return stalled_; }

private:
  Lanczos lanczos_;
  double pivot_tol_;
  std::size_t k_ = 0;
  double beta_ = 0.0;
  double cs_ = -1.0, sn_ = 0.0, dbar_ = 0.0, epsln_ = 0.0;
  double zl_ = 0.0, zl2_ = 0.0;
  double anorm_ = 0.0;
  bool stalled_ = false;
  Vector p_, ap_, d_, dl_, ad_, adl_;
};

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": input must be finite");
}

}  // namespace

void KrylovConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("KrylovConfig: max_iters must be >= 1");
  if (!(rel_residual_tol > 0.0 && rel_residual_tol <= 1.0)) {
    throw std::invalid_argument("KrylovConfig: rel_residual_tol must lie in (0, 1]");
  }
  if (!(pivot_tol >= 0.0 && pivot_tol < 1.0)) throw std::invalid_argument("KrylovConfig: pivot_tol must lie in [0, 1)");
}

void RangeRestrictedConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("RangeRestrictedConfig: max_iters must be >= 1");
  if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("RangeRestrictedConfig: theta must lie in [0, 1)");
  if (!(rel_residual_tol >= 0.0 && rel_residual_tol <= 1.0)) {
    throw std::invalid_argument("RangeRestrictedConfig: rel_residual_tol must lie in [0, 1]");
  }
  if (!(pivot_tol >= 0.0 && pivot_tol < 1.0)) {
    throw std::invalid_argument("RangeRestrictedConfig: pivot_tol must lie in [0, 1)");
  }
}

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iters: return "max_iters";
    case SolverStatus::negative_curvature: return "negative_curvature";
    case SolverStatus::breakdown: return "breakdown";
    case SolverStatus::feasible: return "feasible";
  }
  return "unknown";
}

KrylovSolution minres_qlp(const SymmetricOperator& op, const Vector& rhs, const KrylovConfig& cfg,
                          const IterateObserver& observe) {
  cfg.validate();
  require_finite(rhs, "minres_qlp");
  if (rhs.size() != op.dim) throw std::invalid_argument("minres_qlp: dimension mismatch");

  KrylovSolution out{Vector::Zero(op.dim), Vector::Zero(op.dim), {}};
  SolverReport& report = out.report;
  const double bnorm = rhs.norm();
  report.residual_history.push_back(bnorm);
  if (bnorm == 0.0) {
    report.status = SolverStatus::converged;
    return out;
  }

  MinresQlpEngine engine(op, rhs, cfg.reorthogonalize, cfg.pivot_tol, report.operator_applications);
  report.status = SolverStatus::max_iters;
  while (engine.iterations() < cfg.max_iters) {
    const bool more = engine.step();
    const double res = (engine.ax() - rhs).norm();
    report.residual_history.push_back(res);
    if (observe) observe(engine.x(), engine.ax());

    if (res <= cfg.rel_residual_tol * bnorm || engine.rel_ls_residual() <= cfg.rel_residual_tol) {
      report.status = SolverStatus::converged;
      break;
    }
    if (!more) {
      report.status = SolverStatus::breakdown;
      break;
    }
  }
  report.iterations = engine.iterations();
  report.rank_deficient = engine.singular();
  out.x = engine.x();
  out.op_x = engine.ax();
  report.final_rel_residual = report.residual_history.back() / bnorm;
  return out;
}

bool satisfies_inexactness(const Vector& hp, const Vector& g, double theta, double slack) {
  const double gg = g.squaredNorm();
  const bool angle = hp.dot(g) <= -(1.0 - theta) * gg + slack;
  const bool length = hp.norm() <= (1.0 + theta) * std::sqrt(gg) + slack;
  return angle && length;
}

RangeRestrictedSolution minres_qlp_range_restricted(const SymmetricOperator& op, const Vector& g,
                                                    const RangeRestrictedConfig& cfg,
                                                    const IterateObserver& observe) {
  cfg.validate();
  require_finite(g, "minres_qlp_range_restricted");
  if (g.size() != op.dim) throw std::invalid_argument("minres_qlp_range_restricted: dimension mismatch");
  const double gnorm = g.norm();
  if (gnorm == 0.0) throw std::invalid_argument("minres_qlp_range_restricted: g must be nonzero");

  RangeRestrictedSolution out{Vector::Zero(op.dim), Vector::Zero(op.dim), op(g), {}};
  SolverReport& report = out.report;
  report.operator_applications = 1;
  report.residual_history.push_back(gnorm);
  report.status = SolverStatus::max_iters;
  if (out.hg.norm() == 0.0) {
    // g lies in the null space; the range-restricted problem has only p = 0.
    report.status = SolverStatus::breakdown;
    report.final_rel_residual = 1.0;
    return out;
  }

  RangeRestrictedEngine engine(op, out.hg, cfg.reorthogonalize, cfg.pivot_tol, report.operator_applications);
  const bool residual_mode = cfg.rel_residual_tol > 0.0;
  double best_res = std::numeric_limits<double>::infinity();
  Vector best_p = out.p;

  // Directions are handed back with op p recomputed, so the inexactness
  // flag never rests on the recurrence alone.
  auto finish = [&](const Vector& p, SolverStatus status) {
    out.p = p;
    out.hp = op(p);
    ++report.operator_applications;
    report.feasible = satisfies_inexactness(out.hp, g, cfg.theta);
    report.status = status;
  };

  bool done = false;
  while (!done && engine.iterations() < cfg.max_iters) {
    const bool more = engine.step();
    if (engine.stalled()) break;
    const Vector& hp = engine.ax();
    const double res = (hp + g).norm();
    report.residual_history.push_back(res);
    if (observe) observe(engine.x(), hp);
    if (res < best_res) {
      best_res = res;
      best_p = engine.x();
    }

    if (residual_mode) {
      if (res <= cfg.rel_residual_tol * gnorm) {
        finish(engine.x(), SolverStatus::converged);
        done = true;
      }
    } else if (satisfies_inexactness(hp, g, cfg.theta)) {
      finish(engine.x(), SolverStatus::feasible);
      done = report.feasible;
    }
    if (!done && !more) break;
  }
  if (!done) {
    const bool exhausted = engine.iterations() >= cfg.max_iters;
    finish(best_p, exhausted ? SolverStatus::max_iters : SolverStatus::breakdown);
    if (report.feasible) report.status = SolverStatus::feasible;
  }
  report.iterations = engine.iterations();
  report.rank_deficient = engine.stalled();
  report.final_rel_residual = (out.hp + g).norm() / gnorm;
  return out;
}

KrylovSolution cg(const SymmetricOperator& op, const Vector& rhs, const KrylovConfig& cfg) {
  cfg.validate();
  require_finite(rhs, "cg");
  if (rhs.size() != op.dim) throw std::invalid_argument("cg: dimension mismatch");

  KrylovSolution out{Vector::Zero(op.dim), Vector::Zero(op.dim), {}};
  SolverReport& report = out.report;
  const double bnorm = rhs.norm();
  report.residual_history.push_back(bnorm);
  report.status = SolverStatus::max_iters;
  if (bnorm == 0.0) {
    report.status = SolverStatus::converged;
    return out;
  }

  Vector r = rhs;
  Vector d = r;
  double rr = r.squaredNorm();
  while (report.iterations < cfg.max_iters) {
    const Vector ad = op(d);
    ++report.operator_applications;
    ++report.iterations;
    const double curvature = d.dot(ad);
    if (curvature <= kNegativeCurvatureTol * d.squaredNorm()) {
      report.status = SolverStatus::negative_curvature;
      break;
    }
    const double step = rr / curvature;
    out.x += step * d;
    out.op_x += step * ad;
    r -= step * ad;
    const double rr_new = r.squaredNorm();
    report.residual_history.push_back(std::sqrt(rr_new));
    if (std::sqrt(rr_new) <= cfg.rel_residual_tol * bnorm) {
      report.status = SolverStatus::converged;
      break;
    }
    d = r + (rr_new / rr) * d;
    rr = rr_new;
  }
  report.final_rel_residual = report.residual_history.back() / bnorm;
  return out;
}

}  // namespace newtonmr
