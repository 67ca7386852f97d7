#include "stratpatch/pmp.hpp"

#include "detail/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stratpatch {

namespace {

constexpr double kBisectionBracket = 1e-12;
constexpr double kMinRelaxation = 1.0 / 64.0;
constexpr int kPolishWindow = 5;
constexpr double kMaxStepGrowth = 1024.0;
constexpr double kCostSlack = 1e-13;

/// Costate vector field.  Evaluations are allocation-free after construction.
class CostateField {
 public:
  CostateField(const NetworkModel& model, const CostModel& cost, PatchMode mode)
      : model_(model),
        cost_(cost),
        replicative_(mode == PatchMode::Replicative),
        unicast_(cost.variant == CostVariant::Unicast),
        beta_(model.beta),
        beta_t_(model.beta.transpose()),
        beta_bar_(model.beta_bar),
        beta_bar_t_(model.beta_bar.transpose()),
        heal_(model.pi.cwiseProduct(model.beta_bar)),
        heal_t_(heal_.transpose()),
        reception_(cost.reception_matrix(model)),
        reception_t_(reception_.transpose()) {
    const int m = model.num_types();
    for (Vector* v : {&mass_, &force_, &patch_, &healing_, &charge_, &q_, &gap_, &cross_,
                      &phi_raw_, &load_, &effort_, &tmp_}) {
      v->resize(m);
    }
  }

  /// Dispatcher mass for the current state.
  template <class In>
  void set_mass(const In& r) {
    if (replicative_) {
      mass_ = r;
    } else {
      mass_ = model_.r0;
    }
  }

  template <class In, class Out>
  void operator()(const In& s, const In& i, const In& r, const Vector& u, const In& ls,
                  const In& li, const In& lr, Out& dls, Out& dli, Out& dlr) {
    const int m = static_cast<int>(s.size());
    set_mass(r);
    tmp_ = mass_.cwiseProduct(u);
    force_.noalias() = beta_t_ * i;
    patch_.noalias() = beta_bar_t_ * tmp_;
    healing_.noalias() = heal_t_ * tmp_;
    if (unicast_) {
      for (int j = 0; j < m; ++j) charge_(j) = mass_(j) * cost_.reception.value(u(j));
      q_.noalias() = reception_t_ * charge_;
    } else {
      q_.setZero();
    }
    gap_ = (li - ls).cwiseProduct(s);
    cross_.noalias() = beta_ * gap_;
    const double benefit = cost_.benefit_weight;

    for (int j = 0; j < m; ++j) {
      const double fprime = cost_.infection_marginal(i(j));
      if (replicative_) {
        dls(j) = -q_(j) - (li(j) - ls(j)) * force_(j) - (lr(j) - ls(j)) * patch_(j);
        dli(j) = -fprime - q_(j) - cross_(j) - (lr(j) - li(j)) * healing_(j);
      } else {
        dls(j) = -benefit - (li(j) - ls(j)) * force_(j) + ls(j) * patch_(j) - q_(j);
        dli(j) = -fprime - benefit - cross_(j) + li(j) * healing_(j) - q_(j);
      }
    }
    if (replicative_) {
      raw_phi(s, i, ls, li, lr);
      reception_load(s, i);
      for (int j = 0; j < m; ++j) {
        const double x = u(j);
        double running = cost_.effort_for(j).value(x);
        if (unicast_) running += load_(j) * cost_.reception.value(x);
        dlr(j) = benefit - running + x * phi_raw_(j);
      }
    } else {
      dlr.setZero();
    }
  }

  /// phi before the unicast reception charge is folded in.
  template <class In>
  const Vector& raw_phi(const In& s, const In& i, const In& ls, const In& li, const In& lr) {
    if (replicative_) {
      gap_ = (ls - lr).cwiseProduct(s);
      tmp_ = (li - lr).cwiseProduct(i);
    } else {
      gap_ = ls.cwiseProduct(s);
      tmp_ = li.cwiseProduct(i);
    }
    phi_raw_.noalias() = beta_bar_ * gap_;
    phi_raw_.noalias() += heal_ * tmp_;
    return phi_raw_;
  }

  /// c_i = sum_j W_ij (S_j + I_j); zero for broadcast costs.
  template <class In>
  const Vector& reception_load(const In& s, const In& i) {
    if (unicast_) {
      tmp_ = s + i;
      load_.noalias() = reception_ * tmp_;
    } else {
      load_.setZero();
    }
    return load_;
  }

 private:
  const NetworkModel& model_;
  const CostModel& cost_;
  bool replicative_;
  bool unicast_;
  Matrix beta_, beta_t_, beta_bar_, beta_bar_t_, heal_, heal_t_, reception_, reception_t_;
  Vector mass_, force_, patch_, healing_, charge_, q_, gap_, cross_, phi_raw_, load_, effort_,
      tmp_;
};

void check_inputs(const NetworkModel& model, const ControlTrajectory& control,
                  const StateTrajectory& states) {
  if (!(control.grid == states.grid)) throw std::invalid_argument("control and state grids differ");
  if (control.u.rows() != model.num_types() || states.s.rows() != model.num_types()) {
    throw std::invalid_argument("trajectory type count differs from model");
  }
}

AdjointTrajectory integrate_backward(PatchMode mode, const NetworkModel& model,
                                     const CostModel& cost, const ControlTrajectory& control,
                                     const StateTrajectory& states) {
  check_inputs(model, control, states);
  const int m = model.num_types();
  const int n = states.grid.n_steps;
  const double dt = states.grid.dt();
  const bool replicative = mode == PatchMode::Replicative;

  AdjointTrajectory out;
  out.grid = states.grid;
  out.lambda_s = Matrix::Zero(m, n + 1);
  out.lambda_i = Matrix::Zero(m, n + 1);
  if (replicative) out.lambda_r = Matrix::Zero(m, n + 1);

  detail::VectorField field(model, mode);
  CostateField costate(model, cost, mode);

  Vector u(m), s0(m), i0(m), r0(m), s1(m), i1(m), r1(m), sm(m), im(m), rm(m);
  Vector fs0(m), fi0(m), fr0(m), fs1(m), fi1(m), fr1(m);
  Vector ls(m), li(m), lr(m), ts(m), ti(m), tr(m);
  Vector a1(m), b1(m), c1(m), a2(m), b2(m), c2(m), a3(m), b3(m), c3(m), a4(m), b4(m), c4(m);
  ls.setZero();
  li.setZero();
  lr.setZero();

  for (int k = n - 1; k >= 0; --k) {
    u = control.u.col(k);
    s0 = states.s.col(k);
    i0 = states.i.col(k);
    r0 = states.r.col(k);
    s1 = states.s.col(k + 1);
    i1 = states.i.col(k + 1);
    r1 = states.r.col(k + 1);
    field(s0, i0, r0, u, fs0, fi0, fr0);
    field(s1, i1, r1, u, fs1, fi1, fr1);
    sm = 0.5 * (s0 + s1) + (dt / 8.0) * (fs0 - fs1);
    im = 0.5 * (i0 + i1) + (dt / 8.0) * (fi0 - fi1);
    rm = 0.5 * (r0 + r1) + (dt / 8.0) * (fr0 - fr1);

    costate(s1, i1, r1, u, ls, li, lr, a1, b1, c1);
    ts = ls - 0.5 * dt * a1;
    ti = li - 0.5 * dt * b1;
    tr = lr - 0.5 * dt * c1;
    costate(sm, im, rm, u, ts, ti, tr, a2, b2, c2);
    ts = ls - 0.5 * dt * a2;
    ti = li - 0.5 * dt * b2;
    tr = lr - 0.5 * dt * c2;
    costate(sm, im, rm, u, ts, ti, tr, a3, b3, c3);
    ts = ls - dt * a3;
    ti = li - dt * b3;
    tr = lr - dt * c3;
    costate(s0, i0, r0, u, ts, ti, tr, a4, b4, c4);
    ls -= (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    li -= (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    lr -= (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);

    if (!ls.allFinite() || !li.allFinite() || !lr.allFinite()) {
      throw DivergenceError("costate integration produced non-finite values at step " +
                            std::to_string(k));
    }
    out.lambda_s.col(k) = ls;
    out.lambda_i.col(k) = li;
    if (replicative) out.lambda_r.col(k) = lr;
  }

  out.phi = compute_phi(mode, model, cost, states, out);
  if (replicative) {
    out.alpha = Matrix::Zero(m, n + 1);
    for (int k = 0; k <= n; ++k) {
      s0 = states.s.col(k);
      i0 = states.i.col(k);
      ls = out.lambda_s.col(k);
      li = out.lambda_i.col(k);
      lr = out.lambda_r.col(k);
      const Vector phi_raw = costate.raw_phi(s0, i0, ls, li, lr);
      const Vector& load = costate.reception_load(s0, i0);
      for (int j = 0; j < m; ++j) {
        const double x = control.u(j, k);
        double value = cost.effort_for(j).value(x) - phi_raw(j) * x;
        if (cost.variant == CostVariant::Unicast) value += load(j) * cost.reception.value(x);
        out.alpha(j, k) = value;
      }
    }
  }
  return out;
}

double bisect_derivative(const EffortShape& effort, double target) {
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kBisectionBracket) {
    const double mid = 0.5 * (lo + hi);
    if (effort.derivative(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Relative sup-norm distance, 0 when both operands vanish.
double relative_change(const Matrix& next, const Matrix& current) {
  const double diff = (next - current).cwiseAbs().maxCoeff();
  const double scale = std::max(next.cwiseAbs().maxCoeff(), current.cwiseAbs().maxCoeff());
  return scale > 0.0 ? diff / scale : 0.0;
}

/// Scalar problem  min_{x in [0,1]} g(x) = h(x) + c (p(x) - p(1) x) - phi x + (x - u)^2 / (2 s)
/// where phi already carries the -c p(1) reception charge.
class ProximalStep {
 public:
  ProximalStep(const EffortShape& h, const EffortShape* p, double load, double phi, double anchor,
               double step)
      : h_(h), p_(p), load_(p != nullptr ? load : 0.0), phi_(phi), anchor_(anchor), step_(step) {}

  [[nodiscard]] double minimize() const {
    const bool linear_p = p_ == nullptr || p_->kind == ShapeKind::Linear || load_ == 0.0;
    if (h_.kind == ShapeKind::Linear && linear_p) {
      return std::clamp(anchor_ + step_ * (phi_ - h_.scale), 0.0, 1.0);
    }
    if (h_.kind == ShapeKind::ConvexPower) return increasing_root(0.0);
    // Remaining shapes have g'' increasing on (0,1]: concave up to x_c, convex after.
    double xc = 0.0;
    if (curvature(1.0) <= 0.0) {
      xc = 1.0;
    } else if (curvature(kBisectionBracket) < 0.0) {
      double lo = kBisectionBracket;
      double hi = 1.0;
      while (hi - lo > kBisectionBracket) {
        const double mid = 0.5 * (lo + hi);
        (curvature(mid) < 0.0 ? lo : hi) = mid;
      }
      xc = hi;
    }
    double best = 0.0;
    double best_value = value(0.0);
    const auto consider = [&](double x) {
      const double v = value(x);
      if (v < best_value) {
        best = x;
        best_value = v;
      }
    };
    if (xc < 1.0) consider(increasing_root(xc));
    consider(1.0);
    return best;
  }

 private:
  [[nodiscard]] double value(double x) const {
    double v = h_.value(x) - phi_ * x + (x - anchor_) * (x - anchor_) / (2.0 * step_);
    if (load_ != 0.0) v += load_ * (p_->value(x) - p_->value(1.0) * x);
    return v;
  }
  [[nodiscard]] double slope(double x) const {
    double d = h_.derivative(x) - phi_ + (x - anchor_) / step_;
    if (load_ != 0.0) d += load_ * (p_->derivative(x) - p_->value(1.0));
    return d;
  }
  [[nodiscard]] double curvature(double x) const {
    double c = h_.second_derivative(x) + 1.0 / step_;
    if (load_ != 0.0) c += load_ * p_->second_derivative(x);
    return c;
  }
  /// Minimizer of g on [lo, 1] where g' is increasing.
  [[nodiscard]] double increasing_root(double lo) const {
    if (slope(std::max(lo, kBisectionBracket)) >= 0.0) return lo;
    double hi = 1.0;
    if (slope(hi) <= 0.0) return hi;
    while (hi - lo > kBisectionBracket) {
      const double mid = 0.5 * (lo + hi);
      (slope(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  const EffortShape& h_;
  const EffortShape* p_;
  double load_;
  double phi_;
  double anchor_;
  double step_;
};

struct Iterate {
  ControlTrajectory control;
  StateTrajectory states;
  AdjointTrajectory adjoints;
  double cost = 0.0;
};

/// Pointwise proximal Hamiltonian minimizer on every cell, using the cell
/// midpoint phi.  The value at T is the plain pointwise minimizer.
Matrix proximal_control(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                        const Iterate& it, double step) {
  const int m = model.num_types();
  const int n = it.states.grid.n_steps;
  const bool replicative = mode == PatchMode::Replicative;
  const bool unicast = cost.variant == CostVariant::Unicast;
  const EffortShape* reception = unicast ? &cost.reception : nullptr;
  Matrix load;
  if (unicast && cost.reception.kind != ShapeKind::Linear) {
    load = cost.reception_matrix(model) * (it.states.s + it.states.i);
  }
  const Matrix& phi = it.adjoints.phi;
  const Matrix& u = it.control.u;

  Matrix next = Matrix::Zero(m, n + 1);
  for (int j = 0; j < m; ++j) {
    // Types that never hold dispatchers keep u = 0 on the whole horizon.
    if (replicative ? it.states.r.row(j).maxCoeff() <= 0.0 : model.r0(j) <= 0.0) continue;
    const EffortShape& h = cost.effort_for(j);
    for (int k = 0; k < n; ++k) {
      const double c = load.size() > 0 ? 0.5 * (load(j, k) + load(j, k + 1)) : 0.0;
      next(j, k) =
          ProximalStep(h, reception, c, 0.5 * (phi(j, k) + phi(j, k + 1)), u(j, k), step).minimize();
    }
    next(j, n) = minimize_hamiltonian_pointwise(phi(j, n), h, 1.0);
  }
  return next;
}

Iterate make_iterate(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                     ControlTrajectory control, StateTrajectory states) {
  Iterate it;
  it.cost = evaluate_cost(model, cost, mode, control, states).total;
  it.adjoints = integrate_backward(mode, model, cost, control, states);
  it.states = std::move(states);
  it.control = std::move(control);
  return it;
}

double realized_cost(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                     const ControlTrajectory& control) {
  return evaluate_cost(model, cost, mode, control, integrate_forward(model, mode, control)).total;
}

/// Index of the first cell after the last patching (> 0.5) entry.
int drop_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  for (Eigen::Index k = row.size() - 1; k >= 0; --k) {
    if (row(k) > 0.5) return static_cast<int>(std::min<Eigen::Index>(k + 1, row.size() - 1));
  }
  return 0;
}

/// Replaces each bang-bang row by the best pure single-threshold row near its
/// detected switch, keeping a replacement only when it does not raise J.
void polish_bang_bang(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                      ControlTrajectory& control) {
  const int m = model.num_types();
  const int n = control.grid.n_steps;
  double best_cost = realized_cost(model, cost, mode, control);
  for (int pass = 0; pass < 3; ++pass) {
    bool changed = false;
    for (int j = 0; j < m; ++j) {
      if (!cost.effort_for(j).bang_bang()) continue;
      const Eigen::RowVectorXd original = control.u.row(j);
      const int centre = drop_index(original);
      int best_k = -1;
      double candidate_best = best_cost;
      for (int k = std::max(0, centre - kPolishWindow); k <= std::min(n, centre + kPolishWindow);
           ++k) {
        control.u.row(j).setZero();
        control.u.row(j).head(k == n ? n + 1 : k).setOnes();
        if (control.u.row(j) == original) continue;
        const double trial = realized_cost(model, cost, mode, control);
        if (trial <= candidate_best) {
          candidate_best = trial;
          best_k = k;
        }
      }
      control.u.row(j) = original;
      if (best_k >= 0) {
        control.u.row(j).setZero();
        control.u.row(j).head(best_k == n ? n + 1 : best_k).setOnes();
        changed = changed || candidate_best < best_cost;
        best_cost = candidate_best;
      }
    }
    if (!changed) break;
  }
}

bool efficacy_depends_on_target_only(const Matrix& pi) {
  for (Eigen::Index j = 0; j < pi.cols(); ++j) {
    if (pi.col(j).maxCoeff() - pi.col(j).minCoeff() > 0.0) return false;
  }
  return true;
}

}  // namespace

AdjointTrajectory integrate_adjoint_nonreplicative(const NetworkModel& model,
                                                   const CostModel& cost,
                                                   const ControlTrajectory& control,
                                                   const StateTrajectory& states) {
  return integrate_backward(PatchMode::NonReplicative, model, cost, control, states);
}

AdjointTrajectory integrate_adjoint_replicative(const NetworkModel& model, const CostModel& cost,
                                                const ControlTrajectory& control,
                                                const StateTrajectory& states) {
  return integrate_backward(PatchMode::Replicative, model, cost, control, states);
}

AdjointTrajectory integrate_adjoint(PatchMode mode, const NetworkModel& model,
                                    const CostModel& cost, const ControlTrajectory& control,
                                    const StateTrajectory& states) {
  return integrate_backward(mode, model, cost, control, states);
}

Matrix compute_phi(PatchMode mode, const NetworkModel& model, const CostModel& cost,
                   const StateTrajectory& states, const AdjointTrajectory& adjoints) {
  if (!(states.grid == adjoints.grid)) throw std::invalid_argument("state and costate grids differ");
  const bool replicative = mode == PatchMode::Replicative;
  if (replicative && !adjoints.replicative()) {
    throw std::invalid_argument("replicative phi needs lambda_r");
  }
  const int m = model.num_types();
  const int n = states.grid.n_steps;
  const Matrix heal = model.pi.cwiseProduct(model.beta_bar);
  const Matrix reception = cost.reception_matrix(model);
  const bool unicast = cost.variant == CostVariant::Unicast;
  const double p_full = unicast ? cost.reception.value(1.0) : 0.0;

  Matrix phi(m, n + 1);
  for (int k = 0; k <= n; ++k) {
    Vector susceptible_term;
    Vector infective_term;
    if (replicative) {
      susceptible_term = (adjoints.lambda_s.col(k) - adjoints.lambda_r.col(k))
                             .cwiseProduct(states.s.col(k));
      infective_term = (adjoints.lambda_i.col(k) - adjoints.lambda_r.col(k))
                           .cwiseProduct(states.i.col(k));
    } else {
      susceptible_term = adjoints.lambda_s.col(k).cwiseProduct(states.s.col(k));
      infective_term = adjoints.lambda_i.col(k).cwiseProduct(states.i.col(k));
    }
    phi.col(k) = model.beta_bar * susceptible_term + heal * infective_term;
    if (unicast) {
      phi.col(k) -= p_full * (reception * (states.s.col(k) + states.i.col(k)));
    }
  }
  return phi;
}

double minimize_hamiltonian_pointwise(double phi, const EffortShape& effort,
                                      double dispatcher_mass) {
  if (!(dispatcher_mass > 0.0)) return 0.0;
  switch (effort.kind) {
    case ShapeKind::Linear:
      return phi > effort.scale ? 1.0 : 0.0;
    case ShapeKind::ConcavePower:
      return effort.value(1.0) - phi < 0.0 ? 1.0 : 0.0;
    case ShapeKind::ConvexPower: {
      if (phi <= effort.derivative(0.0)) return 0.0;
      if (phi >= effort.derivative(1.0)) return 1.0;
      return bisect_derivative(effort, phi);
    }
  }
  return 0.0;
}

void SweepConfig::validate() const {
  if (n_steps < 2) throw std::invalid_argument("solver.steps must be at least 2");
  if (max_iterations < 1) throw std::invalid_argument("solver.max_iter must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("solver.tol must be positive");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) {
    throw std::invalid_argument("solver.relaxation must lie in (0,1]");
  }
  if (!(initial_guess >= 0.0 && initial_guess <= 1.0)) {
    throw std::invalid_argument("solver initial guess must lie in [0,1]");
  }
}

SolveResult evaluate_control(const NetworkModel& model, const CostModel& cost, PatchMode mode,
                             const ControlTrajectory& control) {
  SolveResult result;
  result.mode = mode;
  result.control = control;
  result.states = integrate_forward(model, mode, control);
  result.adjoints = integrate_backward(mode, model, cost, control, result.states);
  result.cost = evaluate_cost(model, cost, mode, control, result.states);
  result.thresholds = thresholds_of(control, cost);
  result.structure_guaranteed =
      cost.variant == CostVariant::Broadcast || efficacy_depends_on_target_only(model.pi);
  return result;
}

namespace {

/// Replaces concave shapes by their chords x * g(1).  The chord lies below a
/// concave shape with equality at 0 and 1, so bang-bang controls keep their
/// cost and the relaxed Hamiltonian has the same endpoint minimizers.
CostModel convex_envelope(const CostModel& cost) {
  CostModel out = cost;
  for (auto& shape : out.effort) {
    if (shape.kind == ShapeKind::ConcavePower) shape = EffortShape::linear(shape.value(1.0));
  }
  if (out.reception.kind == ShapeKind::ConcavePower) {
    out.reception = EffortShape::linear(out.reception.value(1.0));
  }
  return out;
}

}  // namespace

SolveResult forward_backward_sweep(const NetworkModel& model, const CostModel& true_cost,
                                   PatchMode mode, const SweepConfig& config) {
  require_valid(model);
  config.validate();
  true_cost.validate(model.num_types());
  if (true_cost.variant == CostVariant::Unicast && true_cost.reception.kind != ShapeKind::Linear) {
    for (int j = 0; j < model.num_types(); ++j) {
      if (!true_cost.effort_for(j).bang_bang()) {
        throw UnsupportedCostError(
            "unicast cost with a strictly convex effort needs a linear reception shape");
      }
    }
  }
  const CostModel cost = convex_envelope(true_cost);

  const TimeGrid grid(model.horizon, config.n_steps);
  ControlTrajectory start =
      ControlTrajectory::constant(grid, model.num_types(), config.initial_guess);
  StateTrajectory start_states = integrate_forward(model, mode, start);
  Iterate it = make_iterate(model, cost, mode, std::move(start), std::move(start_states));

  // Steps are measured in control units per unit of phi.
  double phi_scale = it.adjoints.phi.cwiseAbs().maxCoeff();
  for (int j = 0; j < model.num_types(); ++j) {
    phi_scale = std::max(phi_scale, cost.effort_for(j).value(1.0));
  }
  const double reference_step = phi_scale > 0.0 ? config.relaxation / phi_scale : 1.0;
  const double min_step = kMinRelaxation * reference_step;
  const double max_step = kMaxStepGrowth * reference_step;
  double step = reference_step;

  // Accelerated proximal iteration: the gradient is taken at an extrapolated
  // probe point, and momentum restarts whenever no step lowers J.
  Convergence status;
  Matrix previous = it.control.u;
  double momentum = 1.0;
  Iterate probe = it;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    status.iterations = iter;
    const Matrix target = proximal_control(model, cost, mode, probe, reference_step);
    status.residual = relative_change(target, probe.control.u);
    if (status.residual < config.tolerance) {
      status.converged = true;
      if (probe.cost <= it.cost) it = std::move(probe);
      break;
    }

    bool accepted = false;
    for (double trial = step; trial >= min_step; trial *= 0.5) {
      ControlTrajectory next{grid, trial == reference_step
                                       ? target
                                       : proximal_control(model, cost, mode, probe, trial)};
      StateTrajectory states = integrate_forward(model, mode, next);
      const double value = evaluate_cost(model, cost, mode, next, states).total;
      if (value <= it.cost + kCostSlack * std::abs(it.cost)) {
        previous = std::move(it.control.u);
        it = Iterate{std::move(next), std::move(states), {}, value};
        step = std::min(2.0 * trial, max_step);
        accepted = true;
        break;
      }
    }
    const bool had_momentum = probe.control.u.size() > 0 && momentum > 1.0;
    if (!accepted) {
      if (!had_momentum) break;  // no admissible step left: stalled
      momentum = 1.0;
      if (it.adjoints.phi.size() == 0) it.adjoints = integrate_backward(mode, model, cost, it.control, it.states);
      probe = it;
      continue;
    }

    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_momentum;
    momentum = next_momentum;
    Matrix extrapolated = it.control.u + beta * (it.control.u - previous);
    extrapolated = extrapolated.cwiseMax(0.0).cwiseMin(1.0);
    if (beta > 0.0 && extrapolated != it.control.u) {
      ControlTrajectory y{grid, std::move(extrapolated)};
      StateTrajectory states = integrate_forward(model, mode, y);
      probe = make_iterate(model, cost, mode, std::move(y), std::move(states));
    } else {
      it.adjoints = integrate_backward(mode, model, cost, it.control, it.states);
      probe = it;
    }
  }
  status.final_relaxation = step / reference_step;

  ControlTrajectory control = std::move(it.control);
  if (config.polish) polish_bang_bang(model, true_cost, mode, control);

  SolveResult result = evaluate_control(model, true_cost, mode, control);
  result.convergence = status;
  return result;
}

bool StructureReport::controls_ok() const {
  return std::all_of(types.begin(), types.end(),
                     [](const TypeStructure& t) { return t.single_drop && t.jump_free; });
}

bool StructureReport::lemmas_ok(double slack) const {
  return std::all_of(types.begin(), types.end(), [slack](const TypeStructure& t) {
    return t.min_lambda_i > -slack && t.min_gap_is > -slack && t.min_gap_ir > -slack &&
           t.max_phi_rise <= slack;
  });
}

StructureReport verify_structure(const SolveResult& result, const CostModel& cost) {
  StructureReport report;
  report.guaranteed_by_theory = result.structure_guaranteed;
  if (!result.structure_guaranteed) {
    report.notes.emplace_back(
        "unicast cost with dispatcher-dependent healing efficacy: structure not guaranteed by "
        "theory");
  }
  const auto& u = result.control.u;
  const auto& adj = result.adjoints;
  const int m = static_cast<int>(u.rows());
  const int n = result.control.grid.n_steps;
  const bool replicative = adj.replicative();

  for (int j = 0; j < m; ++j) {
    TypeStructure t;
    const EffortShape& h = cost.effort_for(j);
    bool prev = u(j, 0) > 0.5;
    for (int k = 1; k <= n; ++k) {
      const bool on = u(j, k) > 0.5;
      if (on != prev) {
        ++t.switch_count;
        if (on) t.single_drop = false;  // 0 -> 1 transition
      }
      prev = on;
      t.max_rise = std::max(t.max_rise, u(j, k) - u(j, k - 1));
    }
    if (h.bang_bang()) {
      t.single_drop = t.single_drop && t.switch_count <= 1;
    } else {
      t.single_drop = t.max_rise <= 1e-6;
      double curvature = std::numeric_limits<double>::infinity();
      for (int q = 0; q <= 64; ++q) curvature = std::min(curvature, h.second_derivative(q / 64.0));
      for (int k = 0; k < n; ++k) {
        const double drop = u(j, k) - u(j, k + 1);
        const double bound = curvature > 0.0
                                 ? 5.0 * std::abs(adj.phi(j, k + 1) - adj.phi(j, k)) / curvature
                                 : std::numeric_limits<double>::infinity();
        if (drop > bound + 1e-9) t.jump_free = false;
      }
    }

    t.min_lambda_i = std::numeric_limits<double>::infinity();
    t.min_gap_is = std::numeric_limits<double>::infinity();
    t.min_gap_ir = replicative ? std::numeric_limits<double>::infinity() : 0.0;
    for (int k = 0; k < n; ++k) {
      t.min_lambda_i = std::min(t.min_lambda_i, adj.lambda_i(j, k));
      t.min_gap_is = std::min(t.min_gap_is, adj.lambda_i(j, k) - adj.lambda_s(j, k));
      if (replicative) t.min_gap_ir = std::min(t.min_gap_ir, adj.lambda_i(j, k) - adj.lambda_r(j, k));
      t.max_phi_rise = std::max(t.max_phi_rise, adj.phi(j, k + 1) - adj.phi(j, k));
    }
    if (replicative) {
      // Pointwise optimality is only required where the control is continuous.
      t.max_alpha = -std::numeric_limits<double>::infinity();
      for (int k = 0; k <= n; ++k) {
        if (h.bang_bang()) {
          const bool on = u(j, k) > 0.5;
          if ((k > 0 && (u(j, k - 1) > 0.5) != on) || (k < n && (u(j, k + 1) > 0.5) != on)) continue;
        }
        t.max_alpha = std::max(t.max_alpha, adj.alpha(j, k));
      }
    }
    report.types.push_back(t);
  }
  return report;
}

}  // namespace stratpatch
