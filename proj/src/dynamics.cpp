#include "stratpatch/dynamics.hpp"

#include "detail/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stratpatch {

namespace {

constexpr double kDriftLimit = 1e-6;
constexpr double kDriftRenormalize = 1e-12;
constexpr double kNegativityFloor = -1e-9;

void check_control(const NetworkModel& model, const ControlTrajectory& control) {
  if (control.u.rows() != model.num_types() || control.u.cols() != control.grid.points()) {
    throw std::invalid_argument("control shape does not match model types and grid");
  }
  if (std::abs(control.grid.horizon - model.horizon) > 1e-12 * model.horizon) {
    throw std::invalid_argument("control grid horizon differs from model horizon");
  }
  if (!(control.u.minCoeff() >= 0.0) || !(control.u.maxCoeff() <= 1.0)) {
    throw std::invalid_argument("control entries must lie in [0,1]");
  }
}

}  // namespace

std::string to_string(PatchMode mode) {
  return mode == PatchMode::Replicative ? "rep" : "nonrep";
}

PatchMode parse_patch_mode(const std::string& name) {
  if (name == "rep" || name == "replicative") return PatchMode::Replicative;
  if (name == "nonrep" || name == "non-replicative" || name == "nonreplicative") {
    return PatchMode::NonReplicative;
  }
  throw std::invalid_argument("unknown patching mode '" + name + "'");
}

TimeGrid::TimeGrid(double horizon_, int n_steps_) : horizon(horizon_), n_steps(n_steps_) {
  if (!(horizon > 0.0)) throw std::invalid_argument("time grid horizon must be positive");
  if (n_steps < 2) throw std::invalid_argument("time grid needs at least 2 steps");
}

ControlTrajectory ControlTrajectory::constant(const TimeGrid& grid, int num_types, double level) {
  if (level < 0.0 || level > 1.0) throw std::invalid_argument("control level outside [0,1]");
  return ControlTrajectory{grid, Matrix::Constant(num_types, grid.points(), level)};
}

ControlTrajectory ControlTrajectory::thresholds(const TimeGrid& grid,
                                                const std::vector<int>& switch_index) {
  const int m = static_cast<int>(switch_index.size());
  ControlTrajectory control{grid, Matrix::Zero(m, grid.points())};
  for (int i = 0; i < m; ++i) {
    const int k = switch_index[static_cast<std::size_t>(i)];
    if (k < 0 || k > grid.n_steps) throw std::invalid_argument("threshold index outside grid");
    // A threshold at T keeps patching through the final instant.
    const int ones = (k == grid.n_steps) ? grid.points() : k;
    control.u.row(i).head(ones).setOnes();
  }
  return control;
}

Compartments StateTrajectory::at(int k) const {
  return Compartments{s.col(k), i.col(k), r.col(k)};
}

IntegrationError::IntegrationError(const std::string& what, int step, int type)
    : std::runtime_error(what), step_(step), type_(type) {}

Compartments rhs(PatchMode mode, const NetworkModel& model, const Compartments& state,
                 const Vector& u) {
  detail::VectorField field(model, mode);
  Compartments out{Vector(state.s.size()), Vector(state.s.size()), Vector(state.s.size())};
  field(state.s, state.i, state.r, u, out.s, out.i, out.r);
  return out;
}

Compartments rhs_nonreplicative(const NetworkModel& model, const Compartments& state,
                                const Vector& u) {
  return rhs(PatchMode::NonReplicative, model, state, u);
}

Compartments rhs_replicative(const NetworkModel& model, const Compartments& state,
                             const Vector& u) {
  return rhs(PatchMode::Replicative, model, state, u);
}

StateTrajectory integrate_forward(const NetworkModel& model, PatchMode mode,
                                  const ControlTrajectory& control) {
  check_control(model, control);
  const TimeGrid& grid = control.grid;
  const int m = model.num_types();
  const int n = grid.n_steps;
  const double dt = grid.dt();

  StateTrajectory out{grid, Matrix(m, n + 1), Matrix(m, n + 1), Matrix(m, n + 1)};
  out.s.col(0) = model.s0;
  out.i.col(0) = model.i0;
  out.r.col(0) = model.r0;

  detail::VectorField field(model, mode);
  Vector s(m), i(m), r(m), ts(m), ti(m), tr(m), u(m);
  Vector k1s(m), k1i(m), k1r(m), k2s(m), k2i(m), k2r(m);
  Vector k3s(m), k3i(m), k3r(m), k4s(m), k4i(m), k4r(m);
  s = model.s0;
  i = model.i0;
  r = model.r0;

  for (int k = 0; k < n; ++k) {
    u = control.u.col(k);
    field(s, i, r, u, k1s, k1i, k1r);
    ts = s + 0.5 * dt * k1s;
    ti = i + 0.5 * dt * k1i;
    tr = r + 0.5 * dt * k1r;
    field(ts, ti, tr, u, k2s, k2i, k2r);
    ts = s + 0.5 * dt * k2s;
    ti = i + 0.5 * dt * k2i;
    tr = r + 0.5 * dt * k2r;
    field(ts, ti, tr, u, k3s, k3i, k3r);
    ts = s + dt * k3s;
    ti = i + dt * k3i;
    tr = r + dt * k3r;
    field(ts, ti, tr, u, k4s, k4i, k4r);
    s += (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    i += (dt / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
    r += (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);

    for (int j = 0; j < m; ++j) {
      for (double* x : {&s(j), &i(j), &r(j)}) {
        if (!std::isfinite(*x) || *x < kNegativityFloor) {
          std::ostringstream os;
          os << "integration failure: negative or non-finite compartment " << *x << " at step "
             << (k + 1) << ", type " << j;
          throw IntegrationError(os.str(), k + 1, j);
        }
        if (*x < 0.0) *x = 0.0;
      }
      const double drift = s(j) + i(j) + r(j) - 1.0;
      if (std::abs(drift) > kDriftLimit) {
        std::ostringstream os;
        os << "integration failure: normalization drift " << drift << " at step " << (k + 1)
           << ", type " << j;
        throw IntegrationError(os.str(), k + 1, j);
      }
      if (std::abs(drift) > kDriftRenormalize) r(j) = std::max(0.0, 1.0 - s(j) - i(j));
    }
    out.s.col(k + 1) = s;
    out.i.col(k + 1) = i;
    out.r.col(k + 1) = r;
  }
  return out;
}

Compartments interpolate_state(const NetworkModel& model, PatchMode mode,
                               const StateTrajectory& states, const ControlTrajectory& control,
                               int k, double theta) {
  if (k < 0 || k >= states.grid.n_steps) throw std::out_of_range("cell index outside grid");
  const double dt = states.grid.dt();
  const Vector u = control.u.col(k);
  const Compartments a = states.at(k);
  const Compartments b = states.at(k + 1);
  const Compartments fa = rhs(mode, model, a, u);
  const Compartments fb = rhs(mode, model, b, u);
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  const auto blend = [&](const Vector& xa, const Vector& xb, const Vector& da, const Vector& db) {
    Vector v = h00 * xa + h10 * dt * da + h01 * xb + h11 * dt * db;
    return v;
  };
  return Compartments{blend(a.s, b.s, fa.s, fb.s), blend(a.i, b.i, fa.i, fb.i),
                      blend(a.r, b.r, fa.r, fb.r)};
}

ControlTrajectory emulate_with_replicative(const NetworkModel& model,
                                          const ControlTrajectory& control,
                                          const StateTrajectory& nonrep_states) {
  const int m = model.num_types();
  const int n = control.grid.n_steps;
  ControlTrajectory out{control.grid, Matrix::Zero(m, n + 1)};
  for (int k = 0; k <= n; ++k) {
    Vector mean_r;
    if (k < n) {
      // Simpson average over the cell, matching RK4's stage weights.
      const Compartments mid =
          interpolate_state(model, PatchMode::NonReplicative, nonrep_states, control, k, 0.5);
      mean_r = (nonrep_states.r.col(k) + 4.0 * mid.r + nonrep_states.r.col(k + 1)) / 6.0;
    } else {
      mean_r = nonrep_states.r.col(n);
    }
    for (int j = 0; j < m; ++j) {
      if (mean_r(j) > 0.0) {
        out.u(j, k) = std::min(1.0, model.r0(j) * control.u(j, k) / mean_r(j));
      }
    }
  }
  return out;
}

}  // namespace stratpatch
