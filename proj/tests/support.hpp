#pragma once

#include "stratpatch/analysis.hpp"

#include <random>

namespace testing {

using namespace stratpatch;

/// Dense random model: every type starts infected, so connectivity holds.
inline NetworkModel random_model(std::mt19937_64& rng, int m, double horizon = 5.0) {
  std::uniform_real_distribution<double> rate(0.0, 0.6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NetworkModel model;
  model.beta = Matrix(m, m);
  model.beta_bar = Matrix(m, m);
  model.pi = Matrix(m, m);
  model.s0 = Vector(m);
  model.i0 = Vector(m);
  model.r0 = Vector(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      model.beta(i, j) = rate(rng);
      model.beta_bar(i, j) = rate(rng) + 0.01;
      model.pi(i, j) = unit(rng);
    }
    const double a = unit(rng) + 0.05;
    const double b = unit(rng) + 0.05;
    const double c = unit(rng) + 0.05;
    model.s0(i) = a / (a + b + c);
    model.i0(i) = b / (a + b + c);
    model.r0(i) = 1.0 - model.s0(i) - model.i0(i);
  }
  model.horizon = horizon;
  return model;
}

inline ControlTrajectory random_control(std::mt19937_64& rng, const TimeGrid& grid, int m) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ControlTrajectory control = ControlTrajectory::constant(grid, m, 0.0);
  // Piecewise-constant in blocks so the control has genuine jumps.
  const int block = std::max(1, grid.n_steps / 20);
  for (int j = 0; j < m; ++j) {
    double level = unit(rng);
    for (int k = 0; k <= grid.n_steps; ++k) {
      if (k % block == 0) level = unit(rng);
      control.u(j, k) = level;
    }
  }
  return control;
}

/// Constant state trajectory, used to check quadrature against closed forms.
inline StateTrajectory constant_states(const TimeGrid& grid, double s, double i, double r) {
  StateTrajectory out;
  out.grid = grid;
  out.s = Matrix::Constant(1, grid.points(), s);
  out.i = Matrix::Constant(1, grid.points(), i);
  out.r = Matrix::Constant(1, grid.points(), r);
  return out;
}

inline NetworkModel single_type(double beta, double beta_bar, double pi, double s0, double i0,
                                double r0, double horizon) {
  NetworkModel model;
  model.beta = Matrix::Constant(1, 1, beta);
  model.beta_bar = Matrix::Constant(1, 1, beta_bar);
  model.pi = Matrix::Constant(1, 1, pi);
  model.s0 = Vector::Constant(1, s0);
  model.i0 = Vector::Constant(1, i0);
  model.r0 = Vector::Constant(1, r0);
  model.horizon = horizon;
  return model;
}

inline Scenario fig1_scenario(double pi) { return three_region_scenario(pi); }

}  // namespace testing
