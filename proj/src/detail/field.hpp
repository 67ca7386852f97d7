#pragma once

#include "stratpatch/dynamics.hpp"

namespace stratpatch::detail {

/// Allocation-free evaluator of the controlled vector field.  The public
/// rhs_* functions and the integrators all route through here.
class VectorField {
 public:
  VectorField(const NetworkModel& model, PatchMode mode)
      : mode_(mode),
        beta_t_(model.beta.transpose()),
        beta_bar_t_(model.beta_bar.transpose()),
        heal_t_(model.pi.cwiseProduct(model.beta_bar).transpose()),
        r0_(model.r0),
        mass_(model.num_types()),
        force_(model.num_types()),
        patch_(model.num_types()),
        heal_(model.num_types()) {}

  [[nodiscard]] PatchMode mode() const noexcept { return mode_; }

  /// Writes dS, dI, dR for the state (s, i, r) under control u.
  template <class In, class Out>
  void operator()(const In& s, const In& i, const In& r, const Vector& u, Out& ds, Out& di,
                  Out& dr) {
    if (mode_ == PatchMode::Replicative) {
      mass_ = r.cwiseProduct(u);
    } else {
      mass_ = r0_.cwiseProduct(u);
    }
    force_.noalias() = beta_t_ * i;
    patch_.noalias() = beta_bar_t_ * mass_;
    heal_.noalias() = heal_t_ * mass_;
    ds = -s.cwiseProduct(force_ + patch_);
    di = s.cwiseProduct(force_) - i.cwiseProduct(heal_);
    dr = s.cwiseProduct(patch_) + i.cwiseProduct(heal_);
  }

  // Rates from the most recent evaluation.
  [[nodiscard]] const Vector& force() const noexcept { return force_; }
  [[nodiscard]] const Vector& patch() const noexcept { return patch_; }
  [[nodiscard]] const Vector& heal() const noexcept { return heal_; }

 private:
  PatchMode mode_;
  Matrix beta_t_;
  Matrix beta_bar_t_;
  Matrix heal_t_;
  Vector r0_;
  Vector mass_;
  Vector force_;
  Vector patch_;
  Vector heal_;
};

}  // namespace stratpatch::detail
