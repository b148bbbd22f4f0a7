#pragma once

#include <limits>
#include <optional>

#include "narrownet/dataset.hpp"
#include "narrownet/model.hpp"

namespace narrownet {

/// Feasible set: ||w - w0||_F <= epsilon, and (when outer weights are
/// constrained) v >= zeta entrywise with max(v) / min(v) <= kappa.
struct ConstraintSpec {
  double epsilon = 1.0;
  double zeta = 0.001;
  /// Infinity means the ratio cap is unbounded.
  double kappa = 1.0;
  DenseMatrix anchor_w0;
  /// False leaves v unconstrained (hidden-weight ball only).
  bool constrain_v = true;

  static constexpr double unbounded = std::numeric_limits<double>::infinity();

  /// Throws PreconditionError unless epsilon > 0, zeta > 0 and kappa >= 1.
  void validate() const;
};

/// What a projection changed.
struct ProjectionEvent {
  bool w_moved = false;
  bool v_floor_active = false;  ///< some entry was raised to zeta
  bool v_ratio_active = false;  ///< some entry was lowered to kappa * min
};

/// Euclidean projection onto the Frobenius ball around the anchor.
DenseMatrix project_w(const DenseMatrix& w, const ConstraintSpec& spec, bool* moved = nullptr);

/// Feasibility-restoring clamp for the outer weights: entries below zeta are
/// raised to zeta, then, if max/min exceeds kappa, every entry above
/// kappa * min is lowered to it. Not the Euclidean projection.
DenseVector project_v(const DenseVector& v, const ConstraintSpec& spec,
                      ProjectionEvent* event = nullptr);

/// Applies project_w and, when constrained, project_v.
Params project(const Params& params, const ConstraintSpec& spec, ProjectionEvent* event = nullptr);

struct FeasibilityReport {
  bool feasible = false;
  /// ||w - w0||_F - epsilon; positive means outside the ball.
  double w_excess = 0.0;
  /// zeta - min(v); positive means below the floor.
  double v_floor_deficit = 0.0;
  /// max(v)/min(v) - kappa; positive means the ratio cap is violated.
  double v_ratio_excess = 0.0;
};

/// Boundary-inclusive membership test with 1e-12 relative slack.
FeasibilityReport is_feasible(const Params& params, const ConstraintSpec& spec);

/// Gradient-mapping norm ||theta - P(theta - step * grad)|| / step. Without a
/// spec P is the identity and this is the plain gradient norm.
double kkt_residual(const Params& params, const Activation& act, const Dataset& data,
                    const std::optional<ConstraintSpec>& spec, double probe_step);

/// Same quantity from an already-computed gradient.
double gradient_mapping_norm(const Params& params, const DenseMatrix& grad_w,
                             const DenseVector& grad_v, const std::optional<ConstraintSpec>& spec,
                             double probe_step);

}  // namespace narrownet
