#include "narrownet/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "narrownet/error.hpp"
#include "narrownet/objective.hpp"

namespace narrownet {

void ConstraintSpec::validate() const {
  if (!(epsilon > 0.0)) throw PreconditionError("constraint epsilon must be > 0");
  if (!(zeta > 0.0)) throw PreconditionError("constraint zeta must be > 0");
  if (!(kappa >= 1.0)) throw PreconditionError("constraint kappa must be >= 1");
}

namespace {

double distance_to_anchor(const DenseMatrix& w, const DenseMatrix& anchor) {
  if (w.rows() != anchor.rows() || w.cols() != anchor.cols()) {
    throw DimensionError("hidden weights are " + w.shape() + " but the anchor is " +
                         anchor.shape());
  }
  std::vector<double> diff(w.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = w.data()[i] - anchor.data()[i];
  return norm2(diff);
}

}  // namespace

DenseMatrix project_w(const DenseMatrix& w, const ConstraintSpec& spec, bool* moved) {
  const double dist = distance_to_anchor(w, spec.anchor_w0);
  if (moved != nullptr) *moved = false;
  if (dist <= spec.epsilon) return w;
  if (moved != nullptr) *moved = true;
  DenseMatrix out(w.rows(), w.cols());
  auto src = w.data();
  auto anchor = spec.anchor_w0.data();
  auto dst = out.data();
  // Rounding can leave the radial image a hair outside the ball; shrink the
  // scale by a growing number of ulps until it lands inside.
  double slack = 0.0;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double scale = spec.epsilon / dist * (1.0 - slack);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = anchor[i] + scale * (src[i] - anchor[i]);
    if (distance_to_anchor(out, spec.anchor_w0) <= spec.epsilon) break;
    slack = slack == 0.0 ? std::numeric_limits<double>::epsilon() : 2.0 * slack;
  }
  return out;
}

DenseVector project_v(const DenseVector& v, const ConstraintSpec& spec, ProjectionEvent* event) {
  DenseVector out = v;
  if (out.empty()) return out;
  bool floor_active = false;
  bool ratio_active = false;
  for (double& x : out) {
    if (x < spec.zeta) {
      x = spec.zeta;
      floor_active = true;
    }
  }
  const double lo = *std::min_element(out.begin(), out.end());
  const double hi = *std::max_element(out.begin(), out.end());
  if (hi > spec.kappa * lo) {
    const double cap = spec.kappa * lo;
    for (double& x : out) {
      if (x > cap) {
        x = cap;
        ratio_active = true;
      }
    }
  }
  if (event != nullptr) {
    event->v_floor_active = event->v_floor_active || floor_active;
    event->v_ratio_active = event->v_ratio_active || ratio_active;
  }
  return out;
}

Params project(const Params& params, const ConstraintSpec& spec, ProjectionEvent* event) {
  bool moved = false;
  DenseMatrix w = project_w(params.w(), spec, &moved);
  if (event != nullptr) event->w_moved = event->w_moved || moved;
  DenseVector v = spec.constrain_v ? project_v(params.v(), spec, event) : params.v();
  return Params(std::move(w), std::move(v), params.head());
}

FeasibilityReport is_feasible(const Params& params, const ConstraintSpec& spec) {
  constexpr double slack = 1e-12;
  FeasibilityReport report;
  report.w_excess = distance_to_anchor(params.w(), spec.anchor_w0) - spec.epsilon;
  bool ok = report.w_excess <= spec.epsilon * slack;
  if (spec.constrain_v && !params.v().empty()) {
    const auto& v = params.v();
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    report.v_floor_deficit = spec.zeta - lo;
    ok = ok && lo >= spec.zeta * (1.0 - slack);
    if (lo > 0.0) {
      report.v_ratio_excess = hi / lo - spec.kappa;
      ok = ok && hi / lo <= spec.kappa * (1.0 + slack);
    } else {
      report.v_ratio_excess = std::numeric_limits<double>::infinity();
      ok = false;
    }
  }
  report.feasible = ok;
  return report;
}

double gradient_mapping_norm(const Params& params, const DenseMatrix& grad_w,
                             const DenseVector& grad_v, const std::optional<ConstraintSpec>& spec,
                             double probe_step) {
  if (!(probe_step > 0.0)) throw PreconditionError("kkt_residual: probe_step must be > 0");
  DenseMatrix w_step = params.w();
  for (std::size_t i = 0; i < w_step.size(); ++i) w_step.data()[i] -= probe_step * grad_w.data()[i];
  DenseVector v_step = params.v();
  for (std::size_t j = 0; j < v_step.size(); ++j) v_step[j] -= probe_step * grad_v[j];
  if (spec) {
    w_step = project_w(w_step, *spec);
    if (spec->constrain_v) v_step = project_v(v_step, *spec);
  }
  std::vector<double> diff;
  diff.reserve(w_step.size() + v_step.size());
  for (std::size_t i = 0; i < w_step.size(); ++i) diff.push_back(params.w().data()[i] - w_step.data()[i]);
  for (std::size_t j = 0; j < v_step.size(); ++j) diff.push_back(params.v()[j] - v_step[j]);
  return norm2(diff) / probe_step;
}

double kkt_residual(const Params& params, const Activation& act, const Dataset& data,
                    const std::optional<ConstraintSpec>& spec, double probe_step) {
  const Gradients g = grad(params, act, data);
  return gradient_mapping_norm(params, g.grad_w, g.grad_v, spec, probe_step);
}

}  // namespace narrownet
