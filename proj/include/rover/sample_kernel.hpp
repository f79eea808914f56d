#pragma once

#include <array>
#include <span>

#include "rover/planner.hpp"

namespace rover {

/// Everything one quadrature sample needs, shared read-only across threads.
struct SampleKernelInputs {
  const TerrainMap* map = nullptr;
  const PowerParams* params = nullptr;
  const PlannerConfig* config = nullptr;
  const AugmentedLagrangian* lagrangian = nullptr;  // null: plain penalties
  std::span<const Segment> segments;
  int samples_per_segment = 16;
};

/// Weighted contribution of one sample to the objective and its partials
/// w.r.t. the owning segment's coefficients (x block, y block) and duration.
struct SampleTerm {
  bool valid = true;
  bool active = false;  // false for degenerate (near-rest) samples
  double cost = 0.0;
  double risk = 0.0;
  double power_penalty = 0.0;
  double kinematic_penalty = 0.0;
  std::array<double, 12> d_coeffs{};
  double d_duration = 0.0;
  std::array<double, kConstraintKindCount> g{};  // constraint values when active
};

/// Sample index -> (segment, node); node k sits at alpha = k / samples_per_segment.
SampleTerm evaluate_sample(const SampleKernelInputs& in, int index, bool with_gradient) noexcept;

/// Reference loop.
void evaluate_samples_serial(const SampleKernelInputs& in, std::span<SampleTerm> out,
                             bool with_gradient);

/// OpenMP loop over samples. Each slot is written by exactly one iteration, so
/// the output matches the serial loop bit for bit.
void evaluate_samples_parallel(const SampleKernelInputs& in, std::span<SampleTerm> out,
                               bool with_gradient);

}  // namespace rover
