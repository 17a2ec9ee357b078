#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stackrepair/level.hpp"

namespace stackrepair {

enum class Metric { velocity, destruction, damage };

std::string_view to_string(Metric m) noexcept;
std::optional<Metric> metric_from_name(std::string_view name) noexcept;

struct MaterialProps {
  Material kind = Material::wood;
  double density = 1.0;
  double friction = 0.6;
  double destruction_threshold = 1.0;
  double restitution = 0.05;
};

/// Per-material constants, indexed by Material.
struct MaterialTable {
  std::array<MaterialProps, 3> entries{{
      {Material::wood, 1.0, 0.6, 1.0, 0.05},
      {Material::ice, 0.9, 0.1, 0.5, 0.05},
      {Material::stone, 2.5, 0.7, 2.0, 0.05},
  }};

  [[nodiscard]] const MaterialProps& operator[](Material m) const noexcept {
    return entries[static_cast<std::size_t>(m)];
  }
  MaterialProps& operator[](Material m) noexcept { return entries[static_cast<std::size_t>(m)]; }
};

struct SimConfig {
  double gravity = 9.8;
  double dt = 1.0 / 240.0;
  int settle_steps = 1200;
  double velocity_epsilon = 0.01;
  double displacement_epsilon = 0.02;
  /// Damage accrued per unit of impact impulse above the activation threshold.
  double impact_damage_scale = 1.0;
  double damage_activation_impulse = 0.05;
  int solver_iterations = 16;
  MaterialTable materials;

  // Pigs are not described by the level format; placeholder constants.
  double pig_density = 0.8;
  double pig_friction = 0.6;
  double ground_friction = 0.8;

  /// Gap below which two boxes are considered touching.
  double contact_slop = 0.005;
  /// Penetration tolerated before the solver pushes bodies apart. The push is
  /// off by default since it feeds energy into the system.
  double penetration_slop = 0.01;
  double penetration_push_rate = 0.0;
  double max_push_speed = 0.5;
  /// Approach speed below which contacts do not bounce.
  double restitution_threshold = 0.5;
  /// Overlap between bodies at load time above which the level is rejected.
  double load_overlap_limit = 0.05;

  /// Stop once every body has been at rest for `quiescent_steps` steps.
  bool stop_when_quiescent = true;
  int quiescent_steps = 30;
  double quiescent_speed = 1e-7;
  /// When set to Metric::velocity, stop at the first block that violates the
  /// velocity criterion (the verdict is already decided).
  std::optional<Metric> early_exit_metric;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

struct BlockOutcome {
  double peak_velocity = 0.0;
  double net_displacement = 0.0;
  double damage = -1.0;
  bool destroyed = false;

  bool operator==(const BlockOutcome&) const = default;
};

struct SimOutcome {
  std::vector<BlockOutcome> per_block;
  double total_damage = 0.0;
  int destroyed_count = 0;
  bool stable_velocity = true;
  bool stable_destruction = true;
  bool stable_damage = true;
  int steps_run = 0;
  bool stopped_early = false;

  bool operator==(const SimOutcome&) const = default;
};

/// State of one body after a step, handed to step observers.
struct BodyState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double mass = 0.0;
  bool alive = true;
  bool is_pig = false;
};

struct StepSnapshot {
  int step = 0;  // 1-based count of completed steps
  std::span<const BodyState> bodies;
  int destroyed_count = 0;
  int contact_count = 0;
  int ground_contact_count = 0;
};

using StepObserver = std::function<void(const StepSnapshot&)>;

/// Runs the settle simulation of a level. Pure function of its inputs.
/// Throws Error(invalid_level) for non-finite coordinates, objects below the
/// ground or interpenetration beyond the load limit.
SimOutcome simulate(const Level& level, const SimConfig& config = {}, const StepObserver& observer = {});

/// Runs only the load-time checks of simulate().
void check_loadable(const Level& level, const SimConfig& config = {});

bool classify(const SimOutcome& outcome, Metric metric) noexcept;

/// Simulates and classifies, exiting early where the verdict allows it.
bool is_stable(const Level& level, Metric metric, const SimConfig& config = {});

/// Mass of a body given the material table.
double block_mass(const Block& block, const SimConfig& config) noexcept;

}  // namespace stackrepair
