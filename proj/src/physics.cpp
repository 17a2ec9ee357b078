#include "stackrepair/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

#include "stackrepair/error.hpp"
#include "stackrepair/support.hpp"

namespace stackrepair {

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::velocity: return "velocity";
    case Metric::destruction: return "destruction";
    case Metric::damage: return "damage";
  }
  return "velocity";
}

std::optional<Metric> metric_from_name(std::string_view name) noexcept {
  if (name == "velocity") return Metric::velocity;
  if (name == "destruction") return Metric::destruction;
  if (name == "damage") return Metric::damage;
  return std::nullopt;
}

void SimConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("SimConfig: ") + what);
  };
  require(gravity > 0.0, "gravity must be positive");
  require(dt > 0.0, "dt must be positive");
  require(settle_steps > 0, "settle_steps must be positive");
  require(dt * settle_steps >= 2.0 - 1e-12, "settle window must cover at least 2 s");
  require(velocity_epsilon > 0.0 && displacement_epsilon > 0.0, "epsilons must be positive");
  require(impact_damage_scale > 0.0, "impact_damage_scale must be positive");
  require(damage_activation_impulse >= 0.0, "damage_activation_impulse must be non-negative");
  require(solver_iterations > 0, "solver_iterations must be positive");
  for (const auto& m : materials.entries) {
    require(m.density > 0.0, "material density must be positive");
    require(m.friction > 0.0 && m.friction <= 1.0, "material friction must lie in (0, 1]");
    require(m.destruction_threshold > 0.0, "destruction threshold must be positive");
    require(m.restitution > 0.0 && m.restitution <= 0.2, "restitution must lie in (0, 0.2]");
  }
  require(pig_density > 0.0 && pig_friction > 0.0 && ground_friction > 0.0, "pig/ground constants must be positive");
  require(contact_slop > 0.0 && penetration_slop >= 0.0, "slop values must be positive");
}

bool classify(const SimOutcome& outcome, Metric metric) noexcept {
  switch (metric) {
    case Metric::velocity: return outcome.stable_velocity;
    case Metric::destruction: return outcome.stable_destruction;
    case Metric::damage: return outcome.stable_damage;
  }
  return false;
}

double block_mass(const Block& block, const SimConfig& config) noexcept {
  return config.materials[block.material].density * block.width() * block.height();
}

namespace {

constexpr int kGround = -1;

struct Body {
  double hw = 0.0;
  double hh = 0.0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double mass = 0.0;
  double inv_mass = 0.0;
  double friction = 0.0;
  double restitution = 0.0;
  double threshold = 0.0;
  double damage = -1.0;
  double peak_speed = 0.0;
  double displacement = 0.0;
  bool alive = true;
  bool destroyed = false;
  bool is_pig = false;

  [[nodiscard]] Aabb box() const noexcept { return {x - hw, y - hh, x + hw, y + hh}; }
};

// Contact along a coordinate axis. The normal points from body a to body b;
// a is kGround for ground contacts.
struct Contact {
  int a = kGround;
  int b = 0;
  int axis = 1;  // 0: normal +x, 1: normal +y
  double gap = 0.0;
  double mass_eff = 0.0;
  double friction = 0.0;
  double target = 0.0;
  double pre_vn = 0.0;  // relative normal velocity before gravity was applied
  double acc_n = 0.0;
  double acc_t = 0.0;
};

class World {
 public:
  World(const Level& level, const SimConfig& config) : cfg_(config) {
    bodies_.reserve(level.blocks.size() + level.pigs.size());
    for (const auto& b : level.blocks) {
      const auto& props = cfg_.materials[b.material];
      Body body;
      body.hw = 0.5 * b.width();
      body.hh = 0.5 * b.height();
      body.x = body.x0 = b.x;
      body.y = body.y0 = b.y;
      body.mass = block_mass(b, cfg_);
      body.friction = props.friction;
      body.restitution = props.restitution;
      body.threshold = props.destruction_threshold;
      bodies_.push_back(body);
    }
    for (const auto& p : level.pigs) {
      Body body;
      body.hw = body.hh = p.radius;
      body.x = body.x0 = p.x;
      body.y = body.y0 = p.y;
      body.mass = cfg_.pig_density * 4.0 * p.radius * p.radius;
      body.friction = cfg_.pig_friction;
      body.restitution = cfg_.materials[Material::wood].restitution;
      body.is_pig = true;
      body.damage = 0.0;
      bodies_.push_back(body);
    }
    for (auto& body : bodies_) body.inv_mass = 1.0 / body.mass;
    block_count_ = level.blocks.size();
    validate_load();
    states_.resize(bodies_.size());
  }

  SimOutcome run(const StepObserver& observer) {
    SimOutcome out;
    int quiet = 0;
    for (int step = 1; step <= cfg_.settle_steps; ++step) {
      const bool tipped = step_once();
      out.steps_run = step;
      if (observer) notify(observer, step);

      if (cfg_.early_exit_metric == Metric::velocity && velocity_violated()) {
        out.stopped_early = step < cfg_.settle_steps;
        break;
      }
      if (cfg_.stop_when_quiescent) {
        quiet = (!tipped && max_speed() <= cfg_.quiescent_speed) ? quiet + 1 : 0;
        if (quiet >= cfg_.quiescent_steps) {
          out.stopped_early = step < cfg_.settle_steps;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < block_count_; ++i) {
      Body& b = bodies_[i];
      if (b.alive) b.displacement = std::hypot(b.x - b.x0, b.y - b.y0);
      BlockOutcome bo{b.peak_speed, b.displacement, b.damage, b.destroyed};
      out.per_block.push_back(bo);
      out.total_damage += b.damage;
      out.destroyed_count += b.destroyed ? 1 : 0;
      if (bo.peak_velocity > cfg_.velocity_epsilon || bo.net_displacement > cfg_.displacement_epsilon) {
        out.stable_velocity = false;
      }
    }
    out.stable_destruction = out.destroyed_count == 0;
    out.stable_damage = out.total_damage <= 0.0;
    return out;
  }

 private:
  void validate_load() const {
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      const Body& b = bodies_[i];
      if (!std::isfinite(b.x) || !std::isfinite(b.y)) {
        throw Error(Errc::invalid_level, "body " + std::to_string(i) + " has non-finite coordinates");
      }
      if (b.y - b.hh < -1e-6) {
        throw Error(Errc::invalid_level, "body " + std::to_string(i) + " starts below the ground");
      }
    }
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
        if (penetration(bodies_[i].box(), bodies_[j].box()) > cfg_.load_overlap_limit) {
          throw Error(Errc::invalid_level, "bodies " + std::to_string(i) + " and " + std::to_string(j) +
                                               " interpenetrate at load");
        }
      }
    }
  }

  [[nodiscard]] bool ghosted(int i, int j) const {
    auto key = std::minmax(i, j);
    return std::binary_search(ghosts_.begin(), ghosts_.end(), std::pair<int, int>(key.first, key.second));
  }

  void add_ghost(int i, int j) {
    auto [lo, hi] = std::minmax(i, j);
    std::pair<int, int> key(lo, hi);
    auto it = std::lower_bound(ghosts_.begin(), ghosts_.end(), key);
    if (it == ghosts_.end() || *it != key) ghosts_.insert(it, key);
  }

  // Drops ghost pairs whose boxes no longer touch.
  void prune_ghosts() {
    std::erase_if(ghosts_, [&](const std::pair<int, int>& g) {
      const Body& a = bodies_[static_cast<std::size_t>(g.first)];
      const Body& b = bodies_[static_cast<std::size_t>(g.second)];
      if (!a.alive || !b.alive) return true;
      const Aabb A = a.box();
      const Aabb B = b.box();
      return overlap_x(A, B) < -cfg_.contact_slop || overlap_y(A, B) < -cfg_.contact_slop;
    });
  }

  // A body whose center of mass leaves its support hull falls: its contacts
  // with the bodies holding it are disabled until they separate.
  bool apply_tipping() {
    std::vector<Aabb> boxes(bodies_.size());
    for (std::size_t i = 0; i < bodies_.size(); ++i) boxes[i] = bodies_[i].box();
    auto info = analyze_support(boxes, cfg_.contact_slop, [&](std::size_t i, std::size_t j) {
      return !bodies_[j].alive || ghosted(static_cast<int>(i), static_cast<int>(j));
    });
    bool any = false;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      if (!bodies_[i].alive || !info[i].has_support || info[i].grounded || !info[i].com_outside) continue;
      for (int s : info[i].supporters) add_ghost(static_cast<int>(i), s);
      any = true;
    }
    return any;
  }

  void build_contacts() {
    contacts_.clear();
    const double dt = cfg_.dt;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      const Body& b = bodies_[i];
      if (!b.alive) continue;
      const double gap = b.y - b.hh;
      const double margin = cfg_.contact_slop + std::abs(b.vy) * dt;
      if (gap <= margin) {
        Contact c;
        c.a = kGround;
        c.b = static_cast<int>(i);
        c.axis = 1;
        c.gap = gap;
        c.mass_eff = b.mass;
        c.friction = std::sqrt(b.friction * cfg_.ground_friction);
        contacts_.push_back(c);
      }
    }
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      if (!bodies_[i].alive) continue;
      for (std::size_t j = i + 1; j < bodies_.size(); ++j) {
        if (!bodies_[j].alive || ghosted(static_cast<int>(i), static_cast<int>(j))) continue;
        const Body& p = bodies_[i];
        const Body& q = bodies_[j];
        const Aabb A = p.box();
        const Aabb B = q.box();
        const double ox = overlap_x(A, B);
        const double oy = overlap_y(A, B);
        const double margin =
            cfg_.contact_slop + (std::hypot(p.vx, p.vy) + std::hypot(q.vx, q.vy)) * dt;
        int axis;
        if (ox > 0.0 && oy > 0.0) {
          axis = ox < oy ? 0 : 1;
        } else if (ox > 0.0 && -oy <= margin) {
          axis = 1;
        } else if (oy > 0.0 && -ox <= margin) {
          axis = 0;
        } else {
          continue;
        }
        Contact c;
        const bool i_first = axis == 1 ? p.y <= q.y : p.x <= q.x;
        c.a = static_cast<int>(i_first ? i : j);
        c.b = static_cast<int>(i_first ? j : i);
        c.axis = axis;
        c.gap = axis == 1 ? -oy : -ox;
        c.mass_eff = 1.0 / (p.inv_mass + q.inv_mass);
        c.friction = std::sqrt(p.friction * q.friction);
        contacts_.push_back(c);
      }
    }
    // Highest contacts first, so one sweep carries an impact down to the ground.
    std::stable_sort(contacts_.begin(), contacts_.end(), [&](const Contact& l, const Contact& r) {
      return contact_height(l) > contact_height(r);
    });
  }

  [[nodiscard]] double contact_height(const Contact& c) const {
    if (c.a == kGround) return 0.0;
    const Body& a = bodies_[static_cast<std::size_t>(c.a)];
    return c.axis == 1 ? a.y + a.hh : std::max(a.y, bodies_[static_cast<std::size_t>(c.b)].y);
  }

  [[nodiscard]] double rel_normal(const Contact& c) const {
    const Body& b = bodies_[static_cast<std::size_t>(c.b)];
    double v = c.axis == 1 ? b.vy : b.vx;
    if (c.a != kGround) {
      const Body& a = bodies_[static_cast<std::size_t>(c.a)];
      v -= c.axis == 1 ? a.vy : a.vx;
    }
    return v;
  }

  [[nodiscard]] double rel_tangent(const Contact& c) const {
    const Body& b = bodies_[static_cast<std::size_t>(c.b)];
    double v = c.axis == 1 ? b.vx : b.vy;
    if (c.a != kGround) {
      const Body& a = bodies_[static_cast<std::size_t>(c.a)];
      v -= c.axis == 1 ? a.vx : a.vy;
    }
    return v;
  }

  void apply_impulse(const Contact& c, double jn, double jt) {
    // Normal along the contact axis, tangent along the other axis.
    const double jx = c.axis == 0 ? jn : jt;
    const double jy = c.axis == 1 ? jn : jt;
    Body& b = bodies_[static_cast<std::size_t>(c.b)];
    b.vx += jx * b.inv_mass;
    b.vy += jy * b.inv_mass;
    if (c.a != kGround) {
      Body& a = bodies_[static_cast<std::size_t>(c.a)];
      a.vx -= jx * a.inv_mass;
      a.vy -= jy * a.inv_mass;
    }
  }

  // Loads carried by resting contacts, propagated top-down. Warm-starts every
  // step so that resting stacks stay in equilibrium.
  void static_warm_start() {
    const double dt = cfg_.dt;
    std::vector<std::size_t> order(bodies_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
      return bodies_[p].y - bodies_[p].hh > bodies_[q].y - bodies_[q].hh;
    });
    std::vector<double> load(bodies_.size(), 0.0);
    for (std::size_t i : order) {
      const Body& body = bodies_[i];
      if (!body.alive) continue;
      const double total = load[i] + body.mass * cfg_.gravity * dt;
      std::vector<std::size_t> support;
      double weight_sum = 0.0;
      for (std::size_t k = 0; k < contacts_.size(); ++k) {
        const Contact& c = contacts_[k];
        // Only touching contacts carry load; a body still closing a gap is not resting.
        if (c.axis != 1 || c.b != static_cast<int>(i) || c.gap > 1e-6) continue;
        support.push_back(k);
        weight_sum += contact_width(c);
      }
      if (support.empty() || weight_sum <= 0.0) continue;
      for (std::size_t k : support) {
        Contact& c = contacts_[k];
        const double share = total * contact_width(c) / weight_sum;
        c.acc_n += share;
        if (c.a != kGround) load[static_cast<std::size_t>(c.a)] += share;
      }
    }
  }

  [[nodiscard]] double contact_width(const Contact& c) const {
    const Aabb B = bodies_[static_cast<std::size_t>(c.b)].box();
    if (c.a == kGround) return B.width();
    return std::max(0.0, overlap_x(bodies_[static_cast<std::size_t>(c.a)].box(), B));
  }

  bool step_once() {
    const double dt = cfg_.dt;
    prune_ghosts();
    const bool tipped = apply_tipping();

    // Relative velocities before gravity feed the impact estimate.
    std::vector<std::pair<double, double>> pre(bodies_.size());
    for (std::size_t i = 0; i < bodies_.size(); ++i) pre[i] = {bodies_[i].vx, bodies_[i].vy};

    for (auto& b : bodies_) {
      if (b.alive) b.vy -= cfg_.gravity * dt;
    }

    build_contacts();
    for (auto& c : contacts_) {
      const double vb = c.axis == 1 ? pre[static_cast<std::size_t>(c.b)].second : pre[static_cast<std::size_t>(c.b)].first;
      const double va = c.a == kGround ? 0.0
                        : (c.axis == 1 ? pre[static_cast<std::size_t>(c.a)].second
                                       : pre[static_cast<std::size_t>(c.a)].first);
      c.pre_vn = vb - va;

      const double vn = rel_normal(c);
      if (c.gap > 0.0) {
        c.target = -c.gap / dt;
      } else if (-c.gap > cfg_.penetration_slop) {
        c.target = std::min(cfg_.penetration_push_rate * (-c.gap - cfg_.penetration_slop) / dt, cfg_.max_push_speed);
      } else {
        c.target = 0.0;
      }
      if (c.gap <= cfg_.contact_slop && vn < -cfg_.restitution_threshold) {
        const double e = c.a == kGround ? bodies_[static_cast<std::size_t>(c.b)].restitution
                                        : std::max(bodies_[static_cast<std::size_t>(c.a)].restitution,
                                                   bodies_[static_cast<std::size_t>(c.b)].restitution);
        c.target = std::max(c.target, -e * vn);
      }
    }

    static_warm_start();
    for (const auto& c : contacts_) apply_impulse(c, c.acc_n, c.acc_t);

    for (int it = 0; it < cfg_.solver_iterations; ++it) {
      for (auto& c : contacts_) {
        const double vn = rel_normal(c);
        double jn = (c.target - vn) * c.mass_eff;
        const double acc = std::max(c.acc_n + jn, 0.0);
        jn = acc - c.acc_n;
        c.acc_n = acc;

        const double vt = rel_tangent(c);
        double jt = -vt * c.mass_eff;
        const double bound = c.friction * c.acc_n;
        const double acc_t = std::clamp(c.acc_t + jt, -bound, bound);
        jt = acc_t - c.acc_t;
        c.acc_t = acc_t;
        apply_impulse(c, jn, jt);
      }
    }

    // Final bottom-up pass over resting contacts with the lower body held
    // fixed, so a light body wedged under a heavy one cannot leave the stack
    // drifting apart or sinking.
    for (auto it = contacts_.rbegin(); it != contacts_.rend(); ++it) {
      Contact& c = *it;
      if (c.axis != 1) continue;
      Body& b = bodies_[static_cast<std::size_t>(c.b)];
      const double jn_raw = (c.target - rel_normal(c)) * b.mass;
      const double acc = std::max(c.acc_n + jn_raw, 0.0);
      b.vy += (acc - c.acc_n) * b.inv_mass;
      c.acc_n = acc;
    }

    for (auto& b : bodies_) {
      if (!b.alive) continue;
      b.x += b.vx * dt;
      b.y += b.vy * dt;
    }

    for (std::size_t i = 0; i < block_count_; ++i) {
      Body& b = bodies_[i];
      if (b.alive) b.peak_speed = std::max(b.peak_speed, std::hypot(b.vx, b.vy));
    }

    accrue_damage();
    return tipped;
  }

  // Impact impulse: the part of the contact impulse that arrests approach
  // speed the body already had before this step's gravity.
  void accrue_damage() {
    const double dt = cfg_.dt;
    std::vector<double> gained(block_count_, 0.0);
    for (const auto& c : contacts_) {
      const double approach = -c.pre_vn - std::max(c.gap, 0.0) / dt;
      if (approach <= 0.0) continue;
      const double impact = std::min(c.acc_n, c.mass_eff * approach);
      if (impact <= cfg_.damage_activation_impulse) continue;
      const double dmg = cfg_.impact_damage_scale * (impact - cfg_.damage_activation_impulse);
      for (int idx : {c.a, c.b}) {
        if (idx == kGround || static_cast<std::size_t>(idx) >= block_count_) continue;
        gained[static_cast<std::size_t>(idx)] += dmg;
      }
    }
    for (std::size_t i = 0; i < block_count_; ++i) {
      Body& b = bodies_[i];
      // A block that has never left rest absorbs hits without damage.
      if (!b.alive || gained[i] <= 0.0 || b.peak_speed <= cfg_.velocity_epsilon) continue;
      b.damage += gained[i];
      if (b.damage >= b.threshold) {
        b.alive = false;
        b.destroyed = true;
        b.displacement = std::hypot(b.x - b.x0, b.y - b.y0);
        ++destroyed_;
      }
    }
  }

  [[nodiscard]] bool velocity_violated() const {
    for (std::size_t i = 0; i < block_count_; ++i) {
      const Body& b = bodies_[i];
      if (b.peak_speed > cfg_.velocity_epsilon) return true;
      if (std::hypot(b.x - b.x0, b.y - b.y0) > cfg_.displacement_epsilon) return true;
    }
    return false;
  }

  [[nodiscard]] double max_speed() const {
    double m = 0.0;
    for (const auto& b : bodies_) {
      if (b.alive) m = std::max(m, std::hypot(b.vx, b.vy));
    }
    return m;
  }

  void notify(const StepObserver& observer, int step) {
    int ground = 0;
    for (const auto& c : contacts_) ground += c.a == kGround ? 1 : 0;
    for (std::size_t i = 0; i < bodies_.size(); ++i) {
      const Body& b = bodies_[i];
      states_[i] = {b.x, b.y, b.vx, b.vy, b.mass, b.alive, b.is_pig};
    }
    observer(StepSnapshot{step, states_, destroyed_, static_cast<int>(contacts_.size()), ground});
  }

  SimConfig cfg_;
  std::vector<Body> bodies_;
  std::size_t block_count_ = 0;
  std::vector<Contact> contacts_;
  std::vector<std::pair<int, int>> ghosts_;  // sorted
  std::vector<BodyState> states_;
  int destroyed_ = 0;
};

}  // namespace

SimOutcome simulate(const Level& level, const SimConfig& config, const StepObserver& observer) {
  config.validate();
  World world(level, config);
  return world.run(observer);
}

void check_loadable(const Level& level, const SimConfig& config) {
  config.validate();
  World world(level, config);
}

bool is_stable(const Level& level, Metric metric, const SimConfig& config) {
  SimConfig cfg = config;
  if (metric == Metric::velocity) cfg.early_exit_metric = Metric::velocity;
  return classify(simulate(level, cfg), metric);
}

}  // namespace stackrepair
