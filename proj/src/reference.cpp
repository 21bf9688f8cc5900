#include "tla/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tla {

namespace {

// Position as a function of time, piecewise linear through the knots, then
// continuing at `tail_speed` (zero when pinned at a red that never ends).
struct PiecewiseRoute {
  std::vector<double> t;
  std::vector<double> x;
  double tail_speed = 0.0;

  double at(double time) const {
    if (time >= t.back()) return x.back() + tail_speed * (time - t.back());
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    const double span = t[i + 1] - t[i];
    if (span <= 0.0) return x[i + 1];
    return x[i] + (x[i + 1] - x[i]) * (time - t[i]) / span;
  }
};

}  // namespace

ReferenceTrajectory build_reference(const ReferenceRequest& req) {
  if (req.horizon < 1) throw std::invalid_argument("build_reference: horizon must be >= 1");
  if (!(req.dt > 0.0)) throw std::invalid_argument("build_reference: dt must be > 0");
  if (!(req.legal_limit > 0.0)) {
    throw std::invalid_argument("build_reference: legal limit must be > 0");
  }
  if (req.preceding_bound &&
      static_cast<int>(req.preceding_bound->size()) != req.horizon) {
    throw std::invalid_argument("build_reference: preceding bound length mismatch");
  }

  std::vector<const PhaseSchedule*> ahead;
  for (const PhaseSchedule& s : req.schedules) {
    if (s.signal_position >= req.ego_position) ahead.push_back(&s);
  }
  std::stable_sort(ahead.begin(), ahead.end(), [](const auto* a, const auto* b) {
    return a->signal_position < b->signal_position;
  });

  const double limit = req.legal_limit;
  PiecewiseRoute route;
  route.t.push_back(req.t_now);
  route.x.push_back(req.ego_position);
  route.tail_speed = limit;

  double construction_speed = limit;
  bool first = true;
  for (const PhaseSchedule* s : ahead) {
    const double t_cur = route.t.back();
    const double x_cur = route.x.back();
    const double dist = s->signal_position - x_cur;
    const double t_at_limit = t_cur + dist / limit;
    const double t_green = next_green_start(*s, t_at_limit);

    if (!std::isfinite(t_green)) {
      // Red forever: drive at the limit up to the stop line and stay there.
      const double stop = std::max(x_cur, s->signal_position - req.stop_margin);
      route.t.push_back(t_cur + (stop - x_cur) / limit);
      route.x.push_back(stop);
      route.tail_speed = 0.0;
      break;
    }

    double speed = limit;
    double t_arrive = t_at_limit;
    if (t_green > t_at_limit) {
      speed = dist / (t_green - t_cur);
      t_arrive = t_green;
    }
    if (first) {
      construction_speed = speed;
      first = false;
    }
    route.t.push_back(t_arrive);
    route.x.push_back(s->signal_position);
  }

  ReferenceTrajectory ref;
  ref.dt = req.dt;
  ref.construction_speed = construction_speed;
  ref.positions.resize(req.horizon);
  for (int k = 0; k < req.horizon; ++k) {
    double p = route.at(req.t_now + (k + 1) * req.dt);
    if (req.preceding_bound) p = std::min(p, (*req.preceding_bound)[k]);
    ref.positions[k] = p;
  }
  ref.terminal_position = ref.positions.back();
  return ref;
}

double lateness_penalty(std::span<const double> actual, const ReferenceTrajectory& ref,
                        double weight) {
  if (actual.size() != ref.positions.size()) {
    throw std::invalid_argument("lateness_penalty: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < actual.size(); ++k) {
    sum += std::max(0.0, ref.positions[k] - actual[k]);
  }
  return weight * sum;
}

double terminal_cost(double final_position, double d_hp, double weight) {
  return weight * std::max(0.0, d_hp - final_position);
}

}  // namespace tla
