#include "rover/planning/teb.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace rover {

double TebTrajectory::total_time() const {
  double t = 0.0;
  for (double dt : dts) t += dt;
  return t;
}

void TebTrajectory::validate() const {
  if (poses.size() < 2 || dts.size() + 1 != poses.size()) {
    throw std::invalid_argument("TEB trajectory needs n >= 1 segments and n + 1 poses");
  }
  for (double dt : dts) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw std::invalid_argument("TEB trajectory intervals must be positive");
    }
  }
}

// ---------------------------------------------------------------------------
// Initialization

namespace {

struct Polyline {
  std::vector<Vec2> pts;
  std::vector<double> cumulative;  // arc length at each vertex

  explicit Polyline(std::vector<Vec2> p) : pts(std::move(p)) {
    cumulative.resize(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      cumulative[i] = cumulative[i - 1] + distance(pts[i - 1], pts[i]);
    }
  }
  double length() const { return cumulative.back(); }

  // Position and tangent heading at arc length s.
  Pose2D at(double s) const {
    std::size_t seg = 0;
    while (seg + 2 < pts.size() && cumulative[seg + 1] <= s) ++seg;
    // Skip zero-length segments so the tangent is defined.
    std::size_t tseg = seg;
    while (tseg + 2 < pts.size() && cumulative[tseg + 1] - cumulative[tseg] <= 0.0) ++tseg;
    const Vec2 a = pts[seg];
    const Vec2 b = pts[seg + 1];
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double u = len > 0.0 ? std::clamp((s - cumulative[seg]) / len, 0.0, 1.0) : 0.0;
    const Vec2 p = a + (b - a) * u;
    const Vec2 t = pts[tseg + 1] - pts[tseg];
    double heading = std::atan2(t.y, t.x);
    // Exactly on an interior vertex: bisect the incoming and outgoing tangents.
    if (seg > 0 && std::abs(s - cumulative[seg]) < 1e-12) {
      const Vec2 in = pts[seg] - pts[seg - 1];
      heading = wrap_angle(std::atan2(in.y, in.x) + wrap_angle(heading - std::atan2(in.y, in.x)) / 2.0);
    }
    return {p.x, p.y, heading};
  }
};

double seed_interval(const Pose2D& a, const Pose2D& b, const RoverParams& params) {
  const double d = distance(a.position(), b.position());
  const double turn = std::abs(wrap_angle(b.theta - a.theta));
  return std::max({d / (0.5 * params.v_max), turn / (0.5 * params.omega_max), kMinDt});
}

}  // namespace

TebTrajectory init_trajectory(std::span<const Pose2D> waypoints, const RoverParams& params, double spacing) {
  if (waypoints.empty()) {
    throw std::invalid_argument("init_trajectory: empty path");
  }
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("init_trajectory: spacing must be positive");
  }
  const Pose2D start = waypoints.front();
  const Pose2D goal = waypoints.back();

  std::vector<Vec2> pts;
  for (const auto& w : waypoints) {
    if (pts.empty() || !(pts.back() == w.position())) pts.push_back(w.position());
  }

  TebTrajectory traj;
  traj.poses.push_back(start);
  const Polyline line(pts);
  if (pts.size() >= 2 && line.length() > 1e-9) {
    const int m = std::max(1, static_cast<int>(std::lround(line.length() / spacing)));
    const double step = line.length() / m;
    for (int k = 1; k < m; ++k) {
      traj.poses.push_back(line.at(step * k));
    }
  }
  traj.poses.push_back(goal);
  for (std::size_t i = 0; i + 1 < traj.poses.size(); ++i) {
    traj.dts.push_back(seed_interval(traj.poses[i], traj.poses[i + 1], params));
  }
  return traj;
}

TebTrajectory init_trajectory(const GridPath& path, const RoverParams& params, double spacing) {
  return init_trajectory(std::span<const Pose2D>(path.world_poses), params, spacing);
}

// ---------------------------------------------------------------------------
// Kinematic quantities

double segment_velocity(const TebTrajectory& traj, std::size_t i) {
  return distance(traj.poses[i].position(), traj.poses[i + 1].position()) / traj.dts[i];
}

double segment_omega(const TebTrajectory& traj, std::size_t i) {
  return wrap_angle(traj.poses[i + 1].theta - traj.poses[i].theta) / traj.dts[i];
}

double segment_acceleration(const TebTrajectory& traj, std::size_t i) {
  const double mean_dt = 0.5 * (traj.dts[i] + traj.dts[i + 1]);
  return (segment_velocity(traj, i + 1) - segment_velocity(traj, i)) / mean_dt;
}

double kinematic_residual(const Pose2D& a, const Pose2D& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return (std::cos(a.theta) + std::cos(b.theta)) * dy - (std::sin(a.theta) + std::sin(b.theta)) * dx;
}

// ---------------------------------------------------------------------------
// Objective as weighted squared residuals

std::size_t free_variable_count(const TebTrajectory& traj) {
  const std::size_t n = traj.segments();
  return 3 * (n - 1) + n;
}

std::vector<double> pack_variables(const TebTrajectory& traj) {
  const std::size_t n = traj.segments();
  std::vector<double> v;
  v.reserve(free_variable_count(traj));
  for (std::size_t i = 1; i < n; ++i) {
    v.push_back(traj.poses[i].x);
    v.push_back(traj.poses[i].y);
    v.push_back(traj.poses[i].theta);
  }
  for (double dt : traj.dts) v.push_back(dt);
  return v;
}

void unpack_variables(TebTrajectory& traj, std::span<const double> vars) {
  const std::size_t n = traj.segments();
  if (vars.size() != free_variable_count(traj)) {
    throw std::invalid_argument("unpack_variables: size mismatch");
  }
  for (std::size_t i = 1; i < n; ++i) {
    traj.poses[i] = {vars[3 * (i - 1)], vars[3 * (i - 1) + 1], vars[3 * (i - 1) + 2]};
  }
  for (std::size_t j = 0; j < n; ++j) traj.dts[j] = vars[3 * (n - 1) + j];
}

namespace {

struct Residual {
  double weight{0.0};
  double value{0.0};
  std::array<int, 9> index{};
  std::array<double, 9> grad{};
  int nnz{0};

  void add(int i, double g) {
    if (i < 0) return;
    for (int k = 0; k < nnz; ++k) {
      if (index[k] == i) {
        grad[k] += g;
        return;
      }
    }
    index[nnz] = i;
    grad[nnz] = g;
    ++nnz;
  }
};

class Layout {
 public:
  explicit Layout(std::size_t segments) : n_(segments) {}
  int pose(std::size_t i, int k) const {
    if (i == 0 || i >= n_) return -1;
    return static_cast<int>(3 * (i - 1)) + k;
  }
  int dt(std::size_t j) const { return static_cast<int>(3 * (n_ - 1) + j); }

 private:
  std::size_t n_;
};

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Visits every weighted residual. Value-only callers pass derivs = false.
template <typename Sink>
void for_each_residual(const TebTrajectory& traj, std::span<const Vec2> obstacles, const RoverParams& params,
                       const TebWeights& w, bool derivs, Sink&& sink) {
  const std::size_t n = traj.segments();
  const Layout at(n);
  const auto& P = traj.poses;
  const auto& T = traj.dts;

  std::vector<double> len(n);
  for (std::size_t i = 0; i < n; ++i) {
    len[i] = std::hypot(P[i + 1].x - P[i].x, P[i + 1].y - P[i].y);
  }

  // Partial derivatives of v_i = len_i / T_i.
  auto add_velocity_grad = [&](Residual& r, std::size_t i, double scale) {
    const double dx = P[i + 1].x - P[i].x;
    const double dy = P[i + 1].y - P[i].y;
    if (len[i] > 0.0) {
      const double k = scale / (len[i] * T[i]);
      r.add(at.pose(i + 1, 0), k * dx);
      r.add(at.pose(i + 1, 1), k * dy);
      r.add(at.pose(i, 0), -k * dx);
      r.add(at.pose(i, 1), -k * dy);
    }
    r.add(at.dt(i), -scale * len[i] / (T[i] * T[i]));
  };

  for (std::size_t i = 0; i < n; ++i) {
    {
      Residual r;
      r.weight = w.w_time;
      r.value = T[i];
      if (derivs) r.add(at.dt(i), 1.0);
      sink(r);
    }
    {
      const double excess = len[i] / T[i] - params.v_max;
      if (excess > 0.0) {
        Residual r;
        r.weight = w.w_vel;
        r.value = excess;
        if (derivs) add_velocity_grad(r, i, 1.0);
        sink(r);
      }
    }
    {
      const double dtheta = wrap_angle(P[i + 1].theta - P[i].theta);
      const double excess = std::abs(dtheta) / T[i] - params.omega_max;
      if (excess > 0.0) {
        Residual r;
        r.weight = w.w_vel;
        r.value = excess;
        if (derivs) {
          const double s = sign(dtheta);
          r.add(at.pose(i + 1, 2), s / T[i]);
          r.add(at.pose(i, 2), -s / T[i]);
          r.add(at.dt(i), -std::abs(dtheta) / (T[i] * T[i]));
        }
        sink(r);
      }
    }
    {
      const double dx = P[i + 1].x - P[i].x;
      const double dy = P[i + 1].y - P[i].y;
      const double ci = std::cos(P[i].theta), si = std::sin(P[i].theta);
      const double cj = std::cos(P[i + 1].theta), sj = std::sin(P[i + 1].theta);
      const double C = ci + cj;
      const double S = si + sj;
      Residual r;
      r.weight = w.w_kin;
      r.value = C * dy - S * dx;
      if (derivs) {
        r.add(at.pose(i, 2), -si * dy - ci * dx);
        r.add(at.pose(i + 1, 2), -sj * dy - cj * dx);
        r.add(at.pose(i, 0), S);
        r.add(at.pose(i + 1, 0), -S);
        r.add(at.pose(i, 1), -C);
        r.add(at.pose(i + 1, 1), C);
      }
      sink(r);
    }
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mean_dt = 0.5 * (T[i] + T[i + 1]);
    const double vi = len[i] / T[i];
    const double vj = len[i + 1] / T[i + 1];
    const double a = (vj - vi) / mean_dt;
    const double excess = std::abs(a) - params.a_max;
    if (excess <= 0.0) continue;
    Residual r;
    r.weight = w.w_acc;
    r.value = excess;
    if (derivs) {
      const double s = sign(a);
      add_velocity_grad(r, i + 1, s / mean_dt);
      add_velocity_grad(r, i, -s / mean_dt);
      // mean_dt depends on both intervals
      r.add(at.dt(i), -s * a / mean_dt * 0.5);
      r.add(at.dt(i + 1), -s * a / mean_dt * 0.5);
    }
    sink(r);
  }

  if (!obstacles.empty()) {
    for (std::size_t i = 0; i <= n; ++i) {
      const Vec2 p = P[i].position();
      double best = std::numeric_limits<double>::infinity();
      Vec2 nearest{};
      for (const auto& o : obstacles) {
        const Vec2 d = p - o;
        const double dd = d.dot(d);
        if (dd < best) {
          best = dd;
          nearest = o;
        }
      }
      const double dist = std::sqrt(best);
      const double excess = w.d_min_obs - dist;
      if (excess <= 0.0) continue;
      Residual r;
      r.weight = w.w_obs;
      r.value = excess;
      if (derivs && dist > 0.0) {
        r.add(at.pose(i, 0), -(p.x - nearest.x) / dist);
        r.add(at.pose(i, 1), -(p.y - nearest.y) / dist);
      }
      sink(r);
    }
  }
}

struct Evaluation {
  double value{0.0};
  Eigen::VectorXd gradient;
  Eigen::MatrixXd gauss_newton;
};

Evaluation evaluate(const TebTrajectory& traj, std::span<const Vec2> obstacles, const RoverParams& params,
                    const TebWeights& w, bool with_hessian) {
  const auto nv = static_cast<Eigen::Index>(free_variable_count(traj));
  Evaluation e;
  e.gradient = Eigen::VectorXd::Zero(nv);
  if (with_hessian) e.gauss_newton = Eigen::MatrixXd::Zero(nv, nv);
  for_each_residual(traj, obstacles, params, w, true, [&](const Residual& r) {
    e.value += r.weight * r.value * r.value;
    for (int a = 0; a < r.nnz; ++a) {
      e.gradient[r.index[a]] += 2.0 * r.weight * r.value * r.grad[a];
      if (with_hessian) {
        for (int b = 0; b < r.nnz; ++b) {
          e.gauss_newton(r.index[a], r.index[b]) += 2.0 * r.weight * r.grad[a] * r.grad[b];
        }
      }
    }
  });
  return e;
}

}  // namespace

double objective_value(const TebTrajectory& traj, std::span<const Vec2> obstacles, const RoverParams& params,
                       const TebWeights& w) {
  double f = 0.0;
  for_each_residual(traj, obstacles, params, w, false,
                    [&](const Residual& r) { f += r.weight * r.value * r.value; });
  return f;
}

ObjectiveResult objective(const TebTrajectory& traj, std::span<const Vec2> obstacles, const RoverParams& params,
                          const TebWeights& w) {
  traj.validate();
  const Evaluation e = evaluate(traj, obstacles, params, w, false);
  ObjectiveResult out;
  out.value = e.value;
  out.gradient.assign(e.gradient.data(), e.gradient.data() + e.gradient.size());
  return out;
}

// ---------------------------------------------------------------------------
// Optimization

bool resize_trajectory(TebTrajectory& traj, double min_segment, double max_segment) {
  bool changed = false;
  for (std::size_t i = 0; i < traj.segments();) {
    const auto& a = traj.poses[i];
    const auto& b = traj.poses[i + 1];
    if (distance(a.position(), b.position()) > max_segment) {
      const Pose2D mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y), wrap_angle(a.theta + wrap_angle(b.theta - a.theta) / 2.0)};
      const double half = std::max(0.5 * traj.dts[i], kMinDt);
      traj.poses.insert(traj.poses.begin() + static_cast<std::ptrdiff_t>(i) + 1, mid);
      traj.dts[i] = half;
      traj.dts.insert(traj.dts.begin() + static_cast<std::ptrdiff_t>(i) + 1, half);
      changed = true;
      continue;  // re-check the first half
    }
    ++i;
  }
  // Drop interior poses that close a short segment, unless the merged
  // segment would itself be too long.
  for (std::size_t k = 1; k + 1 < traj.poses.size();) {
    const double before = distance(traj.poses[k - 1].position(), traj.poses[k].position());
    const double merged = distance(traj.poses[k - 1].position(), traj.poses[k + 1].position());
    if (before < min_segment && merged <= max_segment) {
      traj.dts[k - 1] += traj.dts[k];
      traj.poses.erase(traj.poses.begin() + static_cast<std::ptrdiff_t>(k));
      traj.dts.erase(traj.dts.begin() + static_cast<std::ptrdiff_t>(k));
      changed = true;
      continue;
    }
    ++k;
  }
  return changed;
}

namespace {

void project(TebTrajectory& traj) {
  for (auto& dt : traj.dts) dt = std::max(dt, kMinDt);
  for (std::size_t i = 1; i + 1 < traj.poses.size(); ++i) {
    traj.poses[i].theta = wrap_angle(traj.poses[i].theta);
  }
}

void require_finite(double f) {
  if (!std::isfinite(f)) {
    throw TebError("TEB objective is not finite");
  }
}

// One run of damped Gauss-Newton descent at fixed trajectory structure.
void descend(TebTrajectory& traj, std::span<const Vec2> obstacles, const RoverParams& params, const TebWeights& w,
             const OptimizeConfig& cfg, std::vector<double>& history, int& iterations) {
  Evaluation e = evaluate(traj, obstacles, params, w, true);
  require_finite(e.value);
  history.push_back(e.value);
  double damping = 1e-6;
  const auto nv = e.gradient.size();

  for (int it = 0; it < cfg.inner_iterations; ++it) {
    if (e.gradient.lpNorm<Eigen::Infinity>() == 0.0) break;
    Eigen::VectorXd diag = e.gauss_newton.diagonal();
    const double scale = std::max(1.0, diag.maxCoeff());
    Eigen::MatrixXd A = e.gauss_newton;
    for (Eigen::Index k = 0; k < nv; ++k) A(k, k) += damping * diag[k] + 1e-12 * scale;
    Eigen::VectorXd dir = A.ldlt().solve(-e.gradient);
    double slope = e.gradient.dot(dir);
    if (!dir.allFinite() || !(slope < 0.0)) {
      dir = -e.gradient;
      slope = e.gradient.dot(dir);
    }

    const std::vector<double> x0 = pack_variables(traj);
    TebTrajectory trial = traj;
    std::vector<double> x(x0.size());
    bool accepted = false;
    double f_new = e.value;
    double step = 1.0;
    for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = x0[k] + step * dir[static_cast<Eigen::Index>(k)];
      unpack_variables(trial, x);
      project(trial);
      f_new = objective_value(trial, obstacles, params, w);
      require_finite(f_new);
      // Armijo condition on the projected step.
      const std::vector<double> xp = pack_variables(trial);
      double predicted = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) predicted += e.gradient[static_cast<Eigen::Index>(k)] * (xp[k] - x0[k]);
      if (f_new < e.value && f_new <= e.value + 1e-4 * predicted) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      damping *= 10.0;
      if (damping > 1e6) break;
      continue;
    }
    const double improvement = e.value - f_new;
    traj = std::move(trial);
    ++iterations;
    history.push_back(f_new);
    damping = std::max(damping / 3.0, 1e-9);
    if (improvement <= cfg.relative_tolerance * std::max(1.0, f_new)) break;
    e = evaluate(traj, obstacles, params, w, true);
  }
}

}  // namespace

TebTrajectory optimize(const TebTrajectory& input, std::span<const Vec2> obstacles, const RoverParams& params,
                       const TebWeights& w, const OptimizeConfig& cfg, OptimizeReport* report) {
  input.validate();
  const double f_input = objective_value(input, obstacles, params, w);
  require_finite(f_input);

  TebTrajectory traj = input;
  project(traj);
  OptimizeReport local;
  local.initial_value = f_input;
  for (int outer = 0; outer < cfg.outer_iterations; ++outer) {
    if (outer > 0 && !resize_trajectory(traj, cfg.min_segment, cfg.max_segment)) {
      break;
    }
    local.history.emplace_back();
    descend(traj, obstacles, params, w, cfg, local.history.back(), local.iterations);
  }
  // Pose insertion/removal changes the objective's structure; never hand back
  // something worse than the input.
  double f_out = objective_value(traj, obstacles, params, w);
  if (f_out > f_input) {
    traj = input;
    f_out = f_input;
  }
  local.final_value = f_out;
  if (report != nullptr) *report = std::move(local);
  return traj;
}

// ---------------------------------------------------------------------------
// Control extraction and feasibility

Twist first_segment_command(const TebTrajectory& traj) {
  traj.validate();
  const Pose2D& a = traj.poses[0];
  const Pose2D& b = traj.poses[1];
  const Vec2 d = b.position() - a.position();
  const Vec2 heading{std::cos(a.theta), std::sin(a.theta)};
  const double dir = d.dot(heading) < 0.0 ? -1.0 : 1.0;
  return {dir * d.norm() / traj.dts[0], wrap_angle(b.theta - a.theta) / traj.dts[0]};
}

Twist extract_control(const TebTrajectory& traj, const Twist& prev, double control_dt, const RoverParams& params,
                      bool allow_backward) {
  Twist cmd = first_segment_command(traj);
  if (!allow_backward && cmd.v < 0.0) cmd.v = 0.0;
  return limit_twist(prev, cmd, control_dt, params);
}

bool check_feasibility(const TebTrajectory& traj, const Costmap& costmap, const Footprint& footprint) {
  return std::all_of(traj.poses.begin(), traj.poses.end(), [&](const Pose2D& p) {
    return is_pose_admissible(costmap, p, footprint) == Admissibility::Admissible;
  });
}

std::vector<Vec2> collect_obstacles(const Costmap& costmap, std::span<const Pose2D> around, double radius) {
  const auto& g = costmap.geometry();
  if (around.empty()) return {};
  Vec2 lo = around.front().position();
  Vec2 hi = lo;
  for (const auto& p : around) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const CellIndex c0 = g.cell_of(lo - Vec2{radius, radius});
  const CellIndex c1 = g.cell_of(hi + Vec2{radius, radius});
  const double r2 = radius * radius;
  auto lethal = [&](int x, int y) {
    return g.contains(CellIndex{x, y}) && costmap.at({x, y}) == cost::kLethal;
  };
  std::vector<Vec2> out;
  for (int y = std::max(0, c0.y); y <= std::min(g.height - 1, c1.y); ++y) {
    for (int x = std::max(0, c0.x); x <= std::min(g.width - 1, c1.x); ++x) {
      if (!lethal(x, y)) continue;
      // Interior cells are never the nearest obstacle to a pose outside.
      if (lethal(x - 1, y) && lethal(x + 1, y) && lethal(x, y - 1) && lethal(x, y + 1)) continue;
      const Vec2 c = g.center_of({x, y});
      const bool near = std::any_of(around.begin(), around.end(), [&](const Pose2D& p) {
        const Vec2 d = c - p.position();
        return d.dot(d) <= r2;
      });
      if (near) out.push_back(c);
    }
  }
  return out;
}

}  // namespace rover
