#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "circumnav/control.hpp"
#include "circumnav/errors.hpp"
#include "circumnav/formation.hpp"
#include "circumnav/geometry.hpp"

namespace circumnav {

// Target trajectory: fixed point or constant velocity. The body frame's
// rotation is always the identity (the control problem never needs a
// spinning target frame), so only the origin moves.
struct TargetSpec {
    Vec3 position{};
    Vec3 velocity{};
};

/// Body frame of the target at time t.
inline BodyFrame target_state(const TargetSpec& spec, double t) {
    BodyFrame frame;
    frame.origin = spec.position + spec.velocity * t;
    frame.origin_velocity = spec.velocity;
    return frame;
}

// Everything needed to reproduce a run bit for bit.
struct Scenario {
    std::vector<Vec3> initial_positions;
    std::vector<double> z_star_overrides;  // empty, or one per robot
    ControlGains gains;
    Setpoints setpoints;
    Guideline guideline = Guideline::FG1;
    TargetSpec target;
    UtilitySchedule schedule;  // robots default to utility 1 if unset
    double duration = 10.0;    // s
    double dt = 1e-3;          // s
    double noise_std = 0.0;    // std-dev of target position noise, m
    std::uint64_t seed = 0;    // noise generator seed

    std::size_t robot_count() const { return initial_positions.size(); }

    Setpoints setpoints_for(std::size_t robot) const {
        Setpoints s = setpoints;
        if (!z_star_overrides.empty()) s.z_star = z_star_overrides[robot];
        return s;
    }

    /// Throws ScenarioError when an invariant is broken.
    void validate() const {
        if (robot_count() < 2) throw ScenarioError("need at least 2 robots");
        if (!(duration >= 0.0)) throw ScenarioError("duration must be >= 0");
        if (!(dt > 0.0)) throw ScenarioError("dt must be > 0");
        if (duration > 0.0 && dt > duration) throw ScenarioError("dt must be <= duration");
        if (!gains.valid()) throw ScenarioError("gains must be strictly positive");
        if (!setpoints.valid()) throw ScenarioError("rho_star must be > 0");
        if (!(noise_std >= 0.0)) throw ScenarioError("noise_std must be >= 0");
        if (!z_star_overrides.empty() && z_star_overrides.size() != robot_count())
            throw ScenarioError("z_star overrides must cover every robot");
        if (schedule.robots.size() != robot_count())
            throw ScenarioError("utility schedule must cover every robot");
        if (!f_limit_exists_check(schedule))
            throw ScenarioError("utility schedule is malformed (negative or non-finite entries)");
        const BodyFrame frame = target_state(target, 0.0);
        for (std::size_t i = 0; i < robot_count(); ++i) {
            const Vec3 rel = initial_positions[i] - frame.origin;
            if (std::hypot(rel.x, rel.y) <= kAxisEpsilon)
                throw ScenarioError("robot " + std::to_string(i + 1) +
                                    " starts on the target's vertical axis");
        }
    }
};

// Per-robot live state. phi_unwrapped accumulates the true angle increment
// each step, so it never jumps by 2*pi when the robot crosses the body
// frame's positive-x axis.
struct RobotState {
    Vec3 position{};
    double phi_unwrapped = 0.0;
    double utility = 1.0;
};

struct SimState {
    std::vector<RobotState> robots;
    RingTopology ring;
    std::mt19937_64 rng;
};

// One logged sample of one active robot.
struct LogRecord {
    int robot = 0;  // 0-based id
    Vec3 position{};
    double rho = 0.0;
    double phi_unwrapped = 0.0;
    double z_body = 0.0;
    double delta = 0.0;        // gap to the CCW neighbor, rad
    double mu = 0.0;
    double desired_delta = 0.0;  // f_i for the current utilities, rad
    CylindricalRate command{};
};

struct LogStep {
    double t = 0.0;
    std::vector<LogRecord> records;  // active robots, ascending id
};

struct LogEvent {
    double t = 0.0;
    std::string kind;                // "init", "utility_change", "reconfigure"
    std::vector<int> ring_order;     // 0-based ids, CCW
    std::vector<double> utilities;   // all robots
};

struct TrajectoryLog {
    std::vector<LogStep> steps;
    std::vector<LogEvent> events;
};

namespace detail {

/// Wrapped body angles of all robots at the given positions (NaN for
/// inactive robots, which are never looked at).
inline std::vector<double> body_angles(const std::vector<Vec3>& positions,
                                       const std::vector<const BodyFrame*>& frames,
                                       const RingTopology& ring) {
    std::vector<double> angles(positions.size(),
                               std::numeric_limits<double>::quiet_NaN());
    for (int id : ring.order) angles[id] = body_coords(positions[id], *frames[id]).phi;
    return angles;
}

// Control evaluation for every robot at one instant. Each robot measures the
// target through its own (possibly noise-shifted) frame; neighbor angles are
// the values those neighbors measured themselves. Returned velocities are
// zero for inactive robots.
struct ControlEval {
    std::vector<Vec3> velocity;          // world frame, per robot
    std::vector<CylindricalRate> rates;  // per robot, active only meaningful
    std::vector<double> gaps_by_pos;     // per ring position
};

inline ControlEval evaluate_controls(const std::vector<Vec3>& positions,
                                     const std::vector<const BodyFrame*>& frames,
                                     const SimState& state, const Scenario& scenario) {
    const std::size_t n = positions.size();
    const RingTopology& ring = state.ring;
    ControlEval out;
    out.velocity.assign(n, Vec3{});
    out.rates.assign(n, CylindricalRate{});
    out.gaps_by_pos.assign(ring.size(), 0.0);

    const std::vector<double> angles = body_angles(positions, frames, ring);
    for (std::size_t pos = 0; pos < ring.size(); ++pos) {
        const double a = angles[ring.at(pos)];
        const double b = angles[ring.at(ring.next(pos))];
        out.gaps_by_pos[pos] = wrap_two_pi(b - a);
    }

    for (std::size_t pos = 0; pos < ring.size(); ++pos) {
        const int id = ring.at(pos);
        const int id_prev = ring.at(ring.prev(pos));
        const int id_next = ring.at(ring.next(pos));
        const Cylindrical q = body_coords(positions[id], *frames[id]);

        NeighborView view;
        view.phi_minus = q.phi - out.gaps_by_pos[ring.prev(pos)];
        view.phi_plus = q.phi + out.gaps_by_pos[pos];
        view.mu_minus = state.robots[id_prev].utility;
        view.mu_self = state.robots[id].utility;
        view.mu_plus = state.robots[id_next].utility;

        const CylindricalRate v =
            control_law(q, view, scenario.gains, scenario.setpoints_for(id), scenario.guideline);
        out.rates[id] = v;
        out.velocity[id] = lift_control(v, positions[id], *frames[id]);
    }
    return out;
}

}  // namespace detail

/// Update utilities from the schedule at time t. When any robot's activity
/// flips (zero to positive or back), the ring is rebuilt from the current
/// body angles, so a rejoining robot re-enters at wherever it stands.
/// Returns true when the utilities changed at all.
inline bool apply_schedule(SimState& state, const Scenario& scenario, double t,
                           bool* reconfigured = nullptr) {
    bool changed = false;
    bool activity_changed = false;
    for (std::size_t i = 0; i < state.robots.size(); ++i) {
        const double next = scenario.schedule.value_at(i, t);
        const double current = state.robots[i].utility;
        if (next != current) {
            changed = true;
            if ((next > 0.0) != (current > 0.0)) activity_changed = true;
            state.robots[i].utility = next;
        }
    }
    if (activity_changed) {
        const BodyFrame frame = target_state(scenario.target, t);
        std::vector<double> angles(state.robots.size(), 0.0);
        std::vector<double> utilities(state.robots.size(), 0.0);
        for (std::size_t i = 0; i < state.robots.size(); ++i) {
            utilities[i] = state.robots[i].utility;
            if (utilities[i] > 0.0) angles[i] = body_coords(state.robots[i].position, frame).phi;
        }
        state.ring = build_ring(angles, utilities);
        angular_gaps(state.ring, angles);  // reject coincident rejoin angles
    }
    if (reconfigured) *reconfigured = activity_changed;
    return changed;
}

/// Advance the closed-loop system by one RK4 step of length dt. Active
/// robots integrate dp = u(p, neighbors, t); inactive robots hold position.
/// Per-robot measurement noise is sampled once per step and held through the
/// four stage evaluations.
inline void step(SimState& state, const Scenario& scenario, double t, double dt) {
    const std::size_t n = state.robots.size();

    std::vector<BodyFrame> frames_begin(n), frames_mid(n), frames_end(n);
    std::vector<const BodyFrame*> fb(n), fm(n), fe(n);
    const BodyFrame true_begin = target_state(scenario.target, t);
    const BodyFrame true_mid = target_state(scenario.target, t + 0.5 * dt);
    const BodyFrame true_end = target_state(scenario.target, t + dt);
    for (std::size_t i = 0; i < n; ++i) {
        frames_begin[i] = true_begin;
        frames_mid[i] = true_mid;
        frames_end[i] = true_end;
    }
    if (scenario.noise_std > 0.0) {
        std::normal_distribution<double> gauss(0.0, scenario.noise_std);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 offset{gauss(state.rng), gauss(state.rng), gauss(state.rng)};
            frames_begin[i].origin += offset;
            frames_mid[i].origin += offset;
            frames_end[i].origin += offset;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        fb[i] = &frames_begin[i];
        fm[i] = &frames_mid[i];
        fe[i] = &frames_end[i];
    }

    std::vector<Vec3> y0(n);
    for (std::size_t i = 0; i < n; ++i) y0[i] = state.robots[i].position;

    auto shifted = [&](const std::vector<Vec3>& k, double h) {
        std::vector<Vec3> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = y0[i] + k[i] * h;
        return y;
    };

    const std::vector<Vec3> k1 = detail::evaluate_controls(y0, fb, state, scenario).velocity;
    const std::vector<Vec3> k2 =
        detail::evaluate_controls(shifted(k1, 0.5 * dt), fm, state, scenario).velocity;
    const std::vector<Vec3> k3 =
        detail::evaluate_controls(shifted(k2, 0.5 * dt), fm, state, scenario).velocity;
    const std::vector<Vec3> k4 =
        detail::evaluate_controls(shifted(k3, dt), fe, state, scenario).velocity;

    for (int id : state.ring.order) {
        RobotState& robot = state.robots[id];
        const double phi_before = body_coords(robot.position, true_begin).phi;
        robot.position += (k1[id] + 2.0 * k2[id] + 2.0 * k3[id] + k4[id]) * (dt / 6.0);
        const double phi_after = body_coords(robot.position, true_end).phi;
        robot.phi_unwrapped += wrap_pi(phi_after - phi_before);

        const Vec3& p = robot.position;
        if (std::abs(p.x) > 1e9 || std::abs(p.y) > 1e9 || std::abs(p.z) > 1e9 ||
            std::abs(robot.phi_unwrapped) > 1e9)
            throw NumericalBlowup("robot " + std::to_string(id + 1) + " state exceeded 1e9");
    }
}

/// Run a scenario start to finish. Deterministic: the same scenario and seed
/// produce a bit-identical log. Step, schedule, or geometry failures are
/// rethrown as SimulationError carrying the failing timestamp.
inline TrajectoryLog run(const Scenario& scenario) {
    scenario.validate();

    SimState state;
    state.rng.seed(scenario.seed);
    state.robots.resize(scenario.robot_count());

    TrajectoryLog log;
    const BodyFrame frame0 = target_state(scenario.target, 0.0);
    {
        std::vector<double> angles(scenario.robot_count(), 0.0);
        std::vector<double> utilities = scenario.schedule.values_at(0.0);
        for (std::size_t i = 0; i < scenario.robot_count(); ++i) {
            state.robots[i].position = scenario.initial_positions[i];
            state.robots[i].utility = utilities[i];
            state.robots[i].phi_unwrapped = body_coords(scenario.initial_positions[i], frame0).phi;
            angles[i] = state.robots[i].phi_unwrapped;
        }
        state.ring = build_ring(angles, utilities);
        angular_gaps(state.ring, angles);  // reject coincident initial angles
        log.events.push_back({0.0, "init", state.ring.order, utilities});
    }

    const std::size_t total_steps =
        scenario.duration == 0.0
            ? 0
            : static_cast<std::size_t>(std::ceil(scenario.duration / scenario.dt - 1e-9));

    auto log_state = [&](double t) {
        const BodyFrame frame = target_state(scenario.target, t);
        std::vector<const BodyFrame*> frames(scenario.robot_count(), &frame);
        std::vector<Vec3> positions(scenario.robot_count());
        for (std::size_t i = 0; i < positions.size(); ++i)
            positions[i] = state.robots[i].position;

        // Commands in the log come from noise-free measurement; the noisy
        // command only exists inside the integrator stages.
        const detail::ControlEval eval =
            detail::evaluate_controls(positions, frames, state, scenario);

        std::vector<double> ring_mu(state.ring.size());
        for (std::size_t pos = 0; pos < state.ring.size(); ++pos)
            ring_mu[pos] = state.robots[state.ring.at(pos)].utility;
        const std::vector<double> desired = desired_spacing(scenario.guideline, ring_mu);

        LogStep step_record;
        step_record.t = t;
        for (std::size_t pos = 0; pos < state.ring.size(); ++pos) {
            const int id = state.ring.at(pos);
            const RobotState& robot = state.robots[id];
            const Cylindrical q = body_coords(robot.position, frame);
            LogRecord rec;
            rec.robot = id;
            rec.position = robot.position;
            rec.rho = q.rho;
            rec.phi_unwrapped = robot.phi_unwrapped;
            rec.z_body = q.z;
            rec.delta = eval.gaps_by_pos[pos];
            rec.mu = robot.utility;
            rec.desired_delta = desired[pos];
            rec.command = eval.rates[id];
            step_record.records.push_back(rec);
        }
        std::sort(step_record.records.begin(), step_record.records.end(),
                  [](const LogRecord& a, const LogRecord& b) { return a.robot < b.robot; });
        log.steps.push_back(std::move(step_record));
    };

    try {
        for (std::size_t k = 0; k <= total_steps; ++k) {
            const double t = static_cast<double>(k) * scenario.dt;
            if (k > 0) {
                bool reconfigured = false;
                if (apply_schedule(state, scenario, t, &reconfigured)) {
                    log.events.push_back({t, reconfigured ? "reconfigure" : "utility_change",
                                          state.ring.order,
                                          scenario.schedule.values_at(t)});
                }
            }
            log_state(t);
            if (k < total_steps) step(state, scenario, t, scenario.dt);
        }
    } catch (const SimulationError&) {
        throw;
    } catch (const std::exception& e) {
        throw SimulationError(log.steps.empty() ? 0.0 : log.steps.back().t, e.what());
    }
    return log;
}

}  // namespace circumnav
