#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "circumnav/errors.hpp"
#include "circumnav/geometry.hpp"

namespace circumnav {

// Which rule maps utilities to spacing. FG1 equalizes the capture chance at
// the best fleeing points; FG2 makes spacing proportional to utility.
enum class Guideline { FG1, FG2 };

inline std::string to_string(Guideline g) { return g == Guideline::FG1 ? "fg1" : "fg2"; }

// Counter-clockwise ordering of the active (utility > 0) robots. Neighbor
// lookup is cyclic: the successor of the last entry is the first.
struct RingTopology {
    std::vector<int> order;  // robot ids, CCW by body-frame angle

    std::size_t size() const { return order.size(); }

    int at(std::size_t pos) const { return order[pos]; }
    std::size_t next(std::size_t pos) const { return pos + 1 == order.size() ? 0 : pos + 1; }
    std::size_t prev(std::size_t pos) const { return pos == 0 ? order.size() - 1 : pos - 1; }

    bool contains(int id) const {
        return std::find(order.begin(), order.end(), id) != order.end();
    }
};

/// Sort robots with positive utility counter-clockwise by their body-frame
/// angle (reduced to [0, 2*pi)); ties break by robot id. Inactive robots are
/// left out entirely.
inline RingTopology build_ring(const std::vector<double>& angles,
                               const std::vector<double>& utilities) {
    RingTopology ring;
    for (std::size_t i = 0; i < utilities.size(); ++i)
        if (utilities[i] > 0.0) ring.order.push_back(static_cast<int>(i));
    if (ring.order.size() < 2)
        throw TooFewActive("need at least 2 robots with positive utility, have " +
                           std::to_string(ring.order.size()));
    std::sort(ring.order.begin(), ring.order.end(), [&](int a, int b) {
        const double wa = wrap_two_pi(angles[a]);
        const double wb = wrap_two_pi(angles[b]);
        if (wa != wb) return wa < wb;
        return a < b;
    });
    return ring;
}

/// Angular gaps Delta_i from each active robot to its CCW neighbor, in ring
/// order. The gaps are positive and sum to 2*pi by construction.
inline std::vector<double> angular_gaps(const RingTopology& ring,
                                        const std::vector<double>& angles) {
    const std::size_t n = ring.size();
    std::vector<double> gaps(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = wrap_two_pi(angles[ring.at(i)]);
        const double b = wrap_two_pi(angles[ring.at(ring.next(i))]);
        double gap = i + 1 == n ? b - a + kTwoPi : b - a;
        if (gap <= 1e-12)
            throw DegenerateGap("robots " + std::to_string(ring.at(i)) + " and " +
                                std::to_string(ring.at(ring.next(i))) +
                                " share an angular position");
        gaps[i] = gap;
    }
    return gaps;
}

/// FG1 f-function: f_i = (mu_i + mu_{i+}) / sum(mu) * pi. Utilities are given
/// in ring order; the result sums to 2*pi.
inline std::vector<double> desired_spacing_fg1(const std::vector<double>& mu) {
    const std::size_t n = mu.size();
    const double total = std::accumulate(mu.begin(), mu.end(), 0.0);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = (mu[i] + mu[(i + 1) % n]) / total * kPi;
    return f;
}

/// FG2 f-function: f_i = 2 mu_i / sum(mu) * pi.
inline std::vector<double> desired_spacing_fg2(const std::vector<double>& mu) {
    const double total = std::accumulate(mu.begin(), mu.end(), 0.0);
    std::vector<double> f(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) f[i] = 2.0 * mu[i] / total * kPi;
    return f;
}

inline std::vector<double> desired_spacing(Guideline g, const std::vector<double>& mu) {
    return g == Guideline::FG1 ? desired_spacing_fg1(mu) : desired_spacing_fg2(mu);
}

/// Best fleeing point in each gap: the spot where both adjacent robots need
/// the same travel time along the circle at speeds proportional to their
/// utilities. The point in gap i sits at mu_i/(mu_i + mu_{i+}) of the gap,
/// counter-clockwise from robot i. Returns one absolute angle per gap,
/// in [0, 2*pi), in ring order.
inline std::vector<double> best_fleeing_points(const RingTopology& ring,
                                               const std::vector<double>& utilities,
                                               const std::vector<double>& angles) {
    const std::vector<double> gaps = angular_gaps(ring, angles);
    const std::size_t n = ring.size();
    std::vector<double> points(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu_self = utilities[ring.at(i)];
        const double mu_next = utilities[ring.at(ring.next(i))];
        const double offset = gaps[i] * mu_self / (mu_self + mu_next);
        points[i] = wrap_two_pi(wrap_two_pi(angles[ring.at(i)]) + offset);
    }
    return points;
}

// Piecewise-constant utility schedule. Each robot starts at `initial` and
// switches to `value` at each `Switch::time`; between switch times the
// utility is constant, which is what makes lim f_i well defined.
struct UtilitySchedule {
    struct Switch {
        double time = 0.0;
        double value = 0.0;
    };
    struct Robot {
        double initial = 1.0;
        std::vector<Switch> switches;  // sorted by time, times > 0
    };

    std::vector<Robot> robots;

    double value_at(std::size_t robot, double t) const {
        double v = robots[robot].initial;
        for (const Switch& s : robots[robot].switches) {
            if (s.time <= t)
                v = s.value;
            else
                break;
        }
        return v;
    }

    std::vector<double> values_at(double t) const {
        std::vector<double> v(robots.size());
        for (std::size_t i = 0; i < robots.size(); ++i) v[i] = value_at(i, t);
        return v;
    }

    /// All switch times across robots, sorted, deduplicated.
    std::vector<double> switch_times() const {
        std::vector<double> times;
        for (const Robot& r : robots)
            for (const Switch& s : r.switches) times.push_back(s.time);
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        return times;
    }
};

/// Validation hook for the f-limit precondition: a piecewise-constant
/// schedule with finitely many finite switch times always has a final
/// segment, so the limit of f exists. Only malformed schedules (non-finite
/// or negative switch times, negative utilities) fail.
inline bool f_limit_exists_check(const UtilitySchedule& schedule) {
    for (const UtilitySchedule::Robot& r : schedule.robots) {
        if (!(r.initial >= 0.0)) return false;
        double prev = 0.0;
        for (const UtilitySchedule::Switch& s : r.switches) {
            if (!std::isfinite(s.time) || s.time < prev) return false;
            if (!(s.value >= 0.0) || !std::isfinite(s.value)) return false;
            prev = s.time;
        }
    }
    return true;
}

}  // namespace circumnav
