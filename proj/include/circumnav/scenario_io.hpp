#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "circumnav/errors.hpp"
#include "circumnav/simulation.hpp"

namespace circumnav {

// A spacing check declared inside a scenario file: at the last logged step
// with t <= time, every active robot's gap must be within tol_deg of the
// listed value (degrees, active robots in ascending id order).
struct Expectation {
    double time = 0.0;
    double tol_deg = 1.0;
    std::vector<double> spacing_deg;
};

struct ScenarioFile {
    Scenario scenario;
    std::vector<Expectation> expectations;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view tok, double& out) {
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc{} && res.ptr == tok.data() + tok.size();
}

inline std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) toks.emplace_back(line.substr(start, i - start));
    }
    return toks;
}

}  // namespace detail

/// Parse a scenario document. Line-oriented: `key value...` tokens, `#`
/// comments. Unknown keys, bad arity, and broken invariants are rejected
/// with the offending key and line number.
inline ScenarioFile parse_scenario(std::istream& in, const std::string& origin = "scenario") {
    ScenarioFile file;
    Scenario& sc = file.scenario;
    sc.schedule.robots.clear();

    struct PendingSwitch {
        std::size_t robot;
        double time, value;
        std::size_t line;
    };
    std::vector<PendingSwitch> switches;
    std::vector<std::optional<double>> z_overrides;  // parallel to robot lines
    bool saw_version = false, saw_target = false;

    auto fail = [&](std::size_t line_num, const std::string& key, const std::string& what) {
        throw ScenarioError(origin + ":" + std::to_string(line_num) + ": key '" + key + "': " +
                            what);
    };

    std::string line;
    std::size_t line_num = 0;
    std::vector<bool> seen_scalar(16, false);
    auto mark_once = [&](std::size_t slot, std::size_t ln, const std::string& key) {
        if (seen_scalar[slot]) fail(ln, key, "duplicate key");
        seen_scalar[slot] = true;
    };

    while (std::getline(in, line)) {
        ++line_num;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto toks = detail::split_tokens(line);
        if (toks.empty()) continue;
        const std::string key(toks.front());

        auto want_values = [&](std::size_t count) {
            if (toks.size() != count + 1)
                fail(line_num, key,
                     "expected " + std::to_string(count) + " value(s), got " +
                         std::to_string(toks.size() - 1));
        };
        auto num = [&](std::size_t idx) {
            double v = 0.0;
            if (!detail::parse_double(toks[idx], v))
                fail(line_num, key, "'" + std::string(toks[idx]) + "' is not a number");
            return v;
        };

        if (key == "version") {
            want_values(1);
            mark_once(0, line_num, key);
            if (num(1) != 1.0) fail(line_num, key, "unsupported schema version");
            saw_version = true;
        } else if (key == "guideline") {
            want_values(1);
            mark_once(1, line_num, key);
            if (toks[1] == "fg1")
                sc.guideline = Guideline::FG1;
            else if (toks[1] == "fg2")
                sc.guideline = Guideline::FG2;
            else
                fail(line_num, key, "must be fg1 or fg2");
        } else if (key == "rho_star") {
            want_values(1);
            mark_once(2, line_num, key);
            sc.setpoints.rho_star = num(1);
        } else if (key == "omega_star") {
            want_values(1);
            mark_once(3, line_num, key);
            sc.setpoints.omega_star = num(1);
        } else if (key == "z_star") {
            want_values(1);
            mark_once(4, line_num, key);
            sc.setpoints.z_star = num(1);
        } else if (key == "k_rho") {
            want_values(1);
            mark_once(5, line_num, key);
            sc.gains.k_rho = num(1);
        } else if (key == "k_phi") {
            want_values(1);
            mark_once(6, line_num, key);
            sc.gains.k_phi = num(1);
        } else if (key == "k_z") {
            want_values(1);
            mark_once(7, line_num, key);
            sc.gains.k_z = num(1);
        } else if (key == "duration") {
            want_values(1);
            mark_once(8, line_num, key);
            sc.duration = num(1);
        } else if (key == "dt") {
            want_values(1);
            mark_once(9, line_num, key);
            sc.dt = num(1);
        } else if (key == "seed") {
            want_values(1);
            mark_once(10, line_num, key);
            sc.seed = static_cast<std::uint64_t>(num(1));
        } else if (key == "noise_std") {
            want_values(1);
            mark_once(11, line_num, key);
            sc.noise_std = num(1);
        } else if (key == "target") {
            mark_once(12, line_num, key);
            saw_target = true;
            if (toks.size() >= 2 && toks[1] == "stationary") {
                want_values(4);
                sc.target.position = {num(2), num(3), num(4)};
                sc.target.velocity = {};
            } else if (toks.size() >= 2 && toks[1] == "linear") {
                want_values(7);
                sc.target.position = {num(2), num(3), num(4)};
                sc.target.velocity = {num(5), num(6), num(7)};
            } else {
                fail(line_num, key, "must be 'stationary x y z' or 'linear x y z vx vy vz'");
            }
        } else if (key == "robot") {
            if (toks.size() != 4 && toks.size() != 5)
                fail(line_num, key, "expected 'robot x y z [z_star]'");
            sc.initial_positions.push_back({num(1), num(2), num(3)});
            z_overrides.push_back(toks.size() == 5 ? std::optional<double>(num(4))
                                                   : std::nullopt);
        } else if (key == "utility") {
            want_values(3);
            const double robot_num = num(1);
            if (robot_num < 1.0 || robot_num != static_cast<std::size_t>(robot_num))
                fail(line_num, key, "robot index must be a positive integer");
            switches.push_back(
                {static_cast<std::size_t>(robot_num) - 1, num(2), num(3), line_num});
        } else if (key == "expect") {
            if (toks.size() < 4) fail(line_num, key, "expected 'expect time tol_deg v...'");
            Expectation e;
            e.time = num(1);
            e.tol_deg = num(2);
            for (std::size_t i = 3; i < toks.size(); ++i) e.spacing_deg.push_back(num(i));
            file.expectations.push_back(std::move(e));
        } else {
            fail(line_num, key, "unknown key");
        }
    }

    if (!saw_version) throw ScenarioError(origin + ": missing 'version' key");
    if (!saw_target) throw ScenarioError(origin + ": missing 'target' key");
    if (sc.initial_positions.size() < 2)
        throw ScenarioError(origin + ": need at least 2 'robot' lines");

    sc.schedule.robots.resize(sc.initial_positions.size());
    if (std::any_of(z_overrides.begin(), z_overrides.end(),
                    [](const auto& o) { return o.has_value(); })) {
        sc.z_star_overrides.resize(sc.initial_positions.size());
        for (std::size_t i = 0; i < z_overrides.size(); ++i)
            sc.z_star_overrides[i] = z_overrides[i].value_or(sc.setpoints.z_star);
    }
    for (const PendingSwitch& s : switches) {
        if (s.robot >= sc.initial_positions.size())
            throw ScenarioError(origin + ":" + std::to_string(s.line) +
                                ": key 'utility': robot index out of range");
        if (s.time < 0.0)
            throw ScenarioError(origin + ":" + std::to_string(s.line) +
                                ": key 'utility': switch time must be >= 0");
        if (s.time == 0.0)
            sc.schedule.robots[s.robot].initial = s.value;
        else
            sc.schedule.robots[s.robot].switches.push_back({s.time, s.value});
    }
    for (auto& robot : sc.schedule.robots)
        std::sort(robot.switches.begin(), robot.switches.end(),
                  [](const auto& a, const auto& b) { return a.time < b.time; });

    try {
        sc.validate();
    } catch (const ScenarioError& e) {
        throw ScenarioError(origin + ": " + e.what());
    }
    return file;
}

inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    return parse_scenario(in, path);
}

/// Canonical serialization; load(serialize(x)) == x field for field.
inline std::string serialize_scenario(const ScenarioFile& file) {
    const Scenario& sc = file.scenario;
    std::ostringstream os;
    auto d = detail::format_double;
    os << "version 1\n";
    os << "guideline " << to_string(sc.guideline) << "\n";
    os << "rho_star " << d(sc.setpoints.rho_star) << "\n";
    os << "omega_star " << d(sc.setpoints.omega_star) << "\n";
    os << "z_star " << d(sc.setpoints.z_star) << "\n";
    os << "k_rho " << d(sc.gains.k_rho) << "\n";
    os << "k_phi " << d(sc.gains.k_phi) << "\n";
    os << "k_z " << d(sc.gains.k_z) << "\n";
    os << "duration " << d(sc.duration) << "\n";
    os << "dt " << d(sc.dt) << "\n";
    os << "seed " << sc.seed << "\n";
    os << "noise_std " << d(sc.noise_std) << "\n";
    if (sc.target.velocity == Vec3{})
        os << "target stationary " << d(sc.target.position.x) << " " << d(sc.target.position.y)
           << " " << d(sc.target.position.z) << "\n";
    else
        os << "target linear " << d(sc.target.position.x) << " " << d(sc.target.position.y)
           << " " << d(sc.target.position.z) << " " << d(sc.target.velocity.x) << " "
           << d(sc.target.velocity.y) << " " << d(sc.target.velocity.z) << "\n";
    for (std::size_t i = 0; i < sc.initial_positions.size(); ++i) {
        const Vec3& p = sc.initial_positions[i];
        os << "robot " << d(p.x) << " " << d(p.y) << " " << d(p.z);
        if (!sc.z_star_overrides.empty()) os << " " << d(sc.z_star_overrides[i]);
        os << "\n";
    }
    for (std::size_t i = 0; i < sc.schedule.robots.size(); ++i) {
        const auto& robot = sc.schedule.robots[i];
        os << "utility " << i + 1 << " 0 " << d(robot.initial) << "\n";
        for (const auto& sw : robot.switches)
            os << "utility " << i + 1 << " " << d(sw.time) << " " << d(sw.value) << "\n";
    }
    for (const Expectation& e : file.expectations) {
        os << "expect " << d(e.time) << " " << d(e.tol_deg);
        for (double v : e.spacing_deg) os << " " << d(v);
        os << "\n";
    }
    return os.str();
}

}  // namespace circumnav
