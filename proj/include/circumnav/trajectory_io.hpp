#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "circumnav/analysis.hpp"
#include "circumnav/errors.hpp"
#include "circumnav/scenario_io.hpp"
#include "circumnav/simulation.hpp"

namespace circumnav {

inline constexpr double kRadToDeg = 180.0 / kPi;

inline constexpr const char* kTrajectoryHeader =
    "t,robot_id,x,y,z,rho,phi,z_body,delta_deg,mu,desired_delta_deg,v_rho,v_phi,v_z";

// One trajectory.csv row. Angles in the *_deg columns are degrees (matching
// the published tables); phi stays in radians, unwrapped.
struct CsvRow {
    double t = 0.0;
    int robot_id = 0;  // 1-based in the file
    double x = 0.0, y = 0.0, z = 0.0;
    double rho = 0.0, phi = 0.0, z_body = 0.0;
    double delta_deg = 0.0, mu = 0.0, desired_delta_deg = 0.0;
    double v_rho = 0.0, v_phi = 0.0, v_z = 0.0;
};

inline std::vector<CsvRow> to_rows(const TrajectoryLog& log) {
    std::vector<CsvRow> rows;
    for (const LogStep& step : log.steps)
        for (const LogRecord& rec : step.records) {
            CsvRow r;
            r.t = step.t;
            r.robot_id = rec.robot + 1;
            r.x = rec.position.x;
            r.y = rec.position.y;
            r.z = rec.position.z;
            r.rho = rec.rho;
            r.phi = rec.phi_unwrapped;
            r.z_body = rec.z_body;
            r.delta_deg = rec.delta * kRadToDeg;
            r.mu = rec.mu;
            r.desired_delta_deg = rec.desired_delta * kRadToDeg;
            r.v_rho = rec.command.rho_dot;
            r.v_phi = rec.command.phi_dot;
            r.v_z = rec.command.z_dot;
            rows.push_back(r);
        }
    return rows;
}

namespace detail {

// Shortest round-tripping decimal form, locale independent.
inline void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace detail

inline void write_trajectory_csv(const std::vector<CsvRow>& rows, std::ostream& os) {
    std::string buf;
    buf.reserve(1 << 20);
    buf += kTrajectoryHeader;
    buf += '\n';
    for (const CsvRow& r : rows) {
        detail::append_double(buf, r.t);
        buf += ',';
        buf += std::to_string(r.robot_id);
        for (double v : {r.x, r.y, r.z, r.rho, r.phi, r.z_body, r.delta_deg, r.mu,
                         r.desired_delta_deg, r.v_rho, r.v_phi, r.v_z}) {
            buf += ',';
            detail::append_double(buf, v);
        }
        buf += '\n';
        if (buf.size() > (1 << 20) - 512) {
            os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

/// Parse trajectory.csv. Malformed content raises CsvError with the 1-based
/// row number (header is row 1).
inline std::vector<CsvRow> read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw CsvError(1, "empty file");
    if (line == std::string(kTrajectoryHeader) + "\r") line.pop_back();
    if (line != kTrajectoryHeader) throw CsvError(1, "unexpected header");

    std::vector<CsvRow> rows;
    std::size_t row_num = 1;
    while (std::getline(is, line)) {
        ++row_num;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double fields[14];
        std::size_t field = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (true) {
            if (field >= 14) throw CsvError(row_num, "too many columns");
            auto res = std::from_chars(p, end, fields[field]);
            if (res.ec != std::errc{}) throw CsvError(row_num, "bad number in column " +
                                                                   std::to_string(field + 1));
            ++field;
            p = res.ptr;
            if (p == end) break;
            if (*p != ',') throw CsvError(row_num, "expected ',' in column " +
                                                       std::to_string(field));
            ++p;
        }
        if (field != 14) throw CsvError(row_num, "expected 14 columns, got " +
                                                     std::to_string(field));
        CsvRow r;
        r.t = fields[0];
        if (fields[1] < 1.0 || fields[1] != std::floor(fields[1]))
            throw CsvError(row_num, "robot_id must be a positive integer");
        r.robot_id = static_cast<int>(fields[1]);
        r.x = fields[2];
        r.y = fields[3];
        r.z = fields[4];
        r.rho = fields[5];
        r.phi = fields[6];
        r.z_body = fields[7];
        r.delta_deg = fields[8];
        r.mu = fields[9];
        r.desired_delta_deg = fields[10];
        r.v_rho = fields[11];
        r.v_phi = fields[12];
        r.v_z = fields[13];
        if (!rows.empty() && r.t < rows.back().t)
            throw CsvError(row_num, "time stamps must not decrease");
        rows.push_back(r);
    }
    if (rows.empty()) throw CsvError(1, "no data rows");
    return rows;
}

inline void write_events_csv(const TrajectoryLog& log, std::ostream& os) {
    os << "t,event,ring,utilities\n";
    for (const LogEvent& e : log.events) {
        std::string buf;
        detail::append_double(buf, e.t);
        buf += ',';
        buf += e.kind;
        buf += ',';
        for (std::size_t i = 0; i < e.ring_order.size(); ++i) {
            if (i) buf += ';';
            buf += std::to_string(e.ring_order[i] + 1);
        }
        buf += ',';
        for (std::size_t i = 0; i < e.utilities.size(); ++i) {
            if (i) buf += ';';
            detail::append_double(buf, e.utilities[i]);
        }
        buf += '\n';
        os << buf;
    }
}

// Post-run summary: stage-by-stage converged spacing, decay-rate fits, the
// running minimum gap, and the verdict on any declared expectations. All of
// it is computable from the trajectory rows alone; the commanded rates stand
// in for the raw errors in the fits (they are proportional).
struct RunReport {
    struct Stage {
        double t_begin = 0.0, t_end = 0.0;
        std::vector<int> active_ids;              // 1-based, ascending
        std::vector<double> mu;                   // per active id
        std::vector<double> final_spacing_deg;    // per active id
        std::vector<double> desired_spacing_deg;  // per active id
        std::optional<double> rho_rate, z_rate, spacing_rate;
    };
    struct ExpectationResult {
        double t = 0.0;
        double tol_deg = 0.0;
        double max_dev_deg = 0.0;
        bool pass = false;
    };

    std::vector<Stage> stages;
    double min_delta_deg = 0.0;
    bool order_violation = false;
    std::vector<ExpectationResult> expectations;

    bool pass() const {
        if (order_violation) return false;
        for (const ExpectationResult& e : expectations)
            if (!e.pass) return false;
        return true;
    }
};

inline RunReport build_run_report(const std::vector<CsvRow>& rows,
                                  const std::vector<Expectation>& expectations = {}) {
    RunReport report;

    // group rows into time steps
    std::vector<std::pair<double, std::vector<const CsvRow*>>> steps;
    for (const CsvRow& r : rows) {
        if (steps.empty() || steps.back().first != r.t) steps.push_back({r.t, {}});
        steps.back().second.push_back(&r);
    }

    // stage boundaries: the (robot -> mu) assignment changed
    auto mu_map = [](const std::vector<const CsvRow*>& recs) {
        std::map<int, double> m;
        for (const CsvRow* r : recs) m[r->robot_id] = r->mu;
        return m;
    };
    std::vector<std::size_t> stage_start;  // index into steps
    for (std::size_t k = 0; k < steps.size(); ++k)
        if (k == 0 || mu_map(steps[k].second) != mu_map(steps[k - 1].second))
            stage_start.push_back(k);

    report.min_delta_deg = std::numeric_limits<double>::infinity();
    for (const CsvRow& r : rows) report.min_delta_deg = std::min(report.min_delta_deg, r.delta_deg);
    report.order_violation = !(report.min_delta_deg > 0.0);

    for (std::size_t s = 0; s < stage_start.size(); ++s) {
        const std::size_t begin = stage_start[s];
        const std::size_t end = s + 1 < stage_start.size() ? stage_start[s + 1] : steps.size();
        RunReport::Stage stage;
        stage.t_begin = steps[begin].first;
        stage.t_end = steps[end - 1].first;
        for (const CsvRow* r : steps[end - 1].second) {
            stage.active_ids.push_back(r->robot_id);
            stage.mu.push_back(r->mu);
            stage.final_spacing_deg.push_back(r->delta_deg);
            stage.desired_spacing_deg.push_back(r->desired_delta_deg);
        }

        std::vector<double> time, rho_mag, z_mag, spacing_mag;
        for (std::size_t k = begin; k < end; ++k) {
            double worst_rho = 0.0, worst_z = 0.0, worst_spacing = 0.0;
            for (const CsvRow* r : steps[k].second) {
                worst_rho = std::max(worst_rho, std::abs(r->v_rho));
                worst_z = std::max(worst_z, std::abs(r->v_z));
                worst_spacing =
                    std::max(worst_spacing, std::abs(r->delta_deg - r->desired_delta_deg));
            }
            time.push_back(steps[k].first);
            rho_mag.push_back(worst_rho);
            z_mag.push_back(worst_z);
            spacing_mag.push_back(worst_spacing);
        }
        auto fit = [&](const std::vector<double>& mag) -> std::optional<double> {
            try {
                return fit_decay_rate(time, mag, stage.t_begin, stage.t_end);
            } catch (const InsufficientData&) {
                return std::nullopt;
            }
        };
        stage.rho_rate = fit(rho_mag);
        stage.z_rate = fit(z_mag);
        stage.spacing_rate = fit(spacing_mag);
        report.stages.push_back(std::move(stage));
    }

    for (const Expectation& e : expectations) {
        RunReport::ExpectationResult result;
        result.t = e.time;
        result.tol_deg = e.tol_deg;
        // last step at or before the requested time
        std::size_t chosen = steps.size();
        for (std::size_t k = 0; k < steps.size(); ++k)
            if (steps[k].first <= e.time) chosen = k;
        if (chosen == steps.size() || steps[chosen].second.size() != e.spacing_deg.size()) {
            result.pass = false;
            result.max_dev_deg = std::numeric_limits<double>::infinity();
        } else {
            for (std::size_t i = 0; i < e.spacing_deg.size(); ++i)
                result.max_dev_deg =
                    std::max(result.max_dev_deg,
                             std::abs(steps[chosen].second[i]->delta_deg - e.spacing_deg[i]));
            result.pass = result.max_dev_deg <= e.tol_deg;
        }
        report.expectations.push_back(result);
    }
    return report;
}

inline std::string format_run_report(const RunReport& report) {
    std::ostringstream os;
    char buf[128];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    auto fmt_rate = [&](const std::optional<double>& v) {
        return v ? fmt(*v) : std::string("n/a");
    };
    auto fmt_list = [&](const std::vector<double>& vs) {
        std::string s = "[";
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i) s += " ";
            s += fmt(vs[i]);
        }
        return s + "]";
    };

    os << "stages: " << report.stages.size() << "\n";
    for (std::size_t s = 0; s < report.stages.size(); ++s) {
        const RunReport::Stage& st = report.stages[s];
        os << "stage " << s + 1 << ": t=[" << fmt(st.t_begin) << ", " << fmt(st.t_end) << "]";
        os << " active=[";
        for (std::size_t i = 0; i < st.active_ids.size(); ++i) {
            if (i) os << " ";
            os << st.active_ids[i];
        }
        os << "] mu=" << fmt_list(st.mu) << "\n";
        os << "  final_spacing_deg=" << fmt_list(st.final_spacing_deg)
           << " desired_deg=" << fmt_list(st.desired_spacing_deg) << "\n";
        os << "  decay_rates: rho=" << fmt_rate(st.rho_rate) << " z=" << fmt_rate(st.z_rate)
           << " spacing=" << fmt_rate(st.spacing_rate) << "\n";
    }
    os << "min_delta_deg: " << fmt(report.min_delta_deg)
       << (report.order_violation ? " ORDER VIOLATION" : "") << "\n";
    for (const RunReport::ExpectationResult& e : report.expectations)
        os << "expectation t=" << fmt(e.t) << ": max_dev_deg=" << fmt(e.max_dev_deg)
           << " tol_deg=" << fmt(e.tol_deg) << " " << (e.pass ? "PASS" : "FAIL") << "\n";
    os << "overall: " << (report.pass() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

}  // namespace circumnav
