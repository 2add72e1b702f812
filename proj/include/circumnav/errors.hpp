#pragma once

#include <stdexcept>
#include <string>

namespace circumnav {

// A robot's projection is on (or numerically too close to) the target's
// vertical axis; the cylindrical chart and the Jacobian break down there.
struct AxisSingularity : std::runtime_error {
    explicit AxisSingularity(const std::string& what) : std::runtime_error(what) {}
};

// Fewer than two robots with positive utility: the ring is undefined.
struct TooFewActive : std::runtime_error {
    explicit TooFewActive(const std::string& what) : std::runtime_error(what) {}
};

// Two active robots share the same angular position; gaps are ill-defined.
struct DegenerateGap : std::runtime_error {
    explicit DegenerateGap(const std::string& what) : std::runtime_error(what) {}
};

// Integrator state left the sane range (|component| > 1e9).
struct NumericalBlowup : std::runtime_error {
    explicit NumericalBlowup(const std::string& what) : std::runtime_error(what) {}
};

// A spectral or order-preservation certificate did not meet its tolerance.
struct CertificateFailure : std::runtime_error {
    explicit CertificateFailure(const std::string& what) : std::runtime_error(what) {}
};

// Too few usable samples for a least-squares decay fit.
struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

// Scenario file problems: carries the offending key and line when known.
struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed trajectory CSV: carries the 1-based row number.
struct CsvError : std::runtime_error {
    CsvError(std::size_t row_num, const std::string& what)
        : std::runtime_error("row " + std::to_string(row_num) + ": " + what), row(row_num) {}
    std::size_t row;
};

// Simulation failure wrapped with the timestamp at which it occurred.
struct SimulationError : std::runtime_error {
    SimulationError(double when, const std::string& what)
        : std::runtime_error("t=" + std::to_string(when) + ": " + what), t(when) {}
    double t;
};

}  // namespace circumnav
