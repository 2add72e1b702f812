#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "circumnav/control.hpp"
#include "circumnav/errors.hpp"
#include "circumnav/matrix.hpp"
#include "circumnav/simulation.hpp"

namespace circumnav {

/// Closed-form left null vector of the ring Laplacian L_p = I - A,
/// normalized to sum 1:
///   w_i ~ (mu_{i+} + 2 mu_i + mu_{i-}) * prod_{j != i, i-} (mu_j + mu_{j+})
inline std::vector<double> left_eigenvector(const std::vector<double>& mu) {
    const std::size_t n = mu.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t prev = (i + n - 1) % n;
        const std::size_t next = (i + 1) % n;
        double v = mu[next] + 2.0 * mu[i] + mu[prev];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || j == prev) continue;
            v *= mu[j] + mu[(j + 1) % n];
        }
        w[i] = v;
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= total;
    return w;
}

/// Ring Laplacian of the desired-angle rule.
inline Matrix ring_laplacian(const std::vector<double>& mu) {
    const CompactForm cf = compact_form(mu);
    return Matrix::identity(mu.size()) - cf.a;
}

/// Estimate of the smallest nonzero real part among the Laplacian's
/// eigenvalues: power iteration on the deflated one-second propagator
/// exp(-L) - 1 w_l^T, whose spectral radius is exp(-k_min).
inline double estimate_slowest_rate(const Matrix& laplacian, const std::vector<double>& w_l) {
    const std::size_t n = laplacian.rows();
    Matrix deflated = expm(laplacian * -1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deflated(i, j) -= w_l[j];

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.37 * static_cast<double>(i % 5);
    double log_growth = 0.0;
    const int warmup = 64, measured = 64;
    for (int it = 0; it < warmup + measured; ++it) {
        x = deflated * x;
        double norm = 0.0;
        for (double v : x) norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 50.0;  // deflated part already dead
        for (double& v : x) v /= norm;
        if (it >= warmup) log_growth += std::log(norm);
    }
    const double rate = -log_growth / measured;
    return std::max(rate, 1e-6);
}

// Numerical witness of the consensus limit exp(-L_p t) -> 1 w_l^T and of
// w_l^T b = 0, which together drive the error signal to zero.
struct SpectralCertificate {
    std::size_t n = 0;
    Matrix laplacian;
    std::vector<double> w_left;
    double residual_left = 0.0;      // ||w_l^T L_p||_inf
    double residual_norm = 0.0;      // |w_l^T 1 - 1|
    double residual_b = 0.0;         // |w_l^T b|
    double row_sum_error = 0.0;      // max_i |(A 1)_i - 1|
    double horizon = 0.0;            // T used for the limit check
    double limit_error = 0.0;        // ||exp(-L_p T) - 1 w_l^T||_inf
    bool pass = false;

    std::string to_string() const {
        std::ostringstream os;
        os << "spectral n=" << n << " residual_left=" << residual_left
           << " residual_b=" << residual_b << " row_sum_error=" << row_sum_error
           << " limit_error=" << limit_error << " T=" << horizon << " "
           << (pass ? "PASS" : "FAIL");
        return os.str();
    }
};

inline constexpr double kSpectralResidualTol = 1e-10;
inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kLimitTol = 1e-6;

/// Build the spectral certificate for one utility vector. horizon <= 0 picks
/// T = 50 / k_min, which reduces to 50 when the slowest mode has unit rate.
inline SpectralCertificate verify_consensus_limit(const std::vector<double>& mu,
                                                  double horizon = 0.0) {
    const std::size_t n = mu.size();
    SpectralCertificate cert;
    cert.n = n;
    const CompactForm cf = compact_form(mu);
    cert.laplacian = Matrix::identity(n) - cf.a;
    cert.w_left = left_eigenvector(mu);

    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += cert.w_left[i] * cert.laplacian(i, j);
        cert.residual_left = std::max(cert.residual_left, std::abs(s));
    }
    cert.residual_norm =
        std::abs(std::accumulate(cert.w_left.begin(), cert.w_left.end(), 0.0) - 1.0);
    double wb = 0.0;
    for (std::size_t i = 0; i < n; ++i) wb += cert.w_left[i] * cf.b[i];
    cert.residual_b = std::abs(wb);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += cf.a(i, j);
        cert.row_sum_error = std::max(cert.row_sum_error, std::abs(s - 1.0));
    }

    cert.horizon =
        horizon > 0.0 ? horizon : 50.0 / estimate_slowest_rate(cert.laplacian, cert.w_left);
    Matrix propagator = expm(cert.laplacian * -cert.horizon);
    auto limit_residual = [&](const Matrix& p) {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += std::abs(p(i, j) - cert.w_left[j]);
            err = std::max(err, row);
        }
        return err;
    };
    cert.limit_error = limit_residual(propagator);
    // exp(-L 2T) = exp(-L T)^2: when the rate estimate was optimistic, a few
    // doublings reach the true limit; a wrong w_l never converges.
    for (int doubling = 0; horizon <= 0.0 && doubling < 4 && cert.limit_error >= kLimitTol;
         ++doubling) {
        propagator = propagator * propagator;
        cert.horizon *= 2.0;
        cert.limit_error = limit_residual(propagator);
    }

    cert.pass = cert.residual_left < kSpectralResidualTol &&
                cert.residual_norm < kSpectralResidualTol &&
                cert.residual_b < kSpectralResidualTol && cert.row_sum_error < kRowSumTol &&
                cert.limit_error < kLimitTol;
    return cert;
}

// Numerical witness of order preservation: the gap dynamics matrix is
// Metzler with zero column sums, so its exponential is entrywise
// non-negative and gaps that start positive stay positive.
struct OrderCertificate {
    std::size_t n = 0;
    Matrix m_delta;
    bool is_metzler = false;
    double min_off_diagonal = 0.0;
    double column_sum_error = 0.0;   // max_j |sum_i M(i,j)|
    double min_exp_entry = 0.0;      // over exp(k_phi M t), t in {0.1, 1, 10}
    double fixed_point_residual = 0.0;  // ||M f||_inf at the FG1 spacing
    bool pass = false;

    std::string to_string() const {
        std::ostringstream os;
        os << "order n=" << n << " metzler=" << (is_metzler ? "yes" : "no")
           << " min_off_diag=" << min_off_diagonal << " col_sum_error=" << column_sum_error
           << " min_exp_entry=" << min_exp_entry
           << " fixed_point_residual=" << fixed_point_residual << " "
           << (pass ? "PASS" : "FAIL");
        return os.str();
    }
};

inline constexpr double kExpEntryTol = -1e-12;
inline constexpr double kColumnSumTol = 1e-12;

/// Gap dynamics matrix M with dDelta/dt = k_phi M Delta. Built from the
/// published per-gap balance; for n = 2 the neighbor columns collapse and M
/// degrades to [[-1, 1], [1, -1]].
inline Matrix m_delta_matrix(const std::vector<double>& mu) {
    const std::size_t n = mu.size();
    auto pair_sum = [&](std::size_t i) { return mu[i] + mu[(i + 1) % n]; };
    auto denom = [&](std::size_t i) {
        return mu[(i + 1) % n] + 2.0 * mu[i] + mu[(i + n - 1) % n];
    };
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t next = (i + 1) % n;
        const std::size_t prev = (i + n - 1) % n;
        m(i, next) += pair_sum(i) / denom(next);
        m(i, prev) += pair_sum(i) / denom(i);
        m(i, i) -= pair_sum(next) / denom(next) + pair_sum(prev) / denom(i);
    }
    return m;
}

inline OrderCertificate build_m_delta(const std::vector<double>& mu, double k_phi = 1.0) {
    const std::size_t n = mu.size();
    OrderCertificate cert;
    cert.n = n;
    cert.m_delta = m_delta_matrix(mu);

    cert.min_off_diagonal = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            cert.min_off_diagonal = std::min(cert.min_off_diagonal, cert.m_delta(i, j));
        }
    cert.is_metzler = cert.min_off_diagonal >= 0.0;

    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += cert.m_delta(i, j);
        cert.column_sum_error = std::max(cert.column_sum_error, std::abs(s));
    }

    cert.min_exp_entry = std::numeric_limits<double>::infinity();
    for (double t : {0.1, 1.0, 10.0}) {
        const Matrix e = expm(cert.m_delta * (k_phi * t));
        cert.min_exp_entry = std::min(cert.min_exp_entry, e.min_entry());
    }

    const std::vector<double> f = desired_spacing_fg1(mu);
    const std::vector<double> mf = cert.m_delta * f;
    for (double v : mf) cert.fixed_point_residual = std::max(cert.fixed_point_residual, std::abs(v));

    cert.pass = cert.is_metzler && cert.column_sum_error < kColumnSumTol &&
                cert.min_exp_entry >= kExpEntryTol;
    return cert;
}

// The four error channels the experiments plot, one time series per robot.
// Entries are NaN at steps where a robot is inactive or where phi_dot cannot
// be estimated (segment boundaries).
struct ErrorSeries {
    std::vector<double> time;
    std::vector<std::vector<double>> rho_error;      // rho* - rho_i
    std::vector<std::vector<double>> omega_error;    // omega* - dphi_i/dt
    std::vector<std::vector<double>> z_error;        // z*_i - z_i
    std::vector<std::vector<double>> spacing_error;  // Delta_i - f_i
    std::vector<double> segment_starts;              // event times
};

/// Post-process a trajectory log into error channels. phi_dot comes from
/// central differences on the unwrapped angle, skipping samples that
/// straddle a schedule event.
inline ErrorSeries error_series(const TrajectoryLog& log, const Scenario& scenario) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t steps = log.steps.size();
    const std::size_t n = scenario.robot_count();

    ErrorSeries out;
    out.time.resize(steps);
    out.rho_error.assign(n, std::vector<double>(steps, nan));
    out.omega_error.assign(n, std::vector<double>(steps, nan));
    out.z_error.assign(n, std::vector<double>(steps, nan));
    out.spacing_error.assign(n, std::vector<double>(steps, nan));
    for (const LogEvent& e : log.events) out.segment_starts.push_back(e.t);

    // phi samples per robot, NaN while inactive
    std::vector<std::vector<double>> phi(n, std::vector<double>(steps, nan));
    for (std::size_t k = 0; k < steps; ++k) {
        out.time[k] = log.steps[k].t;
        for (const LogRecord& rec : log.steps[k].records) {
            phi[rec.robot][k] = rec.phi_unwrapped;
            out.rho_error[rec.robot][k] = scenario.setpoints.rho_star - rec.rho;
            out.z_error[rec.robot][k] =
                scenario.setpoints_for(rec.robot).z_star - rec.z_body;
            out.spacing_error[rec.robot][k] = rec.delta - rec.desired_delta;
        }
    }

    auto crosses_event = [&](double t_lo, double t_hi) {
        for (double s : out.segment_starts) {
            if (s == 0.0) continue;
            if (s > t_lo && s <= t_hi) return true;
        }
        return false;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 1; k + 1 < steps; ++k) {
            if (std::isnan(phi[i][k - 1]) || std::isnan(phi[i][k + 1])) continue;
            if (crosses_event(out.time[k - 1], out.time[k + 1])) continue;
            const double dphi =
                (phi[i][k + 1] - phi[i][k - 1]) / (out.time[k + 1] - out.time[k - 1]);
            out.omega_error[i][k] = scenario.setpoints.omega_star - dphi;
        }
    }
    return out;
}

/// Least-squares decay rate of |e(t)| over [t_begin, t_end]: the negated
/// slope of log|e| against t. Samples with |e| <= 1e-12 (or NaN) are
/// dropped; fewer than 10 usable points is an error.
inline double fit_decay_rate(const std::vector<double>& time, const std::vector<double>& values,
                             double t_begin, double t_end) {
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < time.size(); ++k) {
        if (time[k] < t_begin || time[k] > t_end) continue;
        const double mag = std::abs(values[k]);
        if (!(mag > 1e-12)) continue;  // also drops NaN
        ts.push_back(time[k]);
        ys.push_back(std::log(mag));
    }
    if (ts.size() < 10)
        throw InsufficientData("decay fit needs >= 10 usable points, have " +
                               std::to_string(ts.size()));
    const double count = static_cast<double>(ts.size());
    double mean_t = 0.0, mean_y = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        mean_t += ts[k];
        mean_y += ys[k];
    }
    mean_t /= count;
    mean_y /= count;
    double cov = 0.0, var = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        cov += (ts[k] - mean_t) * (ys[k] - mean_y);
        var += (ts[k] - mean_t) * (ts[k] - mean_t);
    }
    if (var == 0.0) throw InsufficientData("decay fit window has no time spread");
    return -cov / var;
}

}  // namespace circumnav
