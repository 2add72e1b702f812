#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "circumnav/formation.hpp"
#include "circumnav/geometry.hpp"
#include "circumnav/matrix.hpp"

namespace circumnav {

struct ControlGains {
    double k_rho = 1.0;  // radial gain, 1/s
    double k_phi = 1.0;  // angular gain, 1/s
    double k_z = 1.0;    // vertical gain, 1/s

    bool valid() const { return k_rho > 0.0 && k_phi > 0.0 && k_z > 0.0; }
};

struct Setpoints {
    double rho_star = 1.0;   // circumnavigation radius, m (> 0)
    double omega_star = 0.0; // angular speed, rad/s (0 = static circular formation)
    double z_star = 0.0;     // height over the target plane, m

    bool valid() const { return rho_star > 0.0; }
};

// What a robot learns from its two ring neighbors: their angles on a
// consistent unwrapped sheet (phi_minus < phi_self < phi_plus) and the three
// utilities involved. This is all the control law ever reads.
struct NeighborView {
    double phi_minus = 0.0;  // clockwise neighbor's angle
    double phi_plus = 0.0;   // counter-clockwise neighbor's angle
    double mu_minus = 1.0;
    double mu_self = 1.0;
    double mu_plus = 1.0;
};

// Fraction of the combined two-gap arc (Delta_i + Delta_{i-}) that the
// desired angle leaves clockwise of robot i. FG1 carries the published
// weight; the FG2 weight is the analogous fixed point of spacing
// proportional to utility.
inline double spacing_weight(Guideline g, double mu_minus, double mu_self, double mu_plus) {
    if (g == Guideline::FG1) return (mu_minus + mu_self) / (mu_plus + 2.0 * mu_self + mu_minus);
    return mu_minus / (mu_minus + mu_self);
}

/// Desired angle for a robot: a strict convex combination of its neighbors'
/// unwrapped angles,
///   phi_bar = phi_minus + w * (Delta_i + Delta_{i-}),
/// which realizes the wrap branch of the published rule without modular
/// arithmetic. delta_ccw is the gap toward the CCW neighbor, delta_cw the gap
/// toward the CW neighbor.
inline double desired_angle(const NeighborView& view, double delta_ccw, double delta_cw,
                            Guideline g = Guideline::FG1) {
    const double w = spacing_weight(g, view.mu_minus, view.mu_self, view.mu_plus);
    return view.phi_minus + w * (delta_ccw + delta_cw);
}

/// The per-robot control law in cylindrical coordinates:
///   rho_dot = k_rho (rho* - rho)
///   phi_dot = omega* + k_phi (phi_bar - phi)
///   z_dot   = k_z (z* - z)
/// The three channels are fully decoupled; phi_dot depends only on angles
/// and utilities.
inline CylindricalRate control_law(const Cylindrical& q, const NeighborView& view,
                                   const ControlGains& gains, const Setpoints& setpoints,
                                   Guideline g = Guideline::FG1) {
    const double delta_ccw = view.phi_plus - q.phi;
    const double delta_cw = q.phi - view.phi_minus;
    const double phi_bar = desired_angle(view, delta_ccw, delta_cw, g);
    CylindricalRate v;
    v.rho_dot = gains.k_rho * (setpoints.rho_star - q.rho);
    v.phi_dot = setpoints.omega_star + gains.k_phi * (phi_bar - q.phi);
    v.z_dot = gains.k_z * (setpoints.z_star - q.z);
    return v;
}

// The stacked desired-angle rule phi_bar = A phi + b for wrapped angles in
// ring order. A is row stochastic with zero diagonal and ring sparsity; b is
// nonzero only in the first and last entries, where the rule crosses the
// 0/2*pi seam. For n = 2 the two neighbor columns coincide and A degrades to
// [[0,1],[1,0]], b to (-pi, pi).
struct CompactForm {
    Matrix a;
    std::vector<double> b;
};

inline CompactForm compact_form(const std::vector<double>& mu) {
    const std::size_t n = mu.size();
    CompactForm cf{Matrix(n, n), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t prev = (i + n - 1) % n;
        const std::size_t next = (i + 1) % n;
        const double w = spacing_weight(Guideline::FG1, mu[prev], mu[i], mu[next]);
        cf.a(i, next) += w;        // weight on the CCW neighbor
        cf.a(i, prev) += 1.0 - w;  // weight on the CW neighbor
        if (i == 0) cf.b[i] -= kTwoPi * (1.0 - w);
        if (i + 1 == n) cf.b[i] += kTwoPi * w;
    }
    return cf;
}

}  // namespace circumnav
