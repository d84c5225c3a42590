#pragma once

// Runtime Lyapunov monitors: evaluates the analysis functions along a
// simulated trajectory (V_s, V_a and W for the controller loop; W_s, W_a and
// V for the plant loop; their e^tau-weighted combination U), the distance to
// the optimal set, the residual-ball radius, and the three empirical
// verdicts: jump non-increase, flow decrease outside the residual ball, and
// the exponential-ISS envelope.

#include <cmath>
#include <string>
#include <vector>

#include "hybris/certify.hpp"
#include "hybris/sim.hpp"

namespace hybris {

struct MonitorRow {
    double t = 0.0;
    int j = 0;
    std::string sigma;
    double v_stable = 0.0;       // V_s (cost gap) or W_s (quadratic), per loop
    double v_attack = 0.0;       // V_a or W_a
    double weighted = 0.0;       // e^tau-weighted switched function
    double lyapunov = 0.0;       // U
    double dist = 0.0;           // |theta|_{A*} = ||(x_e, u - u*)||
    double tracking_error = 0.0; // ||z - z*||
    double residual_radius = 0.0;
    double tau = 0.0;
};

struct MonitorVerdicts {
    bool jump_nonincrease = true;
    int jump_count = 0;
    double worst_jump_delta = 0.0;
    bool flow_decrease_all = true;        // with the relative tolerance
    double flow_decrease_fraction = 1.0;  // share of eligible intervals with dU <= tol
    int eligible_intervals = 0;
    bool iss_envelope = true;
    double envelope_margin = std::numeric_limits<double>::infinity();
    bool residual_radius_valid = true;
    int budget_violations = 0;
    double tail_sup_dist = 0.0;
    double tail_sup_tracking = 0.0;
    double log_decay_slope = 0.0;  // linear fit of log tracking error over the tail
};

struct MonitorConfig {
    double tol_jump = 1e-9;
    double flow_rel_tol = 1e-6;
    double tail_fraction = 0.5;
};

struct MonitorResult {
    std::vector<MonitorRow> rows;
    MonitorVerdicts verdicts;
};

inline MonitorResult monitor(const SimResult& sim, const SimSetup& su,
                             const CertificateReport& cert, const Mat& p_mat,
                             const MonitorConfig& cfg = {}) {
    if (sim.samples.empty()) throw IntervalError("monitor: empty trajectory");
    MonitorResult out;
    out.rows.reserve(sim.samples.size());

    const auto nominal_it = su.plant_mats.find(su.nominal_id);
    if (nominal_it == su.plant_mats.end())
        throw UnknownModeError("monitor: no nominal plant matrices");
    const ModeMatrices& nom = nominal_it->second;
    const Mat ainv_b = solve_linear(nom.a, nom.b);
    const Mat ainv_e = solve_linear(nom.a, nom.e);

    const double ln_omega = std::log(cert.omega);
    const double rate_sum = cert.rho_s + cert.rho_a;
    const double theta = cert.theta;
    const bool controller_loop = cert.loop == AttackedLoop::controller;
    const double eps = cert.eps_used;
    const double rnorm = std::hypot(cert.r0, cert.r1);
    const bool radius_ok = cert.xi_pd && cert.lambda_min_xi > 0.0 && std::isfinite(eps);

    double rate_sup = 0.0;
    Vec warm;
    Vec prev_w;
    Vec prev_ustar;

    for (const auto& s : sim.samples) {
        MonitorRow row;
        row.t = s.t;
        row.j = s.j;
        row.sigma = s.sigma;

        Vec u_star;
        if (!prev_w.empty() && s.w == prev_w) {
            u_star = prev_ustar;
        } else {
            u_star = su.objective.optimal_input(s.w, warm.empty() ? nullptr : &warm);
            warm = u_star;
            prev_w = s.w;
            prev_ustar = u_star;
        }

        // x_bar at the *current* input, x_e = x - x_bar(u, w)
        Vec xbar = vec_scale(vec_add(ainv_b.apply(s.u), ainv_e.apply(s.w)), -1.0);
        Vec x_e = vec_sub(s.x, xbar);
        Vec du = vec_sub(s.u, u_star);

        const double gap = su.objective.value(s.u, s.w) - su.objective.value(u_star, s.w);
        const double half_dist2 = 0.5 * dot(du, du);
        const double quad = dot(x_e, p_mat.apply(x_e));

        row.tau = std::clamp(ln_omega * s.tau1 + rate_sum * s.tau2, 0.0, cert.tau0);
        const double weight = std::exp(row.tau);

        if (controller_loop) {
            row.v_stable = gap;
            row.v_attack = half_dist2;
            row.weighted = (s.sigma_attack ? half_dist2 : gap) * weight;
            row.lyapunov = (1.0 - theta) * row.weighted + theta * quad;
        } else {
            row.v_stable = quad;
            row.v_attack = cert.beta_tilde * dot(x_e, x_e);
            row.weighted = (s.sigma_attack ? row.v_attack : quad) * weight;
            row.lyapunov = theta * row.weighted + (1.0 - theta) * gap;
        }

        row.dist = std::hypot(norm2(x_e), norm2(du));

        // optimal point z* = (x*(u*, w), u*)
        Vec x_star = vec_scale(vec_add(ainv_b.apply(u_star), ainv_e.apply(s.w)), -1.0);
        row.tracking_error = std::hypot(norm2(vec_sub(s.x, x_star)), norm2(du));

        rate_sup = std::max(rate_sup, norm2(su.exo.rate(s.t)));
        row.residual_radius = radius_ok
                                  ? rnorm / (eps * cert.lambda_min_xi * cert.k_margin) * rate_sup
                                  : std::numeric_limits<double>::infinity();
        out.rows.push_back(std::move(row));
    }

    // ---- verdicts -----------------------------------------------------
    auto& v = out.verdicts;
    v.residual_radius_valid = radius_ok;

    int flow_ok = 0;
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        const auto& a = out.rows[i - 1];
        const auto& b = out.rows[i];
        if (b.j == a.j + 1) {
            ++v.jump_count;
            const double delta = b.lyapunov - a.lyapunov;
            v.worst_jump_delta = std::max(v.worst_jump_delta, delta);
            if (delta > cfg.tol_jump) v.jump_nonincrease = false;
            if (sim.samples[i - 1].tau1 < 1.0 - 1e-9) ++v.budget_violations;
        } else if (b.j == a.j && radius_ok && b.t > a.t && a.dist >= a.residual_radius &&
                   b.dist >= b.residual_radius) {
            ++v.eligible_intervals;
            const double tol = cfg.flow_rel_tol * std::abs(a.lyapunov) + 1e-12;
            if (b.lyapunov - a.lyapunov <= tol)
                ++flow_ok;
            else
                v.flow_decrease_all = false;
        }
    }
    if (v.eligible_intervals > 0)
        v.flow_decrease_fraction = double(flow_ok) / double(v.eligible_intervals);

    // exponential-ISS envelope with the certificate's own constants
    if (radius_ok && cert.c_upper > 0.0 && cert.c_lower > 0.0) {
        const double c1 = std::sqrt(cert.c_upper / cert.c_lower);
        const double decay = eps * (1.0 - cert.k_margin) * cert.lambda_min_xi / cert.c_upper / 2.0;
        const double d0 = out.rows.front().dist;
        v.envelope_margin = std::numeric_limits<double>::infinity();
        for (const auto& row : out.rows) {
            const double gamma_t = cert.gain_coeff * rate_sup;
            const double env = c1 * d0 * std::exp(-decay * row.t) + gamma_t;
            v.envelope_margin = std::min(v.envelope_margin, env - row.dist);
            if (row.dist > env * (1.0 + 1e-6) + 1e-9) v.iss_envelope = false;
        }
    } else {
        v.iss_envelope = false;
    }

    // tail statistics
    const double t_end = out.rows.back().t;
    const double tail_from = t_end * (1.0 - cfg.tail_fraction);
    double sxx = 0, sx = 0, sy = 0, sxy = 0;
    int npts = 0;
    for (const auto& row : out.rows) {
        if (row.t < tail_from) continue;
        v.tail_sup_dist = std::max(v.tail_sup_dist, row.dist);
        v.tail_sup_tracking = std::max(v.tail_sup_tracking, row.tracking_error);
        const double y = std::log(std::max(row.tracking_error, 1e-300));
        sx += row.t;
        sy += y;
        sxx += row.t * row.t;
        sxy += row.t * y;
        ++npts;
    }
    if (npts >= 2 && sxx * npts - sx * sx > 0.0)
        v.log_decay_slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
    return out;
}

/// Per-sample distance of (x, u) to the optimal point, as a bare series.
inline std::vector<double> tracking_error_series(const MonitorResult& m) {
    std::vector<double> e;
    e.reserve(m.rows.size());
    for (const auto& r : m.rows) e.push_back(r.tracking_error);
    return e;
}

}  // namespace hybris
