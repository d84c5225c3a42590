#pragma once

// Closed-form stability certificates for both attacked loops: feasibility of
// the (kappa1, kappa2) budgets, the weighted-time constant tau0, the gain
// ceiling eps*, the 2x2 comparison matrix Xi with its optimal split theta,
// and the linear ISS gain coefficient mapping ||dw/dt|| to the residual set.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "hybris/attack.hpp"
#include "hybris/matrix.hpp"
#include "hybris/objective.hpp"

namespace hybris {

// ---------------------------------------------------------------------------
// Xi machinery (appendix lemma)
// ---------------------------------------------------------------------------

struct XiParams {
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double chi = 0.0;
    double gamma = 0.0;
};

struct XiResult {
    Mat xi;
    double lambda_min = 0.0;
    bool positive_definite = false;
};

/// Xi = [[theta (alpha/eps - beta), -((1-theta) delta + theta chi)/2],
///       [   (symmetric)          ,            (1-theta) gamma      ]]
/// Definiteness is decided by the leading principal minors.
inline XiResult xi_matrix(const XiParams& p, double theta, double eps) {
    XiResult out;
    const double off = -0.5 * ((1.0 - theta) * p.delta + theta * p.chi);
    const double a11 = theta * (p.alpha / eps - p.beta);
    const double a22 = (1.0 - theta) * p.gamma;
    out.xi = Mat{{a11, off}, {off, a22}};
    const double det = a11 * a22 - off * off;
    out.positive_definite = a22 > 0.0 && det > 0.0;
    const double tr = a11 + a22;
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    out.lambda_min = tr / 2.0 - disc;
    return out;
}

/// Largest eps keeping Xi positive definite at a fixed theta.
inline double xi_eps_hat(const XiParams& p, double theta) {
    const double q = (1.0 - theta) * p.delta + theta * p.chi;
    return p.alpha * p.gamma / (p.beta * p.gamma + q * q / (4.0 * theta * (1.0 - theta)));
}

/// Maximizer of eps_hat over theta.
inline double xi_theta_star(const XiParams& p) { return p.delta / (p.delta + p.chi); }

/// eps_hat at theta*, the closed-form gain ceiling alpha gamma / (beta gamma + delta chi).
inline double xi_eps_star(const XiParams& p) {
    return p.alpha * p.gamma / (p.beta * p.gamma + p.delta * p.chi);
}

// ---------------------------------------------------------------------------
// Budget feasibility and tau0
// ---------------------------------------------------------------------------

struct KappaVerdict {
    bool feasible = false;
    double rho = 0.0;
    double omega = 1.0;
    double rho_s = 0.0;
    double rho_a = 0.0;
};

/// Controller-loop budget test: 2 mu > ln(omega) kappa1 + 2 kappa2 (mu + Mbar ell),
/// with omega = max{1/mu, ell^2/mu}; equivalently rho > 0 with the flow margins
/// rho_s = 2 mu, rho_a = 2 Mbar ell.
inline KappaVerdict kappa_condition_dynamic(double kappa1, double kappa2, double mu, double ell,
                                            double m_bar) {
    KappaVerdict v;
    v.omega = std::max(1.0 / mu, ell * ell / mu);
    v.rho_s = 2.0 * mu;
    v.rho_a = 2.0 * m_bar * ell;
    v.rho = v.rho_s - kappa2 * (v.rho_s + v.rho_a) - std::log(v.omega) * kappa1;
    v.feasible = v.rho > 0.0;
    return v;
}

inline double tau0_dynamic(int n0, double t0, double mu, double ell, double m_bar, double omega) {
    return std::log(omega) * n0 + 2.0 * t0 * (mu + m_bar * ell);
}

/// Plant-loop budget test: lam_min(R) > lam_max(P) ln(omega) kappa1
/// + kappa2 (lam_min(R) + lam_max(P) lambda_bar_rhat), with
/// omega = max{lam_max(P)/beta_tilde, beta_tilde/lam_min(P)}; equivalently
/// rho > 0 with rho_s = lam_min(R)/lam_max(P), rho_a = lambda_bar_rhat.
inline KappaVerdict kappa_condition_static(double kappa1, double kappa2, double lam_min_r,
                                           double lam_min_p, double lam_max_p,
                                           double lambda_bar_rhat, double beta_tilde) {
    KappaVerdict v;
    v.omega = std::max(lam_max_p / beta_tilde, beta_tilde / lam_min_p);
    if (v.omega < 1.0)
        throw InfeasibleParamsError(
            "kappa_condition_static: beta_tilde makes omega < 1; pick beta_tilde in "
            "[lam_min(P), lam_max(P)] style choices");
    v.rho_s = lam_min_r / lam_max_p;
    v.rho_a = lambda_bar_rhat;
    v.rho = v.rho_s - kappa2 * (v.rho_s + v.rho_a) - std::log(v.omega) * kappa1;
    v.feasible = v.rho > 0.0;
    return v;
}

inline double tau0_static(int n0, double t0, double lam_min_r, double lam_max_p,
                          double lambda_bar_rhat, double omega) {
    return std::log(omega) * n0 + t0 * (lam_min_r / lam_max_p + lambda_bar_rhat);
}

/// omega-minimizing choice of the free scalar beta_tilde.
inline double beta_tilde_default(double lam_min_p, double lam_max_p) {
    return std::sqrt(lam_min_p * lam_max_p);
}

// ---------------------------------------------------------------------------
// eps* ceilings
// ---------------------------------------------------------------------------

/// Controller-loop gain ceiling:
/// eps* = rho lam_min(R) min{mu,1} /
///        (2 ell_y max{Mbar,1} ||C|| ||G|| ||P A^-1 B|| (rho min{mu,1} + 2 ell max{ell,Mbar} e^tau0)).
/// Returns +inf (decoupled output) when the denominator vanishes.
inline double eps_star_dynamic(double rho, double lam_min_r, double mu, double ell, double ell_y,
                               double m_bar, double norm_c, double norm_g, double norm_p_ainv_b,
                               double tau0) {
    if (!(rho > 0.0)) throw InfeasibleKappaError("eps_star_dynamic: requires rho > 0");
    const double denom = 2.0 * ell_y * std::max(m_bar, 1.0) * norm_c * norm_g * norm_p_ainv_b *
                         (rho * std::min(mu, 1.0) + 2.0 * ell * std::max(ell, m_bar) * std::exp(tau0));
    const double numer = rho * lam_min_r * std::min(mu, 1.0);
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return numer / denom;
}

/// Plant-loop gain ceiling:
/// eps* = rho min{lam_min(P), beta_tilde} mu^2 /
///        (2 ell_y e^tau0 ||C|| ||G|| ||A^-1 B|| max{lam_max(P), beta_tilde} (mu^2 + ell^2)).
inline double eps_star_static(double rho, double lam_min_p, double lam_max_p, double beta_tilde,
                              double mu, double ell, double ell_y, double norm_c, double norm_g,
                              double norm_ainv_b, double tau0) {
    if (!(rho > 0.0)) throw InfeasibleKappaError("eps_star_static: requires rho > 0");
    const double denom = 2.0 * ell_y * std::exp(tau0) * norm_c * norm_g * norm_ainv_b *
                         std::max(lam_max_p, beta_tilde) * (mu * mu + ell * ell);
    const double numer = rho * std::min(lam_min_p, beta_tilde) * mu * mu;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return numer / denom;
}

// ---------------------------------------------------------------------------
// Xi parameter tables (flow-bound coefficients of each loop)
// ---------------------------------------------------------------------------

inline XiParams xi_params_dynamic(double rho, double lam_min_r, double mu, double ell,
                                  double ell_y, double m_bar, double norm_c, double norm_g,
                                  double norm_p_ainv_b, double tau0) {
    XiParams p;
    p.alpha = lam_min_r;
    p.beta = 2.0 * ell_y * std::max(m_bar, 1.0) * norm_p_ainv_b * norm_c * norm_g;
    p.delta = ell_y * std::exp(tau0) * std::max(ell, m_bar) * norm_g * norm_c;
    p.chi = 2.0 * ell * std::max(m_bar, 1.0) * norm_p_ainv_b;
    p.gamma = 0.5 * rho * std::min(mu, 1.0);
    return p;
}

inline XiParams xi_params_static(double rho, double lam_min_p, double lam_max_p, double beta_tilde,
                                 double mu, double ell, double ell_y, double norm_c, double norm_g,
                                 double norm_ainv_b, double tau0) {
    XiParams p;
    p.alpha = rho * std::min(lam_min_p, beta_tilde);
    p.beta = 2.0 * ell_y * std::exp(tau0) * std::max(lam_max_p, beta_tilde) * norm_ainv_b *
             norm_c * norm_g;
    p.delta = ell * ell_y * norm_c * norm_g;
    p.chi = 2.0 * ell * std::exp(tau0) * std::max(lam_max_p, beta_tilde) * norm_ainv_b;
    p.gamma = mu * mu;
    return p;
}

// ---------------------------------------------------------------------------
// ISS gains
// ---------------------------------------------------------------------------

struct IssGain {
    double gain_coeff = 0.0;  // gamma(s) = gain_coeff * s
    double r0 = 0.0, r1 = 0.0;
    double theta = 0.0;
    double c_lower = 0.0, c_upper = 0.0;  // quadratic sandwich of the Lyapunov function
};

/// Controller-loop asymptotic gain. The sqrt factor is the ratio of the
/// quadratic envelope constants of U; r collects the disturbance channels.
inline IssGain iss_gain_dynamic(double lam_min_p, double lam_max_p, double mu, double ell,
                                double ell_y, double norm_h, double norm_g, double norm_p_ainv_e,
                                double u_wbar, double tau0, double theta, double xi_min, double k,
                                double eps) {
    if (!(xi_min > 0.0)) throw XiNotPDError("iss_gain_dynamic: Xi is not positive definite");
    if (!(k > 0.0 && k < 1.0)) throw InfeasibleParamsError("iss_gain_dynamic: k must be in (0,1)");
    IssGain g;
    g.theta = theta;
    const double e_tau = std::exp(tau0);
    g.c_upper = std::max(theta * lam_max_p,
                         (1.0 - theta) * e_tau * std::max(ell * ell / (2.0 * mu), 0.5));
    g.c_lower = std::min(theta * lam_min_p, (1.0 - theta) * std::min(mu / 2.0, 0.5));
    g.r0 = 2.0 * theta * norm_p_ainv_e;
    g.r1 = (1.0 - theta) * e_tau * std::max(ell_y * norm_h * norm_g, u_wbar);
    const double rnorm = std::hypot(g.r0, g.r1);
    g.gain_coeff = std::sqrt(g.c_upper / g.c_lower) * rnorm / (xi_min * k) / eps;
    return g;
}

/// Plant-loop asymptotic gain.
inline IssGain iss_gain_static(double lam_min_p, double lam_max_p, double beta_tilde, double mu,
                               double ell, double ell_y, double norm_h, double norm_g,
                               double norm_ainv_e, double tau0, double theta, double xi_min,
                               double k, double eps) {
    if (!(xi_min > 0.0)) throw XiNotPDError("iss_gain_static: Xi is not positive definite");
    if (!(k > 0.0 && k < 1.0)) throw InfeasibleParamsError("iss_gain_static: k must be in (0,1)");
    IssGain g;
    g.theta = theta;
    const double e_tau = std::exp(tau0);
    g.c_upper = std::max(theta * e_tau * std::max(lam_max_p, beta_tilde),
                         (1.0 - theta) * ell * ell / (2.0 * mu));
    g.c_lower = std::min(theta * std::min(lam_min_p, beta_tilde), (1.0 - theta) * mu / 2.0);
    g.r0 = 2.0 * e_tau * theta * std::max(lam_max_p, beta_tilde) * norm_ainv_e;
    g.r1 = ell_y * (1.0 - theta) * norm_h * norm_g;
    const double rnorm = std::hypot(g.r0, g.r1);
    g.gain_coeff = std::sqrt(g.c_upper / g.c_lower) * rnorm / (xi_min * k) / eps;
    return g;
}

// ---------------------------------------------------------------------------
// Assembled certificates
// ---------------------------------------------------------------------------

enum class AttackedLoop { controller, plant };

/// Everything the controller-loop certificate needs, already reduced to
/// scalars and spectral norms.
struct DynamicLoopConstants {
    CostConstants cc;
    double m_bar = 1.0;
    double norm_c = 0.0, norm_g = 0.0, norm_h = 0.0;
    double norm_p_ainv_b = 0.0, norm_p_ainv_e = 0.0;
    double lam_min_p = 0.0, lam_max_p = 0.0, lam_min_r = 0.0;
    double u_wbar = 0.0;
    AdmissibilityParams adm;
};

struct StaticLoopConstants {
    CostConstants cc;
    double norm_c = 0.0, norm_g = 0.0, norm_h = 0.0;
    double norm_ainv_b = 0.0, norm_ainv_e = 0.0;
    double norm_p_ainv_e = 0.0;  // snapshot only
    double lam_min_p = 0.0, lam_max_p = 0.0, lam_min_r = 0.0;
    double lambda_bar_rhat = 0.0;
    double beta_tilde = 0.0;  // <= 0 selects the omega-minimizing default
    AdmissibilityParams adm;
};

struct CertificateReport {
    AttackedLoop loop = AttackedLoop::controller;
    bool kappa_feasible = false;
    double omega = 1.0, rho_s = 0.0, rho_a = 0.0, rho = 0.0, tau0 = 0.0;
    double theta = 0.0;
    double eps_star = std::numeric_limits<double>::quiet_NaN();
    double eps_used = std::numeric_limits<double>::quiet_NaN();
    double k_margin = 0.5;
    Mat xi;
    double lambda_min_xi = std::numeric_limits<double>::quiet_NaN();
    bool xi_pd = false;
    double gain_coeff = std::numeric_limits<double>::quiet_NaN();
    double r0 = 0.0, r1 = 0.0;
    double c_lower = 0.0, c_upper = 0.0;
    double beta_tilde = 0.0;  // plant loop only
    std::map<std::string, double> constants;  // full assumption snapshot
};

namespace detail {
inline void snapshot_common(CertificateReport& rep, const CostConstants& cc,
                            const AdmissibilityParams& adm) {
    rep.constants["mu"] = cc.mu;
    rep.constants["ell"] = cc.ell;
    rep.constants["ell_u"] = cc.ell_u;
    rep.constants["ell_y"] = cc.ell_y;
    rep.constants["kappa1"] = adm.kappa1;
    rep.constants["kappa2"] = adm.kappa2;
    rep.constants["n0"] = double(adm.n0);
    rep.constants["t0"] = adm.t0;
}
}  // namespace detail

/// Full controller-loop certificate. `eps_explicit` pins the evaluation gain;
/// otherwise 0.9 eps* is used when feasible.
inline CertificateReport certify_dynamic(const DynamicLoopConstants& in,
                                         std::optional<double> eps_explicit = std::nullopt,
                                         double k = 0.5) {
    CertificateReport rep;
    rep.loop = AttackedLoop::controller;
    rep.k_margin = k;
    const auto& cc = in.cc;
    KappaVerdict kv =
        kappa_condition_dynamic(in.adm.kappa1, in.adm.kappa2, cc.mu, cc.ell, in.m_bar);
    rep.kappa_feasible = kv.feasible;
    rep.omega = kv.omega;
    rep.rho = kv.rho;
    rep.rho_s = kv.rho_s;
    rep.rho_a = kv.rho_a;
    rep.tau0 = tau0_dynamic(in.adm.n0, in.adm.t0, cc.mu, cc.ell, in.m_bar, kv.omega);

    if (kv.feasible)
        rep.eps_star = eps_star_dynamic(kv.rho, in.lam_min_r, cc.mu, cc.ell, cc.ell_y, in.m_bar,
                                        in.norm_c, in.norm_g, in.norm_p_ainv_b, rep.tau0);
    rep.eps_used = eps_explicit ? *eps_explicit
                                : (kv.feasible ? 0.9 * rep.eps_star
                                               : std::numeric_limits<double>::quiet_NaN());

    XiParams xp = xi_params_dynamic(kv.rho, in.lam_min_r, cc.mu, cc.ell, cc.ell_y, in.m_bar,
                                    in.norm_c, in.norm_g, in.norm_p_ainv_b, rep.tau0);
    rep.theta = xi_theta_star(xp);
    if (std::isfinite(rep.eps_used) && rep.eps_used > 0.0) {
        XiResult xr = xi_matrix(xp, rep.theta, rep.eps_used);
        rep.xi = xr.xi;
        rep.lambda_min_xi = xr.lambda_min;
        rep.xi_pd = xr.positive_definite;
        if (xr.positive_definite) {
            IssGain g = iss_gain_dynamic(in.lam_min_p, in.lam_max_p, cc.mu, cc.ell, cc.ell_y,
                                         in.norm_h, in.norm_g, in.norm_p_ainv_e, in.u_wbar,
                                         rep.tau0, rep.theta, xr.lambda_min, k, rep.eps_used);
            rep.gain_coeff = g.gain_coeff;
            rep.r0 = g.r0;
            rep.r1 = g.r1;
            rep.c_lower = g.c_lower;
            rep.c_upper = g.c_upper;
            rep.constants["gain_simplified"] =
                (cc.ell / cc.mu) * std::exp(rep.tau0 / 2.0) * std::hypot(g.r0, g.r1) /
                (xr.lambda_min * k) / rep.eps_used;
        }
    }
    detail::snapshot_common(rep, cc, in.adm);
    rep.constants["m_bar"] = in.m_bar;
    rep.constants["norm_c"] = in.norm_c;
    rep.constants["norm_g"] = in.norm_g;
    rep.constants["norm_h"] = in.norm_h;
    rep.constants["norm_p_ainv_b"] = in.norm_p_ainv_b;
    rep.constants["norm_p_ainv_e"] = in.norm_p_ainv_e;
    rep.constants["lam_min_p"] = in.lam_min_p;
    rep.constants["lam_max_p"] = in.lam_max_p;
    rep.constants["lam_min_r"] = in.lam_min_r;
    rep.constants["u_wbar"] = in.u_wbar;
    rep.constants["xi_alpha"] = xp.alpha;
    rep.constants["xi_beta"] = xp.beta;
    rep.constants["xi_delta"] = xp.delta;
    rep.constants["xi_chi"] = xp.chi;
    rep.constants["xi_gamma"] = xp.gamma;
    return rep;
}

/// Full plant-loop certificate.
inline CertificateReport certify_static(const StaticLoopConstants& in,
                                        std::optional<double> eps_explicit = std::nullopt,
                                        double k = 0.5) {
    CertificateReport rep;
    rep.loop = AttackedLoop::plant;
    rep.k_margin = k;
    const auto& cc = in.cc;
    rep.beta_tilde =
        in.beta_tilde > 0.0 ? in.beta_tilde : beta_tilde_default(in.lam_min_p, in.lam_max_p);
    KappaVerdict kv = kappa_condition_static(in.adm.kappa1, in.adm.kappa2, in.lam_min_r,
                                             in.lam_min_p, in.lam_max_p, in.lambda_bar_rhat,
                                             rep.beta_tilde);
    rep.kappa_feasible = kv.feasible;
    rep.omega = kv.omega;
    rep.rho = kv.rho;
    rep.rho_s = kv.rho_s;
    rep.rho_a = kv.rho_a;
    rep.tau0 = tau0_static(in.adm.n0, in.adm.t0, in.lam_min_r, in.lam_max_p, in.lambda_bar_rhat,
                           kv.omega);

    if (kv.feasible)
        rep.eps_star = eps_star_static(kv.rho, in.lam_min_p, in.lam_max_p, rep.beta_tilde, cc.mu,
                                       cc.ell, cc.ell_y, in.norm_c, in.norm_g, in.norm_ainv_b,
                                       rep.tau0);
    rep.eps_used = eps_explicit ? *eps_explicit
                                : (kv.feasible ? 0.9 * rep.eps_star
                                               : std::numeric_limits<double>::quiet_NaN());

    XiParams xp = xi_params_static(kv.rho, in.lam_min_p, in.lam_max_p, rep.beta_tilde, cc.mu,
                                   cc.ell, cc.ell_y, in.norm_c, in.norm_g, in.norm_ainv_b,
                                   rep.tau0);
    rep.theta = xi_theta_star(xp);
    if (std::isfinite(rep.eps_used) && rep.eps_used > 0.0) {
        XiResult xr = xi_matrix(xp, rep.theta, rep.eps_used);
        rep.xi = xr.xi;
        rep.lambda_min_xi = xr.lambda_min;
        rep.xi_pd = xr.positive_definite;
        if (xr.positive_definite) {
            IssGain g = iss_gain_static(in.lam_min_p, in.lam_max_p, rep.beta_tilde, cc.mu, cc.ell,
                                        cc.ell_y, in.norm_h, in.norm_g, in.norm_ainv_e, rep.tau0,
                                        rep.theta, xr.lambda_min, k, rep.eps_used);
            rep.gain_coeff = g.gain_coeff;
            rep.r0 = g.r0;
            rep.r1 = g.r1;
            rep.c_lower = g.c_lower;
            rep.c_upper = g.c_upper;
            rep.constants["gain_simplified"] =
                std::sqrt((in.lam_max_p / in.lam_min_p) * std::exp(rep.tau0)) *
                std::hypot(g.r0, g.r1) / (xr.lambda_min * k) / rep.eps_used;
        }
    }
    detail::snapshot_common(rep, cc, in.adm);
    rep.constants["norm_c"] = in.norm_c;
    rep.constants["norm_g"] = in.norm_g;
    rep.constants["norm_h"] = in.norm_h;
    rep.constants["norm_ainv_b"] = in.norm_ainv_b;
    rep.constants["norm_ainv_e"] = in.norm_ainv_e;
    rep.constants["norm_p_ainv_e"] = in.norm_p_ainv_e;
    rep.constants["lam_min_p"] = in.lam_min_p;
    rep.constants["lam_max_p"] = in.lam_max_p;
    rep.constants["lam_min_r"] = in.lam_min_r;
    rep.constants["lambda_bar_rhat"] = in.lambda_bar_rhat;
    rep.constants["beta_tilde"] = rep.beta_tilde;
    rep.constants["xi_alpha"] = xp.alpha;
    rep.constants["xi_beta"] = xp.beta;
    rep.constants["xi_delta"] = xp.delta;
    rep.constants["xi_chi"] = xp.chi;
    rep.constants["xi_gamma"] = xp.gamma;
    // candidate reading of the experiment's reported "alpha" (see report docs)
    rep.constants["alpha_lemma"] = xp.alpha;
    return rep;
}

}  // namespace hybris
