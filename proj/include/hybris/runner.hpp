#pragma once

// Turns a scenario config into one concrete run: assembles matrices and
// certificates, realizes the schedule, simulates, monitors, and writes the
// run artifacts (trajectory.csv, monitor.csv, certificate.json,
// summary.json, resolved_config.json).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hybris/monitor.hpp"
#include "hybris/scenario.hpp"
#include "hybris/sim.hpp"

namespace hybris {

struct ResolvedScenario {
    ScenarioConfig cfg;
    ValidationReport validation;
    SimSetup setup;
    CertificateReport cert;       // at the certificate budget, eps pinned
    KappaVerdict schedule_kappa;  // feasibility verdict at the schedule budget
    Mat p_mat;
    double clock_scale = 1.0;
    std::vector<std::string> notes;
};

namespace detail {

inline std::uint64_t effective_seed(const ScenarioConfig& c) {
    if (const char* env = std::getenv("HYBRIS_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return v;
    }
    return c.schedule.seed;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline ResolvedScenario resolve_scenario(const ScenarioConfig& cfg) {
    ResolvedScenario rs;
    rs.cfg = cfg;
    rs.validation = validate_scenario(cfg);
    if (!rs.validation.ok)
        throw ConfigError(cfg.name, "scenario fails validation: " +
                                        (rs.validation.notes.empty() ? std::string("unknown")
                                                                     : rs.validation.notes.front()));

    auto nominal = closed_loop(cfg.plant, cfg.plant_modes.front());
    auto maps = steady_state_maps(nominal.a, nominal.b, nominal.e, cfg.plant.c_mat);
    Objective objective = cfg.objective.build(maps.g, maps.h);
    const CostConstants cc = objective.constants();

    Mat lyap_r = cfg.lyapunov_r ? *cfg.lyapunov_r : Mat::identity(nominal.a.rows());
    rs.p_mat = solve_lyapunov(nominal.a, lyap_r);
    const EigBounds pb = sym_eig_bounds(rs.p_mat);
    const double lam_min_r = sym_eig_bounds(lyap_r).lambda_min;

    const Mat ainv_b = solve_linear(nominal.a, nominal.b);
    const Mat ainv_e = solve_linear(nominal.a, nominal.e);
    const double norm_c = spectral_norm(cfg.plant.c_mat);
    const double norm_g = spectral_norm(maps.g);
    const double norm_h = spectral_norm(maps.h);

    std::vector<Vec> w_samples;
    for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0})
        w_samples.push_back(cfg.exo.value(frac * cfg.horizon));
    const double u_wbar = objective.optimal_sensitivity_bound(w_samples);

    const AdmissibilityParams cert_adm = cfg.cert_adm ? *cfg.cert_adm : cfg.adm;

    // two-stage eps resolution: the policy may reference eps*
    auto certify_at = [&](std::optional<double> eps) {
        if (cfg.loop == AttackedLoop::controller) {
            DynamicLoopConstants in;
            in.cc = cc;
            in.m_bar = check_controller_modes(cfg.ctrl_modes).m_bar;
            in.norm_c = norm_c;
            in.norm_g = norm_g;
            in.norm_h = norm_h;
            in.norm_p_ainv_b = spectral_norm(rs.p_mat * ainv_b);
            in.norm_p_ainv_e = spectral_norm(rs.p_mat * ainv_e);
            in.lam_min_p = pb.lambda_min;
            in.lam_max_p = pb.lambda_max;
            in.lam_min_r = lam_min_r;
            in.u_wbar = u_wbar;
            in.adm = cert_adm;
            return certify_dynamic(in, eps, cfg.k_margin);
        }
        StaticLoopConstants in;
        in.cc = cc;
        in.norm_c = norm_c;
        in.norm_g = norm_g;
        in.norm_h = norm_h;
        in.norm_ainv_b = spectral_norm(ainv_b);
        in.norm_ainv_e = spectral_norm(ainv_e);
        in.norm_p_ainv_e = spectral_norm(rs.p_mat * ainv_e);
        in.lam_min_p = pb.lambda_min;
        in.lam_max_p = pb.lambda_max;
        in.lam_min_r = lam_min_r;
        auto destab = check_attack_destabilizing(cfg.plant, cfg.plant_modes);
        in.lambda_bar_rhat = destab.lambda_bar_rhat.value_or(0.0);
        if (cfg.beta_tilde) in.beta_tilde = *cfg.beta_tilde;
        in.adm = cert_adm;
        return certify_static(in, eps, cfg.k_margin);
    };

    CertificateReport probe = certify_at(std::nullopt);
    double eps = 0.0;
    switch (cfg.eps.kind) {
        case EpsPolicy::Kind::explicit_value:
            eps = cfg.eps.value;
            break;
        case EpsPolicy::Kind::certificate:
        case EpsPolicy::Kind::multiple_of_certificate:
            if (!probe.kappa_feasible || !std::isfinite(probe.eps_star))
                throw ConfigError("eps.policy",
                                  "policy references eps* but the certificate budget is infeasible");
            eps = cfg.eps.value * probe.eps_star;
            break;
    }
    if (!(eps > 0.0)) throw ConfigError("eps", "resolved gain must be positive");
    rs.cert = certify_at(eps);

    // feasibility verdict of the schedule budget itself (often the published
    // kappa, which may be infeasible; reported, never asserted)
    if (cfg.loop == AttackedLoop::controller) {
        rs.schedule_kappa = kappa_condition_dynamic(cfg.adm.kappa1, cfg.adm.kappa2, cc.mu, cc.ell,
                                                    check_controller_modes(cfg.ctrl_modes).m_bar);
    } else {
        auto destab = check_attack_destabilizing(cfg.plant, cfg.plant_modes);
        rs.schedule_kappa = kappa_condition_static(
            cfg.adm.kappa1, cfg.adm.kappa2, lam_min_r, pb.lambda_min, pb.lambda_max,
            destab.lambda_bar_rhat.value_or(0.0), rs.cert.beta_tilde > 0.0
                                                      ? rs.cert.beta_tilde
                                                      : beta_tilde_default(pb.lambda_min,
                                                                           pb.lambda_max));
    }

    // attack clock: the controller-loop model runs its budgets at eps rate
    switch (cfg.attack_clock) {
        case AttackClock::automatic:
            rs.clock_scale = cfg.loop == AttackedLoop::controller ? eps : 1.0;
            break;
        case AttackClock::controller:
            rs.clock_scale = eps;
            break;
        case AttackClock::plant:
            rs.clock_scale = 1.0;
            break;
    }

    std::set<std::string> attack_ids;
    if (cfg.loop == AttackedLoop::controller) {
        for (const auto& m : cfg.ctrl_modes)
            if (m.attack) attack_ids.insert(m.id);
    } else {
        for (const auto& m : cfg.plant_modes)
            if (m.attack) attack_ids.insert(m.id);
    }

    AttackSchedule schedule;
    if (cfg.schedule.generate) {
        std::vector<std::string> ids(attack_ids.begin(), attack_ids.end());
        schedule = generate_admissible(detail::effective_seed(cfg), cfg.adm,
                                       cfg.loop == AttackedLoop::controller
                                           ? cfg.nominal_ctrl_id()
                                           : cfg.nominal_plant_id(),
                                       ids, cfg.horizon * rs.clock_scale,
                                       cfg.schedule.style)
                       .scaled(1.0 / rs.clock_scale);
    } else {
        schedule.horizon = cfg.horizon;
        schedule.events = cfg.schedule.events;
        schedule.check_invariants();
    }

    // shrink dt if the schedule has gaps tighter than 10 dt
    double min_gap = cfg.horizon - (schedule.events.empty() ? 0.0 : schedule.events.back().time);
    for (std::size_t i = 1; i < schedule.events.size(); ++i)
        min_gap = std::min(min_gap, schedule.events[i].time - schedule.events[i - 1].time);
    double dt = cfg.dt;
    if (min_gap > 0.0 && dt > min_gap / 10.0) {
        dt = min_gap / 10.0;
        if (dt < 1e-7)
            throw ConfigError("dt", "schedule gaps require a step below 1e-7; refusing");
        rs.notes.push_back("dt reduced to " + std::to_string(dt) + " to resolve schedule gaps");
    }

    SimSetup& su = rs.setup;
    su.loop = cfg.loop;
    su.nominal_id = cfg.loop == AttackedLoop::controller ? cfg.nominal_plant_id()
                                                         : cfg.nominal_plant_id();
    for (const auto& m : cfg.plant_modes) su.plant_mats[m.id] = closed_loop(cfg.plant, m);
    su.c_mat = cfg.plant.c_mat;
    su.objective = objective;
    for (const auto& m : cfg.ctrl_modes) su.m_maps[m.id] = m.m_map;
    su.attack_ids = attack_ids;
    su.schedule = schedule;
    su.adm = cfg.adm;
    su.clock_scale = rs.clock_scale;
    su.exo = cfg.exo;
    su.eps = eps;
    su.t_end = cfg.horizon;
    su.dt = dt;
    su.x0 = cfg.x0.empty() ? Vec(cfg.plant.state_dim(), 0.0) : cfg.x0;
    su.u0 = cfg.u0.empty() ? Vec(cfg.plant.input_dim(), 0.0) : cfg.u0;
    const double steps = cfg.horizon / dt;
    su.sample_stride = cfg.sample_stride ? cfg.sample_stride
                                         : std::max<std::size_t>(1, std::size_t(steps / 40000.0));
    return rs;
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------

inline json certificate_to_json(const ResolvedScenario& rs) {
    const CertificateReport& c = rs.cert;
    json j;
    j["loop"] = c.loop == AttackedLoop::controller ? "controller" : "plant";
    j["kappa_feasible"] = c.kappa_feasible;
    j["omega"] = c.omega;
    j["rho_s"] = c.rho_s;
    j["rho_a"] = c.rho_a;
    j["rho"] = c.rho;
    j["tau0"] = c.tau0;
    j["theta"] = c.theta;
    j["eps_star"] = c.eps_star;
    j["eps_used"] = c.eps_used;
    j["k_margin"] = c.k_margin;
    j["lambda_min_xi"] = c.lambda_min_xi;
    j["xi_pd"] = c.xi_pd;
    if (c.xi.rows() == 2) j["xi"] = cfg::mat_to_json(c.xi);
    j["gain_coeff"] = c.gain_coeff;
    j["r_vec"] = {c.r0, c.r1};
    j["c_lower"] = c.c_lower;
    j["c_upper"] = c.c_upper;
    if (c.loop == AttackedLoop::plant) j["beta_tilde"] = c.beta_tilde;
    j["constants"] = c.constants;
    j["schedule_budget"] = {{"feasible", rs.schedule_kappa.feasible},
                            {"rho", rs.schedule_kappa.rho},
                            {"omega", rs.schedule_kappa.omega}};
    return j;
}

struct RunArtifacts {
    ResolvedScenario resolved;
    SimResult sim;
    MonitorResult mon;
    std::filesystem::path dir;
};

inline void write_trajectory_csv(const RunArtifacts& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    const auto& samples = a.sim.samples;
    const std::size_t n = samples.front().x.size();
    const std::size_t m = samples.front().u.size();
    const std::size_t q = samples.front().w.size();
    out << "t,j,sigma";
    for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
    for (std::size_t i = 0; i < m; ++i) out << ",u" << i;
    for (std::size_t i = 0; i < q; ++i) out << ",w" << i;
    out << ",tracking_error,U,V_stable,V_attack,V_weighted,residual_radius\n";
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        const auto& r = a.mon.rows[k];
        out << detail::fmt17(s.t) << ',' << s.j << ',' << s.sigma;
        for (double v : s.x) out << ',' << detail::fmt17(v);
        for (double v : s.u) out << ',' << detail::fmt17(v);
        for (double v : s.w) out << ',' << detail::fmt17(v);
        out << ',' << detail::fmt17(r.tracking_error) << ',' << detail::fmt17(r.lyapunov) << ','
            << detail::fmt17(r.v_stable) << ',' << detail::fmt17(r.v_attack) << ','
            << detail::fmt17(r.weighted) << ',' << detail::fmt17(r.residual_radius) << '\n';
    }
}

inline void write_monitor_csv(const RunArtifacts& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << "t,j,sigma,tau,dist,U,residual_radius,tracking_error\n";
    for (const auto& r : a.mon.rows)
        out << detail::fmt17(r.t) << ',' << r.j << ',' << r.sigma << ',' << detail::fmt17(r.tau)
            << ',' << detail::fmt17(r.dist) << ',' << detail::fmt17(r.lyapunov) << ','
            << detail::fmt17(r.residual_radius) << ',' << detail::fmt17(r.tracking_error) << '\n';
}

inline json verdicts_to_json(const MonitorVerdicts& v) {
    return json{{"jump_nonincrease", v.jump_nonincrease},
                {"jump_count", v.jump_count},
                {"worst_jump_delta", v.worst_jump_delta},
                {"flow_decrease_all", v.flow_decrease_all},
                {"flow_decrease_fraction", v.flow_decrease_fraction},
                {"eligible_intervals", v.eligible_intervals},
                {"iss_envelope", v.iss_envelope},
                {"envelope_margin", v.envelope_margin},
                {"residual_radius_valid", v.residual_radius_valid},
                {"budget_violations", v.budget_violations},
                {"tail_sup_dist", v.tail_sup_dist},
                {"tail_sup_tracking", v.tail_sup_tracking},
                {"log_decay_slope", v.log_decay_slope}};
}

inline json summary_to_json(const RunArtifacts& a) {
    json j;
    j["scenario"] = a.resolved.cfg.name;
    j["status"] = a.sim.status == SimStatus::completed ? "completed" : "non_finite";
    if (a.sim.status == SimStatus::non_finite) j["blowup_time"] = a.sim.blowup_time;
    j["jumps"] = a.sim.jumps;
    j["warnings"] = a.sim.warnings;
    j["notes"] = a.resolved.notes;
    j["validation_notes"] = a.resolved.validation.notes;
    j["verdicts"] = verdicts_to_json(a.mon.verdicts);
    j["eps_used"] = a.resolved.setup.eps;
    j["clock_scale"] = a.resolved.clock_scale;
    j["final_tracking_error"] = a.mon.rows.back().tracking_error;

    if (!a.resolved.cfg.paper_refs.empty()) {
        json cmp;
        for (const auto& [key, paper] : a.resolved.cfg.paper_refs) {
            json entry;
            entry["paper"] = paper;
            if (key == "eps_star" && std::isfinite(a.resolved.cert.eps_star)) {
                entry["computed"] = a.resolved.cert.eps_star;
                entry["ratio"] = a.resolved.cert.eps_star / paper;
            } else if (key == "tail_bound") {
                entry["computed"] = a.mon.verdicts.tail_sup_tracking;
                entry["within_2x_ceiling"] = a.mon.verdicts.tail_sup_tracking <= 2.0 * paper;
            } else if (key == "alpha") {
                auto it = a.resolved.cert.constants.find("alpha_lemma");
                if (it != a.resolved.cert.constants.end()) {
                    entry["candidate_alpha_lemma"] = it->second;
                    entry["candidate_rho"] = a.resolved.cert.rho;
                }
                entry["note"] = "reported symbol has no unique counterpart; candidates listed";
            }
            cmp[key] = entry;
        }
        j["paper_comparisons"] = cmp;
    }
    return j;
}

inline RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    RunArtifacts a{resolve_scenario(cfg), {}, {}, out_dir};
    a.sim = simulate(a.resolved.setup);
    a.mon = monitor(a.sim, a.resolved.setup, a.resolved.cert, a.resolved.p_mat);

    std::filesystem::create_directories(out_dir);
    write_trajectory_csv(a, out_dir / "trajectory.csv");
    write_monitor_csv(a, out_dir / "monitor.csv");
    std::ofstream(out_dir / "certificate.json") << certificate_to_json(a.resolved).dump(2) << '\n';
    std::ofstream(out_dir / "summary.json") << summary_to_json(a).dump(2) << '\n';
    std::ofstream(out_dir / "resolved_config.json")
        << scenario_to_json(a.resolved.cfg).dump(2) << '\n';
    return a;
}

// ---------------------------------------------------------------------------
// End-to-end reproductions
// ---------------------------------------------------------------------------

/// Swaps the disturbance for its t = 0 constant value (the "constant w" run
/// of the experiment pair).
inline ScenarioConfig with_constant_w(ScenarioConfig c, double horizon) {
    c.exo = Exosystem::constant(c.exo.value(0.0));
    c.horizon = horizon;
    c.name += "-const";
    return c;
}

struct ReproResult {
    json summary;
    bool ok = true;
};

inline ReproResult repro(const std::string& which, const std::filesystem::path& out_dir) {
    ReproResult rr;
    auto run_pair = [&](ScenarioConfig base) {
        ScenarioConfig cw = with_constant_w(base, base.horizon / 2.0);
        auto a1 = run_scenario(cw, out_dir / cw.name);
        base.name += "-sine";
        auto a2 = run_scenario(base, out_dir / base.name);
        rr.summary["constant_w"] = summary_to_json(a1);
        rr.summary["time_varying_w"] = summary_to_json(a2);
        rr.summary["certificate"] = certificate_to_json(a1.resolved);
        rr.ok = a1.sim.status == SimStatus::completed && a2.sim.status == SimStatus::completed;
        rr.summary["decay_fit_slope_constant_w"] = a1.mon.verdicts.log_decay_slope;
        rr.summary["tail_sup_time_varying_w"] = a2.mon.verdicts.tail_sup_tracking;
    };

    if (which == "synthetic-static") {
        auto base = build_synthetic_static();
        run_pair(base);
        // exact published quantity: closed-loop poles at -2
        auto nominal = closed_loop(base.plant, base.plant_modes.front());
        json poles = json::array();
        for (const auto& l : eigenvalues(nominal.a)) poles.push_back({l.real(), l.imag()});
        rr.summary["closed_loop_poles"] = poles;
    } else if (which == "synthetic-dynamic") {
        run_pair(build_synthetic_dynamic());
    } else if (which == "power-grid-controller" || which == "power-grid-plant") {
        auto base = build_power_grid(which == "power-grid-controller" ? AttackedLoop::controller
                                                                      : AttackedLoop::plant);
        auto a = run_scenario(base, out_dir / base.name);
        rr.summary["run"] = summary_to_json(a);
        rr.summary["certificate"] = certificate_to_json(a.resolved);
        rr.ok = a.sim.status == SimStatus::completed;
        // per-segment behavior: fit over the second half of the constant
        // segment; sup over the sinusoidal segment
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        double sup_sine = 0.0;
        for (const auto& r : a.mon.rows) {
            if (r.t >= 50.0 && r.t <= 100.0) {
                const double y = std::log(std::max(r.tracking_error, 1e-300));
                sx += r.t;
                sy += y;
                sxx += r.t * r.t;
                sxy += r.t * y;
                ++n;
            }
            if (r.t > 100.0) sup_sine = std::max(sup_sine, r.tracking_error);
        }
        rr.summary["constant_segment_slope"] =
            n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
        rr.summary["sine_segment_sup"] = sup_sine;
    } else {
        throw ConfigError("repro", "unknown scenario '" + which + "'");
    }

    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir / "repro_summary.json") << rr.summary.dump(2) << '\n';
    return rr;
}

}  // namespace hybris
