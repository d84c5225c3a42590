#pragma once

// Fixed-step hybrid simulator. Flows integrate with classical RK4 and split
// exactly at the scheduled jump times (jumps here are scripted, never
// state-triggered); the jump map leaves (x, u, w) fixed, spends one switch
// token and advances the jump counter j.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hybris/attack.hpp"
#include "hybris/certify.hpp"
#include "hybris/exosystem.hpp"
#include "hybris/objective.hpp"
#include "hybris/plant.hpp"

namespace hybris {

struct StepTooLargeError : Error {
    using Error::Error;
};

struct HybridSample {
    double t = 0.0;
    int j = 0;
    std::string sigma;
    bool sigma_attack = false;
    Vec x, u, w;
    double tau1 = 0.0, tau2 = 0.0;
};

enum class SimStatus { completed, non_finite };

struct SimResult {
    std::vector<HybridSample> samples;
    SimStatus status = SimStatus::completed;
    double blowup_time = 0.0;
    int jumps = 0;
    std::vector<std::string> warnings;
};

/// Fully resolved single-run description.
struct SimSetup {
    AttackedLoop loop = AttackedLoop::controller;
    std::map<std::string, ModeMatrices> plant_mats;  // per mode id (plant loop); key "s" + others
    std::string nominal_id = "s";
    Mat c_mat;
    Objective objective;                  // carries the nominal G, H
    std::map<std::string, Mat> m_maps;    // controller loop corruption maps by id
    std::set<std::string> attack_ids;
    AttackSchedule schedule;
    AdmissibilityParams adm;
    double clock_scale = 1.0;  // tau-budget rate multiplier (eps for the controller loop)
    Exosystem exo = Exosystem::constant({0.0});
    double eps = 1e-2;
    double t_end = 10.0;
    double dt = 1e-3;
    Vec x0, u0;
    std::size_t sample_stride = 1;
    double blowup_threshold = 1e12;
};

namespace detail {

struct FlowContext {
    const SimSetup* su = nullptr;
    const ModeMatrices* mats = nullptr;  // active plant matrices
    const Mat* m_map = nullptr;          // active controller corruption (may be null)
};

// time derivative of (x, u) at mode-resolved context
inline void flow_deriv(const FlowContext& ctx, double t, const Vec& x, const Vec& u, Vec& dx,
                       Vec& du) {
    const SimSetup& su = *ctx.su;
    const Vec w = su.exo.value(t);
    dx = vec_add(ctx.mats->a.apply(x), vec_add(ctx.mats->b.apply(u), ctx.mats->e.apply(w)));
    const Vec y = su.c_mat.apply(x);
    Vec g = su.objective.grad_from_output(u, y);
    if (ctx.m_map) g = ctx.m_map->apply(g);
    du = vec_scale(g, -su.eps);
}

inline bool rk4_step(const FlowContext& ctx, double t, double h, Vec& x, Vec& u) {
    const std::size_t n = x.size(), m = u.size();
    Vec k1x(n), k1u(m), k2x(n), k2u(m), k3x(n), k3u(m), k4x(n), k4u(m);
    flow_deriv(ctx, t, x, u, k1x, k1u);
    Vec xs = vec_add(x, vec_scale(k1x, h / 2)), us = vec_add(u, vec_scale(k1u, h / 2));
    flow_deriv(ctx, t + h / 2, xs, us, k2x, k2u);
    xs = vec_add(x, vec_scale(k2x, h / 2));
    us = vec_add(u, vec_scale(k2u, h / 2));
    flow_deriv(ctx, t + h / 2, xs, us, k3x, k3u);
    xs = vec_add(x, vec_scale(k3x, h));
    us = vec_add(u, vec_scale(k3u, h));
    flow_deriv(ctx, t + h, xs, us, k4x, k4u);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += h / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
        finite = finite && std::isfinite(x[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
        u[i] += h / 6.0 * (k1u[i] + 2 * k2u[i] + 2 * k3u[i] + k4u[i]);
        finite = finite && std::isfinite(u[i]);
    }
    return finite;
}

}  // namespace detail

inline SimResult simulate(const SimSetup& su) {
    if (!(su.eps > 0.0)) throw InfeasibleParamsError("simulate: eps must be > 0");
    su.schedule.check_invariants();
    SimResult res;

    // event list clipped to [0, t_end]
    std::vector<ScheduleEvent> events;
    for (const auto& e : su.schedule.events)
        if (e.time <= su.t_end) events.push_back(e);
    double min_gap = su.t_end - (events.empty() ? 0.0 : events.back().time);
    for (std::size_t i = 1; i < events.size(); ++i)
        min_gap = std::min(min_gap, events[i].time - events[i - 1].time);
    if (min_gap > 0.0 && su.dt > min_gap / 10.0)
        throw StepTooLargeError("simulate: dt must be at most one tenth of the smallest "
                                "inter-event gap (dt = " + std::to_string(su.dt) +
                                ", gap = " + std::to_string(min_gap) + ")");

    // budgets accrue in the (possibly eps-scaled) attack clock
    auto rep = check_admissible(su.clock_scale == 1.0 ? su.schedule
                                                      : su.schedule.scaled(su.clock_scale),
                                su.adm, su.attack_ids);
    if (!rep.admissible)
        res.warnings.push_back("schedule violates the admissibility budgets; simulating anyway");

    Vec x = su.x0, u = su.u0;
    double tau1 = double(su.adm.n0), tau2 = su.adm.t0;
    int j = 0;
    bool warned_tau1 = false, warned_tau2 = false;

    auto mats_for = [&](const std::string& id) -> const ModeMatrices& {
        auto it = su.plant_mats.find(su.loop == AttackedLoop::plant ? id : su.nominal_id);
        if (it == su.plant_mats.end())
            throw UnknownModeError("simulate: no plant matrices for mode '" + id + "'");
        return it->second;
    };
    auto mmap_for = [&](const std::string& id) -> const Mat* {
        if (su.loop != AttackedLoop::controller) return nullptr;
        auto it = su.m_maps.find(id);
        if (it == su.m_maps.end())
            throw UnknownModeError("simulate: no controller map for mode '" + id + "'");
        return &it->second;
    };

    auto record = [&](double t, const std::string& sigma) {
        HybridSample s;
        s.t = t;
        s.j = j;
        s.sigma = sigma;
        s.sigma_attack = su.attack_ids.count(sigma) > 0;
        s.x = x;
        s.u = u;
        s.w = su.exo.value(t);
        s.tau1 = tau1;
        s.tau2 = tau2;
        res.samples.push_back(std::move(s));
    };

    const std::size_t stride = std::max<std::size_t>(su.sample_stride, 1);
    record(0.0, events.front().mode);

    for (std::size_t ev = 0; ev < events.size(); ++ev) {
        const std::string& sigma = events[ev].mode;
        const bool attacking = su.attack_ids.count(sigma) > 0;
        const double seg_start = events[ev].time;
        const double seg_end = (ev + 1 < events.size()) ? events[ev + 1].time : su.t_end;
        detail::FlowContext ctx{&su, &mats_for(sigma), mmap_for(sigma)};

        double t = seg_start;
        std::size_t step_count = 0;
        while (t < seg_end - 1e-15) {
            const double h = std::min(su.dt, seg_end - t);
            const bool finite = detail::rk4_step(ctx, t, h, x, u);
            // token-bucket flow under the maximal-refill selection
            tau1 = std::min(double(su.adm.n0), tau1 + su.clock_scale * su.adm.kappa1 * h);
            if (attacking) {
                tau2 -= su.clock_scale * (1.0 - su.adm.kappa2) * h;
                if (tau2 < -1e-9 && !warned_tau2) {
                    res.warnings.push_back("activation budget tau2 exhausted mid-attack");
                    warned_tau2 = true;
                }
                tau2 = std::max(tau2, 0.0);
            } else {
                tau2 = std::min(su.adm.t0, tau2 + su.clock_scale * su.adm.kappa2 * h);
            }
            t += h;

            double amp = 0.0;
            for (double v : x) amp = std::max(amp, std::abs(v));
            for (double v : u) amp = std::max(amp, std::abs(v));
            if (!finite || amp > su.blowup_threshold) {
                record(t, sigma);
                res.status = SimStatus::non_finite;
                res.blowup_time = t;
                return res;
            }
            if (++step_count % stride == 0 && t < seg_end - 1e-15) record(t, sigma);
        }

        if (ev + 1 < events.size()) {
            record(seg_end, sigma);  // pre-jump sample at (t, j)
            if (tau1 < 1.0 - 1e-9 && !warned_tau1) {
                res.warnings.push_back("switch budget tau1 below 1 at a scheduled jump");
                warned_tau1 = true;
            }
            tau1 = std::max(tau1 - 1.0, 0.0);
            ++j;
            ++res.jumps;
            record(seg_end, events[ev + 1].mode);  // post-jump sample at (t, j+1)
        } else {
            record(su.t_end, sigma);
        }
    }
    return res;
}

}  // namespace hybris
