#pragma once

// Attack-side machinery: mode catalogs for the gradient controller, switch
// schedules, the admissibility budgets (switch count and activation time as
// affine functions of window length), a generator that realizes admissible
// schedules through the token-bucket automaton, and the automaton itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hybris/matrix.hpp"

namespace hybris {

struct ControllerAttackMode {
    std::string id;
    bool attack = false;
    Mat m_map;  // m x m multiplicative corruption of the gradient

    static ControllerAttackMode nominal(std::size_t m, const std::string& mode_id = "s") {
        return {mode_id, false, Mat::identity(m)};
    }
};

inline const ControllerAttackMode& find_mode(const std::vector<ControllerAttackMode>& modes,
                                             const std::string& id) {
    for (const auto& m : modes)
        if (m.id == id) return m;
    throw UnknownModeError("unknown controller mode id '" + id + "'");
}

struct ControllerModeCheck {
    struct PerMode {
        std::string id;
        double min_real_part = 0.0;
        double norm = 0.0;
        bool ok = false;
    };
    std::vector<PerMode> per_mode;
    bool all_ok = true;
    double m_bar = 0.0;  // max ||M_sigma|| over attack modes (0 if none)
};

/// Every attack map must have an eigenvalue with negative real part.
inline ControllerModeCheck check_controller_modes(const std::vector<ControllerAttackMode>& modes) {
    ControllerModeCheck out;
    for (const auto& m : modes) {
        if (!m.attack) continue;
        ControllerModeCheck::PerMode pm;
        pm.id = m.id;
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& l : eigenvalues(m.m_map)) mn = std::min(mn, l.real());
        pm.min_real_part = mn;
        pm.norm = spectral_norm(m.m_map);
        pm.ok = mn < 0.0;
        out.all_ok = out.all_ok && pm.ok;
        out.m_bar = std::max(out.m_bar, pm.norm);
        out.per_mode.push_back(std::move(pm));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

struct AdmissibilityParams {
    double kappa1 = 0.1;  // switch-rate budget, > 0
    double kappa2 = 0.2;  // time-ratio budget, in (0, 1)
    int n0 = 2;           // switch offset, >= 1
    double t0 = 1.0;      // activation-time offset, >= 0

    void check() const {
        if (!(kappa1 > 0.0)) throw InfeasibleParamsError("admissibility: kappa1 must be > 0");
        if (!(kappa2 > 0.0 && kappa2 < 1.0))
            throw InfeasibleParamsError("admissibility: kappa2 must lie in (0,1)");
        if (n0 < 1) throw InfeasibleParamsError("admissibility: n0 must be >= 1");
        if (t0 < 0.0) throw InfeasibleParamsError("admissibility: t0 must be >= 0");
    }
};

struct ScheduleEvent {
    double time = 0.0;
    std::string mode;
};

/// Piecewise-constant switching signal. The first event pins the initial
/// mode at t = 0; later events are the switches.
struct AttackSchedule {
    std::vector<ScheduleEvent> events;
    double horizon = 0.0;

    void check_invariants() const {
        if (events.empty()) throw IntervalError("schedule: needs an initial mode event");
        if (events.front().time != 0.0)
            throw IntervalError("schedule: first segment must start at t = 0");
        for (std::size_t i = 1; i < events.size(); ++i)
            if (!(events[i].time > events[i - 1].time))
                throw IntervalError("schedule: event times must strictly increase");
        if (!events.empty() && events.back().time > horizon)
            throw IntervalError("schedule: event beyond horizon");
    }

    const std::string& mode_at(double t) const {
        std::size_t lo = 0;
        for (std::size_t i = 1; i < events.size() && events[i].time <= t; ++i) lo = i;
        return events[lo].mode;
    }

    /// Same events with all times (and the horizon) multiplied by `factor`.
    AttackSchedule scaled(double factor) const {
        AttackSchedule s = *this;
        s.horizon *= factor;
        for (auto& e : s.events) e.time *= factor;
        return s;
    }
};

namespace detail {
inline void check_interval(const AttackSchedule& sched, double s, double t) {
    if (!(s >= 0.0 && s < t && t <= sched.horizon + 1e-12))
        throw IntervalError("schedule query: need 0 <= s < t <= horizon");
}
}  // namespace detail

/// N(s, t): switches with time in (s, t].
inline int count_switches(const AttackSchedule& sched, double s, double t) {
    detail::check_interval(sched, s, t);
    int n = 0;
    for (std::size_t i = 1; i < sched.events.size(); ++i)
        if (sched.events[i].time > s && sched.events[i].time <= t) ++n;
    return n;
}

/// T(s, t): Lebesgue time spent in attack modes within [s, t].
inline double attack_time(const AttackSchedule& sched, const std::set<std::string>& attack_ids,
                          double s, double t) {
    detail::check_interval(sched, s, t);
    double total = 0.0;
    for (std::size_t i = 0; i < sched.events.size(); ++i) {
        const double seg_start = sched.events[i].time;
        const double seg_end =
            (i + 1 < sched.events.size()) ? sched.events[i + 1].time : sched.horizon;
        if (!attack_ids.count(sched.events[i].mode)) continue;
        const double lo = std::max(seg_start, s);
        const double hi = std::min(seg_end, t);
        if (hi > lo) total += hi - lo;
    }
    return total;
}

struct AdmissibilityWitness {
    char condition = 'N';  // 'N' switch count, 'T' activation time
    double s = 0.0, t = 0.0;
    double lhs = 0.0, rhs = 0.0;
};

struct AdmissibilityReport {
    bool admissible = true;
    double min_slack = std::numeric_limits<double>::infinity();
    std::optional<AdmissibilityWitness> worst;
};

/// Checks both budget inequalities over every window [s, t]. Both slack
/// functions are piecewise linear in (s, t), so evaluating at segment
/// boundaries (with windows closing on switch times from the left) is
/// sufficient; the dense-grid agreement is unit-tested.
inline AdmissibilityReport check_admissible(const AttackSchedule& sched,
                                            const AdmissibilityParams& params,
                                            const std::set<std::string>& attack_ids) {
    params.check();
    sched.check_invariants();
    AdmissibilityReport rep;
    const double tol = 1e-9;

    auto consider = [&](char cond, double s, double t, double lhs, double rhs) {
        const double slack = rhs - lhs;
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst = AdmissibilityWitness{cond, s, t, lhs, rhs};
        }
        if (lhs > rhs + tol * (1.0 + std::abs(rhs))) rep.admissible = false;
    };

    // (a) switch count: windows closing just below switch i and at switch j
    std::vector<double> switches;
    for (std::size_t i = 1; i < sched.events.size(); ++i) switches.push_back(sched.events[i].time);
    for (std::size_t i = 0; i < switches.size(); ++i)
        for (std::size_t j = i; j < switches.size(); ++j) {
            const double count = double(j - i + 1);
            consider('N', switches[i], switches[j], count,
                     params.kappa1 * (switches[j] - switches[i]) + params.n0);
        }

    // (b) activation time over all pairs of segment boundary points
    std::vector<double> bounds = {0.0, sched.horizon};
    bounds.insert(bounds.end(), switches.begin(), switches.end());
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    for (std::size_t i = 0; i < bounds.size(); ++i)
        for (std::size_t j = i + 1; j < bounds.size(); ++j) {
            const double s = bounds[i], t = bounds[j];
            if (!(t > s)) continue;
            consider('T', s, t, attack_time(sched, attack_ids, s, t),
                     params.kappa2 * (t - s) + params.t0);
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Admissible-schedule generation via token buckets
// ---------------------------------------------------------------------------

enum class ScheduleStyle { periodic, random };

namespace detail {
// uniform in [lo, hi) from raw 64-bit draws; independent of stdlib
// distribution internals so seeds reproduce across platforms
inline double uniform01(std::mt19937_64& g) {
    return double(g() >> 11) * 0x1.0p-53;
}
inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}
}  // namespace detail

/// Generates a schedule that the token-bucket automaton can realize: tau1
/// refills at kappa1 (cap n0) and pays 1 per switch, tau2 refills at kappa2
/// (cap t0) and drains at 1 - kappa2 while attacking. Any schedule produced
/// this way satisfies both admissibility budgets.
inline AttackSchedule generate_admissible(std::uint64_t seed, const AdmissibilityParams& params,
                                          const std::string& nominal_id,
                                          const std::vector<std::string>& attack_ids,
                                          double horizon, ScheduleStyle style) {
    params.check();
    if (attack_ids.empty())
        throw InfeasibleParamsError("generate_admissible: no attack modes given");
    std::mt19937_64 g(seed);

    AttackSchedule sched;
    sched.horizon = horizon;
    sched.events.push_back({0.0, nominal_id});
    if (horizon <= 0.0) return sched;

    double t = 0.0;
    double tau1 = double(params.n0);
    double tau2 = params.t0;
    const double k1 = params.kappa1, k2 = params.kappa2;

    auto advance = [&](double dt, bool attacking) {
        tau1 = std::min(double(params.n0), tau1 + k1 * dt);
        tau2 = attacking ? std::max(0.0, tau2 - (1.0 - k2) * dt)
                         : std::min(params.t0, tau2 + k2 * dt);
        t += dt;
    };

    std::size_t pick = 0;
    while (t < horizon) {
        // nominal dwell until a switch is affordable
        double dwell;
        if (style == ScheduleStyle::periodic) {
            // refill tau2 plus a small pad; duty ratio approaches kappa2
            dwell = (params.t0 - tau2) / k2 + 0.05 * std::max(params.t0 / k2, 1.0 / k1);
        } else {
            dwell = detail::uniform(g, 0.3, 1.5) * std::max(1.0 / k1, params.t0 > 0 ? params.t0 : 1.0);
        }
        if (tau1 < 1.0) dwell = std::max(dwell, (1.0 - tau1) / k1 + 1e-9);
        if (t + dwell >= horizon) break;
        advance(dwell, false);

        // entering an attack must leave an exit open: either a second token
        // is in hand, or the refill beats the tau2 drain, or the attack may
        // legally run to the horizon
        const double tau1_in = tau1 - 1.0;
        const double max_len = tau2 / (1.0 - k2);
        const double need_refill = tau1_in >= 1.0 ? 0.0 : (1.0 - tau1_in) / k1;
        const bool exit_ok = need_refill <= max_len || t + max_len >= horizon;
        // enter only with a meaningfully filled bucket: keeps segments from
        // degenerating into slivers the integrator must chase
        if (!(tau1 >= 1.0) || tau2 < std::max(1e-12, 0.2 * params.t0) || !exit_ok) continue;

        const std::string& atk = attack_ids[style == ScheduleStyle::periodic
                                                ? (pick++ % attack_ids.size())
                                                : std::size_t(detail::uniform01(g) * attack_ids.size()) %
                                                      attack_ids.size()];
        tau1 -= 1.0;
        sched.events.push_back({t, atk});

        double len;
        if (style == ScheduleStyle::periodic) {
            len = max_len * 0.999;  // drain the bucket: duty ratio ~ kappa2
        } else {
            const double lo = std::min(std::max(need_refill, 0.25 * max_len), max_len);
            len = detail::uniform(g, lo, max_len);
        }
        if (t + len >= horizon || tau1 + k1 * len < 1.0) {
            // run to the horizon; no exit switch required
            advance(horizon - t, true);
            break;
        }
        advance(len, true);
        tau1 -= 1.0;
        sched.events.push_back({t, nominal_id});
    }
    sched.check_invariants();
    return sched;
}

// ---------------------------------------------------------------------------
// Hybrid automaton (single-step semantics)
// ---------------------------------------------------------------------------

struct AutomatonState {
    double tau1 = 0.0;  // in [0, n0]
    double tau2 = 0.0;  // in [0, t0]
    std::string sigma;
};

struct Hold {
    double dt = 0.0;
};
struct SwitchTo {
    std::string mode;
};
using AutomatonCommand = std::variant<Hold, SwitchTo>;

/// Flow step under the maximal-refill selection: tau1' = kappa1 saturated at
/// n0, tau2' = kappa2 - 1{attack} saturated at [0, t0]. Raises FlowExitsBox
/// if an attack segment would drive tau2 negative.
inline AutomatonState automaton_hold(const AutomatonState& st, const AdmissibilityParams& params,
                                     bool attacking, double dt) {
    if (dt < 0.0) throw IntervalError("automaton_hold: dt must be >= 0");
    AutomatonState out = st;
    out.tau1 = std::min(double(params.n0), st.tau1 + params.kappa1 * dt);
    if (attacking) {
        const double next = st.tau2 - (1.0 - params.kappa2) * dt;
        if (next < -1e-12)
            throw FlowExitsBoxError("automaton_hold: tau2 would leave [0, t0]; end the attack");
        out.tau2 = std::max(next, 0.0);
    } else {
        out.tau2 = std::min(params.t0, st.tau2 + params.kappa2 * dt);
    }
    return out;
}

/// Jump: requires tau1 >= 1 and a mode change; spends one switch token.
inline AutomatonState automaton_switch(const AutomatonState& st, const AdmissibilityParams& params,
                                       const std::string& to_mode) {
    (void)params;
    if (st.tau1 < 1.0 - 1e-12)
        throw JumpNotEnabledError("automaton_switch: jump set requires tau1 >= 1");
    if (to_mode == st.sigma)
        throw JumpNotEnabledError("automaton_switch: jump must change the mode");
    AutomatonState out = st;
    out.tau1 = st.tau1 - 1.0;
    out.sigma = to_mode;
    return out;
}

inline AutomatonState automaton_flow_jump(const AutomatonState& st,
                                          const AdmissibilityParams& params,
                                          const std::set<std::string>& attack_ids,
                                          const AutomatonCommand& cmd) {
    if (std::holds_alternative<Hold>(cmd))
        return automaton_hold(st, params, attack_ids.count(st.sigma) > 0,
                              std::get<Hold>(cmd).dt);
    return automaton_switch(st, params, std::get<SwitchTo>(cmd).mode);
}

}  // namespace hybris
