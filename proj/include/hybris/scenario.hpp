#pragma once

// Scenario configuration: a JSON-compatible description that resolves to one
// concrete closed-loop run, plus ready-made reproductions of the synthetic
// and power-grid experiments.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybris/attack.hpp"
#include "hybris/certify.hpp"
#include "hybris/exosystem.hpp"
#include "hybris/objective.hpp"
#include "hybris/plant.hpp"
#include "hybris/swing.hpp"

namespace hybris {

using nlohmann::json;

struct ObjectiveSpec {
    OutputCostKind kind = OutputCostKind::quadratic;
    Mat r;       // input weight
    Mat q;       // quadratic output weight
    Vec y_ref;   // quadratic reference
    double eta = 0.0;
    Vec y_lo, y_hi;

    Objective build(const Mat& g, const Mat& h) const {
        if (kind == OutputCostKind::quadratic) {
            Vec ref = y_ref.empty() ? Vec(g.rows(), 0.0) : y_ref;
            return Objective::quadratic(r, q, ref, g, h);
        }
        return Objective::soft_box(r, eta, y_lo, y_hi, g, h);
    }
};

struct EpsPolicy {
    enum class Kind { certificate, multiple_of_certificate, explicit_value };
    Kind kind = Kind::certificate;
    double value = 0.9;  // fraction of eps*, multiple of eps*, or the explicit gain
};

struct ScheduleSpec {
    bool generate = true;
    ScheduleStyle style = ScheduleStyle::random;
    std::uint64_t seed = 1;
    std::vector<ScheduleEvent> events;  // explicit alternative
};

enum class AttackClock { automatic, controller, plant };

struct ScenarioConfig {
    std::string name;
    AttackedLoop loop = AttackedLoop::controller;

    PlantModel plant;
    std::optional<SwingGridSpec> swing;  // kept for provenance when used
    std::vector<PlantAttackMode> plant_modes;       // nominal first
    std::vector<ControllerAttackMode> ctrl_modes;   // nominal first
    ObjectiveSpec objective;

    AdmissibilityParams adm;                        // schedule budget
    std::optional<AdmissibilityParams> cert_adm;    // certificate budget override
    ScheduleSpec schedule;
    AttackClock attack_clock = AttackClock::automatic;

    Exosystem exo = Exosystem::constant({0.0});
    EpsPolicy eps;
    double horizon = 100.0;
    double dt = 1e-3;
    double k_margin = 0.5;
    std::optional<Mat> lyapunov_r;      // default identity
    std::optional<double> beta_tilde;   // default omega-minimizer
    Vec x0, u0;                         // default zeros
    std::size_t sample_stride = 0;      // 0 = auto

    std::map<std::string, double> paper_refs;  // reported values to compare against
    std::map<std::string, Mat> paper_variants; // e.g. alternative printed matrices

    const std::string& nominal_plant_id() const { return plant_modes.front().id; }
    const std::string& nominal_ctrl_id() const { return ctrl_modes.front().id; }
};

// ---------------------------------------------------------------------------
// JSON (de)serialization
// ---------------------------------------------------------------------------

namespace cfg {

inline json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Mat mat_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ConfigError(path, "expected a nested array (matrix)");
    Mat m(j.size(), j[0].size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != m.cols())
            throw ConfigError(path, "ragged matrix rows");
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (!j[i][c].is_number()) throw ConfigError(path, "matrix entries must be numbers");
            m(i, c) = j[i][c].get<double>();
        }
    }
    if (!m.finite()) throw ConfigError(path, "matrix entries must be finite");
    return m;
}

inline Vec vec_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array (vector)");
    Vec v;
    for (const auto& x : j) {
        if (!x.is_number()) throw ConfigError(path, "vector entries must be numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

inline const json& get(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key, "missing required field");
    return *it;
}

inline double get_num(const json& j, const std::string& key, const std::string& path) {
    const json& v = get(j, key, path);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

}  // namespace cfg

inline json scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["name"] = c.name;
    j["attacked_loop"] = c.loop == AttackedLoop::controller ? "controller" : "plant";

    json plant;
    plant["f"] = cfg::mat_to_json(c.plant.f_mat);
    plant["n"] = cfg::mat_to_json(c.plant.n_mat);
    plant["b"] = cfg::mat_to_json(c.plant.b_mat);
    plant["e"] = cfg::mat_to_json(c.plant.e_mat);
    plant["c"] = cfg::mat_to_json(c.plant.c_mat);
    plant["k"] = cfg::mat_to_json(c.plant.k_gain);
    j["plant"] = plant;

    json pmodes = json::array();
    for (const auto& m : c.plant_modes) {
        json jm;
        jm["id"] = m.id;
        jm["attack"] = m.attack;
        if (m.l) jm["l"] = cfg::mat_to_json(*m.l);
        if (m.l_b) jm["l_b"] = cfg::mat_to_json(*m.l_b);
        if (m.l_e) jm["l_e"] = cfg::mat_to_json(*m.l_e);
        if (m.a_explicit) jm["a"] = cfg::mat_to_json(*m.a_explicit);
        if (m.b_explicit) jm["b"] = cfg::mat_to_json(*m.b_explicit);
        if (m.e_explicit) jm["e"] = cfg::mat_to_json(*m.e_explicit);
        pmodes.push_back(jm);
    }
    j["plant_modes"] = pmodes;

    json cmodes = json::array();
    for (const auto& m : c.ctrl_modes)
        cmodes.push_back({{"id", m.id}, {"attack", m.attack}, {"m", cfg::mat_to_json(m.m_map)}});
    j["controller_modes"] = cmodes;

    json obj;
    obj["kind"] = c.objective.kind == OutputCostKind::quadratic ? "quadratic" : "soft_box";
    obj["r"] = cfg::mat_to_json(c.objective.r);
    if (c.objective.kind == OutputCostKind::quadratic) {
        obj["q"] = cfg::mat_to_json(c.objective.q);
        obj["y_ref"] = c.objective.y_ref;
    } else {
        obj["eta"] = c.objective.eta;
        obj["y_lo"] = c.objective.y_lo;
        obj["y_hi"] = c.objective.y_hi;
    }
    j["objective"] = obj;

    auto adm_json = [](const AdmissibilityParams& a) {
        return json{{"kappa1", a.kappa1}, {"kappa2", a.kappa2}, {"n0", a.n0}, {"t0", a.t0}};
    };
    j["admissibility"] = adm_json(c.adm);
    json cert;
    if (c.cert_adm) cert["admissibility"] = adm_json(*c.cert_adm);
    cert["k"] = c.k_margin;
    if (c.beta_tilde) cert["beta_tilde"] = *c.beta_tilde;
    if (c.lyapunov_r) cert["lyapunov_r"] = cfg::mat_to_json(*c.lyapunov_r);
    j["certificate"] = cert;

    json sched;
    if (c.schedule.generate) {
        sched["generate"] = {{"style", c.schedule.style == ScheduleStyle::random ? "random"
                                                                                 : "periodic"},
                             {"seed", c.schedule.seed}};
    } else {
        json ev = json::array();
        for (const auto& e : c.schedule.events) ev.push_back({e.time, e.mode});
        sched["events"] = ev;
    }
    j["schedule"] = sched;

    switch (c.attack_clock) {
        case AttackClock::automatic: j["attack_clock"] = "auto"; break;
        case AttackClock::controller: j["attack_clock"] = "controller"; break;
        case AttackClock::plant: j["attack_clock"] = "plant"; break;
    }

    json segs = json::array();
    for (const auto& s : c.exo.segments()) {
        json js;
        js["duration"] = std::isfinite(s.duration) ? json(s.duration) : json();
        switch (s.kind) {
            case ExoSegment::Kind::constant:
                js["kind"] = "constant";
                js["w0"] = s.w0;
                break;
            case ExoSegment::Kind::sine_rate:
                js["kind"] = "sine_rate";
                js["w0"] = s.w0;
                js["a"] = s.a;
                js["omega"] = s.omega;
                break;
            case ExoSegment::Kind::cos_plus_one:
                js["kind"] = "cos_plus_one";
                js["c"] = s.c;
                js["omega"] = s.omega;
                js["dim"] = s.dim;
                break;
        }
        segs.push_back(js);
    }
    j["exosystem"] = {{"segments", segs}};

    const char* pol = c.eps.kind == EpsPolicy::Kind::certificate ? "certificate"
                      : c.eps.kind == EpsPolicy::Kind::multiple_of_certificate
                          ? "multiple_of_certificate"
                          : "explicit";
    j["eps"] = {{"policy", pol}, {"value", c.eps.value}};
    j["horizon"] = c.horizon;
    j["dt"] = c.dt;
    if (!c.x0.empty() || !c.u0.empty()) j["initial_state"] = {{"x", c.x0}, {"u", c.u0}};
    if (c.sample_stride) j["sample_stride"] = c.sample_stride;
    if (!c.paper_refs.empty()) j["paper_refs"] = c.paper_refs;
    if (!c.paper_variants.empty()) {
        json pv;
        for (const auto& [k, v] : c.paper_variants) pv[k] = cfg::mat_to_json(v);
        j["paper_variants"] = pv;
    }
    return j;
}

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig c;
    c.name = j.value("name", "unnamed");
    const std::string loop = cfg::get(j, "attacked_loop", "").get<std::string>();
    if (loop == "controller")
        c.loop = AttackedLoop::controller;
    else if (loop == "plant")
        c.loop = AttackedLoop::plant;
    else
        throw ConfigError("attacked_loop", "must be 'controller' or 'plant'");

    const json& jp = cfg::get(j, "plant", "");
    c.plant.f_mat = cfg::mat_from_json(cfg::get(jp, "f", "plant"), "plant.f");
    c.plant.n_mat = cfg::mat_from_json(cfg::get(jp, "n", "plant"), "plant.n");
    c.plant.b_mat = cfg::mat_from_json(cfg::get(jp, "b", "plant"), "plant.b");
    c.plant.e_mat = cfg::mat_from_json(cfg::get(jp, "e", "plant"), "plant.e");
    c.plant.c_mat = cfg::mat_from_json(cfg::get(jp, "c", "plant"), "plant.c");
    c.plant.k_gain = cfg::mat_from_json(cfg::get(jp, "k", "plant"), "plant.k");
    c.plant.check_dims();

    for (const auto& jm : cfg::get(j, "plant_modes", "")) {
        PlantAttackMode m;
        m.id = jm.value("id", "");
        if (m.id.empty()) throw ConfigError("plant_modes.id", "mode id required");
        m.attack = jm.value("attack", false);
        if (jm.contains("l")) m.l = cfg::mat_from_json(jm["l"], "plant_modes.l");
        if (jm.contains("l_b")) m.l_b = cfg::mat_from_json(jm["l_b"], "plant_modes.l_b");
        if (jm.contains("l_e")) m.l_e = cfg::mat_from_json(jm["l_e"], "plant_modes.l_e");
        if (jm.contains("a")) m.a_explicit = cfg::mat_from_json(jm["a"], "plant_modes.a");
        if (jm.contains("b")) m.b_explicit = cfg::mat_from_json(jm["b"], "plant_modes.b");
        if (jm.contains("e")) m.e_explicit = cfg::mat_from_json(jm["e"], "plant_modes.e");
        c.plant_modes.push_back(std::move(m));
    }
    if (c.plant_modes.empty() || c.plant_modes.front().attack)
        throw ConfigError("plant_modes", "first mode must be the nominal one");

    for (const auto& jm : cfg::get(j, "controller_modes", "")) {
        ControllerAttackMode m;
        m.id = jm.value("id", "");
        m.attack = jm.value("attack", false);
        m.m_map = cfg::mat_from_json(cfg::get(jm, "m", "controller_modes"), "controller_modes.m");
        c.ctrl_modes.push_back(std::move(m));
    }
    if (c.ctrl_modes.empty() || c.ctrl_modes.front().attack)
        throw ConfigError("controller_modes", "first mode must be the nominal one");

    const json& jo = cfg::get(j, "objective", "");
    const std::string kind = cfg::get(jo, "kind", "objective").get<std::string>();
    c.objective.r = cfg::mat_from_json(cfg::get(jo, "r", "objective"), "objective.r");
    if (kind == "quadratic") {
        c.objective.kind = OutputCostKind::quadratic;
        c.objective.q = cfg::mat_from_json(cfg::get(jo, "q", "objective"), "objective.q");
        if (jo.contains("y_ref")) c.objective.y_ref = cfg::vec_from_json(jo["y_ref"], "objective.y_ref");
    } else if (kind == "soft_box") {
        c.objective.kind = OutputCostKind::soft_box;
        c.objective.eta = cfg::get_num(jo, "eta", "objective");
        c.objective.y_lo = cfg::vec_from_json(cfg::get(jo, "y_lo", "objective"), "objective.y_lo");
        c.objective.y_hi = cfg::vec_from_json(cfg::get(jo, "y_hi", "objective"), "objective.y_hi");
    } else {
        throw ConfigError("objective.kind", "must be 'quadratic' or 'soft_box'");
    }

    auto adm_from = [](const json& ja, const std::string& path) {
        AdmissibilityParams a;
        a.kappa1 = cfg::get_num(ja, "kappa1", path);
        a.kappa2 = cfg::get_num(ja, "kappa2", path);
        a.n0 = int(cfg::get_num(ja, "n0", path));
        a.t0 = cfg::get_num(ja, "t0", path);
        a.check();
        return a;
    };
    c.adm = adm_from(cfg::get(j, "admissibility", ""), "admissibility");
    if (j.contains("certificate")) {
        const json& jc = j["certificate"];
        if (jc.contains("admissibility"))
            c.cert_adm = adm_from(jc["admissibility"], "certificate.admissibility");
        c.k_margin = jc.value("k", 0.5);
        if (jc.contains("beta_tilde") && jc["beta_tilde"].is_number())
            c.beta_tilde = jc["beta_tilde"].get<double>();
        if (jc.contains("lyapunov_r") && jc["lyapunov_r"].is_array())
            c.lyapunov_r = cfg::mat_from_json(jc["lyapunov_r"], "certificate.lyapunov_r");
    }

    const json& js = cfg::get(j, "schedule", "");
    if (js.contains("generate")) {
        c.schedule.generate = true;
        const std::string style = js["generate"].value("style", "random");
        c.schedule.style = style == "periodic" ? ScheduleStyle::periodic : ScheduleStyle::random;
        c.schedule.seed = js["generate"].value("seed", std::uint64_t(1));
    } else if (js.contains("events")) {
        c.schedule.generate = false;
        for (const auto& e : js["events"]) {
            if (!e.is_array() || e.size() != 2)
                throw ConfigError("schedule.events", "each event is [time, mode_id]");
            c.schedule.events.push_back({e[0].get<double>(), e[1].get<std::string>()});
        }
    } else {
        throw ConfigError("schedule", "needs 'generate' or 'events'");
    }

    const std::string clock = j.value("attack_clock", "auto");
    c.attack_clock = clock == "controller" ? AttackClock::controller
                     : clock == "plant"    ? AttackClock::plant
                                           : AttackClock::automatic;

    const json& je = cfg::get(j, "exosystem", "");
    std::vector<ExoSegment> segs;
    for (const auto& jseg : cfg::get(je, "segments", "exosystem")) {
        ExoSegment s;
        const std::string sk = cfg::get(jseg, "kind", "exosystem.segments").get<std::string>();
        s.duration = (jseg.contains("duration") && jseg["duration"].is_number())
                         ? jseg["duration"].get<double>()
                         : std::numeric_limits<double>::infinity();
        if (sk == "constant") {
            s.kind = ExoSegment::Kind::constant;
            s.w0 = cfg::vec_from_json(cfg::get(jseg, "w0", "exosystem"), "exosystem.w0");
        } else if (sk == "sine_rate") {
            s.kind = ExoSegment::Kind::sine_rate;
            s.w0 = cfg::vec_from_json(cfg::get(jseg, "w0", "exosystem"), "exosystem.w0");
            s.a = cfg::get_num(jseg, "a", "exosystem");
            s.omega = cfg::get_num(jseg, "omega", "exosystem");
        } else if (sk == "cos_plus_one") {
            s.kind = ExoSegment::Kind::cos_plus_one;
            s.c = cfg::get_num(jseg, "c", "exosystem");
            s.omega = cfg::get_num(jseg, "omega", "exosystem");
            s.dim = std::size_t(cfg::get_num(jseg, "dim", "exosystem"));
        } else {
            throw ConfigError("exosystem.segments.kind", "unknown segment kind '" + sk + "'");
        }
        segs.push_back(std::move(s));
    }
    c.exo = Exosystem::piecewise(std::move(segs));

    const json& jeps = cfg::get(j, "eps", "");
    const std::string pol = cfg::get(jeps, "policy", "eps").get<std::string>();
    c.eps.value = cfg::get_num(jeps, "value", "eps");
    if (pol == "certificate")
        c.eps.kind = EpsPolicy::Kind::certificate;
    else if (pol == "multiple_of_certificate")
        c.eps.kind = EpsPolicy::Kind::multiple_of_certificate;
    else if (pol == "explicit")
        c.eps.kind = EpsPolicy::Kind::explicit_value;
    else
        throw ConfigError("eps.policy", "unknown policy '" + pol + "'");

    c.horizon = cfg::get_num(j, "horizon", "");
    c.dt = cfg::get_num(j, "dt", "");
    if (!(c.dt > 0.0) || !(c.horizon > 0.0))
        throw ConfigError("horizon/dt", "must be positive");
    if (j.contains("initial_state")) {
        c.x0 = cfg::vec_from_json(cfg::get(j["initial_state"], "x", "initial_state"),
                                  "initial_state.x");
        c.u0 = cfg::vec_from_json(cfg::get(j["initial_state"], "u", "initial_state"),
                                  "initial_state.u");
    }
    c.sample_stride = j.value("sample_stride", std::size_t(0));
    if (j.contains("paper_refs"))
        for (auto it = j["paper_refs"].begin(); it != j["paper_refs"].end(); ++it)
            c.paper_refs[it.key()] = it.value().get<double>();
    if (j.contains("paper_variants"))
        for (auto it = j["paper_variants"].begin(); it != j["paper_variants"].end(); ++it)
            c.paper_variants[it.key()] = cfg::mat_from_json(it.value(), "paper_variants");
    return c;
}

// ---------------------------------------------------------------------------
// Experiment reproductions
// ---------------------------------------------------------------------------

/// Two-state plant with the static inner loop under two multiplicative
/// attacks on the feedback gain; constant-then-sinusoidal disturbance.
inline ScenarioConfig build_synthetic_static() {
    ScenarioConfig c;
    c.name = "synthetic-static";
    c.loop = AttackedLoop::plant;
    c.plant.f_mat = Mat{{1.0, 0.0}, {2.0, -1.5}};
    c.plant.n_mat = Mat{{1.0}, {1.0}};
    c.plant.b_mat = Mat{{-1.06}, {-0.62}};
    c.plant.e_mat = Mat{{-0.82}, {-0.79}};
    c.plant.c_mat = Mat{{0.1, 0.0}, {0.0, 0.1}};
    c.plant.k_gain = Mat{{-40.0, 5.0}};

    c.plant_modes.push_back(PlantAttackMode::nominal());
    PlantAttackMode a1;
    a1.id = "a1";
    a1.attack = true;
    a1.l = Mat{{0.0}};
    a1.b_explicit = Mat{{0.34}, {0.78}};
    a1.e_explicit = Mat{{0.30}, {0.34}};
    c.plant_modes.push_back(a1);
    PlantAttackMode a2;
    a2.id = "a2";
    a2.attack = true;
    a2.l = Mat{{-0.1}};  // constructive route: A_a2 = F - 0.1 N K C
    a2.b_explicit = Mat{{0.48}, {0.92}};
    a2.e_explicit = Mat{{0.42}, {0.45}};
    c.plant_modes.push_back(a2);
    // the published A_a2 disagrees with the constructive route in entry
    // (1,2); both variants are carried and compared at validation time
    c.paper_variants["a2_printed_a"] = Mat{{1.4, -0.5}, {2.4, -1.55}};

    c.ctrl_modes.push_back(ControllerAttackMode::nominal(1));

    c.objective.kind = OutputCostKind::quadratic;
    c.objective.r = Mat{{2.0}};
    c.objective.q = Mat{{1.0, 0.0}, {0.0, 2.0}};
    c.objective.y_ref = {0.0, 0.0};

    c.adm = {0.1, 0.365, 2, 1.0};          // published kappa2; unstated values defaulted
    c.cert_adm = AdmissibilityParams{0.01, 0.17, 2, 0.2};  // feasible certificate budget
    c.schedule = {true, ScheduleStyle::periodic, 1, {}};
    c.attack_clock = AttackClock::automatic;
    c.exo = Exosystem::sine_rate({0.96}, 0.05, 2.0 * M_PI * 0.05);
    c.eps = {EpsPolicy::Kind::explicit_value, 20.0 * 0.0149};  // 20x the published ceiling
    c.horizon = 200.0;
    c.dt = 1e-3;
    c.paper_refs = {{"eps_star", 0.0149},
                    {"tail_bound", 21.0},
                    {"alpha", 1.71},
                    {"pole", -2.0}};
    return c;
}

/// Two-state plant with the gradient controller under two sign/scale attacks.
inline ScenarioConfig build_synthetic_dynamic() {
    ScenarioConfig c;
    c.name = "synthetic-dynamic";
    c.loop = AttackedLoop::controller;
    c.plant = PlantModel::from_closed_loop(Mat{{-3.0, 0.5}, {-2.0, -1.0}}, Mat{{1.0}, {1.0}},
                                           Mat{{1.0}, {1.0}}, Mat::identity(2));
    c.plant_modes.push_back(PlantAttackMode::nominal());
    c.ctrl_modes.push_back(ControllerAttackMode::nominal(1));
    c.ctrl_modes.push_back({"a1", true, Mat{{-1.0}}});
    c.ctrl_modes.push_back({"a2", true, Mat{{-2.0}}});

    c.objective.kind = OutputCostKind::quadratic;
    c.objective.r = Mat{{2.0}};
    c.objective.q = Mat{{1.0, 0.0}, {0.0, 2.0}};
    c.objective.y_ref = {0.0, 0.0};

    c.adm = {0.1, 0.33, 2, 1.0};
    c.cert_adm = AdmissibilityParams{0.01, 0.33, 1, 0.1};
    c.schedule = {true, ScheduleStyle::periodic, 1, {}};
    c.attack_clock = AttackClock::automatic;  // controller clock per the model
    c.exo = Exosystem::sine_rate({0.96}, 0.05, 2.0 * M_PI * 0.05);
    c.eps = {EpsPolicy::Kind::explicit_value, 20.0 * 0.0093};
    c.horizon = 200.0;
    c.dt = 1e-3;
    c.paper_refs = {{"eps_star", 0.0093}};
    return c;
}

namespace detail {
inline SwingGridSpec nine_bus_spec() {
    SwingGridSpec spec;
    // published susceptance data; diagonals recomputed so rows sum to zero
    spec.y_susceptance = repair_row_sums(Mat{
        {13.5776, 0.0, 0.0, -6.9783, -6.5993, 0.0},
        {0.0, 11.7898, 0.0, -4.3844, 0.0, -7.4054},
        {0.0, 0.0, 10.4895, 0.0, -4.2507, -6.2388},
        {-6.9783, -4.3844, 0.0, 11.3627, 0.0, 0.0},
        {-6.5993, 0.0, -4.2507, 0.0, 10.8500, 0.0},
        {0.0, -7.4054, -6.2388, 0.0, 0.0, 13.6441}});
    spec.inertia = {1.0, 1.0, 1.0, 0.1, 0.1, 0.1};
    spec.damping = Vec(6, 0.1);
    spec.b1 = Mat(6, 3);
    spec.e1 = Mat(6, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        spec.b1(i, i) = 1.0;      // generators at the first three nodes
        spec.e1(3 + i, i) = 1.0;  // disturbed loads at the remaining three
    }
    return spec;
}
}  // namespace detail

/// Frequency-regulation grid scenario: soft output box, piecewise loads,
/// attacks either on the gradient controller or on the rotational inertia of
/// one generator node.
inline ScenarioConfig build_power_grid(AttackedLoop which) {
    SwingGridSpec spec = detail::nine_bus_spec();
    SwingModel model = build_swing_model(spec);

    ScenarioConfig c;
    c.name = which == AttackedLoop::controller ? "power-grid-controller" : "power-grid-plant";
    c.loop = which;
    c.swing = spec;
    c.plant = PlantModel::from_closed_loop(model.a, model.b, model.e, model.c);

    c.plant_modes.push_back(PlantAttackMode::nominal());
    c.ctrl_modes.push_back(ControllerAttackMode::nominal(3));
    if (which == AttackedLoop::controller) {
        c.ctrl_modes.push_back({"a1", true, Mat::identity(3) * -1.0});
        c.ctrl_modes.push_back({"a2", true, Mat::identity(3) * -2.0});
        c.adm = {0.1, 0.05, 2, 0.5};
        c.cert_adm = AdmissibilityParams{1e-4, 0.002, 1, 0.005};
    } else {
        // inertia attacks: the third generator's coefficient is corrupted
        for (const auto& [id, m3] : {std::pair<const char*, double>{"a1", -101.0},
                                     {"a2", -105.0}}) {
            PlantAttackMode m;
            m.id = id;
            m.attack = true;
            Vec inertia = spec.inertia;
            inertia[2] = m3;
            m.a_explicit = swing_mode_a(spec, inertia, model.t_mat);
            c.plant_modes.push_back(std::move(m));
        }
        c.adm = {0.1, 0.1, 2, 1.0};
        c.cert_adm = AdmissibilityParams{1e-4, 1e-5, 1, 1e-4};
    }

    c.objective.kind = OutputCostKind::soft_box;
    c.objective.r = Mat::identity(3);
    c.objective.eta = 10.0;
    c.objective.y_lo = Vec(7, -5.0);
    c.objective.y_hi = Vec(7, 5.0);

    c.schedule = {true, ScheduleStyle::periodic, 1, {}};
    c.attack_clock = AttackClock::automatic;

    ExoSegment seg1;
    seg1.kind = ExoSegment::Kind::constant;
    seg1.duration = 100.0;
    seg1.w0 = {-0.9, -1.0, -1.25};
    ExoSegment seg2;
    seg2.kind = ExoSegment::Kind::cos_plus_one;
    seg2.c = -0.45;
    seg2.omega = 2.0 * M_PI * 0.05;
    seg2.dim = 3;
    c.exo = Exosystem::piecewise({seg1, seg2});

    // the published "1e5 eps*" gain is not reproducible from the stated
    // inputs (the certificate here is far smaller); the run uses a recorded
    // explicit gain and the certificate is reported alongside
    c.eps = {EpsPolicy::Kind::explicit_value, 0.01};
    c.horizon = 200.0;
    c.dt = 1e-4;
    c.paper_refs = {{"eps_multiple", 1e5}};
    return c;
}

// ---------------------------------------------------------------------------
// Validation (structural assumptions)
// ---------------------------------------------------------------------------

struct ValidationReport {
    bool ok = true;
    bool nominal_hurwitz = false;
    double nominal_max_re = 0.0;
    std::optional<EquilibriumCheck> common_eq;
    std::optional<DestabilizingCheck> plant_destab;
    std::optional<ControllerModeCheck> ctrl_check;
    std::vector<std::string> notes;
};

inline ValidationReport validate_scenario(const ScenarioConfig& c) {
    ValidationReport rep;
    c.plant.check_dims();
    auto nominal = closed_loop(c.plant, c.plant_modes.front());
    auto hz = is_hurwitz(nominal.a);
    rep.nominal_hurwitz = hz.hurwitz;
    rep.nominal_max_re = hz.max_real_part;
    if (!hz.hurwitz) {
        rep.ok = false;
        rep.notes.push_back("nominal closed loop is not Hurwitz");
    }

    if (c.loop == AttackedLoop::plant) {
        rep.plant_destab = check_attack_destabilizing(c.plant, c.plant_modes);
        if (!rep.plant_destab->all_destabilizing) {
            rep.ok = false;
            rep.notes.push_back("a plant attack mode is not destabilizing");
        }
        rep.common_eq = check_common_equilibrium(
            c.plant, c.plant_modes,
            equilibrium_probe_samples(c.plant.input_dim(), c.plant.dist_dim()));
        if (!rep.common_eq->common)
            rep.notes.push_back("common-equilibrium deviation " +
                                std::to_string(rep.common_eq->worst_deviation) +
                                " exceeds the strict tolerance (mode '" +
                                rep.common_eq->worst_mode + "')");
    } else {
        rep.ctrl_check = check_controller_modes(c.ctrl_modes);
        if (!rep.ctrl_check->all_ok) {
            rep.ok = false;
            rep.notes.push_back("a controller attack map has no eigenvalue with negative real part");
        }
    }

    // published-variant cross-checks (e.g. the disagreeing printed matrix)
    for (const auto& [key, printed] : c.paper_variants) {
        if (key == "a2_printed_a") {
            const auto& a2 = find_mode(c.plant_modes, "a2");
            auto mm = closed_loop(c.plant, a2);
            const double dev = (mm.a - printed).max_abs();
            rep.notes.push_back(
                "mode 'a2': constructive matrix differs from the printed variant by " +
                std::to_string(dev) + " (max-abs); the constructive one satisfies the "
                "common-equilibrium data and is used for simulation");
        }
    }
    return rep;
}

}  // namespace hybris
