#pragma once

// LTI plant with a static inner loop, plus the family of attacked plant
// matrices. An attack mode is given either by multiplicative maps
// (L, L^b, L^e) acting on the loop, or by explicit (A, B, E) matrices for
// experiment data that is only published in assembled form.

#include <optional>
#include <string>
#include <vector>

#include "hybris/matrix.hpp"

namespace hybris {

struct PlantModel {
    Mat f_mat;   // n x n
    Mat n_mat;   // n x m_v
    Mat b_mat;   // n x m
    Mat e_mat;   // n x q
    Mat c_mat;   // p x n
    Mat k_gain;  // m_v x p

    std::size_t state_dim() const { return f_mat.rows(); }
    std::size_t input_dim() const { return b_mat.cols(); }
    std::size_t dist_dim() const { return e_mat.cols(); }
    std::size_t output_dim() const { return c_mat.rows(); }

    /// Closed-loop matrix of the nominal inner loop, A = F + N K C.
    Mat nominal_a() const { return f_mat + n_mat * k_gain * c_mat; }

    /// A plant given directly as (A, B, E, C), with no separate inner loop.
    static PlantModel from_closed_loop(const Mat& a, const Mat& b, const Mat& e, const Mat& c) {
        PlantModel p;
        p.f_mat = a;
        p.n_mat = Mat::zeros(a.rows(), 1);
        p.k_gain = Mat::zeros(1, c.rows());
        p.b_mat = b;
        p.e_mat = e;
        p.c_mat = c;
        return p;
    }

    void check_dims() const {
        const std::size_t n = f_mat.rows();
        if (!f_mat.square()) throw DimensionError("plant: F not square");
        if (n_mat.rows() != n) throw DimensionError("plant: N row count");
        if (b_mat.rows() != n) throw DimensionError("plant: B row count");
        if (e_mat.rows() != n) throw DimensionError("plant: E row count");
        if (c_mat.cols() != n) throw DimensionError("plant: C column count");
        if (k_gain.rows() != n_mat.cols() || k_gain.cols() != c_mat.rows())
            throw DimensionError("plant: K dimensions");
    }
};

struct PlantAttackMode {
    std::string id;
    bool attack = false;

    // Route 1: maps of Eq-style form v = L K y, B_sigma = L^b B, E_sigma = L^e E.
    std::optional<Mat> l;    // m_v x m_v
    std::optional<Mat> l_b;  // n x n
    std::optional<Mat> l_e;  // n x n

    // Route 2: assembled matrices override the maps when present.
    std::optional<Mat> a_explicit;
    std::optional<Mat> b_explicit;
    std::optional<Mat> e_explicit;

    static PlantAttackMode nominal(const std::string& mode_id = "s") {
        PlantAttackMode m;
        m.id = mode_id;
        return m;
    }
};

struct ModeMatrices {
    Mat a, b, e;
};

/// Assembles (A_sigma, B_sigma, E_sigma) for one mode.
inline ModeMatrices closed_loop(const PlantModel& plant, const PlantAttackMode& mode) {
    plant.check_dims();
    ModeMatrices mm;
    if (mode.a_explicit) {
        mm.a = *mode.a_explicit;
    } else if (mode.l) {
        if (mode.l->rows() != plant.n_mat.cols() || mode.l->cols() != plant.k_gain.rows())
            throw DimensionError("mode '" + mode.id + "': L dimensions");
        mm.a = plant.f_mat + plant.n_mat * (*mode.l) * plant.k_gain * plant.c_mat;
    } else {
        mm.a = plant.nominal_a();
    }
    mm.b = mode.b_explicit ? *mode.b_explicit
                           : (mode.l_b ? (*mode.l_b) * plant.b_mat : plant.b_mat);
    mm.e = mode.e_explicit ? *mode.e_explicit
                           : (mode.l_e ? (*mode.l_e) * plant.e_mat : plant.e_mat);
    if (mm.a.rows() != plant.state_dim() || mm.b.rows() != plant.state_dim() ||
        mm.e.rows() != plant.state_dim())
        throw DimensionError("mode '" + mode.id + "': assembled matrix dimensions");
    return mm;
}

struct SteadyStateMaps {
    Mat g;  // -C A^-1 B
    Mat h;  // -C A^-1 E
};

inline SteadyStateMaps steady_state_maps(const Mat& a, const Mat& b, const Mat& e, const Mat& c) {
    Mat ainv_b, ainv_e;
    try {
        ainv_b = solve_linear(a, b);
        ainv_e = solve_linear(a, e);
    } catch (const SingularMatrixError&) {
        throw SingularMatrixError("steady_state_maps: A not invertible");
    }
    return {c * ainv_b * -1.0, c * ainv_e * -1.0};
}

/// x_bar(u, w) = -A^-1 (B u + E w).
inline Vec equilibrium_state(const Mat& a, const Mat& b, const Mat& e, const Vec& u, const Vec& w) {
    Vec rhs = vec_add(b.apply(u), e.apply(w));
    Vec x = solve_linear(a, rhs);
    for (double& v : x) v = -v;
    return x;
}

struct EquilibriumCheck {
    bool common = false;
    double worst_deviation = 0.0;
    std::string worst_mode;
};

/// Verifies that all modes share the equilibrium map, probing the given
/// (u, w) samples against the first mode in the list.
inline EquilibriumCheck check_common_equilibrium(const PlantModel& plant,
                                                 const std::vector<PlantAttackMode>& modes,
                                                 const std::vector<std::pair<Vec, Vec>>& samples,
                                                 double tol_eq = 1e-8) {
    EquilibriumCheck out;
    if (modes.empty()) {
        out.common = true;
        return out;
    }
    std::vector<ModeMatrices> mats;
    mats.reserve(modes.size());
    for (const auto& m : modes) {
        try {
            mats.push_back(closed_loop(plant, m));
            inverse(mats.back().a);
        } catch (const SingularMatrixError&) {
            throw SingularMatrixError("check_common_equilibrium: mode '" + m.id +
                                      "' has a singular A");
        }
    }
    for (const auto& [u, w] : samples) {
        Vec ref = equilibrium_state(mats[0].a, mats[0].b, mats[0].e, u, w);
        for (std::size_t k = 1; k < mats.size(); ++k) {
            Vec xk = equilibrium_state(mats[k].a, mats[k].b, mats[k].e, u, w);
            const double dev = norm2(vec_sub(xk, ref));
            if (dev > out.worst_deviation) {
                out.worst_deviation = dev;
                out.worst_mode = modes[k].id;
            }
        }
    }
    out.common = out.worst_deviation <= tol_eq;
    return out;
}

/// Default probe set: zero plus every input/disturbance basis vector.
inline std::vector<std::pair<Vec, Vec>> equilibrium_probe_samples(std::size_t m, std::size_t q) {
    std::vector<std::pair<Vec, Vec>> s;
    s.emplace_back(Vec(m, 0.0), Vec(q, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        Vec u(m, 0.0);
        u[i] = 1.0;
        s.emplace_back(u, Vec(q, 0.0));
    }
    for (std::size_t j = 0; j < q; ++j) {
        Vec w(q, 0.0);
        w[j] = 1.0;
        s.emplace_back(Vec(m, 0.0), w);
    }
    return s;
}

struct ModeDestabilizingReport {
    std::string id;
    bool invertible = false;
    double max_real_part = 0.0;
    double lambda_max_sym = 0.0;  // lambda_max(A_sigma^T + A_sigma)
    bool destabilizing = false;
};

struct DestabilizingCheck {
    std::vector<ModeDestabilizingReport> per_mode;
    bool all_destabilizing = true;
    std::optional<double> lambda_bar_rhat;  // max over attack modes; empty if none
};

/// Per-mode verdict on whether each attack mode is destabilizing: A_sigma
/// invertible with an eigenvalue in the open right half plane, together with
/// the symmetric-part bound used by the static-loop certificates.
inline DestabilizingCheck check_attack_destabilizing(const PlantModel& plant,
                                                     const std::vector<PlantAttackMode>& modes) {
    DestabilizingCheck out;
    for (const auto& m : modes) {
        if (!m.attack) continue;
        ModeDestabilizingReport rep;
        rep.id = m.id;
        ModeMatrices mm = closed_loop(plant, m);
        try {
            inverse(mm.a);
            rep.invertible = true;
        } catch (const SingularMatrixError&) {
            rep.invertible = false;
        }
        rep.max_real_part = is_hurwitz(mm.a).max_real_part;
        rep.lambda_max_sym = sym_eig_bounds(mm.a + mm.a.transpose()).lambda_max;
        rep.destabilizing = rep.invertible && rep.max_real_part > 0.0 && rep.lambda_max_sym > 0.0;
        out.all_destabilizing = out.all_destabilizing && rep.destabilizing;
        if (!out.lambda_bar_rhat || rep.lambda_max_sym > *out.lambda_bar_rhat)
            out.lambda_bar_rhat = rep.lambda_max_sym;
        out.per_mode.push_back(std::move(rep));
    }
    if (out.per_mode.empty()) out.all_destabilizing = true;  // vacuously, reported as n/a
    return out;
}

/// Mode lookup by id, failing fast on unknown ids.
inline const PlantAttackMode& find_mode(const std::vector<PlantAttackMode>& modes,
                                        const std::string& id) {
    for (const auto& m : modes)
        if (m.id == id) return m;
    throw UnknownModeError("unknown plant mode id '" + id + "'");
}

}  // namespace hybris
