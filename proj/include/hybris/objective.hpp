#pragma once

// Steady-state cost f(u, w) = f_u(u) + f_y(Gu + Hw) with a quadratic input
// term u^T R u and either a quadratic output term (y - y_ref)^T Q (y - y_ref)
// or a soft box penalty eta * sum_i max{y_lo_i - y_i, y_i - y_hi_i, 0}^2.

#include <cmath>
#include <string>
#include <vector>

#include "hybris/matrix.hpp"

namespace hybris {

enum class OutputCostKind { quadratic, soft_box };

struct CostConstants {
    double mu = 0.0;     // PL constant, convention 0.5*||grad f||^2 >= mu (f - f*)
    double ell = 0.0;    // Lipschitz constant of grad_u f
    double ell_u = 0.0;
    double ell_y = 0.0;
};

class Objective {
public:
    static Objective quadratic(Mat r_cost, Mat q_cost, Vec y_ref, Mat g, Mat h) {
        Objective o;
        o.kind_ = OutputCostKind::quadratic;
        o.r_ = std::move(r_cost);
        o.q_ = std::move(q_cost);
        o.y_ref_ = std::move(y_ref);
        o.g_ = std::move(g);
        o.h_ = std::move(h);
        o.check();
        return o;
    }

    static Objective soft_box(Mat r_cost, double eta, Vec y_lo, Vec y_hi, Mat g, Mat h) {
        Objective o;
        o.kind_ = OutputCostKind::soft_box;
        o.r_ = std::move(r_cost);
        o.eta_ = eta;
        o.y_lo_ = std::move(y_lo);
        o.y_hi_ = std::move(y_hi);
        o.g_ = std::move(g);
        o.h_ = std::move(h);
        o.check();
        return o;
    }

    OutputCostKind kind() const { return kind_; }
    const Mat& g() const { return g_; }
    const Mat& h() const { return h_; }
    const Mat& r_cost() const { return r_; }
    const Mat& q_cost() const { return q_; }
    double eta() const { return eta_; }
    std::size_t input_dim() const { return r_.rows(); }
    std::size_t output_dim() const { return g_.rows(); }

    double f_u(const Vec& u) const { return dot(u, r_.apply(u)); }

    double f_y(const Vec& y) const {
        if (kind_ == OutputCostKind::quadratic) {
            Vec d = vec_sub(y, y_ref_);
            return dot(d, q_.apply(d));
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double ex = std::max({y_lo_[i] - y[i], y[i] - y_hi_[i], 0.0});
            acc += ex * ex;
        }
        return eta_ * acc;
    }

    double value(const Vec& u, const Vec& w) const { return f_u(u) + f_y(output(u, w)); }

    Vec output(const Vec& u, const Vec& w) const { return vec_add(g_.apply(u), h_.apply(w)); }

    Vec grad_fu(const Vec& u) const { return vec_scale(r_.apply(u), 2.0); }

    Vec grad_fy(const Vec& y) const {
        if (kind_ == OutputCostKind::quadratic)
            return vec_scale(q_.apply(vec_sub(y, y_ref_)), 2.0);
        Vec grad(y.size(), 0.0);
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] > y_hi_[i])
                grad[i] = 2.0 * eta_ * (y[i] - y_hi_[i]);
            else if (y[i] < y_lo_[i])
                grad[i] = 2.0 * eta_ * (y[i] - y_lo_[i]);
        }
        return grad;
    }

    /// grad_u f(u, w) = grad f_u(u) + G^T grad f_y(Gu + Hw).
    Vec grad_f(const Vec& u, const Vec& w) const {
        return vec_add(grad_fu(u), g_.transpose().apply(grad_fy(output(u, w))));
    }

    /// Gradient as seen through a measured output y (the feedback law).
    Vec grad_from_output(const Vec& u, const Vec& y) const {
        return vec_add(grad_fu(u), g_.transpose().apply(grad_fy(y)));
    }

    CostConstants constants() const {
        CostConstants cc;
        cc.ell_u = 2.0 * sym_eig_bounds(r_).lambda_max;
        if (kind_ == OutputCostKind::quadratic) {
            Mat hess = (r_ + g_.transpose() * q_ * g_) * 2.0;
            EigBounds b = sym_eig_bounds(hess);
            cc.mu = b.lambda_min;
            cc.ell = b.lambda_max;
            cc.ell_y = 2.0 * sym_eig_bounds(q_).lambda_max;
        } else {
            // conservative PL bound from the strongly convex input term
            cc.mu = 2.0 * sym_eig_bounds(r_).lambda_min;
            cc.ell_y = 2.0 * eta_;
            const double ng = spectral_norm(g_);
            cc.ell = cc.ell_u + cc.ell_y * ng * ng;
        }
        return cc;
    }

    /// Minimizer of u -> f(u, w): closed form in the quadratic case, descent
    /// oracle (to ||grad|| <= grad_tol) in the soft-box case.
    Vec optimal_input(const Vec& w, const Vec* warm_start = nullptr,
                      double grad_tol = 1e-10, std::size_t max_iter = 500000) const {
        if (kind_ == OutputCostKind::quadratic) {
            Mat normal = r_ + g_.transpose() * q_ * g_;
            Vec target = vec_sub(y_ref_, h_.apply(w));
            return solve_linear(normal, g_.transpose().apply(q_.apply(target)));
        }
        CostConstants cc = constants();
        const double step = 1.0 / cc.ell;
        Vec u = warm_start ? *warm_start : Vec(input_dim(), 0.0);
        for (std::size_t it = 0; it < max_iter; ++it) {
            Vec grad = grad_f(u, w);
            if (norm2(grad) <= grad_tol) return u;
            u = vec_sub(u, vec_scale(grad, step));
        }
        throw MaxIterError("optimal_input: descent oracle budget exhausted");
    }

    /// Bound U_wbar on ||grad_w h(w)|| over the sampled disturbance range.
    double optimal_sensitivity_bound(const std::vector<Vec>& w_samples) const {
        if (kind_ == OutputCostKind::quadratic) {
            Mat normal = r_ + g_.transpose() * q_ * g_;
            Mat sens = solve_linear(normal, g_.transpose() * q_ * h_);
            return spectral_norm(sens);
        }
        double worst = 0.0;
        for (const Vec& w : w_samples) {
            const double hfd = 1e-6 * (1.0 + norm2(w));
            Mat jac(input_dim(), w.size());
            for (std::size_t j = 0; j < w.size(); ++j) {
                Vec wp = w, wm = w;
                wp[j] += hfd;
                wm[j] -= hfd;
                Vec up = optimal_input(wp);
                Vec um = optimal_input(wm);
                for (std::size_t i = 0; i < input_dim(); ++i)
                    jac(i, j) = (up[i] - um[i]) / (2.0 * hfd);
            }
            worst = std::max(worst, spectral_norm(jac));
        }
        return worst * 1.1;  // 10% safety margin on the finite-difference estimate
    }

private:
    void check() const {
        if (!r_.square()) throw DimensionError("objective: R not square");
        if (sym_eig_bounds(r_).lambda_min <= 0.0)
            throw DimensionError("objective: input weight R must be positive definite");
        if (g_.cols() != r_.rows()) throw DimensionError("objective: G columns vs input dim");
        if (h_.rows() != g_.rows()) throw DimensionError("objective: H rows vs output dim");
        if (kind_ == OutputCostKind::quadratic) {
            if (!q_.square() || q_.rows() != g_.rows())
                throw DimensionError("objective: Q dimensions");
            if (y_ref_.size() != g_.rows()) throw DimensionError("objective: y_ref size");
        } else {
            if (eta_ <= 0.0) throw DimensionError("objective: eta must be positive");
            if (y_lo_.size() != g_.rows() || y_hi_.size() != g_.rows())
                throw DimensionError("objective: box bound sizes");
            for (std::size_t i = 0; i < y_lo_.size(); ++i)
                if (!(y_lo_[i] < y_hi_[i]))
                    throw DimensionError("objective: requires y_lo < y_hi componentwise");
        }
    }

    OutputCostKind kind_ = OutputCostKind::quadratic;
    Mat r_, q_, g_, h_;
    Vec y_ref_, y_lo_, y_hi_;
    double eta_ = 0.0;
};

}  // namespace hybris
