#pragma once

// Disturbance generators. Each kind exposes the signal value and its rate as
// explicit functions of time; segments can be chained piecewise.

#include <cmath>
#include <vector>

#include "hybris/matrix.hpp"

namespace hybris {

struct ExoSegment {
    enum class Kind { constant, sine_rate, cos_plus_one };
    Kind kind = Kind::constant;
    double duration = std::numeric_limits<double>::infinity();
    Vec w0;              // constant value / sine_rate initial value
    double a = 0.0;      // sine_rate: dw_i/dt = a sin(omega s)
    double omega = 0.0;  // angular frequency
    double c = 0.0;      // cos_plus_one: w_i(s) = c (cos(omega s) + 1)
    std::size_t dim = 1; // used by cos_plus_one (w0 fixes it otherwise)
};

class Exosystem {
public:
    static Exosystem constant(Vec w0) {
        ExoSegment s;
        s.kind = ExoSegment::Kind::constant;
        s.w0 = std::move(w0);
        return Exosystem({s});
    }

    /// dw_i/dt = a sin(omega t) from w(0) = w0, so w_i(t) = w0_i + (a/omega)(1 - cos(omega t)).
    static Exosystem sine_rate(Vec w0, double a, double omega) {
        ExoSegment s;
        s.kind = ExoSegment::Kind::sine_rate;
        s.w0 = std::move(w0);
        s.a = a;
        s.omega = omega;
        return Exosystem({s});
    }

    static Exosystem piecewise(std::vector<ExoSegment> segments) {
        return Exosystem(std::move(segments));
    }

    std::size_t dim() const {
        const auto& s = segments_.front();
        return s.kind == ExoSegment::Kind::cos_plus_one ? s.dim : s.w0.size();
    }

    Vec value(double t) const {
        auto [seg, s] = locate(t);
        switch (seg->kind) {
            case ExoSegment::Kind::constant:
                return seg->w0;
            case ExoSegment::Kind::sine_rate: {
                Vec w = seg->w0;
                const double shift =
                    seg->omega != 0.0 ? (seg->a / seg->omega) * (1.0 - std::cos(seg->omega * s))
                                      : seg->a * s;
                for (double& v : w) v += shift;
                return w;
            }
            case ExoSegment::Kind::cos_plus_one:
                return Vec(seg->dim, seg->c * (std::cos(seg->omega * s) + 1.0));
        }
        return {};
    }

    Vec rate(double t) const {
        auto [seg, s] = locate(t);
        switch (seg->kind) {
            case ExoSegment::Kind::constant:
                return Vec(seg->w0.size(), 0.0);
            case ExoSegment::Kind::sine_rate:
                return Vec(seg->w0.size(), seg->a * std::sin(seg->omega * s));
            case ExoSegment::Kind::cos_plus_one:
                return Vec(seg->dim, -seg->c * seg->omega * std::sin(seg->omega * s));
        }
        return {};
    }

    /// Conservative bound on sup_t ||w(t)||.
    double w_bar() const {
        double worst = 0.0;
        for (const auto& seg : segments_) {
            switch (seg.kind) {
                case ExoSegment::Kind::constant:
                    worst = std::max(worst, norm2(seg.w0));
                    break;
                case ExoSegment::Kind::sine_rate: {
                    const double swing =
                        seg.omega != 0.0 ? std::abs(2.0 * seg.a / seg.omega)
                                         : std::abs(seg.a) * seg.duration;
                    worst = std::max(worst, norm2(seg.w0) + swing * std::sqrt(double(seg.w0.size())));
                    break;
                }
                case ExoSegment::Kind::cos_plus_one:
                    worst = std::max(worst, 2.0 * std::abs(seg.c) * std::sqrt(double(seg.dim)));
                    break;
            }
        }
        return worst;
    }

    const std::vector<ExoSegment>& segments() const { return segments_; }

private:
    explicit Exosystem(std::vector<ExoSegment> segs) : segments_(std::move(segs)) {
        if (segments_.empty()) throw DimensionError("exosystem: needs at least one segment");
    }

    std::pair<const ExoSegment*, double> locate(double t) const {
        double start = 0.0;
        for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
            if (t < start + segments_[i].duration) return {&segments_[i], t - start};
            start += segments_[i].duration;
        }
        return {&segments_.back(), t - start};
    }

    std::vector<ExoSegment> segments_;
};

}  // namespace hybris
