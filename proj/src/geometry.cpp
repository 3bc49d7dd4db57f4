#include "msgat/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace msgat::geo {

namespace {

double clamp_artanh_arg(double t) {
    const double lim = 1.0 - kArtanhMargin;
    if (t > lim) return lim;
    if (t < -lim) return -lim;
    return t;
}

void check_dim(const Vec& a, const Vec& b, const char* op) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

void check_space(const BallPoint& a, const BallPoint& b, const char* op) {
    if (!(a.space == b.space))
        throw std::invalid_argument(std::string(op) + ": points from mismatched spaces");
}

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

bool contains(const CurvedSpace& s, const Vec& x) {
    return s.c * dot(x, x) <= 1.0 - s.eps_boundary;
}

Vec project_to_ball(const CurvedSpace& s, const Vec& v) {
    if (!all_finite(v)) throw std::invalid_argument("project_to_ball: non-finite input");
    double sq = s.c * dot(v, v);
    if (sq <= 1.0 - s.eps_boundary) return v;
    double target = (1.0 - s.eps_boundary) / std::sqrt(s.c);
    double scale = target / std::max(norm(v), kNormFloor);
    Vec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;
    return out;
}

Vec mobius_add(const CurvedSpace& s, const Vec& x, const Vec& y) {
    check_dim(x, y, "mobius_add");
    const double c = s.c;
    double xy = dot(x, y);
    double x2 = dot(x, x);
    double y2 = dot(y, y);
    double cx = 1.0 + 2.0 * c * xy + c * y2;
    double cy = 1.0 - c * x2;
    double den = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
    Vec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = (cx * x[i] + cy * y[i]) / den;
    return project_to_ball(s, out);
}

Vec exp_map(const CurvedSpace& s, const Vec& x, const Vec& v) {
    check_dim(x, v, "exp_map");
    if (!all_finite(v) || !all_finite(x)) throw std::invalid_argument("exp_map: non-finite input");
    double nv = norm(v);
    if (nv == 0.0) return project_to_ball(s, x);  // continuity limit at v = 0
    double sc = std::sqrt(s.c);
    double lam = 2.0 / (1.0 - s.c * dot(x, x));
    double coef = std::tanh(sc * lam * nv / 2.0) / (sc * std::max(nv, kNormFloor));
    Vec w(v.size());
    for (size_t i = 0; i < v.size(); ++i) w[i] = coef * v[i];
    return mobius_add(s, x, w);
}

Vec log_map(const CurvedSpace& s, const Vec& x, const Vec& y) {
    check_dim(x, y, "log_map");
    if (s.c * dot(y, y) >= 1.0) throw std::invalid_argument("log_map: y outside the ball");
    Vec mx(x.size());
    for (size_t i = 0; i < x.size(); ++i) mx[i] = -x[i];
    Vec d = mobius_add(s, mx, y);
    double nd = norm(d);
    if (nd == 0.0) return Vec(x.size(), 0.0);  // continuity limit at x = y
    double sc = std::sqrt(s.c);
    double lam = 2.0 / (1.0 - s.c * dot(x, x));
    double a = std::atanh(clamp_artanh_arg(sc * nd));
    double coef = (2.0 / (sc * lam)) * a / std::max(nd, kNormFloor);
    Vec out(d.size());
    for (size_t i = 0; i < d.size(); ++i) out[i] = coef * d[i];
    return out;
}

Vec exp0(const CurvedSpace& s, const Vec& v) { return exp_map(s, Vec(v.size(), 0.0), v); }

Vec log0(const CurvedSpace& s, const Vec& y) { return log_map(s, Vec(y.size(), 0.0), y); }

Vec mobius_matvec(const CurvedSpace& s, const Mat& m, const Vec& x) {
    if (static_cast<size_t>(m.cols) != x.size())
        throw std::invalid_argument("mobius_matvec: shape mismatch");
    Vec t = log0(s, x);
    Vec mt(static_cast<size_t>(m.rows), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m.cols; ++j) acc += m.at(i, j) * t[static_cast<size_t>(j)];
        mt[static_cast<size_t>(i)] = acc;
    }
    return exp0(s, mt);
}

double apply_activation(Activation a, double slope, double x) {
    switch (a) {
        case Activation::Identity:
            return x;
        case Activation::LeakyRelu:
            return x >= 0.0 ? x : slope * x;
        case Activation::Tanh:
            return std::tanh(x);
    }
    return x;
}

Vec hyperbolic_activation(const CurvedSpace& s, Activation a, double slope, const Vec& x) {
    Vec t = log0(s, x);
    for (auto& u : t) u = apply_activation(a, slope, u);
    return exp0(s, t);
}

double distance(const CurvedSpace& s, const Vec& x, const Vec& y) {
    Vec mx(x.size());
    for (size_t i = 0; i < x.size(); ++i) mx[i] = -x[i];
    Vec d = mobius_add(s, mx, y);
    double sc = std::sqrt(s.c);
    return (2.0 / sc) * std::atanh(clamp_artanh_arg(sc * norm(d)));
}

BallPoint make_point(const CurvedSpace& s, Vec coords) {
    return BallPoint{project_to_ball(s, std::move(coords)), s};
}

BallPoint mobius_add(const BallPoint& x, const BallPoint& y) {
    check_space(x, y, "mobius_add");
    return BallPoint{mobius_add(x.space, x.coords, y.coords), x.space};
}

BallPoint exp_map(const BallPoint& x, const TangentVector& v) {
    if (v.base != x.coords)
        throw std::invalid_argument("exp_map: tangent vector not based at x");
    return BallPoint{exp_map(x.space, x.coords, v.coords), x.space};
}

TangentVector log_map(const BallPoint& x, const BallPoint& y) {
    check_space(x, y, "log_map");
    return TangentVector{log_map(x.space, x.coords, y.coords), x.coords};
}

BallPoint mobius_matvec(const Mat& m, const BallPoint& x) {
    return BallPoint{mobius_matvec(x.space, m, x.coords), x.space};
}

BallPoint hyperbolic_activation(Activation a, double slope, const BallPoint& x) {
    return BallPoint{hyperbolic_activation(x.space, a, slope, x.coords), x.space};
}

double distance(const BallPoint& x, const BallPoint& y) {
    check_space(x, y, "distance");
    return distance(x.space, x.coords, y.coords);
}

}  // namespace msgat::geo
