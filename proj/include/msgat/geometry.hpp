#pragma once

#include <vector>

#include "msgat/tensor.hpp"

namespace msgat::geo {

// artanh inputs are clamped to [-1 + kArtanhMargin, 1 - kArtanhMargin]
inline constexpr double kArtanhMargin = 1e-15;
// norms are floored at this value inside divisions
inline constexpr double kNormFloor = 1e-15;

using Vec = std::vector<double>;
using Mat = ad::Tensor;

// A Poincare ball of curvature -c (c > 0), radius 1/sqrt(c). Points are kept
// inside the shell c*||x||^2 <= 1 - eps_boundary.
struct CurvedSpace {
    double c = 1.0;
    double eps_boundary = 1e-5;

    bool operator==(const CurvedSpace&) const = default;
};

struct BallPoint {
    Vec coords;
    CurvedSpace space;
};

struct TangentVector {
    Vec coords;
    Vec base;  // tangency point; the origin everywhere in this project
};

// --- raw-vector kernels -----------------------------------------------------

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

// Identity if c*||v||^2 <= 1 - eps, otherwise rescaled so c*||v||^2 = (1-eps)^2.
// Throws on non-finite input.
Vec project_to_ball(const CurvedSpace& s, const Vec& v);

Vec mobius_add(const CurvedSpace& s, const Vec& x, const Vec& y);

// General-base maps. exp_map(x, 0) = x and log_map(x, x) = 0 by explicit branch.
Vec exp_map(const CurvedSpace& s, const Vec& x, const Vec& v);
Vec log_map(const CurvedSpace& s, const Vec& x, const Vec& y);
Vec exp0(const CurvedSpace& s, const Vec& v);
Vec log0(const CurvedSpace& s, const Vec& y);

// exp0(M . log0(x)); output lives in an M.rows-dimensional ball of the same curvature
Vec mobius_matvec(const CurvedSpace& s, const Mat& m, const Vec& x);

enum class Activation { Identity, LeakyRelu, Tanh };
double apply_activation(Activation a, double slope, double x);

// exp0(sigma(log0(x))) elementwise in the tangent space at the origin
Vec hyperbolic_activation(const CurvedSpace& s, Activation a, double slope, const Vec& x);

// (2/sqrt(c)) * artanh(sqrt(c) * ||(-x) (+) y||)
double distance(const CurvedSpace& s, const Vec& x, const Vec& y);

bool contains(const CurvedSpace& s, const Vec& x);

// --- typed wrappers (validate dimensions and space identity) -----------------

BallPoint make_point(const CurvedSpace& s, Vec coords);  // projects into the shell
BallPoint mobius_add(const BallPoint& x, const BallPoint& y);
BallPoint exp_map(const BallPoint& x, const TangentVector& v);
TangentVector log_map(const BallPoint& x, const BallPoint& y);
BallPoint mobius_matvec(const Mat& m, const BallPoint& x);
BallPoint hyperbolic_activation(Activation a, double slope, const BallPoint& x);
double distance(const BallPoint& x, const BallPoint& y);

}  // namespace msgat::geo
