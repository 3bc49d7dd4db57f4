#include "msgat/geometry_ad.hpp"

#include <cmath>
#include <stdexcept>

namespace msgat::geo::ad {

namespace {

// current (forward) squared norm, read off the tape for branch decisions
double sq_norm_now(Var x) {
    const auto& v = x.val().v;
    double s = 0.0;
    for (double u : v) s += u * u;
    return s;
}

Var artanh_clamped(Tape& t, Var u) {
    return t.artanh(t.clamp(u, -1.0 + kArtanhMargin, 1.0 - kArtanhMargin));
}

}  // namespace

Var project_to_ball(Tape& t, Var x, Var c, double eps_boundary) {
    double c_now = c.scalar();
    if (c_now * sq_norm_now(x) <= 1.0 - eps_boundary) return x;
    Var n = t.norm(x);
    Var target = t.div(t.constant(1.0 - eps_boundary), t.sqrt(c));
    return t.mul(x, t.div(target, n));
}

Var mobius_add(Tape& t, Var x, Var y, Var c, double eps_boundary) {
    Var xy = t.inner(x, y);
    Var x2 = t.inner(x, x);
    Var y2 = t.inner(y, y);
    Var two_cxy = t.mul_const(t.mul(c, xy), 2.0);
    Var coef_x = t.add_const(t.add(two_cxy, t.mul(c, y2)), 1.0);
    Var coef_y = t.sub(t.constant(1.0), t.mul(c, x2));
    Var den = t.add_const(t.add(two_cxy, t.mul(t.mul(c, c), t.mul(x2, y2))), 1.0);
    Var num = t.add(t.mul(coef_x, x), t.mul(coef_y, y));
    return project_to_ball(t, t.div(num, den), c, eps_boundary);
}

Var exp_map(Tape& t, Var x, Var v, Var c, double eps_boundary) {
    // lambda_x = 2 / (1 - c ||x||^2)
    Var lam = t.div(t.constant(2.0), t.sub(t.constant(1.0), t.mul(c, t.inner(x, x))));
    Var n = t.norm(v);
    Var sc = t.sqrt(c);
    Var scn = t.mul(sc, n);
    Var arg = t.mul_const(t.mul(lam, scn), 0.5);
    Var coef = t.div(t.tanh(arg), scn);
    Var w = t.mul(coef, v);
    return mobius_add(t, x, w, c, eps_boundary);
}

Var log_map(Tape& t, Var x, Var y, Var c, double eps_boundary) {
    Var d = mobius_add(t, t.mul_const(x, -1.0), y, c, eps_boundary);
    Var lam = t.div(t.constant(2.0), t.sub(t.constant(1.0), t.mul(c, t.inner(x, x))));
    Var n = t.norm(d);
    Var sc = t.sqrt(c);
    Var a = artanh_clamped(t, t.mul(sc, n));
    Var coef = t.div(t.mul_const(t.div(a, n), 2.0), t.mul(sc, lam));
    return t.mul(coef, d);
}

Var exp0(Tape& t, Var v, Var c, double eps_boundary) {
    Var n = t.norm(v);
    Var sc = t.sqrt(c);
    Var scn = t.mul(sc, n);
    Var coef = t.div(t.tanh(scn), scn);
    return project_to_ball(t, t.mul(coef, v), c, eps_boundary);
}

Var log0(Tape& t, Var y, Var c) {
    Var n = t.norm(y);
    Var sc = t.sqrt(c);
    Var a = artanh_clamped(t, t.mul(sc, n));
    Var coef = t.div(a, t.mul(sc, n));
    return t.mul(coef, y);
}

Var mobius_matvec(Tape& t, Var m, Var x, Var c, double eps_boundary) {
    return exp0(t, t.matvec(m, log0(t, x, c)), c, eps_boundary);
}

Var hyperbolic_activation(Tape& t, Var x, Var c, Activation act, double slope,
                          double eps_boundary) {
    Var u = log0(t, x, c);
    switch (act) {
        case Activation::Identity:
            break;
        case Activation::LeakyRelu:
            u = t.leaky_relu(u, slope);
            break;
        case Activation::Tanh:
            u = t.tanh(u);
            break;
    }
    return exp0(t, u, c, eps_boundary);
}

}  // namespace msgat::geo::ad
