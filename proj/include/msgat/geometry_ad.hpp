#pragma once

#include "msgat/autodiff.hpp"
#include "msgat/geometry.hpp"

namespace msgat::geo::ad {

using msgat::ad::Tape;
using msgat::ad::Var;

// Tape-recorded Poincare kernels. Points and tangent vectors are column-vector
// Vars, curvature is a positive scalar Var, so gradients flow into both.
// Every ball-valued result is projected into the eps shell; the projection
// branch is chosen at record time, like any other piecewise op.

Var project_to_ball(Tape& t, Var x, Var c, double eps_boundary);
Var mobius_add(Tape& t, Var x, Var y, Var c, double eps_boundary);
Var exp_map(Tape& t, Var x, Var v, Var c, double eps_boundary);
Var log_map(Tape& t, Var x, Var y, Var c, double eps_boundary);
Var exp0(Tape& t, Var v, Var c, double eps_boundary);
Var log0(Tape& t, Var y, Var c);
Var mobius_matvec(Tape& t, Var m, Var x, Var c, double eps_boundary);
Var hyperbolic_activation(Tape& t, Var x, Var c, Activation act, double slope,
                          double eps_boundary);

}  // namespace msgat::geo::ad
