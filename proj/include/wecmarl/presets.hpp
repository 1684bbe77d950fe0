#pragma once

#include "wecmarl/geometry.hpp"
#include "wecmarl/pto.hpp"

namespace wecmarl {

struct Plant {
  WecGeometry geometry;
  PtoConfig pto;
};

// Diagonal coefficient matrices and heave-only excitation: pure heave motion
// stays exactly on the heave axis, so single-axis controllers can be studied
// in isolation.
Plant make_decoupled_plant();

// Adds surge/pitch and sway/roll cross terms plus surge and pitch wave
// excitation, so the legs see genuinely different, coupled loads.
Plant make_coupled_plant();

}  // namespace wecmarl
