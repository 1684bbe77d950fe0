#include "wecmarl/presets.hpp"

#include <cmath>

namespace wecmarl {

namespace {

// Shared hull and mooring layout: a submerged buoy held down by three taut
// tethers, front leg on the +x axis, back legs at +/-120 degrees.
WecGeometry base_geometry() {
  WecGeometry g;
  g.mass_kg = 4.0e5;
  g.inertia = Vec3(2.4e6, 2.4e6, 3.2e6).asDiagonal();
  g.submergence_depth_m = 6.0;
  g.buoy_center_world = Vec3(0, 0, 22.0);

  const double s3 = std::sqrt(3.0);
  const double ra = 14.0;  // anchor radius
  const double rb = 4.0;   // attachment radius
  const double zb = -3.0;  // attachment height below body origin
  g.anchors_world = {Vec3(ra, 0, 0), Vec3(-0.5 * ra, 0.5 * ra * s3, 0),
                     Vec3(-0.5 * ra, -0.5 * ra * s3, 0)};
  g.attachments_body = {Vec3(rb, 0, zb), Vec3(-0.5 * rb, 0.5 * rb * s3, zb),
                        Vec3(-0.5 * rb, -0.5 * rb * s3, zb)};
  return g;
}

PtoConfig base_pto(const WecGeometry& geo) {
  PtoConfig p;
  p.spring_stiffness = Vec3::Constant(9.0e4);
  p.gen_force_limit = 2.5e4;
  p.tension_min = 5.0e4;
  p.tension_max = 1.2e6;
  return with_pretension(p, geo.nominal_leg_lengths(), Vec3::Constant(4.0e5));
}

}  // namespace

Plant make_decoupled_plant() {
  Plant plant;
  plant.geometry = base_geometry();
  auto& g = plant.geometry;
  g.added_mass = Vec6(2.0e5, 2.0e5, 1.6e5, 1.2e6, 1.2e6, 1.6e6).asDiagonal();
  g.radiation_damping = Vec6(3.0e4, 3.0e4, 5.0e4, 4.0e5, 4.0e5, 5.0e5).asDiagonal();
  g.hydrostatic_stiffness = Vec6(0, 0, 0, 2.0e6, 2.0e6, 0).asDiagonal();
  g.excitation_gain.row(2) = Eigen::RowVector3d(4.0e4, 1.0e4, -2.0e3);
  plant.pto = base_pto(g);
  plant.geometry.validate();
  plant.pto.validate();
  return plant;
}

Plant make_coupled_plant() {
  Plant plant;
  plant.geometry = base_geometry();
  auto& g = plant.geometry;
  g.added_mass = Vec6(2.4e5, 2.4e5, 1.6e5, 1.4e6, 1.4e6, 1.6e6).asDiagonal();
  g.added_mass(0, 4) = g.added_mass(4, 0) = -3.0e5;  // surge-pitch
  g.added_mass(1, 3) = g.added_mass(3, 1) = 3.0e5;   // sway-roll
  g.radiation_damping =
      Vec6(4.0e4, 4.0e4, 5.0e4, 4.5e5, 4.5e5, 5.0e5).asDiagonal();
  g.radiation_damping(0, 4) = g.radiation_damping(4, 0) = -9.0e4;
  g.radiation_damping(1, 3) = g.radiation_damping(3, 1) = 9.0e4;
  g.hydrostatic_stiffness = Vec6(0, 0, 0, 1.8e6, 1.8e6, 0).asDiagonal();
  g.excitation_gain.row(0) = Eigen::RowVector3d(2.2e4, 1.4e4, 3.0e3);
  g.excitation_gain.row(2) = Eigen::RowVector3d(4.0e4, 1.0e4, -2.0e3);
  g.excitation_gain.row(4) = Eigen::RowVector3d(0, 6.0e4, 0);
  plant.pto = base_pto(g);
  plant.geometry.validate();
  plant.pto.validate();
  return plant;
}

}  // namespace wecmarl
