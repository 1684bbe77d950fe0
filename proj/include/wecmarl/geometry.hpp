#pragma once

#include <Eigen/Dense>
#include <array>

namespace wecmarl {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

// Pose ordering: (surge x, sway y, heave z, roll, pitch, yaw), displacements
// from static equilibrium. Leg 0 is the front leg on the +x symmetry axis;
// legs 1 and 2 are the back pair, mirror images of each other about the x-z
// plane.
struct WecGeometry {
  double mass_kg = 0;
  Mat3 inertia = Mat3::Zero();
  double submergence_depth_m = 0;

  Mat6 hydrostatic_stiffness = Mat6::Zero();
  Mat6 added_mass = Mat6::Zero();
  Mat6 radiation_damping = Mat6::Zero();
  // Maps the wave sample (z, dz, ddz) to a 6-DOF generalized excitation
  // force. Sway/roll/yaw rows must be zero for mirror symmetry.
  Mat63 excitation_gain = Mat63::Zero();

  Vec3 buoy_center_world = Vec3::Zero();  // equilibrium body-origin position
  std::array<Vec3, 3> anchors_world{};
  std::array<Vec3, 3> attachments_body{};

  Mat6 total_mass() const;
  Vec3 nominal_leg_lengths() const;
  void validate() const;  // throws std::invalid_argument
};

// ZYX Euler rotation: R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rotation_zyx(double roll, double pitch, double yaw);

// World position of attachment point k under the given pose.
Vec3 attachment_world(const WecGeometry& g, const Vec6& pose, int leg);

// Per-leg tether extension (anchor-to-attachment distance).
// Throws std::runtime_error on degenerate geometry (attachment at anchor).
Vec3 tether_extension(const WecGeometry& g, const Vec6& pose);

// dg/de, rows are legs. g_rate = J * vel.
Mat36 tether_jacobian(const WecGeometry& g, const Vec6& pose);

// Reflection about the x-z symmetry plane: negates sway, roll, yaw.
inline Vec6 mirror_vec6(const Vec6& v) {
  Vec6 m = v;
  m[1] = -v[1];
  m[3] = -v[3];
  m[5] = -v[5];
  return m;
}

// Swap the back-leg pair (legs 1 and 2).
inline Vec3 swap_back_legs(const Vec3& v) { return Vec3(v[0], v[2], v[1]); }

}  // namespace wecmarl
