#include "wecmarl/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wecmarl {

namespace {

constexpr double kDegenerateLength = 1e-9;

bool approx_symmetric(const Mat6& m, double tol) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <=
         tol * (1.0 + m.cwiseAbs().maxCoeff());
}

bool positive_semidefinite(const Mat6& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(m);
  return es.eigenvalues().minCoeff() >= -tol * (1.0 + m.cwiseAbs().maxCoeff());
}

bool positive_definite(const Mat6& m) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(m);
  return es.eigenvalues().minCoeff() > 0;
}

// S * M * S with S = diag(1,-1,1,-1,1,-1): flips the sign of entries whose
// row/column parity under the reflection differs.
Mat6 reflect6(const Mat6& m) {
  Mat6 out = m;
  const double s[6] = {1, -1, 1, -1, 1, -1};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) out(i, j) = s[i] * s[j] * m(i, j);
  return out;
}

Mat3 rx(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

Mat3 ry(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

Mat3 rz(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Mat3 drx(double a) {
  Mat3 m;
  m << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
  return m;
}

Mat3 dry(double a) {
  Mat3 m;
  m << -std::sin(a), 0, std::cos(a), 0, 0, 0, -std::cos(a), 0, -std::sin(a);
  return m;
}

Mat3 drz(double a) {
  Mat3 m;
  m << -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a), 0, 0, 0, 0;
  return m;
}

}  // namespace

Mat3 rotation_zyx(double roll, double pitch, double yaw) {
  return rz(yaw) * ry(pitch) * rx(roll);
}

Mat6 WecGeometry::total_mass() const {
  Mat6 m = added_mass;
  m.topLeftCorner<3, 3>() += mass_kg * Mat3::Identity();
  m.bottomRightCorner<3, 3>() += inertia;
  return m;
}

Vec3 WecGeometry::nominal_leg_lengths() const {
  return tether_extension(*this, Vec6::Zero());
}

Vec3 attachment_world(const WecGeometry& g, const Vec6& pose, int leg) {
  const Mat3 r = rotation_zyx(pose[3], pose[4], pose[5]);
  return g.buoy_center_world + pose.head<3>() + r * g.attachments_body[leg];
}

Vec3 tether_extension(const WecGeometry& g, const Vec6& pose) {
  Vec3 ext;
  for (int k = 0; k < 3; ++k) {
    const double len = (attachment_world(g, pose, k) - g.anchors_world[k]).norm();
    if (len < kDegenerateLength)
      throw std::runtime_error("tether_extension: attachment coincides with anchor");
    ext[k] = len;
  }
  return ext;
}

Mat36 tether_jacobian(const WecGeometry& g, const Vec6& pose) {
  const double roll = pose[3], pitch = pose[4], yaw = pose[5];
  const Mat3 r = rotation_zyx(roll, pitch, yaw);
  // Partial derivatives of R with respect to each Euler angle.
  const Mat3 dr_roll = rz(yaw) * ry(pitch) * drx(roll);
  const Mat3 dr_pitch = rz(yaw) * dry(pitch) * rx(roll);
  const Mat3 dr_yaw = drz(yaw) * ry(pitch) * rx(roll);

  Mat36 jac;
  for (int k = 0; k < 3; ++k) {
    const Vec3 b = g.attachments_body[k];
    const Vec3 p = g.buoy_center_world + pose.head<3>() + r * b;
    const Vec3 d = p - g.anchors_world[k];
    const double len = d.norm();
    if (len < kDegenerateLength)
      throw std::runtime_error("tether_jacobian: attachment coincides with anchor");
    const Vec3 u = d / len;
    jac.block<1, 3>(k, 0) = u.transpose();
    jac(k, 3) = u.dot(dr_roll * b);
    jac(k, 4) = u.dot(dr_pitch * b);
    jac(k, 5) = u.dot(dr_yaw * b);
  }
  return jac;
}

void WecGeometry::validate() const {
  constexpr double tol = 1e-9;
  if (!(mass_kg > 0)) throw std::invalid_argument("geometry: mass must be positive");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() >
      tol * (1.0 + inertia.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("geometry: inertia must be symmetric");
  {
    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
    if (es.eigenvalues().minCoeff() <= 0)
      throw std::invalid_argument("geometry: inertia must be positive definite");
  }
  if (!approx_symmetric(hydrostatic_stiffness, tol) ||
      !positive_semidefinite(hydrostatic_stiffness, tol))
    throw std::invalid_argument(
        "geometry: hydrostatic stiffness must be symmetric positive semidefinite");
  if (!approx_symmetric(added_mass, tol) || !positive_semidefinite(added_mass, tol))
    throw std::invalid_argument(
        "geometry: added mass must be symmetric positive semidefinite");
  if (!approx_symmetric(radiation_damping, tol) ||
      !positive_semidefinite(radiation_damping, tol))
    throw std::invalid_argument(
        "geometry: radiation damping must be symmetric positive semidefinite");
  if (!positive_definite(total_mass()))
    throw std::invalid_argument("geometry: total mass matrix must be positive definite");

  // Mirror symmetry about the x-z plane. All coefficient matrices must
  // commute with the reflection, and the excitation must not push the body
  // into sway/roll/yaw.
  auto mirror_ok = [&](const Mat6& m) {
    return (reflect6(m) - m).cwiseAbs().maxCoeff() <=
           tol * (1.0 + m.cwiseAbs().maxCoeff());
  };
  if (!mirror_ok(hydrostatic_stiffness) || !mirror_ok(added_mass) ||
      !mirror_ok(radiation_damping))
    throw std::invalid_argument("geometry: coefficient matrices break mirror symmetry");
  const double exc_scale = 1.0 + excitation_gain.cwiseAbs().maxCoeff();
  for (int row : {1, 3, 5}) {
    if (excitation_gain.row(row).cwiseAbs().maxCoeff() > tol * exc_scale)
      throw std::invalid_argument(
          "geometry: excitation must be zero in sway/roll/yaw");
  }

  // Leg layout: front leg in the x-z plane, back legs mirror images.
  auto mirror3 = [](const Vec3& v) { return Vec3(v[0], -v[1], v[2]); };
  const double geo_scale =
      1.0 + std::max(anchors_world[0].cwiseAbs().maxCoeff(),
                     attachments_body[0].cwiseAbs().maxCoeff());
  if (std::abs(anchors_world[0][1]) > tol * geo_scale ||
      std::abs(attachments_body[0][1]) > tol * geo_scale)
    throw std::invalid_argument("geometry: front leg must lie in the x-z plane");
  if ((anchors_world[1] - mirror3(anchors_world[2])).cwiseAbs().maxCoeff() >
          tol * geo_scale ||
      (attachments_body[1] - mirror3(attachments_body[2])).cwiseAbs().maxCoeff() >
          tol * geo_scale)
    throw std::invalid_argument("geometry: back legs must be mirror images");

  const Vec3 lengths = nominal_leg_lengths();
  if (lengths.minCoeff() < 1e-6)
    throw std::invalid_argument("geometry: degenerate tether at equilibrium");
}

}  // namespace wecmarl
