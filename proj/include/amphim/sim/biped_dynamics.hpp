#pragma once

#include <Eigen/Dense>

#include <array>

#include "amphim/sim/types.hpp"

namespace amphim::sim {

inline constexpr int kNumCoords = 7;  // x, z, pitch, hip_l, knee_l, hip_r, knee_r
using Coords = Eigen::Matrix<double, kNumCoords, 1>;
using MassMatrix = Eigen::Matrix<double, kNumCoords, kNumCoords>;
using PointJacobian = Eigen::Matrix<double, 2, kNumCoords>;

Coords coords_of(const SimState& s);
Coords velocities_of(const SimState& s);
void set_coords(SimState& s, const Coords& q, const Coords& qd);

/// Direction of a downward-hanging link at absolute angle phi.
inline Vec2 link_dir(double phi) { return {-std::sin(phi), -std::cos(phi)}; }

struct FootKinematics {
  std::array<Vec2, kNumFeet> knee;
  std::array<Vec2, kNumFeet> foot;
  std::array<Vec2, kNumFeet> foot_vel;
  std::array<PointJacobian, kNumFeet> foot_jacobian;
};

/// Reduced-coordinate rigid-body model of the planar biped. Links are uniform
/// rods; the torso center of mass sits halfway up the torso, shifted forward
/// by `com_shift`.
class BipedDynamics {
 public:
  BipedDynamics() = default;
  BipedDynamics(const RobotMorphology& morph, double torso_mass_delta, double com_shift, double gravity);

  FootKinematics feet(const Coords& q, const Coords& qd) const;

  /// Mass matrix and the generalized gravity plus velocity-product forces,
  /// so that M qdd = bias + tau + J^T F.
  void equations(const Coords& q, const Coords& qd, MassMatrix& mass, Coords& bias) const;

  double kinetic_energy(const Coords& q, const Coords& qd) const;
  double potential_energy(const Coords& q) const;
  Vec2 center_of_mass(const Coords& q) const;
  double total_mass() const { return torso_mass_ + 2.0 * (thigh_mass_ + shank_mass_); }

 private:
  struct Body {
    double mass;
    double inertia;
    Vec2 com;
    Vec2 centripetal;  // COM acceleration at zero qdd
    PointJacobian jac;
    Eigen::Matrix<double, 1, kNumCoords> ang_jac;
  };
  void bodies(const Coords& q, const Coords& qd, std::array<Body, 5>& out) const;

  double torso_mass_ = 0, torso_inertia_ = 0, torso_com_height_ = 0, com_shift_ = 0;
  double thigh_length_ = 0, shank_length_ = 0, thigh_mass_ = 0, shank_mass_ = 0;
  double thigh_inertia_ = 0, shank_inertia_ = 0;
  double gravity_ = 9.81;
};

}  // namespace amphim::sim
