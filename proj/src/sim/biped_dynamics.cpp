#include "amphim/sim/biped_dynamics.hpp"

#include <cmath>

namespace amphim::sim {
namespace {

// Torso-frame offset rotated by pitch (forward lean positive).
Vec2 rotate(double pitch, const Vec2& r) {
  const double c = std::cos(pitch), s = std::sin(pitch);
  return {r.x() * c + r.y() * s, -r.x() * s + r.y() * c};
}

Vec2 rotate_d(double pitch, const Vec2& r) {
  const double c = std::cos(pitch), s = std::sin(pitch);
  return {-r.x() * s + r.y() * c, -r.x() * c - r.y() * s};
}

Vec2 link_dir_d(double phi) { return {-std::cos(phi), std::sin(phi)}; }

int hip_index(int leg) { return 3 + 2 * leg; }
int knee_index(int leg) { return 4 + 2 * leg; }

}  // namespace

Coords coords_of(const SimState& s) {
  Coords q;
  q << s.base_pos.x(), s.base_pos.y(), s.base_pitch, s.dof_pos[0], s.dof_pos[1], s.dof_pos[2], s.dof_pos[3];
  return q;
}

Coords velocities_of(const SimState& s) {
  Coords qd;
  qd << s.base_lin_vel.x(), s.base_lin_vel.y(), s.base_pitch_rate, s.dof_vel[0], s.dof_vel[1], s.dof_vel[2],
      s.dof_vel[3];
  return qd;
}

void set_coords(SimState& s, const Coords& q, const Coords& qd) {
  s.base_pos = {q[0], q[1]};
  s.base_pitch = q[2];
  s.dof_pos = q.tail<4>();
  s.base_lin_vel = {qd[0], qd[1]};
  s.base_pitch_rate = qd[2];
  s.dof_vel = qd.tail<4>();
}

BipedDynamics::BipedDynamics(const RobotMorphology& morph, double torso_mass_delta, double com_shift,
                             double gravity)
    : torso_mass_(morph.torso_mass + torso_mass_delta),
      torso_com_height_(0.5 * morph.torso_length),
      com_shift_(com_shift),
      thigh_length_(morph.thigh_length),
      shank_length_(morph.shank_length),
      thigh_mass_(morph.thigh_mass),
      shank_mass_(morph.shank_mass),
      gravity_(gravity) {
  torso_inertia_ = torso_mass_ * morph.torso_length * morph.torso_length / 12.0;
  thigh_inertia_ = thigh_mass_ * thigh_length_ * thigh_length_ / 12.0;
  shank_inertia_ = shank_mass_ * shank_length_ * shank_length_ / 12.0;
}

void BipedDynamics::bodies(const Coords& q, const Coords& qd, std::array<Body, 5>& out) const {
  const Vec2 base(q[0], q[1]);
  const double pitch = q[2], pitch_rate = qd[2];

  Body& torso = out[0];
  const Vec2 r0(com_shift_, torso_com_height_);
  torso.mass = torso_mass_;
  torso.inertia = torso_inertia_;
  torso.com = base + rotate(pitch, r0);
  torso.centripetal = -pitch_rate * pitch_rate * rotate(pitch, r0);
  torso.jac.setZero();
  torso.jac(0, 0) = 1.0;
  torso.jac(1, 1) = 1.0;
  torso.jac.col(2) = rotate_d(pitch, r0);
  torso.ang_jac.setZero();
  torso.ang_jac(2) = 1.0;

  for (int leg = 0; leg < 2; ++leg) {
    const int ih = hip_index(leg), ik = knee_index(leg);
    const double phi_t = pitch + q[ih];
    const double phi_s = phi_t + q[ik];
    const double w_t = pitch_rate + qd[ih];
    const double w_s = w_t + qd[ik];
    const Vec2 u_t = link_dir(phi_t), u_s = link_dir(phi_s);
    const Vec2 du_t = link_dir_d(phi_t), du_s = link_dir_d(phi_s);

    Body& thigh = out[1 + 2 * leg];
    thigh.mass = thigh_mass_;
    thigh.inertia = thigh_inertia_;
    thigh.com = base + 0.5 * thigh_length_ * u_t;
    thigh.centripetal = -0.5 * thigh_length_ * w_t * w_t * u_t;
    thigh.jac.setZero();
    thigh.jac(0, 0) = 1.0;
    thigh.jac(1, 1) = 1.0;
    thigh.jac.col(2) = 0.5 * thigh_length_ * du_t;
    thigh.jac.col(ih) = 0.5 * thigh_length_ * du_t;
    thigh.ang_jac.setZero();
    thigh.ang_jac(2) = 1.0;
    thigh.ang_jac(ih) = 1.0;

    Body& shank = out[2 + 2 * leg];
    shank.mass = shank_mass_;
    shank.inertia = shank_inertia_;
    shank.com = base + thigh_length_ * u_t + 0.5 * shank_length_ * u_s;
    shank.centripetal = -thigh_length_ * w_t * w_t * u_t - 0.5 * shank_length_ * w_s * w_s * u_s;
    shank.jac.setZero();
    shank.jac(0, 0) = 1.0;
    shank.jac(1, 1) = 1.0;
    shank.jac.col(2) = thigh_length_ * du_t + 0.5 * shank_length_ * du_s;
    shank.jac.col(ih) = shank.jac.col(2);
    shank.jac.col(ik) = 0.5 * shank_length_ * du_s;
    shank.ang_jac.setZero();
    shank.ang_jac(2) = 1.0;
    shank.ang_jac(ih) = 1.0;
    shank.ang_jac(ik) = 1.0;
  }
}

FootKinematics BipedDynamics::feet(const Coords& q, const Coords& qd) const {
  FootKinematics k;
  const Vec2 base(q[0], q[1]);
  for (int leg = 0; leg < 2; ++leg) {
    const int ih = hip_index(leg), ik = knee_index(leg);
    const double phi_t = q[2] + q[ih];
    const double phi_s = phi_t + q[ik];
    const Vec2 du_t = link_dir_d(phi_t), du_s = link_dir_d(phi_s);
    k.knee[leg] = base + thigh_length_ * link_dir(phi_t);
    k.foot[leg] = k.knee[leg] + shank_length_ * link_dir(phi_s);
    PointJacobian& J = k.foot_jacobian[leg];
    J.setZero();
    J(0, 0) = 1.0;
    J(1, 1) = 1.0;
    J.col(2) = thigh_length_ * du_t + shank_length_ * du_s;
    J.col(ih) = J.col(2);
    J.col(ik) = shank_length_ * du_s;
    k.foot_vel[leg] = J * qd;
  }
  return k;
}

void BipedDynamics::equations(const Coords& q, const Coords& qd, MassMatrix& mass, Coords& bias) const {
  std::array<Body, 5> b;
  bodies(q, qd, b);
  mass.setZero();
  bias.setZero();
  const Vec2 g(0.0, -gravity_);
  for (const Body& body : b) {
    mass.noalias() += body.mass * body.jac.transpose() * body.jac;
    mass.noalias() += body.inertia * body.ang_jac.transpose() * body.ang_jac;
    bias.noalias() += body.jac.transpose() * (body.mass * (g - body.centripetal));
  }
}

double BipedDynamics::kinetic_energy(const Coords& q, const Coords& qd) const {
  MassMatrix m;
  Coords bias;
  equations(q, qd, m, bias);
  return 0.5 * qd.dot(m * qd);
}

double BipedDynamics::potential_energy(const Coords& q) const {
  std::array<Body, 5> b;
  bodies(q, Coords::Zero(), b);
  double e = 0.0;
  for (const Body& body : b) e += body.mass * gravity_ * body.com.y();
  return e;
}

Vec2 BipedDynamics::center_of_mass(const Coords& q) const {
  std::array<Body, 5> b;
  bodies(q, Coords::Zero(), b);
  Vec2 c = Vec2::Zero();
  double m = 0.0;
  for (const Body& body : b) {
    c += body.mass * body.com;
    m += body.mass;
  }
  return c / m;
}

}  // namespace amphim::sim
