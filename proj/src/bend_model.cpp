#include "wirebend/bend_model.hpp"

#include <cmath>

#include "wirebend/error.hpp"

namespace wirebend {

namespace {

constexpr double kAcosTolerance = 1e-9;
constexpr double kLiftSingular = 1e-3;

double checked_acos(double arg) {
  if (!std::isfinite(arg) || std::abs(arg) > 1.0 + kAcosTolerance) {
    throw Error(ErrorCode::DegenerateAngle, "arccos argument outside [-1, 1]");
  }
  return std::acos(std::clamp(arg, -1.0, 1.0));
}

double signed_by(double angle, double s) { return s < 0.0 ? -angle : angle; }

Vec3 orthonormal_against(const Vec3& seed, const Vec3& x) {
  Vec3 z = seed - seed.dot(x) * x;
  if (z.norm() < 1e-9) return canonical_orthogonal(x);
  return z.normalized();
}

double path_length(const std::vector<Point3>& p, std::size_t from, std::size_t to) {
  double len = 0.0;
  for (std::size_t k = from; k < to; ++k) len += (p[k + 1] - p[k]).norm();
  return len;
}

}  // namespace

void set_angles_from_direction(BendCandidate& c, const Vec3& u_local) {
  const Vec3 u = u_local.normalized();
  const double ux = u.x(), uy = u.y(), uz = u.z();

  // Projection onto the frame's xy plane, interior angle with -x.
  const double nxy = std::hypot(ux, uy);
  c.theta = nxy < 1e-12 ? std::numbers::pi / 2.0 : checked_acos(-ux / nxy);
  c.side = uy < 0.0 ? -1 : 1;

  // Projection onto the yz plane, angle with y = z cross x.
  const double nyz = std::hypot(uy, uz);
  if (nyz < 1e-12) throw Error(ErrorCode::DegenerateAngle, "outgoing leg parallel to incoming leg");
  c.alpha = signed_by(checked_acos(uy / nyz), uz);

  // Projection onto the xz plane, angle with x.
  const double nxz = std::hypot(ux, uz);
  c.beta = nxz < 1e-12 ? 0.0 : signed_by(checked_acos(ux / nxz), uz);

  c.turn = checked_acos(ux);
}

Vec3 direction_from_twist(const BendCandidate& c) {
  return {std::cos(c.turn), std::sin(c.turn) * std::cos(c.alpha), std::sin(c.turn) * std::sin(c.alpha)};
}

bool direction_from_lift(const BendCandidate& c, Vec3& out) {
  const double psi = std::numbers::pi - c.theta;
  const double cpsi = std::cos(psi);
  if (std::abs(cpsi) < kLiftSingular || std::abs(std::cos(c.beta)) < kLiftSingular) return false;
  out = Vec3(cpsi, c.side * std::sin(psi), cpsi * std::tan(c.beta)).normalized();
  return true;
}

void update_arclengths(BendSet& bends) {
  double prev_tangent = 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < bends.candidates.size(); ++k) {
    auto& c = bends.candidates[k];
    c.index = static_cast<int>(k);
    c.tangent = bends.r_c * std::tan(c.turn / 2.0);
    const double straight = c.q.x() - prev_tangent;
    if (straight < -1e-9) {
      throw Error(ErrorCode::TangentOverlap,
                  "bend " + std::to_string(k) + " starts inside the previous bend's arc");
    }
    s += straight;
    c.arclength = s;
    s += bends.r_c * c.turn;
    prev_tangent = c.tangent;
  }
  if (!bends.candidates.empty() && bends.tail_length - prev_tangent < -1e-9) {
    throw Error(ErrorCode::TangentOverlap, "last bend's arc runs past the wire end");
  }
}

double developed_length(const BendSet& bends) {
  if (bends.candidates.empty()) return bends.tail_length;
  const auto& last = bends.candidates.back();
  return last.arclength + bends.r_c * last.turn + (bends.tail_length - last.tangent);
}

BendSet compute_bending_set(const PivotChain& chain, double r_c, const WireSpec& wire,
                            const BendOptions& opts) {
  const auto& p = chain.pivots;
  if (p.size() < 3) throw Error(ErrorCode::TooFewPoints, "need at least 3 pivots");
  if (chain.normals.size() != p.size() - 2) {
    throw Error(ErrorCode::InvalidArgument, "normal count must equal pivot count minus 2");
  }
  if (!(r_c > 0.0)) throw Error(ErrorCode::InvalidArgument, "center roller radius must be positive");
  if (!(wire.diameter > 0.0)) throw Error(ErrorCode::InvalidArgument, "wire diameter must be positive");

  BendSet set;
  set.r_c = r_c;

  std::size_t origin_pivot = 0;
  bool have_prev = false;
  Vec3 z_prev = Vec3::Zero();
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const Vec3 d_in = p[i] - p[i - 1];
    const Vec3 d_out = p[i + 1] - p[i];
    if (d_in.norm() < 1e-12 || d_out.norm() < 1e-12) {
      throw Error(ErrorCode::DegenerateSegment, "coincident consecutive pivots");
    }
    const Vec3 x = d_in.normalized();
    const Vec3 u = d_out.normalized();
    if (std::acos(std::clamp(x.dot(u), -1.0, 1.0)) < opts.min_bend_angle) continue;

    const Vec3 z = orthonormal_against(have_prev ? z_prev : chain.normals[i - 1], x);
    const Vec3 y = z.cross(x);

    BendCandidate c;
    c.pivot = static_cast<int>(i);
    set_angles_from_direction(c, Vec3(u.dot(x), u.dot(y), u.dot(z)));
    c.tangent = r_c * std::tan(c.turn / 2.0);
    c.q = Point3(path_length(p, origin_pivot, i) - c.tangent, 0.0, 0.0);
    c.q_world = p[i] - c.tangent * x;

    if (!have_prev) set.reference_normal = z;
    set.candidates.push_back(c);
    z_prev = x.cross(u).normalized();
    have_prev = true;
    origin_pivot = i;
  }

  set.tail_length = path_length(p, origin_pivot, p.size() - 1);
  if (set.candidates.empty()) {
    set.reference_normal = orthonormal_against(chain.normals.front(), (p[1] - p[0]).normalized());
  }
  update_arclengths(set);

  const double developed = developed_length(set);
  set.wire.diameter = wire.diameter;
  if (wire.total_length <= 0.0) {
    set.wire.total_length = developed;
  } else if (wire.total_length < developed - 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "wire is shorter than the developed length of the shape");
  } else {
    set.tail_length += wire.total_length - developed;
    set.wire.total_length = wire.total_length;
  }
  return set;
}

std::vector<Point3> reconstruct_pivots(const BendSet& bends,
                                       const std::pair<Point3, Point3>& first_segment) {
  std::vector<Point3> out{first_segment.first, first_segment.second};
  if (bends.candidates.empty()) return out;

  Vec3 x = (first_segment.second - first_segment.first).normalized();
  Vec3 z = orthonormal_against(bends.reference_normal, x);
  Point3 p = first_segment.second;

  const auto& cs = bends.candidates;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const Vec3 y = z.cross(x);
    Mat3 frame;
    frame << x, y, z;

    const double length = k + 1 < cs.size() ? cs[k + 1].q.x() + cs[k + 1].tangent : bends.tail_length;
    const Vec3 u_twist = frame * direction_from_twist(cs[k]);
    Vec3 u_lift_local;
    if (direction_from_lift(cs[k], u_lift_local)) {
      const Vec3 u_lift = frame * u_lift_local;
      if (length * (u_twist - u_lift).norm() > 1e-5) {
        throw Error(ErrorCode::InconsistentAngles,
                    "twist and lift reconstructions disagree at bend " + std::to_string(k));
      }
    }

    p = p + length * u_twist;
    out.push_back(p);
    z = x.cross(u_twist).normalized();
    x = u_twist;
  }
  return out;
}

std::vector<Flange> flange_lengths(const BendSet& bends, const WireSpec& wire) {
  const auto& cs = bends.candidates;
  std::vector<Flange> out(cs.size());
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const double prev_end = k == 0 ? 0.0 : cs[k - 1].arclength + bends.r_c * cs[k - 1].turn;
    const double next_start = k + 1 < cs.size() ? cs[k + 1].arclength : wire.total_length;
    out[k].before = cs[k].arclength - prev_end;
    out[k].after = next_start - (cs[k].arclength + bends.r_c * cs[k].turn);
  }
  return out;
}

std::vector<double> material_rolls(const BendSet& bends) {
  std::vector<double> rolls;
  double sigma = 0.0;
  for (const auto& c : bends.candidates) {
    sigma = wrap_angle(sigma + c.alpha);
    rolls.push_back(sigma);
  }
  return rolls;
}

}  // namespace wirebend
