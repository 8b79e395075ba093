#include "wirebend/plan_doc.hpp"

#include <cstdio>
#include <sstream>

#include "wirebend/error.hpp"

namespace wirebend {

namespace {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Vec3 vec_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

Json mat_json(const Mat3& m) {
  Json out = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  return out;
}

Mat3 mat_from(const Json& j) {
  if (!j.is_array() || j.size() != 9) throw Error(ErrorCode::ParseError, "expected 9 matrix entries");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[r * 3 + c].get<double>();
  return m;
}

Json config_json(const JointConfig& q) { return Json(std::vector<double>(q.data(), q.data() + q.size())); }

JointConfig config_from(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const JointConfig>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double wire_distance(const WireState& a, const WireState& b) {
  if (a.primitives.size() != b.primitives.size()) return std::numeric_limits<double>::infinity();
  double worst = std::abs(a.diameter - b.diameter);
  for (std::size_t k = 0; k < a.primitives.size(); ++k) {
    const auto& p = a.primitives[k];
    const auto& q = b.primitives[k];
    if (p.kind != q.kind) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(p.length - q.length));
    worst = std::max(worst, (a.pose * p.start - b.pose * q.start).norm());
    worst = std::max(worst, (a.pose * p.end() - b.pose * q.end()).norm());
    worst = std::max(worst, (a.pose.linear() * p.frame - b.pose.linear() * q.frame).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

Json matrix_json(const Pose& p) { return Json{{"rotation", mat_json(p.linear())}, {"translation", vec(p.translation())}}; }

Pose pose_from_matrix_json(const Json& j) {
  Pose p = Pose::Identity();
  p.linear() = mat_from(j.at("rotation"));
  p.translation() = vec_from(j.at("translation"));
  return p;
}

Json wire_to_json(const WireState& w) {
  Json prims = Json::array();
  for (const auto& p : w.primitives) {
    Json e{{"kind", p.kind == WirePrimitive::Kind::Arc ? "arc" : "segment"},
           {"start", vec(p.start)},
           {"frame", mat_json(p.frame)},
           {"length", p.length}};
    if (p.kind == WirePrimitive::Kind::Arc) {
      e["radius"] = p.radius;
      e["side"] = vec(p.side);
    }
    prims.push_back(e);
  }
  return Json{{"diameter", w.diameter}, {"pose", matrix_json(w.pose)}, {"primitives", prims}};
}

WireState wire_from_json(const Json& j) {
  WireState w;
  w.diameter = j.at("diameter").get<double>();
  w.pose = pose_from_matrix_json(j.at("pose"));
  for (const auto& e : j.at("primitives")) {
    WirePrimitive p;
    p.kind = e.at("kind").get<std::string>() == "arc" ? WirePrimitive::Kind::Arc : WirePrimitive::Kind::Segment;
    p.start = vec_from(e.at("start"));
    p.frame = mat_from(e.at("frame"));
    p.length = e.at("length").get<double>();
    if (p.kind == WirePrimitive::Kind::Arc) {
      p.radius = e.at("radius").get<double>();
      p.side = vec_from(e.at("side"));
    }
    w.primitives.push_back(p);
  }
  return w;
}

Json sequence_to_json(const BendSequence& s) {
  Json out = Json::array();
  for (const auto& c : s) {
    out.push_back(Json{{"index", c.index},
                       {"direction", to_string(c.direction)},
                       {"placement", c.use_alpha ? "alpha" : "beta"}});
  }
  return out;
}

BendSequence sequence_from_json(const Json& j) {
  BendSequence s;
  for (const auto& e : j) {
    StepChoice c;
    c.index = e.at("index").get<int>();
    const auto dir = e.at("direction").get<std::string>();
    if (dir != "CW" && dir != "CCW") throw Error(ErrorCode::ParseError, "direction must be CW or CCW");
    c.direction = dir == "CW" ? BendDirection::CW : BendDirection::CCW;
    const auto pl = e.at("placement").get<std::string>();
    if (pl != "alpha" && pl != "beta") throw Error(ErrorCode::ParseError, "placement must be alpha or beta");
    c.use_alpha = pl == "alpha";
    s.push_back(c);
  }
  return s;
}

std::string input_digest(const Scenario& sc) {
  std::ostringstream all;
  all.precision(17);
  for (const auto& p : sc.curve) all << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  all << dump(to_json(sc.machine)) << dump(to_json(sc.robot)) << dump(to_json(sc.world)) << dump(to_json(sc.grasp_config));
  all << sc.config.epsilon << ' ' << sc.config.clearance << ' ' << sc.config.seed << ' ' << sc.config.wire.diameter
      << ' ' << sc.config.wire.total_length << ' ' << sc.config.min_bend_angle << ' ' << sc.config.plan_motion;
  return sha256_hex(all.str());
}

Json make_plan_document(const Scenario& sc, const SearchResult& res, const std::string& digest) {
  Json doc;
  doc["format"] = "wirebend-plan";
  doc["version"] = 1;
  doc["input_digest"] = digest;
  doc["status"] = to_string(res.status);
  doc["config"] = Json{{"epsilon", sc.config.epsilon},
                       {"clearance", sc.config.clearance},
                       {"seed", sc.config.seed},
                       {"budget", sc.config.budget},
                       {"min_bend_angle", sc.config.min_bend_angle},
                       {"plan_motion", sc.config.plan_motion},
                       {"wire", Json{{"diameter", sc.config.wire.diameter}, {"total_length", sc.config.wire.total_length}}}};
  doc["machine"] = to_json(sc.machine);
  doc["robot"] = to_json(sc.robot);
  doc["world"] = to_json(sc.world);
  doc["grasp_config"] = to_json(sc.grasp_config);
  Json piv = Json::array();
  for (const auto& p : sc.pivots) piv.push_back(vec(p));
  doc["pivots"] = piv;
  doc["bending_set"] = to_json(sc.ctx.bends);

  Json seq = sequence_to_json(res.sequence);
  Json steps = Json::array();
  for (std::size_t k = 0; k < res.evaluation.steps.size(); ++k) {
    const auto& st = res.evaluation.steps[k];
    seq[k]["target_angle"] = sc.ctx.bends.candidates[st.choice.index].turn;
    seq[k]["achieved_angle"] = st.achieved_angle;
    steps.push_back(Json{{"posed", wire_to_json(st.posed)}, {"bent", wire_to_json(st.bent)}});
  }
  doc["sequence"] = seq;
  doc["steps"] = steps;

  const auto& m = res.motion.manipulation;
  if (m.status == ManipulationStatus::Ok && m.grasp_id >= 0) {
    const auto it = std::find_if(sc.motion.grasps.begin(), sc.motion.grasps.end(),
                                 [&](const GraspPose& g) { return g.id == m.grasp_id; });
    doc["grasp"] = Json{{"id", it->id}, {"arclength", it->arclength}, {"roll", it->roll}, {"jaw_width", it->jaw_width}};
    Json holds = Json::array();
    for (const auto& q : m.hold_configs) holds.push_back(config_json(q));
    doc["hold_configs"] = holds;
    Json trajs = Json::array();
    for (const auto& t : m.motions) {
      Json wp = Json::array();
      for (const auto& q : t.path) wp.push_back(config_json(q));
      trajs.push_back(Json{{"kind", t.kind}, {"lift_count", t.lift_count}, {"lower_count", t.lower_count}, {"waypoints", wp}});
    }
    doc["trajectories"] = trajs;
  } else {
    doc["grasp"] = nullptr;
    doc["hold_configs"] = Json::array();
    doc["trajectories"] = Json::array();
  }
  doc["statistics"] = Json{{"nodes_explored", res.stats.nodes_explored},
                           {"sequences_evaluated", res.stats.sequences_evaluated},
                           {"prunes", res.stats.prunes},
                           {"motion_calls", res.stats.motion_calls}};
  return doc;
}

Json make_trace_document(const SearchResult& res) {
  Json records = Json::array();
  for (const auto& t : res.trace) {
    Json order = Json::array();
    for (int tok : t.tokens) {
      const auto c = StepChoice::from_token(tok);
      order.push_back(Json{{"index", c.index}, {"direction", to_string(c.direction)},
                           {"placement", c.use_alpha ? "alpha" : "beta"}});
    }
    records.push_back(Json{{"order", order},
                           {"fail_step", t.fail_step},
                           {"reason", to_string(t.reason)},
                           {"detail", t.detail},
                           {"time", t.time}});
  }
  return Json{{"status", to_string(res.status)},
              {"reason", res.reason},
              {"statistics", Json{{"nodes_explored", res.stats.nodes_explored},
                                  {"sequences_evaluated", res.stats.sequences_evaluated},
                                  {"prunes", res.stats.prunes},
                                  {"motion_calls", res.stats.motion_calls},
                                  {"wall_time", res.stats.wall_time}}},
              {"records", records}};
}

ReplayVerdict replay_plan(const Json& doc, double tolerance) {
  ReplayVerdict v;
  auto fail = [&](int step, std::string what) {
    v.ok = false;
    v.step = step;
    v.what = std::move(what);
    return v;
  };
  try {
    if (doc.value("format", "") != "wirebend-plan") throw Error(ErrorCode::ParseError, "not a plan document");
    PlanningContext ctx;
    ctx.bends = bendset_from_json(doc.at("bending_set"));
    ctx.machine = machine_from_json(doc.at("machine"));
    const RobotModel robot = robot_from_json(doc.at("robot"));
    const WorldConfig world = world_from_json(doc.at("world"));
    ctx.env = make_environment(world, robot);
    ctx.sim.clearance = doc.at("config").at("clearance").get<double>();
    const auto seq = sequence_from_json(doc.at("sequence"));
    const auto& steps = doc.at("steps");
    if (!is_valid_sequence(seq, static_cast<int>(ctx.bends.size()))) return fail(-1, "sequence is not a permutation");
    if (steps.size() != seq.size()) return fail(-1, "step count does not match the sequence");

    WireState wire = initial_wire(ctx);
    std::vector<WireState> posed, bent;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      const auto& rec = doc["sequence"][k];
      if (std::abs(rec.at("target_angle").get<double>() - ctx.bends.candidates[seq[k].index].turn) > tolerance) {
        return fail(static_cast<int>(k), "target angle differs from the bending set");
      }
      const auto out = simulate_step(ctx, wire, seq[k]);
      if (!out.ok) return fail(static_cast<int>(k), std::string("step fails on re-simulation: ") + to_string(out.reason));
      if (std::abs(out.record.achieved_angle - rec.at("achieved_angle").get<double>()) > tolerance) {
        return fail(static_cast<int>(k), "achieved angle differs");
      }
      const auto want_posed = wire_from_json(steps[k].at("posed"));
      const auto want_bent = wire_from_json(steps[k].at("bent"));
      if (wire_distance(out.record.posed, want_posed) > tolerance) return fail(static_cast<int>(k), "posed wire differs");
      if (wire_distance(out.record.bent, want_bent) > tolerance) return fail(static_cast<int>(k), "bent wire differs");
      posed.push_back(out.record.posed);
      bent.push_back(out.record.bent);
      wire = out.next;
      ++v.steps_checked;
    }

    if (doc.at("grasp").is_null()) return v;
    const GraspConfig gcfg = grasps_from_json(doc.at("grasp_config"));
    const auto setup = make_motion_setup(ctx, robot, gcfg, doc.at("config").at("seed").get<std::uint64_t>());
    const auto& gj = doc["grasp"];
    const GraspPose g{gj.at("id").get<int>(), gj.at("arclength").get<double>(), gj.at("roll").get<double>(),
                      gj.at("jaw_width").get<double>()};
    const auto& holds = doc.at("hold_configs");
    const auto& trajs = doc.at("trajectories");
    if (holds.size() != seq.size() || trajs.size() != seq.size()) return fail(-1, "motion data incomplete");
    const auto actions = bend_actions(ctx.bends);
    std::vector<JointConfig> q;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      q.push_back(config_from(holds[k]));
      const auto [pe, re] = pose_error(forward_kinematics(robot, q[k]), grasp_world_pose(g, posed[k]));
      if (pe > 1e-4 || re > 1e-3) return fail(static_cast<int>(k), "hold configuration misses the grasp");
      const auto sides = bend_sides(posed[k], actions[seq[k].index], seq[k].use_alpha);
      if (g.arclength < sides.fixed_lo || g.arclength > sides.fixed_hi) {
        return fail(static_cast<int>(k), "grasp lies on the moving side of the bend");
      }
    }
    MotionOptions mo;
    for (std::size_t k = 0; k < trajs.size(); ++k) {
      const auto& t = trajs[k];
      std::vector<JointConfig> wp;
      for (const auto& e : t.at("waypoints")) wp.push_back(config_from(e));
      if (wp.empty()) return fail(static_cast<int>(k), "empty trajectory");
      const JointConfig& start = k == 0 ? robot.home : q[k - 1];
      if ((wp.front() - start).cwiseAbs().maxCoeff() > 1e-9 || (wp.back() - q[k]).cwiseAbs().maxCoeff() > 1e-9) {
        return fail(static_cast<int>(k), "trajectory endpoints do not match");
      }
      std::optional<Attachment> held;
      if (k > 0) held = attach(bent[k - 1], g.arclength, forward_kinematics(robot, q[k - 1]));
      const Attachment* hp = held ? &*held : nullptr;
      const int lift = t.value("lift_count", 0), lower = t.value("lower_count", 0);
      const int m = static_cast<int>(wp.size());
      for (int i = 0; i < m; ++i) {
        const bool in_lift = i < lift || i >= m - lower;
        if (!config_valid(setup.scene, wp[i], hp, {in_lift, nullptr})) {
          return fail(static_cast<int>(k), "waypoint " + std::to_string(i) + " in collision");
        }
        ++v.waypoints_checked;
        if (i + 1 < m) {
          const bool edge_lift = i + 1 < lift || i >= m - lower;
          if ((wp[i + 1] - wp[i]).cwiseAbs().maxCoeff() > mo.waypoint_step + 1e-9) {
            return fail(static_cast<int>(k), "waypoint spacing exceeds the step limit");
          }
          if (!segment_valid(setup.scene, wp[i], wp[i + 1], hp, mo.resolution, {edge_lift, nullptr})) {
            return fail(static_cast<int>(k), "edge " + std::to_string(i) + " in collision");
          }
        }
      }
    }
  } catch (const Error& e) {
    return fail(v.steps_checked, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(-1, std::string("malformed plan: ") + e.what());
  }
  return v;
}

std::string wire_stl(const WireState& w, const std::string& name, int sides, double chord_tolerance) {
  const auto samples = sample_wire(w, 0.0, w.length(), chord_tolerance);
  const double r = 0.5 * w.diameter;
  std::vector<std::vector<Point3>> rings;
  for (std::size_t k = 0; k < samples.points.size(); ++k) {
    const Mat3 f = w.pose.linear() * w.frame_at(samples.arclength[k]);
    std::vector<Point3> ring;
    for (int i = 0; i < sides; ++i) {
      const double a = 2.0 * std::numbers::pi * i / sides;
      ring.push_back(samples.points[k] + r * (std::cos(a) * f.col(1) + std::sin(a) * f.col(2)));
    }
    rings.push_back(std::move(ring));
  }
  std::ostringstream out;
  char buf[160];
  auto facet = [&](const Point3& a, const Point3& b, const Point3& c) {
    Vec3 n = (b - a).cross(c - a);
    if (n.norm() > 0) n.normalize();
    std::snprintf(buf, sizeof buf, "  facet normal %.9g %.9g %.9g\n    outer loop\n", n.x(), n.y(), n.z());
    out << buf;
    for (const Point3* p : {&a, &b, &c}) {
      std::snprintf(buf, sizeof buf, "      vertex %.9g %.9g %.9g\n", p->x(), p->y(), p->z());
      out << buf;
    }
    out << "    endloop\n  endfacet\n";
  };
  out << "solid " << name << "\n";
  for (std::size_t k = 1; k < rings.size(); ++k) {
    for (int i = 0; i < sides; ++i) {
      const int j = (i + 1) % sides;
      facet(rings[k - 1][i], rings[k - 1][j], rings[k][j]);
      facet(rings[k - 1][i], rings[k][j], rings[k][i]);
    }
  }
  if (!rings.empty()) {
    const Point3 c0 = samples.points.front(), c1 = samples.points.back();
    for (int i = 0; i < sides; ++i) {
      const int j = (i + 1) % sides;
      facet(c0, rings.front()[j], rings.front()[i]);
      facet(c1, rings.back()[i], rings.back()[j]);
    }
  }
  out << "endsolid " << name << "\n";
  return out.str();
}

std::vector<std::pair<std::string, std::string>> plan_meshes(const Json& doc) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto& steps = doc.at("steps");
  auto name = [](std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%02zu", k);
    return std::string(buf);
  };
  if (steps.empty()) return out;
  out.emplace_back(name(0) + ".stl", wire_stl(wire_from_json(steps[0].at("posed")), name(0)));
  for (std::size_t k = 0; k < steps.size(); ++k) {
    out.emplace_back(name(k + 1) + ".stl", wire_stl(wire_from_json(steps[k].at("bent")), name(k + 1)));
  }
  return out;
}

}  // namespace wirebend

namespace wirebend {

Json approximation_document(const std::vector<Point3>& curve, double epsilon, double wire_diameter,
                            const MachineModel& machine, double min_bend_angle) {
  auto pivots = rdp_simplify(curve, epsilon);
  const double deviation = polyline_deviation(curve, pivots);
  Json warnings = Json::array();
  if (pivots.size() < 3) pivots.insert(pivots.begin() + 1, 0.5 * (pivots.front() + pivots.back()));
  BendOptions bo;
  bo.min_bend_angle = min_bend_angle;
  const BendSet set = compute_bending_set(make_pivot_chain(pivots), machine.bend_radius(wire_diameter),
                                          WireSpec{wire_diameter, 0.0}, bo);
  if (set.candidates.empty()) warnings.push_back("curve is straight: the bending set is empty");
  Json piv = Json::array();
  for (const auto& p : pivots) piv.push_back(Json::array({p.x(), p.y(), p.z()}));
  return Json{{"provenance", Json{{"epsilon", epsilon},
                                  {"input_points", curve.size()},
                                  {"pivots", pivots.size()},
                                  {"candidates", set.candidates.size()},
                                  {"wire_diameter", wire_diameter}}},
              {"max_deviation", deviation},
              {"warnings", warnings},
              {"pivots", piv},
              {"bending_set", to_json(set)}};
}

}  // namespace wirebend
