#pragma once

// Trajectory log, JSON lines.
//   step lines:   {"type":"step","step":i,"pose":[qw,qx,qy,qz,tx,ty,tz],"twist":[vx,vy,vz,wx,wy,wz],
//                  "photometric_error":e,"subgoal":k,"collision":b}
//   final line:   {"type":"result","outcome":"success|collision|timeout|degenerate-flow",
//                  "trans_err":m,"rot_err":r,"steps":n,"subgoals":k}

#include "i2s/executor/executor.hpp"

#include <nlohmann/json.hpp>

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace i2s::executor {

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json pose_to_json(const Pose& p) {
  const auto& q = p.rotation;
  const auto& t = p.translation;
  return nlohmann::json::array({q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z()});
}

inline Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 7) throw LogError("log: pose must be a 7-tuple");
  return Pose(Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()),
              Vec3(j[4].get<double>(), j[5].get<double>(), j[6].get<double>()));
}

inline nlohmann::json to_json(const StepRecord& r) {
  const Vec6 t = r.twist.vector();
  return {{"type", "step"},
          {"step", r.step},
          {"pose", pose_to_json(r.pose)},
          {"twist", {t[0], t[1], t[2], t[3], t[4], t[5]}},
          {"photometric_error", r.photometric_error},
          {"subgoal", r.subgoal},
          {"collision", r.collision}};
}

inline void write_log(std::ostream& os, const TrialResult& result) {
  for (const auto& r : result.records) os << to_json(r).dump() << '\n';
  const nlohmann::json tail = {{"type", "result"},
                               {"outcome", to_string(result.outcome)},
                               {"trans_err", result.trans_err},
                               {"rot_err", result.rot_err},
                               {"steps", result.steps},
                               {"subgoals", result.subgoals}};
  os << tail.dump() << '\n';
}

inline TrialResult read_log(std::istream& is) {
  TrialResult result;
  bool have_result = false;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (have_result) throw LogError("log: data after the result line (line " + std::to_string(lineno) + ")");
    try {
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "step") {
        StepRecord r;
        r.step = j.at("step").get<int>();
        r.pose = pose_from_json(j.at("pose"));
        const auto& tw = j.at("twist");
        if (!tw.is_array() || tw.size() != 6) throw LogError("twist must have 6 entries");
        Vec6 v;
        for (int i = 0; i < 6; ++i) v[i] = tw[static_cast<std::size_t>(i)].get<double>();
        r.twist = Twist(v);
        r.photometric_error = j.at("photometric_error").get<double>();
        r.subgoal = j.at("subgoal").get<int>();
        r.collision = j.at("collision").get<bool>();
        if (r.step != static_cast<int>(result.records.size())) throw LogError("steps out of order");
        result.records.push_back(r);
      } else if (type == "result") {
        result.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        result.trans_err = j.at("trans_err").get<double>();
        result.rot_err = j.at("rot_err").get<double>();
        result.steps = j.at("steps").get<int>();
        result.subgoals = j.at("subgoals").get<int>();
        have_result = true;
      } else {
        throw LogError("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw LogError("log: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_result) throw LogError("log: missing result line");
  if (result.steps != static_cast<int>(result.records.size())) throw LogError("log: step count mismatch");
  return result;
}

}  // namespace i2s::executor
