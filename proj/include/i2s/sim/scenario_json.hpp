#pragma once

#include "i2s/sim/scenario.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace i2s::sim {

namespace detail {

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("scenario json: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// [qw, qx, qy, qz, tx, ty, tz], same layout as the trajectory log
inline nlohmann::json pose_json(const Pose& p) {
  const auto& q = p.rotation;
  const auto& t = p.translation;
  return nlohmann::json::array({q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z()});
}

inline Pose pose_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 7) throw std::invalid_argument("scenario json: pose must be a 7-tuple");
  return Pose(Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()),
              Vec3(j[4].get<double>(), j[5].get<double>(), j[6].get<double>()));
}

}  // namespace detail

inline nlohmann::json to_json(const Scenario& sc) {
  using namespace detail;
  nlohmann::json quads = nlohmann::json::array();
  for (const auto& q : sc.quads) {
    nlohmann::json jq = {{"origin", vec_json(q.origin)},
                         {"edge_u", vec_json(q.edge_u)},
                         {"edge_v", vec_json(q.edge_v)},
                         {"texture",
                          {{"checker_period", q.texture.checker_period},
                           {"noise_scale", q.texture.noise_scale},
                           {"noise_seed", q.texture.noise_seed},
                           {"base", q.texture.base},
                           {"contrast", q.texture.contrast}}},
                         {"hole", nullptr}};
    if (q.hole) jq["hole"] = {q.hole->u0, q.hole->v0, q.hole->u1, q.hole->v1};
    quads.push_back(jq);
  }
  nlohmann::json keyframes = nlohmann::json::array();
  for (const auto& k : sc.keyframes) keyframes.push_back(pose_json(k));
  const auto& in = sc.intrinsics;
  return {{"task", to_string(sc.task)},
          {"seed", sc.seed},
          {"prompt", sc.prompt},
          {"background", sc.background},
          {"intrinsics",
           {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy}, {"width", in.width}, {"height", in.height}}},
          {"body", {{"radius", sc.body.radius}, {"height", sc.body.height}}},
          {"start", pose_json(sc.start)},
          {"keyframes", keyframes},
          {"door_quad", sc.door_quad ? nlohmann::json(*sc.door_quad) : nlohmann::json(nullptr)},
          {"quads", quads}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using namespace detail;
  Scenario sc;
  sc.task = task_from_string(j.at("task").get<std::string>());
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.prompt = j.at("prompt").get<std::string>();
  sc.background = j.at("background").get<double>();
  const auto& in = j.at("intrinsics");
  sc.intrinsics = {in.at("fx").get<double>(), in.at("fy").get<double>(), in.at("cx").get<double>(),
                   in.at("cy").get<double>(), in.at("width").get<int>(),   in.at("height").get<int>()};
  sc.body = {j.at("body").at("radius").get<double>(), j.at("body").at("height").get<double>()};
  sc.start = pose_from(j.at("start"));
  for (const auto& k : j.at("keyframes")) sc.keyframes.push_back(pose_from(k));
  if (!j.at("door_quad").is_null()) sc.door_quad = j.at("door_quad").get<int>();
  for (const auto& jq : j.at("quads")) {
    TexturedQuad q;
    q.origin = vec_from(jq.at("origin"));
    q.edge_u = vec_from(jq.at("edge_u"));
    q.edge_v = vec_from(jq.at("edge_v"));
    const auto& t = jq.at("texture");
    q.texture = {t.at("checker_period").get<double>(), t.at("noise_scale").get<double>(),
                 t.at("noise_seed").get<std::uint64_t>(), t.at("base").get<double>(), t.at("contrast").get<double>()};
    if (!jq.at("hole").is_null()) {
      const auto& h = jq.at("hole");
      q.hole = Aperture{h.at(0).get<double>(), h.at(1).get<double>(), h.at(2).get<double>(), h.at(3).get<double>()};
    }
    sc.quads.push_back(q);
  }
  sc.validate();
  return sc;
}

}  // namespace i2s::sim
