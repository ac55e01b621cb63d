#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "mpisp/instance.hpp"

namespace mpisp {

/// Self-describing JSON serialization. Euclidean instances store coordinates
/// plus the rounding mode and rebuild the matrix on load (bit-identical);
/// instances with a non-Euclidean matrix store it explicitly.
inline nlohmann::json to_json(const Instance& inst, bool explicit_travel = false) {
  nlohmann::json j;
  j["format"] = "mpisp-instance";
  j["version"] = 1;
  j["name"] = inst.name;
  j["source"] = inst.source;
  j["m"] = inst.m;
  j["Q"] = inst.Q == kInf ? nlohmann::json("inf") : nlohmann::json(inst.Q);
  j["w"] = inst.grid.w;
  j["horizon"] = inst.grid.horizon;
  j["rounding"] = to_string(inst.rounding);
  j["depot"] = {{"x", inst.depot_x}, {"y", inst.depot_y}};
  nlohmann::json sup = nlohmann::json::array();
  for (const Supplier& s : inst.suppliers)
    sup.push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}, {"d", s.workload},
                   {"s", s.service}, {"e", s.e}, {"l", s.l}});
  j["suppliers"] = std::move(sup);
  if (explicit_travel)
    j["travel"] = inst.travel;
  else
    j["travel"] = "euclidean";
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "mpisp-instance")
    throw std::runtime_error("not an mpisp-instance file");
  Instance inst;
  inst.name = j.at("name").get<std::string>();
  inst.source = j.value("source", "");
  inst.m = j.at("m").get<int>();
  const auto& q = j.at("Q");
  inst.Q = q.is_string() ? kInf : q.get<double>();
  inst.grid.w = j.at("w").get<int>();
  inst.grid.horizon = j.at("horizon").get<double>();
  std::string r = j.value("rounding", "none");
  inst.rounding = r == "hundredth" ? TravelRounding::kHundredth : TravelRounding::kNone;
  inst.depot_x = j.at("depot").at("x").get<double>();
  inst.depot_y = j.at("depot").at("y").get<double>();
  for (const auto& js : j.at("suppliers")) {
    Supplier s;
    s.id = js.at("id").get<int>();
    s.x = js.at("x").get<double>();
    s.y = js.at("y").get<double>();
    s.workload = js.at("d").get<double>();
    s.service = js.at("s").get<double>();
    s.e = js.at("e").get<double>();
    s.l = js.at("l").get<double>();
    inst.suppliers.push_back(s);
  }
  if (j.at("travel").is_string())
    build_travel(inst);
  else
    inst.travel = j.at("travel").get<std::vector<std::vector<double>>>();
  return inst;
}

/// Atomic write: dump to <path>.tmp then rename over the target.
inline void save_text(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
    out << text;
    if (!out) throw std::runtime_error(tmp + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error(path + ": rename failed");
}

inline void save_instance(const Instance& inst, const std::string& path) {
  save_text(path, to_json(inst).dump(2) + "\n");
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return instance_from_json(j);
}

}  // namespace mpisp
