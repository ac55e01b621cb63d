#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpisp/instance.hpp"

namespace mpisp {

/// One row of a Solomon VRPTW file. Node 0 is the depot.
struct SolomonNode {
  int id = 0;
  double x = 0, y = 0, demand = 0, ready = 0, due = 0, service = 0;
};

struct SolomonData {
  std::string name;
  int vehicles = 0;
  double capacity = 0;
  std::vector<SolomonNode> nodes;  // index == id, depot first
};

namespace detail {

inline bool numeric_row(const std::string& line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c)) && !std::isdigit(static_cast<unsigned char>(c)) &&
        c != '.' && c != '-' && c != '+' && c != 'e' && c != 'E')
      return false;
  return line.find_first_not_of(" \t\r\n") != std::string::npos;
}

}  // namespace detail

/// Parses the classic Solomon table layout: instance name, a VEHICLE block
/// (fleet size, capacity), then CUSTOMER rows of
///   id  x  y  demand  ready  due  service
/// with the depot as row 0. Data errors throw std::runtime_error naming the
/// offending line.
inline SolomonData parse_solomon(std::istream& in, const std::string& origin) {
  SolomonData data;
  std::string line;
  int lineno = 0;
  auto err = [&](const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + msg);
  };

  enum { kName, kVehicle, kCustomer } section = kName;
  bool have_fleet = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.pop_back();
    std::size_t first = trimmed.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    trimmed = trimmed.substr(first);

    if (section == kName) {
      data.name = trimmed;
      section = kVehicle;
      continue;
    }
    if (trimmed == "VEHICLE" || trimmed == "CUSTOMER") continue;
    if (trimmed.find("NUMBER") != std::string::npos ||
        trimmed.find("CUST NO") != std::string::npos)
      continue;  // column header rows

    if (!detail::numeric_row(trimmed)) err("unrecognized line '" + trimmed + "'");
    std::istringstream row(trimmed);
    if (!have_fleet) {
      if (!(row >> data.vehicles >> data.capacity))
        err("expected fleet size and capacity");
      if (data.vehicles < 1 || data.capacity <= 0) err("implausible VEHICLE row");
      have_fleet = true;
      section = kCustomer;
      continue;
    }
    SolomonNode nd;
    if (!(row >> nd.id >> nd.x >> nd.y >> nd.demand >> nd.ready >> nd.due >> nd.service))
      err("expected 7 customer columns");
    double extra;
    if (row >> extra) err("trailing columns on customer row");
    if (nd.id != static_cast<int>(data.nodes.size()))
      err("customer ids must be contiguous from 0");
    if (nd.due < nd.ready) err("due date precedes ready time");
    if (nd.demand < 0 || nd.service < 0) err("negative demand or service");
    data.nodes.push_back(nd);
  }
  if (!have_fleet) err("missing VEHICLE block");
  if (data.nodes.size() < 2) err("need a depot row and at least one customer");
  const SolomonNode& depot = data.nodes[0];
  if (depot.demand != 0 || depot.service != 0)
    throw std::runtime_error(origin + ": depot must have zero demand/service");
  if (depot.ready != 0)
    throw std::runtime_error(origin + ": depot ready time must be 0");
  return data;
}

inline SolomonData parse_solomon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  return parse_solomon(in, path);
}

struct GenOptions {
  int w = 1;  // working periods (equal slices of the depot horizon)
  int m = 7;  // inspectors
  double Q = 200;
  TravelRounding rounding = TravelRounding::kNone;
  bool toptw = false;  // team-orienteering mode: w = 1, Q = +inf
};

/// Derives an MPISP instance from a Solomon file: depot horizon split into w
/// equal periods, demand reinterpreted as workload, m and Q set by the
/// options (the Solomon fleet data is ignored).
inline Instance generate_mpisp(const SolomonData& src, GenOptions opt) {
  if (opt.toptw) {
    opt.w = 1;
    opt.Q = kInf;
  }
  if (opt.w < 1) throw std::invalid_argument("w must be >= 1");
  if (opt.m < 1) throw std::invalid_argument("m must be >= 1");
  const SolomonNode& depot = src.nodes[0];
  if (!(depot.due > 0))
    throw std::runtime_error(src.name + ": depot horizon must be positive");

  Instance inst;
  std::string lower = src.name;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  inst.name = lower + "_w" + std::to_string(opt.w) + "_m" + std::to_string(opt.m) +
              (opt.toptw ? "_toptw" : "");
  inst.source = src.name;
  inst.m = opt.m;
  inst.Q = opt.Q;
  inst.grid = {opt.w, depot.due};
  inst.depot_x = depot.x;
  inst.depot_y = depot.y;
  inst.rounding = opt.rounding;
  inst.suppliers.reserve(src.nodes.size() - 1);
  for (std::size_t i = 1; i < src.nodes.size(); ++i) {
    const SolomonNode& nd = src.nodes[i];
    Supplier s;
    s.id = nd.id;
    s.x = nd.x;
    s.y = nd.y;
    s.workload = nd.demand;
    s.service = nd.service;
    s.e = nd.ready;
    s.l = std::min(nd.due, depot.due);
    inst.suppliers.push_back(s);
  }
  build_travel(inst);
  return inst;
}

}  // namespace mpisp
