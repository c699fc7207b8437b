#pragma once

#include <string>

#include <json.hpp>

#include "../algebra/parse.hpp"
#include "../moduli/rank2.hpp"

namespace p5iso {

using json = nlohmann::json;

inline GaussianRational scalar_from_json(const json& j) {
  if (j.is_number_integer()) return GaussianRational(j.get<long>());
  if (j.is_string()) return parse_scalar(j.get<std::string>());
  throw ParseError("expected an exact scalar as string or integer");
}

inline json theta_to_json(const Theta& th) {
  return {{"theta0", th.theta0.str()}, {"theta1", th.theta1.str()}, {"theta_inf", th.theta_inf.str()}};
}

inline Theta theta_from_json(const json& j) {
  Theta th;
  th.theta0 = scalar_from_json(j.at("theta0"));
  th.theta1 = scalar_from_json(j.at("theta1"));
  if (j.contains("theta_inf")) {
    th.theta_inf = scalar_from_json(j.at("theta_inf"));
    if (j.contains("theta") && scalar_from_json(j.at("theta")) != th.theta())
      throw InvalidParameter("theta must equal theta_inf + 1");
  } else if (j.contains("theta")) {
    th.theta_inf = scalar_from_json(j.at("theta")) - GaussianRational(1);
  } else {
    throw ParseError("theta_inf missing");
  }
  return th;
}

inline json point_to_json(const ParabolicPoint& pp, const Theta& th) {
  const auto& p = pp.base;
  json j;
  j["theta"] = theta_to_json(th);
  j["t"] = p.t.str();
  if (p.chart == Rank2Chart::M1) {
    j["chart"] = "M1";
    j["a0"] = p.a0.str();
    j["b0"] = p.b0.str();
    j["c1"] = p.c1.str();
  } else {
    j["chart"] = "M2";
    j["A2"] = p.A2.str();
    j["B1"] = p.B1.str();
    j["C1"] = p.C1.str();
    j["C2"] = p.C2.str();
    j["C3"] = p.C3.str();
  }
  if (pp.line0) j["line0"] = {pp.line0->y1.str(), pp.line0->y2.str()};
  if (pp.line1) j["line1"] = {pp.line1->y1.str(), pp.line1->y2.str()};
  return j;
}

inline std::pair<ParabolicPoint, Theta> point_from_json(const json& j) {
  Theta th = theta_from_json(j.at("theta"));
  ParabolicPoint pp;
  std::string chart = j.at("chart").get<std::string>();
  auto s = [&](const char* k) { return scalar_from_json(j.at(k)); };
  if (chart == "M1") {
    pp.base = Rank2ChartPoint::m1(s("a0"), s("b0"), s("c1"), s("t"));
  } else if (chart == "M2") {
    pp.base = Rank2ChartPoint::m2(s("A2"), s("B1"), s("C1"), s("C2"), s("C3"), s("t"));
  } else {
    throw ParseError("unknown chart " + chart);
  }
  auto pair = [&](const char* k) {
    const json& a = j.at(k);
    if (!a.is_array() || a.size() != 2) throw ParseError(std::string(k) + " must be a pair");
    return ProjPair<GaussianRational>{scalar_from_json(a[0]), scalar_from_json(a[1])};
  };
  if (j.contains("line0")) pp.line0 = pair("line0");
  if (j.contains("line1")) pp.line1 = pair("line1");
  return {pp, th};
}

}  // namespace p5iso
