// Copyright 2026 The TVAPF Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tvapf/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tvapf::scenario
{
namespace
{
using json = nlohmann::ordered_json;
constexpr double kPi = 3.14159265358979323846;

std::string join(const std::vector<std::string> & lines)
{
  std::string out;
  for (const auto & l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

// Reads typed fields and records diagnostics instead of throwing so every problem is reported.
class Reader
{
public:
  Reader(const std::string & text, std::string source) : text_(text), source_(std::move(source)) {}

  void error(const std::string & pointer, const std::string & message)
  {
    errors_.push_back(fmt::format("{}:{}: {}: {}", source_, line_of(pointer), pointer, message));
  }

  const std::vector<std::string> & errors() const { return errors_; }

  const json * object(const json & parent, const std::string & key, const std::string & ptr, bool required)
  {
    const std::string p = ptr + "/" + key;
    if (!parent.contains(key)) {
      if (required) error(ptr.empty() ? "/" : ptr, fmt::format("missing object '{}'", key));
      return nullptr;
    }
    if (!parent.at(key).is_object()) {
      error(p, "expected an object");
      return nullptr;
    }
    return &parent.at(key);
  }

  void allow(const json & obj, const std::string & ptr, std::initializer_list<const char *> keys)
  {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto & item : obj.items()) {
      if (allowed.count(item.key()) == 0) error(ptr + "/" + item.key(), "unknown key");
    }
  }

  void number(const json & obj, const std::string & key, const std::string & ptr, double & out, bool required = false)
  {
    if (!obj.contains(key)) {
      if (required) error(ptr, fmt::format("missing number '{}'", key));
      return;
    }
    const json & v = obj.at(key);
    if (!v.is_number()) {
      error(ptr + "/" + key, "expected a number");
      return;
    }
    out = v.get<double>();
  }

  void integer(const json & obj, const std::string & key, const std::string & ptr, int & out, bool required = false)
  {
    if (!obj.contains(key)) {
      if (required) error(ptr, fmt::format("missing integer '{}'", key));
      return;
    }
    const json & v = obj.at(key);
    if (!v.is_number_integer()) {
      error(ptr + "/" + key, "expected an integer");
      return;
    }
    out = v.get<int>();
  }

  void interval(const json & obj, const std::string & key, const std::string & ptr, prediction::Interval & out)
  {
    if (!obj.contains(key)) return;
    const json & v = obj.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      error(ptr + "/" + key, "expected [min, max]");
      return;
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  template <int Size>
  void vector(const json & obj, const std::string & key, const std::string & ptr, Eigen::Matrix<double, Size, 1> & out)
  {
    if (!obj.contains(key)) return;
    const json & v = obj.at(key);
    if (!v.is_array() || static_cast<int>(v.size()) != Size) {
      error(ptr + "/" + key, fmt::format("expected an array of {} numbers", Size));
      return;
    }
    for (int i = 0; i < Size; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) {
        error(ptr + "/" + key + "/" + std::to_string(i), "expected a number");
        return;
      }
      out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
  }

  // Line of the last key named in a JSON pointer, located by scanning the source text.
  int line_of(const std::string & pointer) const
  {
    std::size_t pos = 0;
    int skip = 0;
    std::stringstream ss(pointer);
    std::string token;
    while (std::getline(ss, token, '/')) {
      if (token.empty()) continue;
      if (std::all_of(token.begin(), token.end(), ::isdigit)) {
        skip = std::stoi(token);
        continue;
      }
      const std::string needle = "\"" + token + "\"";
      std::size_t found = text_.find(needle, pos);
      for (int i = 0; i < skip && found != std::string::npos; ++i) {
        found = text_.find(needle, found + 1);
      }
      if (found == std::string::npos) break;
      pos = found;
      skip = 0;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

private:
  const std::string & text_;
  std::string source_;
  std::vector<std::string> errors_;
};

void derive_limits(Scenario & sc)
{
  const double half_width = 0.8;
  const double left = 0.5 * sc.path.lane_count * sc.path.lane_width;
  auto & p = sc.planner;
  p.d_bounds = {-left + half_width, left - half_width};
  p.nu_bounds = {0.0, sc.limits.v_max};
  p.alpha_bounds = {-sc.limits.a_max, sc.limits.a_max};
  auto & t = sc.tracker;
  // A planner knot may change the acceleration by less than the tracker can within one tick.
  const double d_alpha = 0.9 * sc.limits.jerk_max * std::min(p.T_s, t.T_s);
  p.d_alpha_bounds = {-d_alpha, d_alpha};
  const double a_track = 0.999 * sc.limits.a_max;
  t.a_bounds = {-a_track, a_track};
  t.da_bounds = {-sc.limits.jerk_max * t.T_s, sc.limits.jerk_max * t.T_s};
  t.delta_max = sc.limits.steer_max_deg * kPi / 180.0;
  t.yaw_rate_max = sc.limits.yaw_rate_max_deg * kPi / 180.0;
  sc.potentials.v_des = sc.ego.v_des;
}

json interval_json(const prediction::Interval & i) { return json::array({i.min, i.max}); }
}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
: std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics))
{
}

Scenario parse_scenario(const std::string & text, const std::string & source)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error & e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw ScenarioError({fmt::format("{}:{}: invalid JSON: {}", source, line, e.what())});
  }
  Reader r(text, source);
  Scenario sc;
  if (!root.is_object()) {
    throw ScenarioError({fmt::format("{}:1: top level must be an object", source)});
  }
  r.allow(root, "", {"path", "ego", "actors", "limits", "tvapf", "weights", "planner", "tracker", "sim"});

  if (const json * p = r.object(root, "path", "", true)) {
    r.allow(*p, "/path", {"points", "lane_width", "lane_count", "speed_limit"});
    if (!p->contains("points") || !p->at("points").is_array()) {
      r.error("/path", "missing array 'points'");
    } else {
      const json & pts = p->at("points");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const json & q = pts[i];
        if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number()) {
          r.error(fmt::format("/path/points/{}", i), "expected [x, y]");
          continue;
        }
        sc.path.points.push_back({q[0].get<double>(), q[1].get<double>()});
      }
    }
    r.number(*p, "lane_width", "/path", sc.path.lane_width, true);
    r.integer(*p, "lane_count", "/path", sc.path.lane_count, true);
    if (p->contains("speed_limit")) {
      const json & v = p->at("speed_limit");
      if (v.is_number()) {
        sc.path.speed_limits = {{0.0, v.get<double>()}};
      } else if (v.is_array()) {
        sc.path.speed_limits.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_number() || !v[i][1].is_number()) {
            r.error(fmt::format("/path/speed_limit/{}", i), "expected [s_start, limit]");
            continue;
          }
          sc.path.speed_limits.push_back({v[i][0].get<double>(), v[i][1].get<double>()});
        }
      } else {
        r.error("/path/speed_limit", "expected a number or [[s_start, limit], ...]");
      }
    }
  }

  if (const json * e = r.object(root, "ego", "", true)) {
    r.allow(*e, "/ego", {"x0", "y0", "theta0", "v0", "v_des"});
    r.number(*e, "x0", "/ego", sc.ego.x0, true);
    r.number(*e, "y0", "/ego", sc.ego.y0, true);
    r.number(*e, "theta0", "/ego", sc.ego.theta0, true);
    r.number(*e, "v0", "/ego", sc.ego.v0, true);
    r.number(*e, "v_des", "/ego", sc.ego.v_des, true);
  }

  if (root.contains("actors")) {
    const json & actors = root.at("actors");
    if (!actors.is_array()) {
      r.error("/actors", "expected an array");
    } else {
      for (std::size_t i = 0; i < actors.size(); ++i) {
        const std::string ptr = fmt::format("/actors/{}", i);
        const json & a = actors[i];
        if (!a.is_object()) {
          r.error(ptr, "expected an object");
          continue;
        }
        r.allow(a, ptr, {"id", "s0", "d0", "v0", "direction", "script", "v_bounds", "a_bounds"});
        ActorSpec spec;
        spec.id = fmt::format("A{}", i + 1);
        if (a.contains("id")) {
          if (a.at("id").is_string()) spec.id = a.at("id").get<std::string>();
          else r.error(ptr + "/id", "expected a string");
        }
        r.number(a, "s0", ptr, spec.s0, true);
        r.number(a, "d0", ptr, spec.d0, true);
        r.number(a, "v0", ptr, spec.v0, true);
        r.integer(a, "direction", ptr, spec.direction);
        r.interval(a, "v_bounds", ptr, spec.v_bounds);
        r.interval(a, "a_bounds", ptr, spec.a_bounds);
        if (a.contains("script")) {
          const json & s = a.at("script");
          if (!s.is_array()) {
            r.error(ptr + "/script", "expected an array");
          } else {
            for (std::size_t k = 0; k < s.size(); ++k) {
              const std::string sp = fmt::format("{}/script/{}", ptr, k);
              if (!s[k].is_object()) {
                r.error(sp, "expected {t, target_v}");
                continue;
              }
              r.allow(s[k], sp, {"t", "target_v"});
              ScriptPoint point;
              r.number(s[k], "t", sp, point.t, true);
              r.number(s[k], "target_v", sp, point.target_v, true);
              spec.script.push_back(point);
            }
          }
        }
        sc.actors.push_back(spec);
      }
    }
  }

  if (const json * l = r.object(root, "limits", "", false)) {
    r.allow(*l, "/limits", {"v_max", "a_max", "jerk_max", "yaw_rate_max_deg", "steer_max_deg"});
    r.number(*l, "v_max", "/limits", sc.limits.v_max);
    r.number(*l, "a_max", "/limits", sc.limits.a_max);
    r.number(*l, "jerk_max", "/limits", sc.limits.jerk_max);
    r.number(*l, "yaw_rate_max_deg", "/limits", sc.limits.yaw_rate_max_deg);
    r.number(*l, "steer_max_deg", "/limits", sc.limits.steer_max_deg);
  }

  if (const json * t = r.object(root, "tvapf", "", false)) {
    r.allow(*t, "/tvapf", {"sigma_s", "sigma_d", "c", "edge_value", "epsilon_o"});
    r.number(*t, "sigma_s", "/tvapf", sc.tvapf.sigma_s);
    r.number(*t, "sigma_d", "/tvapf", sc.tvapf.sigma_d);
    r.integer(*t, "c", "/tvapf", sc.tvapf.c);
    r.number(*t, "edge_value", "/tvapf", sc.tvapf.edge_value);
    r.number(*t, "epsilon_o", "/tvapf", sc.tvapf.epsilon_o);
  }

  if (const json * w = r.object(root, "weights", "", false)) {
    r.allow(*w, "/weights", {"K_v", "K_b", "K_l", "K_c", "K_o", "eta"});
    r.number(*w, "K_v", "/weights", sc.potentials.K_v);
    r.number(*w, "K_b", "/weights", sc.potentials.K_b);
    r.number(*w, "K_l", "/weights", sc.potentials.K_l);
    r.number(*w, "K_c", "/weights", sc.potentials.K_c);
    r.number(*w, "K_o", "/weights", sc.planner.K_o);
    r.number(*w, "eta", "/weights", sc.potentials.eta);
  }

  if (const json * p = r.object(root, "planner", "", false)) {
    r.allow(*p, "/planner", {"T_sL", "N_L", "instance_period", "terminal", "omega_max", "d_omega_max", "max_iterations"});
    r.number(*p, "T_sL", "/planner", sc.planner.T_s);
    r.integer(*p, "N_L", "/planner", sc.planner.N);
    r.number(*p, "instance_period", "/planner", sc.planner.instance_period);
    double omega_max = sc.planner.omega_bounds.max;
    r.number(*p, "omega_max", "/planner", omega_max);
    sc.planner.omega_bounds = {-omega_max, omega_max};
    double d_omega_max = sc.planner.d_omega_bounds.max;
    r.number(*p, "d_omega_max", "/planner", d_omega_max);
    sc.planner.d_omega_bounds = {-d_omega_max, d_omega_max};
    r.integer(*p, "max_iterations", "/planner", sc.planner.max_iterations);
    if (const json * t = r.object(*p, "terminal", "/planner", false)) {
      r.allow(*t, "/planner/terminal", {"tau", "j_max", "alpha_min", "nu_ter", "eps_d", "eps_psi"});
      auto & term = sc.planner.terminal;
      r.number(*t, "tau", "/planner/terminal", term.tau);
      r.number(*t, "j_max", "/planner/terminal", term.j_max);
      r.number(*t, "alpha_min", "/planner/terminal", term.alpha_min);
      r.number(*t, "nu_ter", "/planner/terminal", term.nu_ter);
      r.number(*t, "eps_d", "/planner/terminal", term.eps_d);
      r.number(*t, "eps_psi", "/planner/terminal", term.eps_psi);
    }
  }

  if (const json * t = r.object(root, "tracker", "", false)) {
    r.allow(*t, "/tracker", {"T_sMPC", "N_P", "Q", "R", "rho", "wheelbase", "e_bounds", "w_delta_max", "sigma_zero", "max_iterations"});
    r.number(*t, "T_sMPC", "/tracker", sc.tracker.T_s);
    r.integer(*t, "N_P", "/tracker", sc.tracker.N);
    r.vector<5>(*t, "Q", "/tracker", sc.tracker.Q);
    r.vector<2>(*t, "R", "/tracker", sc.tracker.R);
    r.number(*t, "rho", "/tracker", sc.tracker.rho);
    r.number(*t, "wheelbase", "/tracker", sc.tracker.wheelbase);
    r.vector<4>(*t, "e_bounds", "/tracker", sc.tracker.e_bounds);
    double w_max = sc.tracker.w_bounds.max;
    r.number(*t, "w_delta_max", "/tracker", w_max);
    sc.tracker.w_bounds = {-w_max, w_max};
    r.number(*t, "sigma_zero", "/tracker", sc.tracker.sigma_zero);
    r.integer(*t, "max_iterations", "/tracker", sc.tracker.max_iterations);
  }

  if (const json * s = r.object(root, "sim", "", false)) {
    r.allow(*s, "/sim", {"duration", "plant_step", "sensor_range", "footprint_margin"});
    r.number(*s, "duration", "/sim", sc.sim.duration);
    r.number(*s, "plant_step", "/sim", sc.sim.plant_step);
    r.number(*s, "sensor_range", "/sim", sc.sim.sensor_range);
    r.number(*s, "footprint_margin", "/sim", sc.sim.footprint_margin);
  }

  if (!r.errors().empty()) {
    throw ScenarioError(r.errors());
  }
  derive_limits(sc);
  try {
    validate(sc);
  } catch (const ScenarioError & e) {
    std::vector<std::string> located;
    for (const auto & d : e.diagnostics()) {
      const auto colon = d.find(':');
      const std::string ptr = d.substr(0, colon);
      located.push_back(fmt::format("{}:{}: {}", source, r.line_of(ptr), d));
    }
    throw ScenarioError(located);
  }
  return sc;
}

Scenario load_scenario(const std::string & file)
{
  std::ifstream in(file);
  if (!in) {
    throw ScenarioError({fmt::format("{}: cannot open file", file)});
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), file);
}

void validate(const Scenario & sc)
{
  std::vector<std::string> errs;
  auto check = [&errs](bool ok, const std::string & ptr, const std::string & msg) {
    if (!ok) errs.push_back(ptr + ": " + msg);
  };
  const Limits & lim = sc.limits;
  check(lim.v_max > 0 && lim.a_max > 0 && lim.jerk_max > 0, "/limits", "limits must be positive");
  check(lim.yaw_rate_max_deg > 0 && lim.steer_max_deg > 0 && lim.steer_max_deg < 90, "/limits", "angular limits must be in (0, 90) degrees");
  check(sc.path.points.size() >= 2, "/path/points", "need at least two points");
  check(sc.path.lane_count >= 1, "/path/lane_count", "need at least one lane");
  check(sc.path.lane_width > 0, "/path/lane_width", "must be positive");
  for (const auto & seg : sc.path.speed_limits) {
    check(seg.speed_limit > 0 && seg.speed_limit <= lim.v_max + 1e-9, "/path/speed_limit", "limits must lie in (0, v_max]");
  }
  check(sc.ego.v0 >= 0 && sc.ego.v0 <= lim.v_max, "/ego/v0", "must lie in [0, v_max]");
  check(sc.ego.v_des > 0 && sc.ego.v_des <= lim.v_max, "/ego/v_des", "must lie in (0, v_max]");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < sc.actors.size(); ++i) {
    const ActorSpec & a = sc.actors[i];
    const std::string ptr = fmt::format("/actors/{}", i);
    check(ids.insert(a.id).second, ptr + "/id", "duplicate actor id " + a.id);
    check(a.direction == 1 || a.direction == -1, ptr + "/direction", "must be 1 or -1");
    check(a.v_bounds.min >= 0 && a.v_bounds.min <= a.v_bounds.max && a.v_bounds.max <= lim.v_max,
          ptr + "/v_bounds", "need 0 <= min <= max <= v_max");
    check(a.a_bounds.min <= a.a_bounds.max && a.a_bounds.min >= -lim.a_max && a.a_bounds.max <= lim.a_max,
          ptr + "/a_bounds", "need -a_max <= min <= max <= a_max");
    check(a.v0 >= a.v_bounds.min && a.v0 <= a.v_bounds.max, ptr + "/v0", "must lie within v_bounds");
    for (std::size_t k = 0; k < a.script.size(); ++k) {
      const std::string sp = fmt::format("{}/script/{}", ptr, k);
      check(k == 0 || a.script[k].t > a.script[k - 1].t, sp + "/t", "script times must increase");
      check(a.script[k].target_v >= a.v_bounds.min && a.script[k].target_v <= a.v_bounds.max,
            sp + "/target_v", "must lie within v_bounds");
    }
  }
  const auto & t = sc.tvapf;
  check(t.c >= 2 && t.c % 2 == 0, "/tvapf/c", "must be even and >= 2");
  check(t.sigma_s >= 0 && t.sigma_d >= 0, "/tvapf/sigma_s", "margins must be >= 0");
  check(t.edge_value > 0 && t.edge_value < 1, "/tvapf/edge_value", "must lie in (0, 1)");
  check(t.epsilon_o > 0 && t.epsilon_o < 1, "/tvapf/epsilon_o", "must lie in (0, 1)");
  const auto & pot = sc.potentials;
  check(pot.K_v >= 0 && pot.K_b >= 0 && pot.K_l >= 0 && pot.K_c >= 0 && sc.planner.K_o >= 0, "/weights", "weights must be >= 0");
  check(pot.eta > 0, "/weights/eta", "must be positive");
  try {
    planner::validate(sc.planner);
  } catch (const std::invalid_argument & e) {
    errs.push_back(std::string("/planner: ") + e.what());
  }
  try {
    tracker::validate(sc.tracker);
    tracker::check_input_consistency(sc.tracker, sc.planner);
  } catch (const std::invalid_argument & e) {
    errs.push_back(std::string("/tracker: ") + e.what());
  }
  const auto & sim = sc.sim;
  check(sim.duration > 0, "/sim/duration", "must be positive");
  check(sim.plant_step > 0, "/sim/plant_step", "must be positive");
  check(sim.sensor_range > 0, "/sim/sensor_range", "must be positive");
  if (sim.plant_step > 0) {
    const double r1 = sc.tracker.T_s / sim.plant_step;
    check(std::abs(r1 - std::round(r1)) < 1e-9 && r1 >= 1, "/tracker/T_sMPC", "must be a multiple of the plant step");
    const double r2 = sc.planner.instance_period / sc.tracker.T_s;
    check(std::abs(r2 - std::round(r2)) < 1e-9, "/planner/instance_period", "must be a multiple of T_sMPC");
  }
  check(sc.tracker.N * sc.tracker.T_s + sc.planner.instance_period <= sc.planner.N * sc.planner.T_s + 1e-9,
        "/tracker/N_P", "tracker window must fit in the planner horizon after one instance period");
  if (errs.empty()) {
    try {
      build_path(sc);
    } catch (const std::exception & e) {
      errs.push_back(std::string("/path: ") + e.what());
    }
  }
  if (!errs.empty()) {
    throw ScenarioError(errs);
  }
}

nlohmann::ordered_json to_json(const Scenario & sc)
{
  json root;
  json pts = json::array();
  for (const auto & p : sc.path.points) pts.push_back({p.x, p.y});
  json limits = json::array();
  for (const auto & seg : sc.path.speed_limits) limits.push_back({seg.s_start, seg.speed_limit});
  root["path"] = {{"points", pts}, {"lane_width", sc.path.lane_width}, {"lane_count", sc.path.lane_count}, {"speed_limit", limits}};
  root["ego"] = {{"x0", sc.ego.x0}, {"y0", sc.ego.y0}, {"theta0", sc.ego.theta0}, {"v0", sc.ego.v0}, {"v_des", sc.ego.v_des}};
  json actors = json::array();
  for (const auto & a : sc.actors) {
    json script = json::array();
    for (const auto & s : a.script) script.push_back({{"t", s.t}, {"target_v", s.target_v}});
    actors.push_back({{"id", a.id}, {"s0", a.s0}, {"d0", a.d0}, {"v0", a.v0}, {"direction", a.direction},
                      {"script", script}, {"v_bounds", interval_json(a.v_bounds)}, {"a_bounds", interval_json(a.a_bounds)}});
  }
  root["actors"] = actors;
  root["limits"] = {{"v_max", sc.limits.v_max}, {"a_max", sc.limits.a_max}, {"jerk_max", sc.limits.jerk_max},
                    {"yaw_rate_max_deg", sc.limits.yaw_rate_max_deg}, {"steer_max_deg", sc.limits.steer_max_deg}};
  root["tvapf"] = {{"sigma_s", sc.tvapf.sigma_s}, {"sigma_d", sc.tvapf.sigma_d}, {"c", sc.tvapf.c},
                   {"edge_value", sc.tvapf.edge_value}, {"epsilon_o", sc.tvapf.epsilon_o}};
  root["weights"] = {{"K_v", sc.potentials.K_v}, {"K_b", sc.potentials.K_b}, {"K_l", sc.potentials.K_l},
                     {"K_c", sc.potentials.K_c}, {"K_o", sc.planner.K_o}, {"eta", sc.potentials.eta}};
  const auto & term = sc.planner.terminal;
  root["planner"] = {{"T_sL", sc.planner.T_s}, {"N_L", sc.planner.N}, {"instance_period", sc.planner.instance_period},
                     {"terminal", {{"tau", term.tau}, {"j_max", term.j_max}, {"alpha_min", term.alpha_min},
                                   {"nu_ter", term.nu_ter}, {"eps_d", term.eps_d}, {"eps_psi", term.eps_psi}}},
                     {"omega_max", sc.planner.omega_bounds.max}, {"d_omega_max", sc.planner.d_omega_bounds.max},
                     {"max_iterations", sc.planner.max_iterations}};
  const auto & tr = sc.tracker;
  root["tracker"] = {{"T_sMPC", tr.T_s}, {"N_P", tr.N},
                     {"Q", {tr.Q(0), tr.Q(1), tr.Q(2), tr.Q(3), tr.Q(4)}}, {"R", {tr.R(0), tr.R(1)}},
                     {"rho", tr.rho}, {"wheelbase", tr.wheelbase},
                     {"e_bounds", {tr.e_bounds(0), tr.e_bounds(1), tr.e_bounds(2), tr.e_bounds(3)}},
                     {"w_delta_max", tr.w_bounds.max}, {"sigma_zero", tr.sigma_zero}, {"max_iterations", tr.max_iterations}};
  root["sim"] = {{"duration", sc.sim.duration}, {"plant_step", sc.sim.plant_step},
                 {"sensor_range", sc.sim.sensor_range}, {"footprint_margin", sc.sim.footprint_margin}};
  return root;
}

void apply_overrides(Scenario & sc, double instance_period, double horizon)
{
  if (instance_period > 0.0) sc.planner.instance_period = instance_period;
  if (horizon > 0.0) sc.planner.N = static_cast<int>(std::lround(horizon / sc.planner.T_s));
  validate(sc);
}

geometry::ReferencePath build_path(const Scenario & sc)
{
  return {sc.path.points, sc.path.lane_count, sc.path.lane_width, sc.path.speed_limits};
}

planner::PlannerContext planner_context(const Scenario & sc, const geometry::ReferencePath & path)
{
  planner::PlannerContext ctx;
  ctx.path = &path;
  ctx.config = sc.planner;
  ctx.potentials = sc.potentials;
  ctx.tvapf = sc.tvapf;
  ctx.tvapf.l_W = sc.path.lane_width;
  return ctx;
}

}  // namespace tvapf::scenario
