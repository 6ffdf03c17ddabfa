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

#include "tvapf/prediction.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tvapf::prediction
{
namespace
{
double ipow(double x, int n)
{
  double r = 1.0;
  for (int i = 0; i < n; ++i) {
    r *= x;
  }
  return r;
}
}  // namespace

void validate(const TvapfParams & params)
{
  if (params.c < 2 || params.c % 2 != 0) {
    throw std::invalid_argument(fmt::format("tvapf c must be even and >= 2, got {}", params.c));
  }
  if (params.sigma_s < 0.0 || params.sigma_d < 0.0) {
    throw std::invalid_argument("tvapf safety margins must be >= 0");
  }
  if (!(params.alpha_s > 0.0) || !(params.alpha_d > 0.0)) {
    throw std::invalid_argument("tvapf alphas must be positive");
  }
  if (!(params.l_W > 0.0)) {
    throw std::invalid_argument("tvapf l_W must be positive");
  }
  if (!(params.edge_value > 0.0 && params.edge_value < 1.0)) {
    throw std::invalid_argument("tvapf edge_value must lie in (0, 1)");
  }
  if (!(params.epsilon_o > 0.0 && params.epsilon_o < 1.0)) {
    throw std::invalid_argument("tvapf epsilon_o must lie in (0, 1)");
  }
}

UncertainForecast propagate_obstacle(const ObstacleState & obstacle, double T_s, int N)
{
  if (N < 1 || !(T_s > 0.0)) {
    throw std::invalid_argument("propagate_obstacle needs N >= 1 and T_s > 0");
  }
  const Interval & vb = obstacle.v_bounds;
  const Interval & ab = obstacle.a_bounds;
  if (!(ab.min <= ab.max)) {
    throw InvalidBounds(fmt::format("actor {}: a_bounds [{}, {}] unordered", obstacle.id, ab.min, ab.max));
  }
  if (!(vb.min <= vb.max) || vb.min < 0.0) {
    throw InvalidBounds(fmt::format(
      "actor {}: v_bounds [{}, {}] must be ordered with min >= 0", obstacle.id, vb.min, vb.max));
  }
  if (obstacle.direction != 1 && obstacle.direction != -1) {
    throw InvalidBounds(fmt::format("actor {}: direction must be +1 or -1", obstacle.id));
  }

  UncertainForecast forecast;
  forecast.id = obstacle.id;
  forecast.d_o = obstacle.d_o;
  forecast.direction = obstacle.direction;
  forecast.T_s = T_s;
  forecast.steps.reserve(static_cast<std::size_t>(N) + 1);

  // Fast and slow rollouts, summed in the same order as any admissible rollout.
  double pos_fast = obstacle.s_o;
  double pos_slow = obstacle.s_o;
  double v_fast = obstacle.v_o;
  double v_slow = obstacle.v_o;
  const double dir = obstacle.direction;
  for (int j = 0; j <= N; ++j) {
    ForecastStep step;
    step.s_min = std::min(pos_fast, pos_slow);
    step.s_max = std::max(pos_fast, pos_slow);
    step.delta_s = std::abs(step.s_max - step.s_min);
    step.s_center = 0.5 * (step.s_max + step.s_min);
    forecast.steps.push_back(step);

    pos_fast += dir * T_s * v_fast;
    pos_slow += dir * T_s * v_slow;
    v_fast = std::clamp(v_fast + T_s * ab.max, vb.min, vb.max);
    v_slow = std::clamp(v_slow + T_s * ab.min, vb.min, vb.max);
  }
  return forecast;
}

Scales tvapf_scales(const ForecastStep & step, const TvapfParams & params)
{
  return {
    (step.delta_s + params.sigma_s) / params.alpha_s,
    (params.l_W + params.sigma_d) / params.alpha_d};
}

TvapfParams calibrate_alphas(const TvapfParams & params, double delta_s)
{
  if (!(params.edge_value > 0.0 && params.edge_value < 1.0)) {
    throw NoSolution(fmt::format("edge_value {} has no finite calibration", params.edge_value));
  }
  const double root = std::pow(-std::log(params.edge_value), 1.0 / params.c);
  TvapfParams out = params;
  const double half_s = 0.5 * delta_s + params.sigma_s;
  const double half_d = 0.5 * params.l_W + params.sigma_d;
  if (!(half_s > 0.0) || !(half_d > 0.0)) {
    throw NoSolution("safety zone has zero extent");
  }
  out.alpha_s = root * (delta_s + params.sigma_s) / half_s;
  out.alpha_d = root * (params.l_W + params.sigma_d) / half_d;
  return out;
}

Scales calibrated_scales(const ForecastStep & step, const TvapfParams & params)
{
  return tvapf_scales(step, calibrate_alphas(params, step.delta_s));
}

double tvapf_value(double s, double d, double s_o, double d_o, const Scales & scales, int c)
{
  const double u = (s - s_o) / scales.gamma_s;
  const double w = (d - d_o) / scales.gamma_d;
  return std::exp(-(ipow(u, c) + ipow(w, c)));
}

double tvapf_value(
  double s, double d, const UncertainForecast & forecast, std::size_t j, const TvapfParams & params)
{
  const ForecastStep & step = forecast.steps.at(j);
  return tvapf_value(s, d, step.s_center, forecast.d_o, calibrated_scales(step, params), params.c);
}

FieldTaylor tvapf_taylor(double s, double d, double s_o, double d_o, const Scales & scales, int c)
{
  const double u = (s - s_o) / scales.gamma_s;
  const double w = (d - d_o) / scales.gamma_d;
  const double uc1 = ipow(u, c - 1);
  const double wc1 = ipow(w, c - 1);
  FieldTaylor t;
  t.value = std::exp(-(uc1 * u + wc1 * w));
  const double gu = c * uc1 / scales.gamma_s;
  const double gw = c * wc1 / scales.gamma_d;
  const double huu = c * (c - 1) * ipow(u, c - 2) / (scales.gamma_s * scales.gamma_s);
  const double hww = c * (c - 1) * ipow(w, c - 2) / (scales.gamma_d * scales.gamma_d);
  t.gradient << -t.value * gu, -t.value * gw;
  t.hessian << t.value * (gu * gu - huu), t.value * gu * gw, t.value * gu * gw,
    t.value * (gw * gw - hww);
  return t;
}

double total_obstacle_field(
  double s, double d, const std::vector<UncertainForecast> & forecasts, std::size_t j,
  const TvapfParams & params)
{
  double total = 0.0;
  for (const auto & f : forecasts) {
    total += tvapf_value(s, d, f, j, params);
  }
  return total;
}

FieldTaylor total_obstacle_taylor(
  double s, double d, const std::vector<UncertainForecast> & forecasts, std::size_t j,
  const TvapfParams & params)
{
  FieldTaylor total;
  for (const auto & f : forecasts) {
    const ForecastStep & step = f.steps.at(j);
    const FieldTaylor t =
      tvapf_taylor(s, d, step.s_center, f.d_o, calibrated_scales(step, params), params.c);
    total.value += t.value;
    total.gradient += t.gradient;
    total.hessian += t.hessian;
  }
  return total;
}

}  // namespace tvapf::prediction
