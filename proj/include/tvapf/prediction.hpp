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

#ifndef TVAPF__PREDICTION_HPP_
#define TVAPF__PREDICTION_HPP_

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvapf::prediction
{

class InvalidBounds : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class NoSolution : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

struct Interval
{
  double min{0.0};
  double max{0.0};
};

/// Longitudinal state of a tracked actor in the Frenet frame. Speeds are magnitudes along the
/// actor's own travel direction, which is +1 along increasing s and -1 for oncoming traffic.
struct ObstacleState
{
  std::string id;
  double s_o{0.0};
  double d_o{0.0};
  double v_o{0.0};
  double a_o{0.0};
  Interval v_bounds{0.0, 12.5};
  Interval a_bounds{-0.9, 0.9};
  int direction{1};
};

struct ForecastStep
{
  double delta_s{0.0};
  double s_center{0.0};
  double s_min{0.0};
  double s_max{0.0};
};

struct UncertainForecast
{
  std::string id;
  double d_o{0.0};
  int direction{1};
  double T_s{0.5};
  std::vector<ForecastStep> steps;
};

struct TvapfParams
{
  double sigma_s{10.0};
  double sigma_d{0.5};
  int c{4};
  double alpha_s{2.0};
  double alpha_d{2.0};
  double l_W{4.0};
  double epsilon_o{0.05};
  double edge_value{0.36787944117144233};
};

void validate(const TvapfParams & params);

/// Bounding rollouts of the discrete obstacle model. Throws InvalidBounds on unordered bounds.
UncertainForecast propagate_obstacle(const ObstacleState & obstacle, double T_s, int N);

struct Scales
{
  double gamma_s{1.0};
  double gamma_d{1.0};
};

/// Scales from the alphas stored in params.
Scales tvapf_scales(const ForecastStep & step, const TvapfParams & params);

/// Returns params with alpha_s and alpha_d chosen so the field equals edge_value at the edge of
/// the safety zone for a reachable-set spread delta_s. Throws NoSolution when edge_value is not
/// in (0, 1).
TvapfParams calibrate_alphas(const TvapfParams & params, double delta_s = 0.0);

/// Scales with alphas calibrated to the spread of this step.
Scales calibrated_scales(const ForecastStep & step, const TvapfParams & params);

double tvapf_value(double s, double d, double s_o, double d_o, const Scales & scales, int c);
double tvapf_value(
  double s, double d, const UncertainForecast & forecast, std::size_t j, const TvapfParams & params);

struct FieldTaylor
{
  double value{0.0};
  Eigen::Vector2d gradient{Eigen::Vector2d::Zero()};
  Eigen::Matrix2d hessian{Eigen::Matrix2d::Zero()};
};

/// Value, gradient and Hessian with respect to (s, d).
FieldTaylor tvapf_taylor(double s, double d, double s_o, double d_o, const Scales & scales, int c);

/// Sum of the calibrated fields of all forecasts at step j.
double total_obstacle_field(
  double s, double d, const std::vector<UncertainForecast> & forecasts, std::size_t j,
  const TvapfParams & params);
FieldTaylor total_obstacle_taylor(
  double s, double d, const std::vector<UncertainForecast> & forecasts, std::size_t j,
  const TvapfParams & params);

/// Half extent of the superlevel set {W_o >= level} along one axis for scale gamma.
inline double level_half_width(double gamma, double level, int c)
{
  return gamma * std::pow(-std::log(level), 1.0 / c);
}

}  // namespace tvapf::prediction

#endif  // TVAPF__PREDICTION_HPP_
