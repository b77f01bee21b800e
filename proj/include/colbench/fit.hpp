#pragma once
#include <string>
#include <vector>

#include "colbench/trial.hpp"

namespace colbench::harness {

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;  // of the log-log line
  double r_squared = 0.0;
  std::string x_label;
  std::string y_label;
};

// Arithmetic over (n, C): numbers, the symbols n and C, + - * / ^, sqrt(),
// log(), parentheses. Used for cost expressions ("n^0.5") and fit axes
// ("n*sqrt(C)"). Throws std::invalid_argument on malformed input.
double eval_expr(const std::string& expr, double n, double C);

double median(std::vector<double> values);  // throws on empty

// Groups raw (x, y) points by exact x, takes the median y per group, then
// least-squares fits ln(median y) against ln(x). Requires >= 3 distinct
// positive x values and positive medians.
ScalingFit fit_points(const std::vector<std::pair<double, double>>& points,
                      const std::string& x_label, const std::string& y_label);

// y_field: one of makespan, collisions, collision_cost.
double trial_field(const TrialResult& r, const std::string& y_field);

ScalingFit fit_scaling(const std::vector<TrialResult>& results, const std::string& x_expr,
                       const std::string& y_field);

std::string fit_to_json(const ScalingFit& fit);

}  // namespace colbench::harness
