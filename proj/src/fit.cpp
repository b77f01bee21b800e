#include "colbench/fit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace colbench::harness {
namespace {

// Recursive-descent evaluator for the tiny (n, C) expression language.
struct ExprParser {
  const std::string& src;
  size_t pos = 0;
  double n, C;

  char peek() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    return pos < src.size() ? src[pos] : '\0';
  }
  bool eat(char ch) {
    if (peek() != ch) return false;
    ++pos;
    return true;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("bad expression '" + src + "': " + what + " at position " +
                                std::to_string(pos));
  }

  double parse_expression() {
    double v = parse_term();
    for (;;) {
      if (eat('+'))
        v += parse_term();
      else if (eat('-'))
        v -= parse_term();
      else
        return v;
    }
  }
  double parse_term() {
    double v = parse_factor();
    for (;;) {
      if (eat('*'))
        v *= parse_factor();
      else if (eat('/'))
        v /= parse_factor();
      else
        return v;
    }
  }
  double parse_factor() {
    if (eat('-')) return -parse_factor();
    double base = parse_primary();
    if (eat('^')) return std::pow(base, parse_factor());  // right-associative
    return base;
  }
  double parse_primary() {
    const char ch = peek();
    if (ch == '(') {
      ++pos;
      const double v = parse_expression();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(ch))) return parse_symbol();
    fail("expected a value");
  }
  double parse_number() {
    size_t used = 0;
    double v;
    try {
      v = std::stod(src.substr(pos), &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos += used;
    return v;
  }
  double parse_symbol() {
    std::string name;
    while (pos < src.size() &&
           (std::isalpha(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      name += src[pos++];
    if (name == "n" || name == "N") return n;
    if (name == "C" || name == "c") return C;
    if (name == "sqrt" || name == "log") {
      if (!eat('(')) fail("expected '(' after " + name);
      const double v = parse_expression();
      if (!eat(')')) fail("expected ')'");
      return name == "sqrt" ? std::sqrt(v) : std::log(v);
    }
    fail("unknown symbol '" + name + "'");
  }
};

}  // namespace

double eval_expr(const std::string& expr, double n, double C) {
  ExprParser p{expr, 0, n, C};
  const double v = p.parse_expression();
  if (p.peek() != '\0') p.fail("trailing input");
  return v;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

ScalingFit fit_points(const std::vector<std::pair<double, double>>& points,
                      const std::string& x_label, const std::string& y_label) {
  std::map<double, std::vector<double>> groups;
  for (const auto& [x, y] : points) groups[x].push_back(y);
  if (groups.size() < 3)
    throw std::invalid_argument("fit requires >= 3 distinct x values, got " +
                                std::to_string(groups.size()));

  std::vector<double> lx, ly;
  for (auto& [x, ys] : groups) {
    const double m = median(ys);
    if (x <= 0.0 || m <= 0.0)
      throw std::invalid_argument("fit requires positive x values and median y values");
    lx.push_back(std::log(x));
    ly.push_back(std::log(m));
  }

  const size_t k = lx.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < k; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit requires spread in x");

  ScalingFit fit;
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < k; ++i) {
    const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy < 1e-30 ? (ss_res < 1e-30 ? 1.0 : 0.0)
                              : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  fit.x_label = x_label;
  fit.y_label = y_label;
  return fit;
}

double trial_field(const TrialResult& r, const std::string& y_field) {
  if (y_field == "makespan") return static_cast<double>(r.makespan);
  if (y_field == "collisions") return static_cast<double>(r.collisions);
  if (y_field == "collision_cost") return r.collision_cost;
  throw std::invalid_argument("unknown fit field '" + y_field +
                              "' (expected makespan, collisions, or collision_cost)");
}

ScalingFit fit_scaling(const std::vector<TrialResult>& results, const std::string& x_expr,
                       const std::string& y_field) {
  std::vector<std::pair<double, double>> points;
  points.reserve(results.size());
  for (const TrialResult& r : results)
    points.emplace_back(eval_expr(x_expr, static_cast<double>(r.n), r.C),
                        trial_field(r, y_field));
  return fit_points(points, x_expr, y_field);
}

std::string fit_to_json(const ScalingFit& fit) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\"x\":\"%s\",\"y\":\"%s\",\"exponent\":%.6f,\"intercept\":%.6f,"
                "\"r_squared\":%.6f}",
                fit.x_label.c_str(), fit.y_label.c_str(), fit.exponent, fit.intercept,
                fit.r_squared);
  return std::string(buf);
}

}  // namespace colbench::harness
