#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace hdgsc {

// Error type carried through all modules; the CLI prints it as
// "error: <module>: <message>".
class Error : public std::runtime_error {
public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)) {}
  const std::string& module() const { return module_; }

private:
  std::string module_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// z-component of the 2D cross product (a x b).
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

}  // namespace hdgsc
