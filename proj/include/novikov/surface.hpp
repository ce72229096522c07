#ifndef NOVIKOV_SURFACE_HPP
#define NOVIKOV_SURFACE_HPP

#include <string>
#include <vector>

#include "novikov/vec.hpp"

namespace novikov {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One trigonometric term a*cos(k.x) + b*sin(k.x) on the 3-torus.
struct TrigTerm {
  IVec3 k;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

// A real trigonometric polynomial f on T^3 = (R/2pi Z)^3. The level set
// {f = E} plays the role of the Fermi surface.
class DispersionRelation {
 public:
  DispersionRelation(std::vector<TrigTerm> terms, std::string name);

  const std::vector<TrigTerm>& terms() const { return terms_; }
  const std::string& name() const { return name_; }

  // cos(x) + cos(y) + cos(z)
  static DispersionRelation simple_cubic();

  // Text format, one term per line: "cos k1,k2,k3 coeff" or
  // "sin k1,k2,k3 coeff"; '#' starts a comment.
  static DispersionRelation parse(const std::string& text, const std::string& name);
  static DispersionRelation load_file(const std::string& path);

  // Resolves a builtin name, else treats `spec` as a file path.
  static DispersionRelation resolve(const std::string& spec);

  std::string to_text() const;

 private:
  std::vector<TrigTerm> terms_;
  std::string name_;
};

// Value, gradient and Hessian of f at a point.
struct Jet {
  double value = 0.0;
  Vec3 gradient;
  Mat3 hessian;
};

Jet evaluate_jet(const DispersionRelation& f, const Vec3& x);

// Value only; the hot path of seeding and root scanning.
double evaluate_value(const DispersionRelation& f, const Vec3& x);

// Value and gradient (no Hessian).
void evaluate_value_gradient(const DispersionRelation& f, const Vec3& x,
                             double& value, Vec3& gradient);

// A point on the torus together with the integer number of fundamental-domain
// crossings accumulated by its lift: lifted position = position + 2pi*lift_shift.
struct TorusPoint {
  Vec3 position;     // components in [0, 2pi)
  IVec3 lift_shift;

  Vec3 lifted() const { return position + to_vec3(lift_shift) * kTwoPi; }
};

TorusPoint wrap_point(const Vec3& x);

// Reduces x - y modulo 2pi*Z^3 to the representative nearest zero.
Vec3 torus_delta(const Vec3& x, const Vec3& y);

// Distance on the torus (after reduction of the difference).
double torus_distance(const Vec3& x, const Vec3& y);

}  // namespace novikov

#endif
