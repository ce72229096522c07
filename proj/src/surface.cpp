#include "novikov/surface.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "novikov/errors.hpp"

namespace novikov {

bool solve3(const Mat3& a, const Vec3& b, Vec3& out, double min_pivot) {
  double aug[3][4] = {{a(0, 0), a(0, 1), a(0, 2), b.x},
                      {a(1, 0), a(1, 1), a(1, 2), b.y},
                      {a(2, 0), a(2, 1), a(2, 2), b.z}};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(aug[r][col]) > std::fabs(aug[piv][col])) piv = r;
    if (std::fabs(aug[piv][col]) < min_pivot) return false;
    if (piv != col)
      for (int c = col; c < 4; ++c) std::swap(aug[piv][c], aug[col][c]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double factor = aug[r][col] / aug[col][col];
      for (int c = col; c < 4; ++c) aug[r][c] -= factor * aug[col][c];
    }
  }
  out = {aug[0][3] / aug[0][0], aug[1][3] / aug[1][1], aug[2][3] / aug[2][2]};
  return true;
}

DispersionRelation::DispersionRelation(std::vector<TrigTerm> terms, std::string name)
    : terms_(std::move(terms)), name_(std::move(name)) {
  bool has_nonconstant = false;
  for (const auto& t : terms_)
    if (!t.k.is_zero()) has_nonconstant = true;
  if (!has_nonconstant)
    throw ParseError("dispersion relation needs at least one term with k != 0");
}

DispersionRelation DispersionRelation::simple_cubic() {
  return DispersionRelation(
      {{{1, 0, 0}, 1.0, 0.0}, {{0, 1, 0}, 1.0, 0.0}, {{0, 0, 1}, 1.0, 0.0}},
      "simple-cubic");
}

DispersionRelation DispersionRelation::parse(const std::string& text, const std::string& name) {
  std::vector<TrigTerm> terms;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;  // blank
    if (kind != "cos" && kind != "sin")
      throw ParseError("surface line " + std::to_string(lineno) +
                       ": expected 'cos' or 'sin', got '" + kind + "'");
    std::string kspec;
    double coeff;
    if (!(ls >> kspec >> coeff))
      throw ParseError("surface line " + std::to_string(lineno) +
                       ": expected 'k1,k2,k3 coeff'");
    IVec3 k;
    char c1 = 0, c2 = 0;
    std::istringstream ks(kspec);
    if (!(ks >> k.x >> c1 >> k.y >> c2 >> k.z) || c1 != ',' || c2 != ',')
      throw ParseError("surface line " + std::to_string(lineno) +
                       ": bad frequency vector '" + kspec + "'");
    std::string extra;
    if (ls >> extra)
      throw ParseError("surface line " + std::to_string(lineno) +
                       ": trailing content '" + extra + "'");
    TrigTerm t;
    t.k = k;
    if (kind == "cos")
      t.cos_coeff = coeff;
    else
      t.sin_coeff = coeff;
    terms.push_back(t);
  }
  return DispersionRelation(std::move(terms), name);
}

DispersionRelation DispersionRelation::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open surface file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  auto slash = path.find_last_of('/');
  std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = stem.find_last_of('.');
  if (dot != std::string::npos) stem.erase(dot);
  return parse(ss.str(), stem);
}

DispersionRelation DispersionRelation::resolve(const std::string& spec) {
  if (spec.empty() || spec == "simple-cubic") return simple_cubic();
  return load_file(spec);
}

std::string DispersionRelation::to_text() const {
  std::ostringstream out;
  out.precision(17);
  for (const auto& t : terms_) {
    if (t.cos_coeff != 0.0)
      out << "cos " << t.k.x << "," << t.k.y << "," << t.k.z << " " << t.cos_coeff << "\n";
    if (t.sin_coeff != 0.0)
      out << "sin " << t.k.x << "," << t.k.y << "," << t.k.z << " " << t.sin_coeff << "\n";
  }
  return out.str();
}

Jet evaluate_jet(const DispersionRelation& f, const Vec3& x) {
  Jet jet;
  for (const auto& t : f.terms()) {
    const double theta = dot(x, t.k);
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const Vec3 kv = to_vec3(t.k);
    jet.value += t.cos_coeff * c + t.sin_coeff * s;
    const double d1 = -t.cos_coeff * s + t.sin_coeff * c;
    const double d2 = -t.cos_coeff * c - t.sin_coeff * s;
    jet.gradient += kv * d1;
    for (int r = 0; r < 3; ++r)
      for (int cidx = 0; cidx < 3; ++cidx)
        jet.hessian(r, cidx) += d2 * kv[r] * kv[cidx];
  }
  return jet;
}

double evaluate_value(const DispersionRelation& f, const Vec3& x) {
  double v = 0.0;
  for (const auto& t : f.terms()) {
    const double theta = dot(x, t.k);
    v += t.cos_coeff * std::cos(theta) + t.sin_coeff * std::sin(theta);
  }
  return v;
}

void evaluate_value_gradient(const DispersionRelation& f, const Vec3& x,
                             double& value, Vec3& gradient) {
  value = 0.0;
  gradient = {};
  for (const auto& t : f.terms()) {
    const double theta = dot(x, t.k);
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    value += t.cos_coeff * c + t.sin_coeff * s;
    gradient += to_vec3(t.k) * (-t.cos_coeff * s + t.sin_coeff * c);
  }
}

TorusPoint wrap_point(const Vec3& x) {
  TorusPoint p;
  for (int i = 0; i < 3; ++i) {
    double shift = std::floor(x[i] / kTwoPi);
    double pos = x[i] - shift * kTwoPi;
    // floor rounding can leave pos == 2pi when x is a hair below a multiple
    if (pos >= kTwoPi) {
      pos -= kTwoPi;
      shift += 1.0;
    }
    if (pos < 0.0) {
      pos += kTwoPi;
      shift -= 1.0;
    }
    p.position[i] = pos;
    p.lift_shift[i] = static_cast<std::int64_t>(shift);
  }
  return p;
}

Vec3 torus_delta(const Vec3& x, const Vec3& y) {
  Vec3 d = x - y;
  for (int i = 0; i < 3; ++i) d[i] -= kTwoPi * std::round(d[i] / kTwoPi);
  return d;
}

double torus_distance(const Vec3& x, const Vec3& y) { return norm(torus_delta(x, y)); }

}  // namespace novikov
