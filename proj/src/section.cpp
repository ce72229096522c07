#include "novikov/section.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "novikov/errors.hpp"
#include "novikov/homology.hpp"

namespace novikov {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;

// ---------------------------------------------------------------------------
// constraint projections

// Newton step count is small; these run in every integrator step.

// Projects x onto {f = E} along the gradient. Returns false on divergence.
bool project_surface(const DispersionRelation& f, double energy, Vec3& x, double tol) {
  for (int it = 0; it < 12; ++it) {
    double val;
    Vec3 grad;
    evaluate_value_gradient(f, x, val, grad);
    const double r = val - energy;
    if (std::fabs(r) < tol) return true;
    const double g2 = norm2(grad);
    if (g2 < 1e-18) return false;
    x -= grad * (r / g2);
  }
  double val;
  Vec3 grad;
  evaluate_value_gradient(f, x, val, grad);
  return std::fabs(val - energy) < 1e2 * tol;
}

// Projects x onto {f = E} while keeping unit.x fixed: first an exact shift
// along unit, then Newton along the in-plane gradient component.
bool project_surface_in_plane(const DispersionRelation& f, double energy, const Vec3& unit,
                              double plane_c, Vec3& x, double tol_f, double tol_p) {
  x += unit * (plane_c - dot(unit, x));
  for (int it = 0; it < 16; ++it) {
    double val;
    Vec3 grad;
    evaluate_value_gradient(f, x, val, grad);
    const double r = val - energy;
    if (std::fabs(r) < tol_f) {
      const double pd = dot(unit, x) - plane_c;
      if (std::fabs(pd) > tol_p) x += unit * (-pd);
      return true;
    }
    Vec3 d = grad - unit * dot(grad, unit);
    const double denom = dot(grad, d);
    if (std::fabs(denom) < 1e-18) return false;
    Vec3 step = d * (-r / denom);
    const double sn = norm(step);
    if (sn > 0.25) step *= 0.25 / sn;
    x += step;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4) step on the unit section field

struct FieldEval {
  Vec3 g;       // unit tangent
  double speed; // |grad f x unit| before normalization
};

FieldEval section_field(const DispersionRelation& f, const Direction& dir, const Vec3& x,
                        double sign) {
  double val;
  Vec3 grad;
  evaluate_value_gradient(f, x, val, grad);
  Vec3 v = cross(grad, dir.unit);
  const double s = norm(v);
  FieldEval e;
  e.speed = s;
  e.g = s > 1e-300 ? v * (sign / s) : Vec3{};
  return e;
}

struct DopriResult {
  Vec3 y;
  double err;  // scaled error estimate
};

DopriResult dopri_step(const DispersionRelation& f, const Direction& dir, const Vec3& y0,
                       const Vec3& k1, double h, double sign) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                      a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto fld = [&](const Vec3& y) { return section_field(f, dir, y, sign).g; };
  const Vec3 k2 = fld(y0 + k1 * (a21 * h));
  const Vec3 k3 = fld(y0 + (k1 * a31 + k2 * a32) * h);
  const Vec3 k4 = fld(y0 + (k1 * a41 + k2 * a42 + k3 * a43) * h);
  const Vec3 k5 = fld(y0 + (k1 * a51 + k2 * a52 + k3 * a53 + k4 * a54) * h);
  const Vec3 k6 = fld(y0 + (k1 * a61 + k2 * a62 + k3 * a63 + k4 * a64 + k5 * a65) * h);
  const Vec3 y5 = y0 + (k1 * a71 + k3 * a73 + k4 * a74 + k5 * a75 + k6 * a76) * h;
  const Vec3 k7 = fld(y5);
  const Vec3 errv =
      (k1 * e1 + k3 * e3 + k4 * e4 + k5 * e5 + k6 * e6 + k7 * e7) * h;
  DopriResult r;
  r.y = y5;
  r.err = norm(errv);
  return r;
}

// Single classical RK4 step; used for event refinement sub-steps.
Vec3 rk4_step(const DispersionRelation& f, const Direction& dir, const Vec3& y0, double h,
              double sign) {
  auto fld = [&](const Vec3& y) { return section_field(f, dir, y, sign).g; };
  const Vec3 k1 = fld(y0);
  const Vec3 k2 = fld(y0 + k1 * (h / 2));
  const Vec3 k3 = fld(y0 + k2 * (h / 2));
  const Vec3 k4 = fld(y0 + k3 * h);
  return y0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6);
}

double torus_distance_to(const Vec3& x, const Vec3& p) {
  Vec3 d = x - p;
  for (int i = 0; i < 3; ++i) d[i] -= kTwoPi * std::round(d[i] / kTwoPi);
  return norm(d);
}

// ---------------------------------------------------------------------------
// critical points

struct NewtonOutcome {
  bool converged = false;
  Vec3 x;
  double residual = 0.0;
};

NewtonOutcome newton_critical(const DispersionRelation& f, double energy, const Direction& dir,
                              Vec3 x, double target,
                              const std::vector<Vec3>* known_roots = nullptr) {
  NewtonOutcome out;
  for (int it = 0; it < 36; ++it) {
    // Once inside the capture basin of an already-found root, stop early.
    if (known_roots && it >= 1) {
      const Vec3 xw = wrap_point(x).position;
      for (const auto& p : *known_roots)
        if (torus_distance_to(xw, p) < 1e-4) return out;  // not converged; duplicate basin
    }
    const Jet jet = evaluate_jet(f, x);
    const Vec3 F{jet.value - energy, dot(jet.gradient, dir.e1), dot(jet.gradient, dir.e2)};
    const double fn = norm(F);
    if (fn < target) {
      out.converged = true;
      out.x = x;
      out.residual = fn;
      return out;
    }
    if (it == 12 && fn > 5e-2) return out;  // wandering seed; give up
    const Vec3 he1 = mul(jet.hessian, dir.e1);
    const Vec3 he2 = mul(jet.hessian, dir.e2);
    Mat3 J;
    for (int c = 0; c < 3; ++c) {
      J(0, c) = jet.gradient[c];
      J(1, c) = he1[c];
      J(2, c) = he2[c];
    }
    Vec3 delta;
    bool ok = solve3(J, -F, delta, 1e-9);
    if (!ok || norm(delta) > 0.75) {
      // Damped Gauss-Newton fallback for (nearly) singular Jacobians.
      Mat3 jtj;
      Vec3 jtf{};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          double s = 0;
          for (int k = 0; k < 3; ++k) s += J(k, r) * J(k, c);
          jtj(r, c) = s;
        }
      for (int r = 0; r < 3; ++r) jtf[r] = J(0, r) * F[0] + J(1, r) * F[1] + J(2, r) * F[2];
      const double lambda = 1e-4 * (jtj(0, 0) + jtj(1, 1) + jtj(2, 2)) + 1e-12;
      Mat3 m = jtj;
      for (int r = 0; r < 3; ++r) m(r, r) += lambda;
      if (!solve3(m, -jtf, delta, 1e-18)) return out;
      const double dn = norm(delta);
      if (dn > 0.5) delta *= 0.5 / dn;
    }
    x += delta;
    if (!(std::isfinite(x.x) && std::isfinite(x.y) && std::isfinite(x.z))) return out;
  }
  // Accept slow (degenerate) convergence when the residual target is met.
  const Jet jet = evaluate_jet(f, x);
  const Vec3 F{jet.value - energy, dot(jet.gradient, dir.e1), dot(jet.gradient, dir.e2)};
  const double fn = norm(F);
  if (fn < target * 10) {
    out.converged = true;
    out.x = x;
    out.residual = fn;
  }
  return out;
}

std::vector<Vec3> critical_sweep(const DispersionRelation& f, double energy,
                                 const Direction& dir, int grid, const SimOptions& opts) {
  std::vector<Vec3> found;
  const double cell = kTwoPi / grid;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      for (int k = 0; k < grid; ++k) {
        Vec3 seed{(i + 0.5) * cell, (j + 0.5) * cell, (k + 0.5) * cell};
        NewtonOutcome o = newton_critical(f, energy, dir, seed, opts.crit_residual, &found);
        if (!o.converged) continue;
        Vec3 pos = wrap_point(o.x).position;
        bool dup = false;
        for (const auto& p : found)
          if (torus_distance_to(pos, p) < opts.dedup_tol) {
            dup = true;
            break;
          }
        if (!dup) found.push_back(pos);
      }
  std::sort(found.begin(), found.end(), [](const Vec3& a, const Vec3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  });
  return found;
}

bool same_point_set(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& pa : a) {
    bool matched = false;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (used[i]) continue;
      if (torus_distance_to(pa, b[i]) < tol) {
        used[i] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace

const char* critical_kind_name(CriticalKind k) {
  switch (k) {
    case CriticalKind::Saddle: return "saddle";
    case CriticalKind::Extremum: return "extremum";
    case CriticalKind::Degenerate: return "degenerate";
  }
  return "degenerate";
}

Vec3 characteristic_velocity(const DispersionRelation& f, const Direction& dir, const Vec3& x) {
  double val;
  Vec3 grad;
  evaluate_value_gradient(f, x, val, grad);
  return cross(grad, dir.unit);
}

CriticalKind classify_critical(const DispersionRelation& f, const Direction& dir, const Vec3& p,
                               const SimOptions& opts, double* mu_out, double r_out[2][2],
                               double* det_out) {
  (void)opts;
  const Jet jet = evaluate_jet(f, p);
  const Vec3 v = cross(jet.gradient, dir.unit);
  const double mu = dot(jet.gradient, dir.unit);
  if (norm(v) > 1e-5 * std::max(1.0, norm(jet.gradient)))
    throw NotCritical("classify_critical: grad f is not parallel to the direction");
  if (mu_out) *mu_out = mu;
  if (std::fabs(mu) < 1e-9) {
    // Singular level surface point; treated as degenerate.
    if (det_out) *det_out = 0.0;
    if (r_out) r_out[0][0] = r_out[0][1] = r_out[1][0] = r_out[1][1] = 0.0;
    return CriticalKind::Degenerate;
  }
  const Vec3 he1 = mul(jet.hessian, dir.e1);
  const Vec3 he2 = mul(jet.hessian, dir.e2);
  const double scale = -1.0 / mu;
  const double r00 = scale * dot(dir.e1, he1);
  const double r01 = scale * dot(dir.e1, he2);
  const double r11 = scale * dot(dir.e2, he2);
  const double det = r00 * r11 - r01 * r01;
  if (r_out) {
    r_out[0][0] = r00;
    r_out[0][1] = r01;
    r_out[1][0] = r01;
    r_out[1][1] = r11;
  }
  if (det_out) *det_out = det;
  const double frob = r00 * r00 + 2 * r01 * r01 + r11 * r11;
  const double tol_d = 1e-8 * std::max(1.0, frob);
  if (det < -tol_d) return CriticalKind::Saddle;
  if (det > tol_d) return CriticalKind::Extremum;
  return CriticalKind::Degenerate;
}

namespace {

// Collapses the raw sweep roots into one representative per true critical
// point. Degenerate roots refine only to ~sqrt(residual), so the whole
// converged plateau around a degenerate point must be merged; nondegenerate
// roots keep a tight radius.
std::vector<CriticalPoint> consolidate_roots(const DispersionRelation& f, double energy,
                                             const Direction& dir,
                                             const std::vector<Vec3>& raw,
                                             const SimOptions& opts) {
  const std::size_t n = raw.size();
  std::vector<CriticalKind> kind(n);
  for (std::size_t i = 0; i < n; ++i)
    kind[i] = classify_critical(f, dir, raw[i], opts);

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool loose =
          kind[i] == CriticalKind::Degenerate || kind[j] == CriticalKind::Degenerate;
      const double radius = loose ? 2.5e-3 : 10 * opts.dedup_tol;
      if (torus_distance_to(raw[i], raw[j]) < radius) parent[find(i)] = find(j);
    }

  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[find(i)].push_back(i);

  std::vector<CriticalPoint> result;
  for (const auto& [root, members] : clusters) {
    Vec3 pos;
    if (members.size() == 1) {
      pos = raw[members[0]];
    } else {
      // Average the plateau in the lift of its first member.
      const Vec3 anchor = raw[members[0]];
      Vec3 acc{};
      for (std::size_t idx : members) {
        Vec3 d = raw[idx] - anchor;
        for (int c = 0; c < 3; ++c) d[c] -= kTwoPi * std::round(d[c] / kTwoPi);
        acc += d;
      }
      pos = wrap_point(anchor + acc / static_cast<double>(members.size())).position;
      NewtonOutcome polish = newton_critical(f, energy, dir, pos, opts.crit_residual);
      if (polish.converged) pos = wrap_point(polish.x).position;
    }
    CriticalPoint cp;
    cp.point.position = pos;
    cp.point.lift_shift = {};
    cp.kind = classify_critical(f, dir, pos, opts, &cp.mu, cp.r, &cp.det_r);
    cp.height = dir.reduced_height(pos);
    result.push_back(cp);
  }
  std::sort(result.begin(), result.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
    if (a.height != b.height) return a.height < b.height;
    const Vec3& pa = a.point.position;
    const Vec3& pb = b.point.position;
    if (pa.x != pb.x) return pa.x < pb.x;
    if (pa.y != pb.y) return pa.y < pb.y;
    return pa.z < pb.z;
  });
  return result;
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const DispersionRelation& f, double energy,
                                                const Direction& dir, const SimOptions& opts) {
  const int g1 = std::max(4, opts.seed_grid);
  const int g2 = std::max(g1 + 2, (g1 * 5) / 4);
  std::vector<CriticalPoint> set1 =
      consolidate_roots(f, energy, dir, critical_sweep(f, energy, dir, g1, opts), opts);
  std::vector<CriticalPoint> set2 =
      consolidate_roots(f, energy, dir, critical_sweep(f, energy, dir, g2, opts), opts);

  std::vector<Vec3> pos1, pos2;
  for (const auto& c : set1) pos1.push_back(c.point.position);
  for (const auto& c : set2) pos2.push_back(c.point.position);
  if (!same_point_set(pos1, pos2, 2e-3)) {
    std::ostringstream msg;
    msg << "seed grids " << g1 << "^3 and " << g2 << "^3 found " << set1.size() << " vs "
        << set2.size() << " critical points";
    throw SeedExhaustion(msg.str());
  }
  return set2;
}

std::vector<double> branch_angles(const DispersionRelation& f, double energy,
                                  const Direction& dir, const CriticalPoint& cp,
                                  const SimOptions& opts) {
  std::vector<double> angles;
  if (cp.kind == CriticalKind::Saddle) {
    // Null directions of the quadratic form r: A cos2t + B sin2t + C = 0.
    const double A = 0.5 * (cp.r[0][0] - cp.r[1][1]);
    const double B = cp.r[0][1];
    const double C = 0.5 * (cp.r[0][0] + cp.r[1][1]);
    const double rho = std::sqrt(A * A + B * B);
    const double phi = std::atan2(B, A);
    const double ratio = std::clamp(-C / rho, -1.0, 1.0);
    const double delta = std::acos(ratio);
    for (double two_t : {phi + delta, phi - delta}) {
      double t = 0.5 * two_t;
      angles.push_back(t);
      angles.push_back(t + kPi);
    }
  } else {
    // Angular root-finding of f - E on a tangent circle. The detection
    // radius is kept large enough that the cubic signal of a monkey saddle
    // clears the refinement residual of the critical point.
    const double r = std::max(opts.eps_branch, 0.02);
    const Vec3 base = cp.point.position;
    const double offset = evaluate_value(f, base) - energy;
    auto g = [&](double t) {
      const Vec3 w = dir.e1 * std::cos(t) + dir.e2 * std::sin(t);
      return evaluate_value(f, base + w * r) - energy - offset;
    };
    const int n = 720;
    double prev = g(0.0);
    for (int i = 1; i <= n; ++i) {
      const double t = kTwoPi * i / n;
      const double cur = g(t);
      if ((prev < 0 && cur >= 0) || (prev > 0 && cur <= 0)) {
        double lo = kTwoPi * (i - 1) / n, hi = t;
        double glo = prev;
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = g(mid);
          if ((glo < 0) == (gm < 0)) {
            lo = mid;
            glo = gm;
          } else {
            hi = mid;
          }
        }
        angles.push_back(0.5 * (lo + hi));
      }
      prev = cur;
    }
  }
  for (auto& a : angles) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-3; }),
               angles.end());
  if (angles.size() >= 2 && angles.back() > kTwoPi - 1e-3 && angles.front() < 1e-3)
    angles.pop_back();
  return angles;
}

// ---------------------------------------------------------------------------
// orbit tracing

namespace {

struct TraceTermination {
  enum class Why { Closed, Captured } why = Why::Closed;
  Vec3 end;              // refined landing point (lifted)
  int captured_vertex = -1;
  double residual = 0.0;
  double arc = 0.0;
};

struct CaptureTarget {
  Vec3 position;
  int vertex = -1;
  double radius = 1e-4;
};

// Shared adaptive tracer. Closure mode terminates on return to x0 modulo the
// lattice; capture mode terminates inside the capture radius of a target.
TraceTermination trace_curve(const DispersionRelation& f, double energy, const Direction& dir,
                             const Vec3& x0, double sign, const SimOptions& opts,
                             const std::vector<CaptureTarget>& targets, bool capture_mode,
                             std::vector<Vec3>* samples, double max_arc) {
  const double plane_c = dot(dir.unit, x0);
  Vec3 x = x0;
  FieldEval fe = section_field(f, dir, x, sign);
  if (fe.speed < 1e-12)
    throw PreconditionViolation("trace started at a critical point of the section field");
  const Vec3 t0 = fe.g;

  double h = 0.01;
  const double h_max = 0.2;
  const double h_min = 1e-12;
  double arc = 0.0;
  bool armed = false;
  double since_sample = 0.0;
  Vec3 last_sample_tangent = t0;
  if (samples) samples->push_back(x);

  const double arm_radius = 5e-3;
  const double window = 0.1;

  auto residual_to_start = [&](const Vec3& y, Vec3* k_out) {
    Vec3 d = y - x0;
    Vec3 k{std::round(d.x / kTwoPi), std::round(d.y / kTwoPi), std::round(d.z / kTwoPi)};
    if (k_out) *k_out = k;
    return d - k * kTwoPi;
  };

  int step_count = 0;
  const int max_steps = 5 * 1000 * 1000;  // stall guard
  Vec3 x_prev = x;

  while (true) {
    if (arc > max_arc)
      throw MaxArcLength("orbit exceeded its arc budget without closing");
    if (++step_count > max_steps) throw MaxArcLength("step budget exhausted");

    // Near-target step cap so a whole capture ball cannot be stepped over.
    double h_eff = std::min(h, h_max);
    if (capture_mode) {
      double dmin = 1e30;
      double rad = opts.capture_radius;
      for (const auto& t : targets) {
        const double d = torus_distance_to(x, t.position);
        if (d < dmin) {
          dmin = d;
          rad = t.radius;
        }
      }
      h_eff = std::min(h_eff, std::max(0.5 * rad, 0.5 * dmin));
    } else if (armed) {
      // Keep steps short near the start point so the closure crossing is
      // never stepped over.
      Vec3 kr;
      const double r_here = norm(residual_to_start(x, &kr));
      if (r_here < 0.6) h_eff = std::min(h_eff, 0.04);
    }

    fe = section_field(f, dir, x, sign);
    DopriResult st = dopri_step(f, dir, x, fe.g, h_eff, sign);
    const double tol = opts.rel_tol * std::max(1.0, norm(st.y - x));
    if (st.err > tol && h_eff > h_min) {
      h = std::max(h_min, 0.5 * h_eff);
      continue;
    }
    // accepted
    x_prev = x;
    x = st.y;
    if (!project_surface_in_plane(f, energy, dir.unit, plane_c, x, opts.tol_f, opts.tol_p))
      throw ProjectionFailure("orbit projection diverged");
    arc += h_eff;
    since_sample += h_eff;
    const double growth = st.err > 1e-300 ? 0.9 * std::pow(tol / st.err, 0.2) : 2.0;
    h = std::min(h_max, h_eff * std::clamp(growth, 0.25, 2.5));

    if (samples) {
      // Dense output: integrator steps are far coarser than the polyline
      // accuracy the seed deduplication needs, so interior points of big
      // steps are filled in with chained RK4 substeps.
      const double target = std::max(opts.sample_ds, 1e-3);
      if (h_eff > 1.8 * target) {
        const int n_sub = static_cast<int>(std::ceil(h_eff / target));
        Vec3 y = x_prev;
        for (int j = 1; j < n_sub; ++j) {
          y = rk4_step(f, dir, y, h_eff / n_sub, sign);
          samples->push_back(y);
        }
        samples->push_back(x);
        since_sample = 0.0;
      } else {
        const Vec3 tangent = section_field(f, dir, x, sign).g;
        if (since_sample >= target || dot(tangent, last_sample_tangent) < 0.99875) {
          samples->push_back(x);
          since_sample = 0.0;
          last_sample_tangent = tangent;
        }
      }
    }

    if (capture_mode) {
      for (const auto& t : targets) {
        const double d = torus_distance_to(x, t.position);
        if (d < t.radius && arc > 2.0 * opts.seed_offset + t.radius) {
          TraceTermination term;
          term.why = TraceTermination::Why::Captured;
          term.end = x;
          term.captured_vertex = t.vertex;
          term.residual = d;
          term.arc = arc;
          if (samples) samples->push_back(x);
          return term;
        }
      }
      continue;
    }

    // closure detection
    if (!armed) {
      if (norm(x - x0) > arm_radius) armed = true;
      continue;
    }
    Vec3 k;
    const Vec3 r_new = residual_to_start(x, &k);
    if (norm(r_new) > window) continue;
    const Vec3 anchor = x0 + k * kTwoPi;
    const double e_prev = dot(x_prev - anchor, t0);
    const double e_new = dot(x - anchor, t0);
    if (!(e_prev < 0 && e_new >= 0)) continue;
    FieldEval fe_here = section_field(f, dir, x, sign);
    if (dot(fe_here.g, t0) < 0.5) continue;

    // Bisection along the last step for the hyperplane crossing.
    double lo = 0.0, hi = h_eff;
    Vec3 x_land = x;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      Vec3 xm = rk4_step(f, dir, x_prev, mid, sign);
      project_surface_in_plane(f, energy, dir.unit, plane_c, xm, opts.tol_f, opts.tol_p);
      const double em = dot(xm - anchor, t0);
      if (em < 0)
        lo = mid;
      else {
        hi = mid;
        x_land = xm;
      }
      if (hi - lo < 1e-13) break;
    }
    const Vec3 res = x_land - anchor;
    const double rn = norm(res);
    if (rn < opts.tol_close * kTwoPi * 3) {
      TraceTermination term;
      term.why = TraceTermination::Why::Closed;
      term.end = x_land;
      term.residual = rn;
      term.arc = arc;
      if (samples) samples->push_back(x_land);
      return term;
    }
    // Near miss on a parallel strand; keep tracing.
  }
}

}  // namespace

Orbit trace_level_orbit(const DispersionRelation& f, double energy, const Direction& dir,
                        const Vec3& x0_in, const SimOptions& opts,
                        const std::vector<CriticalPoint>& criticals, bool forward) {
  Vec3 x0 = x0_in;
  if (std::fabs(evaluate_value(f, x0) - energy) > 1e-6)
    throw PreconditionViolation("trace_level_orbit: start point is not on the level surface");
  project_surface_in_plane(f, energy, dir.unit, dot(dir.unit, x0), x0, opts.tol_f, opts.tol_p);
  for (const auto& cp : criticals)
    if (torus_distance_to(x0, cp.point.position) < opts.saddle_exclusion)
      throw PreconditionViolation("trace_level_orbit: start point too close to a critical point");

  Orbit orbit;
  orbit.level = dir.reduced_height(x0);
  orbit.seed = x0;
  std::vector<Vec3> samples;
  const double max_arc = opts.max_len_factor * kTwoPi * dir.h_norm;
  TraceTermination term = trace_curve(f, energy, dir, x0, forward ? 1.0 : -1.0, opts,
                                      {}, false, &samples, max_arc);
  orbit.samples = std::move(samples);
  orbit.closure_residual = term.residual;
  orbit.arc_length = term.arc;
  orbit.winding = winding_from_lift(term.end - x0, opts.tol_close * 4);
  if (dot(orbit.winding, dir.h) != 0)
    throw InvalidGenerator("orbit winding not orthogonal to the direction");
  return orbit;
}

// ---------------------------------------------------------------------------
// separatrix graphs

namespace {

struct RawEdge {
  int from = 0, to = 0;
  Vec3 displacement;
  std::vector<Vec3> samples;
};

// One-way polyline distance (subsampled), in torus-lift coordinates.
double polyline_one_way_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double worst = 0.0;
  const std::size_t stride = std::max<std::size_t>(1, a.size() / 40);
  for (std::size_t ai = 0; ai < a.size(); ai += stride) {
    const Vec3& p = a[ai];
    double best = 1e30;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
      Vec3 d0 = p - b[i];
      for (int c = 0; c < 3; ++c) d0[c] -= kTwoPi * std::round(d0[c] / kTwoPi);
      const Vec3 q = b[i] + d0;  // p shifted into b's local lift
      const Vec3 seg = b[i + 1] - b[i];
      const double len2 = norm2(seg);
      double t = len2 > 1e-30 ? dot(q - b[i], seg) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, norm(q - (b[i] + seg * t)));
      if (best < 1e-6) break;
    }
    worst = std::max(worst, best);
    if (worst > 0.05) return worst;
  }
  return worst;
}

std::vector<std::vector<int>> group_by_height(const std::vector<const CriticalPoint*>& pts,
                                              double period, double tol) {
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pts[a]->height < pts[b]->height; });
  std::vector<std::vector<int>> groups;
  for (int idx : order) {
    if (!groups.empty() &&
        pts[idx]->height - pts[groups.back().back()]->height < tol)
      groups.back().push_back(idx);
    else
      groups.push_back({idx});
  }
  // heights wrap modulo the period
  if (groups.size() > 1) {
    const double wrap = pts[groups.front().front()]->height + period -
                        pts[groups.back().back()]->height;
    if (wrap < tol) {
      for (int idx : groups.back()) groups.front().push_back(idx);
      groups.pop_back();
    }
  }
  return groups;
}

}  // namespace

std::vector<SeparatrixGraph> trace_separatrix_graph(const DispersionRelation& f, double energy,
                                                    const Direction& dir,
                                                    const std::vector<CriticalPoint>& criticals,
                                                    const SimOptions& opts) {
  std::vector<const CriticalPoint*> verts;
  for (const auto& cp : criticals)
    if (cp.kind != CriticalKind::Extremum) verts.push_back(&cp);
  std::vector<SeparatrixGraph> graphs;
  if (verts.empty()) return graphs;

  const double max_arc = opts.max_len_factor * kTwoPi * dir.h_norm;
  const auto groups = group_by_height(verts, dir.height_period, opts.tol_h);

  for (const auto& group : groups) {
    std::vector<CaptureTarget> targets;
    for (std::size_t i = 0; i < group.size(); ++i) {
      CaptureTarget t;
      t.position = verts[group[i]]->point.position;
      t.vertex = static_cast<int>(i);
      // Degenerate points refine only to ~sqrt(residual); level curves
      // near them U-turn at the cube root of the height offset, so the
      // capture ball must absorb that scale.
      t.radius = verts[group[i]]->kind == CriticalKind::Degenerate
                     ? std::max(opts.capture_radius, 30 * opts.seed_offset)
                     : opts.capture_radius;
      targets.push_back(t);
    }

    std::vector<RawEdge> raw;
    for (std::size_t vi = 0; vi < group.size(); ++vi) {
      const CriticalPoint& cp = *verts[group[vi]];
      const std::vector<double> angles = branch_angles(f, energy, dir, cp, opts);
      if (cp.kind == CriticalKind::Degenerate && angles.size() % 2 != 0)
        throw DegenerateFailure("odd branch count at a degenerate critical point");
      const double plane_c = dot(dir.unit, cp.point.position);
      for (double theta : angles) {
        const Vec3 ray = dir.e1 * std::cos(theta) + dir.e2 * std::sin(theta);
        Vec3 seed;
        bool seeded = false;
        for (double mult : {1.0, 2.0, 4.0}) {
          seed = cp.point.position + ray * (opts.seed_offset * mult);
          if (project_surface_in_plane(f, energy, dir.unit, plane_c, seed, opts.tol_f,
                                       opts.tol_p) &&
              torus_distance_to(seed, cp.point.position) > 0.3 * opts.seed_offset * mult) {
            seeded = true;
            break;
          }
        }
        if (!seeded)
          throw DegenerateFailure("could not seed a separatrix branch");
        FieldEval fe = section_field(f, dir, seed, 1.0);
        if (fe.speed < 1e-12)
          throw DegenerateFailure("separatrix seed has vanishing section field");
        const double sign = dot(fe.g, ray) >= 0 ? 1.0 : -1.0;

        std::vector<Vec3> samples;
        TraceTermination term;
        try {
          term = trace_curve(f, energy, dir, seed, sign, opts, targets, true, &samples, max_arc);
        } catch (const MaxArcLength&) {
          throw DanglingSeparatrix("separatrix branch exceeded max arc without capture");
        }
        RawEdge e;
        e.from = static_cast<int>(vi);
        e.to = term.captured_vertex;
        const Vec3& to_pos = verts[group[e.to]]->point.position;
        Vec3 d = term.end - to_pos;
        const Vec3 k{std::round(d.x / kTwoPi), std::round(d.y / kTwoPi),
                     std::round(d.z / kTwoPi)};
        // Snap both endpoints to the refined critical positions so cycle
        // sums telescope exactly.
        e.displacement = (to_pos + k * kTwoPi) - cp.point.position;
        e.samples = std::move(samples);
        raw.push_back(std::move(e));
      }
    }

    // Each geometric edge is traced once from each end; keep one copy.
    std::vector<RawEdge> edges;
    auto same_edge = [&](const RawEdge& a, const RawEdge& b) {
      const double disp_tol = 1e-3;
      const bool fwd = a.from == b.from && a.to == b.to &&
                       norm(a.displacement - b.displacement) < disp_tol;
      const bool rev = a.from == b.to && a.to == b.from &&
                       norm(a.displacement + b.displacement) < disp_tol;
      if (!fwd && !rev) return false;
      return polyline_one_way_distance(a.samples, b.samples) < 0.02;
    };
    for (auto& e : raw) {
      bool dup = false;
      for (const auto& kept : edges)
        if (same_edge(e, kept)) {
          dup = true;
          break;
        }
      if (!dup) edges.push_back(std::move(e));
    }

    // Connected components over the group's vertices.
    std::vector<int> comp(group.size());
    std::iota(comp.begin(), comp.end(), 0);
    std::function<int(int)> find = [&](int a) {
      while (comp[a] != a) a = comp[a] = comp[comp[a]];
      return a;
    };
    for (const auto& e : edges) comp[find(e.from)] = find(e.to);

    std::map<int, std::vector<int>> comp_vertices;
    for (std::size_t i = 0; i < group.size(); ++i)
      comp_vertices[find(static_cast<int>(i))].push_back(static_cast<int>(i));

    for (const auto& [root, members] : comp_vertices) {
      SeparatrixGraph graph;
      std::vector<int> local_index(group.size(), -1);
      for (std::size_t i = 0; i < members.size(); ++i) {
        local_index[members[i]] = static_cast<int>(i);
        graph.vertices.push_back(*verts[group[members[i]]]);
      }
      for (const auto& e : edges) {
        if (find(e.from) != root) continue;
        SeparatrixEdge ge;
        ge.from = local_index[e.from];
        ge.to = local_index[e.to];
        ge.displacement = e.displacement;
        if (opts.keep_samples) ge.samples = e.samples;
        graph.edges.push_back(std::move(ge));
      }
      // Cycle classes from a spanning tree and vertex potentials.
      const std::size_t nv = graph.vertices.size();
      std::vector<Vec3> potential(nv);
      std::vector<bool> seen(nv, false);
      std::vector<bool> tree_edge(graph.edges.size(), false);
      potential[0] = graph.vertices[0].point.position;
      seen[0] = true;
      bool progress = true;
      while (progress) {
        progress = false;
        for (std::size_t ei = 0; ei < graph.edges.size(); ++ei) {
          const auto& e = graph.edges[ei];
          if (seen[e.from] && !seen[e.to]) {
            potential[e.to] = potential[e.from] + e.displacement;
            seen[e.to] = true;
            tree_edge[ei] = true;
            progress = true;
          } else if (seen[e.to] && !seen[e.from]) {
            potential[e.from] = potential[e.to] - e.displacement;
            seen[e.from] = true;
            tree_edge[ei] = true;
            progress = true;
          }
        }
      }
      for (std::size_t ei = 0; ei < graph.edges.size(); ++ei) {
        if (tree_edge[ei]) continue;
        const auto& e = graph.edges[ei];
        const Vec3 loop = potential[e.from] + e.displacement - potential[e.to];
        const IVec3 w = winding_from_lift(loop, 1e-6);
        if (!w.is_zero()) graph.cycle_classes.push_back(w);
      }
      std::sort(graph.cycle_classes.begin(), graph.cycle_classes.end());
      graph.cycle_classes.erase(
          std::unique(graph.cycle_classes.begin(), graph.cycle_classes.end()),
          graph.cycle_classes.end());
      graphs.push_back(std::move(graph));
    }
  }
  return graphs;
}

// ---------------------------------------------------------------------------
// regular orbit sampling

namespace {

// Spatial hash of polyline samples modulo 2*pi, for seed deduplication.
class TorusPolylineIndex {
 public:
  explicit TorusPolylineIndex(double cell) : cell_(cell) {}

  void add_polyline(const std::vector<Vec3>& pts) {
    const int base = static_cast<int>(segments_a_.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      segments_a_.push_back(pts[i]);
      segments_b_.push_back(pts[i + 1]);
      insert_cell(pts[i], base + static_cast<int>(i));
      insert_cell(pts[i + 1], base + static_cast<int>(i));
    }
  }

  // Distance to the nearest stored segment, plus an exact on-curve sample
  // near the match (for refinement walks).
  double distance(const Vec3& q, Vec3* near_sample = nullptr) const {
    double best = 1e30;
    int best_seg = -1;
    const Vec3 qw = wrap_point(q).position;
    int ix = static_cast<int>(qw.x / cell_);
    int iy = static_cast<int>(qw.y / cell_);
    int iz = static_cast<int>(qw.z / cell_);
    const int n = cells_per_axis();
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const long long key = cell_key((ix + dx + n) % n, (iy + dy + n) % n, (iz + dz + n) % n);
          auto it = cells_.find(key);
          if (it == cells_.end()) continue;
          for (int seg : it->second) {
            const double d = seg_dist(qw, seg);
            if (d < best) {
              best = d;
              best_seg = seg;
            }
          }
        }
    if (near_sample && best_seg >= 0) *near_sample = segments_a_[best_seg];
    return best;
  }

 private:
  int cells_per_axis() const { return std::max(1, static_cast<int>(kTwoPi / cell_)); }

  long long cell_key(int ix, int iy, int iz) const {
    const int n = cells_per_axis();
    return (static_cast<long long>(ix) * n + iy) * n + iz;
  }

  void insert_cell(const Vec3& p, int seg) {
    const Vec3 pw = wrap_point(p).position;
    const int n = cells_per_axis();
    int ix = static_cast<int>(pw.x / cell_) % n;
    int iy = static_cast<int>(pw.y / cell_) % n;
    int iz = static_cast<int>(pw.z / cell_) % n;
    auto& v = cells_[cell_key(ix, iy, iz)];
    if (v.empty() || v.back() != seg) v.push_back(seg);
  }

  double seg_dist(const Vec3& qw, int seg) const {
    // Compare in the segment's own lift: shift q by the multiple of 2*pi
    // nearest to the segment start.
    const Vec3& a = segments_a_[seg];
    const Vec3& b = segments_b_[seg];
    Vec3 d = qw - a;
    for (int i = 0; i < 3; ++i) d[i] -= kTwoPi * std::round(d[i] / kTwoPi);
    const Vec3 q = a + d;
    const Vec3 ab = b - a;
    const double len2 = norm2(ab);
    double t = len2 > 1e-30 ? dot(q - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(q - (a + ab * t));
  }

  double cell_;
  std::vector<Vec3> segments_a_, segments_b_;
  std::unordered_map<long long, std::vector<int>> cells_;
};

}  // namespace

std::vector<Orbit> sample_regular_orbits(const DispersionRelation& f, double energy,
                                         const Direction& dir,
                                         const std::vector<double>& critical_heights,
                                         const SimOptions& opts,
                                         const std::vector<CriticalPoint>& criticals) {
  const double period = dir.height_period;
  std::vector<double> heights = critical_heights;
  std::sort(heights.begin(), heights.end());
  heights.erase(std::unique(heights.begin(), heights.end(),
                            [&](double a, double b) { return std::fabs(a - b) < opts.tol_h; }),
                heights.end());

  std::vector<double> offsets;
  if (heights.empty()) {
    const int n = std::max(2, opts.levels_per_gap * 2);
    for (int j = 0; j < n; ++j) offsets.push_back(period * (j + 0.5) / n);
  } else {
    for (std::size_t i = 0; i < heights.size(); ++i) {
      const double a = heights[i];
      const double b = i + 1 < heights.size() ? heights[i + 1] : heights[0] + period;
      const double gap = b - a;
      if (gap < 8 * opts.tol_h) continue;
      for (int j = 1; j <= opts.levels_per_gap; ++j)
        offsets.push_back(a + gap * j / (opts.levels_per_gap + 1));
    }
  }

  const Vec3 A1 = to_vec3(dir.lat1) * kTwoPi;
  const Vec3 A2 = to_vec3(dir.lat2) * kTwoPi;
  const int n_t = std::max(1, static_cast<int>(std::ceil(norm(A2) / opts.scanline_spacing)));
  const int n_s = std::max(16, static_cast<int>(std::ceil(norm(A1) / opts.scan_step)));

  std::vector<Orbit> orbits;
  for (double c : offsets) {
    const std::size_t level_start = orbits.size();
    TorusPolylineIndex index(0.35);
    const Vec3 plane_origin = dir.unit * c;
    std::vector<Vec3> seeds;
    for (int j = 0; j < n_t; ++j) {
      const Vec3 base = plane_origin + A2 * ((j + 0.5) / n_t);
      double prev = evaluate_value(f, base) - energy;
      for (int i = 1; i <= n_s; ++i) {
        const double alpha = static_cast<double>(i) / n_s;
        const double cur = evaluate_value(f, base + A1 * alpha) - energy;
        if ((prev < 0 && cur >= 0) || (prev > 0 && cur <= 0)) {
          double lo = static_cast<double>(i - 1) / n_s, hi = alpha, glo = prev;
          for (int it = 0; it < 48; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double gm = evaluate_value(f, base + A1 * mid) - energy;
            if ((glo < 0) == (gm < 0)) {
              lo = mid;
              glo = gm;
            } else {
              hi = mid;
            }
          }
          seeds.push_back(base + A1 * (0.5 * (lo + hi)));
        }
        prev = cur;
      }
    }

    // A seed sits on an already-traced orbit when a short exact walk along
    // that orbit (restarted from the nearest stored curve point) passes
    // through it. The stored polyline alone is too coarse: integrator steps
    // cut corners by far more than the curve separation near separatrices.
    auto seed_on_traced_orbit = [&](const Vec3& seed) {
      Vec3 near_sample;
      const double coarse = index.distance(seed, &near_sample);
      if (coarse >= 0.02) return false;
      if (coarse < 1e-7) return true;
      // Walk the candidate orbit in its own lift (the stored samples keep
      // the plane offset exact); distances are taken modulo the lattice.
      const double c_walk = dot(dir.unit, near_sample);
      // Segment distance between consecutive walk points resolves far below
      // the walk step size.
      auto seg_dist_to_seed = [&](const Vec3& a, const Vec3& b) {
        Vec3 d = seed - a;
        for (int i = 0; i < 3; ++i) d[i] -= kTwoPi * std::round(d[i] / kTwoPi);
        const Vec3 q = a + d;  // seed in the walk's lift
        const Vec3 s = b - a;
        const double len2 = norm2(s);
        double t = len2 > 1e-30 ? dot(q - a, s) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return norm(q - (a + s * t));
      };
      double dmin = 1e30;
      for (double sign : {1.0, -1.0}) {
        Vec3 y = near_sample;
        for (int m = 0; m < 80 && dmin > 1e-6; ++m) {
          Vec3 y_next = rk4_step(f, dir, y, sign * 0.01, 1.0);
          project_surface_in_plane(f, energy, dir.unit, c_walk, y_next, opts.tol_f, opts.tol_p);
          dmin = std::min(dmin, seg_dist_to_seed(y, y_next));
          y = y_next;
        }
      }
      if (std::getenv("NVK_DEBUG_DEDUP"))
        std::fprintf(stderr, "dedup seed (%.4f,%.4f,%.4f) coarse %.2e walk dmin %.2e -> %s\n",
                     seed.x, seed.y, seed.z, coarse, dmin,
                     dmin < opts.orbit_dedup_dist ? "dup" : "new");
      return dmin < opts.orbit_dedup_dist;
    };

    for (const auto& seed_raw : seeds) {
      Vec3 seed = seed_raw;
      if (!project_surface_in_plane(f, energy, dir.unit, c, seed, opts.tol_f, opts.tol_p))
        continue;
      bool excluded = false;
      for (const auto& cp : criticals)
        if (torus_distance_to(seed, cp.point.position) < opts.saddle_exclusion) {
          excluded = true;
          break;
        }
      if (excluded) continue;
      if (seed_on_traced_orbit(seed)) continue;
      SimOptions trace_opts = opts;
      trace_opts.keep_samples = true;  // the level's dedup needs polylines
      Orbit orbit = trace_level_orbit(f, energy, dir, seed, trace_opts, criticals);
      index.add_polyline(orbit.samples);
      orbits.push_back(std::move(orbit));
    }
    if (!opts.keep_samples) {
      // Polylines are only needed within the level; long open orbits at
      // scan scale would otherwise dominate memory.
      for (std::size_t i = level_start; i < orbits.size(); ++i) orbits[i].samples.clear();
    }
  }
  return orbits;
}

// ---------------------------------------------------------------------------
// transverse drift of the open-orbit family

namespace {

double polyline_match(const std::vector<Vec3>& poly, const Vec3& q, IVec3& kappa) {
  // Nearest distance from q to the polyline modulo 2*pi, and the integer
  // lift offset of the matched point.
  double best = 1e30;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    Vec3 d = q - poly[i];
    Vec3 k{std::round(d.x / kTwoPi), std::round(d.y / kTwoPi), std::round(d.z / kTwoPi)};
    const Vec3 qs = q - k * kTwoPi;  // q shifted into the segment's lift
    const Vec3 ab = poly[i + 1] - poly[i];
    const double len2 = norm2(ab);
    double t = len2 > 1e-30 ? dot(qs - poly[i], ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dist = norm(qs - (poly[i] + ab * t));
    if (dist < best) {
      best = dist;
      kappa = {static_cast<std::int64_t>(k.x), static_cast<std::int64_t>(k.y),
               static_cast<std::int64_t>(k.z)};
    }
  }
  return best;
}

}  // namespace

namespace {

// The climbing machinery below constructs a loop that stays on the open
// component: climb the height gradient, and at every critical-level crossing
// verify (by tracing the orbit a little above the level) that the path is
// still on an open orbit of the starting family. A failed crossing rewinds
// below the level and slides along the section curve before retrying, which
// picks a different quadrant of the separatrix to pass through.
struct Climber {
  const DispersionRelation& f;
  double energy;
  const Direction& dir;
  const SimOptions& opts;
  const std::vector<CriticalPoint>& criticals;
  Vec3 p_dir;               // family orientation (unit)
  double probe_arc_budget;  // absolute arc cap for family probes

  Vec3 climb_field(const Vec3& y) const {
    double val;
    Vec3 grad;
    evaluate_value_gradient(f, y, val, grad);
    const double g2 = norm2(grad);
    if (g2 < 1e-20) return Vec3{};
    const Vec3 nhat = grad / std::sqrt(g2);
    return dir.unit - nhat * dot(dir.unit, nhat);
  }

  // One vertical step; `updown` = +1 climbs, -1 descends.
  bool climb_step(Vec3& x, double ds, double& arc, int& detours, double updown) const {
    const Vec3 w = climb_field(x);
    if (norm(w) < 0.3) {
      // Side-step along the section curve to get around a critical point.
      if (++detours > 80) return false;
      for (int m = 0; m < 16; ++m) {
        double val;
        Vec3 grad;
        evaluate_value_gradient(f, x, val, grad);
        Vec3 t = cross(grad, dir.unit);
        const double tn = norm(t);
        if (tn < 1e-10)
          x += dir.e1 * 0.02 + dir.e2 * 0.0074;
        else
          x += t * (0.025 / tn);
        if (!project_surface(f, energy, x, opts.tol_f)) return false;
        arc += 0.025;
      }
      return true;
    }
    auto fld = [&](const Vec3& y) {
      Vec3 v = climb_field(y);
      const double n = norm(v);
      return n > 1e-12 ? v * (updown / n) : Vec3{};
    };
    const Vec3 k1 = fld(x);
    const Vec3 k2 = fld(x + k1 * (ds / 2));
    const Vec3 k3 = fld(x + k2 * (ds / 2));
    const Vec3 k4 = fld(x + k3 * ds);
    x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (ds / 6);
    arc += ds;
    return project_surface(f, energy, x, opts.tol_f);
  }

  // True when the orbit through x is open with the family's sign.
  bool on_family(const Vec3& x) const {
    try {
      SimOptions probe_opts = opts;
      probe_opts.keep_samples = false;
      probe_opts.max_len_factor = probe_arc_budget / (kTwoPi * dir.h_norm);
      Orbit probe = trace_level_orbit(f, energy, dir, x, probe_opts, criticals);
      if (std::getenv("NVK_DEBUG_CLIMB"))
        std::fprintf(stderr, "  probe w (%lld,%lld,%lld) arc %.2f\n",
                     static_cast<long long>(probe.winding.x),
                     static_cast<long long>(probe.winding.y),
                     static_cast<long long>(probe.winding.z), probe.arc_length);
      return !probe.winding.is_zero() && dot(to_vec3(probe.winding), p_dir) > 0;
    } catch (const Error& e) {
      if (std::getenv("NVK_DEBUG_CLIMB"))
        std::fprintf(stderr, "  probe error: %s\n", e.what());
      return false;
    }
  }
};

// The transverse cycle of the open component is found by a bounded search
// over its cylinders: from the seed orbit, move across critical levels (up
// or down) through straight crossings or separatrix-edge hops, keeping only
// moves that land back on the same open family. Closure is detected when a
// vertical segment crosses base + k*period on the seed orbit's translate.
struct ClimbSearch {
  const Climber& climber;
  const Orbit& open_orbit;
  std::vector<double> hs;  // sorted reduced critical heights
  std::vector<Vec3> edge_mids;
  std::vector<double> edge_heights;  // reduced
  std::vector<Vec3> saddle_pos;
  std::vector<double> saddle_heights;  // reduced
  double base_height;
  int expansions = 0;
  IVec3 sigma;
  std::vector<std::vector<Vec3>> visited;  // thinned carrier polylines

  double period() const { return climber.dir.height_period; }

  double next_critical(double h_abs, double updown) const {
    if (hs.empty()) return updown * std::numeric_limits<double>::infinity();
    const double T = period();
    double best = updown * std::numeric_limits<double>::infinity();
    const double base = std::floor(h_abs / T) * T;
    for (double shift = -2 * T; shift <= 2 * T; shift += T)
      for (double hc : hs) {
        const double cand = base + shift + hc;
        if (updown > 0 && cand > h_abs + 1e-9 * T) best = std::min(best, cand);
        if (updown < 0 && cand < h_abs - 1e-9 * T) best = std::max(best, cand);
      }
    return best;
  }

  // Walks vertically from x until |height| passes `stop` by a clear margin.
  // Reports closure when a period boundary crossing lands on the seed orbit.
  enum class WalkResult { Closed, Reached, Failed };
  WalkResult walk_vertical(Vec3& x, double updown, double stop_clear) {
    const SimOptions& opts = climber.opts;
    const double T = period();
    const double ds = std::min(0.02, T / 10.0);
    double arc = 0.0;
    int detours = 0;
    const double arc_cap = 80.0 + 40.0 * T;
    while (arc < arc_cap) {
      const double h_prev = dot(climber.dir.unit, x);
      if (!climber.climb_step(x, ds, arc, detours, updown)) return WalkResult::Failed;
      const double h_cur = dot(climber.dir.unit, x);

      // Period-boundary closure test on any crossing of base + k*T, k >= 1.
      const double lo = std::min(h_prev, h_cur), hi = std::max(h_prev, h_cur);
      const double k_lo = std::ceil((lo - base_height) / T - 1e-12);
      for (double kf = k_lo; base_height + kf * T <= hi + 1e-15; kf += 1.0) {
        const int k = static_cast<int>(std::llround(kf));
        if (k < 1 || k > opts.max_climb_periods) continue;
        Vec3 x_land = x;
        if (!project_surface_in_plane(climber.f, climber.energy, climber.dir.unit,
                                      base_height + k * T, x_land, opts.tol_f, opts.tol_p))
          continue;
        if (try_close(x_land, k)) return WalkResult::Closed;
      }
      if ((updown > 0 && h_cur > stop_clear) || (updown < 0 && h_cur < stop_clear))
        return WalkResult::Reached;
    }
    return WalkResult::Failed;
  }

  bool try_close(const Vec3& x_land, int k) {
    const SimOptions& opts = climber.opts;
    IVec3 kappa;
    const double dist = polyline_match(open_orbit.samples, x_land, kappa);
    if (std::getenv("NVK_DEBUG_CLIMB"))
      std::fprintf(stderr, "climb: k=%d match dist %.5f kappa (%lld,%lld,%lld)\n", k, dist,
                   static_cast<long long>(kappa.x), static_cast<long long>(kappa.y),
                   static_cast<long long>(kappa.z));
    if (dist >= opts.match_tol || kappa.is_zero() || dot(climber.dir.h, kappa) != k)
      return false;
    // Confirm by probing a short stretch of the curve through the landing;
    // lift offsets may jump by the orbit winding across the closure seam.
    const double plane_c = dot(climber.dir.unit, x_land);
    Vec3 probe = x_land;
    const IVec3 w_orbit = open_orbit.winding;
    for (int m = 0; m < 30; ++m) {
      probe = rk4_step(climber.f, climber.dir, probe, 0.02, 1.0);
      project_surface_in_plane(climber.f, climber.energy, climber.dir.unit, plane_c, probe,
                               opts.tol_f, opts.tol_p);
      if (m % 6 == 5) {
        IVec3 kp;
        if (polyline_match(open_orbit.samples, probe, kp) > 5e-3 ||
            (kp != kappa && kp != kappa + w_orbit && kp != kappa - w_orbit))
          return false;
      }
    }
    sigma = kappa;
    return true;
  }

  bool dirty = false;  // incomplete exploration: budget or numerics

  // Expands one state: normalizes it onto its gap midpoint plane, checks it
  // against visited states (closure or prune), and enqueues the reachable
  // neighbor states. Returns true when the transverse cycle closed.
  bool expand(Vec3 x_in, std::vector<Vec3>& out_children) {
    // Normalize the state onto its gap's exact midpoint plane so revisits of
    // the same cylinder land on the same orbit and can be matched.
    {
      const double h0 = dot(climber.dir.unit, x_in);
      const double c_up = next_critical(h0, 1.0);
      const double c_dn = next_critical(h0, -1.0);
      if (std::isfinite(c_up) && std::isfinite(c_dn)) {
        const double mid = 0.5 * (c_up + c_dn);
        if (std::fabs(mid - h0) > 1e-9) {
          const double updown = mid > h0 ? 1.0 : -1.0;
          const WalkResult res = walk_vertical(x_in, updown, mid);
          if (res == WalkResult::Closed) return true;
          if (res == WalkResult::Failed) {
            dirty = true;
            return false;
          }
          if (!project_surface_in_plane(climber.f, climber.energy, climber.dir.unit, mid, x_in,
                                        climber.opts.tol_f, climber.opts.tol_p)) {
            dirty = true;
            return false;
          }
        }
      }
    }

    // Revisiting an earlier state's orbit closes a transverse cycle of the
    // open component when the lattice offset pairs nontrivially with h;
    // a zero offset is a true cycle in the search and is pruned.
    for (const auto& vpoly : visited) {
      IVec3 kappa;
      const double vd = polyline_match(vpoly, x_in, kappa);
      if (vd > 1e-3) continue;
      const std::int64_t pairing = dot(climber.dir.h, kappa);
      if (pairing == 0) return false;  // no vertical progress; prune
      if (std::llabs(pairing) <= climber.opts.max_climb_periods) {
        sigma = pairing > 0 ? kappa : -kappa;
        if (std::getenv("NVK_DEBUG_CLIMB"))
          std::fprintf(stderr, "climb: closed on visited state, sigma (%lld,%lld,%lld)\n",
                       static_cast<long long>(sigma.x), static_cast<long long>(sigma.y),
                       static_cast<long long>(sigma.z));
        return true;
      }
      return false;
    }

    if (++expansions > 40) {
      dirty = true;
      return false;
    }
    if (std::getenv("NVK_DEBUG_CLIMB"))
      std::fprintf(stderr, "expand %d at h=%.4f (base %.4f, T %.4f)\n", expansions,
                   dot(climber.dir.unit, x_in), base_height, climber.dir.height_period);

    // Trace the carrier orbit through x for slide targets.
    Orbit carrier;
    try {
      SimOptions t_opts = climber.opts;
      t_opts.keep_samples = true;
      t_opts.max_len_factor = climber.probe_arc_budget / (kTwoPi * climber.dir.h_norm);
      carrier = trace_level_orbit(climber.f, climber.energy, climber.dir, x_in, t_opts,
                                  climber.criticals);
    } catch (const Error&) {
      dirty = true;
      return false;
    }
    IVec3 shift_k;
    if (polyline_match(carrier.samples, x_in, shift_k) > 5e-3) {
      dirty = true;
      return false;
    }
    // Carrier samples live in their own lift; 2*pi*shift_k maps them into
    // the lift of the current path.
    const Vec3 shift = to_vec3(shift_k) * kTwoPi;
    {
      std::vector<Vec3> thin;
      thin.reserve(carrier.samples.size() / 2 + 2);
      for (std::size_t i = 0; i < carrier.samples.size(); i += 2)
        thin.push_back(carrier.samples[i] + shift);
      thin.push_back(carrier.samples.back() + shift);
      visited.push_back(std::move(thin));
    }

    for (double updown : {1.0, -1.0}) {
      const double h_here = dot(climber.dir.unit, x_in);
      const double c_next = next_critical(h_here, updown);
      if (!std::isfinite(c_next)) continue;
      const double T = period();
      const double gap_far = std::fabs(next_critical(c_next, updown) - c_next);
      const double clear = c_next + updown * std::min(0.3 * gap_far, 0.35 * T);
      const double crit_reduced = climber.dir.reduced_height(climber.dir.unit * c_next);

      // Crossing candidates: straight, then separatrix-edge midpoints shared
      // with the carrier, nearest first.
      std::vector<std::pair<double, Vec3>> candidates;
      candidates.emplace_back(0.0, x_in);
      for (std::size_t ei = 0; ei < edge_mids.size(); ++ei) {
        double dh = std::fabs(edge_heights[ei] - crit_reduced);
        dh = std::min(dh, T - dh);
        if (dh > 1e-5) continue;
        double best = 1e30;
        Vec3 best_pt;
        for (std::size_t i = 0; i < carrier.samples.size(); i += 2) {
          Vec3 d = edge_mids[ei] - carrier.samples[i];
          for (int c = 0; c < 3; ++c) d[c] -= kTwoPi * std::round(d[c] / kTwoPi);
          const double dist = norm(d);
          if (dist < best) {
            best = dist;
            best_pt = carrier.samples[i] + shift;
          }
        }
        if (best < 1e29) candidates.emplace_back(best, best_pt);
      }
      std::sort(candidates.begin() + 1, candidates.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      for (const auto& [edge_dist, start_pt] : candidates) {
        Vec3 y = start_pt;
        const WalkResult res = walk_vertical(y, updown, clear);
        if (res == WalkResult::Closed) return true;
        if (res != WalkResult::Reached) continue;
        if (!climber.on_family(y)) continue;
        out_children.push_back(y);
      }

      // Diagonal saddle hops: two open cylinders can meet only at a saddle
      // (both adjacent quadrants closed). Approach the level, then jump to
      // the opposite hyperbola branch: the in-plane point reflection through
      // the saddle. The hop stays on this side of the critical level, so it
      // is homologically neutral.
      const double approach_h = c_next - updown * 0.03 * T;
      for (std::size_t si = 0; si < saddle_pos.size(); ++si) {
        double dh = std::fabs(saddle_heights[si] - crit_reduced);
        dh = std::min(dh, T - dh);
        if (dh > 1e-5) continue;

        Vec3 xa = x_in;
        if (walk_vertical(xa, updown, approach_h) != WalkResult::Reached) continue;
        Orbit near_carrier;
        try {
          SimOptions t_opts = climber.opts;
          t_opts.keep_samples = true;
          t_opts.max_len_factor = climber.probe_arc_budget / (kTwoPi * climber.dir.h_norm);
          near_carrier = trace_level_orbit(climber.f, climber.energy, climber.dir, xa, t_opts,
                                           climber.criticals);
        } catch (const Error&) {
          continue;
        }
        IVec3 near_k;
        if (polyline_match(near_carrier.samples, xa, near_k) > 5e-3) continue;
        const Vec3 near_shift = to_vec3(near_k) * kTwoPi;

        double best = 1e30;
        Vec3 x_near;
        for (std::size_t i = 0; i < near_carrier.samples.size(); ++i) {
          Vec3 d = saddle_pos[si] - near_carrier.samples[i];
          for (int c = 0; c < 3; ++c) d[c] -= kTwoPi * std::round(d[c] / kTwoPi);
          const double dist = norm(d);
          if (dist < best) {
            best = dist;
            x_near = near_carrier.samples[i] + near_shift;
          }
        }
        if (best > 0.5) continue;  // this cylinder does not touch the saddle
        Vec3 s_lift = saddle_pos[si];
        {
          Vec3 d = s_lift - x_near;
          for (int c = 0; c < 3; ++c) d[c] -= kTwoPi * std::round(d[c] / kTwoPi);
          s_lift = x_near + d;
        }
        const double plane_c = dot(climber.dir.unit, x_near);
        const Vec3 s_proj = s_lift + climber.dir.unit * (plane_c - dot(climber.dir.unit, s_lift));
        Vec3 y = s_proj * 2.0 - x_near;
        if (!project_surface_in_plane(climber.f, climber.energy, climber.dir.unit, plane_c, y,
                                      climber.opts.tol_f, climber.opts.tol_p))
          continue;
        IVec3 self_k;
        if (polyline_match(near_carrier.samples, y - near_shift, self_k) < 5e-3)
          continue;  // landed back on the same curve
        if (!climber.on_family(y)) continue;
        out_children.push_back(y);
      }
    }
    return false;
  }

  DriftOutcome run(const Vec3& start) {
    // Breadth-first over cylinder states: short transverse cycles close at
    // shallow depth, and the visited set prunes repeats.
    std::vector<Vec3> frontier{start};
    int pops = 0;
    while (!frontier.empty()) {
      std::vector<Vec3> next;
      for (const Vec3& s : frontier) {
        if (++pops > 320 || expansions > 40) {
          dirty = true;
          return DriftOutcome::Dirty;
        }
        std::vector<Vec3> children;
        if (expand(s, children)) return DriftOutcome::Closed;
        for (auto& c : children) next.push_back(c);
      }
      frontier = std::move(next);
    }
    return dirty ? DriftOutcome::Dirty : DriftOutcome::Exhausted;
  }
};

DriftOutcome climb_measure(const Climber& climber, const Orbit& open_orbit,
                           const std::vector<double>& critical_heights,
                           const std::vector<SeparatrixGraph>& graphs, IVec3& sigma) {
  ClimbSearch search{climber, open_orbit};
  search.hs = critical_heights;
  std::sort(search.hs.begin(), search.hs.end());
  search.hs.erase(std::unique(search.hs.begin(), search.hs.end(),
                              [&](double a, double b) {
                                return std::fabs(a - b) < climber.opts.tol_h;
                              }),
                  search.hs.end());
  for (const auto& g : graphs)
    for (const auto& e : g.edges) {
      if (e.samples.empty()) continue;
      const Vec3 mid = e.samples[e.samples.size() / 2];
      search.edge_mids.push_back(mid);
      search.edge_heights.push_back(climber.dir.reduced_height(mid));
    }
  for (const auto& cp : climber.criticals)
    if (cp.kind == CriticalKind::Saddle) {
      search.saddle_pos.push_back(cp.point.position);
      search.saddle_heights.push_back(cp.height);
    }
  search.base_height = dot(climber.dir.unit, open_orbit.samples.front());
  const DriftOutcome outcome = search.run(open_orbit.samples.front());
  if (outcome == DriftOutcome::Closed) sigma = search.sigma;
  return outcome;
}

}  // namespace

DriftOutcome measure_transverse_drift(const DispersionRelation& f, double energy,
                                      const Direction& dir, const Orbit& open_orbit,
                                      const SimOptions& opts,
                                      const std::vector<CriticalPoint>& criticals,
                                      const std::vector<SeparatrixGraph>& graphs, IVec3& sigma) {
  if (open_orbit.samples.size() < 3) return DriftOutcome::Dirty;
  if (open_orbit.winding.is_zero()) return DriftOutcome::Dirty;

  Climber climber{f,
                  energy,
                  dir,
                  opts,
                  criticals,
                  normalized(to_vec3(open_orbit.winding)),
                  std::max(400.0, 20.0 * open_orbit.arc_length)};
  std::vector<double> heights;
  for (const auto& cp : criticals) heights.push_back(cp.height);
  return climb_measure(climber, open_orbit, heights, graphs, sigma);
}

}  // namespace novikov
