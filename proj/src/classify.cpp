#include "novikov/classify.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <cmath>

#include "novikov/errors.hpp"

namespace novikov {

namespace {

// Zone vector sanity: a stability zone around direction h pairs nontrivially
// with h; a label orthogonal to h signals a botched drift measurement.
bool plausible_zone(const IVec3& l, const IVec3& h) { return dot(l, h) != 0; }

}  // namespace

DirectionRecord classify_direction(const DispersionRelation& f, double energy,
                                   const Direction& dir, const SimOptions& opts,
                                   ClassifyDetail* detail) {
  const auto t_start = std::chrono::steady_clock::now();
  DirectionRecord rec;
  rec.h = dir.h;

  ClassifyDetail local;
  ClassifyDetail& d = detail ? *detail : local;

  auto finish = [&](ZoneLabel label) {
    rec.label = label;
    rec.diag.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    if (!opts.keep_samples) {
      for (auto& o : d.orbits) o.samples.clear();
      for (auto& g : d.graphs)
        for (auto& e : g.edges) e.samples.clear();
    }
    return rec;
  };

  try {
    d.criticals = find_critical_points(f, energy, dir, opts);
  } catch (const SeedExhaustion&) {
    return finish(ZoneLabel::make_unresolved(UnresolvedReason::SolverFailure));
  } catch (const Error&) {
    return finish(ZoneLabel::make_unresolved(UnresolvedReason::SolverFailure));
  }
  rec.diag.critical_count = static_cast<int>(d.criticals.size());
  for (const auto& cp : d.criticals) {
    if (cp.kind == CriticalKind::Saddle) rec.diag.saddle_count += 1;
    rec.diag.max_residual = std::max(rec.diag.max_residual, 0.0);
  }

  // Separatrix edge samples are needed internally (crossing targets of the
  // drift measurement) even when the caller drops samples.
  SimOptions graph_opts = opts;
  graph_opts.keep_samples = true;
  try {
    d.graphs = trace_separatrix_graph(f, energy, dir, d.criticals, graph_opts);
  } catch (const DanglingSeparatrix&) {
    return finish(ZoneLabel::make_unresolved(UnresolvedReason::DanglingSeparatrix));
  } catch (const DegenerateFailure&) {
    return finish(ZoneLabel::make_unresolved(UnresolvedReason::Degenerate));
  } catch (const Error&) {
    return finish(ZoneLabel::make_unresolved(UnresolvedReason::SolverFailure));
  }

  std::vector<double> heights;
  for (const auto& cp : d.criticals) heights.push_back(cp.height);
  try {
    d.orbits = sample_regular_orbits(f, energy, dir, heights, opts, d.criticals);
  } catch (const Error&) {
    return finish(ZoneLabel::make_unresolved(UnresolvedReason::SolverFailure));
  }
  rec.diag.orbit_count = static_cast<int>(d.orbits.size());
  for (const auto& o : d.orbits)
    rec.diag.max_residual = std::max(rec.diag.max_residual, o.closure_residual);

  std::vector<IVec3> generators;
  for (const auto& g : d.graphs)
    for (const auto& c : g.cycle_classes) generators.push_back(c);
  for (const auto& o : d.orbits) generators.push_back(o.winding);

  try {
    d.lattice = cycle_lattice(generators, dir.h);
  } catch (const Error&) {
    return finish(ZoneLabel::make_unresolved(UnresolvedReason::SolverFailure));
  }

  if (d.lattice.rank == 0) return finish(ZoneLabel::make_null());

  if (d.lattice.rank == 2) {
    ZoneLabel label = miller_from_lattice(d.lattice, dir.h);
    if (label.kind == ZoneLabel::Kind::Zone)
      label.zone = canonical_label(label.zone, opts.symmetric_labels);
    return finish(label);
  }

  // Rank 1: the open-orbit direction alone does not pin the 2-cycle. Measure
  // the transverse drift sigma of the open-orbit family; the zone class is
  // primitive(p x sigma). When the component has no transverse cycle at all
  // (the search exhausts its cylinders), the direction is the self-centered
  // one of its own zone and the class is parallel to h.
  const Orbit* seed_orbit = nullptr;
  for (const auto& o : d.orbits) {
    if (o.winding.is_zero()) continue;
    if (!seed_orbit || content(o.winding) < content(seed_orbit->winding)) seed_orbit = &o;
  }
  if (seed_orbit) {
    const IVec3 p = primitive_vector(seed_orbit->winding);
    const Vec3 p_dir = to_vec3(p);

    // Signed count of the seed family's orbits per level; the class l must
    // reproduce it as the intersection count content(l x h).
    std::int64_t family_count = 0;
    {
      std::map<std::int64_t, std::int64_t> per_level;
      for (const auto& o : d.orbits) {
        if (o.winding.is_zero()) continue;
        if (dot(to_vec3(o.winding), p_dir) <= 0) continue;
        per_level[static_cast<std::int64_t>(std::llround(o.level * 1e7))] +=
            content(o.winding);
      }
      for (const auto& [lvl, c] : per_level) family_count = std::max(family_count, c);
    }

    // The seed orbit's polyline may have been dropped by the sampling stage;
    // retrace it with samples for the climb.
    Orbit seed_traced;
    if (seed_orbit->samples.empty()) {
      try {
        SimOptions t_opts = opts;
        t_opts.keep_samples = true;
        seed_traced = trace_level_orbit(f, energy, dir, seed_orbit->seed, t_opts, d.criticals);
      } catch (const Error&) {
        return finish(ZoneLabel::make_unresolved(UnresolvedReason::RankOne));
      }
      seed_orbit = &seed_traced;
    }

    IVec3 sigma;
    const DriftOutcome outcome =
        measure_transverse_drift(f, energy, dir, *seed_orbit, opts, d.criticals, d.graphs, sigma);
    if (outcome == DriftOutcome::Closed) {
      const IVec3 lraw = cross(p, sigma);
      if (!lraw.is_zero()) {
        const IVec3 l = primitive_vector(lraw);
        // Orbit levels may undercount the family (seeding can miss members
        // of tight near-separatrix pairs) but never overcount it.
        const bool count_ok = family_count <= content(cross(l, dir.h));
        if (plausible_zone(l, dir.h) && count_ok) {
          d.drift_used = true;
          d.drift_sigma = sigma;
          return finish(ZoneLabel::make_zone(canonical_label(l, opts.symmetric_labels)));
        }
      }
    } else if (outcome == DriftOutcome::Exhausted) {
      // No transverse cycle exists on the component. The self-centered zone
      // structure is confirmed only when the open orbits vanish on a whole
      // critical-height gap (the bounded-band picture); otherwise this is
      // indistinguishable from an undersampled interior direction.
      std::vector<double> hs;
      for (const auto& cp : d.criticals) hs.push_back(cp.height);
      std::sort(hs.begin(), hs.end());
      hs.erase(std::unique(hs.begin(), hs.end(),
                           [&](double a, double b) { return std::fabs(a - b) < opts.tol_h; }),
               hs.end());
      if (hs.size() >= 2) {
        std::vector<int> open_in_gap(hs.size(), 0);
        auto gap_of = [&](double level) {
          std::size_t g = hs.size() - 1;
          for (std::size_t i = 0; i < hs.size(); ++i)
            if (hs[i] <= level + 1e-12) g = i;
          return g;
        };
        for (const auto& o : d.orbits)
          if (!o.winding.is_zero()) open_in_gap[gap_of(o.level)] += 1;
        bool empty_gap = false;
        for (int c : open_in_gap)
          if (c == 0) empty_gap = true;
        if (empty_gap)
          return finish(ZoneLabel::make_zone(canonical_label(dir.h, opts.symmetric_labels)));
      }
    }
  }
  return finish(ZoneLabel::make_unresolved(UnresolvedReason::RankOne));
}

}  // namespace novikov
