// Grid search over (L_arm, L_src, phi_src, n): error-budget bound on the SRC
// phase, per-candidate validation (micro-tuning + rotation-error scan), the
// parallel driver with deterministic merge, and the density aggregation.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "eprsq/params.hpp"
#include "eprsq/physics.hpp"
#include "eprsq/src_cavity.hpp"

namespace eprsq {

// Relative sensitivity degradation allowed at any frequency (10% in power).
inline constexpr double degradation_budget = 0.1;

// Frequency grid for rotation-error maxima: 1000 log-spaced points over
// 2 pi * [1, 1e4] Hz.
inline const std::vector<double>& rotation_scan_omegas() {
  static const std::vector<double> grid = [] {
    std::vector<double> g(1000);
    for (int i = 0; i < 1000; ++i)
      g[i] = 2.0 * pi * std::pow(10.0, 4.0 * i / 999.0);
    return g;
  }();
  return grid;
}

// Largest admissible |phi_src - phi_exact|: the rotation-error budget divided
// by the worst-case sensitivity of the rotation angle to the SRC phase,
//   bound = budget / max_W |d Phi_rot / d phi|,
// with the derivative chained through gamma_f(phi) and delta_f = -gamma_f and
// taken by central difference with relative step 1e-6.
inline double error_budget_bound(const InterferometerParams& p,
                                 double phi_exact,
                                 double dphi_budget = 0.02) {
  const double h = 1e-6 * phi_exact;
  const double gp = gamma_f_of_phi(phi_exact + h, p.T_itm, p.T_srm, p.L_arm);
  const double gm = gamma_f_of_phi(phi_exact - h, p.T_itm, p.T_srm, p.L_arm);
  const FilterTarget tp{gp, -gp};
  const FilterTarget tm{gm, -gm};
  double max_slope = 0.0;
  for (const double omega : rotation_scan_omegas()) {
    const double d = (phi_rot(omega, tp) - phi_rot(omega, tm)) / (2.0 * h);
    max_slope = std::max(max_slope, std::abs(d));
  }
  return dphi_budget / max_slope;
}

// Filter parameters actually realized by a tuned candidate: the SRC phase
// after the dL_src correction, mapped through gamma_f_of_phi.
inline FilterTarget realized_target(const TuningCandidate& c,
                                    const MicroTuning& m,
                                    const InterferometerParams& p) {
  const double phi_after = c.phi_approx + c.delta * m.dL_src / speed_of_light;
  const double gf = gamma_f_of_phi(phi_after, p.T_itm, p.T_srm, c.L_arm);
  return FilterTarget{gf, -gf};
}

inline double max_rotation_error(const InterferometerParams& cell,
                                 const FilterTarget& target) {
  double worst = 0.0;
  for (const double omega : rotation_scan_omegas())
    worst = std::max(worst, std::abs(delta_phi(cell, omega, target)));
  return worst;
}

struct WorkingPoint {
  TuningCandidate candidate;
  MicroTuning micro;
  double max_dphi = 0.0;     // max rotation error over the scan grid, rad
  double degradation = 0.0;  // sinh^2(2r) * max_dphi^2
};

struct DensityCell {
  double L_arm = 0.0;
  double L_src = 0.0;
  std::int64_t count = 0;
};

struct SearchStats {
  std::uint64_t cells_total = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected_band = 0;
  std::uint64_t rejected_budget = 0;
  std::uint64_t rejected_micro = 0;
  std::uint64_t rejected_dphi = 0;
  double wall_seconds = 0.0;
  int workers = 1;
};

// Per-L_arm quantities shared by all cells of that arm length.
struct CellContext {
  double phi_exact = 0.0;
  double budget_bound = 0.0;
};

inline CellContext make_cell_context(const InterferometerParams& p,
                                     double L_arm, double dphi_budget) {
  InterferometerParams q = p;
  q.L_arm = L_arm;
  const FilterTarget t = target_gamma_f(q);
  CellContext ctx;
  ctx.phi_exact = solve_phi_exact(t.gamma_f, q.T_itm, q.T_srm, L_arm);
  ctx.budget_bound = error_budget_bound(q, ctx.phi_exact, dphi_budget);
  return ctx;
}

enum class RejectReason { None, Budget, MicroTune, RotationError };

// Full per-candidate validation chain. Absent result means rejection; the
// reason comes back through the optional out-parameter for accounting.
inline std::optional<WorkingPoint> evaluate_candidate(
    const TuningCandidate& cand, const InterferometerParams& p,
    const Tolerances& tol, const CellContext& ctx,
    RejectReason* reason = nullptr) {
  const auto reject = [&](RejectReason r) {
    if (reason) *reason = r;
    return std::nullopt;
  };
  InterferometerParams cell = p;
  cell.L_arm = cand.L_arm;
  cell.L_src = cand.L_src;

  if (std::abs(cand.phi_approx - ctx.phi_exact) > ctx.budget_bound)
    return reject(RejectReason::Budget);

  const std::optional<MicroTuning> micro = micro_tune(cand, cell, tol);
  if (!micro) return reject(RejectReason::MicroTune);

  const FilterTarget target = realized_target(cand, *micro, cell);
  const double max_dphi = max_rotation_error(cell, target);
  if (!(max_dphi < tol.dphi_budget_rad))
    return reject(RejectReason::RotationError);
  const double sh = std::sinh(2.0 * p.squeeze_r);
  const double degradation = sh * sh * max_dphi * max_dphi;
  if (!(degradation < degradation_budget))
    return reject(RejectReason::RotationError);

  if (reason) *reason = RejectReason::None;
  return WorkingPoint{cand, *micro, max_dphi, degradation};
}

// Convenience overload recomputing the per-L_arm context.
inline std::optional<WorkingPoint> evaluate_candidate(
    const TuningCandidate& cand, const InterferometerParams& p,
    const Tolerances& tol, RejectReason* reason = nullptr) {
  return evaluate_candidate(
      cand, p, tol, make_cell_context(p, cand.L_arm, tol.dphi_budget_rad),
      reason);
}

struct GridSpec {
  double L_arm_min = 9995.0, L_arm_max = 10005.0, L_arm_step = 1.0;
  double L_src_min = 100.0, L_src_max = 200.0, L_src_step = 1.0;
  double phi_window = 0.002;
  double phi_step = 1e-4;
  int n_min = 7, n_max = 33;
  double delta_min = 2.0 * pi * 5e6;   // rad/s
  double delta_max = 2.0 * pi * 50e6;  // rad/s

  static long axis_count(double lo, double hi, double step) {
    return static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  }
  long arm_count() const { return axis_count(L_arm_min, L_arm_max, L_arm_step); }
  long src_count() const { return axis_count(L_src_min, L_src_max, L_src_step); }
  long phi_half_count() const {
    return static_cast<long>(std::floor(phi_window / phi_step + 1e-9));
  }
  long phi_count() const { return 2 * phi_half_count() + 1; }
  long n_count() const { return n_max - n_min + 1; }
  std::uint64_t cell_count() const {
    return static_cast<std::uint64_t>(arm_count()) * src_count() * phi_count() *
           n_count();
  }

  void validate(const InterferometerParams& p) const {
    if (!(L_arm_step > 0.0 && L_src_step > 0.0 && phi_step > 0.0))
      throw std::invalid_argument("grid: steps must be positive");
    if (L_arm_max < L_arm_min || L_src_max < L_src_min || n_max < n_min)
      throw std::invalid_argument("grid: empty axis range");
    if (!(phi_window >= 0.0))
      throw std::invalid_argument("grid: phi_window must be >= 0");
    if (!(delta_min > 0.0 && delta_max > delta_min))
      throw std::invalid_argument("grid: bad detuning band");
    InterferometerParams q = p;
    q.L_arm = 0.5 * (L_arm_min + L_arm_max);
    const double phi_exact = solve_phi_exact(target_gamma_f(q).gamma_f,
                                             q.T_itm, q.T_srm, q.L_arm);
    const NRange adm = admissible_n_range(phi_exact, L_src_min, L_src_max,
                                          delta_min, delta_max);
    if (n_min < adm.n_min || n_max > adm.n_max)
      throw std::invalid_argument(
          "grid: n range not admissible for the detuning band");
  }
};

struct SearchResult {
  std::vector<WorkingPoint> points;
  std::vector<DensityCell> density;
  SearchStats stats;
};

inline bool canonical_less(const WorkingPoint& a, const WorkingPoint& b) {
  if (a.candidate.L_arm != b.candidate.L_arm)
    return a.candidate.L_arm < b.candidate.L_arm;
  if (a.candidate.L_src != b.candidate.L_src)
    return a.candidate.L_src < b.candidate.L_src;
  if (a.candidate.n_fsr != b.candidate.n_fsr)
    return a.candidate.n_fsr < b.candidate.n_fsr;
  return a.candidate.phi_approx < b.candidate.phi_approx;
}

// Counts of working points per (L_arm, L_src) pair, canonically sorted.
inline std::vector<DensityCell> density_map(std::vector<WorkingPoint> points) {
  std::sort(points.begin(), points.end(), canonical_less);
  std::vector<DensityCell> cells;
  for (const WorkingPoint& w : points) {
    if (!cells.empty() && cells.back().L_arm == w.candidate.L_arm &&
        cells.back().L_src == w.candidate.L_src) {
      ++cells.back().count;
    } else {
      cells.push_back(DensityCell{w.candidate.L_arm, w.candidate.L_src, 1});
    }
  }
  return cells;
}

// Evaluate the full grid. Cells are pure functions of their coordinates, so
// the flattened index space is split into contiguous chunks, one per worker;
// results are merged and canonically sorted, making the output independent of
// the worker count.
inline SearchResult run_search(const GridSpec& grid,
                               const InterferometerParams& p,
                               const Tolerances& tol, int workers) {
  p.validate();
  grid.validate(p);
  if (workers < 1) throw std::invalid_argument("run_search: workers must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  const long na = grid.arm_count();
  const long ns = grid.src_count();
  const long nphi = grid.phi_count();
  const long nn = grid.n_count();
  const long phi_half = grid.phi_half_count();
  const std::uint64_t total = grid.cell_count();

  std::vector<CellContext> ctx(na);
  for (long ia = 0; ia < na; ++ia)
    ctx[ia] = make_cell_context(p, grid.L_arm_min + ia * grid.L_arm_step,
                                tol.dphi_budget_rad);

  const int nw = static_cast<int>(
      std::min<std::uint64_t>(workers, std::max<std::uint64_t>(total, 1)));
  std::vector<std::vector<WorkingPoint>> found(nw);
  std::vector<SearchStats> stats(nw);

  const auto worker = [&](int w, std::uint64_t begin, std::uint64_t end) {
    SearchStats& st = stats[w];
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      const long in = static_cast<long>(idx % nn);
      const long ip = static_cast<long>((idx / nn) % nphi);
      const long is = static_cast<long>((idx / (nn * nphi)) % ns);
      const long ia = static_cast<long>(idx / (nn * nphi * ns));
      const double L_arm = grid.L_arm_min + ia * grid.L_arm_step;
      const double L_src = grid.L_src_min + is * grid.L_src_step;
      const double phi =
          ctx[ia].phi_exact + static_cast<double>(ip - phi_half) * grid.phi_step;
      const int n = grid.n_min + static_cast<int>(in);
      ++st.cells_total;
      const TuningCandidate cand = make_candidate(p, L_arm, L_src, phi, n);
      if (cand.delta < grid.delta_min || cand.delta > grid.delta_max) {
        ++st.rejected_band;
        continue;
      }
      RejectReason why = RejectReason::None;
      if (auto point = evaluate_candidate(cand, p, tol, ctx[ia], &why)) {
        found[w].push_back(*point);
        ++st.accepted;
      } else {
        switch (why) {
          case RejectReason::Budget: ++st.rejected_budget; break;
          case RejectReason::MicroTune: ++st.rejected_micro; break;
          default: ++st.rejected_dphi; break;
        }
      }
    }
  };

  if (nw == 1) {
    worker(0, 0, total);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    const std::uint64_t chunk = (total + nw - 1) / nw;
    for (int w = 0; w < nw; ++w) {
      const std::uint64_t begin = chunk * w;
      const std::uint64_t end = std::min<std::uint64_t>(begin + chunk, total);
      pool.emplace_back(worker, w, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  SearchResult result;
  for (int w = 0; w < nw; ++w) {
    result.points.insert(result.points.end(), found[w].begin(), found[w].end());
    result.stats.cells_total += stats[w].cells_total;
    result.stats.accepted += stats[w].accepted;
    result.stats.rejected_band += stats[w].rejected_band;
    result.stats.rejected_budget += stats[w].rejected_budget;
    result.stats.rejected_micro += stats[w].rejected_micro;
    result.stats.rejected_dphi += stats[w].rejected_dphi;
  }
  std::sort(result.points.begin(), result.points.end(), canonical_less);
  result.density = density_map(result.points);
  result.stats.workers = workers;
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

}  // namespace eprsq
