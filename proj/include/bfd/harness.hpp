#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bfd/error.hpp"
#include "bfd/integrator.hpp"
#include "bfd/io.hpp"
#include "bfd/model_params.hpp"
#include "bfd/solitary.hpp"
#include "bfd/spectral.hpp"

namespace bfd {

enum class ExperimentKind { propagate, perturb, collide, gaussian };
enum class PerturbMode { both, zeta_only, u_only };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::propagate: return "propagate";
    case ExperimentKind::perturb: return "perturb";
    case ExperimentKind::collide: return "collide";
    default: return "gaussian";
  }
}

inline const char* to_string(PerturbMode m) {
  switch (m) {
    case PerturbMode::zeta_only: return "zeta_only";
    case PerturbMode::u_only: return "u_only";
    default: return "both";
  }
}

/// A solitary wave of speed c_s moving in `direction` (+1 right, -1 left).
/// Without a centre the profile stays on the grid's reflection centre.
struct BaseWave {
  double c_s = 0.4;
  std::optional<double> center;
  int direction = 1;

  double velocity() const noexcept { return direction * c_s; }
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::propagate;
  AbcdSystem system = reduced_parameters(0.0).system;
  PeriodicGrid grid{256.0, 4096};
  EvolveConfig evolve;
  ProfileSolveConfig solver;
  std::vector<BaseWave> waves{BaseWave{}};
  double perturbation = 1.0;
  PerturbMode perturb_mode = PerturbMode::both;
  double gaussian_amplitude = 0.8;
  double gaussian_tau = 0.01;
  double gaussian_center = 0.0;
  bool dealias = false;
  /// Times at which tracked amplitudes and speeds are reported in the summary.
  std::vector<double> probe_times;
  /// Snapshot files are written every this many records (0 disables them).
  int snapshot_every = 0;

  void validate() const {
    if (kind == ExperimentKind::collide && waves.size() != 2)
      throw ParameterDomainError("a collision needs exactly two waves");
    if (kind == ExperimentKind::gaussian && !(gaussian_amplitude > 0.0 && gaussian_tau > 0.0))
      throw ParameterDomainError("Gaussian data needs A > 0 and tau > 0");
    if (kind != ExperimentKind::gaussian && waves.empty())
      throw ParameterDomainError("at least one base wave is required");
    for (const auto& w : waves)
      if (w.direction != 1 && w.direction != -1)
        throw ParameterDomainError("wave direction must be +1 or -1");
  }
};

struct InitialData {
  WaveState state;
  std::vector<SolitaryWave> profiles;
  std::vector<std::string> warnings;
};

/// Solitary profiles (left movers solved with speed -c_s), translated and superposed,
/// then scaled by the perturbation factor; or a Gaussian A exp(-tau x^2).
inline InitialData build_initial(const ExperimentSpec& spec, const Discretization& disc) {
  spec.validate();
  const auto& grid = disc.grid();
  auto& fft = disc.transform();
  InitialData out;
  if (spec.kind == ExperimentKind::gaussian) {
    out.state = WaveState(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double y = grid.node(j) - spec.gaussian_center;
      out.state.zeta[j] = out.state.u[j] = spec.gaussian_amplitude * std::exp(-spec.gaussian_tau * y * y);
    }
    return out;
  }

  std::vector<WaveState> parts;
  for (const auto& w : spec.waves) {
    ProfileSolveConfig cfg = spec.solver;
    cfg.c_s = w.velocity();
    auto wave = solve_profile(cfg, disc);
    WaveState s = wave.state();
    if (w.center) {
      const double shift = *w.center - wave.peak_position;
      if (shift != 0.0) {
        s.zeta = spectral_shift(s.zeta, shift, grid, fft);
        s.u = spectral_shift(s.u, shift, grid, fft);
      }
      wave.peak_position = *w.center;
    }
    parts.push_back(std::move(s));
    out.profiles.push_back(std::move(wave));
  }

  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t k = i + 1; k < parts.size(); ++k) {
      double overlap = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j)
        overlap += std::abs(parts[i].zeta[j] * parts[k].zeta[j]);
      overlap *= grid.spacing();
      if (overlap > 1e-10)
        out.warnings.push_back("waves " + std::to_string(i) + " and " + std::to_string(k) +
                               " overlap (mutual mass " + format_double(overlap) + ")");
    }

  out.state = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) {
      out.state.zeta[j] += parts[i].zeta[j];
      out.state.u[j] += parts[i].u[j];
    }

  const double a = spec.perturbation;
  if (a != 1.0) {
    if (spec.perturb_mode != PerturbMode::u_only)
      for (auto& v : out.state.zeta) v *= a;
    if (spec.perturb_mode != PerturbMode::zeta_only)
      for (auto& v : out.state.u) v *= a;
  }
  return out;
}

struct WaveTrackRecord {
  double t = 0.0;
  double amplitude = 0.0;
  double position = 0.0;
  std::optional<double> speed_estimate;
  /// Another track's predicted position was inside the search window.
  bool contested = false;
};

struct PeakSearch {
  /// Only nodes with |wrap(x - center)| <= radius are searched when set.
  std::optional<double> center;
  double radius = 0.0;
  /// Nodes within these half-widths of claimed peaks are skipped.
  std::vector<double> excluded;
  double exclusion_radius = 0.0;
  /// Newton refinement on the interpolant after the three-point fit.
  bool spectral_refine = true;
};

/// Peak of zeta: the discrete maximum, a three-point quadratic fit, and (by default)
/// Newton refinement on the trigonometric interpolant. The position is unwrapped
/// against the previous record. Returns nothing for a flat field.
inline std::optional<WaveTrackRecord> track_peak(std::span<const double> zeta,
                                                 std::span<const Complex> half,
                                                 const PeriodicGrid& grid, double t,
                                                 const WaveTrackRecord* previous,
                                                 const PeakSearch& search = {}) {
  const std::size_t n = grid.size();
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = grid.node(j);
    if (search.center && std::abs(grid.wrap(x - *search.center)) > search.radius) continue;
    bool masked = false;
    for (double c : search.excluded)
      if (std::abs(grid.wrap(x - c)) < search.exclusion_radius) masked = true;
    if (masked) continue;
    if (!best || zeta[j] > zeta[*best]) best = j;
  }
  if (!best || !(std::abs(zeta[*best]) > 1e-14)) return std::nullopt;

  const std::size_t j = *best;
  const auto q = quadratic_peak(zeta[(j + n - 1) % n], zeta[j], zeta[(j + 1) % n], grid.spacing());
  double x = grid.node(j) + q.offset;
  double amp = q.value;
  if (search.spectral_refine && !half.empty()) {
    const double refined = refine_extremum(half, x, grid);
    if (std::abs(grid.wrap(refined - x)) <= grid.spacing()) {
      x = refined;
      amp = eval_interpolant(half, x, grid).value;
    }
  }
  x = grid.wrap(x);

  WaveTrackRecord rec;
  rec.t = t;
  rec.amplitude = amp;
  rec.position = previous ? previous->position + grid.wrap(x - previous->position) : x;
  return rec;
}

/// Least-squares slope of position against time over the last `window`
/// uncontested records.
inline std::optional<double> fit_speed(const std::vector<WaveTrackRecord>& recs,
                                       std::size_t window = 10) {
  std::vector<const WaveTrackRecord*> use;
  for (auto it = recs.rbegin(); it != recs.rend() && use.size() < window; ++it)
    if (!it->contested) use.push_back(&*it);
  if (use.size() < 2) return std::nullopt;
  const double m = static_cast<double>(use.size());
  double st = 0, sx = 0;
  for (const auto* r : use) {
    st += r->t;
    sx += r->position;
  }
  st /= m;
  sx /= m;
  double num = 0, den = 0;
  for (const auto* r : use) {
    num += (r->t - st) * (r->position - sx);
    den += (r->t - st) * (r->t - st);
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

/// Several peaks followed at once. Each track searches a window around a
/// predicted position. While another track's prediction lies inside that window
/// the records are flagged contested, the prediction runs ballistically from the
/// last uncontested record at the nominal velocity, and taller tracks claim
/// their peak first.
class PeakTracker {
 public:
  PeakTracker(const PeriodicGrid& grid, std::vector<double> start, std::vector<double> velocity,
              double window_width)
      : grid_(grid), velocity_(std::move(velocity)), window_(window_width) {
    if (start.size() != velocity_.size()) throw ContractError("one velocity per track");
    tracks_.resize(start.size());
    anchor_.assign(start.size(), std::nullopt);
    start_ = std::move(start);
  }

  std::size_t size() const noexcept { return tracks_.size(); }
  const std::vector<WaveTrackRecord>& track(std::size_t i) const { return tracks_[i]; }
  double window_width() const noexcept { return window_; }

  void observe(double t, std::span<const double> zeta, std::span<const Complex> half) {
    const std::size_t m = tracks_.size();
    std::vector<double> predicted(m);
    for (std::size_t i = 0; i < m; ++i) {
      const WaveTrackRecord* base = anchor_[i] ? &tracks_[i][*anchor_[i]] : nullptr;
      predicted[i] = base ? base->position + velocity_[i] * (t - base->t)
                          : start_[i] + velocity_[i] * t;
    }
    std::vector<bool> contested(m, false);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k)
        if (k != i && std::abs(grid_.wrap(predicted[k] - predicted[i])) <= 0.5 * window_)
          contested[i] = true;

    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return last_amplitude(x) > last_amplitude(y);
    });

    std::vector<double> claimed;
    for (std::size_t i : order) {
      auto& tr = tracks_[i];
      PeakSearch search;
      search.center = grid_.wrap(predicted[i]);
      search.radius = 0.5 * window_;
      search.excluded = claimed;
      search.exclusion_radius = 0.25 * window_;
      auto rec = track_peak(zeta, half, grid_, t, nullptr, search);
      if (!rec) continue;
      rec->position = predicted[i] + grid_.wrap(rec->position - predicted[i]);
      rec->contested = contested[i];
      tr.push_back(*rec);
      if (!contested[i]) anchor_[i] = tr.size() - 1;
      tr.back().speed_estimate = fit_speed(tr);
      claimed.push_back(grid_.wrap(rec->position));
    }
  }

 private:
  double last_amplitude(std::size_t i) const {
    return tracks_[i].empty() ? 0.0 : tracks_[i].back().amplitude;
  }

  PeriodicGrid grid_;
  std::vector<double> start_;
  std::vector<double> velocity_;
  double window_;
  std::vector<std::vector<WaveTrackRecord>> tracks_;
  std::vector<std::optional<std::size_t>> anchor_;
};

struct ProbeReading {
  double t = 0.0;
  std::size_t wave = 0;
  double amplitude = 0.0;
  std::optional<double> speed;
};

struct OutputBundle {
  ExperimentSpec spec;
  InitialData initial;
  EvolveResult evolution;
  std::vector<std::vector<WaveTrackRecord>> tracks;
  std::vector<ProbeReading> probes;
  Json summary;

  bool ok() const noexcept { return evolution.ok(); }
};

namespace detail {

inline const WaveTrackRecord* record_at(const std::vector<WaveTrackRecord>& tr, double t) {
  const WaveTrackRecord* best = nullptr;
  for (const auto& r : tr)
    if (!best || std::abs(r.t - t) < std::abs(best->t - t)) best = &r;
  return best;
}

inline Json record_json(const WaveTrackRecord* r) {
  if (!r) return nullptr;
  return {{"t", r->t},
          {"amplitude", r->amplitude},
          {"position", r->position},
          {"speed", optional_json(r->speed_estimate)},
          {"contested", r->contested}};
}

}  // namespace detail

/// Builds the initial data, evolves it, tracks the waves and (with an output
/// directory) writes meta.json, invariants.csv, tracks/, snapshots/ and summary.json.
inline OutputBundle run_experiment(const ExperimentSpec& spec,
                                   const std::optional<std::filesystem::path>& out_dir = {},
                                   bool plotdata = false) {
  spec.validate();
  const Discretization disc(spec.grid, spec.system, spec.dealias);
  OutputBundle bundle;
  bundle.spec = spec;
  bundle.initial = build_initial(spec, disc);
  const auto& grid = disc.grid();

  std::vector<double> start, velocity;
  if (spec.kind == ExperimentKind::gaussian) {
    start.push_back(spec.gaussian_center);
    velocity.push_back(0.0);
  } else {
    for (std::size_t i = 0; i < spec.waves.size(); ++i) {
      start.push_back(bundle.initial.profiles[i].peak_position);
      velocity.push_back(spec.waves[i].velocity());
    }
  }
  PeakTracker tracker(grid, start, velocity, 8.0 / spec.solver.guess_width);

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    Json meta = {{"kind", to_string(spec.kind)},
                 {"grid", to_json(grid)},
                 {"system", to_json(spec.system)},
                 {"hash", parameter_hash(spec.system)},
                 {"evolve", to_json(spec.evolve)},
                 {"perturbation", spec.perturbation},
                 {"perturb_mode", to_string(spec.perturb_mode)},
                 {"dealias", spec.dealias},
                 {"track_window", tracker.window_width()},
                 {"warnings", bundle.initial.warnings}};
    Json waves = Json::array();
    for (const auto& w : spec.waves)
      waves.push_back({{"c_s", w.c_s}, {"center", optional_json(w.center)}, {"direction", w.direction}});
    if (spec.kind == ExperimentKind::gaussian)
      meta["gaussian"] = {{"A", spec.gaussian_amplitude},
                          {"tau", spec.gaussian_tau},
                          {"center", spec.gaussian_center}};
    else
      meta["waves"] = waves;
    write_json(*out_dir / "meta.json", meta);
  }

  auto& fft = disc.transform();
  long record_index = 0;
  std::vector<double> nodal(grid.size());
  auto observer = [&](long step, double t, const SpectralPair& y) {
    fft.inverse(y.zeta, nodal);
    tracker.observe(t, nodal, y.zeta);
    if (out_dir && spec.snapshot_every > 0 && record_index % spec.snapshot_every == 0) {
      WaveState s(nodal, fft.inverse_half(y.u));
      std::ostringstream name;
      name << "snap_" << std::setw(8) << std::setfill('0') << step << ".csv";
      write_wave_csv(*out_dir / "snapshots" / name.str(), grid, spec.system, s);
    }
    ++record_index;
  };
  bundle.evolution = evolve(bundle.initial.state, disc, spec.evolve, observer);

  for (std::size_t i = 0; i < tracker.size(); ++i) bundle.tracks.push_back(tracker.track(i));

  Json summary;
  summary["kind"] = to_string(spec.kind);
  summary["ok"] = bundle.ok();
  if (bundle.evolution.failure) summary["failure"] = *bundle.evolution.failure;
  summary["t_final"] = bundle.evolution.t_final;
  const auto& inv = bundle.evolution.invariants;
  if (inv.size() > 0) {
    double de = 0, di = 0;
    for (std::size_t i = 0; i < inv.size(); ++i) {
      de = std::max(de, std::abs(inv.energy[i] - inv.energy[0]));
      di = std::max(di, std::abs(inv.momentum[i] - inv.momentum[0]));
    }
    summary["energy_initial"] = inv.energy.front();
    summary["momentum_initial"] = inv.momentum.front();
    summary["max_energy_deviation"] = de;
    summary["max_momentum_deviation"] = di;
  }
  Json waves = Json::array();
  for (std::size_t i = 0; i < bundle.tracks.size(); ++i) {
    const auto& tr = bundle.tracks[i];
    Json w = {{"initial", detail::record_json(tr.empty() ? nullptr : &tr.front())},
              {"final", detail::record_json(tr.empty() ? nullptr : &tr.back())}};
    if (spec.kind != ExperimentKind::gaussian) {
      w["c_s"] = spec.waves[i].c_s;
      w["direction"] = spec.waves[i].direction;
      w["profile_amplitude"] = bundle.initial.profiles[i].amplitude_zeta;
    }
    Json probes = Json::array();
    for (double t : spec.probe_times) {
      const auto* r = detail::record_at(tr, t);
      probes.push_back(detail::record_json(r));
      if (r) bundle.probes.push_back({t, i, r->amplitude, r->speed_estimate});
    }
    w["probes"] = probes;
    waves.push_back(w);
  }
  summary["waves"] = waves;
  bundle.summary = summary;

  if (out_dir) {
    write_invariants_csv(*out_dir / "invariants.csv", inv);
    for (std::size_t i = 0; i < bundle.tracks.size(); ++i) {
      auto out = open_output(*out_dir / "tracks" / ("track_" + std::to_string(i) + ".csv"));
      out << "t,amplitude,position,speed,contested\n";
      for (const auto& r : bundle.tracks[i]) {
        out << r.t << ',' << r.amplitude << ',' << r.position << ',';
        if (r.speed_estimate) out << *r.speed_estimate;
        out << ',' << (r.contested ? 1 : 0) << '\n';
      }
      if (plotdata) {
        std::vector<double> t, a, p, v;
        for (const auto& r : bundle.tracks[i]) {
          t.push_back(r.t);
          a.push_back(r.amplitude);
          p.push_back(r.position);
          v.push_back(r.speed_estimate.value_or(std::nan("")));
        }
        write_plot_columns(*out_dir / "plot" / ("track_" + std::to_string(i) + ".dat"),
                           {"t", "amplitude", "position", "speed"}, {t, a, p, v});
      }
    }
    const auto fin = disc.inverse(bundle.evolution.final_spectrum);
    write_wave_csv(*out_dir / "final.csv", grid, spec.system, fin);
    write_spectrum_csv(*out_dir / "final_zeta_spectrum.csv", grid, spec.system,
                       bundle.evolution.final_spectrum.zeta);
    write_spectrum_csv(*out_dir / "final_u_spectrum.csv", grid, spec.system,
                       bundle.evolution.final_spectrum.u);
    if (plotdata) {
      write_plot_columns(*out_dir / "plot" / "invariants.dat", {"t", "E_h", "I_h"},
                         {inv.times, inv.energy, inv.momentum});
      write_plot_columns(*out_dir / "plot" / "final.dat", {"x", "zeta", "u"},
                         {grid.nodes(), fin.zeta, fin.u});
    }
    if (!bundle.ok()) {
      auto marker = open_output(*out_dir / "FAILED");
      marker << *bundle.evolution.failure << '\n';
    }
    write_json(*out_dir / "summary.json", summary);
  }
  return bundle;
}

struct ConvergenceConfig {
  AbcdSystem system = reduced_parameters(0.0).system;
  double half_length = 120.0;
  std::vector<std::size_t> n_list{64, 128, 256};
  std::size_t reference_n = 1024;
  double amplitude = 0.1;
  double tau = 0.1;
  double t_final = 1.0;
  double dt = 0.05;
  /// Halve dt until every entry above the floor moves by less than this fraction.
  double stability = 0.01;
  double floor = 1e-11;
  int max_halvings = 6;
  double stage_tolerance = 1e-13;
};

struct ConvergenceRow {
  std::size_t n = 0;
  double err_zeta = 0.0;
  double err_u = 0.0;
  std::optional<double> observed_rate;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double dt = 0.0;
  int halvings = 0;
  std::size_t reference_n = 0;
  double half_length = 0.0;
  bool stabilized = false;
};

namespace detail {

inline SpectralPair gaussian_run(const ConvergenceConfig& cfg, std::size_t n, double dt) {
  const Discretization disc(PeriodicGrid(cfg.half_length, n), cfg.system);
  WaveState s(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = disc.grid().node(j);
    s.zeta[j] = s.u[j] = cfg.amplitude * std::exp(-cfg.tau * x * x);
  }
  EvolveConfig ec;
  ec.dt = dt;
  ec.t_final = cfg.t_final;
  ec.stage_tolerance = cfg.stage_tolerance;
  ec.record_every = std::numeric_limits<int>::max();
  auto res = evolve(s, disc, ec);
  if (!res.ok()) throw StepFailure("convergence run failed: " + *res.failure, 0, 0.0);
  return res.final_spectrum;
}

// L2 distance on [-L, L] between a coarse and a fine half spectrum, counting the
// fine modes the coarse grid cannot represent.
inline double spectral_l2_distance(std::span<const Complex> coarse, std::span<const Complex> fine,
                                   double half_length) {
  const std::size_t nc = coarse.size() - 1;  // coarse Nyquist index
  double acc = 0.0;
  for (std::size_t k = 0; k < fine.size(); ++k) {
    const double w = mode_weight(k, fine.size());
    Complex d = fine[k];
    if (k < nc) d -= coarse[k];
    else if (k == nc) d -= (coarse.size() == fine.size() ? 1.0 : 0.5) * coarse[k];
    acc += w * std::norm(d);
  }
  return std::sqrt(2.0 * half_length * acc);
}

}  // namespace detail

/// Errors of coarse Gaussian runs against a fine self-reference at t_final.
inline ConvergenceTable convergence_study(const ConvergenceConfig& cfg) {
  std::size_t n_max = 0;
  // an entry equal to the reference size is a self-comparison and is exempt
  for (auto n : cfg.n_list)
    if (n != cfg.reference_n) n_max = std::max(n_max, n);
  if (cfg.reference_n < 4 * n_max) throw PreconditionError("reference N must be at least 4 max(N)");

  auto table_at = [&](double dt) {
    const auto ref = detail::gaussian_run(cfg, cfg.reference_n, dt);
    std::vector<ConvergenceRow> rows;
    for (auto n : cfg.n_list) {
      ConvergenceRow row;
      row.n = n;
      if (n == cfg.reference_n) {
        rows.push_back(row);
        continue;
      }
      const auto c = detail::gaussian_run(cfg, n, dt);
      row.err_zeta = detail::spectral_l2_distance(c.zeta, ref.zeta, cfg.half_length);
      row.err_u = detail::spectral_l2_distance(c.u, ref.u, cfg.half_length);
      if (!rows.empty()) {
        const auto& p = rows.back();
        const double e0 = p.err_zeta + p.err_u;
        const double e1 = row.err_zeta + row.err_u;
        if (e0 > 0.0 && e1 > 0.0)
          row.observed_rate = std::log(e0 / e1) / std::log(static_cast<double>(n) / p.n);
      }
      rows.push_back(row);
    }
    return rows;
  };

  ConvergenceTable out;
  out.reference_n = cfg.reference_n;
  out.half_length = cfg.half_length;
  double dt = cfg.dt;
  auto rows = table_at(dt);
  for (int h = 1; h <= cfg.max_halvings; ++h) {
    const auto next = table_at(0.5 * dt);
    bool steady = true;
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (auto [a, b] : {std::pair{rows[i].err_zeta, next[i].err_zeta},
                          std::pair{rows[i].err_u, next[i].err_u}})
        if (std::max(a, b) > cfg.floor && std::abs(a - b) > cfg.stability * std::max(a, b))
          steady = false;
    dt *= 0.5;
    rows = next;
    out.halvings = h;
    if (steady) {
      out.stabilized = true;
      break;
    }
  }
  out.rows = rows;
  out.dt = dt;
  return out;
}

}  // namespace bfd
