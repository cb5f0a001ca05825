// bfdlab: command line front end to the B/FD solitary-wave laboratory.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bfd/bfd.hpp"

namespace fs = std::filesystem;
using namespace bfd;

namespace {

struct ModelOptions {
  double gamma = 0.8;
  double eps_db = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--gamma", gamma, "density ratio in (0,1)")->capture_default_str();
    app->add_option("--eps-db", eps_db, "d - b of the reduced parameter family")
        ->capture_default_str();
  }
  AbcdSystem system() const { return reduced_parameters(eps_db, gamma).system; }
};

struct GridOptions {
  double half_length = 256.0;
  std::size_t n = 4096;

  void attach(CLI::App* app) {
    app->add_option("--L", half_length, "half length of [-L, L)")->capture_default_str();
    app->add_option("--N", n, "number of collocation nodes (even)")->capture_default_str();
  }
  PeriodicGrid grid() const { return PeriodicGrid(half_length, n); }
};

struct EvolveOptions {
  double dt = 6.25e-3;
  double t_final = 100.0;
  int record = 160;
  double courant = 1.0;
  bool no_courant = false;
  double stage_tol = 1e-13;
  int stage_iters = 100;

  void attach(CLI::App* app, double default_tfinal) {
    t_final = default_tfinal;
    app->add_option("--dt", dt, "time step")->capture_default_str();
    app->add_option("--tfinal", t_final, "final time")->capture_default_str();
    app->add_option("--record", record, "record every this many steps")->capture_default_str();
    app->add_option("--courant", courant, "allowed dt / h ratio")->capture_default_str();
    app->add_flag("--no-courant", no_courant, "skip the Courant check");
    app->add_option("--stage-tol", stage_tol, "implicit stage tolerance")->capture_default_str();
    app->add_option("--stage-iters", stage_iters, "implicit stage iteration cap")
        ->capture_default_str();
  }
  EvolveConfig config() const {
    EvolveConfig c;
    c.dt = dt;
    c.t_final = t_final;
    c.record_every = record;
    c.courant_ratio = courant;
    c.enforce_courant = !no_courant;
    c.stage_tolerance = stage_tol;
    c.stage_max_iters = stage_iters;
    return c;
  }
};

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoul(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral laboratory for Boussinesq/Full-dispersion internal-wave systems"};
  app.require_subcommand(1);
  app.fallthrough();
  bool plotdata = false;
  app.add_flag("--plotdata", plotdata, "also write gnuplot-ready column files");

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Table row of a modelling parameter triple");
  ModelingParameters mp{1.0, -0.5, 2.0 / 9.0};
  classify_cmd->add_option("--alpha1", mp.alpha1)->required();
  classify_cmd->add_option("--alpha2", mp.alpha2)->required();
  classify_cmd->add_option("--beta", mp.beta)->required();

  // speed-limit
  auto* speed_cmd = app.add_subcommand("speed-limit", "speed-limit report as JSON");
  ModelOptions speed_model;
  speed_model.attach(speed_cmd);
  double kmax = kDefaultSpeedKmax;
  int samples = kDefaultSpeedSamples;
  double speed_cs = 0.0;
  speed_cmd->add_option("--kmax", kmax)->capture_default_str();
  speed_cmd->add_option("--samples", samples)->capture_default_str();
  speed_cmd->add_option("--cs", speed_cs, "speed at which alpha0, beta0 are evaluated")
      ->capture_default_str();

  // dispersion
  auto* disp_cmd = app.add_subcommand("dispersion", "linear dispersion samples as CSV");
  ModelOptions disp_model;
  disp_model.attach(disp_cmd);
  double disp_cs = 0.4, kmin = 0.0, disp_kmax = 10.0;
  int disp_n = 201;
  std::string disp_out;
  disp_cmd->add_option("--cs", disp_cs)->capture_default_str();
  disp_cmd->add_option("--kmin", kmin)->capture_default_str();
  disp_cmd->add_option("--kmax", disp_kmax)->capture_default_str();
  disp_cmd->add_option("--n", disp_n)->check(CLI::PositiveNumber)->capture_default_str();
  disp_cmd->add_option("--out", disp_out, "CSV path (stdout when omitted)");

  // solitary
  auto* sol_cmd = app.add_subcommand("solitary", "solitary-wave profile by Petviashvili iteration");
  ModelOptions sol_model;
  GridOptions sol_grid;
  sol_model.attach(sol_cmd);
  sol_grid.attach(sol_cmd);
  ProfileSolveConfig sol_cfg;
  bool no_mpe = false;
  std::string sol_out = "wave.csv";
  sol_cmd->add_option("--cs", sol_cfg.c_s)->required();
  sol_cmd->add_option("--tol", sol_cfg.tolerance)->capture_default_str();
  sol_cmd->add_option("--mpe", sol_cfg.mpe_width, "MPE cycle width")->capture_default_str();
  sol_cmd->add_flag("--no-mpe", no_mpe, "plain Petviashvili iteration");
  sol_cmd->add_option("--max-iter", sol_cfg.max_iterations)->capture_default_str();
  sol_cmd->add_option("--guess-amplitude", sol_cfg.guess_amplitude)->capture_default_str();
  sol_cmd->add_option("--guess-width", sol_cfg.guess_width)->capture_default_str();
  sol_cmd->add_option("--out", sol_out)->capture_default_str();

  // evolve
  auto* ev_cmd = app.add_subcommand("evolve", "time evolution from a profile CSV");
  ModelOptions ev_model;
  EvolveOptions ev_opts;
  std::string ev_init, ev_out = "run";
  int ev_snap = 1;
  ev_model.attach(ev_cmd);
  ev_opts.attach(ev_cmd, 10.0);
  ev_cmd->add_option("--init", ev_init, "(x, zeta, u) CSV")->required();
  ev_cmd->add_option("--out", ev_out, "output directory")->capture_default_str();
  ev_cmd->add_option("--snapshot-every", ev_snap, "write a snapshot every this many records")
      ->capture_default_str();

  // perturb
  auto* pert_cmd = app.add_subcommand("perturb", "evolution of a scaled solitary wave");
  ModelOptions pert_model;
  GridOptions pert_grid;
  EvolveOptions pert_opts;
  double pert_a = 1.2, pert_cs = 0.4;
  std::string pert_mode = "both", pert_out = "perturb";
  std::vector<double> pert_probes{400.0};
  int pert_snap = 0;
  pert_model.attach(pert_cmd);
  pert_grid.attach(pert_cmd);
  pert_opts.attach(pert_cmd, 400.0);
  pert_cmd->add_option("--A", pert_a, "perturbation factor")->capture_default_str();
  pert_cmd->add_option("--cs", pert_cs)->capture_default_str();
  pert_cmd->add_option("--mode", pert_mode)
      ->check(CLI::IsMember({"both", "zeta_only", "u_only"}))
      ->capture_default_str();
  pert_cmd->add_option("--probe", pert_probes, "report times")->capture_default_str();
  pert_cmd->add_option("--snapshot-every", pert_snap)->capture_default_str();
  pert_cmd->add_option("--out", pert_out)->capture_default_str();

  // collide
  auto* col_cmd = app.add_subcommand("collide", "head-on or overtaking collision of two waves");
  ModelOptions col_model;
  GridOptions col_grid;
  EvolveOptions col_opts;
  std::string col_mode = "head-on", col_out = "collide";
  double cs1 = 0.1, cs2 = 0.2, x1 = -20.0, x2 = 20.0;
  std::vector<double> col_probes;
  int col_snap = 0;
  col_model.attach(col_cmd);
  col_grid.attach(col_cmd);
  col_opts.attach(col_cmd, 400.0);
  col_cmd->add_option("--mode", col_mode)
      ->check(CLI::IsMember({"head-on", "overtake"}))
      ->capture_default_str();
  col_cmd->add_option("--cs1", cs1)->capture_default_str();
  col_cmd->add_option("--cs2", cs2)->capture_default_str();
  col_cmd->add_option("--x1", x1)->capture_default_str();
  col_cmd->add_option("--x2", x2)->capture_default_str();
  col_cmd->add_option("--probe", col_probes, "report times (default 0 and tfinal)");
  col_cmd->add_option("--snapshot-every", col_snap)->capture_default_str();
  col_cmd->add_option("--out", col_out)->capture_default_str();

  // resolve
  auto* res_cmd = app.add_subcommand("resolve", "evolution of Gaussian data A exp(-tau x^2)");
  ModelOptions res_model;
  GridOptions res_grid;
  EvolveOptions res_opts;
  double res_a = 0.8, res_tau = 0.01;
  std::string res_out = "resolve";
  int res_snap = 0;
  res_model.attach(res_cmd);
  res_grid.attach(res_cmd);
  res_opts.attach(res_cmd, 400.0);
  res_cmd->add_option("--A", res_a)->capture_default_str();
  res_cmd->add_option("--tau", res_tau)->capture_default_str();
  res_cmd->add_option("--snapshot-every", res_snap)->capture_default_str();
  res_cmd->add_option("--out", res_out)->capture_default_str();

  // converge
  auto* conv_cmd = app.add_subcommand("converge", "spectral convergence table");
  ModelOptions conv_model;
  ConvergenceConfig conv_cfg;
  std::string nlist = "64,128,256", conv_out;
  conv_model.attach(conv_cmd);
  conv_cmd->add_option("--Nlist", nlist)->capture_default_str();
  conv_cmd->add_option("--Nref", conv_cfg.reference_n)->capture_default_str();
  conv_cmd->add_option("--L", conv_cfg.half_length)->capture_default_str();
  conv_cmd->add_option("--A", conv_cfg.amplitude)->capture_default_str();
  conv_cmd->add_option("--tau", conv_cfg.tau)->capture_default_str();
  conv_cmd->add_option("--T", conv_cfg.t_final)->capture_default_str();
  conv_cmd->add_option("--dt", conv_cfg.dt, "initial time step (halved until stable)")
      ->capture_default_str();
  conv_cmd->add_option("--out", conv_out, "CSV path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*classify_cmd) {
      print_json(to_json(classify(derive_abcd(mp))));
    } else if (*speed_cmd) {
      const auto sys = speed_model.system();
      auto rep = c_gamma(sys, kmax, samples);
      fill_angulo_saut(rep, sys, speed_cs);
      Json j = to_json(rep);
      j["system"] = to_json(sys);
      print_json(j);
    } else if (*disp_cmd) {
      const auto sys = disp_model.system();
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!disp_out.empty()) {
        file = open_output(disp_out);
        out = &file;
      }
      *out << std::setprecision(17) << "k,phi,omega+,omega-,v+,v-,group+,group-\n";
      std::vector<std::vector<double>> cols(8);
      for (int i = 0; i < disp_n; ++i) {
        const double k = disp_n == 1 ? kmin : kmin + (disp_kmax - kmin) * i / (disp_n - 1);
        const auto d = dispersion(sys, disp_cs, k);
        const double row[8] = {d.k, d.phi, d.omega_plus, d.omega_minus,
                               d.v_plus, d.v_minus, d.group_plus, d.group_minus};
        for (int c = 0; c < 8; ++c) {
          *out << (c ? "," : "") << row[c];
          cols[c].push_back(row[c]);
        }
        *out << '\n';
      }
      if (plotdata) {
        const fs::path base = disp_out.empty() ? fs::path("dispersion.dat")
                                               : fs::path(disp_out).replace_extension(".dat");
        write_plot_columns(base, {"k", "phi", "omega+", "omega-", "v+", "v-", "group+", "group-"},
                           cols);
      }
    } else if (*sol_cmd) {
      const auto sys = sol_model.system();
      const auto grid = sol_grid.grid();
      const Discretization disc(grid, sys);
      sol_cfg.accelerate = !no_mpe;
      const auto wave = solve_profile(sol_cfg, disc);
      write_wave_csv(sol_out, grid, sys, wave.state());
      const auto meta = solitary_metadata(wave, grid, sys);
      write_json(fs::path(sol_out).replace_extension(".json"), meta);
      if (plotdata)
        write_plot_columns(fs::path(sol_out).replace_extension(".dat"), {"x", "zeta", "u"},
                           {grid.nodes(), wave.zeta, wave.u});
      Json brief = meta;
      brief.erase("residual_history");
      print_json(brief);
    } else if (*ev_cmd) {
      const auto sys = ev_model.system();
      const auto loaded = read_wave_csv(ev_init);
      if (loaded.hash && *loaded.hash != parameter_hash(sys))
        std::cerr << "warning: " << ev_init << " was computed with different parameters\n";
      const Discretization disc(loaded.grid, sys);
      const auto cfg = ev_opts.config();
      const fs::path dir(ev_out);
      fs::create_directories(dir / "snapshots");
      write_json(dir / "meta.json", {{"init", ev_init},
                                     {"grid", to_json(loaded.grid)},
                                     {"system", to_json(sys)},
                                     {"hash", parameter_hash(sys)},
                                     {"evolve", to_json(cfg)},
                                     {"snapshot_every", ev_snap}});
      auto& fft = disc.transform();
      long index = 0;
      const auto res = evolve(loaded.state, disc, cfg, [&](long step, double, const SpectralPair& y) {
        if (ev_snap > 0 && index % ev_snap == 0) {
          std::ostringstream name;
          name << "snap_" << std::setw(8) << std::setfill('0') << step << ".csv";
          write_wave_csv(dir / "snapshots" / name.str(), loaded.grid, sys,
                         WaveState(fft.inverse_half(y.zeta), fft.inverse_half(y.u)));
        }
        ++index;
      });
      write_invariants_csv(dir / "invariants.csv", res.invariants);
      write_spectrum_csv(dir / "final_zeta_spectrum.csv", loaded.grid, sys, res.final_spectrum.zeta);
      write_spectrum_csv(dir / "final_u_spectrum.csv", loaded.grid, sys, res.final_spectrum.u);
      if (plotdata)
        write_plot_columns(dir / "invariants.dat", {"t", "E_h", "I_h"},
                           {res.invariants.times, res.invariants.energy, res.invariants.momentum});
      if (!res.ok()) {
        auto marker = open_output(dir / "FAILED");
        marker << *res.failure << '\n';
        std::cerr << "evolution aborted: " << *res.failure << '\n';
        return 2;
      }
      print_json({{"t_final", res.t_final}, {"steps", res.steps_taken}, {"out", dir.string()}});
    } else if (*pert_cmd || *col_cmd || *res_cmd) {
      ExperimentSpec spec;
      std::string out;
      if (*pert_cmd) {
        spec.kind = ExperimentKind::perturb;
        spec.system = pert_model.system();
        spec.grid = pert_grid.grid();
        spec.evolve = pert_opts.config();
        spec.waves = {BaseWave{pert_cs, std::nullopt, pert_cs < 0 ? -1 : 1}};
        spec.waves[0].c_s = std::abs(pert_cs);
        spec.perturbation = pert_a;
        spec.perturb_mode = pert_mode == "zeta_only" ? PerturbMode::zeta_only
                            : pert_mode == "u_only"  ? PerturbMode::u_only
                                                     : PerturbMode::both;
        spec.probe_times = pert_probes;
        spec.snapshot_every = pert_snap;
        out = pert_out;
      } else if (*col_cmd) {
        spec.kind = ExperimentKind::collide;
        spec.system = col_model.system();
        spec.grid = col_grid.grid();
        spec.evolve = col_opts.config();
        const int dir2 = col_mode == "head-on" ? -1 : 1;
        spec.waves = {BaseWave{cs1, x1, 1}, BaseWave{cs2, x2, dir2}};
        spec.probe_times = col_probes.empty() ? std::vector<double>{0.0, spec.evolve.t_final}
                                              : col_probes;
        spec.snapshot_every = col_snap;
        out = col_out;
      } else {
        spec.kind = ExperimentKind::gaussian;
        spec.system = res_model.system();
        spec.grid = res_grid.grid();
        spec.evolve = res_opts.config();
        spec.waves.clear();
        spec.gaussian_amplitude = res_a;
        spec.gaussian_tau = res_tau;
        spec.snapshot_every = res_snap;
        out = res_out;
      }
      const auto bundle = run_experiment(spec, fs::path(out), plotdata);
      print_json(bundle.summary);
      if (!bundle.ok()) return 2;
    } else if (*conv_cmd) {
      conv_cfg.system = conv_model.system();
      conv_cfg.n_list = parse_size_list(nlist);
      const auto table = convergence_study(conv_cfg);
      std::ofstream file;
      std::ostream* out = &std::cout;
      if (!conv_out.empty()) {
        file = open_output(conv_out);
        out = &file;
      }
      *out << std::setprecision(17) << "# L=" << table.half_length << " Nref=" << table.reference_n
           << " dt=" << table.dt << " stabilized=" << (table.stabilized ? 1 : 0) << '\n'
           << "N,err_zeta,err_u,observed_rate\n";
      std::vector<std::vector<double>> cols(4);
      for (const auto& r : table.rows) {
        *out << r.n << ',' << r.err_zeta << ',' << r.err_u << ',';
        if (r.observed_rate) *out << *r.observed_rate;
        *out << '\n';
        cols[0].push_back(static_cast<double>(r.n));
        cols[1].push_back(r.err_zeta);
        cols[2].push_back(r.err_u);
        cols[3].push_back(r.observed_rate.value_or(std::nan("")));
      }
      if (plotdata) {
        const fs::path base = conv_out.empty() ? fs::path("convergence.dat")
                                               : fs::path(conv_out).replace_extension(".dat");
        write_plot_columns(base, {"N", "err_zeta", "err_u", "rate"}, cols);
      }
    }
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (last residual "
              << (e.residual_history().empty() ? 0.0 : e.residual_history().back()) << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
