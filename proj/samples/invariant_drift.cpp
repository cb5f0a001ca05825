// Propagates one solitary wave and prints the drift of the discrete energy and
// momentum together with the tracked peak.

#include <cmath>
#include <cstdio>

#include "bfd/bfd.hpp"

int main(int argc, char** argv) {
  using namespace bfd;
  const double t_final = argc > 1 ? std::atof(argv[1]) : 20.0;

  ExperimentSpec spec;
  spec.grid = PeriodicGrid(256.0, 4096);
  spec.evolve.dt = 6.25e-3;
  spec.evolve.t_final = t_final;
  spec.evolve.record_every = 160 * 5;
  spec.waves = {BaseWave{0.4}};
  const auto run = run_experiment(spec);
  if (!run.ok()) {
    std::fprintf(stderr, "%s\n", run.evolution.failure->c_str());
    return 1;
  }

  const auto& inv = run.evolution.invariants;
  const auto& track = run.tracks.front();
  std::printf("%8s %14s %14s %12s %12s\n", "t", "position", "amplitude", "dE_h", "dI_h");
  for (std::size_t i = 0; i < inv.size() && i < track.size(); ++i)
    std::printf("%8.2f %14.8f %14.10f %12.3e %12.3e\n", inv.times[i], track[i].position,
                track[i].amplitude, inv.energy[i] - inv.energy[0],
                inv.momentum[i] - inv.momentum[0]);
}
