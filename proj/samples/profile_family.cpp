// Solitary profiles of the reduced Hamiltonian system for a range of speeds up to
// the speed limit, printing amplitudes and iteration counts.

#include <cstdio>

#include "bfd/bfd.hpp"

int main() {
  using namespace bfd;
  const auto sys = reduced_parameters(0.0).system;
  const auto limit = c_gamma(sys);
  std::printf("c_gamma = %.8f, omega_m = %.8f\n", limit.c_gamma, limit.omega_m);

  const Discretization disc(PeriodicGrid(256.0, 4096), sys);
  std::printf("%8s %6s %14s %14s %12s\n", "c_s", "iters", "max zeta", "max u", "residual");
  for (double cs : {0.05, 0.1, 0.2, 0.3, 0.4, 0.42}) {
    ProfileSolveConfig cfg;
    cfg.c_s = cs;
    const auto w = solve_profile(cfg, disc);
    std::printf("%8.3f %6d %14.8f %14.8f %12.3e\n", cs, w.iterations, w.amplitude_zeta,
                w.amplitude_u, collocation_residual(w.state(), disc, cs));
  }
}
