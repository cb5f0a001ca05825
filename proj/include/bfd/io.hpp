#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bfd/error.hpp"
#include "bfd/integrator.hpp"
#include "bfd/model_params.hpp"
#include "bfd/solitary.hpp"
#include "bfd/spectral.hpp"
#include "bfd/wave_theory.hpp"

namespace bfd {

using Json = nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

/// Full round-trip precision for text output.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// FNV-1a over the 17-digit text of every model parameter.
inline std::string parameter_hash(const AbcdSystem& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (double v : {s.a, s.b, s.c, s.d, s.gamma, s.epsilon, s.mu, s.mu2}) {
    for (char ch : format_double(v) + ";") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

inline void write_header(std::ostream& out, const PeriodicGrid& grid, const AbcdSystem& sys) {
  out << "# L=" << format_double(grid.half_length()) << " N=" << grid.size()
      << " hash=" << parameter_hash(sys) << '\n';
}

/// CSV with an x column followed by the named nodal fields.
inline void write_nodal_csv(const std::filesystem::path& path, const PeriodicGrid& grid,
                            const AbcdSystem& sys, const std::vector<std::string>& names,
                            const std::vector<const std::vector<double>*>& fields) {
  auto out = open_output(path);
  write_header(out, grid, sys);
  out << 'x';
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out << grid.node(j);
    for (const auto* f : fields) out << ',' << (*f)[j];
    out << '\n';
  }
}

inline void write_wave_csv(const std::filesystem::path& path, const PeriodicGrid& grid,
                           const AbcdSystem& sys, const WaveState& s) {
  write_nodal_csv(path, grid, sys, {"zeta", "u"}, {&s.zeta, &s.u});
}

/// Three-column (k, re, im) spectrum over signed modes -N/2 .. N/2-1.
inline void write_spectrum_csv(const std::filesystem::path& path, const PeriodicGrid& grid,
                               const AbcdSystem& sys, std::span<const Complex> half) {
  auto out = open_output(path);
  write_header(out, grid, sys);
  out << "k,re,im\n";
  const long n = static_cast<long>(grid.size());
  for (long k = -n / 2; k < n / 2; ++k) {
    const std::size_t ak = static_cast<std::size_t>(k < 0 ? -k : k);
    const Complex c = k < 0 && ak != static_cast<std::size_t>(n / 2) ? std::conj(half[ak]) : half[ak];
    out << k << ',' << c.real() << ',' << c.imag() << '\n';
  }
}

struct LoadedWave {
  PeriodicGrid grid{1.0, 2};
  WaveState state;
  std::optional<std::string> hash;
};

/// Reads an (x, zeta, u) CSV. L and N come from the header when present,
/// otherwise from the node column.
inline LoadedWave read_wave_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::optional<double> half_length;
  std::optional<std::size_t> n_header;
  std::optional<std::string> hash;
  std::vector<double> x, z, u;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "L") half_length = std::stod(val);
        if (key == "N") n_header = std::stoul(val);
        if (key == "hash") hash = val;
      }
      continue;
    }
    if (line[0] == 'x') continue;
    std::istringstream ls(line);
    double a = 0, b = 0, c = 0;
    char sep = 0;
    if (!(ls >> a >> sep >> b >> sep >> c))
      throw IoError("malformed row in " + path.string() + ": " + line);
    x.push_back(a);
    z.push_back(b);
    u.push_back(c);
  }
  if (x.size() < 2) throw IoError(path.string() + " holds fewer than two nodes");
  if (n_header && *n_header != x.size())
    throw IoError(path.string() + ": header N disagrees with the row count");
  const double l = half_length.value_or(-x.front());
  LoadedWave w{PeriodicGrid(l, x.size()), WaveState(std::move(z), std::move(u)), hash};
  if (std::abs(x.front() + l) > 1e-9 * l)
    throw IoError(path.string() + ": first node is not -L");
  return w;
}

inline void write_invariants_csv(const std::filesystem::path& path, const InvariantSeries& s) {
  auto out = open_output(path);
  out << "t,E_h,I_h\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << s.times[i] << ',' << s.energy[i] << ',' << s.momentum[i] << '\n';
}

/// Whitespace-separated columns for gnuplot, with a commented header.
inline void write_plot_columns(const std::filesystem::path& path,
                               const std::vector<std::string>& names,
                               const std::vector<std::vector<double>>& columns) {
  auto out = open_output(path);
  out << '#';
  for (const auto& n : names) out << ' ' << n;
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? " " : "") << columns[c][i];
    out << '\n';
  }
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const AbcdSystem& s) {
  return {{"a", s.a},         {"b", s.b},   {"c", s.c},     {"d", s.d},
          {"gamma", s.gamma}, {"epsilon", s.epsilon},       {"mu", s.mu},
          {"mu2", s.mu2},     {"epsilon_db", s.epsilon_db()}, {"hamiltonian", s.hamiltonian()}};
}

inline Json to_json(const SystemClass& c) {
  return {{"row", c.row_index},
          {"signs", c.signs()},
          {"relevant", c.relevant},
          {"wellposedness", c.wellposedness_label}};
}

inline Json to_json(const SpeedLimitReport& r) {
  return {{"omega_m", r.omega_m},
          {"speed", r.speed},
          {"alpha0", r.alpha0},
          {"beta0", r.beta0},
          {"Q0", r.q0},
          {"Q1", r.q1},
          {"x_minus", optional_json(r.x_minus)},
          {"x_plus", optional_json(r.x_plus)},
          {"C_gamma_threshold", r.c_gamma_threshold},
          {"gamma_star", optional_json(r.gamma_star)},
          {"x_gamma", r.x_gamma},
          {"m_gamma", r.m_gamma},
          {"c_gamma", r.c_gamma},
          {"R_m", r.r_limit},
          {"minimum_attained", r.minimum_attained},
          {"inf_phi", r.inf_phi},
          {"sqrt_inf_phi", r.sqrt_inf_phi}};
}

inline Json to_json(const EvolveConfig& c) {
  return {{"dt", c.dt},
          {"t_final", c.t_final},
          {"courant_ratio", c.courant_ratio},
          {"enforce_courant", c.enforce_courant},
          {"stage_tolerance", c.stage_tolerance},
          {"stage_max_iters", c.stage_max_iters},
          {"record_every", c.record_every}};
}

inline Json to_json(const PeriodicGrid& g) { return {{"L", g.half_length()}, {"N", g.size()}}; }

inline Json solitary_metadata(const SolitaryWave& w, const PeriodicGrid& g, const AbcdSystem& s) {
  return {{"c_s", w.c_s},
          {"iterations", w.iterations},
          {"residual_history", w.residual_history},
          {"final_residual", w.final_residual()},
          {"stabilizing_factor", w.stabilizing_factor},
          {"amplitude_zeta", w.amplitude_zeta},
          {"amplitude_u", w.amplitude_u},
          {"peak_position", w.peak_position},
          {"grid", to_json(g)},
          {"system", to_json(s)},
          {"hash", parameter_hash(s)}};
}

}  // namespace bfd
