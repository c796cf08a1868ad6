#include "rof1d/datum.hpp"

#include <algorithm>
#include <cmath>

#include "rof1d/io.hpp"

namespace rof1d {

namespace {

void add_fourier(GridSignal& w, int modes, double amplitude, std::uint64_t seed) {
  const Grid& g = w.grid;
  const int n = w.channels();
  Rng rng(seed ^ 0x5eedf00d12345678ULL);
  for (int ch = 0; ch < n; ++ch) {
    for (int m = 1; m <= modes; ++m) {
      const double cm = rng.uniform(-1.0, 1.0);
      const double dm = rng.uniform(-1.0, 1.0);
      for (int i = 0; i <= g.cells; ++i) {
        const double xi = (g.node(i) - g.a) / (g.b - g.a);
        w.values(ch, i) += amplitude / m *
                           (cm * std::sin(2.0 * M_PI * m * xi) + dm * std::cos(2.0 * M_PI * m * xi));
      }
    }
  }
}

void add_pieces(GridSignal& w, const std::vector<PiecewisePiece>& pieces) {
  const Grid& g = w.grid;
  if (pieces.empty()) return;
  std::vector<PiecewisePiece> sorted = pieces;
  std::sort(sorted.begin(), sorted.end(),
            [](const PiecewisePiece& a, const PiecewisePiece& b) { return a.x_break < b.x_break; });
  std::size_t start = 0;
  Vec current = Vec::Zero(w.channels());
  if (sorted[0].x_break <= g.a + 1e-15 * (g.b - g.a)) {
    current = sorted[0].value;
    start = 1;
  }
  for (int i = 0; i <= g.cells; ++i) w.values.col(i) += current;
  for (std::size_t k = start; k < sorted.size(); ++k) {
    const double xb = sorted[k].x_break;
    if (!(xb > g.a && xb < g.b))
      throw ConfigError("datum: piece break outside the open interval (a,b)");
    if (static_cast<int>(sorted[k].value.size()) != w.channels())
      throw ConfigError("datum: piece value has wrong number of channels");
    const Vec jump = sorted[k].value - current;
    if (jump.norm() > 0.0) {
      int cell = static_cast<int>(std::floor((xb - g.a) / g.dx()));
      cell = std::clamp(cell, 0, g.cells - 1);
      // one atom per cell: merge if a previous break landed in the same cell
      if (!w.atoms.empty() && w.atoms.back().cell == cell)
        w.atoms.back().jump += jump;
      else
        w.atoms.push_back({cell, jump});
    }
    current = sorted[k].value;
  }
  // drop cancelled atoms
  w.atoms.erase(std::remove_if(w.atoms.begin(), w.atoms.end(),
                               [](const Atom& a) { return a.jump.norm() == 0.0; }),
                w.atoms.end());
}

}  // namespace

GridSignal generate_datum(const DatumDescriptor& d, const Grid& g, int channels) {
  if (d.kind == DatumKind::file) return read_signal_csv(d.path, d.atoms_path);
  GridSignal w = GridSignal::zero(g, channels);
  switch (d.kind) {
    case DatumKind::piecewise_constant:
      add_pieces(w, d.pieces);
      break;
    case DatumKind::smooth_fourier:
      add_fourier(w, d.modes, d.amplitude, d.fourier_seed);
      break;
    case DatumKind::mixed:
      add_pieces(w, d.pieces);
      add_fourier(w, d.modes, d.amplitude, d.fourier_seed);
      break;
    case DatumKind::file:
      break;
  }
  return w;
}

DatumDescriptor random_piecewise(const Grid& g, int channels, int pieces, double vmax, Rng& rng) {
  DatumDescriptor d;
  d.kind = DatumKind::piecewise_constant;
  PiecewisePiece base;
  base.x_break = g.a;
  base.value = Vec::Zero(channels);
  for (int ch = 0; ch < channels; ++ch) base.value[ch] = rng.uniform(-vmax, vmax);
  d.pieces.push_back(base);
  const double margin = 0.05 * (g.b - g.a);
  for (int k = 1; k < pieces; ++k) {
    PiecewisePiece p;
    p.x_break = rng.uniform(g.a + margin, g.b - margin);
    p.value = Vec::Zero(channels);
    for (int ch = 0; ch < channels; ++ch) p.value[ch] = rng.uniform(-vmax, vmax);
    d.pieces.push_back(p);
  }
  return d;
}

DatumDescriptor random_mixed(const Grid& g, int channels, int pieces, double vmax, int modes,
                             double amplitude, Rng& rng) {
  DatumDescriptor d = random_piecewise(g, channels, pieces, vmax, rng);
  d.kind = DatumKind::mixed;
  d.modes = modes;
  d.amplitude = amplitude;
  d.fourier_seed = rng.next_u64();
  return d;
}

}  // namespace rof1d
