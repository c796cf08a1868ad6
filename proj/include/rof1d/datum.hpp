#pragma once

#include <string>
#include <vector>

#include "rof1d/bvsignal.hpp"
#include "rof1d/rng.hpp"

namespace rof1d {

enum class DatumKind { piecewise_constant, smooth_fourier, mixed, file };

struct PiecewisePiece {
  double x_break;
  Vec value;
};

struct DatumDescriptor {
  DatumKind kind = DatumKind::piecewise_constant;
  // piecewise_constant / mixed: a piece at x = a sets the base value, interior
  // breaks become explicit atoms at the containing cell's midpoint
  std::vector<PiecewisePiece> pieces;
  // smooth_fourier / mixed
  int modes = 4;
  double amplitude = 1.0;
  std::uint64_t fourier_seed = 0;
  // file
  std::string path;
  std::string atoms_path;
};

GridSignal generate_datum(const DatumDescriptor& d, const Grid& g, int channels);

// seeded battery generators
DatumDescriptor random_piecewise(const Grid& g, int channels, int pieces, double vmax, Rng& rng);
DatumDescriptor random_mixed(const Grid& g, int channels, int pieces, double vmax, int modes,
                             double amplitude, Rng& rng);

}  // namespace rof1d
