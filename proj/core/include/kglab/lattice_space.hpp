#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kglab/geometry.hpp"
#include "kglab/matrix.hpp"

namespace kglab {

// Columns are basis vectors.
struct UnimodularLattice {
  RealMatrix basis;
  std::int64_t prime = 0;
  std::vector<std::int64_t> direction;  // a, with the lattice p^(-1/d) {<x,a> = 0 mod p}
};

// The affine lattice B (Z^d + w/N).
struct AffineLattice {
  RealMatrix basis;
  std::vector<std::int64_t> shift_class;  // w, reduced mod N
  std::int64_t modulus = 1;

  int dim() const { return static_cast<int>(basis.rows()); }
  std::vector<double> shift() const;  // B w / N
};

bool is_prime(std::int64_t p);

// Integer basis of {x in Z^d : <x, a> = 0 (mod p)} with determinant +-p:
// columns p e_j and e_i - (a_i a_j^-1 mod p) e_j for i != j, where j is the
// first coordinate with a_j invertible.
IntMatrix hnf_sublattice_basis(std::span<const std::int64_t> a, std::int64_t p);

// Hecke point: a uniform in (Z/p)^d minus 0, basis p^(-1/d) * hnf basis.
UnimodularLattice hecke_sample(int d, std::int64_t p, std::uint64_t seed);

// Shift class w uniform on {w mod N : gcd(w, N) = gcd(v, N)}, the
// SL_d(Z/N)-orbit of v.
AffineLattice sample_affine_cover(const UnimodularLattice& lattice,
                                  std::span<const std::int64_t> v,
                                  std::int64_t N, std::uint64_t seed);

// LLL reduction (delta = 0.99) of the columns of `basis`; same lattice.
RealMatrix lll_reduce(const RealMatrix& basis, double delta = 0.99);

// Haar-random rotation in SO(d).
RealMatrix random_rotation(int d, std::uint64_t seed);

// Exact count of nonzero affine-lattice points in the region.  Throws
// std::domain_error when the reduced basis has condition number > 1e12.
std::uint64_t count_in_region(const AffineLattice& lattice,
                              const RegionSpec& region);

struct LatticeSamplerConfig {
  int d = 3;
  std::vector<std::int64_t> residues;  // v; empty means 0
  std::int64_t modulus = 1;
  std::int64_t prime = 40009;
  std::size_t samples = 2000;
  std::uint64_t seed = 1;
  // Left-multiply each Hecke lattice by a Haar-random rotation.  Haar measure
  // is rotation invariant; the rotation removes the axis-aligned
  // discretization bias of Hecke points against boxes.
  bool rotate = true;
  unsigned threads = 1;
};

// The i-th sampled affine lattice of the stream defined by the config.
AffineLattice sample_lattice(const LatticeSamplerConfig& config, std::size_t index);

struct MeanValueResult {
  double mean = 0.0;
  double std_error = 0.0;
  double target = 0.0;  // |A|
  std::size_t samples = 0;
};

MeanValueResult mean_value_experiment(const LatticeSamplerConfig& config,
                                      const RegionSpec& region);

struct VarianceRow {
  std::size_t region_id = 0;
  double volume = 0.0;
  double mean_count = 0.0;
  double variance = 0.0;
  double ratio = 0.0;  // variance / volume
  std::size_t samples = 0;
  std::int64_t prime = 0;
  std::uint64_t seed = 0;
};

// Each sampled lattice is counted against every region, so the rows share
// one sample of lattices.
std::vector<VarianceRow> variance_experiment(const LatticeSamplerConfig& config,
                                             std::span<const RegionSpec> regions);

// Nested cubes [1, 1 + L)^d with L^d equal to each volume.
std::vector<RegionSpec> cube_family(int d, std::span<const double> volumes);

std::string variance_csv(std::span<const VarianceRow> rows);

}  // namespace kglab
