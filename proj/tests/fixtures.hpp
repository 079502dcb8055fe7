#pragma once
#include <random>

#include "willmore/io.hpp"

namespace fixtures {

using namespace willmore;

inline cd tau() { return {0.5, std::sqrt(3.0) / 2.0}; }
inline EndConfiguration equianharmonic() { return EndConfiguration{{0.0, 1.0, tau()}}; }

// Member of the 4-end family with tetrahedral end normals, shifted off the origin.
inline const MinimalImmersion& tetra() {
  static const MinimalImmersion im = [] {
    EndConfiguration cfg = equianharmonic();
    KernelPair kp = tetrahedral_member(cfg, kernel_basis(build_end_matrix(cfg)));
    return MinimalImmersion(assemble_weierstrass(cfg, kp.ahat, kp.bhat), Vec3(0.3, -0.2, 0.5));
  }();
  return im;
}

// Quarter-turn symmetric member.
inline const SurfaceRecord& symmetric() {
  static const SurfaceRecord r = symmetric_surface(equianharmonic());
  return r;
}

// Random admissible pair in the 4-end kernel family, by rejection.
inline WeierstrassSurface random_member(std::mt19937_64& rng) {
  EndConfiguration cfg = equianharmonic();
  KernelBasis kb = kernel_basis(build_end_matrix(cfg));
  std::normal_distribution<double> g;
  for (int tries = 0; tries < 1000; ++tries) {
    KernelPair kp = kernel_pair(kb, {g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)});
    try {
      return assemble_weierstrass(cfg, kp.ahat, kp.bhat);
    } catch (const Error&) {
    }
  }
  throw std::runtime_error("no admissible member found");
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixtures
