// forcing.hpp
//
// Swimming force models: neutral dipole densities supported in the shell
// around each particle plus the affine interior extension carrying the
// propulsion force. Every rasterized density is projected back onto exact
// discrete neutrality (zero net force and torque per particle).

#pragma once

#include <string>
#include <vector>

#include "actsusp/basis.hpp"
#include "actsusp/ensemble.hpp"
#include "actsusp/grid.hpp"
#include "actsusp/util.hpp"

namespace actsusp {

struct OrientationRule {
  enum class Kind { FrenkelShear, Fixed, Random, StrainTilt };
  Kind kind = Kind::FrenkelShear;
  int sign = +1;              // FrenkelShear: +/- the top strain eigenvector
  Vec v;                      // Fixed direction / StrainTilt reference
  double concentration = 0;   // Random: von Mises kappa about the shear axis
};

// "frenkel-shear" | "fixed:x,y[,z]" | "random:<kappa>" | "tilt:x,y[,z]"
OrientationRule parse_orientation(const std::string& s);
std::string orientation_to_string(const OrientationRule& r);

// +/- the top eigenvector of E; degenerate spectra take the documented
// lexicographic tie-break and set *degenerate
Vec shear_orientation(const Mat& E, int d, int sign, bool* degenerate = nullptr);

struct SwimForceModel {
  double fbar_mag = 1.0;  // |propulsion force|
  double offset = 1.65;   // dipole point distance, in particle radii
  int gamma = -1;         // -1 pusher (point behind), +1 puller (ahead)
  double width = 0.3;     // bump regularization width, in particle radii
  OrientationRule orientation;

  Vec orient(const Mat& E, int d, Rng* rng = nullptr, bool* degenerate = nullptr) const;
  Vec fbar(const Mat& E, int d, Rng* rng = nullptr) const;

  // sup-norm bound on the density at unit radius (Hyp. on |f(E)| <= C<E>);
  // includes slack for rasterization
  double activity_bound(int d) const;
};

// Validates 1 < offset < 2 and width << offset-1 (support in the shell).
SwimForceModel make_dipole_model(double fbar_mag, double offset, int gamma,
                                 double width, OrientationRule rule = {});

struct ParticleForce {
  std::vector<std::size_t> idx;  // grid nodes carrying this particle's density
  std::vector<Vec> y;            // periodic displacement node - center
  std::vector<Vec> val;          // density values
  Vec fbar;                      // interior integral (propulsion)
  Mat ftilde;                    // interior first moment (torque, skew)
  Vec e;
  bool degenerate = false;

  // integral of val . phi over the particle's support
  double pair_with(const PeriodicField& phi, const Mat& shift, double cell_volume) const;
};

struct ForceField {
  PeriodicField total;                    // superposed density (vector field)
  std::vector<ParticleForce> per_particle;
  Vec worst_force_residual;               // post-projection neutrality check
  double worst_torque_residual = 0;
};

// Rasterize the model for every particle at its own averaged strain
// (per_particle_E empty means E=0 for all). Throws when the grid does not
// resolve the bump width with >= 4 cells.
ForceField evaluate_force(const SwimForceModel& model, const ParticleEnsemble& ens,
                          const std::vector<Mat>& per_particle_E, const GridSpec& g,
                          std::uint64_t orientation_salt = 0);

inline ForceField evaluate_force(const SwimForceModel& model, const ParticleEnsemble& ens,
                                 const Mat& E, const GridSpec& g,
                                 std::uint64_t orientation_salt = 0) {
  std::vector<Mat> per(ens.particles.size(), E);
  return evaluate_force(model, ens, per, g, orientation_salt);
}

}  // namespace actsusp
