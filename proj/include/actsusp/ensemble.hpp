// ensemble.hpp
//
// Stationary hardcore particle configurations on the torus [-L/2, L/2)^d.
// Sampling is Matern-II thinning of a Poisson proposal; centers are kept in
// the retracted cube Q_{L-4} so that configurations periodize cleanly.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "actsusp/util.hpp"

namespace actsusp {

struct Particle {
  Vec center;
  double radius = 1.0;
};

struct ParticleEnsemble {
  int d = 2;
  double L = 0;
  double ell = 0;          // hardcore parameter: surface gaps are >= 2*ell
  double margin = 4.0;     // centers live in Q_{L - margin}
  std::uint64_t seed = 0;
  std::vector<Particle> particles;

  // periodic center-to-center displacement and surface distance
  Vec displacement(const Vec& a, const Vec& b) const;
  double surface_distance(std::size_t n, std::size_t m) const;

  // O(N^2) audit of all ParticleEnsemble invariants; throws on violation
  void validate() const;

  // minimum over pairs of the periodic surface distance (inf if < 2)
  double min_surface_gap() const;

  double total_particle_volume() const;

  ParticleEnsemble rescaled(double s) const;  // centers, radii, L, ell scale by s
  ParticleEnsemble shifted(const Vec& t) const;
};

// Matern-II hardcore sampler. Deterministic given the seed. Throws
// SolverError when the thinning scheme cannot reach half the target
// intensity.
ParticleEnsemble sample_hardcore(int d, double L, double target_lambda1,
                                 double ell, std::uint64_t seed);

double volume_fraction(const ParticleEnsemble& ens);

struct IntensityReport {
  double lambda1 = 0, lambda1_se = 0;
  double volume_frac = 0;
  double lambda2 = 0, lambda2_se = 0;
  double lambda3 = 0, lambda3_se = 0;
  std::vector<double> g2_r;      // bin centers
  std::vector<double> g2;        // radial pair density estimate
  std::vector<double> g2_se;
  std::vector<double> h2;        // g2 - lambda1^2
};

// Window-averaged intensity estimators following the Q_ell-window
// definitions; lambda3 only over the supplied lag pairs (16 random pairs
// when empty).
IntensityReport estimate_intensities(const std::vector<ParticleEnsemble>& ensembles,
                                     double window,
                                     const std::vector<Vec>& lags,
                                     const std::vector<std::pair<Vec, Vec>>& lag_pairs = {},
                                     int g2_bins = 32);

// plain-text serialization: header "d L ell seed", one "n cx cy [cz] r"
// record per particle; round-trips bit-exactly
std::string serialize_ensemble(const ParticleEnsemble& ens);
ParticleEnsemble parse_ensemble(const std::string& text);
void save_ensemble(const ParticleEnsemble& ens, const std::string& path);
ParticleEnsemble load_ensemble(const std::string& path);

}  // namespace actsusp
