#include "actsusp/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace actsusp {

namespace {

double wrap(double x, double L) {
  x = std::fmod(x + L / 2, L);
  if (x < 0) x += L;
  return x - L / 2;
}

}  // namespace

Vec ParticleEnsemble::displacement(const Vec& a, const Vec& b) const {
  Vec r;
  for (int i = 0; i < d; ++i) r[i] = wrap(b[i] - a[i], L);
  return r;
}

double ParticleEnsemble::surface_distance(std::size_t n, std::size_t m) const {
  Vec dr = displacement(particles[n].center, particles[m].center);
  return norm(dr, d) - particles[n].radius - particles[m].radius;
}

double ParticleEnsemble::min_surface_gap() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < particles.size(); ++n)
    for (std::size_t m = n + 1; m < particles.size(); ++m)
      best = std::min(best, surface_distance(n, m));
  return best;
}

double ParticleEnsemble::total_particle_volume() const {
  double v = 0;
  for (const auto& p : particles)
    v += unit_ball_volume(d) * std::pow(p.radius, d);
  return v;
}

void ParticleEnsemble::validate() const {
  if (d != 2 && d != 3) throw ConfigError("ensemble: d must be 2 or 3");
  if (L <= 0) throw ConfigError("ensemble: L must be positive");
  for (const auto& p : particles) {
    if (p.radius <= 0) throw ConfigError("ensemble: nonpositive radius");
    for (int i = 0; i < d; ++i) {
      if (std::abs(p.center[i]) > (L - margin) / 2 + 1e-12)
        throw ConfigError("ensemble: center outside retracted cube");
    }
  }
  if (particles.size() > 1 && min_surface_gap() < 2 * ell - 1e-12)
    throw ConfigError("ensemble: hardcore violation");
}

ParticleEnsemble ParticleEnsemble::rescaled(double s) const {
  ParticleEnsemble out = *this;
  out.L = L * s;
  out.ell = ell * s;
  out.margin = margin * s;
  for (auto& p : out.particles) {
    p.radius *= s;
    for (int i = 0; i < d; ++i) p.center[i] *= s;
  }
  return out;
}

ParticleEnsemble ParticleEnsemble::shifted(const Vec& t) const {
  ParticleEnsemble out = *this;
  out.margin = 0.0;  // a shifted configuration is no longer retracted
  for (auto& p : out.particles)
    for (int i = 0; i < d; ++i) p.center[i] = wrap(p.center[i] + t[i], L);
  return out;
}

ParticleEnsemble sample_hardcore(int d, double L, double target_lambda1,
                                 double ell, std::uint64_t seed) {
  if (d != 2 && d != 3) throw ConfigError("sample_hardcore: d must be 2 or 3");
  if (ell < 0) throw ConfigError("sample_hardcore: ell must be >= 0");
  if (L <= 4 + 2 * (1 + ell))
    throw ConfigError("sample_hardcore: L must exceed 4 + 2(1+ell)");
  if (target_lambda1 < 0) throw ConfigError("sample_hardcore: negative intensity");

  ParticleEnsemble ens;
  ens.d = d;
  ens.L = L;
  ens.ell = ell;
  ens.seed = seed;
  if (target_lambda1 == 0) return ens;

  const double D = 2.0 + 2.0 * ell;  // center exclusion distance (unit radii)
  const double volume = std::pow(L, d);
  const double vol_excl =
      (d == 2) ? M_PI * D * D : 4.0 * M_PI / 3.0 * D * D * D;

  // Matern-II retained intensity is (1 - exp(-lp*V_D)) / V_D; invert for the
  // proposal intensity, compensating for the Q_{L-4} retraction.
  const double retract_factor = std::pow((L - 4.0) / L, d);
  const double target_kept = target_lambda1 / retract_factor;
  double lp;
  const double x = target_kept * vol_excl;
  if (x < 0.98) {
    lp = -std::log1p(-x) / vol_excl;
  } else {
    lp = 6.0 / vol_excl;  // saturation: densest the thinning can reach
  }

  Rng rng = Rng::stream({seed, 0x6d61746572ULL});
  int count = rng.poisson(lp * volume);
  struct Proposal {
    Vec x;
    double mark;
  };
  std::vector<Proposal> props(count);
  for (auto& p : props) {
    for (int i = 0; i < d; ++i) p.x[i] = rng.uniform(-L / 2, L / 2);
    p.mark = rng.uniform();
  }

  // cell list with cell size >= D for O(N) neighbor queries
  int ncell = std::max(1, static_cast<int>(std::floor(L / D)));
  double cell = L / ncell;
  auto cell_index = [&](const Vec& x) {
    int idx = 0;
    for (int i = 0; i < d; ++i) {
      int c = static_cast<int>(std::floor((x[i] + L / 2) / cell));
      c = std::clamp(c, 0, ncell - 1);
      idx = idx * ncell + c;
    }
    return idx;
  };
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(std::pow(ncell, d)));
  for (int i = 0; i < count; ++i) buckets[cell_index(props[i].x)].push_back(i);

  auto keep = [&](int i) {
    int ci[3] = {0, 0, 0};
    for (int k = 0; k < d; ++k) {
      ci[k] = static_cast<int>(std::floor((props[i].x[k] + L / 2) / cell));
      ci[k] = std::clamp(ci[k], 0, ncell - 1);
    }
    int span = (ncell >= 3) ? 1 : ncell;  // tiny grids: scan everything
    for (int dx = -span; dx <= span; ++dx)
      for (int dy = -span; dy <= span; ++dy)
        for (int dz = (d == 3 ? -span : 0); dz <= (d == 3 ? span : 0); ++dz) {
          int c[3] = {(ci[0] + dx % ncell + ncell) % ncell,
                      (ci[1] + dy % ncell + ncell) % ncell,
                      (ci[2] + dz % ncell + ncell) % ncell};
          int idx = c[0];
          for (int k = 1; k < d; ++k) idx = idx * ncell + c[k];
          for (int j : buckets[idx]) {
            if (j == i) continue;
            Vec dr;
            for (int k = 0; k < d; ++k) dr[k] = wrap(props[j].x[k] - props[i].x[k], L);
            if (norm(dr, d) < D &&
                (props[j].mark < props[i].mark ||
                 (props[j].mark == props[i].mark && j < i)))
              return false;
          }
        }
    return true;
  };

  for (int i = 0; i < count; ++i) {
    if (!keep(i)) continue;
    bool inside = true;
    for (int k = 0; k < d; ++k)
      if (std::abs(props[i].x[k]) > (L - 4.0) / 2) inside = false;
    if (!inside) continue;
    Particle part;
    part.center = props[i].x;
    ens.particles.push_back(part);
  }

  double achieved = ens.particles.size() / volume;
  if (achieved < 0.5 * target_lambda1) {
    std::ostringstream msg;
    msg << "sample_hardcore: thinning reached lambda1=" << achieved << " < 50% of target "
        << target_lambda1 << " (exclusion volume " << vol_excl << ", max reachable "
        << retract_factor / vol_excl << ")";
    throw SolverError(msg.str());
  }
  ens.validate();
  return ens;
}

double volume_fraction(const ParticleEnsemble& ens) {
  return ens.total_particle_volume() / std::pow(ens.L, ens.d);
}

namespace {

// |Q_w ^ (Q_w + z)| per coordinate: overlap of two side-w cubes at lag z
double cube_overlap(const Vec& z, double w, int d, const ParticleEnsemble& ens) {
  double v = 1.0;
  for (int i = 0; i < d; ++i) {
    double zi = std::abs(wrap(z[i], ens.L));
    double o = w - zi;
    if (o <= 0) return 0.0;
    v *= o;
  }
  return v;
}

double triple_overlap_1d(double z1, double z2, double w) {
  double lo = std::max({0.0, z1, z2});
  double hi = std::min({w, z1 + w, z2 + w});
  return std::max(0.0, hi - lo);
}

}  // namespace

IntensityReport estimate_intensities(const std::vector<ParticleEnsemble>& ensembles,
                                     double window,
                                     const std::vector<Vec>& lags,
                                     const std::vector<std::pair<Vec, Vec>>& lag_pairs_in,
                                     int g2_bins) {
  if (ensembles.empty())
    throw ConfigError("estimate_intensities: need at least one ensemble");
  const int d = ensembles.front().d;
  const double L = ensembles.front().L;
  if (window > L / 4)
    throw ConfigError("estimate_intensities: window must be <= L/4");
  for (const auto& lag : lags)
    for (int i = 0; i < d; ++i)
      if (std::abs(lag[i]) > L / 2)
        throw ConfigError("estimate_intensities: lag wraps more than half the torus");

  const double volume = std::pow(L, d);
  const std::size_t R = ensembles.size();

  IntensityReport rep;

  // lambda1 and volume fraction
  std::vector<double> l1(R);
  for (std::size_t r = 0; r < R; ++r) l1[r] = ensembles[r].particles.size() / volume;
  for (double v : l1) rep.lambda1 += v / R;
  if (R > 1) {
    double var = 0;
    for (double v : l1) var += (v - rep.lambda1) * (v - rep.lambda1) / (R - 1);
    rep.lambda1_se = std::sqrt(var / R);
  }
  for (const auto& e : ensembles) rep.volume_frac += volume_fraction(e) / R;

  // lambda2: window-averaged pair density, sup over the lag grid
  const double w = window;
  std::vector<Vec> lag_grid = lags;
  if (lag_grid.empty()) lag_grid.push_back(Vec{});
  std::vector<std::vector<double>> l2(lag_grid.size(), std::vector<double>(R, 0.0));
  for (std::size_t r = 0; r < R; ++r) {
    const auto& ens = ensembles[r];
    const auto& pts = ens.particles;
    for (std::size_t n = 0; n < pts.size(); ++n)
      for (std::size_t m = 0; m < pts.size(); ++m) {
        if (n == m) continue;
        Vec dr = ens.displacement(pts[n].center, pts[m].center);
        for (std::size_t q = 0; q < lag_grid.size(); ++q) {
          Vec z = dr - lag_grid[q];
          double ov = cube_overlap(z, w, d, ens);
          if (ov > 0) l2[q][r] += ov;
        }
      }
    for (std::size_t q = 0; q < lag_grid.size(); ++q)
      l2[q][r] /= volume * std::pow(w, 2 * d);
  }
  double best = -1, best_se = 0;
  for (std::size_t q = 0; q < lag_grid.size(); ++q) {
    double mean = 0;
    for (double v : l2[q]) mean += v / R;
    double se = 0;
    if (R > 1) {
      double var = 0;
      for (double v : l2[q]) var += (v - mean) * (v - mean) / (R - 1);
      se = std::sqrt(var / R);
    }
    if (mean > best) {
      best = mean;
      best_se = se;
    }
  }
  rep.lambda2 = std::max(0.0, best);
  rep.lambda2_se = best_se;

  // lambda3 over the supplied lag pairs (randomly drawn when not given)
  std::vector<std::pair<Vec, Vec>> lag_pairs = lag_pairs_in;
  if (lag_pairs.empty()) {
    Rng rng = Rng::stream({ensembles.front().seed, 0x6c616733ULL});
    for (int k = 0; k < 16; ++k) {
      Vec a, b;
      for (int i = 0; i < d; ++i) {
        a[i] = rng.uniform(-L / 4, L / 4);
        b[i] = rng.uniform(-L / 4, L / 4);
      }
      lag_pairs.emplace_back(a, b);
    }
  }
  double best3 = 0, best3_se = 0;
  for (const auto& [x1, x2] : lag_pairs) {
    std::vector<double> l3(R, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
      const auto& ens = ensembles[r];
      const auto& pts = ens.particles;
      for (std::size_t n0 = 0; n0 < pts.size(); ++n0)
        for (std::size_t n1 = 0; n1 < pts.size(); ++n1) {
          if (n1 == n0) continue;
          Vec z1 = ens.displacement(pts[n0].center, pts[n1].center) - x1;
          bool feasible = true;
          for (int i = 0; i < d; ++i)
            if (std::abs(wrap(z1[i], L)) >= w) feasible = false;
          if (!feasible) continue;
          for (std::size_t n2 = 0; n2 < pts.size(); ++n2) {
            if (n2 == n0 || n2 == n1) continue;
            Vec z2 = ens.displacement(pts[n0].center, pts[n2].center) - x2;
            double ov = 1.0;
            for (int i = 0; i < d; ++i) {
              ov *= triple_overlap_1d(wrap(z1[i], L), wrap(z2[i], L), w);
              if (ov == 0) break;
            }
            l3[r] += ov;
          }
        }
      l3[r] /= volume * std::pow(w, 3 * d);
    }
    double mean = 0;
    for (double v : l3) mean += v / R;
    if (mean > best3) {
      best3 = mean;
      if (R > 1) {
        double var = 0;
        for (double v : l3) var += (v - mean) * (v - mean) / (R - 1);
        best3_se = std::sqrt(var / R);
      }
    }
  }
  rep.lambda3 = best3;
  rep.lambda3_se = best3_se;

  // radial pair density histogram out to L/2
  const double rmax = L / 2;
  rep.g2_r.resize(g2_bins);
  rep.g2.assign(g2_bins, 0.0);
  rep.g2_se.assign(g2_bins, 0.0);
  std::vector<std::vector<double>> bins(g2_bins, std::vector<double>(R, 0.0));
  const double dr = rmax / g2_bins;
  for (std::size_t r = 0; r < R; ++r) {
    const auto& ens = ensembles[r];
    const auto& pts = ens.particles;
    for (std::size_t n = 0; n < pts.size(); ++n)
      for (std::size_t m = 0; m < pts.size(); ++m) {
        if (n == m) continue;
        double rr = norm(ens.displacement(pts[n].center, pts[m].center), d);
        int b = static_cast<int>(rr / dr);
        if (b >= 0 && b < g2_bins) bins[b][r] += 1.0;
      }
    for (int b = 0; b < g2_bins; ++b) {
      double r0 = b * dr, r1 = (b + 1) * dr;
      double shell = (d == 2) ? M_PI * (r1 * r1 - r0 * r0)
                              : 4.0 * M_PI / 3.0 * (r1 * r1 * r1 - r0 * r0 * r0);
      bins[b][r] /= volume * shell;  // pair density g2 estimate
    }
  }
  for (int b = 0; b < g2_bins; ++b) {
    rep.g2_r[b] = (b + 0.5) * dr;
    double mean = 0;
    for (double v : bins[b]) mean += v / R;
    rep.g2[b] = mean;
    if (R > 1) {
      double var = 0;
      for (double v : bins[b]) var += (v - mean) * (v - mean) / (R - 1);
      rep.g2_se[b] = std::sqrt(var / R);
    }
  }
  rep.h2.resize(g2_bins);
  for (int b = 0; b < g2_bins; ++b) rep.h2[b] = rep.g2[b] - rep.lambda1 * rep.lambda1;
  return rep;
}

std::string serialize_ensemble(const ParticleEnsemble& ens) {
  std::ostringstream os;
  os << ens.d << " " << format_double(ens.L) << " " << format_double(ens.ell) << " "
     << ens.seed << "\n";
  for (std::size_t n = 0; n < ens.particles.size(); ++n) {
    const auto& p = ens.particles[n];
    os << n;
    for (int i = 0; i < ens.d; ++i) os << " " << format_double(p.center[i]);
    os << " " << format_double(p.radius) << "\n";
  }
  return os.str();
}

ParticleEnsemble parse_ensemble(const std::string& text) {
  std::istringstream is(text);
  ParticleEnsemble ens;
  if (!(is >> ens.d >> ens.L >> ens.ell >> ens.seed))
    throw ConfigError("parse_ensemble: malformed header");
  std::size_t n;
  while (is >> n) {
    Particle p;
    for (int i = 0; i < ens.d; ++i)
      if (!(is >> p.center[i])) throw ConfigError("parse_ensemble: truncated record");
    if (!(is >> p.radius)) throw ConfigError("parse_ensemble: truncated record");
    ens.particles.push_back(p);
  }
  return ens;
}

void save_ensemble(const ParticleEnsemble& ens, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("save_ensemble: cannot open " + path);
  f << serialize_ensemble(ens);
}

ParticleEnsemble load_ensemble(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("load_ensemble: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ensemble(ss.str());
}

}  // namespace actsusp
