#include "actsusp/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace actsusp {

OrientationRule parse_orientation(const std::string& s) {
  OrientationRule r;
  auto parse_vec = [&](const std::string& body) {
    Vec v;
    std::istringstream is(body);
    std::string tok;
    int i = 0;
    while (std::getline(is, tok, ',') && i < 3) v[i++] = std::stod(tok);
    if (i < 2) throw ConfigError("orientation: vector needs >= 2 components");
    return v;
  };
  if (s == "frenkel-shear") {
    r.kind = OrientationRule::Kind::FrenkelShear;
    r.sign = +1;
  } else if (s == "frenkel-shear:-") {
    r.kind = OrientationRule::Kind::FrenkelShear;
    r.sign = -1;
  } else if (s.rfind("fixed:", 0) == 0) {
    r.kind = OrientationRule::Kind::Fixed;
    r.v = parse_vec(s.substr(6));
  } else if (s.rfind("random:", 0) == 0) {
    r.kind = OrientationRule::Kind::Random;
    r.concentration = std::stod(s.substr(7));
  } else if (s.rfind("tilt:", 0) == 0) {
    r.kind = OrientationRule::Kind::StrainTilt;
    r.v = parse_vec(s.substr(5));
  } else {
    throw ConfigError("orientation: unknown rule '" + s + "'");
  }
  return r;
}

std::string orientation_to_string(const OrientationRule& r) {
  std::ostringstream os;
  switch (r.kind) {
    case OrientationRule::Kind::FrenkelShear:
      os << (r.sign >= 0 ? "frenkel-shear" : "frenkel-shear:-");
      break;
    case OrientationRule::Kind::Fixed:
      os << "fixed:" << r.v[0] << "," << r.v[1] << "," << r.v[2];
      break;
    case OrientationRule::Kind::Random:
      os << "random:" << r.concentration;
      break;
    case OrientationRule::Kind::StrainTilt:
      os << "tilt:" << r.v[0] << "," << r.v[1] << "," << r.v[2];
      break;
  }
  return os.str();
}

Vec shear_orientation(const Mat& E, int d, int sign, bool* degenerate) {
  Vec e = top_eigenvector(E, d, degenerate);
  return (sign >= 0 ? 1.0 : -1.0) * e;
}

Vec SwimForceModel::orient(const Mat& E, int d, Rng* rng, bool* degenerate) const {
  if (degenerate) *degenerate = false;
  switch (orientation.kind) {
    case OrientationRule::Kind::Fixed: {
      Vec e = orientation.v;
      return (1.0 / norm(e, d)) * e;
    }
    case OrientationRule::Kind::FrenkelShear:
      return shear_orientation(E, d, orientation.sign, degenerate);
    case OrientationRule::Kind::Random: {
      Vec mean = shear_orientation(E, d, orientation.sign, degenerate);
      if (!rng) return mean;
      return rng->von_mises_fisher(mean, orientation.concentration, d);
    }
    case OrientationRule::Kind::StrainTilt: {
      // smooth in E: tilt the reference direction with the local strain
      Vec v0 = orientation.v;
      v0 = (1.0 / norm(v0, d)) * v0;
      Vec e = v0 + matvec(E, v0, d);
      double nrm = norm(e, d);
      if (nrm < 1e-12) {
        if (degenerate) *degenerate = true;
        return v0;
      }
      return (1.0 / nrm) * e;
    }
  }
  throw std::logic_error("orient: unreachable");
}

Vec SwimForceModel::fbar(const Mat& E, int d, Rng* rng) const {
  return fbar_mag * orient(E, d, rng);
}

double SwimForceModel::activity_bound(int d) const {
  // continuum bump peak = 1/int(bump); radial profile (1-s^2)^3 on radius w
  double moment = 0;
  const int nq = 512;
  for (int i = 0; i < nq; ++i) {
    double s = (i + 0.5) / nq;
    double prof = std::pow(1.0 - s * s, 3);
    moment += prof * std::pow(s, d - 1) / nq;
  }
  double shell_mass = (d == 2 ? 2 * M_PI : 4 * M_PI) * moment * std::pow(width, d);
  double bump_peak = 1.0 / shell_mass;
  double interior = 1.0 / unit_ball_volume(d);
  // 1.6 rasterization slack (discrete bump normalization overshoots)
  return 1.6 * fbar_mag * std::max(bump_peak, interior);
}

SwimForceModel make_dipole_model(double fbar_mag, double offset, int gamma,
                                 double width, OrientationRule rule) {
  if (!(offset > 1.0 && offset < 2.0))
    throw ConfigError("make_dipole_model: offset must lie in (1,2)");
  if (gamma != 1 && gamma != -1)
    throw ConfigError("make_dipole_model: gamma must be +1 or -1");
  if (width <= 0 || width >= std::min(offset - 1.0, 2.0 - offset))
    throw ConfigError("make_dipole_model: width must fit the shell gap");
  SwimForceModel m;
  m.fbar_mag = fbar_mag;
  m.offset = offset;
  m.gamma = gamma;
  m.width = width;
  m.orientation = rule;
  return m;
}

double ParticleForce::pair_with(const PeriodicField& phi, const Mat& shift,
                                double cell_volume) const {
  const int d = phi.grid.d;
  double s = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    Vec w = matvec(shift, y[k], d);
    for (int c = 0; c < d; ++c) s += (phi.at(c, idx[k]) + w[c]) * val[k][c];
  }
  return s * cell_volume;
}

namespace {

double quintic_step(double t) {
  // 1 for t<=-1, 0 for t>=1, C^2 monotone between
  if (t <= -1) return 1.0;
  if (t >= 1) return 0.0;
  double u = (t + 1) / 2;
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

struct SmallSystem {
  // dense Gaussian elimination with partial pivoting
  static void solve(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
      int piv = col;
      for (int r = col + 1; r < n; ++r)
        if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
      if (std::abs(A[piv * n + col]) < 1e-300)
        throw SolverError("neutrality projection: singular moment system");
      if (piv != col) {
        for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
        std::swap(b[col], b[piv]);
      }
      for (int r = col + 1; r < n; ++r) {
        double f = A[r * n + col] / A[col * n + col];
        for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
        b[r] -= f * b[col];
      }
    }
    for (int r = n - 1; r >= 0; --r) {
      for (int c = r + 1; c < n; ++c) b[r] -= A[r * n + c] * b[c];
      b[r] /= A[r * n + r];
    }
  }
};

// skew basis matrices
std::vector<Mat> skew_basis(int d) {
  std::vector<Mat> b;
  auto mk = [&](int i, int j) {
    Mat m;
    m(i, j) = 1;
    m(j, i) = -1;
    return m;
  };
  b.push_back(mk(0, 1));
  if (d == 3) {
    b.push_back(mk(0, 2));
    b.push_back(mk(1, 2));
  }
  return b;
}

}  // namespace

ForceField evaluate_force(const SwimForceModel& model, const ParticleEnsemble& ens,
                          const std::vector<Mat>& per_particle_E, const GridSpec& g,
                          std::uint64_t orientation_salt) {
  const int d = g.d;
  const double h = g.h();
  ForceField out;
  out.total = PeriodicField(g, d);
  out.per_particle.resize(ens.particles.size());
  if (!per_particle_E.empty() && per_particle_E.size() != ens.particles.size())
    throw ConfigError("evaluate_force: strain list size mismatch");

  const auto skews = skew_basis(d);
  const int nskew = static_cast<int>(skews.size());

  for (std::size_t n = 0; n < ens.particles.size(); ++n) {
    const Particle& part = ens.particles[n];
    const double a = part.radius;
    const double w_bump = model.width * a;
    if (w_bump < 4 * h) {
      std::ostringstream msg;
      msg << "evaluate_force: bump width " << w_bump << " under-resolved; need h <= "
          << w_bump / 4 << " (grid h = " << h << ")";
      throw ConfigError(msg.str());
    }

    Mat E = per_particle_E.empty() ? Mat{} : per_particle_E[n];
    ParticleForce& pf = out.per_particle[n];
    Rng rng = Rng::stream({ens.seed, orientation_salt, static_cast<std::uint64_t>(n),
                           0x6f7269656eULL});
    pf.e = model.orient(E, d, &rng, &pf.degenerate);
    Vec fdir = model.fbar_mag * pf.e;

    // dipole point: gamma=+1 ahead of the orientation, gamma=-1 behind
    Vec xpoint = part.center + (model.gamma * model.offset * a) * pf.e;

    // collect the patch: everything within R of the center
    const double R = a * std::max(model.offset + model.width, 1.96) + 2 * h;
    int lo[3], hi[3];
    for (int i = 0; i < d; ++i) {
      lo[i] = static_cast<int>(std::floor((part.center[i] - R + g.L / 2) / h)) - 1;
      hi[i] = static_cast<int>(std::ceil((part.center[i] + R + g.L / 2) / h)) + 1;
    }
    const double ind_halfwidth = h;  // interior indicator transition half-width
    std::vector<double> wint, wbump, wshell;
    int c[3] = {0, 0, 0};
    auto visit = [&](auto&& self, int axis) -> void {
      if (axis == d) {
        int cc[3] = {c[0], c[1], c[2]};
        std::size_t idx = g.node_index(cc);
        Vec x;
        for (int i = 0; i < d; ++i) x[i] = -g.L / 2 + ((c[i] % g.n + g.n) % g.n) * h;
        Vec y = ens.displacement(part.center, x);
        double r = norm(y, d);
        if (r > R) return;
        double chi_int = quintic_step((r - a) / ind_halfwidth);
        Vec yb;
        for (int i = 0; i < d; ++i) yb[i] = x[i] - xpoint[i];
        for (int i = 0; i < d; ++i) {
          double Lw = g.L;
          yb[i] = std::fmod(yb[i] + Lw / 2, Lw);
          if (yb[i] < 0) yb[i] += Lw;
          yb[i] -= Lw / 2;
        }
        double rb2 = dot(yb, yb, d) / (w_bump * w_bump);
        double bump = rb2 < 1.0 ? std::pow(1.0 - rb2, 3) : 0.0;
        double tsh = (r - 1.5 * a) / (0.45 * a);
        double shell = (std::abs(tsh) < 1.0) ? std::pow(1.0 - tsh * tsh, 2) : 0.0;
        if (chi_int > 0 || bump > 0 || shell > 0) {
          pf.idx.push_back(idx);
          pf.y.push_back(y);
          wint.push_back(chi_int);
          wbump.push_back(bump);
          wshell.push_back(shell);
        }
        return;
      }
      for (c[axis] = lo[axis]; c[axis] <= hi[axis]; ++c[axis]) self(self, axis + 1);
    };
    visit(visit, 0);

    const double cellv = g.cell_volume();
    double mint = 0, mbump = 0;
    for (double v : wint) mint += v;
    for (double v : wbump) mbump += v;
    mint *= cellv;
    mbump *= cellv;
    if (mint <= 0 || mbump <= 0)
      throw ConfigError("evaluate_force: particle not resolved by the grid");

    // interior extension (uniform, carries fbar) minus the bump at the
    // dipole point (total mass -fbar)
    pf.val.resize(pf.idx.size());
    for (std::size_t k = 0; k < pf.idx.size(); ++k)
      pf.val[k] = (wint[k] / mint - wbump[k] / mbump) * fdir;

    // neutrality projection: add an affine density on the shell cancelling
    // the residual net force and torque of the discrete rasterization
    {
      Vec Ferr;
      Mat Merr;  // int val x y
      for (std::size_t k = 0; k < pf.idx.size(); ++k) {
        Ferr = Ferr + cellv * pf.val[k];
        Merr = Merr + cellv * outer(pf.val[k], pf.y[k], d);
      }
      const int nb = d + nskew;
      // correction basis: s*e_i and s*Theta_k*y
      double m0 = 0;
      Vec m1;
      Mat M2;
      for (std::size_t k = 0; k < pf.idx.size(); ++k) {
        m0 += wshell[k] * cellv;
        m1 = m1 + (wshell[k] * cellv) * pf.y[k];
        M2 = M2 + (wshell[k] * cellv) * outer(pf.y[k], pf.y[k], d);
      }
      std::vector<double> A(nb * nb, 0.0), rhs(nb, 0.0);
      // rows: force components then skew moments; columns likewise
      for (int i = 0; i < d; ++i) {
        A[i * nb + i] = m0;
        for (int kq = 0; kq < nskew; ++kq) {
          Vec tm = matvec(skews[kq], m1, d);
          A[i * nb + (d + kq)] = tm[i];
        }
        rhs[i] = -Ferr[i];
      }
      for (int kp = 0; kp < nskew; ++kp) {
        // torque functional of each correction basis element against skews[kp]
        for (int i = 0; i < d; ++i) {
          Vec ei;
          ei[i] = 1;
          A[(d + kp) * nb + i] = frob(outer(ei, m1, d), skews[kp], d);
        }
        for (int kq = 0; kq < nskew; ++kq) {
          Mat mm;
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
              double s = 0;
              for (int l = 0; l < d; ++l) s += skews[kq](i, l) * M2(l, j);
              mm(i, j) = s;
            }
          A[(d + kp) * nb + (d + kq)] = frob(mm, skews[kp], d);
        }
        rhs[d + kp] = -frob(Merr, skews[kp], d);
      }
      SmallSystem::solve(A, rhs, nb);
      Vec acorr;
      for (int i = 0; i < d; ++i) acorr[i] = rhs[i];
      Mat Tcorr;
      for (int kq = 0; kq < nskew; ++kq) Tcorr = Tcorr + rhs[d + kq] * skews[kq];
      for (std::size_t k = 0; k < pf.idx.size(); ++k)
        pf.val[k] = pf.val[k] + wshell[k] * (acorr + matvec(Tcorr, pf.y[k], d));
    }

    // report interior (fbar, ftilde) and the residual neutrality defect
    Vec Fres;
    Mat Mres;
    for (std::size_t k = 0; k < pf.idx.size(); ++k) {
      Fres = Fres + cellv * pf.val[k];
      Mres = Mres + cellv * outer(pf.val[k], pf.y[k], d);
      if (norm(pf.y[k], d) <= ens.particles[n].radius) {
        pf.fbar = pf.fbar + cellv * pf.val[k];
        pf.ftilde = pf.ftilde + cellv * outer(pf.val[k], pf.y[k], d);
      }
    }
    double tres = 0;
    for (const auto& th : skews) tres = std::max(tres, std::abs(frob(Mres, th, d)));
    for (int i = 0; i < d; ++i)
      out.worst_force_residual[i] = std::max(out.worst_force_residual[i], std::abs(Fres[i]));
    out.worst_torque_residual = std::max(out.worst_torque_residual, tres);

    for (std::size_t k = 0; k < pf.idx.size(); ++k)
      for (int i = 0; i < d; ++i) out.total.at(i, pf.idx[k]) += pf.val[k][i];
  }
  return out;
}

}  // namespace actsusp
