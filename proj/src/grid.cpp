#include "actsusp/grid.hpp"

#include <fftw3.h>

#include "actsusp/basis.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

namespace actsusp {

Vec GridSpec::node_coord(std::size_t idx) const {
  Vec x;
  for (int i = d - 1; i >= 0; --i) {
    int c = static_cast<int>(idx % n);
    idx /= n;
    x[i] = -L / 2 + c * h();
  }
  return x;
}

std::size_t GridSpec::node_index(const int* c) const {
  std::size_t idx = 0;
  for (int i = 0; i < d; ++i) {
    int ci = ((c[i] % n) + n) % n;
    idx = idx * n + ci;
  }
  return idx;
}

Vec PeriodicField::mean() const {
  Vec m;
  const std::size_t nn = grid.nodes();
  for (int c = 0; c < std::min(comps, 3); ++c) {
    double s = 0;
    const double* p = comp(c);
    for (std::size_t i = 0; i < nn; ++i) s += p[i];
    m[c] = s / nn;
  }
  return m;
}

double PeriodicField::l2() const {
  double s = 0;
  for (double v : data) s += v * v;
  return std::sqrt(s * grid.cell_volume());
}

PeriodicField& PeriodicField::operator+=(const PeriodicField& o) {
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
  return *this;
}
PeriodicField& PeriodicField::operator-=(const PeriodicField& o) {
  for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
  return *this;
}
PeriodicField& PeriodicField::operator*=(double s) {
  for (double& v : data) v *= s;
  return *this;
}

int sym_index(int i, int j, int d) {
  if (i > j) std::swap(i, j);
  if (i == j) return i;
  if (d == 2) return 2;            // (12)
  if (i == 0 && j == 1) return 3;  // 3D packed: 11,22,33,12,13,23
  if (i == 0 && j == 2) return 4;
  return 5;
}

// ---- FFT workspace -----------------------------------------------------

namespace {
std::mutex planner_mutex;
}

struct SpectralGrid::Impl {
  fftw_plan fwd = nullptr, bwd = nullptr;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  std::size_t nreal = 0, ncomplex = 0;
};

SpectralGrid::SpectralGrid(GridSpec g) : g_(g), impl_(new Impl) {
  const int n = g.n;
  impl_->nreal = g.nodes();
  impl_->ncomplex = (g.d == 2) ? static_cast<std::size_t>(n) * (n / 2 + 1)
                               : static_cast<std::size_t>(n) * n * (n / 2 + 1);
  ncomplex_ = impl_->ncomplex;
  impl_->rbuf = fftw_alloc_real(impl_->nreal);
  impl_->cbuf = fftw_alloc_complex(impl_->ncomplex);
  {
    std::lock_guard<std::mutex> lk(planner_mutex);
    if (g.d == 2) {
      impl_->fwd = fftw_plan_dft_r2c_2d(n, n, impl_->rbuf, impl_->cbuf, FFTW_ESTIMATE);
      impl_->bwd = fftw_plan_dft_c2r_2d(n, n, impl_->cbuf, impl_->rbuf, FFTW_ESTIMATE);
    } else {
      impl_->fwd = fftw_plan_dft_r2c_3d(n, n, n, impl_->rbuf, impl_->cbuf, FFTW_ESTIMATE);
      impl_->bwd = fftw_plan_dft_c2r_3d(n, n, n, impl_->cbuf, impl_->rbuf, FFTW_ESTIMATE);
    }
  }
  for (int axis = 0; axis < g.d; ++axis) {
    k_[axis].resize(n);
    for (int m = 0; m < n; ++m) {
      int ms = (m <= n / 2) ? m : m - n;
      k_[axis][m] = 2.0 * M_PI * ms / g.L;
    }
  }
}

SpectralGrid::~SpectralGrid() {
  std::lock_guard<std::mutex> lk(planner_mutex);
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
  fftw_free(impl_->rbuf);
  fftw_free(impl_->cbuf);
}

void SpectralGrid::forward(const double* in, std::complex<double>* out) {
  std::memcpy(impl_->rbuf, in, impl_->nreal * sizeof(double));
  fftw_execute(impl_->fwd);
  std::memcpy(out, impl_->cbuf, impl_->ncomplex * sizeof(fftw_complex));
}

void SpectralGrid::backward(const std::complex<double>* in, double* out) {
  std::memcpy(impl_->cbuf, in, impl_->ncomplex * sizeof(fftw_complex));
  fftw_execute(impl_->bwd);
  const double scale = 1.0 / impl_->nreal;
  for (std::size_t i = 0; i < impl_->nreal; ++i) out[i] = impl_->rbuf[i] * scale;
}

void SpectralGrid::complex_coords(std::size_t cidx, int* m) const {
  const int n = g_.n;
  const int nlast = n / 2 + 1;
  m[g_.d - 1] = static_cast<int>(cidx % nlast);
  cidx /= nlast;
  for (int i = g_.d - 2; i >= 0; --i) {
    m[i] = static_cast<int>(cidx % n);
    cidx /= n;
  }
}

double SpectralGrid::k2(std::size_t cidx) const {
  int m[3];
  complex_coords(cidx, m);
  double s = 0;
  for (int i = 0; i < g_.d; ++i) {
    double k = k_[i][m[i]];
    s += k * k;
  }
  return s;
}

bool SpectralGrid::nyquist(std::size_t cidx) const {
  int m[3];
  complex_coords(cidx, m);
  for (int i = 0; i < g_.d; ++i)
    if (g_.n % 2 == 0 && m[i] == g_.n / 2) return true;
  return false;
}

// ---- spectral operators ------------------------------------------------

namespace {

using cvec = std::vector<std::complex<double>>;

// wavevector of a complex index, Nyquist zeroed (differentiation convention)
inline void wavevector(const SpectralGrid& sg, std::size_t c, double k[3]) {
  int m[3];
  sg.complex_coords(c, m);
  const auto& g = sg.spec();
  for (int i = 0; i < g.d; ++i) {
    k[i] = sg.kaxis(i)[m[i]];
    if (g.n % 2 == 0 && m[i] == g.n / 2) k[i] = 0.0;
  }
}

}  // namespace

PeriodicField gradient(SpectralGrid& sg, const PeriodicField& f) {
  const GridSpec& g = f.grid;
  PeriodicField out(g, g.d);
  cvec fh(sg.ncomplex()), gh(sg.ncomplex());
  sg.forward(f.comp(0), fh.data());
  for (int axis = 0; axis < g.d; ++axis) {
    for (std::size_t c = 0; c < sg.ncomplex(); ++c) {
      double k[3];
      wavevector(sg, c, k);
      gh[c] = std::complex<double>(0, k[axis]) * fh[c];
    }
    sg.backward(gh.data(), out.comp(axis));
  }
  return out;
}

PeriodicField divergence(SpectralGrid& sg, const PeriodicField& u) {
  const GridSpec& g = u.grid;
  PeriodicField out(g, 1);
  cvec ch(sg.ncomplex()), acc(sg.ncomplex(), {0, 0});
  for (int axis = 0; axis < g.d; ++axis) {
    sg.forward(u.comp(axis), ch.data());
    for (std::size_t c = 0; c < sg.ncomplex(); ++c) {
      double k[3];
      wavevector(sg, c, k);
      acc[c] += std::complex<double>(0, k[axis]) * ch[c];
    }
  }
  sg.backward(acc.data(), out.comp(0));
  return out;
}

PeriodicField strain(SpectralGrid& sg, const PeriodicField& u) {
  const GridSpec& g = u.grid;
  PeriodicField out(g, sym_comps(g.d));
  std::vector<cvec> uh(g.d, cvec(sg.ncomplex()));
  for (int a = 0; a < g.d; ++a) sg.forward(u.comp(a), uh[a].data());
  cvec work(sg.ncomplex());
  for (int i = 0; i < g.d; ++i)
    for (int j = i; j < g.d; ++j) {
      for (std::size_t c = 0; c < sg.ncomplex(); ++c) {
        double k[3];
        wavevector(sg, c, k);
        work[c] = std::complex<double>(0, 0.5) * (k[j] * uh[i][c] + k[i] * uh[j][c]);
      }
      sg.backward(work.data(), out.comp(sym_index(i, j, g.d)));
    }
  return out;
}

PeriodicField divergence_sym(SpectralGrid& sg, const PeriodicField& t) {
  const GridSpec& g = t.grid;
  PeriodicField out(g, g.d);
  std::vector<cvec> th(t.comps, cvec(sg.ncomplex()));
  for (int c = 0; c < t.comps; ++c) sg.forward(t.comp(c), th[c].data());
  cvec acc(sg.ncomplex());
  for (int i = 0; i < g.d; ++i) {
    std::fill(acc.begin(), acc.end(), std::complex<double>(0, 0));
    for (int j = 0; j < g.d; ++j) {
      const cvec& tij = th[sym_index(i, j, g.d)];
      for (std::size_t c = 0; c < sg.ncomplex(); ++c) {
        double k[3];
        wavevector(sg, c, k);
        acc[c] += std::complex<double>(0, k[j]) * tij[c];
      }
    }
    sg.backward(acc.data(), out.comp(i));
  }
  return out;
}

double grad_sq_realspace(SpectralGrid& sg, const PeriodicField& u) {
  double s = 0;
  for (int a = 0; a < u.comps; ++a) {
    PeriodicField comp_view(u.grid, 1);
    std::memcpy(comp_view.comp(0), u.comp(a), u.grid.nodes() * sizeof(double));
    PeriodicField gr = gradient(sg, comp_view);
    for (double v : gr.data) s += v * v;
  }
  return s * u.grid.cell_volume();
}

double grad_sq_fourier(SpectralGrid& sg, const PeriodicField& u) {
  const GridSpec& g = u.grid;
  cvec ch(sg.ncomplex());
  double total = 0;
  const double norm = std::pow(g.L, g.d) / std::pow(static_cast<double>(g.nodes()), 2);
  for (int a = 0; a < u.comps; ++a) {
    sg.forward(u.comp(a), ch.data());
    for (std::size_t c = 0; c < sg.ncomplex(); ++c) {
      int m[3];
      sg.complex_coords(c, m);
      double k[3];
      wavevector(sg, c, k);
      double k2 = 0;
      for (int i = 0; i < g.d; ++i) k2 += k[i] * k[i];
      int mlast = m[g.d - 1];
      double w = (mlast == 0 || (g.n % 2 == 0 && mlast == g.n / 2)) ? 1.0 : 2.0;
      total += w * k2 * std::norm(ch[c]);
    }
  }
  return total * norm;
}

double hseminorm(SpectralGrid& sg, const PeriodicField& u) {
  return std::sqrt(grad_sq_fourier(sg, u));
}

double l2norm(const PeriodicField& u) { return u.l2(); }

StokesResult solve_stokes_periodic(SpectralGrid& sg, const PeriodicField& f) {
  const GridSpec& g = f.grid;
  if (f.comps != g.d) throw ConfigError("solve_stokes_periodic: f must be a vector field");
  StokesResult res;
  res.u = PeriodicField(g, g.d);
  res.P = PeriodicField(g, 1);

  std::vector<cvec> fh(g.d, cvec(sg.ncomplex()));
  for (int a = 0; a < g.d; ++a) sg.forward(f.comp(a), fh[a].data());
  const double nn = static_cast<double>(g.nodes());
  for (int a = 0; a < g.d; ++a) res.dropped_mean_force[a] = fh[a][0].real() / nn;

  std::vector<cvec> uh(g.d, cvec(sg.ncomplex(), {0, 0}));
  cvec ph(sg.ncomplex(), {0, 0});
  for (std::size_t c = 0; c < sg.ncomplex(); ++c) {
    double k[3];
    wavevector(sg, c, k);
    double k2 = 0;
    for (int i = 0; i < g.d; ++i) k2 += k[i] * k[i];
    if (k2 == 0.0 || sg.nyquist(c)) continue;
    std::complex<double> kf(0, 0);
    for (int i = 0; i < g.d; ++i) kf += k[i] * fh[i][c];
    ph[c] = std::complex<double>(0, -1) * kf / k2;
    for (int i = 0; i < g.d; ++i) uh[i][c] = (fh[i][c] - k[i] * kf / k2) / k2;
  }
  for (int a = 0; a < g.d; ++a) sg.backward(uh[a].data(), res.u.comp(a));
  sg.backward(ph.data(), res.P.comp(0));
  return res;
}

StokesResult solve_stokes_anisotropic(SpectralGrid& sg, const PeriodicField& f,
                                      const std::vector<double>& B) {
  const GridSpec& g = f.grid;
  const int d = g.d;
  const auto basis = symtf_basis(d);
  const int m = static_cast<int>(basis.size());
  if (static_cast<int>(B.size()) != m * m)
    throw ConfigError("solve_stokes_anisotropic: B must be m x m in the symtf basis");

  auto apply_B = [&](const Mat& M) {
    Mat out;
    for (int p = 0; p < m; ++p) {
      double cp = 0;
      for (int q = 0; q < m; ++q) cp += B[p * m + q] * frob(M, basis[q], d);
      out = out + cp * basis[p];
    }
    return out;
  };

  StokesResult res;
  res.u = PeriodicField(g, d);
  res.P = PeriodicField(g, 1);
  std::vector<cvec> fh(d, cvec(sg.ncomplex()));
  for (int a = 0; a < d; ++a) sg.forward(f.comp(a), fh[a].data());
  const double nn = static_cast<double>(g.nodes());
  for (int a = 0; a < d; ++a) res.dropped_mean_force[a] = fh[a][0].real() / nn;

  std::vector<cvec> uh(d, cvec(sg.ncomplex(), {0, 0}));
  cvec ph(sg.ncomplex(), {0, 0});
  for (std::size_t c = 0; c < sg.ncomplex(); ++c) {
    double kk[3];
    wavevector(sg, c, kk);
    double k2 = 0;
    for (int i = 0; i < d; ++i) k2 += kk[i] * kk[i];
    if (k2 == 0.0 || sg.nyquist(c)) continue;
    Vec k;
    for (int i = 0; i < d; ++i) k[i] = kk[i];

    // A(k) w = 2 B[Sym(w x k)] k, restricted to the k-perp subspace
    Vec khat = (1.0 / std::sqrt(k2)) * k;
    Vec perp[2];
    if (d == 2) {
      perp[0][0] = -khat[1];
      perp[0][1] = khat[0];
    } else {
      Vec t;
      t[std::abs(khat[0]) < 0.9 ? 0 : 1] = 1.0;
      // Gram-Schmidt two tangent directions
      Vec p1 = t - dot(t, khat, 3) * khat;
      p1 = (1.0 / norm(p1, 3)) * p1;
      Vec p2;
      p2[0] = khat[1] * p1[2] - khat[2] * p1[1];
      p2[1] = khat[2] * p1[0] - khat[0] * p1[2];
      p2[2] = khat[0] * p1[1] - khat[1] * p1[0];
      perp[0] = p1;
      perp[1] = p2;
    }
    const int np = d - 1;
    double Amat[2][2];
    Vec Ap[2];
    for (int a = 0; a < np; ++a) {
      Mat sy = sym(outer(perp[a], k, d), d);
      Ap[a] = 2.0 * matvec(apply_B(sy), k, d);
    }
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < np; ++b) Amat[a][b] = dot(perp[a], Ap[b], d);

    std::complex<double> rhs[2];
    for (int a = 0; a < np; ++a) {
      rhs[a] = {0, 0};
      for (int i = 0; i < d; ++i) rhs[a] += perp[a][i] * fh[i][c];
    }
    std::complex<double> coef[2];
    if (np == 1) {
      coef[0] = rhs[0] / Amat[0][0];
    } else {
      std::complex<double> det = Amat[0][0] * Amat[1][1] - Amat[0][1] * Amat[1][0];
      coef[0] = (rhs[0] * Amat[1][1] - rhs[1] * Amat[0][1]) / det;
      coef[1] = (Amat[0][0] * rhs[1] - Amat[1][0] * rhs[0]) / det;
    }
    std::complex<double> uvec[3] = {{0, 0}, {0, 0}, {0, 0}};
    for (int a = 0; a < np; ++a)
      for (int i = 0; i < d; ++i) uvec[i] += coef[a] * perp[a][i];
    for (int i = 0; i < d; ++i) uh[i][c] = uvec[i];

    // grad P picks up the k-parallel part of f - A u
    std::complex<double> kres(0, 0);
    std::complex<double> Au[3] = {{0, 0}, {0, 0}, {0, 0}};
    for (int a = 0; a < np; ++a)
      for (int i = 0; i < d; ++i) Au[i] += coef[a] * Ap[a][i];
    for (int i = 0; i < d; ++i) kres += k[i] * (fh[i][c] - Au[i]);
    ph[c] = std::complex<double>(0, -1) * kres / k2;
  }
  for (int a = 0; a < d; ++a) sg.backward(uh[a].data(), res.u.comp(a));
  sg.backward(ph.data(), res.P.comp(0));
  return res;
}

PeriodicField mollify(SpectralGrid& sg, const PeriodicField& f, const Mollifier& chi) {
  const GridSpec& g = f.grid;
  if (chi.delta == 0) return f;
  if (chi.delta < 2 * g.h())
    throw ConfigError("mollify: delta must be at least 2 grid cells");

  // rasterize the radial kernel around the origin node, wrapped
  PeriodicField ker(g, 1);
  const double delta = chi.delta;
  const std::size_t nn = g.nodes();
  double mass = 0;
  for (std::size_t i = 0; i < nn; ++i) {
    Vec x = g.node_coord(i);
    double r2 = 0;
    for (int a = 0; a < g.d; ++a) r2 += x[a] * x[a];
    double s2 = r2 / (delta * delta);
    double v = (s2 < 1.0) ? std::pow(1.0 - s2, 3) : 0.0;
    ker.comp(0)[i] = v;
    mass += v;
  }
  if (mass <= 0) throw ConfigError("mollify: empty kernel support");
  for (std::size_t i = 0; i < nn; ++i) ker.comp(0)[i] /= mass;  // discrete sum 1

  cvec kh(sg.ncomplex()), ch(sg.ncomplex());
  sg.forward(ker.comp(0), kh.data());
  PeriodicField out(g, f.comps);
  for (int c = 0; c < f.comps; ++c) {
    sg.forward(f.comp(c), ch.data());
    for (std::size_t i = 0; i < sg.ncomplex(); ++i) ch[i] *= kh[i];
    sg.backward(ch.data(), out.comp(c));
  }
  return out;
}

PeriodicField one_mode_field(const GridSpec& g, int comps, int comp,
                             const int mode[3], double amp) {
  PeriodicField f(g, comps);
  const std::size_t nn = g.nodes();
  for (std::size_t i = 0; i < nn; ++i) {
    Vec x = g.node_coord(i);
    double phase = 0;
    for (int a = 0; a < g.d; ++a) phase += 2.0 * M_PI * mode[a] * x[a] / g.L;
    f.comp(comp)[i] = amp * std::sin(phase);
  }
  return f;
}

}  // namespace actsusp
