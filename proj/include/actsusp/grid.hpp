// grid.hpp
//
// Uniform periodic grids on [-L/2, L/2)^d and the FFT machinery used by
// every solver: spectral derivatives, Leray projection, the free Stokes
// kernel, and kernel mollification. Fields are real, stored component-major.

#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "actsusp/util.hpp"

namespace actsusp {

struct GridSpec {
  int d = 2;
  double L = 1.0;
  int n = 64;  // nodes per side

  std::size_t nodes() const {
    std::size_t t = 1;
    for (int i = 0; i < d; ++i) t *= n;
    return t;
  }
  double h() const { return L / n; }
  double cell_volume() const { return std::pow(h(), d); }
  bool operator==(const GridSpec& o) const {
    return d == o.d && L == o.L && n == o.n;
  }

  // node index <-> coordinates, x in [-L/2, L/2)
  Vec node_coord(std::size_t idx) const;
  std::size_t node_index(const int* c) const;
};

// rank: 0 scalar (1 comp), 1 vector (d comps), 2 sym matrix packed
// (11,22,[33,]12[,13,23]) or full matrix (d*d comps)
struct PeriodicField {
  GridSpec grid;
  int comps = 1;
  std::vector<double> data;

  PeriodicField() = default;
  PeriodicField(GridSpec g, int c) : grid(g), comps(c), data(c * g.nodes(), 0.0) {}

  double* comp(int c) { return data.data() + static_cast<std::size_t>(c) * grid.nodes(); }
  const double* comp(int c) const {
    return data.data() + static_cast<std::size_t>(c) * grid.nodes();
  }
  double& at(int c, std::size_t idx) { return comp(c)[idx]; }
  double at(int c, std::size_t idx) const { return comp(c)[idx]; }

  Vec mean() const;  // per-component mean (first 3 comps)
  double l2() const;
  PeriodicField& operator+=(const PeriodicField& o);
  PeriodicField& operator-=(const PeriodicField& o);
  PeriodicField& operator*=(double s);
};

inline int sym_comps(int d) { return d * (d + 1) / 2; }
// packed index of the (i,j) entry of a symmetric field
int sym_index(int i, int j, int d);

// Per-grid FFT workspace. Not thread safe: concurrent solves must use
// separate instances (plan creation is serialized internally).
class SpectralGrid {
 public:
  explicit SpectralGrid(GridSpec g);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  const GridSpec& spec() const { return g_; }
  std::size_t ncomplex() const { return ncomplex_; }

  // unnormalized r2c forward; backward includes the 1/n^d factor
  void forward(const double* in, std::complex<double>* out);
  void backward(const std::complex<double>* in, double* out);

  // signed wavevector components (2*pi*m/L); the Nyquist plane is flagged so
  // multipliers can zero it
  const std::vector<double>& kaxis(int axis) const { return k_[axis]; }
  void complex_coords(std::size_t cidx, int* m) const;
  double k2(std::size_t cidx) const;
  bool nyquist(std::size_t cidx) const;

  struct Impl;

 private:
  GridSpec g_;
  std::size_t ncomplex_;
  std::vector<double> k_[3];
  std::unique_ptr<Impl> impl_;
};

// ---- spectral operators ------------------------------------------------

// grad of a scalar -> vector; divergence of a vector -> scalar
PeriodicField gradient(SpectralGrid& sg, const PeriodicField& f);
PeriodicField divergence(SpectralGrid& sg, const PeriodicField& u);
// symmetric gradient of a vector, packed
PeriodicField strain(SpectralGrid& sg, const PeriodicField& u);
// divergence of a packed symmetric matrix field -> vector
PeriodicField divergence_sym(SpectralGrid& sg, const PeriodicField& t);

double hseminorm(SpectralGrid& sg, const PeriodicField& u);  // ||grad u||_L2
double l2norm(const PeriodicField& u);                       // sqrt(int |u|^2)
// two routes to int |grad u|^2: real-space quadrature and Fourier Parseval
double grad_sq_realspace(SpectralGrid& sg, const PeriodicField& u);
double grad_sq_fourier(SpectralGrid& sg, const PeriodicField& u);

struct StokesResult {
  PeriodicField u;  // divergence free, mean zero
  PeriodicField P;  // mean zero over the torus
  Vec dropped_mean_force;
};

// free periodic Stokes: -lap u + grad P = f, div u = 0. The zero mode of f
// is projected out and reported.
StokesResult solve_stokes_periodic(SpectralGrid& sg, const PeriodicField& f);

// anisotropic constant-coefficient Stokes: -div(2 B[D(u)]) + grad P = f with
// B a symmetric positive linear map given in the symtf basis (m x m,
// row-major).
StokesResult solve_stokes_anisotropic(SpectralGrid& sg, const PeriodicField& f,
                                      const std::vector<double>& B);

struct Mollifier {
  double delta = 0;  // support radius; 0 = identity
};

// smooth compactly supported kernel with exact discrete unit mass; preserves
// the field mean exactly. Throws when delta < 2 grid cells.
PeriodicField mollify(SpectralGrid& sg, const PeriodicField& f, const Mollifier& chi);

// one-mode helper field: amp * sin(2 pi m.x / L) on component `comp`
PeriodicField one_mode_field(const GridSpec& g, int comps, int comp,
                             const int mode[3], double amp);

}  // namespace actsusp
