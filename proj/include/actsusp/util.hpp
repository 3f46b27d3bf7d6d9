// util.hpp
//
// Small shared utilities: fixed-size vector/matrix helpers for d=2,3,
// deterministic RNG streams, a work-queue parallel_for, and FNV hashing.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace actsusp {

// ---- errors ----------------------------------------------------------

struct SolverError : std::runtime_error {
  std::vector<double> residual_history;
  SolverError(const std::string& msg, std::vector<double> hist = {})
      : std::runtime_error(msg), residual_history(std::move(hist)) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- small dense vectors / matrices (d = 2 or 3, padded to 3) --------

struct Vec {
  std::array<double, 3> v{0.0, 0.0, 0.0};
  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
};

struct Mat {
  // row-major, padded to 3x3
  std::array<double, 9> a{};
  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }
};

inline Vec operator+(Vec a, const Vec& b) {
  for (int i = 0; i < 3; ++i) a[i] += b[i];
  return a;
}
inline Vec operator-(Vec a, const Vec& b) {
  for (int i = 0; i < 3; ++i) a[i] -= b[i];
  return a;
}
inline Vec operator*(double s, Vec a) {
  for (int i = 0; i < 3; ++i) a[i] *= s;
  return a;
}
inline double dot(const Vec& a, const Vec& b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const Vec& a, int d) { return std::sqrt(dot(a, a, d)); }

inline Mat operator+(Mat a, const Mat& b) {
  for (int i = 0; i < 9; ++i) a.a[i] += b.a[i];
  return a;
}
inline Mat operator-(Mat a, const Mat& b) {
  for (int i = 0; i < 9; ++i) a.a[i] -= b.a[i];
  return a;
}
inline Mat operator*(double s, Mat a) {
  for (int i = 0; i < 9; ++i) a.a[i] *= s;
  return a;
}
inline Vec matvec(const Mat& m, const Vec& x, int d) {
  Vec r;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r[i] += m(i, j) * x[j];
  return r;
}
inline double frob(const Mat& a, const Mat& b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s += a(i, j) * b(i, j);
  return s;
}
inline double frob_norm(const Mat& a, int d) { return std::sqrt(frob(a, a, d)); }
inline double trace(const Mat& a, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a(i, i);
  return s;
}
inline Mat sym(const Mat& a, int d) {
  Mat r;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
  return r;
}
// symmetric trace-free part
inline Mat dev(const Mat& a, int d) {
  Mat r = sym(a, d);
  double t = trace(r, d) / d;
  for (int i = 0; i < d; ++i) r(i, i) -= t;
  return r;
}
inline Mat outer(const Vec& a, const Vec& b, int d) {
  Mat r;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r(i, j) = a[i] * b[j];
  return r;
}

// volume of the unit ball
inline double unit_ball_volume(int d) {
  return d == 2 ? M_PI : 4.0 * M_PI / 3.0;
}

// ---- deterministic RNG ------------------------------------------------
//
// All sampling goes through Rng so that runs are reproducible from the
// config seed. Streams are derived by hashing (seed, salt...) so that
// realizations and particles get independent, deterministic substreams.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_stream(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = 0x243f6a8885a308d3ULL;
  for (auto k : keys) {
    s ^= k + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    splitmix64(s);
  }
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  static Rng stream(std::initializer_list<std::uint64_t> keys) {
    return Rng(hash_stream(keys));
  }

  // uniform in [0,1)
  double uniform() {
    return (eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Poisson counts; inversion for small means, PTRS rejection for large.
  int poisson(double mean);

  // von Mises on the circle (d=2) / von Mises-Fisher on the sphere (d=3),
  // mean direction mu, concentration kappa. kappa=0 gives the uniform law.
  Vec von_mises_fisher(const Vec& mu, double kappa, int d);

  Vec uniform_direction(int d);

 private:
  std::mt19937_64 eng_;
};

// ---- parallel_for ------------------------------------------------------
//
// Runs tasks 0..n-1 on `workers` threads. Tasks write into caller-indexed
// slots, so reductions stay deterministic regardless of scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task);

// FNV-1a, used to fingerprint resolved configs in reports.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double x);  // shortest round-trip decimal

}  // namespace actsusp
