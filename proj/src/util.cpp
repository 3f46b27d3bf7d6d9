#include "actsusp/util.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstring>
#include <mutex>

namespace actsusp {

int Rng::poisson(double mean) {
  if (mean < 0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0) return 0;
  if (mean < 30.0) {
    // Knuth inversion by product of uniforms
    double limit = std::exp(-mean), prod = uniform();
    int n = 0;
    while (prod > limit) {
      ++n;
      prod *= uniform();
    }
    return n;
  }
  // Hoermann's PTRS transformed rejection
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    double u = uniform() - 0.5;
    double v = uniform();
    double us = 0.5 - std::abs(u);
    int k = static_cast<int>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
      return k;
    }
  }
}

Vec Rng::uniform_direction(int d) {
  if (d == 2) {
    double th = uniform(0, 2 * M_PI);
    Vec e;
    e[0] = std::cos(th);
    e[1] = std::sin(th);
    return e;
  }
  // marginal of the uniform sphere measure: cos(polar) uniform in [-1,1]
  double c = uniform(-1, 1), s = std::sqrt(std::max(0.0, 1 - c * c));
  double ph = uniform(0, 2 * M_PI);
  Vec e;
  e[0] = s * std::cos(ph);
  e[1] = s * std::sin(ph);
  e[2] = c;
  return e;
}

namespace {

// Best-Fisher sampler for the von Mises angle around 0.
double von_mises_angle(Rng& rng, double kappa) {
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  while (true) {
    double z = std::cos(M_PI * rng.uniform());
    double f = (1.0 + r * z) / (r + z);
    double c = kappa * (r - f);
    double u = rng.uniform();
    if (c * (2.0 - c) - u > 0 || std::log(c / u) + 1.0 - c >= 0) {
      return (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::acos(std::clamp(f, -1.0, 1.0));
    }
  }
}

}  // namespace

Vec Rng::von_mises_fisher(const Vec& mu, double kappa, int d) {
  if (kappa <= 0) return uniform_direction(d);
  if (d == 2) {
    double base = std::atan2(mu[1], mu[0]);
    double th = base + von_mises_angle(*this, kappa);
    Vec e;
    e[0] = std::cos(th);
    e[1] = std::sin(th);
    return e;
  }
  // Wood's method: sample the cosine w of the polar angle, then a uniform
  // azimuth in the plane orthogonal to mu.
  double w;
  {
    double b = -kappa + std::sqrt(kappa * kappa + 1.0);
    double x0 = (1.0 - b) / (1.0 + b);
    double c = kappa * x0 + 2.0 * std::log(1.0 - x0 * x0);
    while (true) {
      double z = [&] {  // Beta(1,1)=U as dim-2 betas for d=3 reduce to uniform
        return uniform();
      }();
      w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      double u = uniform();
      if (kappa * w + 2.0 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }
  }
  // orthonormal frame around mu
  Vec m = (1.0 / std::max(norm(mu, 3), 1e-300)) * mu;
  Vec t1;
  if (std::abs(m[0]) < 0.9) {
    t1[0] = 0; t1[1] = -m[2]; t1[2] = m[1];
  } else {
    t1[0] = -m[2]; t1[1] = 0; t1[2] = m[0];
  }
  double n1 = norm(t1, 3);
  t1 = (1.0 / n1) * t1;
  Vec t2;
  t2[0] = m[1] * t1[2] - m[2] * t1[1];
  t2[1] = m[2] * t1[0] - m[0] * t1[2];
  t2[2] = m[0] * t1[1] - m[1] * t1[0];
  double ph = uniform(0, 2 * M_PI);
  double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  return w * m + (s * std::cos(ph)) * t1 + (s * std::sin(ph)) * t2;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  if (n == 0) return;
  workers = std::max(1, workers);
  if (workers == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mtx;
  auto body = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::size_t nthreads = std::min<std::size_t>(workers, n);
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace actsusp
