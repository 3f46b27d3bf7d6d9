#include "actsusp/basis.hpp"

#include <algorithm>
#include <cmath>

namespace actsusp {

std::vector<Mat> symtf_basis(int d) {
  const double s2 = 1.0 / std::sqrt(2.0);
  std::vector<Mat> b;
  if (d == 2) {
    Mat e1;
    e1(0, 0) = s2;
    e1(1, 1) = -s2;
    Mat e2;
    e2(0, 1) = e2(1, 0) = s2;
    b = {e1, e2};
  } else if (d == 3) {
    const double s6 = 1.0 / std::sqrt(6.0);
    Mat e1;
    e1(0, 0) = s2;
    e1(1, 1) = -s2;
    Mat e2;
    e2(0, 0) = s6;
    e2(1, 1) = s6;
    e2(2, 2) = -2 * s6;
    Mat e3;
    e3(0, 1) = e3(1, 0) = s2;
    Mat e4;
    e4(0, 2) = e4(2, 0) = s2;
    Mat e5;
    e5(1, 2) = e5(2, 1) = s2;
    b = {e1, e2, e3, e4, e5};
  } else {
    throw std::invalid_argument("symtf_basis: d must be 2 or 3");
  }
  return b;
}

std::vector<double> symtf_coords(const Mat& m, int d) {
  Mat md = dev(m, d);
  auto basis = symtf_basis(d);
  std::vector<double> c(basis.size());
  for (std::size_t q = 0; q < basis.size(); ++q) c[q] = frob(md, basis[q], d);
  return c;
}

Mat symtf_from_coords(const std::vector<double>& c, int d) {
  auto basis = symtf_basis(d);
  if (c.size() != basis.size())
    throw std::invalid_argument("symtf_from_coords: wrong coefficient count");
  Mat m;
  for (std::size_t q = 0; q < basis.size(); ++q) m = m + c[q] * basis[q];
  return m;
}

Mat shear_strain(double s, int d) {
  (void)d;
  Mat e;
  e(0, 1) = e(1, 0) = 0.5 * s;
  return e;
}

namespace {

// cyclic Jacobi on the dxd block; returns eigenvalues and column eigenvectors
void jacobi_eig(const Mat& m, int d, double eval[3], Mat& evec) {
  Mat a = m;
  evec = Mat{};
  for (int i = 0; i < d; ++i) evec(i, i) = 1.0;
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < d; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < d; ++k) {
          double vkp = evec(k, p), vkq = evec(k, q);
          evec(k, p) = c * vkp - s * vkq;
          evec(k, q) = s * vkp + c * vkq;
        }
      }
  }
  for (int i = 0; i < d; ++i) eval[i] = a(i, i);
}

}  // namespace

Vec top_eigenvector(const Mat& e, int d, bool* degenerate) {
  Mat es = sym(e, d);
  double eval[3];
  Mat evec;
  jacobi_eig(es, d, eval, evec);
  int order[3] = {0, 1, 2};
  std::sort(order, order + d, [&](int i, int j) { return eval[i] > eval[j]; });
  double scale = 0;
  for (int i = 0; i < d; ++i) scale = std::max(scale, std::abs(eval[i]));
  bool degen = (scale < 1e-14) ||
               (eval[order[0]] - eval[order[1]] <= 1e-10 * std::max(scale, 1e-30));
  if (degenerate) *degenerate = degen;
  Vec v;
  if (degen) {
    // deterministic tie-break: project e1 (then e2, e3) onto the top
    // eigenspace and take the first projection with nonzero length
    double gap_tol = 1e-10 * std::max(scale, 1e-30);
    for (int trial = 0; trial < d; ++trial) {
      Vec cand;
      for (int i = 0; i < d; ++i) {
        double coef = 0;
        for (int q = 0; q < d; ++q) {
          if (eval[order[0]] - eval[q] <= gap_tol) coef += evec(trial, q) * evec(i, q);
        }
        cand[i] = coef;
      }
      if (norm(cand, d) > 1e-8) {
        v = cand;
        break;
      }
    }
    if (norm(v, d) < 1e-8) {
      v = Vec{};
      v[0] = 1.0;
    }
  } else {
    for (int i = 0; i < d; ++i) v[i] = evec(i, order[0]);
  }
  v = (1.0 / norm(v, d)) * v;
  // sign convention: first component of largest magnitude is positive
  int imax = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(v[i]) > std::abs(v[imax]) + 1e-14) imax = i;
  if (v[imax] < 0) v = -1.0 * v;
  return v;
}

}  // namespace actsusp
