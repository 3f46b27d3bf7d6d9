// basis.hpp
//
// The space of symmetric trace-free d x d matrices ("deviatoric strains").
// All effective tensors are represented by coefficients in the orthonormal
// Frobenius basis returned by symtf_basis().

#pragma once

#include <vector>

#include "actsusp/util.hpp"

namespace actsusp {

// dimension of the deviatoric strain space
inline int symtf_dim(int d) { return d * (d + 1) / 2 - 1; }

// Frobenius-orthonormal basis of symmetric trace-free matrices.
// d=2: {diag(1,-1)/sqrt2, shear12}; d=3 adds the second diagonal mode and
// the 13/23 shears.
std::vector<Mat> symtf_basis(int d);

// coefficients of dev(M) in the basis
std::vector<double> symtf_coords(const Mat& m, int d);
Mat symtf_from_coords(const std::vector<double>& c, int d);

// the standard shear s/2 (e1 x e2 + e2 x e1)
Mat shear_strain(double s, int d);

// top eigenvector of a symmetric matrix, with a deterministic lexicographic
// tie-break on (near-)degenerate spectra; `degenerate` reports the tie.
Vec top_eigenvector(const Mat& e, int d, bool* degenerate = nullptr);

}  // namespace actsusp
