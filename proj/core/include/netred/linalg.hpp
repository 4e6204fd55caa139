// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NETRED_LINALG_HPP
#define NETRED_LINALG_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace netred
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Residual tolerance used by the factorization self-checks.
inline constexpr double kFactorizationTolerance = 1e-10;

/// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const Matrix &a, const char *what);

/// Kronecker product a ⊗ b.
Matrix kron(const Matrix &a, const Matrix &b);

/// Block-diagonal matrix diag(a, b).
Matrix block_diag(const Matrix &a, const Matrix &b);

struct SymmetricEigen
{
  Vector values;   ///< ascending
  Matrix vectors;  ///< columns are M-orthonormal
};

/// Generalized symmetric-definite eigenproblem A v = λ M v.
SymmetricEigen sym_gen_eig(const Matrix &a, const Matrix &m);

struct PivotedQr
{
  Matrix q;                        ///< rows x k, orthonormal columns, k = min(rows, cols)
  Matrix r;                        ///< k x cols, upper trapezoidal
  std::vector<std::size_t> pivots; ///< A(:, pivots[j]) is the j-th column of A Π
};

/// Householder QR with column pivoting, A Π = Q R with |R_11| >= |R_22| >= ...
PivotedQr qr_column_pivot(const Matrix &a);

struct Svd
{
  Matrix u;      ///< thin left singular vectors
  Vector sigma;  ///< descending
  Matrix v;      ///< thin right singular vectors
};

/// Thin SVD.  Each left singular vector is signed so that its largest-magnitude
/// entry is positive (the matching right vector is flipped with it).
Svd svd(const Matrix &a);

/// Orthonormal basis of the column span of a (thin QR).
Matrix orthonormalize(const Matrix &a);

/// Eigenvalues of the pencil (A, E) computed as eig(E⁻¹A).
ComplexVector pencil_eigenvalues(const Matrix &a, const Matrix &e);

/// Largest real part among the eigenvalues of (A, E); -inf for empty pencils.
double spectral_abscissa(const Matrix &a, const Matrix &e);

/// Solves A X + X B = C for X.  A and B must not share eigenvalues with opposite sign.
/// Uses complex Schur forms of both coefficients and column-wise substitution.
Matrix solve_sylvester(const Matrix &a, const Matrix &b, const Matrix &c);

/// Solves the generalized Lyapunov equation A X Eᵀ + E X Aᵀ + B Bᵀ = 0.
///
/// The pencil (A, E) must be Hurwitz; otherwise NotHurwitz is thrown naming the
/// offending eigenvalue.  The equation is reduced to the standard form
/// (E⁻¹A) X + X (E⁻¹A)ᵀ + E⁻¹BBᵀE⁻ᵀ = 0 and solved by Bartels–Stewart.  When the
/// residual check fails and the dimension is at most 50, a dense Kronecker solve is
/// used instead.  The result is symmetrized.
Matrix solve_gen_lyapunov(const Matrix &a, const Matrix &e, const Matrix &b);

/// Dense Kronecker-product solve of A X Eᵀ + E X Aᵀ + Q = 0 (dimension^2 unknowns).
Matrix solve_gen_lyapunov_kronecker(const Matrix &a, const Matrix &e, const Matrix &q);

/// Real orthonormal basis of an invariant subspace of F = E⁻¹A together with
/// a complementary one; used to split a pencil into stable and unstable parts.
struct SpectralSplit
{
  Matrix right;          ///< [T_stable, T_unstable], n x n
  Matrix left;           ///< S with Sᵀ E T = I and Sᵀ A T block diagonal
  std::size_t n_stable;  ///< number of leading stable columns
};

/// Splits (A, E) into the part with Re λ < threshold and the rest, using an
/// ordered complex Schur decomposition.
SpectralSplit split_pencil(const Matrix &a, const Matrix &e, double threshold = -1e-9);

}  // namespace netred

#endif  // NETRED_LINALG_HPP
