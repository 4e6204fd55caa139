// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "netred/error.hpp"

namespace netred
{

namespace
{

constexpr double kHurwitzMargin = -1e-9;

[[noreturn]] void throw_not_hurwitz(Complex lambda)
{
  std::ostringstream os;
  os.precision(17);
  os << "pencil is not Hurwitz: eigenvalue " << lambda.real()
     << (lambda.imag() < 0 ? " - " : " + ") << std::abs(lambda.imag()) << "i";
  throw NotHurwitz(os.str(), lambda.real(), lambda.imag());
}

// Swaps the diagonal entries k and k+1 of an upper triangular Schur factor,
// updating the accumulated unitary basis.
void swap_schur_diagonal(ComplexMatrix &t, ComplexMatrix &u, Eigen::Index k)
{
  const Complex a = t(k, k);
  const Complex b = t(k + 1, k + 1);
  const Complex x = t(k, k + 1);
  Complex q0 = x;
  Complex q1 = b - a;
  const double r = std::hypot(std::abs(q0), std::abs(q1));
  if (r == 0.0)
  {
    return;
  }
  q0 /= r;
  q1 /= r;
  Eigen::Matrix2cd g;
  g << q0, -std::conj(q1), q1, std::conj(q0);
  t.middleCols(k, 2) = t.middleCols(k, 2) * g;
  t.middleRows(k, 2) = g.adjoint() * t.middleRows(k, 2);
  u.middleCols(k, 2) = u.middleCols(k, 2) * g;
  t(k + 1, k) = Complex(0.0, 0.0);
}

// Reorders a complex Schur form so that entries satisfying pred come first.
// Returns the number of leading selected entries.
template <typename Pred>
Eigen::Index order_schur(ComplexMatrix &t, ComplexMatrix &u, Pred pred)
{
  const Eigen::Index n = t.rows();
  Eigen::Index placed = 0;
  for (Eigen::Index j = 0; j < n; ++j)
  {
    if (!pred(t(j, j)))
    {
      continue;
    }
    for (Eigen::Index k = j; k > placed; --k)
    {
      swap_schur_diagonal(t, u, k - 1);
    }
    ++placed;
  }
  return placed;
}

// Real orthonormal basis for a conjugate-closed complex subspace.
Matrix real_span(const ComplexMatrix &q)
{
  const Eigen::Index k = q.cols();
  if (k == 0)
  {
    return Matrix(q.rows(), 0);
  }
  Matrix stacked(q.rows(), 2 * k);
  stacked << q.real(), q.imag();
  Eigen::JacobiSVD<Matrix> dec(stacked, Eigen::ComputeThinU);
  Matrix basis = dec.matrixU().leftCols(k);
  for (Eigen::Index j = 0; j < k; ++j)
  {
    Eigen::Index idx = 0;
    basis.col(j).cwiseAbs().maxCoeff(&idx);
    if (basis(idx, j) < 0.0)
    {
      basis.col(j) *= -1.0;
    }
  }
  return basis;
}

}  // namespace

void require_finite(const Matrix &a, const char *what)
{
  if (!a.allFinite())
  {
    throw InvalidArgument(std::string(what) + " contains non-finite entries");
  }
}

Matrix kron(const Matrix &a, const Matrix &b)
{
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
    {
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return k;
}

Matrix block_diag(const Matrix &a, const Matrix &b)
{
  Matrix d = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  d.topLeftCorner(a.rows(), a.cols()) = a;
  d.bottomRightCorner(b.rows(), b.cols()) = b;
  return d;
}

SymmetricEigen sym_gen_eig(const Matrix &a, const Matrix &m)
{
  require_finite(a, "sym_gen_eig: A");
  require_finite(m, "sym_gen_eig: M");
  if (a.rows() != a.cols() || m.rows() != m.cols() || a.rows() != m.rows())
  {
    throw InvalidArgument("sym_gen_eig: shape mismatch");
  }
  const double scale = std::max(1.0, a.norm());
  if ((a - a.transpose()).norm() > 1e-10 * scale)
  {
    throw InvalidArgument("sym_gen_eig: A is not symmetric");
  }
  if (a.rows() == 0)
  {
    return {};
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
  {
    throw InvalidArgument("sym_gen_eig: M is not symmetric positive definite");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(a, m);
  if (es.info() != Eigen::Success)
  {
    throw Error("sym_gen_eig: eigensolver failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

PivotedQr qr_column_pivot(const Matrix &a)
{
  require_finite(a, "qr_column_pivot");
  Eigen::ColPivHouseholderQR<Matrix> dec(a);
  const Eigen::Index k = std::min(a.rows(), a.cols());
  PivotedQr out;
  out.q = dec.householderQ() * Matrix::Identity(a.rows(), k);
  out.r = dec.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const auto &perm = dec.colsPermutation().indices();
  out.pivots.resize(static_cast<std::size_t>(a.cols()));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
  {
    out.pivots[static_cast<std::size_t>(j)] = static_cast<std::size_t>(perm(j));
  }
#ifndef NDEBUG
  Matrix ap(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
  {
    ap.col(j) = a.col(perm(j));
  }
  if ((ap - out.q * out.r).norm() > kFactorizationTolerance * std::max(1.0, a.norm()))
  {
    throw Error("qr_column_pivot: reconstruction residual too large");
  }
#endif
  return out;
}

Svd svd(const Matrix &a)
{
  require_finite(a, "svd");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Svd out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  for (Eigen::Index j = 0; j < out.u.cols(); ++j)
  {
    Eigen::Index idx = 0;
    out.u.col(j).cwiseAbs().maxCoeff(&idx);
    if (out.u(idx, j) < 0.0)
    {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
#ifndef NDEBUG
  const Matrix rec = out.u * out.sigma.asDiagonal() * out.v.transpose();
  if ((a - rec).norm() > kFactorizationTolerance * std::max(1.0, a.norm()))
  {
    throw Error("svd: reconstruction residual too large");
  }
#endif
  return out;
}

Matrix orthonormalize(const Matrix &a)
{
  Eigen::HouseholderQR<Matrix> dec(a);
  return dec.householderQ() * Matrix::Identity(a.rows(), std::min(a.rows(), a.cols()));
}

ComplexVector pencil_eigenvalues(const Matrix &a, const Matrix &e)
{
  if (a.rows() == 0)
  {
    return ComplexVector(0);
  }
  const Matrix f = e.partialPivLu().solve(a);
  Eigen::EigenSolver<Matrix> es(f, false);
  if (es.info() != Eigen::Success)
  {
    throw Error("pencil_eigenvalues: eigensolver failed");
  }
  return es.eigenvalues();
}

double spectral_abscissa(const Matrix &a, const Matrix &e)
{
  const ComplexVector ev = pencil_eigenvalues(a, e);
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
  {
    m = std::max(m, ev(i).real());
  }
  return m;
}

Matrix solve_sylvester(const Matrix &a, const Matrix &b, const Matrix &c)
{
  Eigen::ComplexSchur<Matrix> sa(a);
  Eigen::ComplexSchur<Matrix> sb(b);
  const ComplexMatrix &ta = sa.matrixT();
  const ComplexMatrix &tb = sb.matrixT();
  const ComplexMatrix &ua = sa.matrixU();
  const ComplexMatrix &ub = sb.matrixU();
  ComplexMatrix rhs = ua.adjoint() * c.cast<Complex>() * ub;
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  ComplexMatrix y(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
  {
    ComplexVector col = rhs.col(j);
    for (Eigen::Index k = 0; k < j; ++k)
    {
      col -= tb(k, j) * y.col(k);
    }
    ComplexMatrix lhs = ta;
    lhs.diagonal().array() += tb(j, j);
    y.col(j) = lhs.triangularView<Eigen::Upper>().solve(col);
  }
  return (ua * y * ub.adjoint()).real();
}

Matrix solve_gen_lyapunov_kronecker(const Matrix &a, const Matrix &e, const Matrix &q)
{
  const Eigen::Index n = a.rows();
  const Matrix k = kron(e, a) + kron(a, e);
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
  const Vector x = k.partialPivLu().solve(rhs);
  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

Matrix solve_gen_lyapunov(const Matrix &a, const Matrix &e, const Matrix &b)
{
  require_finite(a, "solve_gen_lyapunov: A");
  require_finite(e, "solve_gen_lyapunov: E");
  require_finite(b, "solve_gen_lyapunov: B");
  const Eigen::Index n = a.rows();
  if (a.cols() != n || e.rows() != n || e.cols() != n || b.rows() != n)
  {
    throw InvalidArgument("solve_gen_lyapunov: shape mismatch");
  }
  if (n == 0)
  {
    return Matrix(0, 0);
  }
  Eigen::PartialPivLU<Matrix> lu(e);
  const Matrix f = lu.solve(a);
  const Matrix g = lu.solve(b);
  const Matrix q = g * g.transpose();

  Eigen::ComplexSchur<Matrix> schur(f);
  const ComplexMatrix &t = schur.matrixT();
  const ComplexMatrix &u = schur.matrixU();
  for (Eigen::Index i = 0; i < n; ++i)
  {
    if (!(t(i, i).real() < kHurwitzMargin))
    {
      throw_not_hurwitz(t(i, i));
    }
  }

  // T Y + Y T^H = -U^H Q U, solved column by column from the right.
  const ComplexMatrix rhs = -(u.adjoint() * q.cast<Complex>() * u);
  ComplexMatrix y(n, n);
  ComplexMatrix lhs(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j)
  {
    ComplexVector col = rhs.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k)
    {
      col -= std::conj(t(j, k)) * y.col(k);
    }
    lhs = t;
    lhs.diagonal().array() += std::conj(t(j, j));
    y.col(j) = lhs.triangularView<Eigen::Upper>().solve(col);
  }
  Matrix x = (u * y * u.adjoint()).real();
  x = 0.5 * (x + x.transpose());

  const Matrix bbt = b * b.transpose();
  const double scale = std::max(bbt.norm(), std::numeric_limits<double>::min());
  auto residual = [&](const Matrix &z) {
    return (a * z * e.transpose() + e * z * a.transpose() + bbt).norm() / scale;
  };
  if (residual(x) > 1e-8 && n <= 50)
  {
    Matrix xk = solve_gen_lyapunov_kronecker(a, e, bbt);
    if (residual(xk) < residual(x))
    {
      x = std::move(xk);
    }
  }
  return x;
}

SpectralSplit split_pencil(const Matrix &a, const Matrix &e, double threshold)
{
  const Eigen::Index n = a.rows();
  SpectralSplit out;
  if (n == 0)
  {
    out.right = Matrix(0, 0);
    out.left = Matrix(0, 0);
    out.n_stable = 0;
    return out;
  }
  const Matrix f = e.partialPivLu().solve(a);
  Eigen::ComplexSchur<Matrix> schur(f);
  auto stable = [threshold](const Complex &z) { return z.real() < threshold; };
  auto unstable = [threshold](const Complex &z) { return !(z.real() < threshold); };

  ComplexMatrix t = schur.matrixT();
  ComplexMatrix u = schur.matrixU();
  const Eigen::Index ns = order_schur(t, u, stable);
  const Matrix ts = real_span(u.leftCols(ns));

  t = schur.matrixT();
  u = schur.matrixU();
  const Eigen::Index nu = order_schur(t, u, unstable);
  const Matrix tu = real_span(u.leftCols(nu));

  out.right.resize(n, n);
  out.right << ts, tu;
  out.left = (e * out.right).transpose().partialPivLu().solve(Matrix::Identity(n, n));
  out.n_stable = static_cast<std::size_t>(ns);
  return out;
}

}  // namespace netred
