// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/mor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "netred/error.hpp"

namespace netred
{

namespace
{

Matrix gaussian(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols)
{
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
  {
    for (Eigen::Index i = 0; i < rows; ++i)
    {
      m(i, j) = dist(rng);
    }
  }
  return m;
}

// Real orthonormal basis of span{Re X, Im X} with X.cols() columns.
Matrix realify(const ComplexMatrix &x)
{
  Matrix stacked(x.rows(), 2 * x.cols());
  stacked << x.real(), x.imag();
  Eigen::JacobiSVD<Matrix> dec(stacked, Eigen::ComputeThinU);
  return dec.matrixU().leftCols(x.cols());
}

struct ReducedEigen
{
  ComplexVector shifts;  ///< mirrored reduced poles
  ComplexMatrix b_dirs;  ///< m x r
  ComplexMatrix c_dirs;  ///< p x r
};

ReducedEigen reduced_eigen(const LtiSystem &red)
{
  const Matrix f = red.e.partialPivLu().solve(red.a);
  Eigen::ComplexEigenSolver<ComplexMatrix> es(f.cast<Complex>());
  if (es.info() != Eigen::Success)
  {
    throw Error("irka: reduced eigensolver failed");
  }
  const ComplexVector ev = es.eigenvalues();
  const ComplexMatrix y = es.eigenvectors();
  const Eigen::Index r = ev.size();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto i, auto j) {
    const Complex a = -ev(i);
    const Complex b = -ev(j);
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  ComplexVector shifts(r);
  ComplexMatrix ys(y.rows(), r);
  for (Eigen::Index k = 0; k < r; ++k)
  {
    shifts(k) = -ev(order[static_cast<std::size_t>(k)]);
    ys.col(k) = y.col(order[static_cast<std::size_t>(k)]);
  }
  const ComplexMatrix ey = red.e.cast<Complex>() * ys;
  const ComplexMatrix left = ey.partialPivLu().solve(red.b.cast<Complex>());  // r x m
  return {shifts, left.transpose(), red.c.cast<Complex>() * ys};
}

void interpolation_bases(const LtiSystem &sys, const ComplexVector &shifts,
                         const ComplexMatrix &b_dirs, const ComplexMatrix &c_dirs, Matrix &v,
                         Matrix &w)
{
  const Eigen::Index n = sys.a.rows();
  const Eigen::Index r = shifts.size();
  ComplexMatrix vc(n, r);
  ComplexMatrix wc(n, r);
  const ComplexMatrix e = sys.e.cast<Complex>();
  const ComplexMatrix a = sys.a.cast<Complex>();
  const ComplexMatrix b = sys.b.cast<Complex>();
  const ComplexMatrix ct = sys.c.transpose().cast<Complex>();
  for (Eigen::Index i = 0; i < r; ++i)
  {
    const ComplexMatrix pencil = shifts(i) * e - a;
    Eigen::PartialPivLU<ComplexMatrix> lu(pencil);
    vc.col(i) = lu.solve(b * b_dirs.col(i));
    wc.col(i) = lu.transpose().solve(ct * c_dirs.col(i));
  }
  v = orthonormalize(realify(vc));
  w = orthonormalize(realify(wc));
}

Complex mirror_shift(Complex s)
{
  if (s.real() <= 0.0)
  {
    return {std::max(-s.real(), 1e-8), s.imag()};
  }
  return s;
}

}  // namespace

LtiSystem project(const LtiSystem &sys, const Matrix &v, const Matrix &w)
{
  return {w.transpose() * sys.e * v, w.transpose() * sys.a * v, w.transpose() * sys.b,
          sys.c * v};
}

ProjectionBasis irka(const LtiSystem &sys, std::size_t order, const IrkaOptions &opts)
{
  const auto n = sys.a.rows();
  const auto r = static_cast<Eigen::Index>(order);
  if (r == 0 || r > n)
  {
    throw InvalidArgument("irka: order must satisfy 1 <= r <= N");
  }
  std::mt19937_64 rng(opts.seed);

  ComplexVector shifts(r);
  if (opts.initial_shifts)
  {
    if (opts.initial_shifts->size() != r)
    {
      throw InvalidArgument("irka: initial shift count differs from the order");
    }
    shifts = *opts.initial_shifts;
  }
  else
  {
    const Matrix q = orthonormalize(gaussian(rng, n, r));
    const LtiSystem small = project(sys, q, q);
    shifts = -pencil_eigenvalues(small.a, small.e);
  }
  for (Eigen::Index i = 0; i < r; ++i)
  {
    shifts(i) = mirror_shift(shifts(i));
  }
  ComplexMatrix b_dirs = gaussian(rng, sys.b.cols(), r).cast<Complex>();
  ComplexMatrix c_dirs = gaussian(rng, sys.c.rows(), r).cast<Complex>();

  auto sorted = [](ComplexVector s) {
    std::sort(s.data(), s.data() + s.size(), [](const Complex &a, const Complex &b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return s;
  };

  ProjectionBasis out;
  out.method = "irka";
  out.converged = false;
  Matrix v;
  Matrix w;
  for (std::size_t it = 0; it < opts.max_iter; ++it)
  {
    interpolation_bases(sys, shifts, b_dirs, c_dirs, v, w);
    const ReducedEigen re = reduced_eigen(project(sys, v, w));
    ComplexVector next = re.shifts;
    for (Eigen::Index i = 0; i < r; ++i)
    {
      next(i) = mirror_shift(next(i));
    }
    const ComplexVector old_sorted = sorted(shifts);
    const ComplexVector new_sorted = sorted(next);
    double change = 0.0;
    for (Eigen::Index i = 0; i < r; ++i)
    {
      change = std::max(change, std::abs(new_sorted(i) - old_sorted(i)) / std::abs(old_sorted(i)));
    }
    shifts = next;
    b_dirs = re.b_dirs;
    c_dirs = re.c_dirs;
    out.iterations = it + 1;
    out.shift_changes.push_back(change);
    out.final_shift_change = change;
    if (change < opts.tol)
    {
      out.converged = true;
      break;
    }
  }
  if (!out.converged)
  {
    out.warning = "irka: no convergence within the iteration limit";
  }
  interpolation_bases(sys, shifts, b_dirs, c_dirs, v, w);
  const Matrix wev = w.transpose() * sys.e * v;
  out.v = v;
  out.w = w * wev.transpose().partialPivLu().solve(Matrix::Identity(r, r));
  out.shifts = shifts;
  out.orthonormal = true;
  return out;
}

namespace
{

Matrix psd_factor(const Matrix &x)
{
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (x + x.transpose()));
  const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

}  // namespace

ProjectionBasis balanced_truncation(const LtiSystem &sys, std::size_t order)
{
  const auto n = sys.a.rows();
  if (order == 0 || static_cast<Eigen::Index>(order) > n)
  {
    throw InvalidArgument("balanced_truncation: order must satisfy 1 <= r <= N");
  }
  const Matrix p = solve_gen_lyapunov(sys.a, sys.e, sys.b);
  const Matrix q = solve_gen_lyapunov(sys.a.transpose(), sys.e.transpose(), sys.c.transpose());
  const Matrix zc = psd_factor(p);
  const Matrix zo = psd_factor(q);
  Eigen::JacobiSVD<Matrix> dec(zo.transpose() * sys.e * zc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector hsv = dec.singularValues();
  Eigen::Index kept = 0;
  const double floor = hsv.size() > 0 ? 1e-12 * hsv(0) : 0.0;
  while (kept < hsv.size() && hsv(kept) > floor)
  {
    ++kept;
  }
  const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(order), kept);
  ProjectionBasis out;
  out.method = "bt";
  out.hankel_values = hsv.head(kept);
  out.error_bound = 2.0 * hsv.segment(k, kept - k).sum();
  if (k < static_cast<Eigen::Index>(order))
  {
    out.warning = "balanced_truncation: order reduced to the numerical rank";
  }
  const Vector scale = hsv.head(k).cwiseSqrt().cwiseInverse();
  out.v = zc * dec.matrixV().leftCols(k) * scale.asDiagonal();
  out.w = zo * dec.matrixU().leftCols(k) * scale.asDiagonal();
  return out;
}

ProjectionBasis pod(const Matrix &snapshots, std::size_t order, std::size_t block_size)
{
  if (order == 0 || static_cast<Eigen::Index>(order) > snapshots.cols())
  {
    throw InvalidArgument("pod: order must not exceed the snapshot count");
  }
  if (block_size == 0 || snapshots.rows() % static_cast<Eigen::Index>(block_size) != 0)
  {
    throw InvalidArgument("pod: row count is not a multiple of the block size");
  }
  const Svd s = svd(snapshots);
  Eigen::Index rank = 0;
  const double floor = s.sigma.size() > 0 ? 1e-12 * s.sigma(0) : 0.0;
  while (rank < s.sigma.size() && s.sigma(rank) > floor)
  {
    ++rank;
  }
  ProjectionBasis out;
  out.method = "pod";
  out.block_size = block_size;
  Eigen::Index k = static_cast<Eigen::Index>(order);
  if (k > rank)
  {
    out.warning = "pod: order exceeds the numerical rank; basis truncated";
    k = rank;
  }
  out.v = s.u.leftCols(k);
  out.w = out.v;
  out.hankel_values = s.sigma;
  out.orthonormal = true;
  return out;
}

FullBasis assemble_unstable_aware_basis(const StableDecomposition &decomp,
                                        const ProjectionBasis &inner)
{
  if (inner.v.rows() != decomp.t_minus.cols() || inner.w.rows() != decomp.s_minus.cols())
  {
    throw InvalidArgument("assemble_unstable_aware_basis: basis does not match the stable part");
  }
  FullBasis out;
  out.v.resize(decomp.t_minus.rows(), inner.v.cols() + decomp.t_plus.cols());
  out.v << decomp.t_minus * inner.v, decomp.t_plus;
  out.w.resize(decomp.s_minus.rows(), inner.w.cols() + decomp.s_plus.cols());
  out.w << decomp.s_minus * inner.w, decomp.s_plus;
  return out;
}

}  // namespace netred
