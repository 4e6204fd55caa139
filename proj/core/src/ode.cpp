// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "netred/error.hpp"

namespace netred
{

namespace
{

constexpr int kMaxOrder = 5;
constexpr int kNewtonMaxIter = 4;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double rms(const Vector &v)
{
  if (v.size() == 0)
  {
    return 0.0;
  }
  return v.norm() / std::sqrt(static_cast<double>(v.size()));
}

// Transformation taking backward differences at step h to step factor*h.
Matrix compute_r(int order, double factor)
{
  Matrix m = Matrix::Zero(order + 1, order + 1);
  for (int i = 1; i <= order; ++i)
  {
    for (int j = 1; j <= order; ++j)
    {
      m(i, j) = (i - 1 - factor * j) / static_cast<double>(i);
    }
  }
  m.row(0).setOnes();
  for (int i = 1; i <= order; ++i)
  {
    m.row(i) = m.row(i).cwiseProduct(m.row(i - 1));
  }
  return m;
}

void change_d(Matrix &d, int order, double factor)
{
  const Matrix ru = compute_r(order, factor) * compute_r(order, 1.0);
  d.topRows(order + 1) = ru.transpose() * d.topRows(order + 1);
}

struct Coefficients
{
  std::array<double, kMaxOrder + 1> gamma{};
  std::array<double, kMaxOrder + 1> alpha{};
  std::array<double, kMaxOrder + 2> error_const{};

  Coefficients()
  {
    const std::array<double, kMaxOrder + 1> kappa = {0.0,     -0.1850, -1.0 / 9.0,
                                                     -0.0823, -0.0415, 0.0};
    gamma[0] = 0.0;
    for (int k = 1; k <= kMaxOrder; ++k)
    {
      gamma[k] = gamma[k - 1] + 1.0 / k;
    }
    for (int k = 0; k <= kMaxOrder; ++k)
    {
      alpha[k] = (1.0 - kappa[k]) * gamma[k];
      error_const[k] = kappa[k] * gamma[k] + 1.0 / (k + 1);
    }
    error_const[kMaxOrder + 1] = 1.0 / (kMaxOrder + 2);
  }
};

class Integrator
{
public:
  Integrator(const OdeProblem &p, const OdeOptions &o) : problem_(p), options_(o)
  {
    n_ = p.x0.size();
    if (p.mass_diagonal.size() > 0)
    {
      if (p.mass_diagonal.size() != n_ || (p.mass_diagonal.array() == 0.0).any())
      {
        throw InvalidArgument("integrate_ode: invalid mass diagonal");
      }
      inv_mass_diag_ = p.mass_diagonal.cwiseInverse();
    }
    else if (p.mass.size() > 0)
    {
      if (p.mass.rows() != n_ || p.mass.cols() != n_)
      {
        throw InvalidArgument("integrate_ode: mass shape mismatch");
      }
      mass_lu_.compute(p.mass);
      if (std::abs(mass_lu_.determinant()) == 0.0)
      {
        throw InvalidArgument("integrate_ode: singular mass matrix");
      }
      dense_mass_ = true;
    }
  }

  OdeSolution run();

private:
  void fun(double t, const Vector &x, Vector &dx)
  {
    ++sol_.rhs_evaluations;
    problem_.rhs(t, x, dx);
    if (inv_mass_diag_.size() > 0)
    {
      dx.array() *= inv_mass_diag_.array();
    }
    else if (dense_mass_)
    {
      dx = mass_lu_.solve(dx);
    }
  }

  void jacobian(double t, const Vector &x, Matrix &jac)
  {
    ++sol_.jacobian_evaluations;
    jac.resize(n_, n_);
    if (problem_.jacobian)
    {
      problem_.jacobian(t, x, jac);
      if (inv_mass_diag_.size() > 0)
      {
        jac = inv_mass_diag_.asDiagonal() * jac;
      }
      else if (dense_mass_)
      {
        jac = mass_lu_.solve(jac);
      }
      return;
    }
    Vector f0(n_);
    fun(t, x, f0);
    Vector xp = x;
    Vector fp(n_);
    const double root = std::sqrt(kEps);
    for (Eigen::Index j = 0; j < n_; ++j)
    {
      const double h = root * std::max(std::abs(x(j)), 1.0);
      xp(j) = x(j) + h;
      const double dh = xp(j) - x(j);
      fun(t, xp, fp);
      jac.col(j) = (fp - f0) / dh;
      xp(j) = x(j);
    }
  }

  double select_initial_step(double t0, const Vector &y0, const Vector &f0, double span)
  {
    const Vector scale = (options_.atol + options_.rtol * y0.array().abs()).matrix();
    const double d0 = rms(y0.cwiseQuotient(scale));
    const double d1 = rms(f0.cwiseQuotient(scale));
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    const Vector y1 = y0 + h0 * f0;
    Vector f1(n_);
    fun(t0 + h0, y1, f1);
    const double d2 = rms((f1 - f0).cwiseQuotient(scale)) / h0;
    double h1;
    if (d1 <= 1e-15 && d2 <= 1e-15)
    {
      h1 = std::max(1e-6, h0 * 1e-3);
    }
    else
    {
      h1 = std::pow(0.01 / std::max(d1, d2), 0.5);
    }
    return std::min({100.0 * h0, h1, span});
  }

  // Simplified Newton iteration for the implicit stage.
  bool solve_stage(double t_new, const Vector &y_predict, double c, const Vector &psi,
                   const Vector &scale, Vector &y, Vector &d, int &n_iter)
  {
    y = y_predict;
    d.setZero(n_);
    double dy_norm_old = -1.0;
    Vector f(n_);
    n_iter = 0;
    for (int k = 0; k < kNewtonMaxIter; ++k)
    {
      n_iter = k + 1;
      fun(t_new, y, f);
      if (!f.allFinite())
      {
        return false;
      }
      const Vector dy = lu_.solve(c * f - psi - d);
      const double dy_norm = rms(dy.cwiseQuotient(scale));
      double rate = -1.0;
      if (dy_norm_old >= 0.0)
      {
        rate = dy_norm / dy_norm_old;
        if (rate >= 1.0 ||
            std::pow(rate, kNewtonMaxIter - k) / (1.0 - rate) * dy_norm > newton_tol_)
        {
          return false;
        }
      }
      y += dy;
      d += dy;
      if (dy_norm == 0.0 || (rate >= 0.0 && rate / (1.0 - rate) * dy_norm < newton_tol_))
      {
        return true;
      }
      dy_norm_old = dy_norm;
    }
    return false;
  }

  void factorize(double c)
  {
    ++sol_.factorizations;
    lu_.compute(Matrix::Identity(n_, n_) - c * jac_);
  }

  void emit_samples(double t_old, double t_new, int order, double h);

  const OdeProblem &problem_;
  const OdeOptions &options_;
  Eigen::Index n_ = 0;
  Vector inv_mass_diag_;
  Eigen::PartialPivLU<Matrix> mass_lu_;
  bool dense_mass_ = false;
  Eigen::PartialPivLU<Matrix> lu_;
  Matrix jac_;
  Matrix d_;
  double newton_tol_ = 0.0;
  std::size_t next_sample_ = 0;
  OdeSolution sol_;
};

void Integrator::emit_samples(double t_old, double t_new, int order, double h)
{
  const auto &ts = options_.sample_times;
  while (next_sample_ < ts.size() && ts[next_sample_] <= t_new)
  {
    const double t = ts[next_sample_];
    if (t < t_old)
    {
      ++next_sample_;
      continue;
    }
    Vector y = d_.row(0).transpose();
    double p = 1.0;
    for (int j = 0; j < order; ++j)
    {
      const double shift = t_new - h * j;
      const double denom = h * (1 + j);
      p *= (t - shift) / denom;
      y += p * d_.row(j + 1).transpose();
    }
    sol_.times.push_back(t);
    sol_.states.push_back(std::move(y));
    ++next_sample_;
  }
}

OdeSolution Integrator::run()
{
  const double t0 = problem_.t0;
  const double t1 = problem_.t1;
  if (!(t1 > t0))
  {
    throw InvalidArgument("integrate_ode: t1 must exceed t0");
  }
  if (!(options_.rtol > 0.0) || !(options_.atol >= 0.0))
  {
    throw InvalidArgument("integrate_ode: invalid tolerances");
  }
  const auto &ts = options_.sample_times;
  for (std::size_t i = 1; i < ts.size(); ++i)
  {
    if (!(ts[i] > ts[i - 1]))
    {
      throw InvalidArgument("integrate_ode: sample times must be increasing");
    }
  }
  const bool record_steps = ts.empty();
  const double max_step =
      options_.max_step > 0.0 ? options_.max_step : std::numeric_limits<double>::infinity();

  Vector y = problem_.x0;
  Vector f(n_);
  fun(t0, y, f);
  if (!f.allFinite())
  {
    throw IntegrationError("integrate_ode: non-finite right-hand side", t0);
  }
  double h_abs = options_.first_step > 0.0 ? options_.first_step
                                           : select_initial_step(t0, y, f, t1 - t0);
  h_abs = std::min(h_abs, max_step);
  newton_tol_ = std::max(10.0 * kEps / options_.rtol, std::min(0.03, std::sqrt(options_.rtol)));
  jacobian(t0, y, jac_);
  static const Coefficients coef;

  d_.setZero(kMaxOrder + 3, n_);
  d_.row(0) = y.transpose();
  d_.row(1) = (f * h_abs).transpose();
  int order = 1;
  int n_equal_steps = 0;
  bool lu_valid = false;

  if (record_steps)
  {
    sol_.times.push_back(t0);
    sol_.states.push_back(y);
  }
  else
  {
    while (next_sample_ < ts.size() && ts[next_sample_] < t0)
    {
      ++next_sample_;
    }
    if (next_sample_ < ts.size() && ts[next_sample_] == t0)
    {
      sol_.times.push_back(t0);
      sol_.states.push_back(y);
      ++next_sample_;
    }
  }

  double t = t0;
  Vector y_new(n_), dvec(n_), scale(n_), psi(n_), y_predict(n_);
  while (t < t1)
  {
    const double min_step =
        10.0 * std::abs(std::nextafter(t, std::numeric_limits<double>::infinity()) - t);
    if (h_abs > max_step)
    {
      change_d(d_, order, max_step / h_abs);
      h_abs = max_step;
      n_equal_steps = 0;
    }
    else if (h_abs < min_step)
    {
      change_d(d_, order, min_step / h_abs);
      h_abs = min_step;
      n_equal_steps = 0;
    }
    bool current_jac = false;
    bool accepted = false;
    double t_new = t;
    double error_norm = 0.0;
    double safety = 0.0;
    while (!accepted)
    {
      if (h_abs < min_step)
      {
        throw IntegrationError("integrate_ode: step size underflow", t);
      }
      t_new = t + h_abs;
      if (t_new > t1)
      {
        t_new = t1;
        change_d(d_, order, (t_new - t) / h_abs);
        n_equal_steps = 0;
        lu_valid = false;
      }
      const double h = t_new - t;
      h_abs = h;
      y_predict = d_.topRows(order + 1).colwise().sum().transpose();
      scale = (options_.atol + options_.rtol * y_predict.array().abs()).matrix();
      psi.setZero();
      for (int k = 1; k <= order; ++k)
      {
        psi += coef.gamma[k] * d_.row(k).transpose();
      }
      psi /= coef.alpha[order];
      const double c = h / coef.alpha[order];

      bool converged = false;
      int n_iter = 0;
      for (;;)
      {
        if (!lu_valid)
        {
          factorize(c);
          lu_valid = true;
        }
        converged = solve_stage(t_new, y_predict, c, psi, scale, y_new, dvec, n_iter);
        if (converged || current_jac)
        {
          break;
        }
        jacobian(t_new, y_predict, jac_);
        lu_valid = false;
        current_jac = true;
      }
      if (!converged)
      {
        const double factor = 0.5;
        h_abs *= factor;
        change_d(d_, order, factor);
        n_equal_steps = 0;
        lu_valid = false;
        ++sol_.rejected_steps;
        continue;
      }
      safety = 0.9 * (2 * kNewtonMaxIter + 1) / (2 * kNewtonMaxIter + n_iter);
      scale = (options_.atol + options_.rtol * y_new.array().abs()).matrix();
      error_norm = rms((coef.error_const[order] * dvec).cwiseQuotient(scale));
      if (error_norm > 1.0)
      {
        const double factor =
            std::max(kMinFactor, safety * std::pow(error_norm, -1.0 / (order + 1)));
        h_abs *= factor;
        change_d(d_, order, factor);
        n_equal_steps = 0;
        ++sol_.rejected_steps;
      }
      else
      {
        accepted = true;
      }
    }

    ++sol_.accepted_steps;
    ++n_equal_steps;
    const double t_old = t;
    t = t_new;
    y = y_new;

    d_.row(order + 2) = dvec.transpose() - d_.row(order + 1);
    d_.row(order + 1) = dvec.transpose();
    for (int i = order; i >= 0; --i)
    {
      d_.row(i) += d_.row(i + 1);
    }

    if (record_steps)
    {
      sol_.times.push_back(t);
      sol_.states.push_back(y);
    }
    else
    {
      emit_samples(t_old, t, order, h_abs);
    }

    if (n_equal_steps < order + 1)
    {
      continue;
    }
    const double inf = std::numeric_limits<double>::infinity();
    const double error_m_norm =
        order > 1 ? rms((coef.error_const[order - 1] * d_.row(order).transpose()).cwiseQuotient(scale))
                  : inf;
    const double error_p_norm =
        order < kMaxOrder
            ? rms((coef.error_const[order + 1] * d_.row(order + 2).transpose()).cwiseQuotient(scale))
            : inf;
    const std::array<double, 3> norms = {error_m_norm, error_norm, error_p_norm};
    std::array<double, 3> factors{};
    for (int i = 0; i < 3; ++i)
    {
      factors[i] = norms[i] == 0.0 ? inf : std::pow(norms[i], -1.0 / (order + i));
    }
    const int best = static_cast<int>(std::max_element(factors.begin(), factors.end()) -
                                      factors.begin());
    order += best - 1;
    const double factor = std::min(kMaxFactor, safety * factors[best]);
    h_abs *= factor;
    change_d(d_, order, factor);
    n_equal_steps = 0;
    lu_valid = false;
  }
  return std::move(sol_);
}

}  // namespace

Matrix OdeSolution::state_matrix() const
{
  if (states.empty())
  {
    return Matrix(0, 0);
  }
  Matrix m(states.front().size(), static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k)
  {
    m.col(static_cast<Eigen::Index>(k)) = states[k];
  }
  return m;
}

OdeSolution integrate_ode(const OdeProblem &problem, const OdeOptions &options)
{
  if (!problem.rhs)
  {
    throw InvalidArgument("integrate_ode: missing right-hand side");
  }
  Integrator integrator(problem, options);
  return integrator.run();
}

std::vector<double> linspace(double t0, double t1, std::size_t count)
{
  std::vector<double> out(count);
  if (count == 1)
  {
    out[0] = t0;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
  {
    out[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  if (count > 0)
  {
    out.back() = t1;
  }
  return out;
}

}  // namespace netred
