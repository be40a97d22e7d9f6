#pragma once

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace chc {

struct OdeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OdeOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-13;
  double h_init = 1e-2;
  double h_max = 0.25;
  int max_steps = 200000;
};

// Adaptive Dormand-Prince 5(4) (boost::numeric::odeint). The guard, if set,
// is called after every accepted step and may throw to abort the integration.
template <class F>
Eigen::VectorXd integrate_rk45(F&& f, Eigen::VectorXd y, double t0, double t1,
                               const OdeOptions& opt = {},
                               const std::function<void(double, const Eigen::VectorXd&)>& guard = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = Eigen::VectorXd;
  using Stepper = odeint::runge_kutta_dopri5<State, double, State, double,
                                             odeint::vector_space_algebra>;

  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double dt = dir * std::min(opt.h_init, std::abs(t1 - t0));

  auto system = [&f](const State& x, State& dxdt, double t) { dxdt = f(t, x); };
  int steps = 0;
  auto observer = [&](const State& x, double t) {
    if (++steps > opt.max_steps) throw OdeError("integrate_rk45: step limit exceeded");
    if (guard) guard(t, x);
  };

  auto controlled = odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                            dir * opt.h_max, Stepper());
  try {
    odeint::integrate_adaptive(controlled, system, y, t0, t1, dt, observer);
  } catch (const odeint::step_adjustment_error& e) {
    throw OdeError(std::string("integrate_rk45: ") + e.what());
  } catch (const odeint::no_progress_error& e) {
    throw OdeError(std::string("integrate_rk45: ") + e.what());
  }
  return y;
}

}  // namespace chc
