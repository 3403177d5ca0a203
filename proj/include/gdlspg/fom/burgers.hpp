#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gdlspg/core/dense.hpp"

namespace gdlspg {

// Inviscid Burgers on a 1D finite-volume grid with an exponential source and
// a fixed inflow value on the left. Advanced implicitly; each step solves the
// nonlinear system with Newton on an analytic lower-bidiagonal Jacobian.
struct BurgersConfig {
  std::size_t cells = 256;
  double length = 100.0;
  double dt = 0.07;
  std::size_t steps = 500;  // snapshots = steps + 1, the initial state included
  double mu1 = 4.25;        // inflow value
  double mu2 = 0.015;       // source growth rate
  double source_coeff = 0.02;
  double newton_tol_per_cell = 1e-10;
  int newton_cap = 50;

  double dx() const { return length / static_cast<double>(cells); }
  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx(); }
};

// same resolution, extra cells appended downstream
BurgersConfig extended(const BurgersConfig& base, std::size_t extra_cells);

// dw_i/dt, upwind flux difference plus the source term
Vector burgers_velocity(const BurgersConfig& cfg, std::span<const double> w);

// r(xi) = xi - prev - dt * velocity(xi)
Vector burgers_residual(const BurgersConfig& cfg, std::span<const double> xi,
                        std::span<const double> prev);

// dr/dxi is lower bidiagonal: diag[i] and sub[i] (coupling to cell i-1; sub[0] unused)
void burgers_jacobian(const BurgersConfig& cfg, std::span<const double> xi,
                      std::span<double> diag, std::span<double> sub);

// (dr/dxi) * v for a block of directions
void burgers_apply_jacobian(const BurgersConfig& cfg, std::span<const double> xi,
                            const DenseMatrix& v, DenseMatrix& out);

// one implicit step from prev; returns the Newton iteration count
Vector burgers_step(const BurgersConfig& cfg, std::span<const double> prev, int* iters = nullptr);

struct BurgersRun {
  BurgersConfig config;
  std::vector<Vector> snapshots;
  std::vector<int> newton_iters;
};

BurgersRun run_burgers(const BurgersConfig& cfg);

// the inflow/growth pairs the reduced models are trained on
std::vector<std::pair<double, double>> burgers_mu_grid();

// graph layout for the padded state: pad_left inflow-valued nodes, then every
// cell of the extended run (its tail cells are the downstream padding)
DenseMatrix padded_positions(const BurgersConfig& extended_cfg, std::size_t pad_left);
Vector padded_state(std::span<const double> extended_state, std::size_t pad_left, double mu1);

// mean of each consecutive block, for comparing against a finer grid
Vector block_average(std::span<const double> fine, std::size_t factor);

}  // namespace gdlspg
