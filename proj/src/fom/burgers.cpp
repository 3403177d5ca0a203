#include "gdlspg/fom/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gdlspg {

BurgersConfig extended(const BurgersConfig& base, std::size_t extra_cells) {
  BurgersConfig out = base;
  out.cells = base.cells + extra_cells;
  out.length = base.length * static_cast<double>(out.cells) / static_cast<double>(base.cells);
  return out;
}

Vector burgers_velocity(const BurgersConfig& cfg, std::span<const double> w) {
  if (w.size() != cfg.cells) throw std::invalid_argument("burgers: state length mismatch");
  const double dx = cfg.dx();
  Vector f(cfg.cells);
  for (std::size_t i = 0; i < cfg.cells; ++i) {
    const double up = (i == 0) ? cfg.mu1 : w[i - 1];
    f[i] = (up * up - w[i] * w[i]) / (2.0 * dx) +
           cfg.source_coeff * std::exp(cfg.mu2 * cfg.center(i));
  }
  return f;
}

Vector burgers_residual(const BurgersConfig& cfg, std::span<const double> xi,
                        std::span<const double> prev) {
  Vector r = burgers_velocity(cfg, xi);
  for (std::size_t i = 0; i < cfg.cells; ++i) r[i] = xi[i] - prev[i] - cfg.dt * r[i];
  return r;
}

void burgers_jacobian(const BurgersConfig& cfg, std::span<const double> xi,
                      std::span<double> diag, std::span<double> sub) {
  const double c = cfg.dt / cfg.dx();
  for (std::size_t i = 0; i < cfg.cells; ++i) {
    diag[i] = 1.0 + c * xi[i];
    sub[i] = (i == 0) ? 0.0 : -c * xi[i - 1];
  }
}

void burgers_apply_jacobian(const BurgersConfig& cfg, std::span<const double> xi,
                            const DenseMatrix& v, DenseMatrix& out) {
  if (v.rows() != cfg.cells) throw std::invalid_argument("burgers: direction rows mismatch");
  const double c = cfg.dt / cfg.dx();
  for (std::size_t i = 0; i < cfg.cells; ++i) {
    const double d = 1.0 + c * xi[i];
    const double s = (i == 0) ? 0.0 : -c * xi[i - 1];
    for (std::size_t j = 0; j < v.cols(); ++j) {
      double acc = d * v(i, j);
      if (i > 0) acc += s * v(i - 1, j);
      out(i, j) = acc;
    }
  }
}

Vector burgers_step(const BurgersConfig& cfg, std::span<const double> prev, int* iters) {
  const double tol = cfg.newton_tol_per_cell * static_cast<double>(cfg.cells);
  Vector xi(prev.begin(), prev.end());
  Vector diag(cfg.cells), sub(cfg.cells);

  for (int it = 0; it < cfg.newton_cap; ++it) {
    Vector r = burgers_residual(cfg, xi, prev);
    if (norm2(r) <= tol) {
      if (iters) *iters = it;
      return xi;
    }
    burgers_jacobian(cfg, xi, diag, sub);
    // lower bidiagonal solve, cell by cell downstream
    double delta_prev = 0.0;
    for (std::size_t i = 0; i < cfg.cells; ++i) {
      if (std::abs(diag[i]) < 1e-14) throw std::runtime_error("burgers: singular step jacobian");
      const double delta = (-r[i] - sub[i] * delta_prev) / diag[i];
      xi[i] += delta;
      delta_prev = delta;
    }
  }
  throw std::runtime_error("burgers: newton stalled after " + std::to_string(cfg.newton_cap) +
                           " iterations");
}

BurgersRun run_burgers(const BurgersConfig& cfg) {
  BurgersRun run;
  run.config = cfg;
  run.snapshots.reserve(cfg.steps + 1);
  run.snapshots.emplace_back(cfg.cells, 1.0);
  for (std::size_t n = 0; n < cfg.steps; ++n) {
    int it = 0;
    run.snapshots.push_back(burgers_step(cfg, run.snapshots.back(), &it));
    run.newton_iters.push_back(it);
  }
  return run;
}

std::vector<std::pair<double, double>> burgers_mu_grid() {
  std::vector<std::pair<double, double>> grid;
  grid.reserve(80);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 8; ++j)
      grid.emplace_back(4.25 + (1.25 / 9.0) * i, 0.015 + (0.015 / 7.0) * j);
  return grid;
}

DenseMatrix padded_positions(const BurgersConfig& extended_cfg, std::size_t pad_left) {
  const double dx = extended_cfg.dx();
  DenseMatrix pos(pad_left + extended_cfg.cells, 1);
  for (std::size_t i = 0; i < pos.rows(); ++i)
    pos(i, 0) = (static_cast<double>(i) - static_cast<double>(pad_left) + 0.5) * dx;
  return pos;
}

Vector padded_state(std::span<const double> extended_state, std::size_t pad_left, double mu1) {
  Vector out(pad_left + extended_state.size());
  for (std::size_t i = 0; i < pad_left; ++i) out[i] = mu1;
  std::copy(extended_state.begin(), extended_state.end(), out.begin() + pad_left);
  return out;
}

Vector block_average(std::span<const double> fine, std::size_t factor) {
  if (factor == 0 || fine.size() % factor != 0)
    throw std::invalid_argument("block average: length not divisible by factor");
  Vector out(fine.size() / factor);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < factor; ++k) acc += fine[i * factor + k];
    out[i] = acc / static_cast<double>(factor);
  }
  return out;
}

}  // namespace gdlspg
