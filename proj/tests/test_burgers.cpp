#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "gdlspg/fom/burgers.hpp"

using namespace gdlspg;

namespace {

// single-cell implicit step has a closed form: the residual is quadratic in
// the unknown, so the update is the positive root
double scalar_step_oracle(const BurgersConfig& cfg, double prev) {
  const double a = cfg.dt / (2.0 * cfg.dx());
  const double src = cfg.source_coeff * std::exp(cfg.mu2 * cfg.center(0));
  const double rhs = prev + cfg.dt * (cfg.mu1 * cfg.mu1 / (2.0 * cfg.dx()) + src);
  return (-1.0 + std::sqrt(1.0 + 4.0 * a * rhs)) / (2.0 * a);
}

}  // namespace

TEST_CASE("velocity matches hand-computed upwind fluxes") {
  BurgersConfig cfg;
  cfg.cells = 3;
  cfg.length = 3.0;
  cfg.mu1 = 2.0;
  cfg.mu2 = 0.0;

  const Vector w{1.5, 3.0, 2.0};
  const Vector f = burgers_velocity(cfg, w);
  CHECK(f[0] == doctest::Approx(0.895).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(-3.355).epsilon(1e-14));
  CHECK(f[2] == doctest::Approx(2.52).epsilon(1e-14));
}

TEST_CASE("implicit step reproduces the single-cell closed form") {
  BurgersConfig cfg;
  cfg.cells = 1;
  cfg.length = 0.5;
  cfg.dt = 0.07;
  cfg.mu1 = 4.8;
  cfg.mu2 = 0.02;

  double prev = 1.0;
  for (int n = 0; n < 5; ++n) {
    const double expect = scalar_step_oracle(cfg, prev);
    const Vector got = burgers_step(cfg, Vector{prev});
    CHECK(std::abs(got[0] - expect) < 1e-8);
    const Vector r = burgers_residual(cfg, Vector{expect}, Vector{prev});
    CHECK(std::abs(r[0]) < 1e-12);
    prev = got[0];
  }
}

TEST_CASE("analytic jacobian matches central differences and is bidiagonal") {
  BurgersConfig cfg;
  cfg.cells = 8;
  cfg.length = 4.0;
  cfg.mu1 = 3.0;

  Vector xi(8), prev(8, 1.0);
  for (std::size_t i = 0; i < 8; ++i) xi[i] = 1.0 + 0.45 * static_cast<double>(i);

  Vector diag(8), sub(8);
  burgers_jacobian(cfg, xi, diag, sub);

  const double h = 1e-7;
  for (std::size_t j = 0; j < 8; ++j) {
    Vector hi = xi, lo = xi;
    hi[j] += h;
    lo[j] -= h;
    const Vector rh = burgers_residual(cfg, hi, prev);
    const Vector rl = burgers_residual(cfg, lo, prev);
    for (std::size_t i = 0; i < 8; ++i) {
      const double fd = (rh[i] - rl[i]) / (2.0 * h);
      if (i == j)
        CHECK(std::abs(fd - diag[i]) < 1e-5);
      else if (i == j + 1)
        CHECK(std::abs(fd - sub[i]) < 1e-5);
      else
        CHECK(fd == 0.0);
    }
  }

  // block application agrees with the scalar coefficients
  DenseMatrix v(8, 2), out(8, 2);
  for (std::size_t i = 0; i < 8; ++i) {
    v(i, 0) = static_cast<double>(i) - 3.0;
    v(i, 1) = 0.25 * static_cast<double>(i * i);
  }
  burgers_apply_jacobian(cfg, xi, v, out);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const double expect = diag[i] * v(i, j) + (i > 0 ? sub[i] * v(i - 1, j) : 0.0);
      CHECK(out(i, j) == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("matched inflow with no source is an exact steady state") {
  BurgersConfig cfg;
  cfg.cells = 32;
  cfg.steps = 10;
  cfg.mu1 = 1.0;
  cfg.source_coeff = 0.0;

  const BurgersRun run = run_burgers(cfg);
  REQUIRE(run.snapshots.size() == 11);
  for (const auto& s : run.snapshots)
    for (double v : s) CHECK(v == 1.0);
  for (int it : run.newton_iters) CHECK(it == 0);
}

TEST_CASE("every accepted step satisfies the newton residual bound") {
  BurgersConfig cfg;
  cfg.cells = 64;
  cfg.steps = 25;

  const BurgersRun run = run_burgers(cfg);
  const double tol = cfg.newton_tol_per_cell * static_cast<double>(cfg.cells);
  for (std::size_t n = 0; n < cfg.steps; ++n) {
    const Vector r = burgers_residual(cfg, run.snapshots[n + 1], run.snapshots[n]);
    CHECK(norm2(r) <= tol);
  }
}

TEST_CASE("front propagates at the jump-average speed") {
  BurgersConfig cfg;
  cfg.mu1 = 3.0;
  cfg.source_coeff = 0.0;
  cfg.steps = 200;  // t = 14, front expected near x = 28

  const BurgersRun run = run_burgers(cfg);
  const Vector& w = run.snapshots.back();
  const double mid = 0.5 * (cfg.mu1 + 1.0);
  std::size_t cross = 0;
  while (cross < cfg.cells && w[cross] > mid) ++cross;
  const double front = cfg.center(cross);
  CHECK(std::abs(front - 28.0) < 1.5);
}

TEST_CASE("training grid covers the full parameter box") {
  const auto grid = burgers_mu_grid();
  REQUIRE(grid.size() == 80);
  CHECK(grid.front().first == 4.25);
  CHECK(grid.front().second == 0.015);
  CHECK(grid.back().first == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(grid.back().second == doctest::Approx(0.03).epsilon(1e-14));
  std::set<std::pair<double, double>> unique(grid.begin(), grid.end());
  CHECK(unique.size() == 80);
}

TEST_CASE("padding wraps the extended run in a uniform line") {
  BurgersConfig base;
  const BurgersConfig ext = extended(base, 30);
  CHECK(ext.cells == 286);
  CHECK(ext.length == doctest::Approx(111.71875).epsilon(1e-15));
  CHECK(ext.dx() == base.dx());

  const DenseMatrix pos = padded_positions(ext, 30);
  REQUIRE(pos.rows() == 316);
  CHECK(pos(0, 0) == doctest::Approx(-29.5 * base.dx()).epsilon(1e-14));
  CHECK(pos(30, 0) == doctest::Approx(base.center(0)).epsilon(1e-14));
  for (std::size_t i = 1; i < 316; ++i)
    CHECK(pos(i, 0) - pos(i - 1, 0) == doctest::Approx(base.dx()).epsilon(1e-12));

  Vector state(286);
  for (std::size_t i = 0; i < 286; ++i) state[i] = static_cast<double>(i);
  const Vector padded = padded_state(state, 30, 4.75);
  REQUIRE(padded.size() == 316);
  for (std::size_t i = 0; i < 30; ++i) CHECK(padded[i] == 4.75);
  for (std::size_t i = 0; i < 286; ++i) CHECK(padded[30 + i] == state[i]);
}

TEST_CASE("block averaging folds fine grids onto coarse ones") {
  const Vector fine{1.0, 2.0, 3.0, 4.0};
  const Vector avg = block_average(fine, 2);
  REQUIRE(avg.size() == 2);
  CHECK(avg[0] == 1.5);
  CHECK(avg[1] == 3.5);
  CHECK_THROWS(static_cast<void>(block_average(fine, 3)));
}

TEST_CASE("refining the grid shrinks the smooth-region error") {
  const double t_final = 4.48;
  BurgersConfig ref;
  ref.cells = 512;
  ref.dt = 0.07 * 256.0 / 512.0;
  ref.steps = static_cast<std::size_t>(t_final / ref.dt + 0.5);
  const Vector fine = run_burgers(ref).snapshots.back();

  std::vector<double> errors;
  for (std::size_t cells : {64, 128, 256}) {
    BurgersConfig cfg;
    cfg.cells = cells;
    cfg.dt = 0.07 * 256.0 / static_cast<double>(cells);
    cfg.steps = static_cast<std::size_t>(t_final / cfg.dt + 0.5);
    const Vector coarse = run_burgers(cfg).snapshots.back();
    const Vector folded = block_average(fine, 512 / cells);

    double err = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double x = cfg.center(i);
      if (x < 30.0 || x > 90.0) continue;
      err += std::abs(coarse[i] - folded[i]);
      ++count;
    }
    errors.push_back(err / static_cast<double>(count));
  }
  CHECK(errors[0] / errors[1] >= 1.5);
  CHECK(errors[1] / errors[2] >= 1.5);
}
