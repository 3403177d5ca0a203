#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>

#include "gdlspg/ae/model.hpp"
#include "gdlspg/coarsen/hierarchy.hpp"
#include "gdlspg/core/eig.hpp"
#include "gdlspg/core/rng.hpp"
#include "gdlspg/rom/lspg.hpp"

using namespace gdlspg;

namespace {

std::vector<Vector> random_snapshots(std::size_t count, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> snaps(count, Vector(len));
  for (auto& s : snaps)
    for (double& v : s) v = rng.uniform(-1.0, 1.0);
  return snaps;
}

DenseMatrix snapshot_matrix(const std::vector<Vector>& snaps) {
  DenseMatrix x(snaps.front().size(), snaps.size());
  for (std::size_t j = 0; j < snaps.size(); ++j)
    for (std::size_t i = 0; i < x.rows(); ++i) x(i, j) = snaps[j][i];
  return x;
}

void fix_sign(Vector& v) {
  std::size_t arg = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (v[arg] < 0.0)
    for (double& e : v) e = -e;
}

// method of snapshots: eigenvectors of the small gram matrix lifted (or taken
// directly) to left singular vectors, written against the dense eigensolver
DenseMatrix gram_oracle_basis(const std::vector<Vector>& snaps, std::size_t m) {
  const DenseMatrix x = snapshot_matrix(snaps);
  const std::size_t n = x.rows(), k = x.cols();
  DenseMatrix phi(n, m);
  if (k <= n) {
    const EigenDecomposition eig = symmetric_eig(matmul_tn(x, x));  // k x k, ascending
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t col = k - 1 - j;
      Vector u(k);
      for (std::size_t i = 0; i < k; ++i) u[i] = eig.eigenvectors(i, col);
      Vector v = matvec(x, u);
      const double sigma = std::sqrt(eig.eigenvalues[col]);
      for (double& e : v) e /= sigma;
      fix_sign(v);
      for (std::size_t i = 0; i < n; ++i) phi(i, j) = v[i];
    }
  } else {
    const EigenDecomposition eig = symmetric_eig(matmul(x, transpose(x)));  // n x n
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t col = n - 1 - j;
      Vector v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = eig.eigenvectors(i, col);
      fix_sign(v);
      for (std::size_t i = 0; i < n; ++i) phi(i, j) = v[i];
    }
  }
  return phi;
}

// decoder over an 8-node line graph in physical units, dimensions matching an
// 8-cell flow state
AEModel tiny_decoder_model(std::uint64_t seed) {
  DenseMatrix pos(8, 1);
  for (std::size_t i = 0; i < 8; ++i) pos(i, 0) = static_cast<double>(i);
  std::vector<double> radii{1.5, line_graph_radius(7.0, 4), line_graph_radius(7.0, 2)};
  Hierarchy h = build_hierarchy(pos, {4, 2}, radii, 5);

  LayerSpec spec;
  spec.nq = 1;
  spec.latent_dim = 2;
  spec.widths = {1, 3, 6};
  Rng rng(17);
  std::vector<Vector> states(6, Vector(8));
  for (auto& s : states)
    for (double& v : s) v = rng.uniform(0.5, 5.0);
  ScaleStats stats = compute_scale_stats(states, spec.nq);
  return AEModel(spec, std::move(h), std::move(stats), seed);
}

double max_abs_diff(const Vector& a, const Vector& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("rank-one snapshot set yields the normalized direction") {
  const Vector v{1.0, -3.0, 2.0, 0.5};
  const std::vector<Vector> snaps(5, v);
  const PODBasis basis = pod_basis(snaps, 1);

  const double norm = norm2(v);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(basis.phi(i, 0) == doctest::Approx(-v[i] / norm).epsilon(1e-12));  // sign fix flips
  CHECK(basis.singular_values[0] == doctest::Approx(norm * std::sqrt(5.0)).epsilon(1e-12));
  CHECK_THROWS_AS(static_cast<void>(pod_basis(snaps, 2)), std::invalid_argument);
}

TEST_CASE("orthogonal snapshots reproduce their span") {
  std::vector<Vector> snaps{{2.0, 0.0, 0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, -1.0, 0.0, 0.0, 1.0}};
  const PODBasis basis = pod_basis(snaps, 2);
  CHECK(pod_reconstruction_error(snaps, basis.phi) <= 1e-12);

  const DenseMatrix gram = matmul_tn(basis.phi, basis.phi);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
}

TEST_CASE("left singular vectors match the small-gram eigensolve") {
  SUBCASE("more rows than snapshots") {
    const auto snaps = random_snapshots(20, 50, 3);
    const PODBasis basis = pod_basis(snaps, 6);
    const DenseMatrix oracle = gram_oracle_basis(snaps, 6);
    for (std::size_t j = 0; j < 6; ++j)
      for (std::size_t i = 0; i < 50; ++i)
        CHECK(std::abs(basis.phi(i, j) - oracle(i, j)) <= 1e-8);
  }
  SUBCASE("more snapshots than rows") {
    const auto snaps = random_snapshots(30, 12, 9);
    const PODBasis basis = pod_basis(snaps, 5);
    const DenseMatrix oracle = gram_oracle_basis(snaps, 5);
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t i = 0; i < 12; ++i)
        CHECK(std::abs(basis.phi(i, j) - oracle(i, j)) <= 1e-8);
  }
}

TEST_CASE("basis columns are orthonormal and values sorted") {
  const auto snaps = random_snapshots(20, 50, 21);
  const PODBasis basis = pod_basis(snaps, 10);

  const DenseMatrix gram = matmul_tn(basis.phi, basis.phi);
  double worst = 0.0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      worst = std::max(worst, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
  CHECK(worst <= 1e-10);

  REQUIRE(basis.singular_values.size() == 20);
  for (std::size_t j = 1; j < 20; ++j)
    CHECK(basis.singular_values[j] <= basis.singular_values[j - 1]);
}

TEST_CASE("reconstruction error is monotone in the basis size") {
  // correlated profiles so the spectrum actually decays
  std::vector<Vector> snaps;
  for (int t = 0; t < 30; ++t) {
    Vector s(40);
    for (int i = 0; i < 40; ++i) {
      const double x = i / 39.0, tau = t / 29.0;
      s[i] = std::exp(-20.0 * (x - 0.3 - 0.4 * tau) * (x - 0.3 - 0.4 * tau)) + 0.1 * x * tau;
    }
    snaps.push_back(std::move(s));
  }
  double prev = 2.0;
  for (std::size_t m = 1; m <= 10; ++m) {
    const double err = pod_reconstruction_error(snaps, pod_basis(snaps, m).phi);
    CHECK(err <= prev + 1e-12);
    prev = err;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("pod input validation") {
  CHECK_THROWS_AS(static_cast<void>(pod_basis({}, 1)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(pod_basis({{1.0, 2.0}, {1.0}}, 1)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(pod_basis({{1.0, 2.0}}, 0)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(pod_basis({{1.0, 2.0}}, 2)), std::invalid_argument);

  const std::vector<Vector> zeros(3, Vector(4, 0.0));
  CHECK_THROWS_AS(static_cast<void>(pod_basis(zeros, 1)), std::invalid_argument);

  const PODBasis basis = pod_basis(random_snapshots(5, 8, 2), 2);
  CHECK_THROWS_AS(static_cast<void>(pod_reconstruction_error(zeros, basis.phi)),
                  std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(pod_encode(basis, Vector(3, 1.0))), std::invalid_argument);
}

TEST_CASE("explicit problems hand the decoder jacobian through unchanged") {
  const Mesh mesh = square_tri_mesh(4);
  const EulerBCs bcs = all_outflow(mesh);
  const Vector u0 = riemann_initial(mesh, -1.2, -0.3, 1.4);
  EulerResidual prob(mesh, EulerConfig{}, bcs, u0);

  Rng rng(31);
  DenseMatrix phi(u0.size(), 3);
  for (double& v : phi.data()) v = rng.uniform(-1.0, 1.0);
  const LinearDecoder dec(phi);

  const Vector xhat{0.2, -0.4, 0.1};
  prob.begin_step(u0);
  Vector recon;
  const DenseMatrix psi = test_basis(dec, prob, xhat, &recon);
  CHECK(psi.data() == phi.data());

  const Vector expected = matvec(phi, xhat);
  CHECK(recon == expected);
}

TEST_CASE("implicit test basis matches finite differences") {
  BurgersConfig cfg;
  cfg.cells = 8;
  cfg.length = 8.0;
  cfg.mu1 = 2.0;
  const AEModel model = tiny_decoder_model(13);
  const PhysicalDecoderMap dec(model);
  REQUIRE(dec.output_dim() == 8);

  BurgersResidual prob(cfg);
  const Vector xhat{0.3, -0.6};
  Vector at(8);
  dec.eval(xhat, at);
  Vector prev = at;
  for (double& v : prev) v *= 0.95;
  prob.begin_step(prev);

  const DenseMatrix psi = test_basis(dec, prob, xhat);

  const double h = 1e-6;
  DenseMatrix fd(8, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    Vector xp = xhat, xm = xhat;
    xp[k] += h;
    xm[k] -= h;
    Vector dp(8), dm(8), rp(8), rm(8);
    dec.eval(xp, dp);
    dec.eval(xm, dm);
    prob.residual(dp, rp);
    prob.residual(dm, rm);
    for (std::size_t i = 0; i < 8; ++i) fd(i, k) = (rp[i] - rm[i]) / (2.0 * h);
  }

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fd.data().size(); ++i) {
    const double d = psi.data()[i] - fd.data()[i];
    num += d * d;
    den += fd.data()[i] * fd.data()[i];
  }
  CHECK(std::sqrt(num / den) <= 1e-5);
}

TEST_CASE("converged guess takes zero iterations") {
  BurgersConfig cfg;
  cfg.cells = 6;
  cfg.mu1 = 1.0;
  cfg.source_coeff = 0.0;
  cfg.steps = 3;
  BurgersResidual prob(cfg);

  ROMConfig rom;
  rom.kappa = 1e-3;
  const ROMTrajectory traj =
      rom_solve(LinearDecoder(DenseMatrix::identity(6)), Vector(6, 1.0), prob, rom);

  REQUIRE(traj.latent.size() == 4);
  CHECK(traj.reference_norm == 0.0);
  for (int it : traj.iterations) CHECK(it == 0);
  for (const Vector& x : traj.latent)
    for (double v : x) CHECK(v == 1.0);
}

TEST_CASE("identity basis reproduces the implicit solver") {
  BurgersConfig cfg;
  cfg.cells = 12;
  cfg.steps = 15;
  cfg.mu1 = 4.3;
  cfg.mu2 = 0.021;
  BurgersResidual prob(cfg);

  ROMConfig rom;
  rom.kappa = 1e-8;
  const ROMTrajectory traj =
      rom_solve(LinearDecoder(DenseMatrix::identity(12)), Vector(12, 1.0), prob, rom);

  REQUIRE(traj.latent.size() == 16);
  REQUIRE(traj.iterations.size() == 15);
  CHECK(traj.reference_norm > 0.0);
  for (std::size_t n = 0; n < 15; ++n) {
    CHECK(traj.iterations[n] >= 1);
    CHECK(traj.ratios[n] <= rom.kappa);
  }

  const BurgersRun fom = run_burgers(cfg);
  for (std::size_t n = 0; n <= 15; ++n)
    CHECK(max_abs_diff(traj.reconstructed[n], fom.snapshots[n]) <= 1e-6);
}

TEST_CASE("manifold and affine routes agree on a linear subspace") {
  BurgersConfig cfg;
  cfg.cells = 16;
  cfg.steps = 12;
  cfg.mu1 = 4.5;
  cfg.mu2 = 0.02;
  const BurgersRun fom = run_burgers(cfg);
  const PODBasis basis = pod_basis(fom.snapshots, 3);

  ROMConfig rom;
  rom.kappa = 1e-3;

  BurgersResidual prob_a(cfg);
  const ROMTrajectory manifold =
      rom_solve(LinearDecoder(basis.phi), pod_encode(basis, prob_a.initial_state()), prob_a, rom);

  BurgersResidual prob_b(cfg);
  const ROMTrajectory affine = pod_lspg_solve(basis, prob_b, rom);

  REQUIRE(manifold.latent.size() == affine.latent.size());
  for (std::size_t n = 0; n < manifold.latent.size(); ++n) {
    CHECK(max_abs_diff(manifold.latent[n], affine.latent[n]) <= 1e-8);
    CHECK(max_abs_diff(manifold.reconstructed[n], affine.reconstructed[n]) <= 1e-8);
  }
  CHECK(manifold.reference_norm == doctest::Approx(affine.reference_norm).epsilon(1e-12));
  CHECK(manifold.iterations == affine.iterations);
}

TEST_CASE("identity basis reproduces the explicit solver") {
  const Mesh mesh = square_tri_mesh(5);
  const EulerBCs bcs = all_outflow(mesh);
  const Vector u0 = riemann_initial(mesh, -1.4, -0.4, 1.4);
  EulerConfig euler;
  euler.steps = 15;

  EulerResidual prob(mesh, euler, bcs, u0);
  ROMConfig rom;
  rom.kappa = 1e-8;
  const ROMTrajectory traj =
      rom_solve(LinearDecoder(DenseMatrix::identity(u0.size())), u0, prob, rom);

  const EulerRun fom = run_euler(mesh, u0, euler, bcs);
  REQUIRE(traj.reconstructed.size() == fom.snapshots.size());
  for (std::size_t n = 0; n < traj.reconstructed.size(); ++n)
    CHECK(max_abs_diff(traj.reconstructed[n], fom.snapshots[n]) <= 1e-10);
  for (int it : traj.iterations) CHECK(it == 1);
}

TEST_CASE("decay schedule follows the fixed recipe") {
  StepPolicy decay{StepMode::decay, 0.5, 0.9, 10};
  CHECK(scheduled_beta(decay, 0) == 0.5);
  CHECK(scheduled_beta(decay, 9) == 0.5);
  CHECK(scheduled_beta(decay, 10) == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(scheduled_beta(decay, 19) == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(scheduled_beta(decay, 20) == doctest::Approx(0.405).epsilon(1e-15));

  StepPolicy fixed{StepMode::fixed, 0.7, 0.9, 10};
  CHECK(scheduled_beta(fixed, 50) == 0.7);
}

TEST_CASE("stalled iteration reports the best fraction and the step") {
  BurgersConfig cfg;
  cfg.cells = 6;
  cfg.steps = 4;
  BurgersResidual prob(cfg);

  ROMConfig rom;
  rom.kappa = 0.0;  // unreachable for a nonzero residual
  rom.max_iters = 2;
  CHECK_THROWS_WITH_AS(
      static_cast<void>(rom_solve(LinearDecoder(DenseMatrix::identity(6)), Vector(6, 1.0), prob,
                                  rom)),
      doctest::Contains("at step 1"), std::runtime_error);

  BurgersResidual prob2(cfg);
  try {
    static_cast<void>(
        rom_solve(LinearDecoder(DenseMatrix::identity(6)), Vector(6, 1.0), prob2, rom));
    FAIL("expected a convergence failure");
  } catch (const std::runtime_error& err) {
    CHECK(std::string(err.what()).find("best reduced-residual fraction") != std::string::npos);
  }
}

TEST_CASE("config and dimension validation") {
  BurgersConfig cfg;
  cfg.cells = 4;
  BurgersResidual prob(cfg);
  const LinearDecoder dec(DenseMatrix::identity(4));

  ROMConfig bad;
  bad.kappa = -0.1;
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(4, 1.0), prob, bad)),
                  std::invalid_argument);
  bad.kappa = 1.5;
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(4, 1.0), prob, bad)),
                  std::invalid_argument);

  ROMConfig rom;
  rom.max_iters = 0;
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(4, 1.0), prob, rom)),
                  std::invalid_argument);

  rom = ROMConfig{};
  rom.step.initial = 0.0;
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(4, 1.0), prob, rom)),
                  std::invalid_argument);

  rom = ROMConfig{};
  rom.step.mode = StepMode::decay;
  rom.step.factor = 1.2;
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(4, 1.0), prob, rom)),
                  std::invalid_argument);
  rom.step.factor = 0.9;
  rom.step.patience = 0;
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(4, 1.0), prob, rom)),
                  std::invalid_argument);

  rom = ROMConfig{};
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(3, 1.0), prob, rom)),
                  std::invalid_argument);

  BurgersConfig other = cfg;
  other.cells = 5;
  BurgersResidual mismatched(other);
  CHECK_THROWS_AS(static_cast<void>(rom_solve(dec, Vector(4, 1.0), mismatched, rom)),
                  std::invalid_argument);

  const PODBasis basis = pod_basis(random_snapshots(5, 4, 2), 2);
  ROMConfig armijo;
  armijo.step.mode = StepMode::armijo;
  CHECK_THROWS_AS(static_cast<void>(pod_lspg_solve(basis, prob, armijo)), std::invalid_argument);
}

TEST_CASE("line-searched iterations never increase the residual") {
  BurgersConfig cfg;
  cfg.cells = 12;
  cfg.steps = 6;
  const BurgersRun fom = run_burgers(cfg);
  const PODBasis basis = pod_basis(fom.snapshots, 3);
  const LinearDecoder dec(basis.phi);

  BurgersResidual prob(cfg);
  ROMConfig rom;
  rom.kappa = 1e-3;
  rom.step.mode = StepMode::armijo;

  Vector xhat0 = pod_encode(basis, prob.initial_state());
  Vector x0(12);
  dec.eval(xhat0, x0);
  prob.begin_step(x0);

  double ref = -1.0;
  const GNStep step = gn_step(xhat0, dec, prob, rom, ref);
  CHECK(step.ratio <= rom.kappa);
  CHECK(step.iterations >= 1);
  REQUIRE(step.residual_norms.size() == static_cast<std::size_t>(step.iterations) + 1);
  for (std::size_t j = 1; j < step.residual_norms.size(); ++j)
    CHECK(step.residual_norms[j] <= step.residual_norms[j - 1]);

  // the full trajectory also converges under the line search
  BurgersResidual prob2(cfg);
  const ROMTrajectory traj = rom_solve(dec, pod_encode(basis, prob2.initial_state()), prob2, rom);
  for (double ratio : traj.ratios) CHECK(ratio <= rom.kappa);
}

TEST_CASE("per-step reference renormalizes each step") {
  BurgersConfig cfg;
  cfg.cells = 10;
  cfg.steps = 5;
  BurgersResidual prob(cfg);

  ROMConfig rom;
  rom.kappa = 1e-6;
  rom.per_step_reference = true;
  const ROMTrajectory traj =
      rom_solve(LinearDecoder(DenseMatrix::identity(10)), Vector(10, 1.0), prob, rom);
  CHECK(traj.reference_norm > 0.0);
  for (double ratio : traj.ratios) CHECK(ratio <= rom.kappa);
  for (int it : traj.iterations) CHECK(it >= 1);
}
