#include "gdlspg/rom/lspg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gdlspg/core/spd.hpp"

namespace gdlspg {

BurgersResidual::BurgersResidual(BurgersConfig cfg)
    : cfg_(cfg), ic_(cfg.cells, 1.0), prev_(cfg.cells, 1.0) {}

void BurgersResidual::begin_step(std::span<const double> prev) {
  if (prev.size() != cfg_.cells) throw std::invalid_argument("rom: previous state length mismatch");
  prev_.assign(prev.begin(), prev.end());
}

void BurgersResidual::residual(std::span<const double> xi, std::span<double> r) const {
  const Vector value = burgers_residual(cfg_, xi, prev_);
  std::copy(value.begin(), value.end(), r.begin());
}

void BurgersResidual::apply_jacobian(std::span<const double> xi, const DenseMatrix& v,
                                     DenseMatrix& out) const {
  burgers_apply_jacobian(cfg_, xi, v, out);
}

EulerResidual::EulerResidual(const Mesh& mesh, EulerConfig cfg, EulerBCs bcs, Vector ic)
    : mesh_(&mesh), cfg_(cfg), bcs_(std::move(bcs)), ic_(std::move(ic)), target_(ic_.size()) {
  if (ic_.size() != 4 * mesh.cell_count())
    throw std::invalid_argument("rom: initial state does not match mesh");
  begin_step(ic_);
}

void EulerResidual::begin_step(std::span<const double> prev) {
  if (prev.size() != target_.size())
    throw std::invalid_argument("rom: previous state length mismatch");
  const Vector rhs = euler_rhs(*mesh_, prev, cfg_.gamma, bcs_);
  for (std::size_t i = 0; i < target_.size(); ++i) target_[i] = prev[i] - cfg_.dt * rhs[i];
}

void EulerResidual::residual(std::span<const double> xi, std::span<double> r) const {
  for (std::size_t i = 0; i < target_.size(); ++i) r[i] = xi[i] - target_[i];
}

void EulerResidual::apply_jacobian(std::span<const double>, const DenseMatrix& v,
                                   DenseMatrix& out) const {
  out = v;
}

LinearDecoder::LinearDecoder(DenseMatrix phi) : phi_(std::move(phi)) {
  if (phi_.empty()) throw std::invalid_argument("rom: empty decoder basis");
}

void LinearDecoder::eval(std::span<const double> x, std::span<double> out) const {
  const Vector y = matvec(phi_, x);
  std::copy(y.begin(), y.end(), out.begin());
}

void LinearDecoder::eval_tangents(std::span<const double> x, const DenseMatrix& dirs,
                                  std::span<double> out, DenseMatrix& out_dirs) const {
  eval(x, out);
  out_dirs = matmul(phi_, dirs);
}

void validate_rom_config(const ROMConfig& cfg) {
  if (!(cfg.kappa >= 0.0 && cfg.kappa <= 1.0))
    throw std::invalid_argument("rom: tolerance must lie in [0, 1]");
  if (cfg.max_iters < 1) throw std::invalid_argument("rom: iteration cap must be positive");
  if (!(cfg.step.initial > 0.0)) throw std::invalid_argument("rom: step size must be positive");
  if (cfg.step.mode == StepMode::decay) {
    if (!(cfg.step.factor > 0.0 && cfg.step.factor <= 1.0))
      throw std::invalid_argument("rom: decay factor must lie in (0, 1]");
    if (cfg.step.patience < 1) throw std::invalid_argument("rom: decay patience must be positive");
  }
}

double scheduled_beta(const StepPolicy& policy, int iteration) {
  if (policy.mode == StepMode::decay)
    return policy.initial * std::pow(policy.factor, iteration / policy.patience);
  return policy.initial;
}

DenseMatrix test_basis(const DifferentiableMap& dec, const ResidualProblem& prob,
                       std::span<const double> xhat, Vector* recon) {
  const std::size_t n = dec.output_dim(), m = dec.input_dim();
  if (n != prob.dim()) throw std::invalid_argument("rom: decoder output does not match problem");
  Vector x(n);
  DenseMatrix jac;
  dec.eval_tangents(xhat, DenseMatrix::identity(m), x, jac);
  DenseMatrix psi(n, m);
  prob.apply_jacobian(x, jac, psi);
  if (recon) *recon = std::move(x);
  return psi;
}

namespace {

struct GNEval {
  Vector x;      // decoded state
  DenseMatrix psi;
  Vector r;      // full residual
  Vector rhat;   // reduced residual
  double r_norm = 0.0;
  double rhat_norm = 0.0;
};

GNEval evaluate(const DifferentiableMap& dec, const ResidualProblem& prob,
                std::span<const double> xhat) {
  GNEval e;
  e.psi = test_basis(dec, prob, xhat, &e.x);
  e.r.resize(prob.dim());
  prob.residual(e.x, e.r);
  e.rhat = matvec_t(e.psi, e.r);
  e.r_norm = norm2(e.r);
  e.rhat_norm = norm2(e.rhat);
  return e;
}

double fraction_of(double value, double reference) {
  if (reference > 0.0) return value / reference;
  return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

GNStep gn_step(std::span<const double> xhat_prev, const DifferentiableMap& dec,
               const ResidualProblem& prob, const ROMConfig& cfg, double& ref_norm) {
  Vector xhat(xhat_prev.begin(), xhat_prev.end());
  GNEval e = evaluate(dec, prob, xhat);
  if (ref_norm <= 0.0) ref_norm = e.rhat_norm;

  GNStep out;
  out.residual_norms.push_back(e.r_norm);
  double ratio = fraction_of(e.rhat_norm, ref_norm);
  double best = ratio;

  int j = 0;
  while (ratio > cfg.kappa) {
    if (j >= cfg.max_iters)
      throw std::runtime_error("rom: no convergence in " + std::to_string(cfg.max_iters) +
                               " iterations, best reduced-residual fraction " +
                               std::to_string(best));
    const DenseMatrix gram = matmul_tn(e.psi, e.psi);

    if (cfg.step.mode == StepMode::armijo) {
      Vector rhs(e.rhat.size());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -e.rhat[i];
      const Vector delta = solve_spd(gram, rhs);
      const double slope = dot(e.rhat, delta);  // negative along a descent direction

      double beta = cfg.step.initial;
      bool accepted = false;
      Vector cand(xhat.size());
      for (int halvings = 0; halvings < 40; ++halvings) {
        for (std::size_t i = 0; i < xhat.size(); ++i) cand[i] = xhat[i] + beta * delta[i];
        GNEval ec = evaluate(dec, prob, cand);
        if (0.5 * ec.r_norm * ec.r_norm <=
            0.5 * e.r_norm * e.r_norm + 1e-4 * beta * slope) {
          xhat = cand;
          e = std::move(ec);
          accepted = true;
          break;
        }
        beta *= 0.5;
      }
      if (!accepted) throw std::runtime_error("rom: line search failed to find a decrease");
    } else {
      const double beta = scheduled_beta(cfg.step, j);
      Vector rhs(e.rhat.size());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -beta * e.rhat[i];
      const Vector delta = solve_spd(gram, rhs);
      axpy(1.0, delta, xhat);
      e = evaluate(dec, prob, xhat);
    }

    ++j;
    ratio = fraction_of(e.rhat_norm, ref_norm);
    best = std::min(best, ratio);
    out.residual_norms.push_back(e.r_norm);
  }

  out.xhat = std::move(xhat);
  out.recon = std::move(e.x);
  out.iterations = j;
  out.ratio = ratio;
  return out;
}

ROMTrajectory rom_solve(const DifferentiableMap& dec, Vector xhat0, ResidualProblem& prob,
                        const ROMConfig& cfg) {
  validate_rom_config(cfg);
  if (dec.input_dim() != xhat0.size())
    throw std::invalid_argument("rom: latent initial condition does not match decoder");
  if (dec.output_dim() != prob.dim())
    throw std::invalid_argument("rom: decoder output does not match problem");

  ROMTrajectory out;
  Vector x0(prob.dim());
  dec.eval(xhat0, x0);
  out.latent.push_back(std::move(xhat0));
  out.reconstructed.push_back(std::move(x0));

  double ref = -1.0;
  for (std::size_t n = 1; n <= prob.steps(); ++n) {
    if (cfg.per_step_reference) ref = -1.0;
    GNStep step;
    try {
      prob.begin_step(out.reconstructed.back());
      step = gn_step(out.latent.back(), dec, prob, cfg, ref);
    } catch (const std::runtime_error& err) {
      throw std::runtime_error(std::string(err.what()) + " at step " + std::to_string(n));
    }
    if (n == 1) out.reference_norm = ref;
    out.latent.push_back(std::move(step.xhat));
    out.reconstructed.push_back(std::move(step.recon));
    out.iterations.push_back(step.iterations);
    out.ratios.push_back(step.ratio);
  }
  return out;
}

ROMTrajectory pod_lspg_solve(const PODBasis& basis, ResidualProblem& prob, const ROMConfig& cfg) {
  validate_rom_config(cfg);
  if (cfg.step.mode == StepMode::armijo)
    throw std::invalid_argument("rom: the affine baseline uses schedule step modes only");
  const DenseMatrix& phi = basis.phi;
  if (phi.rows() != prob.dim())
    throw std::invalid_argument("rom: basis does not match problem size");
  const std::size_t n = phi.rows();

  ROMTrajectory out;
  out.latent.push_back(matvec_t(phi, prob.initial_state()));
  out.reconstructed.push_back(matvec(phi, out.latent.back()));

  double ref = -1.0;
  Vector r(n);
  DenseMatrix psi(n, phi.cols());
  for (std::size_t step = 1; step <= prob.steps(); ++step) {
    prob.begin_step(out.reconstructed.back());
    if (cfg.per_step_reference) ref = -1.0;

    Vector xhat = out.latent.back();
    Vector x = matvec(phi, xhat);
    prob.apply_jacobian(x, phi, psi);
    prob.residual(x, r);
    Vector rhat = matvec_t(psi, r);
    if (ref <= 0.0) ref = norm2(rhat);
    if (step == 1) out.reference_norm = ref;

    double ratio = fraction_of(norm2(rhat), ref);
    double best = ratio;
    int j = 0;
    while (ratio > cfg.kappa) {
      if (j >= cfg.max_iters)
        throw std::runtime_error("rom: no convergence in " + std::to_string(cfg.max_iters) +
                                 " iterations, best reduced-residual fraction " +
                                 std::to_string(best) + " at step " + std::to_string(step));
      const double beta = cfg.step.mode == StepMode::decay
                              ? cfg.step.initial * std::pow(cfg.step.factor, j / cfg.step.patience)
                              : cfg.step.initial;
      const DenseMatrix gram = matmul_tn(psi, psi);
      Vector rhs(rhat.size());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -beta * rhat[i];
      const Vector delta = solve_spd(gram, rhs);
      axpy(1.0, delta, xhat);

      x = matvec(phi, xhat);
      prob.apply_jacobian(x, phi, psi);
      prob.residual(x, r);
      rhat = matvec_t(psi, r);
      ++j;
      ratio = fraction_of(norm2(rhat), ref);
      best = std::min(best, ratio);
    }

    out.latent.push_back(std::move(xhat));
    out.reconstructed.push_back(std::move(x));
    out.iterations.push_back(j);
    out.ratios.push_back(ratio);
  }
  return out;
}

}  // namespace gdlspg
