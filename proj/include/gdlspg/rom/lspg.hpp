#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gdlspg/core/dense.hpp"
#include "gdlspg/core/diff.hpp"
#include "gdlspg/fom/burgers.hpp"
#include "gdlspg/fom/euler.hpp"
#include "gdlspg/rom/pod.hpp"

namespace gdlspg {

// Time-discrete residual r(xi; x_prev) of one full-order step. A trajectory
// fixes the previous state with begin_step, then queries the residual and its
// state Jacobian at candidate next states. One instance drives one trajectory.
struct ResidualProblem {
  virtual ~ResidualProblem() = default;
  virtual std::size_t dim() const = 0;
  virtual std::size_t steps() const = 0;
  virtual const Vector& initial_state() const = 0;
  virtual void begin_step(std::span<const double> prev) = 0;
  virtual void residual(std::span<const double> xi, std::span<double> r) const = 0;
  // (dr/dxi) * v, column by column
  virtual void apply_jacobian(std::span<const double> xi, const DenseMatrix& v,
                              DenseMatrix& out) const = 0;
};

// backward-Euler step of the 1d model: r = xi - prev - dt * f(xi)
class BurgersResidual final : public ResidualProblem {
public:
  explicit BurgersResidual(BurgersConfig cfg);

  std::size_t dim() const override { return cfg_.cells; }
  std::size_t steps() const override { return cfg_.steps; }
  const Vector& initial_state() const override { return ic_; }
  void begin_step(std::span<const double> prev) override;
  void residual(std::span<const double> xi, std::span<double> r) const override;
  void apply_jacobian(std::span<const double> xi, const DenseMatrix& v,
                      DenseMatrix& out) const override;

private:
  BurgersConfig cfg_;
  Vector ic_, prev_;
};

// forward step of the 2d model: r = xi - (prev - dt * rhs(prev)), dr/dxi = I
class EulerResidual final : public ResidualProblem {
public:
  EulerResidual(const Mesh& mesh, EulerConfig cfg, EulerBCs bcs, Vector ic);

  std::size_t dim() const override { return ic_.size(); }
  std::size_t steps() const override { return cfg_.steps; }
  const Vector& initial_state() const override { return ic_; }
  void begin_step(std::span<const double> prev) override;
  void residual(std::span<const double> xi, std::span<double> r) const override;
  void apply_jacobian(std::span<const double> xi, const DenseMatrix& v,
                      DenseMatrix& out) const override;

private:
  const Mesh* mesh_;
  EulerConfig cfg_;
  EulerBCs bcs_;
  Vector ic_, target_;
};

// affine decoder x = phi * xhat
class LinearDecoder final : public DifferentiableMap {
public:
  explicit LinearDecoder(DenseMatrix phi);

  std::size_t input_dim() const override { return phi_.cols(); }
  std::size_t output_dim() const override { return phi_.rows(); }
  void eval(std::span<const double> x, std::span<double> out) const override;
  void eval_tangents(std::span<const double> x, const DenseMatrix& dirs, std::span<double> out,
                     DenseMatrix& out_dirs) const override;

private:
  DenseMatrix phi_;
};

enum class StepMode { fixed, decay, armijo };

struct StepPolicy {
  StepMode mode = StepMode::fixed;
  double initial = 1.0;
  double factor = 0.9;  // decay multiplier applied every patience iterations
  int patience = 10;
};

struct ROMConfig {
  double kappa = 1e-3;  // converged when the reduced-residual fraction falls below this
  StepPolicy step;
  int max_iters = 200;
  bool per_step_reference = false;  // renormalize at every time step instead of the first
};

void validate_rom_config(const ROMConfig& cfg);

// step size of schedule modes at a given iteration count
double scheduled_beta(const StepPolicy& policy, int iteration);

// Psi = (dr/dx) * dDec/dxhat at Dec(xhat); recon, when given, receives Dec(xhat)
DenseMatrix test_basis(const DifferentiableMap& dec, const ResidualProblem& prob,
                       std::span<const double> xhat, Vector* recon = nullptr);

struct GNStep {
  Vector xhat;
  Vector recon;
  int iterations = 0;
  double ratio = 0.0;     // final reduced-residual fraction
  Vector residual_norms;  // full residual norm at the guess and each accepted iterate
};

// One time step of damped Gauss-Newton from the previous latent state.
// ref_norm <= 0 freezes the reference at this step's initial guess and writes
// the frozen value back; begin_step must already have been called.
GNStep gn_step(std::span<const double> xhat_prev, const DifferentiableMap& dec,
               const ResidualProblem& prob, const ROMConfig& cfg, double& ref_norm);

struct ROMTrajectory {
  std::vector<Vector> latent;         // steps + 1 entries, the encoded ic first
  std::vector<Vector> reconstructed;  // decoded counterpart of each latent entry
  std::vector<int> iterations;        // per time step
  std::vector<double> ratios;         // final convergence fraction per time step
  double reference_norm = 0.0;
};

ROMTrajectory rom_solve(const DifferentiableMap& dec, Vector xhat0, ResidualProblem& prob,
                        const ROMConfig& cfg);

// the affine baseline, written as its own loop so the manifold solver can be
// checked against it update by update
ROMTrajectory pod_lspg_solve(const PODBasis& basis, ResidualProblem& prob, const ROMConfig& cfg);

}  // namespace gdlspg
