#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gdlspg/ae/layer_spec.hpp"
#include "gdlspg/core/diff.hpp"
#include "gdlspg/mesh/graph.hpp"

namespace gdlspg {

// Inverse-distance interpolation from coarse nodes onto fine nodes. A fine
// node sitting exactly on a coarse node copies it outright.
struct UnpoolMap {
  std::vector<std::vector<std::pair<int, double>>> rows;  // per fine node: (coarse, weight)

  DenseMatrix apply(const DenseMatrix& coarse) const;
  void add_adjoint(const DenseMatrix& d_fine, DenseMatrix& d_coarse) const;
};

UnpoolMap build_unpool(const DenseMatrix& fine_pos, const DenseMatrix& coarse_pos, int k);

// Intermediate activations of one autoencoder pass, kept for the backward
// sweep and for pushing tangents at a fixed point.
struct ForwardCache {
  std::vector<DenseMatrix> enc_in, enc_mean, enc_z;  // per encoder mp op
  Vector flat, latent;
  Vector dec_z0;
  std::vector<DenseMatrix> dec_in, dec_mean, dec_z;  // per decoder mp op
  DenseMatrix dec_out;                               // level-0 features, still scaled
  Vector output;                                     // physical units, full length
};

class AEModel {
public:
  AEModel(LayerSpec spec, Hierarchy hierarchy, ScaleStats stats, std::uint64_t init_seed);
  AEModel(LayerSpec spec, Hierarchy hierarchy, ScaleStats stats,
          std::vector<DenseMatrix> params);

  const LayerSpec& spec() const { return spec_; }
  const Hierarchy& hierarchy() const { return hierarchy_; }
  const ScaleStats& stats() const { return stats_; }
  std::vector<DenseMatrix>& params() { return params_; }
  const std::vector<DenseMatrix>& params() const { return params_; }

  std::size_t state_dim() const;      // full level-0 state length
  std::size_t physical_dim() const;   // physical slice length
  std::size_t latent_dim() const { return spec_.latent_dim; }

  Vector encode(std::span<const double> state) const;
  Vector decode(std::span<const double> latent) const;
  // decoder pushforward of k tangent directions at a fixed latent point
  void decode_with_tangents(std::span<const double> latent, const DenseMatrix& dirs, Vector& out,
                            DenseMatrix& out_dirs) const;
  DenseMatrix decoder_jacobian(std::span<const double> latent) const;

  Vector physical_slice(std::span<const double> full) const;
  // rows of a full-output matrix restricted to the physical entries
  DenseMatrix physical_rows(const DenseMatrix& full) const;

  // squared reconstruction error on the physical slice
  double sample_loss(std::span<const double> state) const;
  // same, accumulating parameter gradients (grads must match param shapes)
  double sample_loss_grad(std::span<const double> state, std::vector<DenseMatrix>& grads) const;

  void forward(std::span<const double> state, ForwardCache& cache) const;

private:
  void encode_into(std::span<const double> state, ForwardCache& cache) const;
  void decode_into(std::span<const double> latent, ForwardCache& cache) const;

  LayerSpec spec_;
  Hierarchy hierarchy_;
  ScaleStats stats_;
  std::vector<DenseMatrix> params_;
  std::vector<UnpoolMap> unpool_;  // one per decoder transition, coarsest first

  std::size_t enc_mp_base_ = 0, enc_dense_ = 0, dec_dense_ = 0, dec_mp_base_ = 0;
};

// Exposes the decoder restricted to the physical entries, for least-squares
// projection onto the learned manifold.
class PhysicalDecoderMap final : public DifferentiableMap {
public:
  explicit PhysicalDecoderMap(const AEModel& model) : model_(model) {}
  std::size_t input_dim() const override { return model_.latent_dim(); }
  std::size_t output_dim() const override { return model_.physical_dim(); }
  void eval(std::span<const double> x, std::span<double> out) const override;
  void eval_tangents(std::span<const double> x, const DenseMatrix& dirs, std::span<double> out,
                     DenseMatrix& out_dirs) const override;

private:
  const AEModel& model_;
};

void save_model(const AEModel& model, const std::string& path);
AEModel load_model(const std::string& path, Hierarchy hierarchy);
std::uint64_t model_digest(const AEModel& model);

namespace kernels {
// row j of out is the mean of the x-rows over adj[j]; isolated rows are zero
void mean_neighbors_serial(const DenseMatrix& x, const std::vector<std::vector<int>>& adj,
                           DenseMatrix& out);
void mean_neighbors_omp(const DenseMatrix& x, const std::vector<std::vector<int>>& adj,
                        DenseMatrix& out);
// adjoint: out row n collects g rows of its neighbors j weighted by 1/deg(j)
void mean_neighbors_adjoint_serial(const DenseMatrix& g, const std::vector<std::vector<int>>& adj,
                                   DenseMatrix& out);
void mean_neighbors_adjoint_omp(const DenseMatrix& g, const std::vector<std::vector<int>>& adj,
                                DenseMatrix& out);
}  // namespace kernels

}  // namespace gdlspg
