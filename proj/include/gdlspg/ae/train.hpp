#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gdlspg/ae/model.hpp"

namespace gdlspg {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 20;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t validation_count = 0;  // snapshots held out of the update loop
  std::uint64_t seed = 0;            // drives the split and the epoch shuffles
  bool keep_best = true;             // restore the best-validation parameters at the end
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;       // summed squared error seen during the epoch
  double validation_loss = 0.0;  // nan when no snapshots are held out
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  double best_validation = std::numeric_limits<double>::quiet_NaN();
};

// Adam on the summed squared reconstruction error of the physical entries.
TrainResult train_model(AEModel& model, std::span<const Vector> states, const TrainConfig& cfg,
                        const std::function<void(const EpochStats&)>& on_epoch = {});

// Summed squared reconstruction error over a snapshot set.
double dataset_loss(const AEModel& model, std::span<const Vector> states);

namespace kernels {
// Batch loss and parameter gradients; members accumulate in index order, so
// both variants produce identical bits. grads must be zeroed by the caller.
double batch_loss_grad_serial(const AEModel& model, std::span<const Vector> states,
                              std::span<const std::size_t> members,
                              std::vector<DenseMatrix>& grads);
double batch_loss_grad_omp(const AEModel& model, std::span<const Vector> states,
                           std::span<const std::size_t> members, std::vector<DenseMatrix>& grads);
}  // namespace kernels

}  // namespace gdlspg
