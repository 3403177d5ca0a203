#include "gdlspg/ae/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gdlspg/core/rng.hpp"

namespace gdlspg {

namespace {

std::vector<DenseMatrix> zeros_like(const std::vector<DenseMatrix>& params) {
  std::vector<DenseMatrix> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.rows(), p.cols());
  return out;
}

void add_params(std::vector<DenseMatrix>& acc, const std::vector<DenseMatrix>& inc) {
  for (std::size_t i = 0; i < acc.size(); ++i)
    for (std::size_t e = 0; e < acc[i].data().size(); ++e) acc[i].data()[e] += inc[i].data()[e];
}

}  // namespace

namespace kernels {

double batch_loss_grad_serial(const AEModel& model, std::span<const Vector> states,
                              std::span<const std::size_t> members,
                              std::vector<DenseMatrix>& grads) {
  const std::size_t b = members.size();
  std::vector<std::vector<DenseMatrix>> buf(b);
  std::vector<double> losses(b);
  for (std::size_t m = 0; m < b; ++m) {
    buf[m] = zeros_like(model.params());
    losses[m] = model.sample_loss_grad(states[members[m]], buf[m]);
  }
  double loss = 0.0;
  for (std::size_t m = 0; m < b; ++m) {
    add_params(grads, buf[m]);
    loss += losses[m];
  }
  return loss;
}

double batch_loss_grad_omp(const AEModel& model, std::span<const Vector> states,
                           std::span<const std::size_t> members,
                           std::vector<DenseMatrix>& grads) {
  const std::size_t b = members.size();
  std::vector<std::vector<DenseMatrix>> buf(b);
  std::vector<double> losses(b);
#pragma omp parallel for schedule(dynamic) if (b > 1)
  for (std::size_t m = 0; m < b; ++m) {
    buf[m] = zeros_like(model.params());
    losses[m] = model.sample_loss_grad(states[members[m]], buf[m]);
  }
  double loss = 0.0;
  for (std::size_t m = 0; m < b; ++m) {
    add_params(grads, buf[m]);
    loss += losses[m];
  }
  return loss;
}

}  // namespace kernels

double dataset_loss(const AEModel& model, std::span<const Vector> states) {
  std::vector<double> losses(states.size());
#pragma omp parallel for schedule(dynamic) if (states.size() > 1)
  for (std::size_t i = 0; i < states.size(); ++i) losses[i] = model.sample_loss(states[i]);
  double total = 0.0;
  for (double l : losses) total += l;
  return total;
}

TrainResult train_model(AEModel& model, std::span<const Vector> states, const TrainConfig& cfg,
                        const std::function<void(const EpochStats&)>& on_epoch) {
  if (states.empty()) throw std::invalid_argument("train: empty snapshot set");
  if (cfg.batch_size == 0) throw std::invalid_argument("train: zero batch size");
  if (cfg.validation_count >= states.size())
    throw std::invalid_argument("train: validation split leaves no training snapshots");
  for (const auto& s : states)
    if (s.size() != model.state_dim()) throw std::invalid_argument("train: state length mismatch");

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(cfg.validation_count),
                                   order.end());
  order.resize(order.size() - cfg.validation_count);

  std::vector<Vector> val_states;
  val_states.reserve(val_idx.size());
  for (std::size_t i : val_idx) val_states.push_back(states[i]);

  auto grads = zeros_like(model.params());
  auto m1 = zeros_like(model.params());
  auto m2 = zeros_like(model.params());
  std::size_t step = 0;

  TrainResult result;
  result.best_validation = std::numeric_limits<double>::infinity();
  std::vector<DenseMatrix> best_params;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      for (auto& g : grads) g.fill(0.0);
      epoch_loss += kernels::batch_loss_grad_omp(
          model, states, std::span<const std::size_t>(order).subspan(start, len), grads);

      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < grads.size(); ++i) {
        auto& p = model.params()[i].data();
        const auto& g = grads[i].data();
        auto& m = m1[i].data();
        auto& v = m2[i].data();
        for (std::size_t e = 0; e < p.size(); ++e) {
          m[e] = cfg.beta1 * m[e] + (1.0 - cfg.beta1) * g[e];
          v[e] = cfg.beta2 * v[e] + (1.0 - cfg.beta2) * g[e] * g[e];
          p[e] -= cfg.learning_rate * (m[e] / c1) / (std::sqrt(v[e] / c2) + cfg.eps);
        }
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss;
    stats.validation_loss = std::numeric_limits<double>::quiet_NaN();
    if (!val_states.empty()) {
      stats.validation_loss = dataset_loss(model, val_states);
      if (stats.validation_loss < result.best_validation) {
        result.best_validation = stats.validation_loss;
        result.best_epoch = epoch;
        best_params = model.params();
      }
    }
    result.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }

  if (cfg.keep_best && !best_params.empty()) model.params() = std::move(best_params);
  return result;
}

}  // namespace gdlspg
