#pragma once

#include <functional>
#include <vector>

#include "gdlspg/ae/model.hpp"
#include "gdlspg/core/dense.hpp"
#include "gdlspg/io/snapshots.hpp"

namespace gdlspg {

// relative error of a round-trip map over a batch of states:
// sqrt(sum_n |x_n - roundtrip(x_n)|^2) / sqrt(sum_n |x_n|^2)
double reconstruction_error(const std::vector<Vector>& states,
                            const std::function<Vector(const Vector&)>& roundtrip);

// encode-decode error over the physical entries; the initial state is the
// boundary condition of the series, not a sample, so sums run over 1..steps
double ae_reconstruction_error(const SnapshotSet& set, const AEModel& model);

// relative trajectory error between a reference and a reduced run; headers
// must agree, sums run over 1..steps
double state_prediction_error(const SnapshotSet& fom, const SnapshotSet& rom);

// pointwise rom - fom at one step; component selects one variable per cell
// (stride nq), -1 keeps every entry
Vector local_error_field(const SnapshotSet& fom, const SnapshotSet& rom, std::size_t step,
                         int component = -1);

}  // namespace gdlspg
