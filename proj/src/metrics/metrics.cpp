#include "gdlspg/metrics/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace gdlspg {

namespace {

double ratio_or_throw(double num_sq, double den_sq) {
  if (den_sq <= 0.0) throw std::invalid_argument("metrics: reference states have zero norm");
  return std::sqrt(num_sq) / std::sqrt(den_sq);
}

}  // namespace

double reconstruction_error(const std::vector<Vector>& states,
                            const std::function<Vector(const Vector&)>& roundtrip) {
  if (states.empty()) throw std::invalid_argument("metrics: no states");
  double num = 0.0, den = 0.0;
  for (const Vector& x : states) {
    const Vector y = roundtrip(x);
    if (y.size() != x.size()) throw std::invalid_argument("metrics: round trip changed length");
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      num += d * d;
      den += x[i] * x[i];
    }
  }
  return ratio_or_throw(num, den);
}

double ae_reconstruction_error(const SnapshotSet& set, const AEModel& model) {
  validate_snapshots(set);
  if (set.state_dim != model.state_dim())
    throw std::invalid_argument("metrics: state length does not match model");
  if (set.steps == 0) throw std::invalid_argument("metrics: no states past the initial one");

  double num = 0.0, den = 0.0;
  for (std::size_t n = 1; n <= set.steps; ++n) {
    const Vector& x = set.states[n];
    const Vector rec = model.decode(model.encode(x));
    const Vector px = model.physical_slice(x);
    const Vector pr = model.physical_slice(rec);
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double d = px[i] - pr[i];
      num += d * d;
      den += px[i] * px[i];
    }
  }
  return ratio_or_throw(num, den);
}

double state_prediction_error(const SnapshotSet& fom, const SnapshotSet& rom) {
  validate_snapshots(fom);
  validate_snapshots(rom);
  require_matching_headers(fom, rom);
  if (fom.steps == 0) throw std::invalid_argument("metrics: no states past the initial one");

  double num = 0.0, den = 0.0;
  for (std::size_t n = 1; n <= fom.steps; ++n) {
    const Vector& x = fom.states[n];
    const Vector& y = rom.states[n];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[i];
      num += d * d;
      den += x[i] * x[i];
    }
  }
  return ratio_or_throw(num, den);
}

Vector local_error_field(const SnapshotSet& fom, const SnapshotSet& rom, std::size_t step,
                         int component) {
  validate_snapshots(fom);
  validate_snapshots(rom);
  require_matching_headers(fom, rom);
  if (step > fom.steps) throw std::invalid_argument("metrics: step out of range");
  if (component >= static_cast<int>(fom.nq))
    throw std::invalid_argument("metrics: component out of range");

  const Vector& x = fom.states[step];
  const Vector& y = rom.states[step];
  if (component < 0) {
    Vector field(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) field[i] = y[i] - x[i];
    return field;
  }
  Vector field(fom.cells);
  const auto q = static_cast<std::size_t>(component);
  for (std::size_t c = 0; c < fom.cells; ++c)
    field[c] = y[c * fom.nq + q] - x[c * fom.nq + q];
  return field;
}

}  // namespace gdlspg
