#include "gdlspg/rom/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gdlspg/io/binio.hpp"

namespace gdlspg {

namespace {

// orthogonalizes the columns in place; when accumulate is non-null it picks
// up the applied rotations so cols = U * Sigma * accumulate^T afterwards
void jacobi_orthogonalize(std::vector<Vector>& cols, std::vector<Vector>* accumulate) {
  const std::size_t nc = cols.size();
  Vector sq(nc);
  double max_sq = 0.0;
  for (std::size_t j = 0; j < nc; ++j) {
    sq[j] = dot(cols[j], cols[j]);
    max_sq = std::max(max_sq, sq[j]);
  }
  // columns this far below the largest are numerical rank zero; rotating them
  // against roundoff noise never settles
  const double drop = max_sq * 1e-30;

  constexpr double tol = 1e-14;
  constexpr int max_sweeps = 50;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < nc; ++p) {
      for (std::size_t q = p + 1; q < nc; ++q) {
        if (sq[p] <= drop || sq[q] <= drop) continue;
        const double apq = dot(cols[p], cols[q]);
        if (std::abs(apq) <= tol * std::sqrt(sq[p]) * std::sqrt(sq[q])) continue;
        rotated = true;

        const double tau = (sq[q] - sq[p]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        double *cp = cols[p].data(), *cq = cols[q].data();
        for (std::size_t i = 0; i < cols[p].size(); ++i) {
          const double a = cp[i], b = cq[i];
          cp[i] = c * a - s * b;
          cq[i] = s * a + c * b;
        }
        if (accumulate) {
          double *vp = (*accumulate)[p].data(), *vq = (*accumulate)[q].data();
          for (std::size_t i = 0; i < (*accumulate)[p].size(); ++i) {
            const double a = vp[i], b = vq[i];
            vp[i] = c * a - s * b;
            vq[i] = s * a + c * b;
          }
        }
        sq[p] = dot(cols[p], cols[p]);
        sq[q] = dot(cols[q], cols[q]);
      }
    }
    if (!rotated) return;
  }
  throw std::runtime_error("pod: singular value iteration did not converge");
}

void fix_column_sign(DenseMatrix& phi, std::size_t col) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    const double a = std::abs(phi(i, col));
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (phi(arg, col) < 0.0)
    for (std::size_t i = 0; i < phi.rows(); ++i) phi(i, col) = -phi(i, col);
}

}  // namespace

PODBasis pod_basis(const std::vector<Vector>& snapshots, std::size_t m) {
  if (snapshots.empty()) throw std::invalid_argument("pod: no snapshots");
  const std::size_t n = snapshots.front().size();
  if (n == 0) throw std::invalid_argument("pod: empty state vectors");
  for (const Vector& s : snapshots)
    if (s.size() != n) throw std::invalid_argument("pod: inconsistent snapshot lengths");
  const std::size_t k = snapshots.size();
  if (m < 1 || m > std::min(n, k)) throw std::invalid_argument("pod: basis size out of range");

  // rotate along the smaller dimension; both branches yield the left singular
  // vectors and the full set of singular values
  std::vector<Vector> left;
  Vector sigma;
  if (k <= n) {
    std::vector<Vector> cols = snapshots;
    jacobi_orthogonalize(cols, nullptr);
    sigma.resize(k);
    left.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      sigma[j] = norm2(cols[j]);
      left[j] = std::move(cols[j]);
      if (sigma[j] > 0.0)
        for (double& v : left[j]) v /= sigma[j];
    }
  } else {
    // columns of the transposed snapshot matrix; accumulated rotations are
    // the left singular vectors of the original
    std::vector<Vector> cols(n, Vector(k));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < k; ++i) cols[j][i] = snapshots[i][j];
    std::vector<Vector> acc(n, Vector(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) acc[j][j] = 1.0;
    jacobi_orthogonalize(cols, &acc);
    sigma.resize(n);
    left.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      sigma[j] = norm2(cols[j]);
      left[j] = std::move(acc[j]);
    }
  }

  std::vector<std::size_t> order(sigma.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  PODBasis basis;
  basis.singular_values.resize(sigma.size());
  for (std::size_t j = 0; j < sigma.size(); ++j) basis.singular_values[j] = sigma[order[j]];
  if (basis.singular_values[m - 1] <= basis.singular_values[0] * 1e-12)
    throw std::invalid_argument("pod: snapshot rank below requested basis size");

  basis.phi = DenseMatrix(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    const Vector& v = left[order[j]];
    for (std::size_t i = 0; i < n; ++i) basis.phi(i, j) = v[i];
    fix_column_sign(basis.phi, j);
  }
  return basis;
}

double pod_reconstruction_error(const std::vector<Vector>& snapshots, const DenseMatrix& phi) {
  if (snapshots.empty()) throw std::invalid_argument("pod: no snapshots");
  double num = 0.0, den = 0.0;
  for (const Vector& x : snapshots) {
    if (x.size() != phi.rows()) throw std::invalid_argument("pod: snapshot does not match basis");
    const Vector xh = matvec_t(phi, x);
    const Vector px = matvec(phi, xh);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - px[i];
      num += d * d;
      den += x[i] * x[i];
    }
  }
  if (den == 0.0) throw std::invalid_argument("pod: zero snapshot norm");
  return std::sqrt(num) / std::sqrt(den);
}

Vector pod_encode(const PODBasis& basis, std::span<const double> x) {
  if (x.size() != basis.phi.rows()) throw std::invalid_argument("pod: state does not match basis");
  return matvec_t(basis.phi, x);
}

namespace {
constexpr std::uint32_t kBasisMagic = 0x42504447u;  // "GDPB"
constexpr std::uint32_t kBasisVersion = 1;
}  // namespace

void save_pod_basis(const std::string& path, const PODBasis& basis) {
  ByteSink sink;
  sink.u32(kBasisMagic);
  sink.u32(kBasisVersion);
  sink.u64(basis.phi.rows());
  sink.u64(basis.phi.cols());
  sink.f64s(basis.phi.data());
  sink.f64s(basis.singular_values);
  atomic_write_bytes(path, sink.bytes());
}

PODBasis load_pod_basis(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  ByteSource src(bytes);
  if (src.u32() != kBasisMagic) throw std::runtime_error(path + ": not a basis file");
  if (src.u32() != kBasisVersion) throw std::runtime_error(path + ": unsupported basis version");
  const std::size_t rows = src.u64();
  const std::size_t cols = src.u64();

  PODBasis basis;
  basis.phi = DenseMatrix(rows, cols);
  const Vector entries = src.f64s();
  if (entries.size() != rows * cols) throw std::runtime_error(path + ": basis size mismatch");
  std::copy(entries.begin(), entries.end(), basis.phi.data().begin());
  basis.singular_values = src.f64s();
  if (!src.exhausted()) throw std::runtime_error(path + ": trailing bytes");
  return basis;
}

}  // namespace gdlspg
