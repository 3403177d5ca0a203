#include "gdlspg/ae/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gdlspg/io/binio.hpp"
#include "gdlspg/kernels/kernels.hpp"

namespace gdlspg {

namespace {

double elu(double z) { return z > 0.0 ? z : std::exp(z) - 1.0; }
double elu_grad(double z) { return z > 0.0 ? 1.0 : std::exp(z); }

void elu_inplace(DenseMatrix& x) {
  for (double& v : x.data()) v = elu(v);
}

// d <- d .* elu'(z), elementwise over matching shapes
void chain_elu(const DenseMatrix& z, DenseMatrix& d) {
  for (std::size_t i = 0; i < d.data().size(); ++i) d.data()[i] *= elu_grad(z.data()[i]);
}

DenseMatrix mean_neighbors(const DenseMatrix& x, const std::vector<std::vector<int>>& adj) {
  DenseMatrix out(x.rows(), x.cols());
  kernels::mean_neighbors_omp(x, adj, out);
  return out;
}

DenseMatrix mean_neighbors_adjoint(const DenseMatrix& g, const std::vector<std::vector<int>>& adj) {
  DenseMatrix out(g.rows(), g.cols());
  kernels::mean_neighbors_adjoint_omp(g, adj, out);
  return out;
}

void add_into(DenseMatrix& a, const DenseMatrix& b) {
  for (std::size_t i = 0; i < a.data().size(); ++i) a.data()[i] += b.data()[i];
}

// adjoint of mean pooling: spread each coarse row evenly over its members
DenseMatrix pool_adjoint(const AssignmentMatrix& pool, const DenseMatrix& d_coarse) {
  DenseMatrix d_fine(pool.n_fine, d_coarse.cols());
  for (std::size_t j = 0; j < pool.members.size(); ++j) {
    const double w = 1.0 / static_cast<double>(pool.members[j].size());
    const double* src = d_coarse.row(j);
    for (int n : pool.members[j]) {
      double* dst = d_fine.row(static_cast<std::size_t>(n));
      for (std::size_t c = 0; c < d_coarse.cols(); ++c) dst[c] += w * src[c];
    }
  }
  return d_fine;
}

}  // namespace

namespace kernels {

void mean_neighbors_serial(const DenseMatrix& x, const std::vector<std::vector<int>>& adj,
                           DenseMatrix& out) {
  const std::size_t n = x.rows(), f = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t c = 0; c < f; ++c) oi[c] = 0.0;
    if (adj[i].empty()) continue;
    for (int j : adj[i]) {
      const double* xj = x.row(static_cast<std::size_t>(j));
      for (std::size_t c = 0; c < f; ++c) oi[c] += xj[c];
    }
    const double inv = 1.0 / static_cast<double>(adj[i].size());
    for (std::size_t c = 0; c < f; ++c) oi[c] *= inv;
  }
}

void mean_neighbors_omp(const DenseMatrix& x, const std::vector<std::vector<int>>& adj,
                        DenseMatrix& out) {
  const std::size_t n = x.rows(), f = x.cols();
#pragma omp parallel for schedule(static) if (n * f > 4096)
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t c = 0; c < f; ++c) oi[c] = 0.0;
    if (adj[i].empty()) continue;
    for (int j : adj[i]) {
      const double* xj = x.row(static_cast<std::size_t>(j));
      for (std::size_t c = 0; c < f; ++c) oi[c] += xj[c];
    }
    const double inv = 1.0 / static_cast<double>(adj[i].size());
    for (std::size_t c = 0; c < f; ++c) oi[c] *= inv;
  }
}

void mean_neighbors_adjoint_serial(const DenseMatrix& g, const std::vector<std::vector<int>>& adj,
                                   DenseMatrix& out) {
  const std::size_t n = g.rows(), f = g.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t c = 0; c < f; ++c) oi[c] = 0.0;
    for (int j : adj[i]) {
      const double w = 1.0 / static_cast<double>(adj[static_cast<std::size_t>(j)].size());
      const double* gj = g.row(static_cast<std::size_t>(j));
      for (std::size_t c = 0; c < f; ++c) oi[c] += w * gj[c];
    }
  }
}

void mean_neighbors_adjoint_omp(const DenseMatrix& g, const std::vector<std::vector<int>>& adj,
                                DenseMatrix& out) {
  const std::size_t n = g.rows(), f = g.cols();
#pragma omp parallel for schedule(static) if (n * f > 4096)
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.row(i);
    for (std::size_t c = 0; c < f; ++c) oi[c] = 0.0;
    for (int j : adj[i]) {
      const double w = 1.0 / static_cast<double>(adj[static_cast<std::size_t>(j)].size());
      const double* gj = g.row(static_cast<std::size_t>(j));
      for (std::size_t c = 0; c < f; ++c) oi[c] += w * gj[c];
    }
  }
}

}  // namespace kernels

DenseMatrix UnpoolMap::apply(const DenseMatrix& coarse) const {
  DenseMatrix out(rows.size(), coarse.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double* oi = out.row(i);
    for (const auto& [c, w] : rows[i]) {
      const double* src = coarse.row(static_cast<std::size_t>(c));
      for (std::size_t q = 0; q < coarse.cols(); ++q) oi[q] += w * src[q];
    }
  }
  return out;
}

void UnpoolMap::add_adjoint(const DenseMatrix& d_fine, DenseMatrix& d_coarse) const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* gi = d_fine.row(i);
    for (const auto& [c, w] : rows[i]) {
      double* dst = d_coarse.row(static_cast<std::size_t>(c));
      for (std::size_t q = 0; q < d_fine.cols(); ++q) dst[q] += w * gi[q];
    }
  }
}

UnpoolMap build_unpool(const DenseMatrix& fine_pos, const DenseMatrix& coarse_pos, int k) {
  if (fine_pos.cols() != coarse_pos.cols())
    throw std::invalid_argument("unpool: position dimensions differ");
  const std::size_t nf = fine_pos.rows(), nc = coarse_pos.rows(), d = fine_pos.cols();
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), nc);

  UnpoolMap map;
  map.rows.resize(nf);
  std::vector<double> d2(nc);
  std::vector<int> order(nc);
  for (std::size_t i = 0; i < nf; ++i) {
    int hit = -1;
    for (std::size_t c = 0; c < nc; ++c) {
      double s = 0.0;
      for (std::size_t q = 0; q < d; ++q) {
        const double diff = fine_pos(i, q) - coarse_pos(c, q);
        s += diff * diff;
      }
      d2[c] = s;
      if (s == 0.0 && hit < 0) hit = static_cast<int>(c);
    }
    // a fine node coincident with a coarse node takes its value verbatim
    if (hit >= 0) {
      map.rows[i] = {{hit, 1.0}};
      continue;
    }
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk), order.end(),
                      [&](int a, int b) { return d2[a] != d2[b] ? d2[a] < d2[b] : a < b; });
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk));
    double total = 0.0;
    for (std::size_t m = 0; m < kk; ++m) total += 1.0 / std::sqrt(d2[static_cast<std::size_t>(order[m])]);
    map.rows[i].reserve(kk);
    for (std::size_t m = 0; m < kk; ++m) {
      const int c = order[m];
      map.rows[i].push_back({c, (1.0 / std::sqrt(d2[static_cast<std::size_t>(c)])) / total});
    }
  }
  return map;
}

AEModel::AEModel(LayerSpec spec, Hierarchy hierarchy, ScaleStats stats, std::uint64_t init_seed)
    : spec_(std::move(spec)), hierarchy_(std::move(hierarchy)), stats_(std::move(stats)) {
  const auto shapes = param_shapes(spec_, hierarchy_);
  Rng rng(init_seed);
  params_.reserve(shapes.size());
  for (const auto& s : shapes) {
    const double a = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    DenseMatrix w(s.rows, s.cols);
    for (double& v : w.data()) v = rng.uniform(-a, a);
    params_.push_back(std::move(w));
  }

  const std::size_t nl = hierarchy_.level_count();
  enc_mp_base_ = 0;
  enc_dense_ = 2 * (nl - 1) * static_cast<std::size_t>(spec_.mp_depth);
  dec_dense_ = enc_dense_ + 1;
  dec_mp_base_ = dec_dense_ + 1;
  for (std::size_t j = 1; j < nl; ++j) {
    const std::size_t lvl = nl - j;
    unpool_.push_back(build_unpool(hierarchy_.levels[lvl - 1].graph.pos,
                                   hierarchy_.levels[lvl].graph.pos, spec_.unpool_k));
  }
}

AEModel::AEModel(LayerSpec spec, Hierarchy hierarchy, ScaleStats stats,
                 std::vector<DenseMatrix> params)
    : AEModel(std::move(spec), std::move(hierarchy), std::move(stats), std::uint64_t{0}) {
  const auto shapes = param_shapes(spec_, hierarchy_);
  if (params.size() != shapes.size()) throw std::invalid_argument("model: parameter list size mismatch");
  for (std::size_t i = 0; i < shapes.size(); ++i)
    if (params[i].rows() != shapes[i].rows || params[i].cols() != shapes[i].cols)
      throw std::invalid_argument("model: parameter shape mismatch at " + shapes[i].role);
  params_ = std::move(params);
}

std::size_t AEModel::state_dim() const {
  return hierarchy_.levels[0].graph.node_count() * spec_.nq;
}

std::size_t AEModel::physical_dim() const {
  return physical_node_count(spec_, hierarchy_) * spec_.nq;
}

void AEModel::encode_into(std::span<const double> state, ForwardCache& cache) const {
  const std::size_t nl = hierarchy_.level_count();
  const std::size_t n0 = hierarchy_.levels[0].graph.node_count();
  if (state.size() != n0 * spec_.nq) throw std::invalid_argument("encode: state length mismatch");

  DenseMatrix x = matricize(state, n0, spec_.nq);
  scale_inplace(x, stats_);
  for (std::size_t i = 1; i < nl; ++i) {
    const auto& adj = hierarchy_.levels[i - 1].graph.adj;
    for (int s = 0; s < spec_.mp_depth; ++s) {
      const std::size_t idx = (i - 1) * static_cast<std::size_t>(spec_.mp_depth) +
                              static_cast<std::size_t>(s);
      const DenseMatrix& w_self = params_[enc_mp_base_ + 2 * idx];
      const DenseMatrix& w_neigh = params_[enc_mp_base_ + 2 * idx + 1];
      cache.enc_in.push_back(x);
      DenseMatrix mean = mean_neighbors(x, adj);
      DenseMatrix z = matmul(x, w_self);
      add_into(z, matmul(mean, w_neigh));
      cache.enc_mean.push_back(std::move(mean));
      cache.enc_z.push_back(z);
      elu_inplace(z);
      x = std::move(z);
    }
    x = hierarchy_.levels[i - 1].pool.apply(x);
  }
  cache.flat = vectorize(x);
  cache.latent = matvec(params_[enc_dense_], cache.flat);
}

void AEModel::decode_into(std::span<const double> latent, ForwardCache& cache) const {
  const std::size_t nl = hierarchy_.level_count();
  if (latent.size() != spec_.latent_dim) throw std::invalid_argument("decode: latent length mismatch");

  cache.latent.assign(latent.begin(), latent.end());
  cache.dec_z0 = matvec(params_[dec_dense_], latent);
  Vector bar = cache.dec_z0;
  for (double& v : bar) v = elu(v);

  const std::size_t n_last = hierarchy_.levels[nl - 1].graph.node_count();
  DenseMatrix x = matricize(bar, n_last, spec_.widths[nl - 1]);
  for (std::size_t j = 1; j < nl; ++j) {
    const std::size_t lvl = nl - j;
    x = unpool_[j - 1].apply(x);
    const auto& adj = hierarchy_.levels[lvl - 1].graph.adj;
    for (int s = 0; s < spec_.mp_depth; ++s) {
      const std::size_t idx = (j - 1) * static_cast<std::size_t>(spec_.mp_depth) +
                              static_cast<std::size_t>(s);
      const DenseMatrix& w_self = params_[dec_mp_base_ + 2 * idx];
      const DenseMatrix& w_neigh = params_[dec_mp_base_ + 2 * idx + 1];
      cache.dec_in.push_back(x);
      DenseMatrix mean = mean_neighbors(x, adj);
      DenseMatrix z = matmul(x, w_self);
      add_into(z, matmul(mean, w_neigh));
      cache.dec_mean.push_back(std::move(mean));
      cache.dec_z.push_back(z);
      const bool last_op = (j == nl - 1) && (s == spec_.mp_depth - 1);
      if (!last_op) elu_inplace(z);
      x = std::move(z);
    }
  }
  cache.dec_out = x;
  inv_scale_inplace(x, stats_);
  cache.output = vectorize(x);
}

void AEModel::forward(std::span<const double> state, ForwardCache& cache) const {
  encode_into(state, cache);
  Vector latent = cache.latent;
  decode_into(latent, cache);
}

Vector AEModel::encode(std::span<const double> state) const {
  ForwardCache cache;
  encode_into(state, cache);
  return cache.latent;
}

Vector AEModel::decode(std::span<const double> latent) const {
  ForwardCache cache;
  decode_into(latent, cache);
  return cache.output;
}

void AEModel::decode_with_tangents(std::span<const double> latent, const DenseMatrix& dirs,
                                   Vector& out, DenseMatrix& out_dirs) const {
  const std::size_t nl = hierarchy_.level_count();
  const std::size_t k = dirs.cols();
  if (dirs.rows() != spec_.latent_dim) throw std::invalid_argument("decode: tangent rows mismatch");

  ForwardCache cache;
  decode_into(latent, cache);
  out = cache.output;

  // tangent per direction, carried as a node-feature matrix alongside the primal
  const std::size_t n_last = hierarchy_.levels[nl - 1].graph.node_count();
  std::vector<DenseMatrix> tan(k);
  for (std::size_t d = 0; d < k; ++d) {
    Vector dir(spec_.latent_dim);
    for (std::size_t r = 0; r < spec_.latent_dim; ++r) dir[r] = dirs(r, d);
    Vector dz0 = matvec(params_[dec_dense_], dir);
    for (std::size_t r = 0; r < dz0.size(); ++r) dz0[r] *= elu_grad(cache.dec_z0[r]);
    tan[d] = matricize(dz0, n_last, spec_.widths[nl - 1]);
  }

  for (std::size_t j = 1; j < nl; ++j) {
    const std::size_t lvl = nl - j;
    const auto& adj = hierarchy_.levels[lvl - 1].graph.adj;
    for (std::size_t d = 0; d < k; ++d) tan[d] = unpool_[j - 1].apply(tan[d]);
    for (int s = 0; s < spec_.mp_depth; ++s) {
      const std::size_t idx = (j - 1) * static_cast<std::size_t>(spec_.mp_depth) +
                              static_cast<std::size_t>(s);
      const DenseMatrix& w_self = params_[dec_mp_base_ + 2 * idx];
      const DenseMatrix& w_neigh = params_[dec_mp_base_ + 2 * idx + 1];
      const DenseMatrix& z = cache.dec_z[idx];
      const bool last_op = (j == nl - 1) && (s == spec_.mp_depth - 1);
      for (std::size_t d = 0; d < k; ++d) {
        DenseMatrix dz = matmul(tan[d], w_self);
        add_into(dz, matmul(mean_neighbors(tan[d], adj), w_neigh));
        if (!last_op) chain_elu(z, dz);
        tan[d] = std::move(dz);
      }
    }
  }

  const std::size_t full = state_dim();
  out_dirs = DenseMatrix(full, k);
  for (std::size_t d = 0; d < k; ++d) {
    const Vector flat = vectorize(tan[d]);
    for (std::size_t e = 0; e < full; ++e) {
      const std::size_t q = e % spec_.nq;
      const double span = stats_.maxs[q] - stats_.mins[q];
      out_dirs(e, d) = span > 0.0 ? flat[e] * span : 0.0;
    }
  }
}

DenseMatrix AEModel::decoder_jacobian(std::span<const double> latent) const {
  Vector out;
  DenseMatrix jac;
  decode_with_tangents(latent, DenseMatrix::identity(spec_.latent_dim), out, jac);
  return jac;
}

Vector AEModel::physical_slice(std::span<const double> full) const {
  if (full.size() != state_dim()) throw std::invalid_argument("physical slice: length mismatch");
  const std::size_t p0 = spec_.phys_begin * spec_.nq;
  Vector out(physical_dim());
  std::copy(full.begin() + static_cast<std::ptrdiff_t>(p0),
            full.begin() + static_cast<std::ptrdiff_t>(p0 + out.size()), out.begin());
  return out;
}

DenseMatrix AEModel::physical_rows(const DenseMatrix& full) const {
  if (full.rows() != state_dim()) throw std::invalid_argument("physical rows: shape mismatch");
  const std::size_t p0 = spec_.phys_begin * spec_.nq;
  DenseMatrix out(physical_dim(), full.cols());
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < full.cols(); ++c) out(r, c) = full(p0 + r, c);
  return out;
}

double AEModel::sample_loss(std::span<const double> state) const {
  ForwardCache cache;
  forward(state, cache);
  const std::size_t p0 = spec_.phys_begin * spec_.nq;
  double loss = 0.0;
  for (std::size_t e = p0; e < p0 + physical_dim(); ++e) {
    const double diff = cache.output[e] - state[e];
    loss += diff * diff;
  }
  return loss;
}

double AEModel::sample_loss_grad(std::span<const double> state,
                                 std::vector<DenseMatrix>& grads) const {
  const std::size_t nl = hierarchy_.level_count();
  ForwardCache cache;
  forward(state, cache);

  const std::size_t p0 = spec_.phys_begin * spec_.nq;
  const std::size_t n0 = hierarchy_.levels[0].graph.node_count();
  double loss = 0.0;
  Vector d_out(state_dim(), 0.0);
  for (std::size_t e = p0; e < p0 + physical_dim(); ++e) {
    const double diff = cache.output[e] - state[e];
    loss += diff * diff;
    d_out[e] = 2.0 * diff;
  }

  // back through the affine unscaling: entries of constant features are flat
  DenseMatrix dx(n0, spec_.nq);
  for (std::size_t e = 0; e < d_out.size(); ++e) {
    const std::size_t q = e % spec_.nq;
    const double span = stats_.maxs[q] - stats_.mins[q];
    dx(e / spec_.nq, q) = span > 0.0 ? d_out[e] * span : 0.0;
  }

  for (std::size_t j = nl - 1; j >= 1; --j) {
    const std::size_t lvl = nl - j;
    const auto& adj = hierarchy_.levels[lvl - 1].graph.adj;
    for (int s = spec_.mp_depth - 1; s >= 0; --s) {
      const std::size_t idx = (j - 1) * static_cast<std::size_t>(spec_.mp_depth) +
                              static_cast<std::size_t>(s);
      const DenseMatrix& w_self = params_[dec_mp_base_ + 2 * idx];
      const DenseMatrix& w_neigh = params_[dec_mp_base_ + 2 * idx + 1];
      const bool last_op = (j == nl - 1) && (s == spec_.mp_depth - 1);
      DenseMatrix dz = std::move(dx);
      if (!last_op) chain_elu(cache.dec_z[idx], dz);
      add_into(grads[dec_mp_base_ + 2 * idx], matmul_tn(cache.dec_in[idx], dz));
      add_into(grads[dec_mp_base_ + 2 * idx + 1], matmul_tn(cache.dec_mean[idx], dz));
      dx = matmul(dz, transpose(w_self));
      add_into(dx, mean_neighbors_adjoint(matmul(dz, transpose(w_neigh)), adj));
    }
    DenseMatrix d_coarse(hierarchy_.levels[lvl].graph.node_count(), dx.cols());
    unpool_[j - 1].add_adjoint(dx, d_coarse);
    dx = std::move(d_coarse);
  }

  Vector d_bar = vectorize(dx);
  for (std::size_t r = 0; r < d_bar.size(); ++r) d_bar[r] *= elu_grad(cache.dec_z0[r]);
  DenseMatrix& gw_dec = grads[dec_dense_];
  for (std::size_t r = 0; r < gw_dec.rows(); ++r)
    for (std::size_t c = 0; c < gw_dec.cols(); ++c) gw_dec(r, c) += d_bar[r] * cache.latent[c];
  Vector d_latent = matvec_t(params_[dec_dense_], d_bar);

  DenseMatrix& gw_enc = grads[enc_dense_];
  for (std::size_t r = 0; r < gw_enc.rows(); ++r)
    for (std::size_t c = 0; c < gw_enc.cols(); ++c) gw_enc(r, c) += d_latent[r] * cache.flat[c];
  Vector d_flat = matvec_t(params_[enc_dense_], d_latent);

  dx = matricize(d_flat, hierarchy_.levels[nl - 1].graph.node_count(), spec_.widths[nl - 1]);
  for (std::size_t i = nl - 1; i >= 1; --i) {
    dx = pool_adjoint(hierarchy_.levels[i - 1].pool, dx);
    const auto& adj = hierarchy_.levels[i - 1].graph.adj;
    for (int s = spec_.mp_depth - 1; s >= 0; --s) {
      const std::size_t idx = (i - 1) * static_cast<std::size_t>(spec_.mp_depth) +
                              static_cast<std::size_t>(s);
      const DenseMatrix& w_self = params_[enc_mp_base_ + 2 * idx];
      const DenseMatrix& w_neigh = params_[enc_mp_base_ + 2 * idx + 1];
      DenseMatrix dz = std::move(dx);
      chain_elu(cache.enc_z[idx], dz);
      add_into(grads[enc_mp_base_ + 2 * idx], matmul_tn(cache.enc_in[idx], dz));
      add_into(grads[enc_mp_base_ + 2 * idx + 1], matmul_tn(cache.enc_mean[idx], dz));
      dx = matmul(dz, transpose(w_self));
      add_into(dx, mean_neighbors_adjoint(matmul(dz, transpose(w_neigh)), adj));
    }
  }
  return loss;
}

void PhysicalDecoderMap::eval(std::span<const double> x, std::span<double> out) const {
  const Vector full = model_.decode(x);
  const Vector phys = model_.physical_slice(full);
  std::copy(phys.begin(), phys.end(), out.begin());
}

void PhysicalDecoderMap::eval_tangents(std::span<const double> x, const DenseMatrix& dirs,
                                       std::span<double> out, DenseMatrix& out_dirs) const {
  Vector full;
  DenseMatrix full_dirs;
  model_.decode_with_tangents(x, dirs, full, full_dirs);
  const Vector phys = model_.physical_slice(full);
  std::copy(phys.begin(), phys.end(), out.begin());
  out_dirs = model_.physical_rows(full_dirs);
}

namespace {

constexpr std::uint32_t kModelMagic = 0x444d4447u;  // "GDMD"
constexpr std::uint32_t kModelVersion = 1;

void write_model_payload(const AEModel& m, ByteSink& sink) {
  sink.u32(kModelMagic);
  sink.u32(kModelVersion);
  sink.u64(hierarchy_digest(m.hierarchy()));
  const LayerSpec& s = m.spec();
  sink.u64(s.nq);
  sink.u64(s.latent_dim);
  sink.u64(s.widths.size());
  for (std::size_t w : s.widths) sink.u64(w);
  sink.i64(s.mp_depth);
  sink.i64(s.unpool_k);
  sink.u64(s.phys_begin);
  sink.u64(s.phys_count);
  sink.f64s(m.stats().mins);
  sink.f64s(m.stats().maxs);
  sink.u64(m.params().size());
  const auto shapes = param_shapes(s, m.hierarchy());
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    sink.u64(m.params()[i].rows());
    sink.u64(m.params()[i].cols());
    sink.str(shapes[i].role);
    sink.f64s(m.params()[i].data());
  }
}

}  // namespace

void save_model(const AEModel& model, const std::string& path) {
  ByteSink sink;
  write_model_payload(model, sink);
  atomic_write_bytes(path, sink.bytes());
}

AEModel load_model(const std::string& path, Hierarchy hierarchy) {
  const auto bytes = read_file_bytes(path);
  ByteSource src(bytes);
  if (src.u32() != kModelMagic) throw std::runtime_error(path + ": not a model checkpoint");
  if (src.u32() != kModelVersion) throw std::runtime_error(path + ": unsupported checkpoint version");
  if (src.u64() != hierarchy_digest(hierarchy))
    throw std::runtime_error(path + ": checkpoint was built for a different hierarchy");

  LayerSpec spec;
  spec.nq = src.u64();
  spec.latent_dim = src.u64();
  spec.widths.resize(src.u64());
  for (std::size_t& w : spec.widths) w = src.u64();
  spec.mp_depth = static_cast<int>(src.i64());
  spec.unpool_k = static_cast<int>(src.i64());
  spec.phys_begin = src.u64();
  spec.phys_count = src.u64();

  ScaleStats stats;
  stats.mins = src.f64s();
  stats.maxs = src.f64s();

  const auto shapes = param_shapes(spec, hierarchy);
  if (src.u64() != shapes.size()) throw std::runtime_error(path + ": parameter count mismatch");
  std::vector<DenseMatrix> params;
  params.reserve(shapes.size());
  for (const auto& shape : shapes) {
    const std::size_t rows = src.u64(), cols = src.u64();
    const std::string role = src.str();
    if (rows != shape.rows || cols != shape.cols || role != shape.role)
      throw std::runtime_error(path + ": parameter layout mismatch at " + shape.role);
    DenseMatrix w(rows, cols);
    w.data() = src.f64s();
    if (w.data().size() != rows * cols) throw std::runtime_error(path + ": parameter data truncated");
    params.push_back(std::move(w));
  }
  if (!src.exhausted()) throw std::runtime_error(path + ": trailing bytes");
  return AEModel(std::move(spec), std::move(hierarchy), std::move(stats), std::move(params));
}

std::uint64_t model_digest(const AEModel& model) {
  ByteSink sink;
  write_model_payload(model, sink);
  return sink.digest();
}

}  // namespace gdlspg
