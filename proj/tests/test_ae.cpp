#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gdlspg/ae/model.hpp"
#include "gdlspg/ae/train.hpp"
#include "gdlspg/coarsen/hierarchy.hpp"
#include "gdlspg/core/rng.hpp"
#include "gdlspg/io/binio.hpp"

using namespace gdlspg;

namespace {

// hierarchy with prescribed level sizes and block pooling, no eigensolves;
// good enough for shape and weight-count checks
Hierarchy stub_hierarchy(const std::vector<std::size_t>& sizes) {
  Hierarchy h;
  for (std::size_t lvl = 0; lvl < sizes.size(); ++lvl) {
    HierarchyLevel level;
    DenseMatrix pos(sizes[lvl], 1);
    for (std::size_t i = 0; i < sizes[lvl]; ++i) pos(i, 0) = static_cast<double>(i);
    level.graph = radius_graph(pos, 1.0);
    level.radius = 1.0;
    if (lvl + 1 < sizes.size()) {
      const std::size_t nf = sizes[lvl], nc = sizes[lvl + 1];
      level.pool.n_fine = nf;
      level.pool.members.resize(nc);
      for (std::size_t i = 0; i < nf; ++i)
        level.pool.members[i * nc / nf].push_back(static_cast<int>(i));
    }
    h.levels.push_back(std::move(level));
  }
  return h;
}

Hierarchy line_hierarchy(std::size_t n0, const std::vector<std::size_t>& sizes,
                         std::uint64_t seed) {
  DenseMatrix pos(n0, 1);
  for (std::size_t i = 0; i < n0; ++i) pos(i, 0) = static_cast<double>(i);
  const double span = static_cast<double>(n0 - 1);
  std::vector<double> radii{1.5};
  for (std::size_t s : sizes) radii.push_back(line_graph_radius(span, s));
  return build_hierarchy(pos, sizes, radii, seed);
}

std::size_t sum_role_prefix(const std::vector<ParamShape>& shapes, const std::string& prefix) {
  std::size_t total = 0;
  for (const auto& s : shapes)
    if (s.role.rfind(prefix, 0) == 0) total += s.rows * s.cols;
  return total;
}

std::vector<Vector> random_states(std::size_t count, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> states(count, Vector(len));
  for (auto& s : states)
    for (double& v : s) v = rng.uniform(-1.0, 2.0);
  return states;
}

AEModel small_model(std::uint64_t seed, std::vector<Vector>* states_out = nullptr) {
  Hierarchy h = line_hierarchy(12, {4, 2}, 7);
  LayerSpec spec;
  spec.nq = 2;
  spec.latent_dim = 3;
  spec.widths = {2, 4, 8};
  spec.phys_begin = 2;
  spec.phys_count = 8;
  auto states = random_states(7, 24, 11);
  ScaleStats stats = compute_scale_stats(states, spec.nq);
  if (states_out) *states_out = std::move(states);
  return AEModel(spec, std::move(h), std::move(stats), seed);
}

// full decoder (all entries, physical units) exposed for jacobian checks
class FullDecoderMap final : public DifferentiableMap {
public:
  explicit FullDecoderMap(const AEModel& m) : m_(m) {}
  std::size_t input_dim() const override { return m_.latent_dim(); }
  std::size_t output_dim() const override { return m_.state_dim(); }
  void eval(std::span<const double> x, std::span<double> out) const override {
    const Vector v = m_.decode(x);
    std::copy(v.begin(), v.end(), out.begin());
  }
  void eval_tangents(std::span<const double> x, const DenseMatrix& dirs, std::span<double> out,
                     DenseMatrix& out_dirs) const override {
    Vector v;
    m_.decode_with_tangents(x, dirs, v, out_dirs);
    std::copy(v.begin(), v.end(), out.begin());
  }

private:
  const AEModel& m_;
};

double rel_frobenius(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix d = a;
  for (std::size_t i = 0; i < d.data().size(); ++i) d.data()[i] -= b.data()[i];
  const double ref = frobenius_norm(b);
  return frobenius_norm(d) / (ref > 0.0 ? ref : 1.0);
}

}  // namespace

TEST_CASE("weight shapes match the narrow-shock architecture tables") {
  Hierarchy h = stub_hierarchy({316, 64, 16, 4, 2});
  LayerSpec spec;
  spec.nq = 1;
  spec.latent_dim = 3;
  spec.widths = {1, 8, 16, 32, 64};
  const auto shapes = param_shapes(spec, h);

  CHECK(sum_role_prefix(shapes, "enc_mp1_") == 144);
  CHECK(sum_role_prefix(shapes, "enc_mp2_") == 768);
  CHECK(sum_role_prefix(shapes, "enc_mp3_") == 3072);
  CHECK(sum_role_prefix(shapes, "enc_mp4_") == 12288);
  CHECK(sum_role_prefix(shapes, "enc_dense") == 3 * 128);
  CHECK(sum_role_prefix(shapes, "dec_dense") == 128 * 3);
  CHECK(sum_role_prefix(shapes, "dec_mp4_") == 12288);
  CHECK(sum_role_prefix(shapes, "dec_mp3_") == 3072);
  CHECK(sum_role_prefix(shapes, "dec_mp2_") == 768);
  CHECK(sum_role_prefix(shapes, "dec_mp1_") == 144);
  CHECK(param_count(spec, h) == 2 * (144 + 768 + 3072 + 12288) + 2 * 3 * 128);
}

TEST_CASE("weight shapes match the four-field architecture tables") {
  Hierarchy h = stub_hierarchy({4328, 512, 64, 8, 2});
  LayerSpec spec;
  spec.nq = 4;
  spec.latent_dim = 5;
  spec.widths = {4, 16, 64, 128, 256};
  const auto shapes = param_shapes(spec, h);

  CHECK(sum_role_prefix(shapes, "enc_mp1_") == 640);
  CHECK(sum_role_prefix(shapes, "enc_mp2_") == 10240);
  CHECK(sum_role_prefix(shapes, "enc_mp3_") == 49152);
  CHECK(sum_role_prefix(shapes, "enc_mp4_") == 196608);
  CHECK(sum_role_prefix(shapes, "enc_dense") == 5 * 512);
  CHECK(sum_role_prefix(shapes, "dec_dense") == 512 * 5);
  CHECK(sum_role_prefix(shapes, "dec_mp4_") == 196608);
  CHECK(sum_role_prefix(shapes, "dec_mp1_") == 640);
}

TEST_CASE("layer spec validation rejects malformed inputs") {
  Hierarchy h = stub_hierarchy({8, 3});
  LayerSpec spec;
  spec.nq = 2;
  spec.latent_dim = 2;
  spec.widths = {2, 4};

  CHECK_NOTHROW(validate_spec(spec, h));
  LayerSpec bad = spec;
  bad.widths = {3, 4};  // level-0 width must equal nq
  CHECK_THROWS(validate_spec(bad, h));
  bad = spec;
  bad.widths = {2};
  CHECK_THROWS(validate_spec(bad, h));
  bad = spec;
  bad.phys_begin = 6;
  bad.phys_count = 3;
  CHECK_THROWS(validate_spec(bad, h));
  bad = spec;
  bad.latent_dim = 0;
  CHECK_THROWS(validate_spec(bad, h));
}

TEST_CASE("mean over neighbors follows the adjacency lists") {
  // path 0-1-2 plus an isolated node 3
  std::vector<std::vector<int>> adj{{1}, {0, 2}, {1}, {}};
  DenseMatrix x(4, 1);
  x(0, 0) = 1.0;
  x(1, 0) = 2.0;
  x(2, 0) = 3.0;
  x(3, 0) = 9.0;
  DenseMatrix out(4, 1);
  kernels::mean_neighbors_serial(x, adj, out);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 0) == 2.0);
  CHECK(out(2, 0) == 2.0);
  CHECK(out(3, 0) == 0.0);
}

TEST_CASE("mean-neighbor kernels and adjoints agree bitwise") {
  Rng rng(5);
  DenseMatrix pos(40, 2);
  for (std::size_t i = 0; i < 40; ++i) {
    pos(i, 0) = rng.next_double();
    pos(i, 1) = rng.next_double();
  }
  Graph g = radius_graph(pos, 0.3);
  DenseMatrix x(40, 5);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);

  DenseMatrix a(40, 5), b(40, 5);
  kernels::mean_neighbors_serial(x, g.adj, a);
  kernels::mean_neighbors_omp(x, g.adj, b);
  CHECK(a.data() == b.data());

  kernels::mean_neighbors_adjoint_serial(x, g.adj, a);
  kernels::mean_neighbors_adjoint_omp(x, g.adj, b);
  CHECK(a.data() == b.data());
}

TEST_CASE("mean-neighbor adjoint transposes the forward map") {
  Rng rng(17);
  DenseMatrix pos(15, 1);
  for (std::size_t i = 0; i < 15; ++i) pos(i, 0) = rng.uniform(0.0, 5.0);
  Graph g = radius_graph(pos, 0.8);

  DenseMatrix x(15, 3), gup(15, 3);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  for (double& v : gup.data()) v = rng.uniform(-1.0, 1.0);

  DenseMatrix fwd(15, 3), adj(15, 3);
  kernels::mean_neighbors_serial(x, g.adj, fwd);
  kernels::mean_neighbors_adjoint_serial(gup, g.adj, adj);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < fwd.data().size(); ++i) {
    lhs += gup.data()[i] * fwd.data()[i];
    rhs += adj.data()[i] * x.data()[i];
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("unpooling interpolates by inverse distance and copies exact hits") {
  DenseMatrix coarse_pos(2, 1), fine_pos(3, 1);
  coarse_pos(0, 0) = 0.0;
  coarse_pos(1, 0) = 2.0;
  fine_pos(0, 0) = 0.0;
  fine_pos(1, 0) = 1.0;
  fine_pos(2, 0) = 2.0;

  UnpoolMap up = build_unpool(fine_pos, coarse_pos, 2);
  REQUIRE(up.rows[0].size() == 1);
  CHECK(up.rows[0][0].first == 0);
  CHECK(up.rows[0][0].second == 1.0);
  REQUIRE(up.rows[1].size() == 2);
  CHECK(up.rows[1][0].second == doctest::Approx(0.5));
  CHECK(up.rows[1][1].second == doctest::Approx(0.5));

  DenseMatrix coarse(2, 1);
  coarse(0, 0) = 10.0;
  coarse(1, 0) = 30.0;
  DenseMatrix fine = up.apply(coarse);
  CHECK(fine(0, 0) == 10.0);
  CHECK(fine(1, 0) == doctest::Approx(20.0));
  CHECK(fine(2, 0) == 30.0);

  // distance tie with one slot resolves to the lower coarse index
  UnpoolMap up1 = build_unpool(fine_pos, coarse_pos, 1);
  REQUIRE(up1.rows[1].size() == 1);
  CHECK(up1.rows[1][0].first == 0);
  CHECK(up1.rows[1][0].second == 1.0);
}

TEST_CASE("unpool adjoint transposes the forward map") {
  Rng rng(23);
  DenseMatrix fine_pos(20, 2), coarse_pos(6, 2);
  for (double& v : fine_pos.data()) v = rng.next_double();
  for (double& v : coarse_pos.data()) v = rng.next_double();
  UnpoolMap up = build_unpool(fine_pos, coarse_pos, 3);

  DenseMatrix x(6, 4), g(20, 4);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  for (double& v : g.data()) v = rng.uniform(-1.0, 1.0);

  DenseMatrix fwd = up.apply(x);
  DenseMatrix adj(6, 4);
  up.add_adjoint(g, adj);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < fwd.data().size(); ++i) lhs += g.data()[i] * fwd.data()[i];
  for (std::size_t i = 0; i < adj.data().size(); ++i) rhs += adj.data()[i] * x.data()[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("autoencoder round trip has the right shapes and is deterministic") {
  std::vector<Vector> states;
  AEModel model = small_model(3, &states);
  CHECK(model.state_dim() == 24);
  CHECK(model.physical_dim() == 16);
  CHECK(model.latent_dim() == 3);

  const Vector z = model.encode(states[0]);
  CHECK(z.size() == 3);
  const Vector y = model.decode(z);
  CHECK(y.size() == 24);

  AEModel twin = small_model(3);
  CHECK(model_digest(model) == model_digest(twin));
  CHECK(twin.decode(z) == y);

  AEModel other = small_model(4);
  CHECK(model_digest(other) != model_digest(model));
}

TEST_CASE("sample loss counts only the physical entries") {
  std::vector<Vector> states;
  AEModel model = small_model(3, &states);
  ForwardCache cache;
  model.forward(states[1], cache);

  double expect = 0.0;
  for (std::size_t e = 2 * 2; e < 2 * 2 + 16; ++e) {
    const double d = cache.output[e] - states[1][e];
    expect += d * d;
  }
  CHECK(model.sample_loss(states[1]) == expect);
}

TEST_CASE("decoder tangents match central differences") {
  std::vector<Vector> states;
  for (std::uint64_t seed : {3u, 9u, 21u}) {
    AEModel model = small_model(seed, &states);
    const Vector z = model.encode(states[0]);

    FullDecoderMap full(model);
    CHECK(rel_frobenius(jacobian(full, z), fd_jacobian(full, z)) < 1e-5);

    PhysicalDecoderMap phys(model);
    CHECK(rel_frobenius(jacobian(phys, z), fd_jacobian(phys, z)) < 1e-5);
  }
}

TEST_CASE("loss gradients match central differences") {
  std::vector<Vector> states;
  AEModel model = small_model(9, &states);
  const Vector& s = states[2];

  std::vector<DenseMatrix> grads;
  for (const auto& p : model.params()) grads.emplace_back(p.rows(), p.cols());
  const double loss = model.sample_loss_grad(s, grads);
  CHECK(loss == model.sample_loss(s));

  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    auto& data = model.params()[i].data();
    for (std::size_t e = 0; e < data.size(); ++e) {
      const double keep = data[e];
      data[e] = keep + h;
      const double up = model.sample_loss(s);
      data[e] = keep - h;
      const double dn = model.sample_loss(s);
      data[e] = keep;
      const double fd = (up - dn) / (2.0 * h);
      const double err = std::abs(grads[i].data()[e] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, err);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("constant features decode back to their frozen value") {
  Hierarchy h = line_hierarchy(12, {4, 2}, 7);
  LayerSpec spec;
  spec.nq = 2;
  spec.latent_dim = 3;
  spec.widths = {2, 4, 8};
  auto states = random_states(5, 24, 31);
  for (auto& s : states)
    for (std::size_t n = 0; n < 12; ++n) s[2 * n + 1] = 4.5;  // feature 1 frozen everywhere

  ScaleStats stats = compute_scale_stats(states, 2);
  AEModel model(spec, std::move(h), std::move(stats), 1);
  const Vector y = model.decode(model.encode(states[0]));
  for (std::size_t n = 0; n < 12; ++n) CHECK(y[2 * n + 1] == 4.5);
}

TEST_CASE("checkpoints round trip and refuse a foreign hierarchy") {
  std::vector<Vector> states;
  AEModel model = small_model(13, &states);
  const auto path = (std::filesystem::temp_directory_path() / "ae_model.bin").string();
  save_model(model, path);

  AEModel back = load_model(path, model.hierarchy());
  CHECK(model_digest(back) == model_digest(model));
  const Vector z = model.encode(states[0]);
  CHECK(back.decode(z) == model.decode(z));

  Hierarchy other = line_hierarchy(12, {4, 2}, 8);
  CHECK_THROWS_WITH_AS(static_cast<void>(load_model(path, other)),
                       doctest::Contains("different hierarchy"), std::runtime_error);

  auto bytes = read_file_bytes(path);
  bytes[0] = std::byte{0xff};
  atomic_write_bytes(path, bytes);
  CHECK_THROWS(static_cast<void>(load_model(path, model.hierarchy())));
  std::filesystem::remove(path);
}

TEST_CASE("batch gradient kernels agree bitwise") {
  std::vector<Vector> states;
  AEModel model = small_model(19, &states);
  std::vector<std::size_t> members{0, 2, 3, 5};

  std::vector<DenseMatrix> ga, gb;
  for (const auto& p : model.params()) {
    ga.emplace_back(p.rows(), p.cols());
    gb.emplace_back(p.rows(), p.cols());
  }
  const double la = kernels::batch_loss_grad_serial(model, states, members, ga);
  const double lb = kernels::batch_loss_grad_omp(model, states, members, gb);
  CHECK(la == lb);
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(ga[i].data() == gb[i].data());
}

TEST_CASE("training lowers the reconstruction loss deterministically") {
  std::vector<Vector> states;
  AEModel model = small_model(29, &states);
  const double before = dataset_loss(model, states);

  TrainConfig cfg;
  cfg.epochs = 80;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-3;
  cfg.seed = 2;
  const TrainResult result = train_model(model, states, cfg);

  REQUIRE(result.epochs.size() == 80);
  CHECK(result.epochs.back().train_loss < result.epochs.front().train_loss);
  CHECK(dataset_loss(model, states) < before);

  AEModel twin = small_model(29);
  const TrainResult rerun = train_model(twin, states, cfg);
  CHECK(model_digest(twin) == model_digest(model));
  CHECK(rerun.epochs.back().train_loss == result.epochs.back().train_loss);
}

TEST_CASE("validation split tracks and restores the best parameters") {
  std::vector<Vector> states;
  AEModel model = small_model(37, &states);

  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 3;
  cfg.learning_rate = 1e-3;
  cfg.validation_count = 2;
  cfg.seed = 4;
  const TrainResult result = train_model(model, states, cfg);

  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : result.epochs) best = std::min(best, e.validation_loss);
  CHECK(result.best_validation == best);
  CHECK(result.best_epoch >= 1);

  TrainConfig bad = cfg;
  bad.validation_count = states.size();
  AEModel fresh = small_model(37);
  CHECK_THROWS(static_cast<void>(train_model(fresh, states, bad)));
}
