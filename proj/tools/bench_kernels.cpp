#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gdlspg/ae/model.hpp"
#include "gdlspg/ae/train.hpp"
#include "gdlspg/coarsen/hierarchy.hpp"
#include "gdlspg/core/rng.hpp"
#include "gdlspg/fom/euler.hpp"
#include "gdlspg/kernels/kernels.hpp"
#include "gdlspg/mesh/graph.hpp"
#include "gdlspg/mesh/mesh.hpp"

using namespace gdlspg;

namespace {

// best-of-n wall time of one call, in milliseconds
double time_best(int repeat, const std::function<void()>& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const std::string& name, double serial_ms, double omp_ms, bool match) {
  std::printf("%-24s %10.3f %10.3f %8.2fx   %s\n", name.c_str(), serial_ms, omp_ms,
              serial_ms / omp_ms, match ? "bitwise" : "MISMATCH");
}

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel comparison"};
  int repeat = 5;
  double scale = 1.0;
  app.add_option("--repeat", repeat, "timed runs per kernel, best counts");
  app.add_option("--scale", scale, "problem size multiplier");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  std::printf("threads: %d\n", kernels::max_threads());
  std::printf("%-24s %10s %10s %9s   %s\n", "kernel", "serial ms", "omp ms", "speedup", "check");

  Rng rng(1);
  const auto dim = [&](double base) { return static_cast<std::size_t>(base * scale); };

  {
    const DenseMatrix a = random_matrix(dim(256), dim(256), rng);
    const DenseMatrix b = random_matrix(dim(256), dim(256), rng);
    DenseMatrix s(a.rows(), b.cols()), p(a.rows(), b.cols());
    const double ts = time_best(repeat, [&] { kernels::matmul_serial(a, b, s); });
    const double tp = time_best(repeat, [&] { kernels::matmul_omp(a, b, p); });
    report("matmul", ts, tp, s.data() == p.data());

    DenseMatrix st(a.cols(), b.cols()), pt(a.cols(), b.cols());
    const double tts = time_best(repeat, [&] { kernels::matmul_tn_serial(a, b, st); });
    const double ttp = time_best(repeat, [&] { kernels::matmul_tn_omp(a, b, pt); });
    report("matmul_tn", tts, ttp, st.data() == pt.data());
  }

  {
    const DenseMatrix a = random_matrix(dim(2048), dim(2048), rng);
    Vector x(a.cols());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    Vector ys(a.rows()), yp(a.rows());
    const double ts = time_best(repeat, [&] { kernels::matvec_serial(a, x.data(), ys.data()); });
    const double tp = time_best(repeat, [&] { kernels::matvec_omp(a, x.data(), yp.data()); });
    report("matvec", ts, tp, ys == yp);
  }

  DenseMatrix pos = random_matrix(dim(3000), 2, rng);
  const double radius = disk_graph_radius(pos.rows());
  {
    std::vector<std::vector<int>> above_s, above_p;
    const double ts = time_best(repeat, [&] { kernels::radius_scan_serial(pos, radius, above_s); });
    const double tp = time_best(repeat, [&] { kernels::radius_scan_omp(pos, radius, above_p); });
    report("radius_scan", ts, tp, above_s == above_p);
  }

  {
    const Graph g = radius_graph(pos, radius);
    const DenseMatrix x = random_matrix(g.node_count(), 16, rng);
    DenseMatrix out_s(x.rows(), x.cols()), out_p(x.rows(), x.cols());
    const double ts =
        time_best(repeat, [&] { kernels::mean_neighbors_serial(x, g.adj, out_s); });
    const double tp = time_best(repeat, [&] { kernels::mean_neighbors_omp(x, g.adj, out_p); });
    report("mean_neighbors", ts, tp, out_s.data() == out_p.data());

    DenseMatrix adj_s(x.rows(), x.cols()), adj_p(x.rows(), x.cols());
    const double tas =
        time_best(repeat, [&] { kernels::mean_neighbors_adjoint_serial(x, g.adj, adj_s); });
    const double tap =
        time_best(repeat, [&] { kernels::mean_neighbors_adjoint_omp(x, g.adj, adj_p); });
    report("mean_neighbors_adjoint", tas, tap, adj_s.data() == adj_p.data());
  }

  {
    // small model, full epoch batch: the training hot path
    const std::size_t nodes = dim(128);
    DenseMatrix line(nodes, 1);
    for (std::size_t i = 0; i < nodes; ++i) line(i, 0) = static_cast<double>(i);
    const double span = static_cast<double>(nodes - 1);
    const std::vector<double> radii{line_graph_radius(span, nodes),
                                    line_graph_radius(span, nodes / 4),
                                    line_graph_radius(span, nodes / 16)};
    Hierarchy h = build_hierarchy(line, {nodes / 4, nodes / 16}, radii, 3);

    LayerSpec spec;
    spec.nq = 1;
    spec.latent_dim = 3;
    spec.widths = {1, 4, 8};
    std::vector<Vector> states(20, Vector(nodes));
    for (auto& s : states)
      for (double& v : s) v = rng.uniform(0.5, 5.0);
    const ScaleStats stats = compute_scale_stats(states, spec.nq);
    const AEModel model(spec, std::move(h), stats, 11);

    std::vector<std::size_t> members(states.size());
    for (std::size_t i = 0; i < members.size(); ++i) members[i] = i;
    auto zeroed = [&] {
      std::vector<DenseMatrix> g = model.params();
      for (auto& m : g) m.fill(0.0);
      return g;
    };
    std::vector<DenseMatrix> gs, gp;
    double ls = 0.0, lp = 0.0;
    const double ts = time_best(repeat, [&] {
      gs = zeroed();
      ls = kernels::batch_loss_grad_serial(model, states, members, gs);
    });
    const double tp = time_best(repeat, [&] {
      gp = zeroed();
      lp = kernels::batch_loss_grad_omp(model, states, members, gp);
    });
    bool match = ls == lp;
    for (std::size_t i = 0; i < gs.size(); ++i) match = match && gs[i].data() == gp[i].data();
    report("batch_loss_grad", ts, tp, match);
  }

  {
    const Mesh mesh = square_tri_mesh(static_cast<int>(dim(42)));
    Vector u(4 * mesh.cell_count());
    for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
      const Vector c = conserved_state(1.0 + 0.2 * rng.next_double(), rng.uniform(-0.3, 0.3),
                                       rng.uniform(-0.3, 0.3), 1.0 + 0.2 * rng.next_double(), 1.4);
      std::copy(c.begin(), c.end(), u.begin() + 4 * static_cast<std::ptrdiff_t>(i));
    }
    const EulerBCs bcs = all_outflow(mesh);
    DenseMatrix fs(mesh.faces.size(), 4), fp(mesh.faces.size(), 4);
    const double ts =
        time_best(repeat, [&] { kernels::face_fluxes_serial(mesh, u, 1.4, bcs, fs); });
    const double tp = time_best(repeat, [&] { kernels::face_fluxes_omp(mesh, u, 1.4, bcs, fp); });
    report("face_fluxes", ts, tp, fs.data() == fp.data());
  }

  return 0;
}
