#include "gdlspg/fom/euler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gdlspg {

namespace {

struct Primitive {
  double rho, u, v, p;
};

Primitive primitive(std::span<const double> u, double gamma) {
  const double rho = u[0];
  const double inv = 1.0 / rho;
  const double vx = u[1] * inv, vy = u[2] * inv;
  const double p = (gamma - 1.0) * (u[3] - 0.5 * rho * (vx * vx + vy * vy));
  return {rho, vx, vy, p};
}

bool physical(std::span<const double> u, double gamma) {
  for (int q = 0; q < 4; ++q)
    if (!std::isfinite(u[q])) return false;
  if (u[0] <= 0.0) return false;
  return primitive(u, gamma).p > 0.0;
}

// flux of the 1D system in the face frame; state is (rho, rho*qn, rho*qt, rho*E)
void frame_flux(const double* w, double p, double* f) {
  const double qn = w[1] / w[0];
  f[0] = w[1];
  f[1] = w[1] * qn + p;
  f[2] = w[2] * qn;
  f[3] = qn * (w[3] + p);
}

}  // namespace

Vector conserved_state(double rho, double u, double v, double p, double gamma) {
  if (rho <= 0.0 || p <= 0.0) throw std::invalid_argument("euler: nonphysical primitive state");
  Vector out(4);
  out[0] = rho;
  out[1] = rho * u;
  out[2] = rho * v;
  out[3] = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v);
  return out;
}

RiemannIC quadrant_states(double mu_u, double mu_v, double gamma) {
  RiemannIC ic;
  ic.rho = {1.0, 0.0, 0.8, 0.0};
  ic.p = {1.0, 0.4, 0.4, 0.4};
  ic.u = {mu_u, 0.0, mu_u, mu_u};
  ic.v = {mu_v, mu_v, mu_v, 0.0};

  // quadrant 2 sits across a rarefaction from quadrant 1
  ic.rho[1] = ic.rho[0] * std::pow(ic.p[1] / ic.p[0], 1.0 / gamma);
  ic.u[1] = ic.u[0] + (2.0 * std::sqrt(gamma) / (gamma - 1.0)) *
                          (std::sqrt(ic.p[1] / ic.rho[1]) - std::sqrt(ic.p[0] / ic.rho[0]));

  // quadrant 4 sits across a shock from quadrant 1
  const double k = (gamma - 1.0) / (gamma + 1.0);
  const double pr = ic.p[3] / ic.p[0];
  ic.rho[3] = ic.rho[0] * (pr + k) / (1.0 + k * pr);
  ic.v[3] = ic.v[0] + std::sqrt((ic.p[3] - ic.p[0]) * (ic.rho[3] - ic.rho[0]) /
                                (ic.rho[3] * ic.rho[0]));
  return ic;
}

Vector riemann_initial(const Mesh& mesh, double mu_u, double mu_v, double gamma) {
  const RiemannIC ic = quadrant_states(mu_u, mu_v, gamma);
  Vector u0(4 * mesh.cell_count());
  for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
    const bool right = mesh.centers[i][0] > 0.5;
    const bool top = mesh.centers[i][1] > 0.5;
    const std::size_t q = top ? (right ? 0 : 1) : (right ? 3 : 2);
    const Vector w = conserved_state(ic.rho[q], ic.u[q], ic.v[q], ic.p[q], gamma);
    std::copy(w.begin(), w.end(), u0.begin() + 4 * static_cast<std::ptrdiff_t>(i));
  }
  return u0;
}

Vector freestream_state(double mu_in, double gamma) {
  if (mu_in <= 0.0) throw std::invalid_argument("euler: freestream mach must be positive");
  return conserved_state(1.0, mu_in * std::sqrt(gamma), 0.0, 1.0, gamma);
}

Vector bowshock_initial(const Mesh& mesh, double mu_in, double gamma) {
  const Vector w = freestream_state(mu_in, gamma);
  Vector u0(4 * mesh.cell_count());
  for (std::size_t i = 0; i < mesh.cell_count(); ++i)
    std::copy(w.begin(), w.end(), u0.begin() + 4 * static_cast<std::ptrdiff_t>(i));
  return u0;
}

EulerBCs all_outflow(const Mesh& mesh) {
  EulerBCs bcs;
  bcs.by_tag.assign(mesh.tag_names.size(), EulerBC::outflow);
  return bcs;
}

EulerBCs bowshock_bcs(const Mesh& mesh, double mu_in, double gamma) {
  EulerBCs bcs;
  bcs.by_tag.assign(mesh.tag_names.size(), EulerBC::outflow);
  bcs.by_tag[static_cast<std::size_t>(mesh.tag_id("wall"))] = EulerBC::slip_wall;
  bcs.by_tag[static_cast<std::size_t>(mesh.tag_id("inflow"))] = EulerBC::inflow;
  bcs.freestream = freestream_state(mu_in, gamma);
  return bcs;
}

void normal_flux(std::span<const double> u, double nx, double ny, double gamma,
                 std::span<double> flux) {
  const Primitive w = primitive(u, gamma);
  const double qn = w.u * nx + w.v * ny;
  flux[0] = w.rho * qn;
  flux[1] = w.rho * w.u * qn + w.p * nx;
  flux[2] = w.rho * w.v * qn + w.p * ny;
  flux[3] = qn * (u[3] + w.p);
}

void interface_flux(std::span<const double> ul, std::span<const double> ur, double nx, double ny,
                    double gamma, std::span<double> flux) {
  const Primitive wl = primitive(ul, gamma);
  const Primitive wr = primitive(ur, gamma);
  if (wl.rho <= 0.0 || wl.p <= 0.0 || wr.rho <= 0.0 || wr.p <= 0.0)
    throw std::runtime_error("euler: nonphysical state in flux evaluation");

  // face frame: qn along the normal, qt along the face
  const double qnl = wl.u * nx + wl.v * ny, qtl = -wl.u * ny + wl.v * nx;
  const double qnr = wr.u * nx + wr.v * ny, qtr = -wr.u * ny + wr.v * nx;
  const double wl4[4] = {ul[0], ul[0] * qnl, ul[0] * qtl, ul[3]};
  const double wr4[4] = {ur[0], ur[0] * qnr, ur[0] * qtr, ur[3]};

  const double cl = std::sqrt(gamma * wl.p / wl.rho);
  const double cr = std::sqrt(gamma * wr.p / wr.rho);
  const double hl = (ul[3] + wl.p) / wl.rho;
  const double hr = (ur[3] + wr.p) / wr.rho;

  // Roe averages feed the Einfeldt wave-speed bounds
  const double sl = std::sqrt(wl.rho), sr = std::sqrt(wr.rho);
  const double inv = 1.0 / (sl + sr);
  const double qn_hat = (sl * qnl + sr * qnr) * inv;
  const double qt_hat = (sl * qtl + sr * qtr) * inv;
  const double h_hat = (sl * hl + sr * hr) * inv;
  const double c2 = (gamma - 1.0) * (h_hat - 0.5 * (qn_hat * qn_hat + qt_hat * qt_hat));
  const double c_hat = std::sqrt(std::max(c2, 0.0));

  const double s_min = std::min(qnl - cl, qn_hat - c_hat);
  const double s_max = std::max(qnr + cr, qn_hat + c_hat);

  double f[4];
  if (s_min >= 0.0) {
    frame_flux(wl4, wl.p, f);
  } else if (s_max <= 0.0) {
    frame_flux(wr4, wr.p, f);
  } else {
    double fl[4], fr[4];
    frame_flux(wl4, wl.p, fl);
    frame_flux(wr4, wr.p, fr);
    const double scale = 1.0 / (s_max - s_min);
    for (int q = 0; q < 4; ++q)
      f[q] = (s_max * fl[q] - s_min * fr[q] + s_min * s_max * (wr4[q] - wl4[q])) * scale;
  }

  flux[0] = f[0];
  flux[1] = f[1] * nx - f[2] * ny;
  flux[2] = f[1] * ny + f[2] * nx;
  flux[3] = f[3];
}

int first_bad_cell(std::span<const double> u, double gamma) {
  const std::size_t n = u.size() / 4;
  for (std::size_t i = 0; i < n; ++i)
    if (!physical(u.subspan(4 * i, 4), gamma)) return static_cast<int>(i);
  return -1;
}

namespace {

// ghost state on the far side of a boundary face
void ghost_state(const Face& face, std::span<const double> ui, const EulerBCs& bcs, double gamma,
                 double* ghost) {
  switch (bcs.by_tag[static_cast<std::size_t>(face.tag)]) {
    case EulerBC::outflow:
      for (int q = 0; q < 4; ++q) ghost[q] = ui[q];
      return;
    case EulerBC::inflow:
      for (int q = 0; q < 4; ++q) ghost[q] = bcs.freestream[q];
      return;
    case EulerBC::slip_wall: {
      const double qn2 = 2.0 * (ui[1] * face.nx + ui[2] * face.ny);
      ghost[0] = ui[0];
      ghost[1] = ui[1] - qn2 * face.nx;
      ghost[2] = ui[2] - qn2 * face.ny;
      ghost[3] = ui[3];  // speed is preserved by the reflection
      return;
    }
  }
  (void)gamma;
}

template <bool Parallel>
void face_fluxes_impl(const Mesh& mesh, std::span<const double> u, double gamma,
                      const EulerBCs& bcs, DenseMatrix& fluxes) {
  const std::size_t nf = mesh.faces.size();
#pragma omp parallel for schedule(static) if (Parallel && nf > 256)
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& face = mesh.faces[f];
    const auto ul = u.subspan(4 * static_cast<std::size_t>(face.left), 4);
    double ghost[4];
    std::span<const double> ur;
    if (face.right >= 0) {
      ur = u.subspan(4 * static_cast<std::size_t>(face.right), 4);
    } else {
      ghost_state(face, ul, bcs, gamma, ghost);
      ur = std::span<const double>(ghost, 4);
    }
    interface_flux(ul, ur, face.nx, face.ny, gamma, std::span<double>(fluxes.row(f), 4));
  }
}

}  // namespace

namespace kernels {

void face_fluxes_serial(const Mesh& mesh, std::span<const double> u, double gamma,
                        const EulerBCs& bcs, DenseMatrix& fluxes) {
  face_fluxes_impl<false>(mesh, u, gamma, bcs, fluxes);
}

void face_fluxes_omp(const Mesh& mesh, std::span<const double> u, double gamma,
                     const EulerBCs& bcs, DenseMatrix& fluxes) {
  face_fluxes_impl<true>(mesh, u, gamma, bcs, fluxes);
}

}  // namespace kernels

Vector euler_rhs(const Mesh& mesh, std::span<const double> u, double gamma, const EulerBCs& bcs) {
  if (u.size() != 4 * mesh.cell_count()) throw std::invalid_argument("euler: state length mismatch");
  const int bad = first_bad_cell(u, gamma);
  if (bad >= 0) throw std::runtime_error("euler: nonphysical state in cell " + std::to_string(bad));

  DenseMatrix fluxes(mesh.faces.size(), 4);
  kernels::face_fluxes_omp(mesh, u, gamma, bcs, fluxes);

  // fixed-order gather: the same product enters both sides of a face
  Vector rhs(u.size(), 0.0);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    for (int q = 0; q < 4; ++q) {
      const double t = fluxes(f, static_cast<std::size_t>(q)) * face.length;
      rhs[4 * static_cast<std::size_t>(face.left) + static_cast<std::size_t>(q)] += t;
      if (face.right >= 0)
        rhs[4 * static_cast<std::size_t>(face.right) + static_cast<std::size_t>(q)] -= t;
    }
  }
  for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
    const double inv = 1.0 / mesh.areas[i];
    for (std::size_t q = 0; q < 4; ++q) rhs[4 * i + q] *= inv;
  }
  return rhs;
}

double cfl_number(const Mesh& mesh, std::span<const double> u, double gamma, double dt) {
  double worst = 0.0;
  for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
    const Primitive w = primitive(u.subspan(4 * i, 4), gamma);
    const double c = std::sqrt(gamma * w.p / w.rho);
    double sum = 0.0;
    for (int f : mesh.cell_faces[i]) {
      const Face& face = mesh.faces[static_cast<std::size_t>(f)];
      const double qn = std::abs(w.u * face.nx + w.v * face.ny);
      sum += (qn + c) * face.length;
    }
    worst = std::max(worst, dt * sum / (2.0 * mesh.areas[i]));
  }
  return worst;
}

EulerRun run_euler(const Mesh& mesh, Vector u0, const EulerConfig& cfg, const EulerBCs& bcs) {
  EulerRun run;
  run.snapshots.reserve(cfg.steps + 1);
  run.snapshots.push_back(std::move(u0));
  for (std::size_t n = 0; n < cfg.steps; ++n) {
    const Vector& prev = run.snapshots.back();
    run.max_cfl = std::max(run.max_cfl, cfl_number(mesh, prev, cfg.gamma, cfg.dt));
    Vector rhs;
    try {
      rhs = euler_rhs(mesh, prev, cfg.gamma, bcs);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string(e.what()) + " at step " + std::to_string(n));
    }
    Vector next(prev.size());
    for (std::size_t e = 0; e < prev.size(); ++e) next[e] = prev[e] - cfg.dt * rhs[e];
    run.snapshots.push_back(std::move(next));
  }
  return run;
}

std::vector<std::pair<double, double>> riemann_mu_grid() {
  std::vector<std::pair<double, double>> grid;
  grid.reserve(25);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) grid.emplace_back(-1.2 - 0.2 * i, -0.3 - 0.1 * j);
  return grid;
}

std::vector<double> bowshock_mu_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 6; ++i) grid.push_back(1.0 + 0.05 * i);
  return grid;
}

}  // namespace gdlspg
