#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gdlspg/core/dense.hpp"
#include "gdlspg/mesh/mesh.hpp"

namespace gdlspg {

// Compressible Euler on an unstructured triangular mesh, first order in space
// and time: rotated-frame HLL interface fluxes with Einfeldt wave-speed
// estimates and a forward step. States are cell-major conserved vectors
// (rho, rho*u, rho*v, rho*E).
struct EulerConfig {
  double gamma = 1.4;
  double dt = 1e-3;
  std::size_t steps = 300;  // snapshots = steps + 1
  double cfl_warn = 0.9;
};

enum class EulerBC { outflow, slip_wall, inflow };

struct EulerBCs {
  std::vector<EulerBC> by_tag;  // indexed by boundary tag id
  Vector freestream;            // conserved ghost state for inflow faces
};

Vector conserved_state(double rho, double u, double v, double p, double gamma);

// quadrant values (index 0..3 = quadrants 1..4, counter-clockwise from the
// upper right); the dependent entries come from the rarefaction and shock
// jump relations anchored to quadrant 1
struct RiemannIC {
  std::array<double, 4> rho, u, v, p;
};

RiemannIC quadrant_states(double mu_u, double mu_v, double gamma);

Vector riemann_initial(const Mesh& mesh, double mu_u, double mu_v, double gamma);

Vector freestream_state(double mu_in, double gamma);
Vector bowshock_initial(const Mesh& mesh, double mu_in, double gamma);

EulerBCs all_outflow(const Mesh& mesh);
// wall -> slip, inflow -> freestream at mach mu_in, outflow -> zero gradient
EulerBCs bowshock_bcs(const Mesh& mesh, double mu_in, double gamma);

// interface flux along the unit normal, per unit face length
void interface_flux(std::span<const double> ul, std::span<const double> ur, double nx, double ny,
                    double gamma, std::span<double> flux);

// analytic normal flux of a single state, the consistency reference
void normal_flux(std::span<const double> u, double nx, double ny, double gamma,
                 std::span<double> flux);

// index of the first cell with non-finite or nonphysical values, or -1
int first_bad_cell(std::span<const double> u, double gamma);

// f with U' = -f, so f_i = (1/area_i) * sum of outward face fluxes * length
Vector euler_rhs(const Mesh& mesh, std::span<const double> u, double gamma, const EulerBCs& bcs);

double cfl_number(const Mesh& mesh, std::span<const double> u, double gamma, double dt);

struct EulerRun {
  std::vector<Vector> snapshots;
  double max_cfl = 0.0;
};

EulerRun run_euler(const Mesh& mesh, Vector u0, const EulerConfig& cfg, const EulerBCs& bcs);

std::vector<std::pair<double, double>> riemann_mu_grid();  // 25 quadrant velocities
std::vector<double> bowshock_mu_grid();                    // 6 freestream mach numbers

namespace kernels {
// one flux row per mesh face, boundary ghosts resolved from the tagged
// condition; both variants fill identical bits
void face_fluxes_serial(const Mesh& mesh, std::span<const double> u, double gamma,
                        const EulerBCs& bcs, DenseMatrix& fluxes);
void face_fluxes_omp(const Mesh& mesh, std::span<const double> u, double gamma,
                     const EulerBCs& bcs, DenseMatrix& fluxes);
}  // namespace kernels

}  // namespace gdlspg
