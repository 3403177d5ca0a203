#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdlspg/core/dense.hpp"

namespace gdlspg {

// Time series of full-order states plus the provenance needed to pair files:
// two sets interoperate only when every header field below agrees.
struct SnapshotSet {
  std::string case_id;
  std::uint64_t mesh_hash = 0;
  std::size_t state_dim = 0;  // entries per state
  std::size_t nq = 1;         // variables per node
  std::size_t cells = 0;      // nodes, state_dim / nq
  std::size_t steps = 0;      // states.size() == steps + 1
  double dt = 0.0;
  Vector mu;                   // case parameters
  std::vector<Vector> states;  // initial state first
};

// structural consistency of one set (dims, counts)
void validate_snapshots(const SnapshotSet& set);

// header equality for cross-file operations; throws naming the first mismatch
void require_matching_headers(const SnapshotSet& a, const SnapshotSet& b);

void save_snapshots(const std::string& path, const SnapshotSet& set);
SnapshotSet load_snapshots(const std::string& path);

std::uint64_t snapshot_digest(const SnapshotSet& set);

}  // namespace gdlspg
