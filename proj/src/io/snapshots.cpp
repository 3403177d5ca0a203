#include "gdlspg/io/snapshots.hpp"

#include <stdexcept>

#include "gdlspg/io/binio.hpp"

namespace gdlspg {

namespace {

constexpr std::uint32_t kSnapshotMagic = 0x53534447u;  // "GDSS"
constexpr std::uint32_t kSnapshotVersion = 1;

ByteSink encode_snapshots(const SnapshotSet& set) {
  ByteSink sink;
  sink.u32(kSnapshotMagic);
  sink.u32(kSnapshotVersion);
  sink.str(set.case_id);
  sink.u64(set.mesh_hash);
  sink.u64(set.state_dim);
  sink.u64(set.nq);
  sink.u64(set.cells);
  sink.u64(set.steps);
  sink.f64(set.dt);
  sink.f64s(set.mu);
  for (const Vector& x : set.states) sink.f64s(x);
  return sink;
}

}  // namespace

void validate_snapshots(const SnapshotSet& set) {
  if (set.nq == 0 || set.state_dim == 0) throw std::invalid_argument("snapshots: empty state");
  if (set.cells * set.nq != set.state_dim)
    throw std::invalid_argument("snapshots: node count does not match state size");
  if (set.states.size() != set.steps + 1)
    throw std::invalid_argument("snapshots: state count does not match step count");
  for (const Vector& x : set.states)
    if (x.size() != set.state_dim)
      throw std::invalid_argument("snapshots: state length does not match header");
}

void require_matching_headers(const SnapshotSet& a, const SnapshotSet& b) {
  if (a.case_id != b.case_id) throw std::invalid_argument("snapshots: case ids differ");
  if (a.mesh_hash != b.mesh_hash) throw std::invalid_argument("snapshots: mesh hashes differ");
  if (a.state_dim != b.state_dim || a.nq != b.nq || a.cells != b.cells)
    throw std::invalid_argument("snapshots: state layouts differ");
  if (a.steps != b.steps) throw std::invalid_argument("snapshots: step counts differ");
  if (a.dt != b.dt) throw std::invalid_argument("snapshots: time steps differ");
  if (a.mu != b.mu) throw std::invalid_argument("snapshots: parameters differ");
}

void save_snapshots(const std::string& path, const SnapshotSet& set) {
  validate_snapshots(set);
  atomic_write_bytes(path, encode_snapshots(set).bytes());
}

SnapshotSet load_snapshots(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  ByteSource src(bytes);
  if (src.u32() != kSnapshotMagic) throw std::runtime_error(path + ": not a snapshot file");
  if (src.u32() != kSnapshotVersion)
    throw std::runtime_error(path + ": unsupported snapshot version");

  SnapshotSet set;
  set.case_id = src.str();
  set.mesh_hash = src.u64();
  set.state_dim = src.u64();
  set.nq = src.u64();
  set.cells = src.u64();
  set.steps = src.u64();
  set.dt = src.f64();
  set.mu = src.f64s();
  set.states.reserve(set.steps + 1);
  for (std::size_t n = 0; n <= set.steps; ++n) set.states.push_back(src.f64s());
  if (!src.exhausted()) throw std::runtime_error(path + ": trailing bytes");
  validate_snapshots(set);
  return set;
}

std::uint64_t snapshot_digest(const SnapshotSet& set) { return encode_snapshots(set).digest(); }

}  // namespace gdlspg
