#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mdr/channel_params.hpp"
#include "mdr/rate_point.hpp"

namespace mdr {

// Desk-scale simulator of the distributed-repair workflow: the source block
// is quantized into a common description plus correlated private
// descriptions (dithered uniform quantizers, entropy-coded), repair parity
// over the private streams is erasure-coded across the nodes, and a failed
// node is rebuilt bit-for-bit from the survivors.
struct SimConfig {
  int n = 2;
  DistortionSpec spec{0.5, 0.5};
  ChannelParams params;  // typically two_node_optimal / three_node_optimal
  int block_len = 10000;
  uint64_t seed = 1;
  double quantizer_overhead_bits = 0.5;
};

// Everything one node stores for one block. Serialization is canonical:
// layers ascend, multi-byte sizes are big-endian varints, parity comes
// last; bit-exact repair is judged on these bytes.
struct NodeContent {
  int node_id = 0;
  uint32_t trial = 0;
  std::vector<std::vector<uint8_t>> common_shards;      // per common layer
  std::vector<uint32_t> common_stream_lens;             // packed-stream bytes
  std::vector<std::vector<uint8_t>> private_streams;    // per private layer
  std::vector<uint8_t> top_shard;
  uint32_t top_stream_len = 0;
  std::vector<std::vector<uint8_t>> parity_shards;      // per private layer
  std::vector<std::vector<uint32_t>> parity_stream_lens;  // all nodes' lengths

  std::vector<uint8_t> serialize() const;
  size_t serialized_bits() const { return serialize().size() * 8; }
};

struct SimReport {
  double per_node_bits = 0.0;             // bits per source sample
  std::map<int, double> empirical_d;      // subset size -> mean MSE
  std::vector<bool> repair_exact;         // per trial
  double repair_exact_rate = 0.0;
  bool post_repair_identical = true;      // distortions bitwise unchanged
  int trials = 0;
  uint64_t seed = 0;
  double measured_rho = 0.0;              // empirical private-noise correlation

  std::string to_json(int indent = -1) const;
};

class RepairSimulator {
 public:
  // Plans quantizers and parity for the configured channel. Throws
  // ConfigInfeasible when the per-node rate cannot land inside the storage
  // accounting window, RepairInfeasible when the parity budget
  // (R_r + quantizer_overhead_bits) cannot cover the private streams.
  explicit RepairSimulator(SimConfig cfg);
  ~RepairSimulator();
  RepairSimulator(RepairSimulator&&) noexcept;

  const SimConfig& config() const;
  double info_rate() const;        // per-node R + R_r of the channel
  double planned_bits() const;     // predicted per-node bits/sample

  std::vector<double> make_source(uint32_t trial) const;

  std::vector<NodeContent> encode_block(std::span<const double> source, uint32_t trial) const;

  // Linear-MMSE estimate from a sublist of nodes (1 <= size <= n-1); layers
  // whose erasure code needs more nodes than the sublist has are skipped.
  std::vector<double> decode_subset(const std::vector<const NodeContent*>& subset) const;

  // Rebuilds the failed node from exactly n-1 survivors, bit-exactly.
  NodeContent repair_node(const std::vector<const NodeContent*>& survivors,
                          int failed_id) const;

  // Empirical second moments of the first private layer's effective noise.
  void accumulate_noise_stats(std::span<const double> source,
                              const std::vector<NodeContent>& nodes, double* cross_sum,
                              double* var_sum, long* cross_count, long* var_count) const;

 private:
  struct Plan;
  SimConfig cfg_;
  std::unique_ptr<Plan> plan_;
};

// Full experiment: per trial a fresh source block is encoded, all subset
// distortions are measured, each node is failed and repaired in turn with
// bit-exactness verified, and distortions are re-measured post-repair.
SimReport run_experiment(const SimConfig& cfg, int trials);

// Channel parameters for the CLI path: optimal two- or three-node scheme.
SimConfig make_sim_config(int n, const DistortionSpec& spec, int block_len, uint64_t seed,
                          double quantizer_overhead_bits = 0.5);

}  // namespace mdr
