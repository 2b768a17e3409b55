#pragma once

// Graph lottery ticket search over the adjacency mask: train the network and
// the mask jointly, record the best-validation mask, prune the lowest-magnitude
// fraction of surviving edges, binarize, rewind the weights, repeat until the
// density floor is crossed.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "eegglt/chebnet.hpp"
#include "eegglt/graph.hpp"

namespace eegglt::glt {

struct MaskState {
  graph::Matrix values;   // m_g, zero on the diagonal and wherever support is 0
  graph::Matrix support;  // 1 = trainable edge, 0 = pruned
  long original_edges = 0;

  /// All off-diagonal entries live with value 1.
  static MaskState full(int n_nodes);
  long live_edges() const;
  double density() const;
  int n_nodes() const { return static_cast<int>(values.rows()); }
};

struct PruneConfig {
  double prune_rate = 0.10;
  double density_floor = 0.1339;
  int epochs_per_round = 1000;
  double learning_rate = 0.01;
  int batch_size = 1024;
  std::uint64_t seed = 0;
  /// Accuracy gap (fraction) within which tickets count as tied; ties go to lower density.
  double tie_tolerance = 0.001;
  graph::LaplacianOptions laplacian;

  void validate() const;
  /// Small profile for CI: 30 epochs per round, batch 64.
  static PruneConfig desk_scale();
};

struct TicketRecord {
  int round = 0;
  long edges = 0;
  double density = 1.0;
  graph::Matrix mask_snapshot;  // real-valued mask at the best validation epoch
  graph::Matrix support;        // support the round trained on
  double best_val_accuracy = 0.0;
  int best_epoch = 0;           // 1-based
};

struct LadderStep {
  int round = 0;
  long remaining_edges = 0;
  double density = 1.0;
};

/// Edges removed from `remaining` in one round: ceil(rate * remaining).
long prune_count(long remaining, double rate);

/// Rounds run by the search: round 0 at full density, then one step per prune,
/// while density stays >= floor.
std::vector<LadderStep> density_schedule(long n_edges = 4032, double prune_rate = 0.10,
                                         double density_floor = 0.1339);

struct EpochLog {
  int round = 0;
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};
using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains parameters and the unpruned mask entries for cfg.epochs_per_round epochs and
/// returns the record at the best validation epoch (earliest on ties).
TicketRecord train_round(net::Network& net, const MaskState& mask, const net::SampleSet& train,
                         const net::SampleSet& val, const PruneConfig& cfg, int round = 0,
                         const EpochCallback& on_epoch = {});

/// Zeroes the ceil(rate * live) smallest |values| among live entries (ties by row, col)
/// and sets every survivor to exactly 1.
MaskState prune_mask(const TicketRecord& record, double prune_rate);

/// Restores every non-mask parameter to its initial snapshot and clears optimizer and BN state.
void rewind_weights(net::Network& net);

/// Index of the highest-accuracy record; records within tie_tolerance of it resolve to the lowest density.
size_t select_ticket(const std::vector<TicketRecord>& records, double tie_tolerance = 0.001);

struct TicketSearch {
  std::vector<TicketRecord> records;
  size_t selected = 0;

  const TicketRecord& best() const { return records.at(selected); }
};

TicketSearch find_ticket(net::Network& net, const net::SampleSet& train, const net::SampleSet& val,
                         const PruneConfig& cfg, const EpochCallback& on_epoch = {});

struct TicketMeta {
  std::uint64_t seed = 0;
  std::string model;
  std::string subject;
};

/// Filename for a round's binary mask: round_<s>_density_<pct>.mask.csv.
std::string ticket_filename(const TicketRecord& r);

/// Writes one binary mask per round plus tickets.json into `dir`.
void write_tickets(const std::filesystem::path& dir, const TicketSearch& search, const TicketMeta& meta);

}  // namespace eegglt::glt
