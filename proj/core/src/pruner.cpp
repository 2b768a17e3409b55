#include "eegglt/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include <json.hpp>

#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"

namespace eegglt::glt {

MaskState MaskState::full(int n_nodes) {
  MaskState m;
  m.values = graph::complete_graph(n_nodes).adjacency;
  m.support = m.values;
  m.original_edges = static_cast<long>(n_nodes) * (n_nodes - 1);
  return m;
}

long MaskState::live_edges() const { return static_cast<long>((support.array() != 0.0).count()); }

double MaskState::density() const {
  return original_edges > 0 ? static_cast<double>(live_edges()) / static_cast<double>(original_edges) : 0.0;
}

void PruneConfig::validate() const {
  if (!(prune_rate > 0.0 && prune_rate < 1.0)) throw Error(ErrorCode::InvalidConfig, "prune rate must be in (0, 1)");
  if (!(density_floor > 0.0 && density_floor < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "density floor must be in (0, 1)");
  }
  if (epochs_per_round < 1) throw Error(ErrorCode::InvalidConfig, "epochs per round must be >= 1");
  if (batch_size < 2) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 2");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
}

PruneConfig PruneConfig::desk_scale() {
  PruneConfig c;
  c.epochs_per_round = 30;
  c.batch_size = 64;
  return c;
}

long prune_count(long remaining, double rate) {
  // The epsilon keeps exact products such as 0.1 * 70 from rounding up past the integer.
  return static_cast<long>(std::ceil(rate * static_cast<double>(remaining) - 1e-9));
}

std::vector<LadderStep> density_schedule(long n_edges, double prune_rate, double density_floor) {
  std::vector<LadderStep> ladder;
  if (n_edges < 1) return ladder;
  long remaining = n_edges;
  int round = 0;
  while (true) {
    const double density = static_cast<double>(remaining) / static_cast<double>(n_edges);
    if (density < density_floor || remaining <= 0) break;
    ladder.push_back({round, remaining, density});
    const long removed = prune_count(remaining, prune_rate);
    if (removed <= 0) break;
    remaining -= removed;
    ++round;
  }
  return ladder;
}

TicketRecord train_round(net::Network& net, const MaskState& mask, const net::SampleSet& train,
                         const net::SampleSet& val, const PruneConfig& cfg, int round,
                         const EpochCallback& on_epoch) {
  cfg.validate();
  if (!net.mask_enabled()) {
    net.enable_mask(graph::complete_graph(net.spec().n_nodes).adjacency, mask.values, mask.support,
                    cfg.laplacian);
  } else {
    net.set_mask(mask.values, mask.support);
  }
  net::TrainOptions opts;
  opts.batch_size = cfg.batch_size;
  opts.adam.learning_rate = cfg.learning_rate;

  TicketRecord rec;
  rec.round = round;
  rec.edges = mask.live_edges();
  rec.density = mask.density();
  rec.support = mask.support;
  rec.best_val_accuracy = -1.0;
  for (int epoch = 1; epoch <= cfg.epochs_per_round; ++epoch) {
    double loss = 0.0;
    try {
      loss = net::train_epoch(net, train, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteValue && e.code() != ErrorCode::NonFiniteLoss) throw;
      throw Error(ErrorCode::NonFiniteLoss, "round " + std::to_string(round) + " epoch " +
                                                std::to_string(epoch) + " at density " +
                                                csv::format_double(rec.density) + ": " + e.what());
    }
    const double acc = net::evaluate_accuracy(net, val);
    if (acc > rec.best_val_accuracy) {
      rec.best_val_accuracy = acc;
      rec.best_epoch = epoch;
      rec.mask_snapshot = net.mask_values();
    }
    if (on_epoch) on_epoch({round, epoch, loss, acc});
  }
  return rec;
}

MaskState prune_mask(const TicketRecord& record, double prune_rate) {
  const auto& values = record.mask_snapshot;
  const auto& support = record.support;
  const int n = static_cast<int>(values.rows());
  std::vector<std::tuple<double, int, int>> live;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && support(i, j) != 0.0) live.emplace_back(std::abs(values(i, j)), i, j);
    }
  }
  const long remove = prune_count(static_cast<long>(live.size()), prune_rate);
  if (remove >= static_cast<long>(live.size())) {
    throw Error(ErrorCode::EmptyMask, "pruning would remove every remaining edge");
  }
  std::sort(live.begin(), live.end());
  MaskState next;
  next.values = graph::Matrix::Zero(n, n);
  next.support = graph::Matrix::Zero(n, n);
  next.original_edges = static_cast<long>(n) * (n - 1);
  for (size_t e = static_cast<size_t>(remove); e < live.size(); ++e) {
    const auto [mag, i, j] = live[e];
    next.values(i, j) = 1.0;
    next.support(i, j) = 1.0;
  }
  return next;
}

void rewind_weights(net::Network& net) {
  net.params().rewind();
  net.reset_running_stats();
}

size_t select_ticket(const std::vector<TicketRecord>& records, double tie_tolerance) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no ticket records");
  double best = records.front().best_val_accuracy;
  for (const auto& r : records) best = std::max(best, r.best_val_accuracy);
  size_t chosen = records.size();
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].best_val_accuracy < best - tie_tolerance - 1e-12) continue;
    if (chosen == records.size() || records[i].density < records[chosen].density) chosen = i;
  }
  return chosen;
}

TicketSearch find_ticket(net::Network& net, const net::SampleSet& train, const net::SampleSet& val,
                         const PruneConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  TicketSearch search;
  MaskState mask = MaskState::full(net.spec().n_nodes);
  int round = 0;
  while (mask.density() >= cfg.density_floor) {
    search.records.push_back(train_round(net, mask, train, val, cfg, round, on_epoch));
    const auto& rec = search.records.back();
    if (prune_count(rec.edges, cfg.prune_rate) >= rec.edges) break;
    mask = prune_mask(rec, cfg.prune_rate);
    rewind_weights(net);
    ++round;
  }
  search.selected = select_ticket(search.records, cfg.tie_tolerance);
  return search;
}

std::string ticket_filename(const TicketRecord& r) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "round_%d_density_%.2f.mask.csv", r.round, r.density * 100.0);
  return buf;
}

void write_tickets(const std::filesystem::path& dir, const TicketSearch& search, const TicketMeta& meta) {
  std::filesystem::create_directories(dir);
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : search.records) {
    const auto file = ticket_filename(r);
    csv::write_matrix(dir / file, r.support);
    rounds.push_back({{"round", r.round},
                      {"edges", r.edges},
                      {"density", r.density},
                      {"best_val_accuracy", r.best_val_accuracy},
                      {"best_epoch", r.best_epoch},
                      {"mask_file", file}});
  }
  const auto& best = search.best();
  nlohmann::json manifest = {{"seed", meta.seed},
                             {"model", meta.model},
                             {"subject", meta.subject},
                             {"rounds", rounds},
                             {"selected", {{"round", best.round},
                                           {"density", best.density},
                                           {"best_val_accuracy", best.best_val_accuracy},
                                           {"best_epoch", best.best_epoch},
                                           {"mask_file", ticket_filename(best)}}}};
  csv::write_text(dir / "tickets.json", manifest.dump(2) + "\n");
}

}  // namespace eegglt::glt
