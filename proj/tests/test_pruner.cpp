#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"
#include "eegglt/pruner.hpp"
#include "eegglt/synthetic.hpp"
#include "support.hpp"

using namespace eegglt;
using glt::TicketRecord;

namespace {

std::string pct(double density) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", density * 100.0);
  return buf;
}

// Integer ceil(remaining / 10) for the default 10% rate.
std::vector<long> integer_ladder(long edges, long floor_num, long floor_den) {
  std::vector<long> out;
  long r = edges;
  while (r * floor_den >= floor_num * edges) {
    out.push_back(r);
    r -= (r + 9) / 10;
  }
  return out;
}

net::ModelSpec tiny_spec(int n) {
  net::ModelSpec s;
  s.name = "tiny";
  s.n_nodes = n;
  s.conv_filters = {4, 4};
  s.conv_orders = {2, 2};
  s.fc_nodes = {2};
  s.n_classes = 2;
  s.has_bn_fc = false;
  return s;
}

TicketRecord record_with(const graph::Matrix& values, const graph::Matrix& support) {
  TicketRecord r;
  r.mask_snapshot = values;
  r.support = support;
  return r;
}

}  // namespace

TEST(Ladder, MatchesIntegerOracleAndPublishedDensities) {
  const auto ladder = glt::density_schedule();
  const auto oracle = integer_ladder(4032, 1339, 10000);
  ASSERT_EQ(ladder.size(), oracle.size());
  ASSERT_EQ(ladder.size(), 20u);
  for (size_t i = 0; i < ladder.size(); ++i) {
    EXPECT_EQ(ladder[i].round, static_cast<int>(i));
    EXPECT_EQ(ladder[i].remaining_edges, oracle[i]);
    EXPECT_EQ(ladder[i].density, static_cast<double>(oracle[i]) / 4032.0);
  }
  const std::vector<std::string> published = {"100.00", "89.98", "80.98", "72.87", "65.58", "59.00", "53.10",
                                              "47.77",  "42.98", "38.67", "34.80", "31.30", "28.15", "25.32",
                                              "22.77",  "20.49", "18.43", "16.57", "14.91", "13.39"};
  for (size_t i = 0; i < ladder.size(); ++i) EXPECT_EQ(pct(ladder[i].density), published[i]) << i;
  EXPECT_EQ(ladder[1].remaining_edges, 3628);
  EXPECT_EQ(ladder[2].remaining_edges, 3265);
  EXPECT_EQ(ladder[19].remaining_edges, 540);
}

TEST(Ladder, EightNodeSchedule) {
  std::vector<long> edges;
  for (const auto& s : glt::density_schedule(56)) edges.push_back(s.remaining_edges);
  EXPECT_EQ(edges, (std::vector<long>{56, 50, 45, 40, 36, 32, 28, 25, 22, 19, 17, 15, 13, 11, 9, 8}));
}

TEST(Ladder, PruneCountUsesCeilWithoutFloatingOvershoot) {
  EXPECT_EQ(glt::prune_count(4032, 0.1), 404);
  EXPECT_EQ(glt::prune_count(70, 0.1), 7);
  EXPECT_EQ(glt::prune_count(10, 0.1), 1);
  EXPECT_EQ(glt::prune_count(9, 0.1), 1);
  EXPECT_EQ(glt::prune_count(1, 0.1), 1);
  for (long r = 1; r < 5000; ++r) EXPECT_EQ(glt::prune_count(r, 0.1), (r + 9) / 10) << r;
}

TEST(PruneMask, RemovesSmallestAndBinarizes) {
  graph::Matrix v = graph::Matrix::Zero(4, 4);
  graph::Matrix s = graph::Matrix::Zero(4, 4);
  int k = 1;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j || (i == 3 && j == 2) || (i == 3 && j == 1)) continue;
      v(i, j) = (k % 2 ? -1.0 : 1.0) * (11 - k);  // |values| 10..1
      s(i, j) = 1;
      ++k;
    }
  }
  ASSERT_EQ(k, 11);
  const auto next = glt::prune_mask(record_with(v, s), 0.1);
  EXPECT_EQ(next.live_edges(), 9);
  // |value| 1 sits at the tenth supported entry in row-major order.
  EXPECT_EQ(next.support(3, 0), 0.0);
  EXPECT_EQ(next.values(3, 0), 0.0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (next.support(i, j) != 0) EXPECT_EQ(next.values(i, j), 1.0);
      else EXPECT_EQ(next.values(i, j), 0.0);
      if (s(i, j) == 0) EXPECT_EQ(next.support(i, j), 0.0);
    }
  }
}

TEST(PruneMask, TiesGoToLexicographicallyFirst) {
  auto full = glt::MaskState::full(4);
  const auto next = glt::prune_mask(record_with(full.values, full.support), 0.25);
  EXPECT_EQ(next.live_edges(), 9);
  EXPECT_EQ(next.support(0, 1), 0.0);
  EXPECT_EQ(next.support(0, 2), 0.0);
  EXPECT_EQ(next.support(0, 3), 0.0);
  EXPECT_EQ(next.support(1, 0), 1.0);
}

TEST(PruneMask, EmptyMaskIsAnError) {
  graph::Matrix s = graph::Matrix::Zero(3, 3);
  s(0, 1) = 1;
  try {
    glt::prune_mask(record_with(s, s), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMask);
  }
}

TEST(Select, TieToleranceFavoursLowerDensity) {
  std::vector<TicketRecord> recs(4);
  const double acc[] = {0.80, 0.8109, 0.8102, 0.790};
  for (int i = 0; i < 4; ++i) {
    recs[i].round = i;
    recs[i].density = 1.0 - 0.1 * i;
    recs[i].best_val_accuracy = acc[i];
  }
  EXPECT_EQ(glt::select_ticket(recs), 2u);
  recs[2].best_val_accuracy = 0.8098;
  EXPECT_EQ(glt::select_ticket(recs), 1u);
  for (auto& r : recs) r.best_val_accuracy = 0.5;
  EXPECT_EQ(glt::select_ticket(recs), 3u);
  EXPECT_THROW(glt::select_ticket({}), Error);
}

TEST(Config, Validation) {
  glt::PruneConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs_per_round = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.prune_rate = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.density_floor = 0.0;
  EXPECT_THROW(c.validate(), Error);
  const auto desk = glt::PruneConfig::desk_scale();
  EXPECT_EQ(desk.epochs_per_round, 30);
  EXPECT_EQ(desk.batch_size, 64);
}

TEST(Rewind, BitExactIdempotentAndMaskKept) {
  const auto task = synth::make_edge_sign_task(6, 0, 1, 64, 3);
  auto netw = net::Network::build(tiny_spec(6), 4);
  glt::PruneConfig cfg = glt::PruneConfig::desk_scale();
  cfg.epochs_per_round = 3;
  cfg.batch_size = 32;
  const auto rec = glt::train_round(netw, glt::MaskState::full(6), task.train, task.val, cfg);
  const auto mask_after = netw.mask_values();
  glt::rewind_weights(netw);
  auto rewound = netw.state_arrays();
  glt::rewind_weights(netw);
  const auto twice = netw.state_arrays();
  for (const auto& p : netw.params().all()) {
    if (!p.rewindable) continue;
    for (size_t i = 0; i < p.initial.size(); ++i) EXPECT_EQ(p.tensor.at(i), p.initial[i]) << p.name;
    for (double m : p.m) EXPECT_EQ(m, 0.0);
  }
  ASSERT_EQ(rewound.size(), twice.size());
  for (size_t i = 0; i < rewound.size(); ++i) EXPECT_EQ(rewound[i].values, twice[i].values) << rewound[i].name;
  EXPECT_EQ(netw.mask_values(), mask_after);
  EXPECT_EQ(netw.params().step(), 0);
  for (auto& bn : netw.bn_states()) {
    for (double v : bn.running_var) EXPECT_EQ(v, 1.0);
  }
  EXPECT_GE(rec.best_epoch, 1);
}

TEST(Round, DeterministicUnderSeed) {
  const auto task = synth::make_edge_sign_task(6, 2, 4, 64, 5);
  auto run = [&] {
    auto netw = net::Network::build(tiny_spec(6), 11);
    glt::PruneConfig cfg;
    cfg.epochs_per_round = 4;
    cfg.batch_size = 32;
    return glt::train_round(netw, glt::MaskState::full(6), task.train, task.val, cfg);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  EXPECT_EQ(a.best_val_accuracy, b.best_val_accuracy);
  EXPECT_EQ(a.mask_snapshot, b.mask_snapshot);
}

// The learned mask need not be symmetric, so an undirected pair {i, j} is scored by |m_ij| + |m_ji|.
TEST(Round, PlantedEdgeRanksHigh) {
  const int n = 8, u = 2, v = 5;
  const auto task = synth::make_edge_sign_task(n, u, v, 256, 7);
  auto spec = tiny_spec(n);
  spec.conv_filters = {16, 16};
  auto netw = net::Network::build(spec, 7);
  glt::PruneConfig cfg = glt::PruneConfig::desk_scale();
  const auto rec = glt::train_round(netw, glt::MaskState::full(n), task.train, task.val, cfg);
  const auto& m = rec.mask_snapshot;
  std::vector<double> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.push_back(std::abs(m(i, j)) + std::abs(m(j, i)));
  }
  std::sort(pairs.begin(), pairs.end());
  const double p90 = pairs[static_cast<size_t>(0.9 * static_cast<double>(pairs.size() - 1))];
  EXPECT_GT(std::abs(m(u, v)) + std::abs(m(v, u)), p90);
  EXPECT_GT(rec.best_val_accuracy, 0.9);
}

TEST(Search, SupportsNestAndDensitiesFollowSchedule) {
  synth::PlantedOptions po;
  po.train_per_class = 60;
  po.val_per_class = 30;
  const auto task = synth::make_planted_task(po);
  auto spec = tiny_spec(8);
  spec.fc_nodes = {4};
  spec.n_classes = 4;
  auto netw = net::Network::build(spec, 2);
  glt::PruneConfig cfg;
  cfg.epochs_per_round = 2;
  cfg.batch_size = 64;
  const auto search = glt::find_ticket(netw, task.train, task.val, cfg);
  const auto ladder = glt::density_schedule(56);
  ASSERT_EQ(search.records.size(), ladder.size());
  for (size_t s = 0; s < ladder.size(); ++s) {
    EXPECT_EQ(search.records[s].density, ladder[s].density);
    EXPECT_EQ(search.records[s].edges, ladder[s].remaining_edges);
    EXPECT_EQ(search.records[s].support.diagonal().cwiseAbs().sum(), 0.0);
    if (s > 0) {
      const auto& prev = search.records[s - 1].support;
      const auto& cur = search.records[s].support;
      EXPECT_EQ((cur.array() * (1.0 - prev.array())).abs().sum(), 0.0) << "round " << s;
    }
  }
  EXPECT_EQ(search.selected, glt::select_ticket(search.records, cfg.tie_tolerance));
}

TEST(Search, FreshEvaluationMatchesRewoundState) {
  // After pruning and rewind, the next round starts from (theta0, binary mask) with no leaked state.
  synth::PlantedOptions po;
  po.train_per_class = 40;
  po.val_per_class = 20;
  const auto task = synth::make_planted_task(po);
  auto spec = tiny_spec(8);
  spec.fc_nodes = {4};
  spec.n_classes = 4;
  glt::PruneConfig cfg;
  cfg.epochs_per_round = 2;
  cfg.batch_size = 32;
  auto netw = net::Network::build(spec, 9);
  const auto rec = glt::train_round(netw, glt::MaskState::full(8), task.train, task.val, cfg);
  const auto mask = glt::prune_mask(rec, cfg.prune_rate);
  glt::rewind_weights(netw);
  netw.set_mask(mask.values, mask.support);
  const double resumed = net::evaluate_accuracy(netw, task.val);

  auto fresh = net::Network::build(spec, 9);
  fresh.enable_mask(graph::complete_graph(8).adjacency, mask.values, mask.support);
  EXPECT_EQ(net::evaluate_accuracy(fresh, task.val), resumed);
}

TEST(Tickets, ManifestAndFiles) {
  testing_support::TempDir tmp("tickets");
  glt::TicketSearch search;
  auto full = glt::MaskState::full(4);
  for (int r = 0; r < 3; ++r) {
    TicketRecord rec;
    rec.round = r;
    rec.edges = 12 - r;
    rec.density = rec.edges / 12.0;
    rec.support = full.support;
    rec.best_val_accuracy = 0.5 + 0.1 * r;
    rec.best_epoch = r + 1;
    search.records.push_back(rec);
  }
  search.selected = 2;
  glt::write_tickets(tmp.path(), search, {7, "D", "S001"});
  EXPECT_EQ(glt::ticket_filename(search.records[1]), "round_1_density_91.67.mask.csv");
  const auto j = nlohmann::json::parse(csv::read_text(tmp.path() / "tickets.json"));
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["model"], "D");
  EXPECT_EQ(j["rounds"].size(), 3u);
  EXPECT_EQ(j["selected"]["round"], 2);
  EXPECT_EQ(csv::read_matrix(tmp.path() / j["selected"]["mask_file"].get<std::string>()), full.support);
}
