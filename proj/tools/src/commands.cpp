#include "eegglt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"
#include "eegglt/synthetic.hpp"

namespace eegglt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (kind_of(err->code())) {
      case ErrorKind::Argument: return kArgumentError;
      case ErrorKind::Data: return kDataError;
      case ErrorKind::Numeric: return kNumericError;
    }
  }
  if (dynamic_cast<const json::exception*>(&e)) return kArgumentError;
  return kDataError;
}

void RunConfig::merge_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "subject") subject = v.get<std::string>();
      else if (key == "model") {
        if (v.is_string()) {
          model = v.get<std::string>();
        } else {
          model = "custom";
          model_json = v;
        }
      } else if (key == "method") method = v.get<std::string>();
      else if (key == "dataset") dataset = v.get<std::string>();
      else if (key == "epochs") epochs = v.get<int>();
      else if (key == "batch_size") batch_size = v.get<int>();
      else if (key == "learning_rate") learning_rate = v.get<double>();
      else if (key == "data_dir") data_dir = v.get<std::string>();
      else if (key == "out_dir") out_dir = v.get<std::string>();
      else if (key == "layout") layout = v.get<std::string>();
      else if (key == "seed") seed = v.get<std::uint64_t>();
      else if (key == "desk_scale") desk_scale = v.get<bool>();
      else if (key == "jobs") jobs = v.get<int>();
      else if (key == "max_train_samples") max_train_samples = v.get<int>();
      else if (key == "max_eval_samples") max_eval_samples = v.get<int>();
      else if (key == "notch_hz") notch_hz = v.get<double>();
      else if (key == "split") {
        split.train = v.value("train", split.train);
        split.val = v.value("val", split.val);
        split.test = v.value("test", split.test);
      } else if (key == "prune") {
        prune.prune_rate = v.value("prune_rate", prune.prune_rate);
        prune.density_floor = v.value("density_floor", prune.density_floor);
        prune.tie_tolerance = v.value("tie_tolerance", prune.tie_tolerance);
        const std::string lm = v.value("lambda_max", std::string("fixed"));
        if (lm == "fixed") prune.laplacian.lambda_max = graph::LambdaMaxMode::Fixed2;
        else if (lm == "power") prune.laplacian.lambda_max = graph::LambdaMaxMode::PowerIteration;
        else throw Error(ErrorCode::InvalidConfig, "lambda_max must be 'fixed' or 'power'");
      } else {
        throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config: ") + e.what());
  }
}

json RunConfig::to_json() const {
  json j = {{"subject", subject},
            {"method", method},
            {"dataset", dataset},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"learning_rate", learning_rate},
            {"data_dir", data_dir.string()},
            {"out_dir", out_dir.string()},
            {"layout", layout.string()},
            {"seed", seed},
            {"desk_scale", desk_scale},
            {"jobs", jobs},
            {"max_train_samples", max_train_samples},
            {"max_eval_samples", max_eval_samples},
            {"notch_hz", notch_hz},
            {"split", {{"train", split.train}, {"val", split.val}, {"test", split.test}}},
            {"prune",
             {{"prune_rate", prune.prune_rate},
              {"density_floor", prune.density_floor},
              {"tie_tolerance", prune.tie_tolerance},
              {"lambda_max", prune.laplacian.lambda_max == graph::LambdaMaxMode::Fixed2 ? "fixed" : "power"}}}};
  j["model"] = model == "custom" ? model_json : json(model);
  return j;
}

void RunConfig::apply_desk_scale() {
  desk_scale = true;
  const auto desk = glt::PruneConfig::desk_scale();
  epochs = desk.epochs_per_round;
  batch_size = desk.batch_size;
  if (max_train_samples == 0) max_train_samples = 1024;
  if (max_eval_samples == 0) max_eval_samples = 512;
}

void RunConfig::validate() const {
  if (method != "geodesic" && method != "pcc" && method != "eeg_glt") {
    throw Error(ErrorCode::InvalidConfig, "method must be geodesic, pcc or eeg_glt");
  }
  if (dataset != "subject" && dataset != "planted") throw Error(ErrorCode::InvalidConfig, "dataset must be subject or planted");
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (batch_size < 2) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 2");
  if (!(learning_rate > 0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (jobs < 1) throw Error(ErrorCode::InvalidConfig, "jobs must be >= 1");
  if (max_train_samples < 0 || max_eval_samples < 0) throw Error(ErrorCode::InvalidConfig, "sample caps must be >= 0");
  split.validate();
  if (dataset == "subject") data::parse_subject_id(subject);
  model_spec(dataset == "planted" ? 8 : 64);
}

net::ModelSpec RunConfig::model_spec(int n_nodes) const {
  net::ModelSpec spec;
  if (model == "custom") {
    json j = model_json;
    j["n_nodes"] = n_nodes;
    spec = net::ModelSpec::from_json(j);
  } else {
    if (model.size() != 1 || std::string("ABCDEFabcdef").find(model[0]) == std::string::npos) {
      throw Error(ErrorCode::InvalidSpec, "model must be a letter A-F, got '" + model + "'");
    }
    spec = net::ModelSpec::from_letter(model[0], n_nodes);
  }
  if (desk_scale) {
    for (auto& f : spec.conv_filters) f = std::min(f, 8);
    for (size_t i = 0; i + 1 < spec.fc_nodes.size(); ++i) spec.fc_nodes[i] = std::min(spec.fc_nodes[i], 16);
  }
  spec.validate();
  return spec;
}

std::string RunConfig::model_label() const {
  if (model == "custom") return model_json.value("name", std::string("custom"));
  return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(model.at(0)))));
}

namespace {

std::string subject_label(const RunConfig& cfg) {
  if (cfg.dataset == "planted") return "planted";
  return data::subject_dir_name(data::parse_subject_id(cfg.subject));
}

net::SampleSet cap(const net::SampleSet& s, int max_samples) {
  if (max_samples <= 0 || s.size() <= static_cast<size_t>(max_samples)) return s;
  net::SampleSet out;
  out.n_nodes = s.n_nodes;
  const size_t n = s.size();
  for (size_t i = 0; i < static_cast<size_t>(max_samples); ++i) {
    const size_t idx = i * n / static_cast<size_t>(max_samples);
    out.x.insert(out.x.end(), s.x.begin() + static_cast<long>(idx * s.n_nodes),
                 s.x.begin() + static_cast<long>((idx + 1) * s.n_nodes));
    out.y.push_back(s.y[idx]);
  }
  return out;
}

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

class JsonLines {
 public:
  explicit JsonLines(const fs::path& path) {
    fs::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
  void write(const json& j) { out_ << j.dump() << '\n'; }

 private:
  std::ofstream out_;
};

std::string metrics_row(const std::string& split, const Metrics& m) {
  return split + "," + csv::format_double(m.accuracy) + "," + csv::format_double(m.macro_sensitivity) + "," +
         csv::format_double(m.macro_precision) + "," + csv::format_double(m.macro_f1) + "," + std::to_string(m.total) +
         "\n";
}

}  // namespace

fs::path RunConfig::run_dir() const { return out_dir / subject_label(*this) / model_label() / method; }

PreparedData prepare_data(const RunConfig& cfg) {
  PreparedData d;
  d.subject_label = subject_label(cfg);
  net::SampleSet train;
  if (cfg.dataset == "planted") {
    synth::PlantedOptions po;
    po.seed = cfg.seed;
    auto task = synth::make_planted_task(po);
    d.n_nodes = po.n_nodes;
    train = std::move(task.train);
    d.val = std::move(task.val);
    d.test = std::move(task.test);
  } else {
    data::LoadOptions lo;
    lo.notch_hz = cfg.notch_hz;
    lo.apply_notch = cfg.notch_hz > 0;
    const auto trials = data::load_subject(cfg.data_dir, cfg.subject, lo);
    const auto ds = data::build_timepoint_dataset(trials, cfg.split, cfg.seed);
    d.n_nodes = ds.n_nodes;
    d.pcc_signal = data::pcc_input_signal(trials, ds);
    train = ds.subset(data::Split::Train);
    d.val = ds.subset(data::Split::Val);
    d.test = ds.subset(data::Split::Test);
  }
  if (cfg.dataset == "planted") {
    graph::Matrix sig(d.n_nodes, static_cast<Eigen::Index>(train.size()));
    for (size_t i = 0; i < train.size(); ++i) {
      for (int c = 0; c < d.n_nodes; ++c) sig(c, static_cast<Eigen::Index>(i)) = train.x[i * d.n_nodes + c];
    }
    d.pcc_signal = std::move(sig);
  }
  d.train = cap(train, cfg.max_train_samples);
  d.val = cap(d.val, cfg.max_eval_samples);
  d.test = cap(d.test, cfg.max_eval_samples);
  return d;
}

graph::Graph build_adjacency(const RunConfig& cfg, const PreparedData& data) {
  if (cfg.method == "geodesic") {
    const auto layout = cfg.layout.empty() ? graph::default_layout() : graph::load_layout(cfg.layout);
    if (layout.size() != data.n_nodes) {
      throw Error(ErrorCode::DimensionMismatch, "layout has " + std::to_string(layout.size()) + " electrodes, data has " +
                                                    std::to_string(data.n_nodes) + " channels");
    }
    return graph::geodesic_adjacency(layout);
  }
  if (cfg.method == "pcc") return graph::pcc_adjacency(data.pcc_signal);
  throw Error(ErrorCode::InvalidConfig, "method " + cfg.method + " has no fixed adjacency; run glt instead");
}

fs::path cmd_adjacency(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  const auto dir = cfg.run_dir();
  graph::Matrix a;
  if (cfg.method == "geodesic") {
    const auto layout = cfg.layout.empty() ? graph::default_layout() : graph::load_layout(cfg.layout);
    a = graph::geodesic_adjacency(layout).adjacency;
  } else if (cfg.method == "pcc") {
    a = build_adjacency(cfg, prepare_data(cfg)).adjacency;
  } else {
    const auto manifest_path = dir / "tickets" / "tickets.json";
    if (!fs::exists(manifest_path)) throw Error(ErrorCode::Io, "no ticket manifest at " + manifest_path.string());
    json manifest;
    try {
      manifest = json::parse(csv::read_text(manifest_path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, manifest_path.string() + ": " + e.what());
    }
    a = csv::read_matrix(dir / "tickets" / manifest.at("selected").at("mask_file").get<std::string>());
  }
  const auto path = dir / "adjacency.csv";
  csv::write_matrix(path, a);
  say(log, "wrote " + path.string());
  return path;
}

TrainResult cmd_train(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  if (cfg.method == "eeg_glt") throw Error(ErrorCode::InvalidConfig, "train uses a fixed adjacency; use glt for eeg_glt");
  const auto data = prepare_data(cfg);
  const auto adjacency = build_adjacency(cfg, data);
  auto net = net::Network::build(cfg.model_spec(data.n_nodes), cfg.seed);
  net.set_fixed_adjacency(adjacency, cfg.prune.laplacian);

  TrainResult res;
  res.dir = cfg.run_dir();
  fs::create_directories(res.dir);
  csv::write_matrix(res.dir / "adjacency.csv", adjacency.adjacency);
  JsonLines runlog(res.dir / "runlog.jsonl");
  net::TrainOptions opts;
  opts.batch_size = cfg.batch_size;
  opts.adam.learning_rate = cfg.learning_rate;
  res.best_val_accuracy = -1.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double loss = net::train_epoch(net, data.train, opts);
    const double val = data.val.size() ? net::evaluate_accuracy(net, data.val) : 0.0;
    runlog.write({{"epoch", epoch}, {"train_loss", loss}, {"val_acc", val}});
    if (val > res.best_val_accuracy) {
      res.best_val_accuracy = val;
      res.best_epoch = epoch;
      ad::save_checkpoint(res.dir / "best.ckpt", net.state_arrays());
    }
    say(log, "epoch " + std::to_string(epoch) + " loss " + csv::format_double(loss) + " val " + csv::format_double(val));
  }
  ad::save_checkpoint(res.dir / "final.ckpt", net.state_arrays());

  std::string csv_text = "split,accuracy,macro_sensitivity,macro_precision,macro_f1,samples\n";
  res.train = net::predict_metrics(net, data.train);
  csv_text += metrics_row("train", res.train);
  if (data.val.size()) {
    res.val = net::predict_metrics(net, data.val);
    csv_text += metrics_row("val", res.val);
  }
  if (data.test.size()) {
    res.test = net::predict_metrics(net, data.test);
    csv_text += metrics_row("test", res.test);
  }
  csv::write_text(res.dir / "metrics.csv", csv_text);
  say(log, "wrote " + (res.dir / "metrics.csv").string());
  return res;
}

GltResult cmd_glt(const RunConfig& cfg_in, const Logger& log) {
  RunConfig cfg = cfg_in;
  cfg.method = "eeg_glt";
  cfg.validate();
  const auto data = prepare_data(cfg);
  auto net = net::Network::build(cfg.model_spec(data.n_nodes), cfg.seed);

  glt::PruneConfig pc = cfg.prune;
  pc.epochs_per_round = cfg.epochs;
  pc.batch_size = cfg.batch_size;
  pc.learning_rate = cfg.learning_rate;
  pc.seed = cfg.seed;

  GltResult res;
  res.dir = cfg.run_dir();
  fs::create_directories(res.dir);
  JsonLines runlog(res.dir / "runlog.jsonl");
  res.search = glt::find_ticket(net, data.train, data.val, pc, [&](const glt::EpochLog& e) {
    runlog.write({{"round", e.round}, {"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_acc", e.val_accuracy}});
    if (e.epoch == pc.epochs_per_round) {
      say(log, "round " + std::to_string(e.round) + " done, last val " + csv::format_double(e.val_accuracy));
    }
  });
  glt::write_tickets(res.dir / "tickets", res.search, {cfg.seed, cfg.model_label(), data.subject_label});

  std::string curve = "round,edges,density,best_val_accuracy,best_epoch,selected\n";
  for (size_t i = 0; i < res.search.records.size(); ++i) {
    const auto& r = res.search.records[i];
    curve += std::to_string(r.round) + "," + std::to_string(r.edges) + "," + csv::format_double(r.density) + "," +
             csv::format_double(r.best_val_accuracy) + "," + std::to_string(r.best_epoch) + "," +
             (i == res.search.selected ? "1" : "0") + "\n";
  }
  csv::write_text(res.dir / "metrics.csv", curve);
  csv::write_matrix(res.dir / "adjacency.csv", res.search.best().support);
  const auto& best = res.search.best();
  say(log, "selected round " + std::to_string(best.round) + " at density " + csv::format_double(best.density) +
               " with val accuracy " + csv::format_double(best.best_val_accuracy));
  return res;
}

std::string cmd_macs(const MacsRequest& req) {
  std::vector<double> densities = req.densities;
  if (req.ladder) {
    for (const auto& step : glt::density_schedule()) densities.push_back(step.density);
  }
  std::sort(densities.begin(), densities.end(), std::greater<>());
  densities.erase(std::unique(densities.begin(), densities.end()), densities.end());
  std::string out = macs::csv_header() + "\n";
  for (const auto& m : req.models) {
    if (m.size() != 1) throw Error(ErrorCode::InvalidSpec, "model must be a letter A-F, got '" + m + "'");
    const auto spec = net::ModelSpec::from_letter(m[0]);
    for (double d : densities) {
      out += macs::csv_row(spec, d, macs::count_model_macs(spec, d, req.convention), req.convention) + "\n";
    }
  }
  return out;
}

std::string format_saving(double baseline_macs, double ticket_macs) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * macs::savings(baseline_macs, ticket_macs));
  return buf;
}

void cmd_synth(const fs::path& dir, const std::vector<int>& subjects, std::uint64_t seed) {
  synth::SurrogateOptions opts;
  opts.seed = seed;
  for (int s : subjects) synth::write_surrogate_subject(dir, s, opts);
}

void run_jobs(const std::vector<RunConfig>& configs, int jobs, const std::function<void(const RunConfig&)>& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(configs.size())));
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    for (size_t i = next++; i < configs.size(); i = next++) {
      try {
        fn(configs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace eegglt::cli
