#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "eegglt/cli.hpp"
#include "eegglt/csv.hpp"
#include "eegglt/error.hpp"

namespace {

using namespace eegglt;
using eegglt::cli::RunConfig;

struct Flags {
  std::string config;
  std::vector<std::string> subjects;
  std::vector<std::string> models;
  std::string method;
  std::string dataset;
  std::string data_dir;
  std::string out_dir;
  std::string layout;
  std::uint64_t seed = 0;
  int epochs = 0;
  int batch_size = 0;
  double learning_rate = 0.0;
  double prune_rate = 0.0;
  double density_floor = 0.0;
  int max_train = 0;
  int max_eval = 0;
  int jobs = 1;
  bool desk_scale = false;
};

void add_run_flags(CLI::App* app, Flags& f, bool with_method) {
  app->add_option("--config", f.config, "JSON file mirroring the run configuration");
  app->add_option("--subject,--subjects", f.subjects, "Subject id(s) such as S6")->delimiter(',');
  app->add_option("--model,--models", f.models, "Model letter(s) A-F")->delimiter(',');
  if (with_method) app->add_option("--method", f.method, "geodesic, pcc or eeg_glt");
  app->add_option("--dataset", f.dataset, "subject or planted");
  app->add_option("--data-dir", f.data_dir, "Directory holding S###/ subject folders");
  app->add_option("--out", f.out_dir, "Output root");
  app->add_option("--layout", f.layout, "Electrode layout CSV (name,x,y,z)");
  app->add_option("--seed", f.seed);
  app->add_option("--epochs", f.epochs, "Epochs (per round for glt)");
  app->add_option("--batch-size", f.batch_size);
  app->add_option("--lr", f.learning_rate);
  app->add_option("--prune-rate", f.prune_rate);
  app->add_option("--density-floor", f.density_floor);
  app->add_option("--max-train-samples", f.max_train);
  app->add_option("--max-eval-samples", f.max_eval);
  app->add_option("--jobs", f.jobs, "Parallel (subject, model) runs");
  app->add_flag("--desk-scale", f.desk_scale, "Small CI profile");
}

bool given(const CLI::App* app, const std::string& name) {
  const auto* opt = app->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

std::vector<RunConfig> resolve(const CLI::App* app, const Flags& f, const std::string& forced_method) {
  RunConfig base;
  if (!f.config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(csv::read_text(f.config));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, f.config + ": " + e.what());
    }
    base.merge_json(j);
  }
  if (const char* env = std::getenv("EEGGLT_DATA_DIR"); env && *env) base.data_dir = env;
  if (given(app, "--desk-scale") || base.desk_scale) base.apply_desk_scale();
  if (given(app, "--method")) base.method = f.method;
  if (!forced_method.empty()) base.method = forced_method;
  if (given(app, "--dataset")) base.dataset = f.dataset;
  if (given(app, "--data-dir")) base.data_dir = f.data_dir;
  if (given(app, "--out")) base.out_dir = f.out_dir;
  if (given(app, "--layout")) base.layout = f.layout;
  if (given(app, "--seed")) base.seed = f.seed;
  if (given(app, "--epochs")) base.epochs = f.epochs;
  if (given(app, "--batch-size")) base.batch_size = f.batch_size;
  if (given(app, "--lr")) base.learning_rate = f.learning_rate;
  if (given(app, "--prune-rate")) base.prune.prune_rate = f.prune_rate;
  if (given(app, "--density-floor")) base.prune.density_floor = f.density_floor;
  if (given(app, "--max-train-samples")) base.max_train_samples = f.max_train;
  if (given(app, "--max-eval-samples")) base.max_eval_samples = f.max_eval;
  if (given(app, "--jobs")) base.jobs = f.jobs;
  if (!base.layout.empty() && !std::filesystem::exists(base.layout)) {
    throw Error(ErrorCode::Io, "layout file not found: " + base.layout.string());
  }

  const std::vector<std::string> subjects = given(app, "--subject") ? f.subjects : std::vector<std::string>{base.subject};
  const std::vector<std::string> models = given(app, "--model") ? f.models : std::vector<std::string>{base.model};
  std::vector<RunConfig> out;
  for (const auto& s : subjects) {
    for (const auto& m : models) {
      RunConfig c = base;
      c.subject = s;
      if (given(app, "--model")) {
        c.model = m;
        c.model_json = nullptr;
      }
      c.validate();
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : csv::split(text, ',')) out.push_back(csv::parse_double(part));
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"EEG graph lottery tickets: adjacency baselines, training, ticket search and MACs reports"};
  app.require_subcommand(1);
  std::mutex log_mu;
  cli::Logger log = [&](const std::string& msg) {
    std::lock_guard<std::mutex> lock(log_mu);
    std::cerr << msg << '\n';
  };

  Flags adj_f, train_f, glt_f;
  auto* adj = app.add_subcommand("adjacency", "Write a geodesic, PCC or selected-ticket adjacency CSV");
  add_run_flags(adj, adj_f, true);
  auto* train = app.add_subcommand("train", "Train on a fixed geodesic or PCC adjacency");
  add_run_flags(train, train_f, true);
  auto* glt = app.add_subcommand("glt", "Search for a graph lottery ticket");
  add_run_flags(glt, glt_f, false);

  auto* macs = app.add_subcommand("macs", "MACs per inference as CSV");
  std::vector<std::string> macs_models;
  std::string densities = "1.0";
  std::string convention = "recurrence";
  std::string savings;
  std::string macs_out;
  bool ladder = false;
  macs->add_option("--models", macs_models, "Model letters")->delimiter(',');
  macs->add_option("--densities", densities, "Comma-separated densities in (0, 1]");
  macs->add_flag("--ladder", ladder, "Add every density of the pruning schedule");
  macs->add_option("--convention", convention, "recurrence or k-products");
  macs->add_option("--savings", savings, "baseline,ticket MACs: print the percent saving and exit");
  macs->add_option("--out", macs_out, "Write the CSV here instead of stdout");

  auto* synth = app.add_subcommand("synth", "Write surrogate EDF subjects");
  std::string synth_dir = "data";
  std::vector<std::string> synth_subjects = {"S1"};
  std::uint64_t synth_seed = 0;
  synth->add_option("--data-dir", synth_dir);
  synth->add_option("--subjects", synth_subjects)->delimiter(',');
  synth->add_option("--seed", synth_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kArgumentError;
  }

  try {
    if (adj->parsed()) {
      const auto configs = resolve(adj, adj_f, "");
      cli::run_jobs(configs, configs.front().jobs, [&](const RunConfig& c) {
        std::cout << cli::cmd_adjacency(c, log).string() << '\n';
      });
    } else if (train->parsed()) {
      const auto configs = resolve(train, train_f, "");
      cli::run_jobs(configs, configs.front().jobs, [&](const RunConfig& c) {
        const auto r = cli::cmd_train(c, log);
        std::cout << (r.dir / "metrics.csv").string() << '\n';
      });
    } else if (glt->parsed()) {
      const auto configs = resolve(glt, glt_f, "eeg_glt");
      cli::run_jobs(configs, configs.front().jobs, [&](const RunConfig& c) {
        const auto r = cli::cmd_glt(c, log);
        std::cout << (r.dir / "tickets" / "tickets.json").string() << '\n';
      });
    } else if (macs->parsed()) {
      if (!savings.empty()) {
        const auto pair = parse_list(savings);
        if (pair.size() != 2) throw Error(ErrorCode::InvalidConfig, "--savings takes baseline,ticket");
        std::cout << cli::format_saving(pair[0], pair[1]) << '\n';
        return cli::kOk;
      }
      cli::MacsRequest req;
      if (!macs_models.empty()) req.models = macs_models;
      req.densities = parse_list(densities);
      req.ladder = ladder;
      req.convention = macs::parse_convention(convention);
      const auto text = cli::cmd_macs(req);
      if (macs_out.empty()) {
        std::cout << text;
      } else {
        csv::write_text(macs_out, text);
      }
    } else if (synth->parsed()) {
      std::vector<int> ids;
      for (const auto& s : synth_subjects) ids.push_back(data::parse_subject_id(s));
      cli::cmd_synth(synth_dir, ids, synth_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
