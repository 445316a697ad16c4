// nmq command-line driver.
//
//   nmq labels  --kind ad --count 300 --out labels.csv
//   nmq dataset --kind ad --count 1000 --seed 7 --out ad.dataset
//   nmq train   --dataset ad.dataset --model ad.model --history ad_history.csv
//   nmq eval    --model ad.model --sweep-count 200 --out ad_eval.csv --svg ad_eval.svg
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmq/nmq.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

struct GridOptions {
  double efolds = 20.0;
  int n_steps = 4000;
  double refine_tol = 1e-6;

  nmq::NmGridPolicy policy() const { return {efolds, n_steps, refine_tol}; }
};

void add_grid_options(CLI::App* cmd, GridOptions& grid) {
  cmd->add_option("--efolds", grid.efolds, "Integration horizon in e-folds of the entanglement envelope")
      ->capture_default_str();
  cmd->add_option("--n-steps", grid.n_steps, "Initial number of grid steps")->capture_default_str();
  cmd->add_option("--refine-tol", grid.refine_tol, "Grid-halving convergence tolerance")->capture_default_str();
}

nmq::ParamRange resolve_range(nmq::ChannelKind kind, std::optional<double> lo, std::optional<double> hi) {
  nmq::ParamRange r = nmq::working_range(kind);
  if (lo) r.lo = *lo;
  if (hi) r.hi = *hi;
  return r;
}

std::vector<double> sweep_points(nmq::ParamRange r, int count) {
  if (count < 1) throw nmq::ValidationError("sweep needs at least one point");
  if (!(r.lo > 0.0)) throw nmq::ValidationError("range must be positive");
  if (count > 1 && !(r.lo < r.hi)) throw nmq::ValidationError("range must satisfy lo < hi");
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) xs[i] = count == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (count - 1);
  return xs;
}

std::vector<double> label_points(nmq::ChannelKind kind, const std::vector<double>& xs, const nmq::NmGridPolicy& grid) {
  std::vector<double> ns(xs.size());
  nmq::parallel_for(xs.size(), [&](std::size_t i) { ns[i] = nmq::nm_measure(kind, xs[i], grid.for_param(kind, xs[i])); });
  return ns;
}

std::string x_label(nmq::ChannelKind kind) {
  return kind == nmq::ChannelKind::AmplitudeDamping ? "lambda / gamma_0" : "alpha * tau";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Markovianity estimation with a variational probe circuit"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags override it");
  app.require_subcommand(1);

  // labels -------------------------------------------------------------------
  auto* labels = app.add_subcommand("labels", "Sweep the non-Markovianity measure over a parameter range");
  std::string labels_kind, labels_out;
  std::optional<double> labels_lo, labels_hi;
  int labels_count = 300;
  GridOptions labels_grid;
  labels->add_option("--kind", labels_kind, "Channel: ad or pd")->required();
  labels->add_option("--lo", labels_lo, "Lower end of the sweep (default: working range)");
  labels->add_option("--hi", labels_hi, "Upper end of the sweep (default: working range)");
  labels->add_option("--count", labels_count, "Number of evenly spaced points")->capture_default_str();
  labels->add_option("--out", labels_out, "Output CSV (x,N)")->required();
  add_grid_options(labels, labels_grid);

  // dataset ------------------------------------------------------------------
  auto* dataset = app.add_subcommand("dataset", "Generate a labelled dataset of uniformly drawn parameters");
  std::string dataset_kind, dataset_out;
  std::optional<double> dataset_lo, dataset_hi;
  std::size_t dataset_count = 1000;
  std::uint64_t dataset_seed = 0;
  GridOptions dataset_grid;
  dataset->add_option("--kind", dataset_kind, "Channel: ad or pd")->required();
  dataset->add_option("--lo", dataset_lo, "Lower end of the range (default: working range)");
  dataset->add_option("--hi", dataset_hi, "Upper end of the range (default: working range)");
  dataset->add_option("--count", dataset_count, "Number of points")->capture_default_str();
  dataset->add_option("--seed", dataset_seed, "Random seed (required for reproducibility)")->required();
  dataset->add_option("--out", dataset_out, "Output dataset file")->required();
  add_grid_options(dataset, dataset_grid);

  // train --------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train the probe circuit on a dataset");
  std::string train_dataset, train_model, train_history, train_backend = "kraus-reset", train_readout = "least-squares";
  int train_interactions = 2;
  double train_fraction = 0.8;
  nmq::TrainHyper hyper;
  train->add_option("--dataset", train_dataset, "Dataset file")->required();
  train->add_option("--model", train_model, "Output model file")->required();
  train->add_option("--history", train_history, "Output CSV with the cost per epoch");
  train->add_option("--n-interactions", train_interactions, "Number of channel interactions")->capture_default_str();
  train->add_option("--backend", train_backend, "kraus-reset or explicit-ancillas")->capture_default_str();
  train->add_option("--train-fraction", train_fraction, "Leading fraction of the dataset used for training")
      ->capture_default_str();
  train->add_option("--eta", hyper.eta, "Adagrad learning rate")->capture_default_str();
  train->add_option("--eps", hyper.eps, "Adagrad epsilon")->capture_default_str();
  train->add_option("--initial-accumulator", hyper.initial_accumulator, "Starting value of the Adagrad accumulators")
      ->capture_default_str();
  train->add_option("--fd-step", hyper.h, "Central finite-difference step")->capture_default_str();
  train->add_option("--max-epochs", hyper.max_epochs, "Epoch limit per restart")->capture_default_str();
  train->add_option("--restarts", hyper.restarts, "Independent initialisations")->capture_default_str();
  train->add_option("--patience", hyper.patience, "Stop when the cost improves < 1e-10 over this many epochs")
      ->capture_default_str();
  train->add_option("--seed", hyper.seed, "Random seed for initialisation")->capture_default_str();
  train->add_option("--readout-init", train_readout, "least-squares or identity")->capture_default_str();

  // eval ---------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Evaluate a trained model on a dataset or a parameter sweep");
  std::string eval_model, eval_dataset, eval_out, eval_svg;
  std::optional<int> eval_sweep;
  std::optional<double> eval_lo, eval_hi;
  GridOptions eval_grid;
  eval->add_option("--model", eval_model, "Model file")->required();
  auto* eval_ds_opt = eval->add_option("--dataset", eval_dataset, "Dataset file to evaluate on");
  auto* eval_sweep_opt = eval->add_option("--sweep-count", eval_sweep, "Evaluate on an evenly spaced sweep instead");
  eval_ds_opt->excludes(eval_sweep_opt);
  eval->add_option("--lo", eval_lo, "Sweep lower end (default: working range)");
  eval->add_option("--hi", eval_hi, "Sweep upper end (default: working range)");
  eval->add_option("--out", eval_out, "Output CSV (x,target,predicted)")->required();
  eval->add_option("--svg", eval_svg, "Optional SVG chart");
  add_grid_options(eval, eval_grid);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*labels) {
      const auto kind = nmq::parse_channel_kind(labels_kind);
      const auto xs = sweep_points(resolve_range(kind, labels_lo, labels_hi), labels_count);
      const auto ns = label_points(kind, xs, labels_grid.policy());
      nmq::io::write_file(labels_out, nmq::io::labels_csv(xs, ns));
      std::cout << "wrote " << xs.size() << " labels to " << labels_out << "\n";
    } else if (*dataset) {
      const auto kind = nmq::parse_channel_kind(dataset_kind);
      const auto ds = nmq::generate_dataset(kind, dataset_count, resolve_range(kind, dataset_lo, dataset_hi),
                                            dataset_seed, dataset_grid.policy());
      nmq::io::save_dataset(dataset_out, ds);
      std::cout << "wrote " << ds.size() << " points to " << dataset_out << " (" << nmq::io::dataset_digest(ds) << ")\n";
    } else if (*train) {
      const auto ds = nmq::io::load_dataset(train_dataset);
      const auto [train_set, test_set] = nmq::split_dataset(ds, train_fraction);
      nmq::VqcConfig cfg{ds.kind, train_interactions, nmq::parse_backend(train_backend)};
      if (train_readout == "least-squares")
        hyper.readout_init = nmq::ReadoutInit::LeastSquares;
      else if (train_readout == "identity")
        hyper.readout_init = nmq::ReadoutInit::Identity;
      else
        throw nmq::ValidationError("unknown readout init '" + train_readout + "'");

      const auto report = nmq::train(cfg, train_set, hyper);
      nmq::io::ModelFile model;
      model.config = cfg;
      model.params = report.best;
      model.dataset_digest = nmq::io::dataset_digest(ds);
      model.train_mse = nmq::evaluate(cfg, report.best, train_set).mse;
      if (test_set.size() > 0) model.test_mse = nmq::evaluate(cfg, report.best, test_set).mse;
      model.seed = hyper.seed;
      model.restart = report.restart_index;
      model.epochs = report.epochs_used;
      nmq::io::save_model(train_model, model);
      if (!train_history.empty()) nmq::io::write_file(train_history, nmq::io::history_csv(report.history));
      std::cout << "train_mse=" << nmq::io::format_double(model.train_mse)
                << " test_mse=" << nmq::io::format_double(model.test_mse) << " restart=" << model.restart
                << " epochs=" << model.epochs << "\n";
    } else if (*eval) {
      const auto model = nmq::io::load_model(eval_model);
      std::vector<double> xs, target;
      if (!eval_dataset.empty()) {
        const auto ds = nmq::io::load_dataset(eval_dataset);
        if (ds.kind != model.config.kind) throw nmq::ValidationError("model and dataset are for different channels");
        xs = ds.xs;
        target = ds.ys;
      } else if (eval_sweep) {
        xs = sweep_points(resolve_range(model.config.kind, eval_lo, eval_hi), *eval_sweep);
        target = label_points(model.config.kind, xs, eval_grid.policy());
      } else {
        throw nmq::ValidationError("eval needs --dataset or --sweep-count");
      }
      std::vector<double> predicted(xs.size());
      double sum = 0.0, worst = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        predicted[i] = nmq::predict(model.config, model.params, xs[i]);
        const double r = predicted[i] - target[i];
        sum += r * r;
        worst = std::max(worst, std::abs(r));
      }
      nmq::io::write_file(eval_out, nmq::io::eval_csv(xs, target, predicted));
      if (!eval_svg.empty())
        nmq::io::write_file(eval_svg, nmq::io::eval_svg(xs, target, predicted, x_label(model.config.kind)));
      std::cout << "mse=" << nmq::io::format_double(sum / static_cast<double>(xs.size()))
                << " max_abs_error=" << nmq::io::format_double(worst) << "\n";
    }
  } catch (const nmq::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const nmq::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const nmq::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
