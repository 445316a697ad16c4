// training.hpp
// Supervised training of the probe circuit: labelled datasets, MSE cost,
// gradients, Adagrad and multi-restart training.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nmq/channels.hpp"
#include "nmq/nonmarkovianity.hpp"
#include "nmq/parallel.hpp"
#include "nmq/vqc.hpp"

namespace nmq {

// ---------------------------------------------------------------------------
// Randomness

/// Generator for stream `stream` of a run seeded with `seed`. seed_seq
/// decorrelates (seed, stream) pairs, so streams of different seeds never
/// coincide.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

// ---------------------------------------------------------------------------
// Dataset

struct LabeledDataset {
  ChannelKind kind = ChannelKind::AmplitudeDamping;
  ParamRange range;
  std::uint64_t seed = 0;
  NmGridPolicy grid;
  std::string split = "all";
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const { return xs.size(); }

  void validate() const {
    if (xs.size() != ys.size()) throw ValidationError("dataset has mismatched x/y lengths");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !range.contains(xs[i])) throw ValidationError("dataset x outside its range");
      if (!std::isfinite(ys[i]) || ys[i] < 0.0) throw ValidationError("dataset label must be non-negative");
    }
  }
};

/// Draws n parameters uniformly from `range` and labels them with
/// nm_measure. Labelling runs data-parallel; the result only depends on seed.
inline LabeledDataset generate_dataset(ChannelKind kind, std::size_t n, ParamRange range, std::uint64_t seed,
                                       const NmGridPolicy& grid = {}) {
  if (n < 1) throw ValidationError("dataset needs at least one point");
  if (!(range.lo < range.hi) || !(range.lo > 0.0)) throw ValidationError("dataset range must satisfy 0 < lo < hi");
  LabeledDataset ds;
  ds.kind = kind;
  ds.range = range;
  ds.seed = seed;
  ds.grid = grid;
  ds.xs.resize(n);
  ds.ys.resize(n);
  std::mt19937_64 rng(seed);
  for (auto& x : ds.xs) x = uniform_in(rng, range.lo, range.hi);
  parallel_for(n, [&](std::size_t i) { ds.ys[i] = nm_measure(kind, ds.xs[i], grid.for_param(kind, ds.xs[i])); });
  return ds;
}

/// First `train_fraction` of the points for training, the rest for testing.
/// The points are i.i.d., so a prefix split is an unbiased split.
inline std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds, double train_fraction = 0.8) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ValidationError("train fraction must be in (0, 1]");
  const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(train_fraction * ds.size())));
  LabeledDataset train = ds, test = ds;
  train.split = "train";
  test.split = "test";
  train.xs.assign(ds.xs.begin(), ds.xs.begin() + n_train);
  train.ys.assign(ds.ys.begin(), ds.ys.begin() + n_train);
  test.xs.assign(ds.xs.begin() + n_train, ds.xs.end());
  test.ys.assign(ds.ys.begin() + n_train, ds.ys.end());
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Parameter vector
//
// Layout: [phi_0 .. phi_N, u_1 .. u_N, w0, w1] with t_i = softplus(u_i), so
// interaction times stay positive without projection.

inline double softplus(double u) { return u > 30.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

inline double inverse_softplus(double t) {
  t = std::max(t, 1e-300);
  return t > 30.0 ? t + std::log1p(-std::exp(-t)) : std::log(std::expm1(t));
}

inline std::vector<double> to_vector(const VqcParams& p) {
  std::vector<double> v(p.phis);
  for (double t : p.times) v.push_back(inverse_softplus(t));
  v.push_back(p.w0);
  v.push_back(p.w1);
  return v;
}

inline VqcParams from_vector(const VqcConfig& cfg, std::span<const double> v) {
  const auto n = static_cast<std::size_t>(cfg.n_interactions);
  if (v.size() != 2 * n + 3) throw DimensionError("parameter vector has the wrong length");
  VqcParams p;
  p.phis.assign(v.begin(), v.begin() + n + 1);
  for (std::size_t i = 0; i < n; ++i) p.times.push_back(softplus(v[n + 1 + i]));
  p.w0 = v[2 * n + 1];
  p.w1 = v[2 * n + 2];
  return p;
}

// ---------------------------------------------------------------------------
// Cost and gradient

inline double mse(const VqcConfig& cfg, const VqcParams& p, const LabeledDataset& ds) {
  if (ds.size() == 0) throw ValidationError("cannot evaluate the cost on an empty dataset");
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double r = predict(cfg, p, ds.xs[i]) - ds.ys[i];
    sum += r * r;
  }
  return sum / static_cast<double>(ds.size());
}

struct CostAndGradient {
  double cost = 0.0;
  std::vector<double> gradient;  // same layout as to_vector()
};

/// Cost and its gradient with respect to the parameter vector. The readout
/// weights enter quadratically and are differentiated in closed form; angles
/// and time parameters use central differences with step h.
inline CostAndGradient cost_and_gradient(const VqcConfig& cfg, const VqcParams& p, const LabeledDataset& ds,
                                         double h = 1e-5) {
  p.validate(cfg);
  if (ds.size() == 0) throw ValidationError("cannot evaluate the gradient on an empty dataset");
  if (cfg.backend != VqcBackend::KrausReset) {
    // Generic path through forward(); slow, used only for cross-checks.
    CostAndGradient out;
    out.cost = mse(cfg, p, ds);
    const auto v = to_vector(p);
    out.gradient.resize(v.size());
    for (std::size_t j = 0; j + 2 < v.size(); ++j) {
      auto plus = v, minus = v;
      plus[j] += h;
      minus[j] -= h;
      out.gradient[j] = (mse(cfg, from_vector(cfg, plus), ds) - mse(cfg, from_vector(cfg, minus), ds)) / (2.0 * h);
    }
    double g0 = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double z = forward(cfg, p, ds.xs[i]);
      const double r = p.w0 + p.w1 * z - ds.ys[i];
      g0 += r;
      g1 += r * z;
    }
    out.gradient[v.size() - 2] = 2.0 * g0 / static_cast<double>(ds.size());
    out.gradient[v.size() - 1] = 2.0 * g1 / static_cast<double>(ds.size());
    return out;
  }

  const auto n_int = static_cast<std::size_t>(cfg.n_interactions);
  const std::size_t n_phi = n_int + 1;
  const std::size_t n_par = 2 * n_int + 3;
  std::vector<RotationAngle> rot(p.phis.begin(), p.phis.end());
  std::vector<RotationAngle> rot_plus, rot_minus;
  for (double phi : p.phis) {
    rot_plus.emplace_back(phi + h);
    rot_minus.emplace_back(phi - h);
  }
  std::vector<double> t_plus(n_int), t_minus(n_int);
  for (std::size_t i = 0; i < n_int; ++i) {
    const double u = inverse_softplus(p.times[i]);
    t_plus[i] = softplus(u + h);
    t_minus[i] = softplus(u - h);
  }

  std::vector<double> acc(n_par, 0.0);
  double cost = 0.0;
  std::vector<double> factors(n_int), shifted(n_int);
  auto sq = [&](double z, double y) {
    const double r = p.w0 + p.w1 * z - y;
    return r * r;
  };

  for (std::size_t s = 0; s < ds.size(); ++s) {
    const double x = ds.xs[s];
    const double y = ds.ys[s];
    for (std::size_t i = 0; i < n_int; ++i) factors[i] = channel_factor(cfg.kind, p.times[i], x);
    const double z = forward_from_factors(cfg.kind, rot, factors);
    const double r = p.w0 + p.w1 * z - y;
    cost += r * r;
    acc[n_par - 2] += 2.0 * r;
    acc[n_par - 1] += 2.0 * r * z;

    for (std::size_t j = 0; j < n_phi; ++j) {
      rot[j] = rot_plus[j];
      const double cp = sq(forward_from_factors(cfg.kind, rot, factors), y);
      rot[j] = rot_minus[j];
      const double cm = sq(forward_from_factors(cfg.kind, rot, factors), y);
      rot[j] = RotationAngle(p.phis[j]);
      acc[j] += (cp - cm) / (2.0 * h);
    }
    for (std::size_t j = 0; j < n_int; ++j) {
      shifted = factors;
      shifted[j] = channel_factor(cfg.kind, t_plus[j], x);
      const double cp = sq(forward_from_factors(cfg.kind, rot, shifted), y);
      shifted[j] = channel_factor(cfg.kind, t_minus[j], x);
      const double cm = sq(forward_from_factors(cfg.kind, rot, shifted), y);
      acc[n_phi + j] += (cp - cm) / (2.0 * h);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(ds.size());
  CostAndGradient out;
  out.cost = cost * inv_n;
  out.gradient.resize(n_par);
  for (std::size_t j = 0; j < n_par; ++j) out.gradient[j] = acc[j] * inv_n;
  return out;
}

inline std::vector<double> gradient(const VqcConfig& cfg, const VqcParams& p, const LabeledDataset& ds,
                                    double h = 1e-5) {
  return cost_and_gradient(cfg, p, ds, h).gradient;
}

// ---------------------------------------------------------------------------
// Adagrad

/// Per-parameter learning rates eta / sqrt(G_ii + eps), where G_ii is the
/// running sum of squared gradients of parameter i, starting from `initial`.
struct AdagradState {
  double eta = 0.05;
  double eps = 1e-8;
  std::vector<double> accumulated;
  double initial = 0.0;

  void step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != grad.size()) throw DimensionError("Adagrad parameter/gradient size mismatch");
    if (accumulated.empty()) accumulated.assign(params.size(), initial);
    if (accumulated.size() != params.size()) throw DimensionError("Adagrad state size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (grad[i] == 0.0) continue;
      accumulated[i] += grad[i] * grad[i];
      params[i] -= eta * grad[i] / std::sqrt(accumulated[i] + eps);
    }
  }
};

// ---------------------------------------------------------------------------
// Training

enum class ReadoutInit {
  LeastSquares,  // w0, w1 fitted to the initial circuit
  Identity,      // w0 = 0, w1 = 1
};

struct TrainHyper {
  double eta = 0.5;
  double eps = 1e-8;
  double h = 1e-5;
  int max_epochs = 20000;
  int restarts = 10;
  int patience = 200;
  std::uint64_t seed = 0;
  ReadoutInit readout_init = ReadoutInit::LeastSquares;
  double initial_accumulator = 0.01;  // starting value of every G_ii

  void validate() const {
    if (!(eta > 0.0) || !(eps >= 0.0) || !(h > 0.0)) throw ValidationError("eta and h must be positive, eps non-negative");
    if (!(initial_accumulator >= 0.0)) throw ValidationError("initial accumulator must be non-negative");
    if (max_epochs < 1 || restarts < 1 || patience < 1) throw ValidationError("epochs, restarts and patience must be >= 1");
  }
};

struct TrainReport {
  VqcParams best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> history;  // cost per epoch of the winning restart
  std::uint64_t seed = 0;
  int restart_index = -1;
  int epochs_used = 0;
  std::vector<double> restart_costs;  // best cost of every restart (inf if diverged)
};

/// phi_i ~ U[0, pi), t_i ~ U[0.5, 5], w0 = 0, w1 = 1.
inline VqcParams initial_params(const VqcConfig& cfg, std::mt19937_64& rng) {
  VqcParams p;
  for (int i = 0; i <= cfg.n_interactions; ++i) p.phis.push_back(uniform_in(rng, 0.0, std::numbers::pi));
  for (int i = 0; i < cfg.n_interactions; ++i) p.times.push_back(uniform_in(rng, 0.5, 5.0));
  p.w0 = 0.0;
  p.w1 = 1.0;
  return p;
}

/// Replaces w0, w1 by the least-squares readout for the current circuit. The
/// cost is quadratic in (w0, w1), so this is the exact minimiser over them.
inline VqcParams fit_readout(const VqcConfig& cfg, VqcParams p, const LabeledDataset& ds) {
  if (ds.size() == 0) throw ValidationError("cannot fit the readout on an empty dataset");
  const auto n = static_cast<double>(ds.size());
  double sz = 0.0, szz = 0.0, sy = 0.0, szy = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double z = forward(cfg, p, ds.xs[i]);
    sz += z;
    szz += z * z;
    sy += ds.ys[i];
    szy += z * ds.ys[i];
  }
  const double det = n * szz - sz * sz;
  if (std::abs(det) < 1e-12 * n * n) {
    // <sigma_z> constant over the dataset: only the offset is identifiable.
    p.w1 = 0.0;
    p.w0 = sy / n;
    return p;
  }
  p.w1 = (n * szy - sz * sy) / det;
  p.w0 = (sy - p.w1 * sz) / n;
  return p;
}

namespace detail {

struct RestartResult {
  VqcParams best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  int epochs = 0;
};

inline RestartResult train_once(const VqcConfig& cfg, const LabeledDataset& ds, const TrainHyper& hyper,
                                std::uint64_t restart) {
  std::mt19937_64 rng = stream_rng(hyper.seed, restart);
  VqcParams params = initial_params(cfg, rng);
  if (hyper.readout_init == ReadoutInit::LeastSquares) params = fit_readout(cfg, params, ds);
  std::vector<double> v = to_vector(params);
  AdagradState opt{hyper.eta, hyper.eps, {}, hyper.initial_accumulator};
  RestartResult res;
  res.history.reserve(static_cast<std::size_t>(hyper.max_epochs));
  std::vector<double> best_so_far;  // running minimum per epoch
  for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    params = from_vector(cfg, v);
    const CostAndGradient cg = cost_and_gradient(cfg, params, ds, hyper.h);
    bool finite = std::isfinite(cg.cost);
    for (double g : cg.gradient) finite = finite && std::isfinite(g);
    if (!finite) break;
    res.history.push_back(cg.cost);
    res.epochs = epoch + 1;
    if (cg.cost < res.best_cost) {
      res.best_cost = cg.cost;
      res.best = params;
    }
    best_so_far.push_back(res.best_cost);
    if (epoch >= hyper.patience && best_so_far[epoch - hyper.patience] - res.best_cost < 1e-10) break;
    opt.step(v, cg.gradient);
  }
  return res;
}

}  // namespace detail

/// Full-batch Adagrad from `restarts` independent initialisations; returns the
/// restart with the lowest cost. Restarts run data-parallel and are
/// individually seeded, so the report does not depend on the worker count.
inline TrainReport train(const VqcConfig& cfg, const LabeledDataset& ds, const TrainHyper& hyper) {
  cfg.validate();
  hyper.validate();
  if (ds.size() == 0) throw ValidationError("cannot train on an empty dataset");
  if (ds.kind != cfg.kind) throw ValidationError("dataset channel does not match the circuit channel");
  std::vector<detail::RestartResult> results(static_cast<std::size_t>(hyper.restarts));
  parallel_for(results.size(), [&](std::size_t r) {
    results[r] = detail::train_once(cfg, ds, hyper, r);
  });

  TrainReport report;
  report.seed = hyper.seed;
  for (std::size_t r = 0; r < results.size(); ++r) {
    report.restart_costs.push_back(results[r].best_cost);
    if (results[r].best_cost < report.best_cost) {
      report.best_cost = results[r].best_cost;
      report.restart_index = static_cast<int>(r);
    }
  }
  if (report.restart_index < 0) throw NumericalError("all training restarts diverged");
  auto& win = results[static_cast<std::size_t>(report.restart_index)];
  report.best = std::move(win.best);
  report.history = std::move(win.history);
  report.epochs_used = win.epochs;
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Evaluation {
  double mse = 0.0;
  std::vector<double> predictions;
  std::vector<double> residuals;  // prediction - label
};

inline Evaluation evaluate(const VqcConfig& cfg, const VqcParams& p, const LabeledDataset& ds) {
  if (ds.size() == 0) throw ValidationError("cannot evaluate on an empty dataset");
  Evaluation ev;
  ev.predictions.resize(ds.size());
  ev.residuals.resize(ds.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ev.predictions[i] = predict(cfg, p, ds.xs[i]);
    ev.residuals[i] = ev.predictions[i] - ds.ys[i];
    sum += ev.residuals[i] * ev.residuals[i];
  }
  ev.mse = sum / static_cast<double>(ds.size());
  return ev;
}

}  // namespace nmq
