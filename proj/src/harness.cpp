#include "rjfr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace rjfr {

namespace {

constexpr std::uint64_t kRepTag = 0x726570;
constexpr std::uint64_t kDataTag = 0x64617461;
constexpr std::uint64_t kSamplerTag = 0x73616d70;
constexpr std::uint64_t kPredTag = 0x70726564;
constexpr std::uint64_t kPlotTag = 0x706c6f74;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

}  // namespace

ScaledSplit scale_fit_apply(const FunctionalDataset& train, const FunctionalDataset& test,
                            Problem problem) {
  if (train.n() < 2) throw std::invalid_argument("scale_fit_apply: degenerate training set");
  ScaledSplit out;
  out.train = train;
  out.test = test;
  out.scaling.target_sd = problem == Problem::Linear ? 1.0 : 0.5;

  const Eigen::Index m = train.X.cols();
  out.scaling.column_scale.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double mean = train.X.col(j).mean();
    const double var = (train.X.col(j).array() - mean).square().mean();
    if (var > 0.0) {
      out.scaling.column_scale[j] = out.scaling.target_sd / std::sqrt(var);
    } else {
      std::cerr << "scale_fit_apply: zero-variance regressor column " << j
                << ", leaving it unscaled\n";
      out.scaling.column_scale[j] = 1.0;
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    out.train.X.col(j) *= out.scaling.column_scale[j];
    if (out.test.X.rows() > 0) out.test.X.col(j) *= out.scaling.column_scale[j];
  }

  if (problem == Problem::Linear) {
    const double mean = train.y.mean();
    const double var = (train.y.array() - mean).square().mean();
    if (!(var > 0.0)) throw std::invalid_argument("scale_fit_apply: zero-variance response");
    out.scaling.response_scale = 1.0 / std::sqrt(var);
    out.train.y *= out.scaling.response_scale;
    if (out.test.y.size() > 0) out.test.y *= out.scaling.response_scale;
  }
  return out;
}

FunctionalDataset load_csv_dataset(const std::string& path, Problem problem) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  auto parse_error = [&](int line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  if (!std::getline(in, line)) parse_error(1, "missing header row");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  if (header.size() < 2 || header[0] != "y")
    parse_error(1, "header must be 'y,t_1,...,t_m'");
  const std::size_t m = header.size() - 1;

  Grid grid;
  grid.points.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    try {
      grid.points[j] = std::stod(header[j + 1]);
    } catch (const std::exception&) {
      parse_error(1, "grid value '" + header[j + 1] + "' is not numeric");
    }
    if (j > 0 && grid.points[j] <= grid.points[j - 1])
      parse_error(1, "grid values must be strictly increasing");
  }
  // affine normalization to [0, 1]
  const double lo = grid.points.front(), hi = grid.points.back();
  if (!(hi > lo)) parse_error(1, "degenerate grid span");
  for (auto& t : grid.points) t = (t - lo) / (hi - lo);
  grid.points.front() = 0.0;
  grid.points.back() = 1.0;

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        parse_error(line_no, "value '" + tok + "' is not numeric");
      }
    }
    if (vals.size() != m + 1)
      parse_error(line_no, "expected " + std::to_string(m + 1) + " fields, got " +
                               std::to_string(vals.size()));
    if (problem == Problem::Logistic && vals[0] != 0.0 && vals[0] != 1.0)
      parse_error(line_no, "logistic response must be 0 or 1");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) parse_error(line_no, "no data rows");

  FunctionalDataset ds;
  ds.grid = grid;
  ds.problem = problem;
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  ds.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.y[static_cast<Eigen::Index>(i)] = rows[i][0];
    for (std::size_t j = 0; j < m; ++j)
      ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j + 1];
  }
  ds.validate();
  return ds;
}

void save_csv_dataset(const FunctionalDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << "y";
  for (double t : dataset.grid.points) out << "," << format_double(t);
  out << "\n";
  for (Eigen::Index i = 0; i < dataset.n(); ++i) {
    out << format_double(dataset.y[i]);
    for (Eigen::Index j = 0; j < dataset.X.cols(); ++j)
      out << "," << format_double(dataset.X(i, j));
    out << "\n";
  }
}

std::uint64_t repetition_seed(std::uint64_t master_seed, int rep) {
  return mix_seed(master_seed, kRepTag, static_cast<std::uint64_t>(rep));
}

namespace {

struct RepData {
  FunctionalDataset train;
  FunctionalDataset test;
};

RepData make_rep_data(const ExperimentConfig& cfg, std::uint64_t rep_seed,
                      const FunctionalDataset* external) {
  RepData out;
  RngStream data_rng(rep_seed, kDataTag);
  if (external) {
    // 66/33 split with a per-repetition permutation
    const Eigen::Index n = external->n();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), data_rng.engine());
    const Eigen::Index n_train = (2 * n + 2) / 3;
    auto take = [&](Eigen::Index from, Eigen::Index count) {
      FunctionalDataset d;
      d.grid = external->grid;
      d.problem = external->problem;
      d.X.resize(count, external->X.cols());
      d.y.resize(count);
      for (Eigen::Index i = 0; i < count; ++i) {
        d.X.row(i) = external->X.row(idx[static_cast<std::size_t>(from + i)]);
        d.y[i] = external->y[idx[static_cast<std::size_t>(from + i)]];
      }
      return d;
    };
    out.train = take(0, n_train);
    out.test = take(n_train, n - n_train);
    return out;
  }

  Grid grid = Grid::equispaced(cfg.grid_size);
  ScenarioSpec spec = cfg.scenario;
  spec.problem = cfg.problem;
  spec.n = static_cast<std::size_t>(cfg.n_train + cfg.n_test);
  FunctionalDataset all = generate_dataset(spec, grid, data_rng);
  out.train.grid = grid;
  out.train.problem = all.problem;
  out.train.X = all.X.topRows(cfg.n_train);
  out.train.y = all.y.head(cfg.n_train);
  out.test.grid = grid;
  out.test.problem = all.problem;
  out.test.X = all.X.bottomRows(cfg.n_test);
  out.test.y = all.y.tail(cfg.n_test);
  return out;
}

bool method_is_map(const std::string& m) { return m == "map-pp" || m == "map-vs"; }
bool method_is_pp(const std::string& m) { return m == "w-pp" || m == "map-pp"; }

RepetitionOutcome run_one_rep(const ExperimentConfig& cfg, int rep,
                              const FunctionalDataset* external) {
  RepetitionOutcome out;
  out.rep = rep;
  const std::uint64_t rep_seed = repetition_seed(cfg.master_seed, rep);
  try {
    const ModelKind kind = cfg.kind();
    RepData data = make_rep_data(cfg, rep_seed, external);
    ScaledSplit scaled = scale_fit_apply(data.train, data.test, cfg.problem);

    SamplerConfig scfg = cfg.sampler;
    scfg.seed = mix_seed(rep_seed, kSamplerTag);
    ChainStore chains = run_sampler(scaled.train, cfg.prior, kind, scfg);
    RelabeledChains rel = relabel(chains);
    out.diag = diagnostics(chains, kind, cfg.prior.p_max);
    out.p_post = out.diag.p_post;

    const std::string metric_name = cfg.problem == Problem::Linear ? "rmse" : "accuracy";
    for (const auto& method : cfg.methods) {
      for (std::size_t gi = 0; gi < cfg.summaries.size(); ++gi) {
        const SummaryStat& g = cfg.summaries[gi];
        Eigen::VectorXd preds;
        if (method_is_pp(method)) {
          // identically seeded per summary, so w-pp and map-pp share draws
          RngStream pred_rng(rep_seed, kPredTag, gi);
          preds = predict_pp_batch(rel, scaled.test, g, kind, method_is_map(method), pred_rng);
        } else {
          preds = predict_vs_batch(rel, scaled.train, scaled.test, g, kind,
                                   method_is_map(method));
        }
        double value = 0.0;
        if (cfg.problem == Problem::Linear) {
          Eigen::VectorXd orig(preds.size());
          for (Eigen::Index i = 0; i < preds.size(); ++i)
            orig[i] = scaled.scaling.to_original_response(preds[i]);
          value = metrics(data.test.y, orig, kind);
        } else {
          value = metrics(data.test.y, threshold_labels(preds), kind);
        }
        out.rows.push_back({cfg.dataset_label, method, g.name(), rep, rep_seed, metric_name,
                            value});
      }
    }

    if (cfg.emit_plots && rep == 0 && !cfg.out_path.empty()) {
      RngStream plot_rng(rep_seed, kPlotTag);
      emit_plot_data(rel, out.diag, scaled.train, kind, plot_rng,
                     cfg.out_path + "/plotdata");
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (cfg.summaries.empty()) throw std::invalid_argument("no summary statistics requested");

  FunctionalDataset external;
  const FunctionalDataset* external_ptr = nullptr;
  if (!cfg.csv_path.empty()) {
    external = load_csv_dataset(cfg.csv_path, cfg.problem);
    external_ptr = &external;
  }

  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cfg.reps));

  ExperimentResult result;
  result.reps.resize(static_cast<std::size_t>(cfg.reps));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= cfg.reps) break;
      result.reps[static_cast<std::size_t>(r)] = run_one_rep(cfg, r, external_ptr);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& rep : result.reps) {
    if (rep.failed) {
      ++result.failures;
      std::cerr << "repetition " << rep.rep << " failed: " << rep.error << "\n";
      continue;
    }
    for (const auto& row : rep.rows) result.rows.push_back(row);
  }

  // mean / sd summary rows per (method, summary), matching the paper-table style
  const std::string metric_name = cfg.problem == Problem::Linear ? "rmse" : "accuracy";
  for (const auto& method : cfg.methods) {
    for (const auto& g : cfg.summaries) {
      std::vector<double> vals;
      for (const auto& row : result.rows)
        if (row.rep >= 0 && row.method == method && row.summary == g.name())
          vals.push_back(row.value);
      if (vals.empty()) continue;
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double sd = 0.0;
      if (vals.size() > 1) {
        for (double v : vals) sd += (v - mean) * (v - mean);
        sd = std::sqrt(sd / static_cast<double>(vals.size() - 1));
      }
      result.rows.push_back({cfg.dataset_label, method, g.name(), -1, cfg.master_seed,
                             metric_name + "_mean", mean});
      result.rows.push_back({cfg.dataset_label, method, g.name(), -1, cfg.master_seed,
                             metric_name + "_sd", sd});
    }
  }

  if (!cfg.out_path.empty()) {
    std::filesystem::create_directories(cfg.out_path);
    write_file(cfg.out_path + "/results.csv", results_to_csv(result.rows));
    std::ostringstream diag;
    for (const auto& rep : result.reps) {
      if (rep.failed) continue;
      diag << "# repetition " << rep.rep << "\n" << rep.diag.to_csv();
    }
    write_file(cfg.out_path + "/diagnostics.csv", diag.str());
  }
  return result;
}

std::string results_to_csv(const std::vector<ResultsRow>& rows) {
  std::ostringstream os;
  os << "dataset,method,summary,rep,seed,metric,value\n";
  for (const auto& r : rows)
    os << r.dataset << "," << r.method << "," << r.summary << "," << r.rep << "," << r.seed
       << "," << r.metric << "," << format_double(r.value) << "\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << content;
}

void emit_plot_data(const RelabeledChains& chains, const DiagnosticsReport& diag,
                    const FunctionalDataset& train, ModelKind kind, RngStream& rng,
                    const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const ChainStore& cs = chains.samples;

  {
    std::ostringstream os;
    os << "iter,walker,p,comp,beta,tau,alpha0,log_sigma\n";
    for (const auto& s : cs.samples)
      for (int j = 0; j < s.theta.p(); ++j)
        os << s.iter << "," << s.walker << "," << s.theta.p() << "," << j << ","
           << format_double(s.theta.beta[j]) << "," << format_double(s.theta.tau[j]) << ","
           << format_double(s.theta.alpha0) << "," << format_double(s.theta.log_sigma) << "\n";
    write_file(out_dir + "/flat_samples.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "iter,walker,p\n";
    for (int it = 0; it < cs.n_iters; ++it)
      for (int w = 0; w < cs.n_walkers; ++w)
        os << it << "," << w << "," << static_cast<int>(cs.p_at(it, 0, w)) << "\n";
    write_file(out_dir + "/p_trace.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "temp,inv_temp,p,frequency\n";
    for (std::size_t t = 0; t < diag.tempered_p_hist.size(); ++t)
      for (std::size_t p = 0; p < diag.tempered_p_hist[t].size(); ++p)
        os << t << "," << format_double(diag.inv_temps[t]) << "," << (p + 1) << ","
           << format_double(diag.tempered_p_hist[t][p]) << "\n";
    write_file(out_dir + "/tempered_p_hist.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "iter,walker,p,comp,tau\n";
    for (const auto& s : cs.samples)
      for (int j = 0; j < s.theta.p(); ++j)
        os << s.iter << "," << s.walker << "," << s.theta.p() << "," << j << ","
           << format_double(s.theta.tau[j]) << "\n";
    write_file(out_dir + "/tau_posterior.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "sample,row,value\n";
    if (!cs.samples.empty() && train.n() > 0) {
      const int stride =
          std::max<int>(1, static_cast<int>(cs.samples.size() / 500));
      const Eigen::MatrixXd pp = posterior_predictive(cs, train, kind, rng, stride);
      for (Eigen::Index s = 0; s < pp.rows(); ++s)
        for (Eigen::Index r = 0; r < pp.cols(); ++r)
          os << s << "," << r << "," << format_double(pp(s, r)) << "\n";
      for (Eigen::Index r = 0; r < train.n(); ++r)
        os << -1 << "," << r << "," << format_double(train.y[r]) << "\n";
    }
    write_file(out_dir + "/pp_draws.csv", os.str());
  }
  write_file(out_dir + "/diagnostics.csv", diag.to_csv());
}

}  // namespace rjfr
