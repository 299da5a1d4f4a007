#include "../include/rslds.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rslds/experiments.hpp"
#include "rslds/init_fit.hpp"
#include "rslds/model.hpp"
#include "rslds/serialize.hpp"

namespace {

thread_local std::string g_last_error = "no error";

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return RSLDS_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return RSLDS_ERR_USAGE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RSLDS_ERR_RUNTIME;
  }
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Emission family from the data: every value 0/1 means Bernoulli.
rslds::EmissionFamily infer_family(const Eigen::MatrixXd& y) {
  for (int t = 0; t < y.rows(); ++t)
    for (int n = 0; n < y.cols(); ++n)
      if (y(t, n) != 0.0 && y(t, n) != 1.0)
        return rslds::EmissionFamily::Gaussian;
  return rslds::EmissionFamily::Bernoulli;
}

void save_matrix_csv(const std::string& file, const Eigen::MatrixXd& m,
                     const std::string& prefix) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(12);
  out << "t";
  for (int j = 0; j < m.cols(); ++j) out << "," << prefix << (j + 1);
  out << "\n";
  for (int t = 0; t < m.rows(); ++t) {
    out << (t + 1);
    for (int j = 0; j < m.cols(); ++j) out << "," << m(t, j);
    out << "\n";
  }
}

Eigen::MatrixXd load_matrix_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;  // drop the t column
        continue;
      }
      row.push_back(std::stod(cell));
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(file + ": no data rows");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != std::size_t(m.cols()))
      throw std::runtime_error(file + ": ragged rows");
    for (int j = 0; j < m.cols(); ++j) m(t, j) = rows[t][j];
  }
  return m;
}

// posterior.csv: t, z (1-based argmax), x mean, optional rho mean.
void save_posterior_csv(const std::string& file, const rslds::FitResult& fit) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(12);
  out << "t,z";
  for (int m = 0; m < fit.x_mean.cols(); ++m) out << ",x" << (m + 1);
  for (int n = 0; n < fit.rho_mean.cols(); ++n) out << ",rho" << (n + 1);
  out << "\n";
  for (int t = 0; t < fit.x_mean.rows(); ++t) {
    out << (t + 1) << "," << (fit.z_mode[t] + 1);
    for (int m = 0; m < fit.x_mean.cols(); ++m) out << "," << fit.x_mean(t, m);
    for (int n = 0; n < fit.rho_mean.cols(); ++n)
      out << "," << fit.rho_mean(t, n);
    out << "\n";
  }
}

void load_posterior_csv(const std::string& file, rslds::FitResult* fit) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::string line;
  std::getline(in, line);
  int n_x = 0, n_rho = 0;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind("x", 0) == 0) ++n_x;
      if (col.rfind("rho", 0) == 0) ++n_rho;
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  const int T = static_cast<int>(rows.size());
  if (T == 0) throw std::runtime_error(file + ": no data rows");
  fit->z_mode.resize(T);
  fit->x_mean = Eigen::MatrixXd(T, n_x);
  fit->rho_mean = Eigen::MatrixXd(T, n_rho);
  for (int t = 0; t < T; ++t) {
    if (rows[t].size() != std::size_t(2 + n_x + n_rho))
      throw std::runtime_error(file + ": ragged rows");
    fit->z_mode[t] = static_cast<int>(rows[t][1]) - 1;
    for (int m = 0; m < n_x; ++m) fit->x_mean(t, m) = rows[t][2 + m];
    for (int n = 0; n < n_rho; ++n)
      fit->rho_mean(t, n) = rows[t][2 + n_x + n];
  }
}

void fit_one_chain(const rslds::Dataset& data, rslds::FitConfig cfg,
                   const std::string& dir) {
  std::filesystem::create_directories(dir);
  cfg.trace_file = dir + "/trace.csv";
  rslds::InitResult init =
      rslds::assemble_init(data, cfg.K, cfg.M, cfg.variant, cfg.family,
                           cfg.init_em_iters);
  rslds::save_json(rslds::init_to_json(init), dir + "/init.json");
  rslds::FitResult fit = rslds::fit_dataset(data, cfg, &init);
  rslds::save_json(rslds::model_to_json(fit.model), dir + "/model.json");
  save_posterior_csv(dir + "/posterior.csv", fit);
}

}  // namespace

extern "C" {

const char* rslds_last_error(void) { return g_last_error.c_str(); }

struct rslds_model {
  rslds::ModelParams params;
};

int rslds_model_load(const char* path, rslds_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "model_load: null argument");
    auto* m = new rslds_model{rslds::model_from_json(rslds::load_json(path))};
    m->params.validate();
    *out = m;
  });
}

int rslds_model_free(rslds_model* model) {
  return guarded([&] { delete model; });
}

int rslds_model_info(const rslds_model* model, int* K, int* M, int* N) {
  return guarded([&] {
    require(model != nullptr, "model_info: null model");
    if (K) *K = model->params.K;
    if (M) *M = model->params.M;
    if (N) *N = model->params.N;
  });
}

int rslds_model_simulate(const rslds_model* model, int T,
                         unsigned long long seed, const char* out_csv) {
  return guarded([&] {
    require(model != nullptr && out_csv != nullptr,
            "model_simulate: null argument");
    require(T >= 1, "model_simulate: T must be positive");
    rslds::RandomStream rng(seed);
    auto [path, data] = rslds::simulate(model->params, T, rng);
    rslds::save_series_csv(out_csv, path, data);
  });
}

int rslds_generate_data(const char* generator, int T, unsigned long long seed,
                        int mask_start, int mask_end, const char* out_dir) {
  return guarded([&] {
    require(generator != nullptr && out_dir != nullptr,
            "generate_data: null argument");
    require(T >= 1, "generate_data: T must be positive");
    require(0 <= mask_start && mask_start <= mask_end && mask_end <= T,
            "generate_data: mask interval outside [0, T]");
    std::string gen(generator);
    std::filesystem::create_directories(out_dir);
    std::string dir(out_dir);
    if (gen == "nascar") {
      rslds::NascarTruth truth = rslds::gen_nascar(T, seed);
      if (mask_end > mask_start) {
        truth.data.mask.assign(T, true);
        for (int t = mask_start; t < mask_end; ++t)
          truth.data.mask[t] = false;
      }
      rslds::save_series_csv(dir + "/data.csv", truth.path, truth.data);
      rslds::save_json(rslds::model_to_json(truth.params),
                       dir + "/model.json");
    } else if (gen == "lorenz-bernoulli") {
      rslds::LorenzTruth truth =
          rslds::gen_lorenz(T, mask_start, mask_end, seed);
      rslds::LatentPath path;
      path.z = truth.z;
      path.x = truth.x;
      rslds::save_series_csv(dir + "/data.csv", path, truth.data);
      save_matrix_csv(dir + "/rho.csv", truth.rho, "rho");
    } else {
      throw std::invalid_argument("generate_data: unknown generator '" + gen +
                                  "'");
    }
  });
}

int rslds_fit(const char* data_csv, const char* model_name,
              const char* inference, int K, int M, int n_iters, int n_chains,
              unsigned long long seed, const char* out_dir) {
  return guarded([&] {
    require(data_csv != nullptr && model_name != nullptr &&
                inference != nullptr && out_dir != nullptr,
            "fit: null argument");
    require(K >= 1 && n_iters >= 1, "fit: K and iteration count must be >= 1");
    require(n_chains >= 1, "fit: n_chains must be >= 1");
    std::string inf(inference);
    require(inf == "gibbs" || inf == "svi",
            "fit: inference must be 'gibbs' or 'svi'");

    rslds::Dataset data;
    rslds::LatentPath ignored;
    rslds::load_series_csv(data_csv, &ignored, &data,
                           rslds::EmissionFamily::Gaussian);
    data.emission_family = infer_family(data.y);

    rslds::FitConfig cfg;
    cfg.K = K;
    cfg.variant = rslds::variant_from_name(model_name);
    cfg.family = data.emission_family;
    cfg.inference = inf;
    cfg.n_iters = n_iters;
    cfg.M = cfg.variant == rslds::VariantTag::RecurrentARHMM ? data.N() : M;
    require(cfg.M >= 1, "fit: M must be >= 1");

    std::filesystem::create_directories(out_dir);
    std::vector<std::thread> workers;
    std::vector<std::string> errors(n_chains);
    for (int c = 0; c < n_chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          rslds::FitConfig chain_cfg = cfg;
          chain_cfg.seed = seed + c;
          fit_one_chain(data, chain_cfg,
                        std::string(out_dir) + "/chain" + std::to_string(c));
        } catch (const std::exception& e) {
          errors[c] = e.what();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (const auto& err : errors)
      if (!err.empty()) throw std::runtime_error(err);
  });
}

int rslds_evaluate(const char* fit_dir, const char* truth_dir,
                   const char* out_json) {
  return guarded([&] {
    require(fit_dir != nullptr && truth_dir != nullptr && out_json != nullptr,
            "evaluate: null argument");
    std::string fd(fit_dir), td(truth_dir);

    rslds::Dataset truth_data;
    rslds::LatentPath truth_path;
    rslds::load_series_csv(td + "/data.csv", &truth_path, &truth_data,
                           rslds::EmissionFamily::Gaussian);

    rslds::FitResult fit;
    load_posterior_csv(fd + "/posterior.csv", &fit);
    rslds::ModelParams model =
        rslds::model_from_json(rslds::load_json(fd + "/model.json"));
    fit.model = model;
    const int T = static_cast<int>(fit.x_mean.rows());
    require(T == truth_data.T(), "evaluate: fit and truth lengths differ");
    fit.z_prob = Eigen::MatrixXd::Zero(T, model.K);
    for (int t = 0; t < T; ++t) fit.z_prob(t, fit.z_mode[t]) = 1.0;

    nlohmann::json metrics =
        rslds::evaluate_fit(fit, truth_path.z, truth_path.x);
    if (std::filesystem::exists(td + "/rho.csv") && fit.rho_mean.cols() > 0) {
      Eigen::MatrixXd rho_true = load_matrix_csv(td + "/rho.csv");
      int a = -1, b = -1;
      for (int t = 0; t < T; ++t)
        if (!truth_data.observed(t)) {
          if (a < 0) a = t;
          b = t + 1;
        }
      if (a >= 0)
        metrics["masked_calibration_error"] =
            rslds::calibration_error(fit.rho_mean, rho_true, a, b, 0);
    }
    rslds::save_json(metrics, out_json);
  });
}

int rslds_geweke_test(int n_samples, unsigned long long seed,
                      const char* out_json) {
  return guarded([&] {
    require(out_json != nullptr, "geweke_test: null output path");
    require(n_samples >= 1, "geweke_test: n_samples must be positive");
    rslds::save_json(rslds::geweke_report(n_samples, seed), out_json);
  });
}

}  // extern "C"
