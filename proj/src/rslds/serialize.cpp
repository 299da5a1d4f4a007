#include "serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rslds {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(j.size(), j[0].size());
  for (int i = 0; i < m.rows(); ++i)
    for (int c = 0; c < m.cols(); ++c) m(i, c) = j[i][c].get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (int i = 0; i < v.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

json model_to_json(const ModelParams& p) {
  json j;
  j["K"] = p.K;
  j["M"] = p.M;
  j["N"] = p.N;
  j["variant"] = variant_name(p.variant);
  j["emission_family"] =
      p.emission_family == EmissionFamily::Gaussian ? "gaussian" : "bernoulli";
  json A = json::array(), b = json::array(), Q = json::array();
  for (int k = 0; k < p.K; ++k) {
    A.push_back(matrix_to_json(p.A[k]));
    b.push_back(vector_to_json(p.b[k]));
    Q.push_back(matrix_to_json(p.Q[k]));
  }
  j["A"] = A;
  j["b"] = b;
  j["Q"] = Q;
  j["C"] = matrix_to_json(p.C);
  j["d"] = vector_to_json(p.d);
  j["S"] = matrix_to_json(p.S);
  if (!p.R.empty()) {
    json R = json::array(), r = json::array();
    for (const auto& m : p.R) R.push_back(matrix_to_json(m));
    for (const auto& v : p.r) r.push_back(vector_to_json(v));
    j["R"] = R;
    j["r"] = r;
  }
  if (p.pi.size() > 0) j["pi"] = matrix_to_json(p.pi);
  if (!p.stay.empty()) {
    json s = json::array();
    for (const auto& v : p.stay) s.push_back(vector_to_json(v));
    j["stay"] = s;
    j["pi_tilde"] = matrix_to_json(p.pi_tilde);
  }
  return j;
}

ModelParams model_from_json(const json& j) {
  ModelParams p;
  p.K = j.at("K").get<int>();
  p.M = j.at("M").get<int>();
  p.N = j.at("N").get<int>();
  p.variant = variant_from_name(j.at("variant").get<std::string>());
  p.emission_family = j.at("emission_family").get<std::string>() == "gaussian"
                          ? EmissionFamily::Gaussian
                          : EmissionFamily::Bernoulli;
  for (int k = 0; k < p.K; ++k) {
    p.A.push_back(matrix_from_json(j.at("A")[k]));
    p.b.push_back(vector_from_json(j.at("b")[k]));
    p.Q.push_back(matrix_from_json(j.at("Q")[k]));
  }
  p.C = matrix_from_json(j.at("C"));
  p.d = vector_from_json(j.at("d"));
  p.S = matrix_from_json(j.at("S"));
  if (j.contains("R")) {
    for (const auto& m : j.at("R")) p.R.push_back(matrix_from_json(m));
    for (const auto& v : j.at("r")) p.r.push_back(vector_from_json(v));
  }
  if (j.contains("pi")) p.pi = matrix_from_json(j.at("pi"));
  if (j.contains("stay")) {
    for (const auto& v : j.at("stay")) p.stay.push_back(vector_from_json(v));
    p.pi_tilde = matrix_from_json(j.at("pi_tilde"));
  }
  p.validate();
  return p;
}

json path_to_json(const LatentPath& path) {
  json j;
  json z = json::array();
  for (int zi : path.z) z.push_back(zi + 1);
  j["z"] = z;
  j["x"] = matrix_to_json(path.x);
  return j;
}

LatentPath path_from_json(const json& j) {
  LatentPath p;
  for (const auto& zi : j.at("z")) p.z.push_back(zi.get<int>() - 1);
  p.x = matrix_from_json(j.at("x"));
  return p;
}

void save_json(const json& j, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << j.dump(2) << "\n";
}

json load_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  json j;
  in >> j;
  return j;
}

void save_series_csv(const std::string& file, const LatentPath& path,
                     const Dataset& data) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(12);
  const int M = static_cast<int>(path.x.cols());
  out << "t,z";
  for (int m = 0; m < M; ++m) out << ",x" << (m + 1);
  for (int n = 0; n < data.N(); ++n) out << ",y" << (n + 1);
  out << ",mask\n";
  for (int t = 0; t < data.T(); ++t) {
    out << (t + 1) << "," << (t < path.T() ? path.z[t] + 1 : 0);
    for (int m = 0; m < M; ++m) out << "," << path.x(t, m);
    for (int n = 0; n < data.N(); ++n) out << "," << data.y(t, n);
    out << "," << (data.observed(t) ? 1 : 0) << "\n";
  }
}

void load_series_csv(const std::string& file, LatentPath* path, Dataset* data,
                     EmissionFamily family) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file);
  std::string header;
  std::getline(in, header);
  int M = 0, N = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind("x", 0) == 0 && col.size() > 1 && std::isdigit(col[1])) ++M;
      if (col.rfind("y", 0) == 0 && col.size() > 1 && std::isdigit(col[1])) ++N;
    }
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  const int T = static_cast<int>(rows.size());
  path->z.resize(T);
  path->x.resize(T, M);
  data->y.resize(T, N);
  data->mask.assign(T, true);
  data->emission_family = family;
  for (int t = 0; t < T; ++t) {
    path->z[t] = static_cast<int>(rows[t][1]) - 1;
    for (int m = 0; m < M; ++m) path->x(t, m) = rows[t][2 + m];
    for (int n = 0; n < N; ++n) data->y(t, n) = rows[t][2 + M + n];
    data->mask[t] = rows[t][2 + M + N] != 0.0;
  }
}

}  // namespace rslds
