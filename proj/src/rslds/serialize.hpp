#pragma once

#include <string>

#include <json.hpp>

#include "model.hpp"

namespace rslds {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

// Self-describing document; field names mirror the model symbols
// ("A", "b", "Q", "C", "d", "S", "R", "r", "pi", "variant", "K", "M", "N").
nlohmann::json model_to_json(const ModelParams& params);
ModelParams model_from_json(const nlohmann::json& j);

// z serialized 1-based.
nlohmann::json path_to_json(const LatentPath& path);
LatentPath path_from_json(const nlohmann::json& j);

void save_json(const nlohmann::json& j, const std::string& file);
nlohmann::json load_json(const std::string& file);

// Time-series CSV: t, z, x1..xM, y1..yN, mask.
void save_series_csv(const std::string& file, const LatentPath& path,
                     const Dataset& data);
// Reads a CSV produced by save_series_csv.
void load_series_csv(const std::string& file, LatentPath* path, Dataset* data,
                     EmissionFamily family);

}  // namespace rslds
