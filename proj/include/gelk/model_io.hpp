#pragma once

#include <string>

#include <json.hpp>

#include "gelk/core.hpp"

namespace gelk {

/// A system together with its initial measure.
struct Model {
  BilinearSystem system;
  AtomicMeasure measure;
};

/// Parses {"n", "m", "A_plus", "A_par", "names"?, "atoms": [{"pi0", "plus", "par", "w"}]}.
/// Throws SchemaError (with a JSON pointer in the message) or InvalidModel.
Model model_from_json(const nlohmann::json& doc, const std::string& pointer = "");
Model load_model_file(const std::string& path);
nlohmann::json model_to_json(const Model& model);

/// Bundled examples: "multiplicative", "two-atom", "kac-gaussian".
Model builtin_model(const std::string& name);
/// Resolves "builtin:<name>" or a path to a model document.
Model resolve_model(const std::string& spec);

Model multiplicative_monodisperse();
/// Masses {1, 2} with weight 1/2 each under the multiplicative kernel.
Model two_atom_multiplicative();
/// Kac-type system (count, energy | momentum) with velocities on a tensor
/// Gauss-Hermite grid whose moments through degree 9 match a standard
/// 3-d Gaussian. `points` must be 3 or 5.
Model kac_gaussian(int points = 5);
/// Kac-type system with caller-supplied velocities of equal weight 1/size.
Model kac_from_velocities(const std::vector<Eigen::Vector3d>& velocities);

}  // namespace gelk
