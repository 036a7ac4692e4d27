#include "gelk/model_io.hpp"

#include <cmath>
#include <fstream>

#include "gelk/error.hpp"

namespace gelk {

using nlohmann::json;

namespace {

[[noreturn]] void schema_fail(const std::string& pointer, const std::string& what) {
  throw SchemaError((pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

const json& require(const json& doc, const std::string& key, const std::string& pointer) {
  if (!doc.is_object()) schema_fail(pointer, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) schema_fail(pointer + "/" + key, "missing required field");
  return *it;
}

Matrix parse_matrix(const json& doc, int size, const std::string& pointer) {
  Matrix out(size, size);
  if (size == 0) {
    if (!doc.is_array() || !doc.empty()) {
      if (!(doc.is_array() && doc.size() == 1 && doc[0].is_array() && doc[0].empty())) {
        schema_fail(pointer, "expected an empty matrix");
      }
    }
    return out;
  }
  if (!doc.is_array() || static_cast<int>(doc.size()) != size) {
    schema_fail(pointer, "expected " + std::to_string(size) + " rows");
  }
  for (int i = 0; i < size; ++i) {
    const json& row = doc[i];
    const std::string rp = pointer + "/" + std::to_string(i);
    if (!row.is_array() || static_cast<int>(row.size()) != size) {
      schema_fail(rp, "expected " + std::to_string(size) + " columns");
    }
    for (int j = 0; j < size; ++j) {
      if (!row[j].is_number()) schema_fail(rp + "/" + std::to_string(j), "expected a number");
      out(i, j) = row[j].get<double>();
    }
  }
  return out;
}

Vector parse_vector(const json& doc, int size, const std::string& pointer) {
  if (!doc.is_array() || static_cast<int>(doc.size()) != size) {
    schema_fail(pointer, "expected an array of length " + std::to_string(size));
  }
  Vector out(size);
  for (int i = 0; i < size; ++i) {
    if (!doc[i].is_number()) schema_fail(pointer + "/" + std::to_string(i), "expected a number");
    out[i] = doc[i].get<double>();
  }
  return out;
}

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

Model model_from_json(const json& doc, const std::string& pointer) {
  const json& jn = require(doc, "n", pointer);
  if (!jn.is_number_integer() || jn.get<int>() < 1) schema_fail(pointer + "/n", "expected a positive integer");
  const int n = jn.get<int>();
  int m = 0;
  if (doc.contains("m")) {
    if (!doc["m"].is_number_integer() || doc["m"].get<int>() < 0) {
      schema_fail(pointer + "/m", "expected a nonnegative integer");
    }
    m = doc["m"].get<int>();
  }
  Matrix a_plus = parse_matrix(require(doc, "A_plus", pointer), n, pointer + "/A_plus");
  Matrix a_par(m, m);
  if (m > 0 || doc.contains("A_par")) {
    a_par = parse_matrix(require(doc, "A_par", pointer), m, pointer + "/A_par");
  }
  std::vector<std::string> names;
  if (doc.contains("names")) {
    const json& jnames = doc["names"];
    if (!jnames.is_array()) schema_fail(pointer + "/names", "expected an array of strings");
    for (std::size_t k = 0; k < jnames.size(); ++k) {
      if (!jnames[k].is_string()) schema_fail(pointer + "/names/" + std::to_string(k), "expected a string");
      names.push_back(jnames[k].get<std::string>());
    }
  }
  BilinearSystem system(std::move(a_plus), std::move(a_par), std::move(names));

  const json& jatoms = require(doc, "atoms", pointer);
  if (!jatoms.is_array()) schema_fail(pointer + "/atoms", "expected an array");
  std::vector<Atom> atoms;
  for (std::size_t k = 0; k < jatoms.size(); ++k) {
    const std::string ap = pointer + "/atoms/" + std::to_string(k);
    const json& ja = jatoms[k];
    Atom atom;
    atom.x.pi0 = 1;
    if (ja.contains("pi0")) {
      if (!ja["pi0"].is_number_integer()) schema_fail(ap + "/pi0", "expected an integer");
      atom.x.pi0 = ja["pi0"].get<std::int64_t>();
    }
    atom.x.plus = parse_vector(require(ja, "plus", ap), n, ap + "/plus");
    atom.x.par = m > 0 ? parse_vector(require(ja, "par", ap), m, ap + "/par") : Vector(0);
    const json& jw = require(ja, "w", ap);
    if (!jw.is_number()) schema_fail(ap + "/w", "expected a number");
    atom.w = jw.get<double>();
    atoms.push_back(std::move(atom));
  }
  const bool initial = doc.value("initial", true);
  AtomicMeasure measure(n, m, std::move(atoms), initial);
  if (measure.empty()) schema_fail(pointer + "/atoms", "at least one atom required");
  return Model{std::move(system), std::move(measure)};
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return model_from_json(doc);
}

json model_to_json(const Model& model) {
  const BilinearSystem& sys = model.system;
  json doc;
  doc["n"] = sys.n();
  doc["m"] = sys.m();
  doc["names"] = sys.names();
  doc["A_plus"] = matrix_json(sys.a_plus());
  doc["A_par"] = matrix_json(sys.a_par());
  json atoms = json::array();
  for (const Atom& a : model.measure.atoms()) {
    json ja;
    ja["pi0"] = a.x.pi0;
    ja["plus"] = vector_json(a.x.plus);
    ja["par"] = vector_json(a.x.par);
    ja["w"] = a.w;
    atoms.push_back(ja);
  }
  doc["atoms"] = atoms;
  return doc;
}

Model multiplicative_monodisperse() {
  BilinearSystem sys(Matrix::Constant(1, 1, 1.0), Matrix(0, 0), {"pi0", "mass"});
  std::vector<Atom> atoms{{TypeVector{1, Vector::Constant(1, 1.0), Vector(0)}, 1.0}};
  return Model{sys, AtomicMeasure(1, 0, std::move(atoms))};
}

Model two_atom_multiplicative() {
  BilinearSystem sys(Matrix::Constant(1, 1, 1.0), Matrix(0, 0), {"pi0", "mass"});
  std::vector<Atom> atoms{{TypeVector{1, Vector::Constant(1, 1.0), Vector(0)}, 0.5},
                          {TypeVector{1, Vector::Constant(1, 2.0), Vector(0)}, 0.5}};
  return Model{sys, AtomicMeasure(1, 0, std::move(atoms))};
}

namespace {

BilinearSystem kac_system() {
  Matrix a_plus(2, 2);
  a_plus << 0.0, 1.0, 1.0, 0.0;
  Matrix a_par = -2.0 * Matrix::Identity(3, 3);
  return BilinearSystem(a_plus, a_par, {"pi0", "count", "energy", "px", "py", "pz"});
}

TypeVector kac_particle(const Eigen::Vector3d& v) {
  TypeVector x;
  x.pi0 = 1;
  x.plus = Vector(2);
  x.plus << 1.0, v.squaredNorm();
  x.par = v;
  return x;
}

}  // namespace

Model kac_gaussian(int points) {
  std::vector<double> nodes;
  std::vector<double> weights;
  if (points == 3) {
    const double r = std::sqrt(3.0);
    nodes = {-r, 0.0, r};
    weights = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  } else if (points == 5) {
    const double s10 = std::sqrt(10.0);
    const double inner = std::sqrt(5.0 - s10);
    const double outer = std::sqrt(5.0 + s10);
    nodes = {-outer, -inner, 0.0, inner, outer};
    weights = {(7.0 - 2.0 * s10) / 60.0, (7.0 + 2.0 * s10) / 60.0, 8.0 / 15.0,
               (7.0 + 2.0 * s10) / 60.0, (7.0 - 2.0 * s10) / 60.0};
  } else {
    throw InvalidArgument("kac_gaussian supports 3 or 5 points per axis");
  }
  std::vector<Atom> atoms;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = 0; b < nodes.size(); ++b) {
      for (std::size_t c = 0; c < nodes.size(); ++c) {
        const Eigen::Vector3d v(nodes[a], nodes[b], nodes[c]);
        atoms.push_back(Atom{kac_particle(v), weights[a] * weights[b] * weights[c]});
      }
    }
  }
  return Model{kac_system(), AtomicMeasure(2, 3, std::move(atoms))};
}

Model kac_from_velocities(const std::vector<Eigen::Vector3d>& velocities) {
  std::vector<Atom> atoms;
  const double w = 1.0 / static_cast<double>(velocities.size());
  for (const auto& v : velocities) atoms.push_back(Atom{kac_particle(v), w});
  return Model{kac_system(), AtomicMeasure(2, 3, std::move(atoms))};
}

Model builtin_model(const std::string& name) {
  if (name == "multiplicative") return multiplicative_monodisperse();
  if (name == "two-atom") return two_atom_multiplicative();
  if (name == "kac-gaussian") return kac_gaussian(5);
  if (name == "kac-gaussian-3") return kac_gaussian(3);
  throw InvalidArgument("unknown builtin model '" + name + "'");
}

Model resolve_model(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) return builtin_model(spec.substr(prefix.size()));
  return load_model_file(spec);
}

}  // namespace gelk
