#include "geoavg/serialize.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "geoavg/errors.hpp"

namespace geoavg {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

VectorXd vector_from_json(const json& arr) {
  VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Index>(i)) = arr[i];
  return v;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const json& rows) {
  if (rows.empty()) return MatrixXd();
  MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::invalid_argument("ragged matrix in JSON");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace

json instance_to_json(const ProblemInstance& instance) {
  json j;
  j["dim"] = instance.dim();
  j["spectrum"] = vector_to_json(instance.sigma.eigenvalues());
  j["w_star"] = vector_to_json(instance.w_star);
  j["noise_sigma"] = instance.noise_sigma;
  j["covariate_law"] = to_string(instance.covariate_law);
  if (instance.basis_seed)
    j["seed"] = *instance.basis_seed;
  else if (!instance.sigma.has_identity_basis())
    j["basis"] = matrix_to_json(instance.sigma.basis());
  return j;
}

ProblemInstance instance_from_json(const json& j) {
  const Index dim = j.at("dim").get<Index>();
  VectorXd spectrum = vector_from_json(j.at("spectrum"));
  VectorXd w_star = vector_from_json(j.at("w_star"));
  const double noise_sigma = j.value("noise_sigma", 0.0);
  const CovariateLaw law =
      covariate_law_from_string(j.value("covariate_law", std::string("gaussian")));
  if (j.contains("seed"))
    return make_instance(dim, std::move(spectrum), std::move(w_star), noise_sigma,
                         law, j.at("seed").get<std::uint64_t>());
  if (j.contains("basis")) {
    ProblemInstance instance{
        SpectralCovariance(std::move(spectrum), matrix_from_json(j.at("basis"))),
        std::move(w_star), noise_sigma, law, std::nullopt};
    if (instance.dim() != dim) throw std::invalid_argument("dim/basis mismatch");
    return instance;
  }
  return make_instance(dim, std::move(spectrum), std::move(w_star), noise_sigma, law);
}

json sgd_config_to_json(const SgdConfig& config) {
  json j;
  j["eta"] = config.eta;
  j["lambda"] = config.lambda;
  j["mode"] = to_string(config.mode);
  if (config.w0.size() != 0) j["w0"] = vector_to_json(config.w0);
  return j;
}

SgdConfig sgd_config_from_json(const json& j) {
  SgdConfig config;
  config.eta = j.at("eta").get<double>();
  config.lambda = j.value("lambda", 0.0);
  config.mode = sgd_mode_from_string(j.value("mode", std::string("plain")));
  if (j.contains("w0")) config.w0 = vector_from_json(j.at("w0"));
  return config;
}

json scheme_to_json(const AveragingScheme& scheme) {
  json j;
  j["kind"] = to_string(scheme.kind);
  if (scheme.kind == AveragingScheme::Kind::geometric) j["rho"] = scheme.rho;
  if (scheme.kind == AveragingScheme::Kind::tail) j["tau"] = scheme.tau;
  return j;
}

AveragingScheme scheme_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return AveragingScheme::uniform();
  if (kind == "geometric") return AveragingScheme::geometric(j.at("rho").get<double>());
  if (kind == "tail") return AveragingScheme::tail(j.at("tau").get<Index>());
  throw std::invalid_argument("unknown averaging scheme kind: " + kind);
}

json partial_sum_to_json(const PartialGeometricSum& partial) {
  json j;
  j["offset"] = partial.offset;
  j["count"] = partial.count;
  j["weight_mass"] = partial.weight_mass;
  j["weighted_sum"] = vector_to_json(partial.weighted_sum);
  return j;
}

PartialGeometricSum partial_sum_from_json(const json& j) {
  PartialGeometricSum partial;
  partial.offset = j.at("offset").get<Index>();
  partial.count = j.at("count").get<Index>();
  partial.weight_mass = j.at("weight_mass").get<double>();
  partial.weighted_sum = vector_from_json(j.at("weighted_sum"));
  return partial;
}

json risk_report_to_json(const RiskReport& report) {
  json j;
  j["excess_risk"] = report.excess_risk;
  j["variance_term"] = report.variance_term;
  j["bias_term_1"] = report.bias_term_1;
  j["bias_term_2"] = report.bias_term_2;
  j["bound_total"] = report.bound_total;
  j["satisfied"] = report.satisfied;
  return j;
}

void save_trace(const IterateTrace& trace, const std::string& csv_path,
                const std::string& sidecar_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::invalid_argument("cannot open file for writing: " + csv_path);
  char buf[40];
  for (Index t = 0; t < trace.length(); ++t) {
    for (Index j = 0; j < trace.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", trace.iterates(t, j));
      csv << buf << (j + 1 == trace.dim() ? '\n' : ',');
    }
  }
  json sidecar;
  sidecar["config"] = sgd_config_to_json(trace.config);
  sidecar["instance_ref"] = trace.instance_ref;
  sidecar["length"] = trace.length();
  sidecar["dim"] = trace.dim();
  std::ofstream meta(sidecar_path);
  if (!meta)
    throw std::invalid_argument("cannot open file for writing: " + sidecar_path);
  meta << sidecar.dump(2) << '\n';
}

IterateTrace load_trace(const std::string& csv_path, const std::string& sidecar_path) {
  std::ifstream meta(sidecar_path);
  if (!meta) throw std::invalid_argument("cannot open file: " + sidecar_path);
  json sidecar = json::parse(meta);

  IterateTrace trace;
  trace.config = sgd_config_from_json(sidecar.at("config"));
  trace.instance_ref = sidecar.value("instance_ref", std::string());
  const Index length = sidecar.at("length").get<Index>();
  const Index dim = sidecar.at("dim").get<Index>();
  trace.iterates.resize(length, dim);

  std::ifstream csv(csv_path);
  if (!csv) throw std::invalid_argument("cannot open file: " + csv_path);
  std::string line;
  Index t = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    if (t >= length) throw ParseError(t + 1, "trace has more rows than declared");
    std::size_t pos = 0;
    for (Index j = 0; j < dim; ++j) {
      const std::size_t comma = line.find(',', pos);
      const std::string field = line.substr(pos, comma == std::string::npos
                                                     ? std::string::npos
                                                     : comma - pos);
      try {
        trace.iterates(t, j) = std::stod(field);
      } catch (const std::exception&) {
        throw ParseError(t + 1, "bad trace cell at row " + std::to_string(t + 1));
      }
      pos = comma == std::string::npos ? line.size() : comma + 1;
    }
    ++t;
  }
  if (t != length) throw ParseError(t, "trace has fewer rows than declared");
  return trace;
}

}  // namespace geoavg
