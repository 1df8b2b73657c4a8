#include "geoavg/problem.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "geoavg/errors.hpp"

namespace geoavg {

std::string to_string(CovariateLaw law) {
  switch (law) {
    case CovariateLaw::gaussian: return "gaussian";
    case CovariateLaw::scaled_rademacher: return "scaled_rademacher";
  }
  return "unknown";
}

CovariateLaw covariate_law_from_string(const std::string& name) {
  if (name == "gaussian") return CovariateLaw::gaussian;
  if (name == "scaled_rademacher") return CovariateLaw::scaled_rademacher;
  throw std::invalid_argument("unsupported covariate law: " + name);
}

namespace {

constexpr double kOrthonormalTol = 1e-12;

bool is_identity(const MatrixXd& m) {
  return m.isIdentity(0.0);
}

}  // namespace

SpectralCovariance::SpectralCovariance(VectorXd spectrum, MatrixXd basis)
    : spectrum_(std::move(spectrum)), basis_(std::move(basis)) {
  if (spectrum_.size() == 0) throw std::invalid_argument("empty spectrum");
  if ((spectrum_.array() < 0.0).any())
    throw std::invalid_argument("invalid spectrum: negative eigenvalue");
  if (basis_.rows() != spectrum_.size() || basis_.cols() != spectrum_.size())
    throw std::invalid_argument("dimension mismatch: basis is not d x d");
  const MatrixXd gram = basis_.transpose() * basis_;
  const double defect =
      (gram - MatrixXd::Identity(basis_.rows(), basis_.cols())).cwiseAbs().maxCoeff();
  if (defect > kOrthonormalTol)
    throw std::invalid_argument("basis columns not orthonormal to 1e-12");
  identity_basis_ = is_identity(basis_);
}

SpectralCovariance::SpectralCovariance(VectorXd spectrum)
    : SpectralCovariance(std::move(spectrum),
                         MatrixXd::Identity(spectrum.size(), spectrum.size())) {}

VectorXd SpectralCovariance::apply(const VectorXd& v) const {
  if (identity_basis_) return spectrum_.cwiseProduct(v);
  return basis_ * spectrum_.cwiseProduct(basis_.transpose() * v);
}

MatrixXd SpectralCovariance::dense() const {
  if (identity_basis_) return spectrum_.asDiagonal();
  return basis_ * spectrum_.asDiagonal() * basis_.transpose();
}

VectorXd SpectralCovariance::to_eigenbasis(const VectorXd& v) const {
  if (identity_basis_) return v;
  return basis_.transpose() * v;
}

VectorXd SpectralCovariance::from_eigenbasis(const VectorXd& c) const {
  if (identity_basis_) return c;
  return basis_ * c;
}

namespace {

MatrixXd random_orthonormal_basis(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(dim, dim);
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the sign ambiguity so the basis is a deterministic function of the seed.
  for (Index j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

ProblemInstance make_instance(Index dim, VectorXd spectrum, VectorXd w_star,
                              double noise_sigma, CovariateLaw law,
                              std::optional<std::uint64_t> basis_seed) {
  if (dim < 1) throw std::invalid_argument("dimension mismatch: dim must be >= 1");
  if (spectrum.size() != dim)
    throw std::invalid_argument("dimension mismatch: spectrum length != dim");
  if (w_star.size() != dim)
    throw std::invalid_argument("dimension mismatch: w_star length != dim");
  if ((spectrum.array() <= 0.0).any())
    throw std::invalid_argument("invalid spectrum: eigenvalues must be positive");
  for (Index i = 0; i + 1 < dim; ++i)
    if (spectrum(i) < spectrum(i + 1))
      throw std::invalid_argument("invalid spectrum: must be sorted descending");
  if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be nonnegative");

  MatrixXd basis = basis_seed ? random_orthonormal_basis(dim, *basis_seed)
                              : MatrixXd::Identity(dim, dim);
  ProblemInstance instance{SpectralCovariance(std::move(spectrum), std::move(basis)),
                           std::move(w_star), noise_sigma, law, basis_seed};
  return instance;
}

MomentConstants moment_constants(const ProblemInstance& instance) {
  MomentConstants m;
  m.b_squared = instance.sigma.top_eigenvalue();
  m.sigma_squared = instance.noise_sigma * instance.noise_sigma;
  switch (instance.covariate_law) {
    case CovariateLaw::gaussian:
      // E[|x|^2 x (x) x] = trace(Sigma) Sigma + 2 Sigma^2 for centered
      // Gaussians, so trace(Sigma) + 2 s_1 is the tightest constant of the
      // form R^2 Sigma.
      m.r_squared = instance.sigma.trace() + 2.0 * instance.sigma.top_eigenvalue();
      break;
    case CovariateLaw::scaled_rademacher:
      // |x|^2 = trace(Sigma) almost surely; equality in the assumption.
      m.r_squared = instance.sigma.trace();
      break;
  }
  return m;
}

SampleStream::SampleStream(const ProblemInstance& instance, std::uint64_t seed)
    : instance_(&instance),
      scale_(instance.sigma.eigenvalues().cwiseSqrt()),
      rng_(seed) {}

Sample SampleStream::next() {
  const Index d = instance_->dim();
  VectorXd z(d);
  switch (instance_->covariate_law) {
    case CovariateLaw::gaussian:
      for (Index i = 0; i < d; ++i) z(i) = scale_(i) * rng_.normal();
      break;
    case CovariateLaw::scaled_rademacher:
      for (Index i = 0; i < d; ++i) z(i) = scale_(i) * rng_.sign();
      break;
  }
  Sample s;
  s.x = instance_->sigma.from_eigenbasis(z);
  s.y = instance_->w_star.dot(s.x);
  if (instance_->noise_sigma > 0.0) s.y += instance_->noise_sigma * rng_.normal();
  return s;
}

Dataset sample_stream(const ProblemInstance& instance, Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_stream: n must be >= 1");
  SampleStream stream(instance, seed);
  Dataset data;
  data.samples.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) data.samples.push_back(stream.next());
  data.source = "synthetic:seed=" + std::to_string(seed);
  return data;
}

namespace {

bool parse_field(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end != begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
  if (begin == end) return false;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);

  Dataset data;
  data.source = path;
  std::string line;
  long row = 0;
  Index dim = -1;
  bool first_content_row = true;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!parse_field(fields[i], values[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first_content_row) {  // optional header
        first_content_row = false;
        continue;
      }
      throw ParseError(row, "non-numeric cell at row " + std::to_string(row));
    }
    first_content_row = false;
    if (values.size() < 2)
      throw ParseError(row, "row " + std::to_string(row) +
                                " needs at least one feature and a label");
    if (dim < 0) dim = static_cast<Index>(values.size()) - 1;
    if (static_cast<Index>(values.size()) != dim + 1)
      throw ParseError(row, "ragged row " + std::to_string(row) + ": expected " +
                                std::to_string(dim + 1) + " fields, got " +
                                std::to_string(values.size()));
    Sample s;
    s.x = Eigen::Map<const VectorXd>(values.data(), dim);
    s.y = values.back();
    data.samples.push_back(std::move(s));
  }
  if (data.samples.empty()) throw EmptyDatasetError("empty dataset: " + path);
  return data;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  char buf[40];
  for (const Sample& s : dataset.samples) {
    for (Index i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.x(i));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", s.y);
    out << buf << '\n';
  }
}

std::pair<MatrixXd, VectorXd> empirical_moments(const Dataset& dataset) {
  if (dataset.empty()) throw EmptyDatasetError("empirical_moments: empty dataset");
  const Index d = dataset.dim();
  MatrixXd sigma_hat = MatrixXd::Zero(d, d);
  VectorXd exy_hat = VectorXd::Zero(d);
  for (const Sample& s : dataset.samples) {
    if (s.x.size() != d)
      throw std::invalid_argument("dimension mismatch inside dataset");
    sigma_hat.selfadjointView<Eigen::Lower>().rankUpdate(s.x, 1.0);
    exy_hat += s.y * s.x;
  }
  sigma_hat = sigma_hat.selfadjointView<Eigen::Lower>();
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  return {sigma_hat * inv_n, exy_hat * inv_n};
}

MatrixXd additive_noise_covariance(const ProblemInstance& instance) {
  // xi = x y - E[xy] with y = <w*, x> + eps. In eigenbasis coordinates
  // (u = B^T w*, D = diag(s)):
  //   gaussian:   V~ = (u^T D u + sigma^2) D + (D u)(D u)^T
  //   rademacher: V~ = (u^T D u + sigma^2) D + (D u)(D u)^T - 2 diag(s_i^2 u_i^2)
  const VectorXd u = instance.sigma.to_eigenbasis(instance.w_star);
  const VectorXd s = instance.sigma.eigenvalues();
  const VectorXd du = s.cwiseProduct(u);
  const double signal = u.dot(du);
  const double noise = instance.noise_sigma * instance.noise_sigma;
  MatrixXd v_tilde = (signal + noise) * MatrixXd(s.asDiagonal());
  switch (instance.covariate_law) {
    case CovariateLaw::gaussian:
      v_tilde += du * du.transpose();
      break;
    case CovariateLaw::scaled_rademacher:
      v_tilde += du * du.transpose();
      v_tilde -= 2.0 * MatrixXd(du.cwiseProduct(du).asDiagonal());
      break;
  }
  if (instance.sigma.has_identity_basis()) return v_tilde;
  return instance.sigma.basis() * v_tilde * instance.sigma.basis().transpose();
}

}  // namespace geoavg
