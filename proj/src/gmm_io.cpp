#include "simsel/csv.hpp"
#include "simsel/error.hpp"
#include "simsel/gmm.hpp"

#include <json.hpp>

namespace simsel {

using Json = nlohmann::ordered_json;

namespace {

constexpr int kModelVersion = 1;

Json meta_to_json(const FitMeta& m)
{
  Json j;
  j["iterations"] = m.iterations;
  j["final_mean_log_likelihood"] = m.final_mean_log_likelihood;
  j["converged"] = m.converged;
  j["seed"] = m.seed;
  j["tol_nats"] = m.tol_nats;
  j["max_iters"] = m.max_iters;
  j["n_init"] = m.n_init;
  j["reg_covar"] = m.reg_covar;
  j["variance_floor"] = m.variance_floor;
  j["sample_count"] = m.sample_count;
  j["provenance"] = m.provenance;
  j["standardized"] = m.standardized;
  j["best_init"] = m.best_init;
  j["reinit_iterations"] = m.reinit_iterations;
  j["trace"] = m.trace;
  return j;
}

FitMeta meta_from_json(const Json& j)
{
  FitMeta m;
  m.iterations = j.at("iterations").get<int>();
  m.final_mean_log_likelihood = j.at("final_mean_log_likelihood").get<double>();
  m.converged = j.at("converged").get<bool>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.tol_nats = j.at("tol_nats").get<double>();
  m.max_iters = j.at("max_iters").get<int>();
  m.n_init = j.at("n_init").get<int>();
  m.reg_covar = j.at("reg_covar").get<double>();
  m.variance_floor = j.value("variance_floor", m.reg_covar);
  m.sample_count = j.at("sample_count").get<std::size_t>();
  m.provenance = j.value("provenance", std::string());
  m.standardized = j.value("standardized", false);
  m.best_init = j.value("best_init", 0);
  m.reinit_iterations = j.value("reinit_iterations", std::vector<int>{});
  m.trace = j.value("trace", std::vector<double>{});
  return m;
}

void check_finite(const std::vector<double>& v, const char* what)
{
  for (double x : v) {
    if (!std::isfinite(x))
      fail(ErrorKind::Numerical, std::string("cannot serialize non-finite ") + what);
  }
}

} // namespace

std::string to_json(const GmmModel& model)
{
  check_finite(model.weights, "weights");
  check_finite(model.means, "means");
  check_finite(model.covariances, "covariances");
  check_finite(model.fit_meta.trace, "trace");
  const std::size_t k = model.k;
  const std::size_t dim = model.dim;
  Json j;
  j["version"] = kModelVersion;
  j["k"] = k;
  j["dim"] = dim;
  j["covariance_type"] = to_string(model.covariance_type);
  j["weights"] = model.weights;
  Json means = Json::array();
  for (std::size_t c = 0; c < k; ++c)
    means.push_back(std::vector<double>(model.means.begin() + c * dim,
                                        model.means.begin() + (c + 1) * dim));
  j["means"] = std::move(means);
  Json covs = Json::array();
  switch (model.covariance_type) {
    case CovarianceType::Spherical: covs = model.covariances; break;
    case CovarianceType::Diagonal:
      for (std::size_t c = 0; c < k; ++c)
        covs.push_back(std::vector<double>(model.covariances.begin() + c * dim,
                                           model.covariances.begin() + (c + 1) * dim));
      break;
    case CovarianceType::Full:
      for (std::size_t c = 0; c < k; ++c) {
        Json rows = Json::array();
        for (std::size_t a = 0; a < dim; ++a) {
          const auto row = model.covariances.begin() + (c * dim + a) * dim;
          rows.push_back(std::vector<double>(row, row + dim));
        }
        covs.push_back(std::move(rows));
      }
      break;
  }
  j["covariances"] = std::move(covs);
  j["fit_meta"] = meta_to_json(model.fit_meta);
  return j.dump(2) + "\n";
}

GmmModel model_from_json(const std::string& text)
{
  GmmModel model;
  try {
    const Json j = Json::parse(text);
    if (j.at("version").get<int>() != kModelVersion)
      fail(ErrorKind::Format, "unsupported model version");
    model.k = j.at("k").get<std::size_t>();
    model.dim = j.at("dim").get<std::size_t>();
    model.covariance_type = parse_covariance_type(j.at("covariance_type").get<std::string>());
    model.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& row : j.at("means")) {
      const auto v = row.get<std::vector<double>>();
      if (v.size() != model.dim)
        fail(ErrorKind::Validation, "model mean has wrong dimension");
      model.means.insert(model.means.end(), v.begin(), v.end());
    }
    const auto& covs = j.at("covariances");
    switch (model.covariance_type) {
      case CovarianceType::Spherical: model.covariances = covs.get<std::vector<double>>(); break;
      case CovarianceType::Diagonal:
        for (const auto& row : covs) {
          const auto v = row.get<std::vector<double>>();
          if (v.size() != model.dim)
            fail(ErrorKind::Validation, "model variance vector has wrong dimension");
          model.covariances.insert(model.covariances.end(), v.begin(), v.end());
        }
        break;
      case CovarianceType::Full:
        for (const auto& mat : covs) {
          if (mat.size() != model.dim)
            fail(ErrorKind::Validation, "model covariance has wrong shape");
          for (const auto& row : mat) {
            const auto v = row.get<std::vector<double>>();
            if (v.size() != model.dim)
              fail(ErrorKind::Validation, "model covariance has wrong shape");
            model.covariances.insert(model.covariances.end(), v.begin(), v.end());
          }
        }
        break;
    }
    model.fit_meta = meta_from_json(j.at("fit_meta"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed model JSON: ") + e.what());
  }
  model.validate();
  return model;
}

void write_model(const std::string& path, const GmmModel& model)
{
  csv::write_text_file(path, to_json(model));
}

GmmModel read_model(const std::string& path)
{
  return model_from_json(csv::read_text_file(path));
}

} // namespace simsel
