#include "binar/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <vector>

#include "binar/errors.hpp"
#include "json.hpp"

namespace binar {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_count(const std::string& field, std::int64_t& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

json parse_document(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(what + ": invalid JSON (" + e.what() + ")");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw DataError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw DataError(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
T required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw DataError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(where + ": field '" + key + "' has the wrong type");
  }
}

MarginalSpec parse_marginal(const json& j, const std::string& where) {
  reject_unknown(j, {"type", "lambda", "sigma2"}, where);
  const auto type = required<std::string>(j, "type", where);
  const auto lambda = required<double>(j, "lambda", where);
  try {
    if (type == "poisson") {
      if (j.contains("sigma2")) throw DataError(where + ": sigma2 is not a Poisson parameter");
      return MarginalSpec::poisson(lambda);
    }
    if (type == "negbin") return MarginalSpec::negbin(lambda, required<double>(j, "sigma2", where));
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  throw DataError(where + ": unknown marginal type '" + type + "' (poisson|negbin)");
}

BinarModel model_from(const json& j) {
  const std::string where = "model";
  reject_unknown(j, {"alpha1", "alpha2", "marginal1", "marginal2", "copula"}, where);
  if (!j.contains("marginal1") || !j.contains("marginal2") || !j.contains("copula")) {
    throw DataError(where + ": marginal1, marginal2 and copula are required");
  }
  const json& c = j.at("copula");
  reject_unknown(c, {"family", "theta"}, "model.copula");
  CopulaSpec copula;
  try {
    copula.family = parse_copula_family(required<std::string>(c, "family", "model.copula"));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model.copula: ") + e.what());
  }
  copula.theta = c.contains("theta") ? required<double>(c, "theta", "model.copula") : 0.0;
  BinarModel m{required<double>(j, "alpha1", where), required<double>(j, "alpha2", where),
               InnovationModel{parse_marginal(j.at("marginal1"), "model.marginal1"),
                               parse_marginal(j.at("marginal2"), "model.marginal2"), copula}};
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  return m;
}

json marginal_json(const MarginalSpec& m) {
  json j{{"type", m.kind() == MarginalKind::Poisson ? "poisson" : "negbin"},
         {"lambda", m.lambda()}};
  if (m.kind() == MarginalKind::NegBin) j["sigma2"] = m.variance();
  return j;
}

json model_json(const BinarModel& m) {
  return {{"alpha1", m.alpha1},
          {"alpha2", m.alpha2},
          {"marginal1", marginal_json(m.innovations.marginal1)},
          {"marginal2", marginal_json(m.innovations.marginal2)},
          {"copula", {{"family", to_string(m.innovations.copula.family)},
                      {"theta", m.innovations.copula.theta}}}};
}

FitFamilies families_of(const BinarModel& m) {
  return {m.innovations.marginal1.kind(), m.innovations.marginal2.kind(),
          m.innovations.copula.family};
}

}  // namespace

SeriesPair read_series_csv(std::istream& is) {
  std::vector<std::int64_t> a;
  std::vector<std::int64_t> b;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DataError("line " + std::to_string(lineno) + ": expected two comma-separated columns");
    }
    std::int64_t u = 0;
    std::int64_t v = 0;
    const bool ok = parse_count(line.substr(0, comma), u) && parse_count(line.substr(comma + 1), v);
    if (!ok) {
      if (a.empty() && lineno == 1) continue;  // header
      throw DataError("line " + std::to_string(lineno) + ": counts must be integers");
    }
    if (u < 0 || v < 0) {
      throw DataError("line " + std::to_string(lineno) + ": counts must be nonnegative");
    }
    a.push_back(u);
    b.push_back(v);
  }
  SeriesPair p;
  p.x1 = Eigen::Map<const CountSeries>(a.data(), static_cast<Eigen::Index>(a.size()));
  p.x2 = Eigen::Map<const CountSeries>(b.data(), static_cast<Eigen::Index>(b.size()));
  return p;
}

SeriesPair read_series_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_series_csv(in);
}

void write_series_csv(const SeriesPair& pair, std::ostream& os) {
  os << "x1,x2\n";
  for (Eigen::Index t = 0; t < pair.size(); ++t) os << pair.x1(t) << ',' << pair.x2(t) << '\n';
}

BinarModel parse_model_json(const std::string& text) {
  return model_from(parse_document(text, "model"));
}

std::string model_to_json(const BinarModel& model) { return model_json(model).dump(2); }

std::string fit_report_to_json(const FitReport& r) {
  json j;
  j["method"] = to_string(r.method);
  j["marginals"] = r.families.marginals_code();
  j["copula"] = to_string(r.families.copula);
  j["alpha1"] = r.alpha1;
  j["alpha2"] = r.alpha2;
  j["lambda1"] = r.lambda1;
  j["lambda2"] = r.lambda2;
  j["theta"] = r.theta;
  j["sigma2_1"] = r.sigma2_1 ? json(*r.sigma2_1) : json(nullptr);
  j["sigma2_2"] = r.sigma2_2 ? json(*r.sigma2_2) : json(nullptr);
  j["loglik"] = r.loglik ? json(*r.loglik) : json(nullptr);
  j["aic"] = r.aic ? json(*r.aic) : json(nullptr);
  j["n_params"] = r.n_params;
  j["se"] = r.se;
  j["raw_flags"] = r.raw_flags;
  j["evals"] = r.evals;
  return j.dump(2);
}

FitReport parse_fit_report_json(const std::string& text) {
  const json j = parse_document(text, "fit report");
  const std::string where = "fit report";
  reject_unknown(j, {"method", "marginals", "copula", "alpha1", "alpha2", "lambda1", "lambda2",
                     "theta", "sigma2_1", "sigma2_2", "loglik", "aic", "n_params", "se",
                     "raw_flags", "evals"},
                 where);
  FitReport r;
  try {
    r.method = parse_method(required<std::string>(j, "method", where));
    r.families = FitFamilies::parse(required<std::string>(j, "marginals", where),
                                    required<std::string>(j, "copula", where));
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  r.alpha1 = required<double>(j, "alpha1", where);
  r.alpha2 = required<double>(j, "alpha2", where);
  r.lambda1 = required<double>(j, "lambda1", where);
  r.lambda2 = required<double>(j, "lambda2", where);
  r.theta = required<double>(j, "theta", where);
  const auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return required<double>(j, key, where);
  };
  r.sigma2_1 = opt("sigma2_1");
  r.sigma2_2 = opt("sigma2_2");
  r.loglik = opt("loglik");
  r.aic = opt("aic");
  r.n_params = required<int>(j, "n_params", where);
  if (j.contains("se")) r.se = required<std::map<std::string, double>>(j, "se", where);
  if (j.contains("raw_flags")) {
    r.raw_flags = required<std::vector<std::string>>(j, "raw_flags", where);
  }
  if (j.contains("evals")) r.evals = required<std::int64_t>(j, "evals", where);
  return r;
}

MCConfig parse_mc_config_json(const std::string& text) {
  const json j = parse_document(text, "mc config");
  const std::string where = "mc config";
  reject_unknown(j, {"model", "n", "reps", "base_seed", "methods", "fit", "burnin", "optimizer"},
                 where);
  if (!j.contains("model")) throw DataError(where + ": missing field 'model'");
  MCConfig cfg{model_from(j.at("model"))};
  cfg.n = required<Eigen::Index>(j, "n", where);
  cfg.reps = required<int>(j, "reps", where);
  cfg.base_seed = required<std::uint64_t>(j, "base_seed", where);
  if (j.contains("burnin")) cfg.burnin = required<std::int64_t>(j, "burnin", where);
  try {
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : required<std::vector<std::string>>(j, "methods", where)) {
        cfg.methods.push_back(parse_method(m));
      }
    }
    if (j.contains("fit")) {
      const json& f = j.at("fit");
      reject_unknown(f, {"marginals", "copula"}, "mc config.fit");
      cfg.fit_families = FitFamilies::parse(required<std::string>(f, "marginals", "mc config.fit"),
                                            required<std::string>(f, "copula", "mc config.fit"));
    } else {
      cfg.fit_families = families_of(cfg.model);
    }
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    const std::string ow = "mc config.optimizer";
    reject_unknown(o, {"x_tol", "f_tol", "max_evals", "restarts"}, ow);
    if (o.contains("x_tol")) cfg.opt.x_tol = required<double>(o, "x_tol", ow);
    if (o.contains("f_tol")) cfg.opt.f_tol = required<double>(o, "f_tol", ow);
    if (o.contains("max_evals")) cfg.opt.max_evals = required<int>(o, "max_evals", ow);
    if (o.contains("restarts")) cfg.opt.restarts = required<int>(o, "restarts", ow);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(where + ": " + e.what());
  }
  return cfg;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace binar
