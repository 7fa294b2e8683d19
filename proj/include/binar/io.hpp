#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "binar/estimation.hpp"
#include "binar/mc.hpp"
#include "binar/process.hpp"

namespace binar {

/// Two integer columns, optional single header row. Throws DataError with the
/// offending line number on malformed rows or negative counts.
SeriesPair read_series_csv(std::istream& is);
SeriesPair read_series_csv_file(const std::string& path);
/// Header "x1,x2", LF line endings.
void write_series_csv(const SeriesPair& pair, std::ostream& os);

/// {alpha1, alpha2, marginal1: {type, lambda[, sigma2]}, marginal2, copula: {family, theta}}.
/// Unknown fields are rejected.
BinarModel parse_model_json(const std::string& text);
std::string model_to_json(const BinarModel& model);

std::string fit_report_to_json(const FitReport& report);
FitReport parse_fit_report_json(const std::string& text);

/**
 * {model: {...}, n, reps, base_seed, methods: ["cls", ...],
 *  fit: {marginals, copula}, burnin?, optimizer?: {x_tol, f_tol, max_evals, restarts}}.
 * fit defaults to the truth's families.
 */
MCConfig parse_mc_config_json(const std::string& text);

std::string read_text_file(const std::string& path);

}  // namespace binar
