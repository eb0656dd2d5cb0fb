#pragma once

#include "ivexp/calibration.hpp"
#include "ivexp/models.hpp"
#include "ivexp/svi.hpp"

#include "json.hpp"

#include <string>

namespace ivexp {

/// "%.17g"; NaN and infinities print as nan / inf / -inf.
std::string format_double(double v);

/// {"model": name, "params": {...}}. Unknown names, missing or non-numeric
/// parameters and invalid values all raise IoFailure.
ModelPtr model_from_json(const nlohmann::json& doc);
ModelPtr load_model(const std::string& path);
nlohmann::json model_to_json(const CharacteristicModel& model);

nlohmann::json svi_to_json(const SVIParams& p, double t);
SVIParams svi_from_json(const nlohmann::json& doc, double* t = nullptr);

/// CSV with header t,log_strike,iv and an optional weight column, grouped by
/// maturity in increasing order.
QuoteSurface read_quotes_csv(const std::string& path, double x);

nlohmann::json calibrated_slice_to_json(const CalibratedSlice& s);
nlohmann::json slice_outcome_to_json(const SliceOutcome& o);
nlohmann::json consistency_to_json(const LevyConsistencyReport& r);

}  // namespace ivexp
