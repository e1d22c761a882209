#pragma once

#include <filesystem>

#include "json.hpp"

#include "wsvm/fit.hpp"
#include "wsvm/schemes.hpp"

namespace wsvm {

inline constexpr int kModelFormatVersion = 1;

/// Self-contained model document. Each ladder stores the union of its rungs' support points once;
/// rungs refer to rows of that list. Doubles are written with round-trip precision.
nlohmann::json model_to_json(const MulticlassModel& model);
/// Throws InvalidInput on a malformed document or an unsupported version.
MulticlassModel model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const TuneReport& report);

/// Finite numbers as numbers, otherwise "Inf", "-Inf" or "NaN".
nlohmann::json number_or_flag(double v);

/// Writes the model, plus an optional "tuning" array, to path.
void save_model(const std::filesystem::path& path, const MulticlassModel& model,
                const nlohmann::json& tuning = nullptr);
MulticlassModel load_model(const std::filesystem::path& path);

}  // namespace wsvm
