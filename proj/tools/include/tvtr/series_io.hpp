// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/design.hpp"
#include "tvtr/tensor.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tvtr::cli {

/// Bad flags, config values or inconsistent inputs (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable, unwritable or malformed files (exit code 3).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SeriesRole { covariate, response };

std::string_view role_name(SeriesRole r) noexcept;

/// One role of an ObservationSet on disk: `<stem>.json` manifest plus
/// `<stem>.csv` payload with columns subject_id, time_index, p1.. (or q1..),
/// value. Indices are 1-based.
struct TensorSeries {
    SeriesRole role = SeriesRole::covariate;
    double domain_end = 1.0;
    std::vector<std::vector<double>> time_grids;
    std::vector<DenseTensor> series;  ///< J x modes per subject
};

inline constexpr int kSeriesSchemaVersion = 1;

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void write_series(const std::filesystem::path& manifest, const TensorSeries& s);
TensorSeries read_series(const std::filesystem::path& manifest);

/// Pairs covariate and response files into an ObservationSet. Throws
/// ConfigError when N, J, time grids or domains disagree.
ObservationSet read_observations(const std::filesystem::path& covariates,
                                 const std::filesystem::path& responses);

void write_observations(const std::filesystem::path& dir, const ObservationSet& obs);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace tvtr::cli
