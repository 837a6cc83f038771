#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "hiermc/trial_data.hpp"

namespace hiermc {

/// Sidecar JSON accompanying a long-format CSV: scale, horizon and (for
/// simulated data) the seed and generator algorithm that produced it.
struct DatasetDescriptor {
    StateScale scale;
    int horizon_days = 28;
    int baseline_state = states::kHospital;
    std::optional<std::uint64_t> seed;
    std::string rng_algorithm;
    int rng_version = 0;
};

nlohmann::json to_json(const DatasetDescriptor& d);
DatasetDescriptor descriptor_from_json(const nlohmann::json& j);

/// `data.csv` -> `data.json`.
std::filesystem::path descriptor_path_for(const std::filesystem::path& csv);

DatasetDescriptor read_descriptor(const std::filesystem::path& path);
void write_descriptor(const std::filesystem::path& path, const DatasetDescriptor& d);

inline constexpr std::string_view kCsvHeader = "patient_id,arm,day,state";

/// Writes rows patient-major, day-minor, LF line endings.
void write_dataset_csv(std::ostream& out, const TrialDataset& data);
void write_dataset_csv(const std::filesystem::path& path, const TrialDataset& data);

/// Parses and validates. Structural problems in the rows (repeated or
/// missing days, arm changes) are reported alongside trajectory invariant
/// violations in a single ValidationError.
TrialDataset read_dataset_csv(std::istream& in, const DatasetDescriptor& desc);
TrialDataset read_dataset_csv(const std::filesystem::path& path, const DatasetDescriptor& desc);

/// 64-bit FNV-1a of the canonical CSV serialization, as 16 hex digits.
std::string fingerprint(const TrialDataset& data);

}  // namespace hiermc
