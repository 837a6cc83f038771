#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hiermc/door.hpp"
#include "hiermc/gpc.hpp"
#include "hiermc/most.hpp"
#include "hiermc/trial_data.hpp"

namespace hiermc {

std::string_view tool_version();

/// Canonical analysis artifact. JSON keys are emitted in sorted order and
/// doubles in shortest round-trip form, so serialize(parse(s)) == s.
/// Non-finite numbers are written as null.
struct AnalysisReport {
    std::string method;  // gpc | wmw | door | ldoor | most
    nlohmann::json dataset;
    nlohmann::json config;
    nlohmann::json result;
    std::string version{tool_version()};
    std::vector<std::uint64_t> seeds;

    nlohmann::json to_json() const;
    static AnalysisReport from_json(const nlohmann::json& j);
    std::string serialize() const;
    static AnalysisReport parse(std::string_view text);
};

/// {fingerprint, n_e, n_c, horizon}
nlohmann::json dataset_summary(const TrialDataset& data);

nlohmann::json to_json(const UStatSummary& s);
nlohmann::json to_json(const GpcResult& r);
nlohmann::json to_json(const DoorResult& r);
nlohmann::json to_json(const LongitudinalDoorResult& r);
nlohmann::json to_json(const EmpiricalSop& sop);
nlohmann::json to_json(const SopMatrix& sop);
nlohmann::json to_json(const FittedTransitionModel& fit);
nlohmann::json to_json(const MostSummary& s);
nlohmann::json to_json(const MostBootstrap& b);

/// {"E": ..., "C": ...} empirical occupancy counts.
nlohmann::json empirical_sop_json(const TrialDataset& data);

/// Table in the decomposition layout (one row per level, or one row for
/// DOOR). Full precision, comma separated.
std::string table_csv(const AnalysisReport& report);
/// Same table for the terminal, proportions rounded to 2 decimals.
std::string table_text(const AnalysisReport& report);

}  // namespace hiermc
