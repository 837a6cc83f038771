#include "hiermc/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace hiermc {

using nlohmann::json;

json to_json(const DatasetDescriptor& d) {
    json j;
    j["horizon"] = d.horizon_days;
    j["K"] = d.scale.K;
    j["absorbing"] = d.scale.absorbing;
    j["labels"] = d.scale.labels;
    j["baseline_state"] = d.baseline_state;
    if (d.seed) j["seed"] = *d.seed;
    if (!d.rng_algorithm.empty()) j["rng"] = {{"algorithm", d.rng_algorithm}, {"version", d.rng_version}};
    return j;
}

DatasetDescriptor descriptor_from_json(const json& j) {
    DatasetDescriptor d;
    try {
        d.horizon_days = j.at("horizon").get<int>();
        d.scale.K = j.value("K", 4);
        if (j.contains("absorbing")) d.scale.absorbing = j["absorbing"].get<std::vector<int>>();
        if (j.contains("labels")) {
            d.scale.labels = j["labels"].get<std::vector<std::string>>();
        } else if (d.scale.K != 4) {
            d.scale.labels.clear();
            for (int k = 1; k <= d.scale.K; ++k) d.scale.labels.push_back("state" + std::to_string(k));
        }
        d.baseline_state = j.value("baseline_state", states::kHospital);
        if (j.contains("seed")) d.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("rng")) {
            d.rng_algorithm = j["rng"].at("algorithm").get<std::string>();
            d.rng_version = j["rng"].at("version").get<int>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("dataset descriptor: ") + e.what());
    }
    if (d.horizon_days < 1) throw Error(ErrorCode::ConfigError, "dataset descriptor: horizon must be positive");
    d.scale.validate();
    if (!d.scale.in_range(d.baseline_state))
        throw Error(ErrorCode::ConfigError, "dataset descriptor: baseline_state outside 1..K");
    return d;
}

std::filesystem::path descriptor_path_for(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

DatasetDescriptor read_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open dataset descriptor " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "dataset descriptor " + path.string() + ": " + e.what());
    }
    return descriptor_from_json(j);
}

void write_descriptor(const std::filesystem::path& path, const DatasetDescriptor& d) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    out << to_json(d).dump(2) << '\n';
}

void write_dataset_csv(std::ostream& out, const TrialDataset& data) {
    out << kCsvHeader << '\n';
    for (const auto& t : data.trajectories)
        for (std::size_t d = 0; d < t.states.size(); ++d)
            out << t.id << ',' << arm_code(t.arm) << ',' << d << ',' << t.states[d] << '\n';
}

void write_dataset_csv(const std::filesystem::path& path, const TrialDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    write_dataset_csv(out, data);
}

namespace {

int parse_int(std::string_view s, std::size_t line, const char* what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error(ErrorCode::DataFormat,
                    "line " + std::to_string(line) + ": bad " + what + " '" + std::string(s) + "'");
    return v;
}

struct PendingPatient {
    Arm arm;
    std::map<int, int> by_day;
};

}  // namespace

TrialDataset read_dataset_csv(std::istream& in, const DatasetDescriptor& desc) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw Error(ErrorCode::DataFormat, "CSV header must be exactly '" + std::string(kCsvHeader) + "'");

    std::vector<std::string> order;
    std::unordered_map<std::string, PendingPatient> pending;
    std::vector<Violation> violations;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string_view rest(line);
        std::string_view fields[4];
        for (int f = 0; f < 4; ++f) {
            const auto comma = rest.find(',');
            if (f < 3 && comma == std::string_view::npos)
                throw Error(ErrorCode::DataFormat, "line " + std::to_string(line_no) + ": expected 4 fields");
            fields[f] = f < 3 ? rest.substr(0, comma) : rest;
            if (f < 3) rest.remove_prefix(comma + 1);
        }
        if (fields[3].find(',') != std::string_view::npos)
            throw Error(ErrorCode::DataFormat, "line " + std::to_string(line_no) + ": expected 4 fields");
        const std::string id(fields[0]);
        if (id.empty()) throw Error(ErrorCode::DataFormat, "line " + std::to_string(line_no) + ": empty patient_id");
        const Arm arm = parse_arm(fields[1]);
        const int day = parse_int(fields[2], line_no, "day");
        const int state = parse_int(fields[3], line_no, "state");

        auto [it, inserted] = pending.try_emplace(id, PendingPatient{arm, {}});
        if (inserted) order.push_back(id);
        auto& p = it->second;
        if (p.arm != arm) {
            violations.push_back({id, day, ErrorCode::DuplicateId, "patient id '" + id + "' appears in both arms"});
            continue;
        }
        if (day < 0 || day > desc.horizon_days) {
            violations.push_back({id, day, ErrorCode::HorizonMismatch,
                                  "patient '" + id + "' day " + std::to_string(day) + " outside 0.." +
                                      std::to_string(desc.horizon_days)});
            continue;
        }
        if (!p.by_day.emplace(day, state).second)
            violations.push_back({id, day, ErrorCode::DuplicateId,
                                  "patient '" + id + "' has day " + std::to_string(day) + " twice"});
    }

    TrialDataset data;
    data.scale = desc.scale;
    data.horizon_days = desc.horizon_days;
    data.trajectories.reserve(order.size());
    for (const auto& id : order) {
        const auto& p = pending.at(id);
        PatientTrajectory t{id, p.arm, {}};
        bool complete = static_cast<int>(p.by_day.size()) == desc.horizon_days + 1;
        if (!complete) {
            violations.push_back({id, -1, ErrorCode::HorizonMismatch,
                                  "patient '" + id + "' has " + std::to_string(p.by_day.size()) + " of " +
                                      std::to_string(desc.horizon_days + 1) + " days"});
        }
        for (const auto& [day, state] : p.by_day) t.states.push_back(state);
        data.trajectories.push_back(std::move(t));
    }

    for (auto& v : find_violations(data))
        if (v.rule != ErrorCode::HorizonMismatch) violations.push_back(std::move(v));
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return data;
}

TrialDataset read_dataset_csv(const std::filesystem::path& path, const DatasetDescriptor& desc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::DataFormat, "cannot open " + path.string());
    return read_dataset_csv(in, desc);
}

std::string fingerprint(const TrialDataset& data) {
    std::ostringstream os;
    write_dataset_csv(os, data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hiermc
