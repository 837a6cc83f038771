#include "hiermc/door.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hiermc/gpc.hpp"
#include "hiermc/kernels.hpp"

namespace hiermc {

using nlohmann::json;

namespace {

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= s_.size();
    }
    bool accept(std::string_view tok) {
        skip_ws();
        if (s_.substr(pos_, tok.size()) != tok) return false;
        // keywords must not run into an identifier
        if (std::isalpha(static_cast<unsigned char>(tok.back())) && pos_ + tok.size() < s_.size() &&
            std::isalnum(static_cast<unsigned char>(s_[pos_ + tok.size()])))
            return false;
        pos_ += tok.size();
        return true;
    }
    std::string_view word() {
        skip_ws();
        const auto start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        return s_.substr(start, pos_ - start);
    }
    int integer() {
        skip_ws();
        int v = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc{}) fail("expected integer");
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        return v;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::ConfigError,
                    "predicate '" + std::string(s_) + "': " + what + " at offset " + std::to_string(pos_));
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

Predicate Predicate::parse(std::string_view text) {
    Predicate p;
    p.text_ = std::string(text);
    Lexer lex(text);
    if (lex.accept("true")) {
        if (!lex.done()) lex.fail("trailing input after 'true'");
        return p;
    }
    do {
        const auto name = lex.word();
        Comparison c{};
        if (name == "death") c.field = Field::Death;
        else if (name == "home") c.field = Field::Home;
        else if (name == "vfd") c.field = Field::Vfd;
        else lex.fail("unknown field '" + std::string(name) + "'");

        if (lex.accept("==")) c.op = Op::Eq;
        else if (lex.accept("!=")) c.op = Op::Ne;
        else if (lex.accept("<=")) c.op = Op::Le;
        else if (lex.accept(">=")) c.op = Op::Ge;
        else if (lex.accept("<")) c.op = Op::Lt;
        else if (lex.accept(">")) c.op = Op::Gt;
        else lex.fail("expected comparison operator");

        c.value = lex.integer();
        p.clauses_.push_back(c);
    } while (lex.accept("&&") || lex.accept("and"));
    if (!lex.done()) lex.fail("unexpected input");
    return p;
}

bool Predicate::operator()(const DerivedOutcomes& d) const {
    for (const auto& c : clauses_) {
        const int v = c.field == Field::Death  ? d.death
                      : c.field == Field::Home ? d.home_at_end
                                               : d.ventilator_free_days;
        bool ok = false;
        switch (c.op) {
            case Op::Eq: ok = v == c.value; break;
            case Op::Ne: ok = v != c.value; break;
            case Op::Lt: ok = v < c.value; break;
            case Op::Le: ok = v <= c.value; break;
            case Op::Gt: ok = v > c.value; break;
            case Op::Ge: ok = v >= c.value; break;
        }
        if (!ok) return false;
    }
    return true;
}

namespace {

std::string describe(const DerivedOutcomes& d) {
    return "(death=" + std::to_string(d.death) + ", home=" + std::to_string(d.home_at_end) +
           ", vfd=" + std::to_string(d.ventilator_free_days) + ")";
}

}  // namespace

void DoorSpec::validate(int horizon_days) const {
    if (categories.empty()) throw Error(ErrorCode::ConfigError, "DOOR spec has no categories");
    for (std::size_t k = 1; k < categories.size(); ++k)
        if (categories[k].rank <= categories[k - 1].rank)
            throw Error(ErrorCode::ConfigError, "DOOR ranks must be unique and sorted");
    for (int death = 0; death <= 1; ++death) {
        for (int home = 0; home <= 1; ++home) {
            for (int vfd = kDeathOverride; vfd <= horizon_days; ++vfd) {
                const DerivedOutcomes cell{death, home, vfd};
                int matches = 0;
                for (const auto& cat : categories) matches += cat.predicate(cell) ? 1 : 0;
                if (matches == 0) throw Error(ErrorCode::SpecGap, "no DOOR category matches " + describe(cell));
                if (matches > 1) throw Error(ErrorCode::SpecOverlap, "several DOOR categories match " + describe(cell));
            }
        }
    }
}

std::size_t DoorSpec::position_of_rank(int rank) const {
    for (std::size_t k = 0; k < categories.size(); ++k)
        if (categories[k].rank == rank) return k;
    throw Error(ErrorCode::InvalidArgument, "no DOOR category with rank " + std::to_string(rank));
}

DoorSpec guiding_example_spec() {
    const std::pair<const char*, const char*> rows[] = {
        {"Dead", "death == 1"},
        {"Alive, not returning home, v-f. days less than 10", "death == 0 && home == 0 && vfd < 10"},
        {"Alive, not returning home, v-f. days between 10 and 25",
         "death == 0 && home == 0 && vfd >= 10 && vfd <= 25"},
        {"Alive, returning home, v-f. days less than 10", "death == 0 && home == 1 && vfd < 10"},
        {"Alive, not returning home, v-f. days more than 25", "death == 0 && home == 0 && vfd > 25"},
        {"Alive, returning home, v-f. days between 10 and 25", "death == 0 && home == 1 && vfd >= 10 && vfd <= 25"},
        {"Alive, returning home, v-f. days more than 25", "death == 0 && home == 1 && vfd > 25"},
    };
    DoorSpec spec;
    int rank = 1;
    for (const auto& [label, pred] : rows) spec.categories.push_back({rank++, label, Predicate::parse(pred)});
    return spec;
}

json to_json(const DoorSpec& spec) {
    json cats = json::array();
    for (const auto& c : spec.categories)
        cats.push_back({{"rank", c.rank}, {"label", c.label}, {"predicate", c.predicate.text()}});
    return {{"categories", cats}};
}

DoorSpec door_spec_from_json(const json& j) {
    DoorSpec spec;
    try {
        for (const auto& c : j.at("categories"))
            spec.categories.push_back({c.at("rank").get<int>(), c.value("label", std::string{}),
                                       Predicate::parse(c.at("predicate").get<std::string>())});
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("DOOR spec: ") + e.what());
    }
    std::stable_sort(spec.categories.begin(), spec.categories.end(),
                     [](const DoorCategory& a, const DoorCategory& b) { return a.rank < b.rank; });
    return spec;
}

int map_to_door(const DerivedOutcomes& d, const DoorSpec& spec) {
    const DoorCategory* hit = nullptr;
    for (const auto& c : spec.categories) {
        if (!c.predicate(d)) continue;
        if (hit) throw Error(ErrorCode::SpecOverlap, "several DOOR categories match " + describe(d));
        hit = &c;
    }
    if (!hit) throw Error(ErrorCode::SpecGap, "no DOOR category matches " + describe(d));
    return hit->rank;
}

DoorResult door_analyze(const TrialDataset& data, const DoorSpec& spec, const AnalysisOptions& options) {
    spec.validate(data.horizon_days);

    DoorResult r;
    for (const auto& c : spec.categories) {
        r.ranks.push_back(c.rank);
        r.labels.push_back(c.label);
    }
    std::vector<int> e_ranks, c_ranks;
    r.e.arm = Arm::E;
    r.c.arm = Arm::C;
    r.e.counts.assign(spec.categories.size(), 0);
    r.c.counts.assign(spec.categories.size(), 0);
    for (const auto& t : data.trajectories) {
        const int rank = map_to_door(derive_outcomes(t, data.scale), spec);
        auto& dist = t.arm == Arm::E ? r.e : r.c;
        ++dist.n;
        ++dist.counts[spec.position_of_rank(rank)];
        (t.arm == Arm::E ? e_ranks : c_ranks).push_back(rank);
    }
    if (e_ranks.empty() || c_ranks.empty()) throw Error(ErrorCode::EmptyArm, "DOOR needs both arms nonempty");

    const auto counts = kernels::ordinal_pairs(e_ranks, c_ranks, options.exec);
    r.total_pairs = static_cast<std::uint64_t>(e_ranks.size()) * c_ranks.size();
    r.favorable = counts.favorable;
    r.unfavorable = counts.unfavorable;
    r.tied = counts.tied;
    const double N = static_cast<double>(r.total_pairs);
    r.prop_favorable = static_cast<double>(r.favorable) / N;
    r.prop_unfavorable = static_cast<double>(r.unfavorable) / N;
    r.prop_neutral = static_cast<double>(r.tied) / N;
    r.door_probability = r.prop_favorable + 0.5 * r.prop_neutral;
    r.ntb = 2.0 * r.door_probability - 1.0;
    r.win_odds_infinite = r.door_probability == 1.0;
    r.win_odds = r.win_odds_infinite ? std::numeric_limits<double>::infinity()
                                     : r.door_probability / (1.0 - r.door_probability);

    std::vector<double> e_means(e_ranks.size()), c_means(c_ranks.size());
    for (std::size_t i = 0; i < e_means.size(); ++i)
        e_means[i] = static_cast<double>(counts.e_score_sums[i]) / static_cast<double>(c_ranks.size());
    for (std::size_t j = 0; j < c_means.size(); ++j)
        c_means[j] = static_cast<double>(counts.c_score_sums[j]) / static_cast<double>(e_ranks.size());
    r.ntb_inference = ustat_inference(e_means, c_means, options.alpha, options.sided);
    r.p_value = r.ntb_inference.p_value;
    r.ci_scale = options.ci_scale;

    const double p = r.door_probability;
    const double se_p = r.ntb_inference.se / 2.0;
    if (options.ci_scale == CiScale::Logit && p > 0.0 && p < 1.0 && !r.ntb_inference.degenerate) {
        const double q = normal_quantile(1.0 - options.alpha / 2.0);
        const double centre = std::log(p / (1.0 - p));
        const double half = q * se_p / (p * (1.0 - p));
        auto expit = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
        r.probability_ci = {expit(centre - half), expit(centre + half)};
    } else if (options.ci_scale == CiScale::Logit) {
        r.probability_ci = {p, p};
    } else {
        r.probability_ci = {(1.0 + r.ntb_inference.ci.lower) / 2.0, (1.0 + r.ntb_inference.ci.upper) / 2.0};
    }
    return r;
}

std::vector<double> uniform_weights(int horizon_days) {
    return std::vector<double>(static_cast<std::size_t>(horizon_days), 1.0 / horizon_days);
}

std::vector<double> read_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open weights file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<double> w;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            w = json::parse(text).get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigError, "weights file: " + std::string(e.what()));
        }
        return w;
    }
    std::string token;
    std::stringstream ss(text);
    while (ss >> token) {
        std::stringstream parts(token);
        std::string part;
        while (std::getline(parts, part, ',')) {
            if (part.empty()) continue;
            try {
                w.push_back(std::stod(part));
            } catch (const std::exception&) {
                throw Error(ErrorCode::ConfigError, "weights file: bad number '" + part + "'");
            }
        }
    }
    return w;
}

LongitudinalDoorResult longitudinal_door(const TrialDataset& data, std::span<const double> weights,
                                         Execution exec) {
    const auto J = static_cast<std::size_t>(data.horizon_days);
    if (weights.size() != J)
        throw Error(ErrorCode::WeightLengthMismatch, "expected " + std::to_string(J) + " weights, got " +
                                                         std::to_string(weights.size()));
    for (double w : weights)
        if (!std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "weights must be finite");

    const auto e_idx = data.arm_members(Arm::E);
    const auto c_idx = data.arm_members(Arm::C);
    if (e_idx.empty() || c_idx.empty()) throw Error(ErrorCode::EmptyArm, "longitudinal DOOR needs both arms nonempty");

    LongitudinalDoorResult r;
    r.weights.assign(weights.begin(), weights.end());
    r.pairs_per_day = static_cast<std::uint64_t>(e_idx.size()) * c_idx.size();
    const double N = static_cast<double>(r.pairs_per_day);
    std::vector<int> e(e_idx.size()), c(c_idx.size());
    for (std::size_t day = 1; day <= J; ++day) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = data.trajectories[e_idx[i]].states[day];
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = data.trajectories[c_idx[j]].states[day];
        const auto counts = kernels::ordinal_pairs(e, c, exec);
        r.daily_favorable.push_back(counts.favorable);
        r.daily_unfavorable.push_back(counts.unfavorable);
        const double ntb = (static_cast<double>(counts.favorable) - static_cast<double>(counts.unfavorable)) / N;
        r.daily_ntb.push_back(ntb);
        r.weighted_ntb += weights[day - 1] * ntb;
    }
    return r;
}

}  // namespace hiermc
