#include "ersatz/synthetic.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace ersatz {

namespace {

struct ClassRow {
    const char* label;
    int instances;
    // Means for rigidity, weight (grams), hollowness, containment, support,
    // blockage; ranges and spreads are shared per property.
    double rigidity;
    double weight;
    double hollowness;
    double containment;
    double support;
    double blockage;
};

// Instance counts mirror the per-category scan counts of the source dataset;
// property means are hand-set desk estimates of each class.
constexpr ClassRow kHousehold22[] = {
    //                 #   rig  weight hollow contain support block
    {"ball",          35, 0.55,  150, 0.20, 0.10, 0.10, 0.25},
    {"binder",        30, 0.60,  400, 0.30, 0.35, 0.75, 0.65},
    {"bowl",          30, 0.85,  350, 0.85, 0.90, 0.60, 0.55},
    {"cap",           32, 0.45,   80, 0.60, 0.55, 0.30, 0.30},
    {"cereal_box",    30, 0.50,  450, 0.80, 0.75, 0.65, 0.70},
    {"coffee_mug",    32, 0.90,  350, 0.85, 0.90, 0.50, 0.50},
    {"flashlight",    30, 0.85,  250, 0.30, 0.10, 0.20, 0.40},
    {"food_bag",      32, 0.15,  150, 0.50, 0.70, 0.25, 0.20},
    {"food_box",      36, 0.50,  400, 0.80, 0.75, 0.65, 0.70},
    {"food_can",      28, 0.90,  450, 0.70, 0.80, 0.55, 0.50},
    {"food_cup",      30, 0.40,  120, 0.80, 0.85, 0.45, 0.35},
    {"food_jar",      30, 0.90,  550, 0.75, 0.85, 0.55, 0.55},
    {"hand_towel",    30, 0.08,  200, 0.10, 0.20, 0.40, 0.15},
    {"keyboard",      30, 0.80,  600, 0.15, 0.05, 0.70, 0.60},
    {"kleenex",       30, 0.20,  120, 0.60, 0.50, 0.50, 0.20},
    {"notebook",      30, 0.55,  350, 0.10, 0.10, 0.80, 0.55},
    {"pitcher",       30, 0.85,  800, 0.85, 0.90, 0.50, 0.60},
    {"plate",         35, 0.88,  300, 0.35, 0.40, 0.85, 0.45},
    {"shampoo",       30, 0.60,  500, 0.60, 0.60, 0.35, 0.45},
    {"soda_can",      30, 0.75,  400, 0.70, 0.70, 0.50, 0.40},
    {"sponge",        36, 0.07,   30, 0.25, 0.15, 0.45, 0.20},
    {"water_bottle",  36, 0.55,  600, 0.70, 0.75, 0.35, 0.45},
};

HumanPropertySpec make_unit_property(const char* label, PropertyKind kind,
                                     double stddev,
                                     double ClassRow::*mean_field) {
    HumanPropertySpec spec;
    spec.property = PropertyDef{label, kind, PropertySource::HumanGenerated};
    for (const auto& row : kHousehold22) {
        spec.per_class[row.label] =
            DistributionSpec{row.*mean_field, stddev, 0.0, 1.0};
    }
    return spec;
}

}  // namespace

Manifest household22_manifest() {
    Manifest m;
    m.name = "household22";
    m.machine_property_dim = 4;
    m.functional_properties = default_functional_properties();
    for (const auto& row : kHousehold22) {
        m.classes.push_back(ClassInfo{row.label, row.instances});
    }

    m.human_properties.push_back(make_unit_property(
        "rigidity", PropertyKind::Physical, 0.05, &ClassRow::rigidity));
    {
        HumanPropertySpec weight;
        weight.property = PropertyDef{"weight", PropertyKind::Physical,
                                      PropertySource::HumanGenerated};
        for (const auto& row : kHousehold22) {
            weight.per_class[row.label] = DistributionSpec{
                row.weight, 0.12 * row.weight, 5.0, 2000.0};
        }
        m.human_properties.push_back(std::move(weight));
    }
    m.human_properties.push_back(make_unit_property(
        "hollowness", PropertyKind::Physical, 0.06, &ClassRow::hollowness));
    m.human_properties.push_back(make_unit_property(
        "containment", PropertyKind::Functional, 0.06,
        &ClassRow::containment));
    m.human_properties.push_back(make_unit_property(
        "support", PropertyKind::Functional, 0.06, &ClassRow::support));
    m.human_properties.push_back(make_unit_property(
        "blockage", PropertyKind::Functional, 0.06, &ClassRow::blockage));

    validate_manifest(m);
    return m;
}

MachinePropertyFile synthesize_machine_file(const Manifest& manifest,
                                            std::uint64_t seed, int dim) {
    MachinePropertyFile file;
    file.dim = dim;
    for (const auto& cls : manifest.classes) {
        for (int i = 1; i <= cls.instance_count; ++i) {
            std::vector<double> vec;
            vec.reserve(static_cast<std::size_t>(dim));
            for (int k = 0; k < dim; ++k) {
                const std::string property = machine_property_label(k);
                // Class-specific mean in [0.08, 0.92], then a per-instance
                // draw around it.
                std::uint64_t h = fnv1a64(seed, kFnvOffset);
                h = fnv1a64(cls.label, h);
                h = fnv1a64("mean", h);
                h = fnv1a64(static_cast<std::uint64_t>(k), h);
                std::mt19937_64 rng(h);
                const double mean =
                    0.08 + 0.84 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
                const DistributionSpec spec{mean, 0.05, 0.0, 1.0};
                vec.push_back(sample_truncated_normal(
                    spec, draw_stream_seed(seed, cls.label, property, i)));
            }
            file.rows.emplace_back(cls.label + "_" + std::to_string(i),
                                   std::move(vec));
        }
    }
    std::sort(file.rows.begin(), file.rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return file;
}

Manifest tray_scenario_manifest() {
    struct Row {
        const char* label;
        double rigidity;
        double flatness;
        double containment;
        double support;
    };
    constexpr Row rows[] = {
        {"tray",      0.90, 0.90, 0.10, 0.90},
        {"plate",     0.88, 0.87, 0.20, 0.88},
        {"mousepad",  0.15, 0.90, 0.05, 0.40},
        {"ball",      0.50, 0.05, 0.10, 0.10},
        {"sponge",    0.10, 0.45, 0.15, 0.30},
        {"towel",     0.05, 0.60, 0.05, 0.25},
    };
    Manifest m;
    m.name = "tray-scenario";
    m.machine_property_dim = 0;
    m.functional_properties = default_functional_properties();
    for (const auto& row : rows) {
        m.classes.push_back(ClassInfo{row.label, 12});
    }
    auto add = [&](const char* label, PropertyKind kind, double stddev,
                   double Row::*field) {
        HumanPropertySpec spec;
        spec.property = PropertyDef{label, kind, PropertySource::HumanGenerated};
        for (const auto& row : rows) {
            spec.per_class[row.label] =
                DistributionSpec{row.*field, stddev, 0.0, 1.0};
        }
        m.human_properties.push_back(std::move(spec));
    };
    add("rigidity", PropertyKind::Physical, 0.03, &Row::rigidity);
    add("flatness", PropertyKind::Physical, 0.03, &Row::flatness);
    add("containment", PropertyKind::Functional, 0.02, &Row::containment);
    add("support", PropertyKind::Functional, 0.03, &Row::support);
    validate_manifest(m);
    return m;
}

QueryFile make_queries(const Manifest& manifest, std::uint64_t seed,
                       int candidates_per_query) {
    if (candidates_per_query < 1 ||
        candidates_per_query >= static_cast<int>(manifest.classes.size())) {
        throw DomainError("candidates_per_query must be in [1, classes-1]");
    }
    QueryFile file;
    int index = 0;
    for (const auto& cls : manifest.classes) {
        ++index;
        QueryScenario scenario;
        {
            std::ostringstream id;
            id << "s" << (index < 10 ? "0" : "") << index;
            scenario.scenario_id = id.str();
        }
        scenario.missing_tool = cls.label;
        std::vector<std::string> pool;
        for (const auto& other : manifest.classes) {
            if (other.label != cls.label) pool.push_back(other.label);
        }
        std::uint64_t h = fnv1a64(seed, kFnvOffset);
        h = fnv1a64(cls.label, h);
        h = fnv1a64("query", h);
        std::mt19937_64 rng(h);
        for (int k = 0; k < candidates_per_query; ++k) {
            const auto pick = static_cast<std::size_t>(
                rng() % static_cast<std::uint64_t>(pool.size() - k));
            std::swap(pool[pick], pool[pool.size() - 1 - k]);
        }
        scenario.candidates.assign(pool.end() - candidates_per_query,
                                   pool.end());
        std::sort(scenario.candidates.begin(), scenario.candidates.end());
        file.scenarios.push_back(std::move(scenario));
    }
    return file;
}

GroundTruthFile craft_ground_truth(
    const QueryFile& queries,
    const std::map<std::string, std::optional<std::string>>&
        system_choice_by_scenario,
    int target_matches) {
    const int total = static_cast<int>(queries.scenarios.size());
    if (target_matches < 0 || target_matches > total) {
        throw DomainError("target_matches outside [0, scenario count]");
    }
    int matchable = 0;
    for (const auto& s : queries.scenarios) {
        auto it = system_choice_by_scenario.find(s.scenario_id);
        if (it != system_choice_by_scenario.end() && it->second.has_value()) {
            ++matchable;
        }
    }
    if (target_matches > matchable) {
        throw DomainError("only " + std::to_string(matchable) +
                          " scenarios have a system choice; cannot craft " +
                          std::to_string(target_matches) + " matches");
    }

    // Hand the mismatches to choice-less scenarios first; they can never
    // match anyway.
    GroundTruthFile truth;
    int matches_left = target_matches;
    int mismatches_left = total - target_matches;
    std::vector<const QueryScenario*> ordered;
    for (const auto& s : queries.scenarios) ordered.push_back(&s);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [&](const QueryScenario* a, const QueryScenario* b) {
                         auto has = [&](const QueryScenario* s) {
                             auto it = system_choice_by_scenario.find(
                                 s->scenario_id);
                             return it != system_choice_by_scenario.end() &&
                                    it->second.has_value();
                         };
                         return has(a) < has(b);
                     });

    std::map<std::string, GroundTruthScenario> by_id;
    for (const QueryScenario* s : ordered) {
        auto choice_it = system_choice_by_scenario.find(s->scenario_id);
        const std::optional<std::string> choice =
            choice_it == system_choice_by_scenario.end() ? std::nullopt
                                                         : choice_it->second;
        GroundTruthScenario gt;
        gt.scenario_id = s->scenario_id;

        // Choice-less scenarios come first and eat into the mismatch budget;
        // scenarios with a choice then match until the target is reached.
        const bool as_match = choice.has_value() && matches_left > 0;
        if (as_match) {
            --matches_left;
            gt.modal_choice = *choice;
        } else {
            --mismatches_left;
            // Modal goes to the first candidate that is not the system
            // choice.
            gt.modal_choice = s->candidates.front();
            if (choice.has_value() && gt.modal_choice == *choice) {
                if (s->candidates.size() < 2) {
                    throw DomainError("scenario '" + s->scenario_id +
                                      "' cannot mismatch: single candidate");
                }
                gt.modal_choice = s->candidates[1];
            }
        }
        // 14 experts: 9 for the modal choice, 3 and 2 for the next two
        // distinct candidates (fewer candidates concentrate the votes).
        std::vector<std::string> others;
        for (const auto& c : s->candidates) {
            if (c != gt.modal_choice) others.push_back(c);
        }
        gt.votes[gt.modal_choice] = others.empty() ? 14 : 9;
        if (others.size() >= 2) {
            gt.votes[others[0]] = 3;
            gt.votes[others[1]] = 2;
        } else if (others.size() == 1) {
            gt.votes[others[0]] = 5;
        }
        by_id.emplace(gt.scenario_id, std::move(gt));
    }
    if (matches_left != 0) {
        throw DomainError("could not reach the requested match count");
    }
    for (const auto& s : queries.scenarios) {
        truth.scenarios.push_back(by_id.at(s.scenario_id));
    }
    return truth;
}

}  // namespace ersatz
