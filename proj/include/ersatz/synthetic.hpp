#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ersatz/eval.hpp"
#include "ersatz/ingestion.hpp"

namespace ersatz {

// Synthetic datasets with known structure, used by the demos and the test
// suites. All generation is deterministic in the given seeds.

// 22 household object classes at the instance counts of the Washington RGBD
// selection (692 instances total), with expert-style distributions for
// rigidity / weight / hollowness plus the three functional properties.
Manifest household22_manifest();

// Machine-generated concept responses for every instance in the manifest:
// one `dim`-wide vector per instance with class-specific means.
MachinePropertyFile synthesize_machine_file(const Manifest& manifest,
                                            std::uint64_t seed, int dim);

// Six-class serving scenario: tray and plate share high rigidity and high
// flatness, mousepad shares only flatness, plus three distractors.
Manifest tray_scenario_manifest();

// One scenario per class: the class as the missing tool and
// `candidates_per_query` other classes drawn without replacement.
QueryFile make_queries(const Manifest& manifest, std::uint64_t seed,
                       int candidates_per_query = 5);

// Expert votes engineered so that exactly `target_matches` scenarios agree
// with the given system choices (scenarios without a system choice are
// preferred as the mismatches). 14 votes per scenario. Throws DomainError
// when the target is unreachable.
GroundTruthFile craft_ground_truth(
    const QueryFile& queries,
    const std::map<std::string, std::optional<std::string>>&
        system_choice_by_scenario,
    int target_matches);

}  // namespace ersatz
