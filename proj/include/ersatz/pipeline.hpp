#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ersatz/ingestion.hpp"
#include "ersatz/knowledge_base.hpp"

namespace ersatz {

struct BuildOptions {
    ReasonerConfig config;
    std::optional<MachinePropertyFile> machine;
};

struct BuildResult {
    KnowledgeBase kb;
    std::vector<InstanceRecord> records;
    std::vector<HoldsSet> holds;
};

// Full construction pass: sample human-generated values, merge machine
// vectors, sub-categorize every property, attribute every instance, then
// conceptualize classes and functional qualities. Properties with fewer
// distinct values than eta are retried at the distinct count and recorded in
// eta_degradations; properties with no measurements at all are skipped.
BuildResult build_kb(const Manifest& manifest, const BuildOptions& options);

}  // namespace ersatz
