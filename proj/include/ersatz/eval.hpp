#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ersatz/reasoner.hpp"

namespace ersatz {

struct QueryScenario {
    std::string scenario_id;
    std::string missing_tool;
    std::vector<std::string> candidates;

    bool operator==(const QueryScenario&) const = default;
};

struct QueryFile {
    int schema_version = 1;
    std::vector<QueryScenario> scenarios;

    bool operator==(const QueryFile&) const = default;
};

// Expert selections for one scenario: the vote distribution and the modal
// choice. Vote ties are resolved in the file itself, not by the harness.
struct GroundTruthScenario {
    std::string scenario_id;
    std::map<std::string, int> votes;
    std::string modal_choice;

    bool operator==(const GroundTruthScenario&) const = default;
};

struct GroundTruthFile {
    int schema_version = 1;
    std::vector<GroundTruthScenario> scenarios;

    bool operator==(const GroundTruthFile&) const = default;
};

QueryFile load_query_file(const std::string& path);
QueryFile parse_query_file(const std::string& text);
std::string query_file_to_text(const QueryFile& file);
void save_query_file(const QueryFile& file, const std::string& path);

GroundTruthFile load_ground_truth(const std::string& path);
GroundTruthFile parse_ground_truth(const std::string& text);
std::string ground_truth_to_text(const GroundTruthFile& file);
void save_ground_truth(const GroundTruthFile& file, const std::string& path);

struct ScenarioOutcome {
    std::string scenario_id;
    std::string missing_tool;
    std::optional<std::string> system_choice;
    std::string expert_modal;
    bool match = false;
    // Fraction of expert votes that went to the system's choice (auxiliary
    // metric; the headline agreement compares against the modal choice).
    double vote_weight = 0.0;
    QueryResult query;
};

struct EvalReport {
    std::vector<ScenarioOutcome> scenarios;
    int matches = 0;
    int total = 0;
    // Heat map: one row per scenario, one column per class in the store;
    // absent candidates carry no value (the sentinel in the exported matrix).
    std::vector<std::string> heatmap_columns;
    std::vector<std::vector<std::optional<double>>> heatmap;

    double agreement() const {
        return total == 0 ? 0.0 : static_cast<double>(matches) / total;
    }
    int agreement_percent_rounded() const;
};

// Runs every scenario through answer_query and scores agreement against the
// expert modal choices. Scenario ids must match 1:1 between the two files;
// all labels must resolve against the store.
EvalReport run_eval(KnowledgeBase& kb, const QueryFile& queries,
                    const GroundTruthFile& truth);
EvalReport run_eval(KnowledgeBase& kb, const QueryFile& queries,
                    const GroundTruthFile& truth, double theta, double phi);

// "agreement: M/N (P%)" with P rounded to the nearest integer.
std::string agreement_line(const EvalReport& report);

// Writes <path>.json (structured summary) and <path>.heatmap.tsv (similarity
// matrix, sentinel "NA" for classes absent from a query).
void write_report(const EvalReport& report, const std::string& path_prefix);
std::string heatmap_to_text(const EvalReport& report);
std::string report_summary_to_text(const EvalReport& report);

// Machine-readable form of one query answer (used by the CLI's --out).
std::string query_result_to_text(const QueryResult& result);

}  // namespace ersatz
