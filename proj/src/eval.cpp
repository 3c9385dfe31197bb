#include "ersatz/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ersatz {

namespace {

constexpr const char* kQueryFormat = "ersatz-queries";
constexpr const char* kTruthFormat = "ersatz-ground-truth";
constexpr int kEvalVersion = 1;
constexpr const char* kSentinel = "NA";

using nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

json parse_versioned(const std::string& text, const char* format,
                     const char* what) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + " parse error: " + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != format) {
        throw SchemaError(std::string(what) + " missing format field '" +
                          format + "'");
    }
    const int version = doc.value("schema_version", -1);
    if (version != kEvalVersion) {
        throw VersionMismatchError(std::string(what) + " schema_version " +
                                   std::to_string(version) + ", expected " +
                                   std::to_string(kEvalVersion));
    }
    return doc;
}

// Shortest round-trip decimal form, so exported similarities parse back to
// the exact double.
std::string format_double(double v) { return json(v).dump(); }

}  // namespace

QueryFile parse_query_file(const std::string& text) {
    const json doc = parse_versioned(text, kQueryFormat, "query file");
    QueryFile file;
    file.schema_version = doc["schema_version"].get<int>();
    if (!doc.contains("scenarios") || !doc["scenarios"].is_array()) {
        throw SchemaError("query file missing scenarios array");
    }
    std::set<std::string> ids;
    for (const auto& s : doc["scenarios"]) {
        QueryScenario scenario;
        scenario.scenario_id = s.at("id").get<std::string>();
        scenario.missing_tool = s.at("missing_tool").get<std::string>();
        for (const auto& c : s.at("candidates")) {
            scenario.candidates.push_back(c.get<std::string>());
        }
        if (scenario.candidates.empty()) {
            throw SchemaError("scenario '" + scenario.scenario_id +
                              "' has an empty candidate list");
        }
        if (!ids.insert(scenario.scenario_id).second) {
            throw SchemaError("duplicate scenario id '" +
                              scenario.scenario_id + "'");
        }
        file.scenarios.push_back(std::move(scenario));
    }
    if (file.scenarios.empty()) {
        throw SchemaError("query file has no scenarios");
    }
    return file;
}

QueryFile load_query_file(const std::string& path) {
    return parse_query_file(read_text_file(path));
}

std::string query_file_to_text(const QueryFile& file) {
    json doc;
    doc["format"] = kQueryFormat;
    doc["schema_version"] = file.schema_version;
    json scenarios = json::array();
    for (const auto& s : file.scenarios) {
        scenarios.push_back({{"id", s.scenario_id},
                             {"missing_tool", s.missing_tool},
                             {"candidates", s.candidates}});
    }
    doc["scenarios"] = scenarios;
    return doc.dump(1) + "\n";
}

void save_query_file(const QueryFile& file, const std::string& path) {
    write_text_file(path, query_file_to_text(file));
}

GroundTruthFile parse_ground_truth(const std::string& text) {
    const json doc = parse_versioned(text, kTruthFormat, "ground truth file");
    GroundTruthFile file;
    file.schema_version = doc["schema_version"].get<int>();
    if (!doc.contains("scenarios") || !doc["scenarios"].is_array()) {
        throw SchemaError("ground truth file missing scenarios array");
    }
    std::set<std::string> ids;
    for (const auto& s : doc["scenarios"]) {
        GroundTruthScenario scenario;
        scenario.scenario_id = s.at("id").get<std::string>();
        scenario.modal_choice = s.at("modal_choice").get<std::string>();
        if (!s.contains("votes") || !s["votes"].is_object() ||
            s["votes"].empty()) {
            throw SchemaError("scenario '" + scenario.scenario_id +
                              "' needs a non-empty votes object");
        }
        int max_votes = 0;
        for (const auto& [cls, count] : s["votes"].items()) {
            if (!count.is_number_integer() || count.get<int>() < 0) {
                throw DomainError("vote count for '" + cls +
                                  "' must be a non-negative integer");
            }
            scenario.votes[cls] = count.get<int>();
            max_votes = std::max(max_votes, count.get<int>());
        }
        auto modal_it = scenario.votes.find(scenario.modal_choice);
        if (modal_it == scenario.votes.end() ||
            modal_it->second != max_votes) {
            throw SchemaError("scenario '" + scenario.scenario_id +
                              "': modal_choice must carry the maximum vote "
                              "count");
        }
        if (!ids.insert(scenario.scenario_id).second) {
            throw SchemaError("duplicate scenario id '" +
                              scenario.scenario_id + "'");
        }
        file.scenarios.push_back(std::move(scenario));
    }
    return file;
}

GroundTruthFile load_ground_truth(const std::string& path) {
    return parse_ground_truth(read_text_file(path));
}

std::string ground_truth_to_text(const GroundTruthFile& file) {
    json doc;
    doc["format"] = kTruthFormat;
    doc["schema_version"] = file.schema_version;
    json scenarios = json::array();
    for (const auto& s : file.scenarios) {
        json votes = json::object();
        for (const auto& [cls, count] : s.votes) votes[cls] = count;
        scenarios.push_back({{"id", s.scenario_id},
                             {"votes", votes},
                             {"modal_choice", s.modal_choice}});
    }
    doc["scenarios"] = scenarios;
    return doc.dump(1) + "\n";
}

void save_ground_truth(const GroundTruthFile& file, const std::string& path) {
    write_text_file(path, ground_truth_to_text(file));
}

int EvalReport::agreement_percent_rounded() const {
    return static_cast<int>(std::lround(100.0 * agreement()));
}

EvalReport run_eval(KnowledgeBase& kb, const QueryFile& queries,
                    const GroundTruthFile& truth) {
    return run_eval(kb, queries, truth, kb.config.theta, kb.config.phi);
}

EvalReport run_eval(KnowledgeBase& kb, const QueryFile& queries,
                    const GroundTruthFile& truth, double theta, double phi) {
    std::map<std::string, const GroundTruthScenario*> truth_by_id;
    for (const auto& s : truth.scenarios) {
        truth_by_id[s.scenario_id] = &s;
    }
    for (const auto& q : queries.scenarios) {
        if (truth_by_id.count(q.scenario_id) == 0) {
            throw SchemaError("no ground truth for scenario '" +
                              q.scenario_id + "'");
        }
        if (!kb.has_class(q.missing_tool)) {
            throw UnknownClassError("scenario '" + q.scenario_id +
                                    "': unknown missing tool '" +
                                    q.missing_tool + "'");
        }
        for (const auto& c : q.candidates) {
            if (!kb.has_class(c)) {
                throw UnknownClassError("scenario '" + q.scenario_id +
                                        "': unknown candidate '" + c + "'");
            }
        }
        const GroundTruthScenario& gt = *truth_by_id[q.scenario_id];
        const std::set<std::string> cands(q.candidates.begin(),
                                          q.candidates.end());
        for (const auto& [cls, unused] : gt.votes) {
            (void)unused;
            if (cands.count(cls) == 0) {
                throw SchemaError("scenario '" + q.scenario_id +
                                  "': vote for '" + cls +
                                  "' which is not a candidate");
            }
        }
    }

    EvalReport report;
    for (const auto& c : kb.classes) report.heatmap_columns.push_back(c.label);

    for (const auto& q : queries.scenarios) {
        const GroundTruthScenario& gt = *truth_by_id[q.scenario_id];
        ScenarioOutcome outcome;
        outcome.scenario_id = q.scenario_id;
        outcome.missing_tool = q.missing_tool;
        outcome.expert_modal = gt.modal_choice;
        outcome.query = answer_query(kb, q.missing_tool, q.candidates, theta,
                                     phi);
        outcome.system_choice = outcome.query.chosen;
        outcome.match = outcome.system_choice.has_value() &&
                        *outcome.system_choice == gt.modal_choice;

        int total_votes = 0;
        for (const auto& [cls, count] : gt.votes) total_votes += count;
        if (outcome.system_choice.has_value() && total_votes > 0) {
            auto it = gt.votes.find(*outcome.system_choice);
            if (it != gt.votes.end()) {
                outcome.vote_weight =
                    static_cast<double>(it->second) / total_votes;
            }
        }

        std::vector<std::optional<double>> row(report.heatmap_columns.size());
        for (const auto& ranked : outcome.query.ranked_candidates) {
            auto col = std::find(report.heatmap_columns.begin(),
                                 report.heatmap_columns.end(),
                                 ranked.class_label);
            row[static_cast<std::size_t>(
                col - report.heatmap_columns.begin())] = ranked.similarity;
        }
        report.heatmap.push_back(std::move(row));

        if (outcome.match) ++report.matches;
        ++report.total;
        report.scenarios.push_back(std::move(outcome));
    }
    return report;
}

std::string agreement_line(const EvalReport& report) {
    std::ostringstream out;
    out << "agreement: " << report.matches << "/" << report.total << " ("
        << report.agreement_percent_rounded() << "%)";
    return out.str();
}

std::string heatmap_to_text(const EvalReport& report) {
    std::ostringstream out;
    out << "scenario\tmissing_tool";
    for (const auto& col : report.heatmap_columns) out << '\t' << col;
    out << '\n';
    for (std::size_t i = 0; i < report.heatmap.size(); ++i) {
        const ScenarioOutcome& outcome = report.scenarios[i];
        out << outcome.scenario_id << '\t' << outcome.missing_tool;
        for (const auto& cell : report.heatmap[i]) {
            out << '\t';
            if (cell.has_value()) {
                out << format_double(*cell);
            } else {
                out << kSentinel;
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string report_summary_to_text(const EvalReport& report) {
    json doc;
    doc["format"] = "ersatz-eval-report";
    doc["schema_version"] = kEvalVersion;
    doc["matches"] = report.matches;
    doc["total"] = report.total;
    doc["agreement"] = report.agreement();
    doc["agreement_percent"] = report.agreement_percent_rounded();
    json scenarios = json::array();
    for (const auto& s : report.scenarios) {
        json row;
        row["id"] = s.scenario_id;
        row["missing_tool"] = s.missing_tool;
        row["system_choice"] =
            s.system_choice.has_value() ? json(*s.system_choice) : json();
        row["expert_modal"] = s.expert_modal;
        row["match"] = s.match;
        row["vote_weight"] = s.vote_weight;
        json sims = json::array();
        for (const auto& ranked : s.query.ranked_candidates) {
            sims.push_back({{"class", ranked.class_label},
                            {"similarity", ranked.similarity},
                            {"substitute",
                             ranked.verdict == Verdict::Substitute}});
        }
        row["candidates"] = sims;
        scenarios.push_back(row);
    }
    doc["scenarios"] = scenarios;
    return doc.dump(1) + "\n";
}

void write_report(const EvalReport& report, const std::string& path_prefix) {
    write_text_file(path_prefix + ".json", report_summary_to_text(report));
    write_text_file(path_prefix + ".heatmap.tsv", heatmap_to_text(report));
}

std::string query_result_to_text(const QueryResult& result) {
    json doc;
    doc["format"] = "ersatz-query-result";
    doc["schema_version"] = kEvalVersion;
    doc["missing_tool"] = result.missing_tool;
    doc["theta"] = result.theta;
    doc["phi"] = result.phi;
    doc["cache_hit"] = result.cache_hit;
    doc["chosen"] = result.chosen.has_value() ? json(*result.chosen) : json();
    json ranked = json::array();
    for (const auto& r : result.ranked_candidates) {
        json overlap = json::array();
        auto it = result.explanation.overlaps.find(r.class_label);
        if (it != result.explanation.overlaps.end()) {
            for (const auto& q : it->second) overlap.push_back(q.rendered());
        }
        ranked.push_back({{"class", r.class_label},
                          {"similarity", r.similarity},
                          {"substitute", r.verdict == Verdict::Substitute},
                          {"overlap", overlap}});
    }
    doc["candidates"] = ranked;
    json rf = json::array();
    for (const auto& q : result.explanation.relevant_functional) {
        rf.push_back(q.rendered());
    }
    json rp = json::array();
    for (const auto& q : result.explanation.relevant_physical) {
        rp.push_back(q.rendered());
    }
    doc["relevant_functional"] = rf;
    doc["relevant_physical"] = rp;
    doc["fallback"] = result.explanation.fallback;
    return doc.dump(1) + "\n";
}

}  // namespace ersatz
