#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ersatz/eval.hpp"
#include "ersatz/pipeline.hpp"
#include "ersatz/reasoner.hpp"
#include "ersatz/synthetic.hpp"

namespace {

// Exit codes: 0 success (including "no substitute"), 1 data/pipeline error,
// 2 query-resolution error.
constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kQueryError = 2;

struct BuildArgs {
    std::string manifest_path;
    std::string machine_path;
    std::string out_path;
    ersatz::ReasonerConfig config;
};

struct QueryArgs {
    std::string kb_path;
    std::string missing;
    std::vector<std::string> candidates;
    std::optional<double> theta;
    std::optional<double> phi;
    std::string out_path;
};

struct EvalArgs {
    std::string kb_path;
    std::string queries_path;
    std::string truth_path;
    std::string report_prefix;
    std::optional<double> theta;
    std::optional<double> phi;
};

struct SweepArgs {
    std::string kb_path;
    std::vector<double> thetas;
    std::vector<double> phis;
    std::vector<int> etas;
    std::string manifest_path;
    std::string machine_path;
    std::string queries_path;
    std::string truth_path;
    std::string out_path;
    bool strict = false;
};

std::string verdict_mark(ersatz::Verdict v) {
    return v == ersatz::Verdict::Substitute ? "substitute" : "-";
}

int run_build(const BuildArgs& args) {
    const ersatz::Manifest manifest = ersatz::load_manifest(args.manifest_path);
    ersatz::BuildOptions options;
    options.config = args.config;
    if (!args.machine_path.empty()) {
        options.machine = ersatz::load_machine_file(args.machine_path);
    }
    const ersatz::BuildResult built = ersatz::build_kb(manifest, options);

    const auto violations = ersatz::validate_kb(built.kb);
    if (!violations.empty()) {
        for (const auto& v : violations) {
            std::cerr << "invariant violation: " << v << "\n";
        }
        return kDataError;
    }
    ersatz::save_kb(built.kb, args.out_path);

    int human = 0, machine = 0;
    for (const auto& p : built.kb.properties) {
        (p.source == ersatz::PropertySource::HumanGenerated ? human : machine)++;
    }
    std::cout << "built knowledge base"
              << (built.kb.dataset_name.empty()
                      ? ""
                      : " '" + built.kb.dataset_name + "'")
              << "\n";
    std::cout << "  classes: " << built.kb.classes.size()
              << ", instances: " << built.records.size() << "\n";
    std::cout << "  properties: " << built.kb.properties.size() << " ("
              << human << " human, " << machine << " machine), qualities: "
              << built.kb.quality_inventory().size() << "\n";
    std::cout << "  eta: " << built.kb.config.eta
              << ", theta: " << built.kb.config.theta
              << ", phi: " << built.kb.config.phi
              << ", seed: " << built.kb.config.rng_seed << "\n";
    if (built.kb.eta_degradations.empty()) {
        std::cout << "  degradations: none\n";
    } else {
        for (const auto& d : built.kb.eta_degradations) {
            std::cout << "  degraded: " << d.property << " eta "
                      << d.requested << " -> " << d.used << " (" << d.reason
                      << ")\n";
        }
    }
    std::cout << "  wrote " << args.out_path << "\n";
    return kOk;
}

int run_query(const QueryArgs& args) {
    ersatz::KnowledgeBase kb = ersatz::load_kb(args.kb_path);
    const double theta = args.theta.value_or(kb.config.theta);
    const double phi = args.phi.value_or(kb.config.phi);

    std::vector<std::string> candidates;
    for (const auto& c : args.candidates) {
        if (c == args.missing) {
            std::cout << "warning: '" << c
                      << "' removed from candidates (a tool trivially "
                         "substitutes itself)\n";
            continue;
        }
        candidates.push_back(c);
    }
    if (candidates.empty()) {
        std::cerr << "error: no candidates left to evaluate\n";
        return kQueryError;
    }

    const ersatz::QueryResult result =
        ersatz::answer_query(kb, args.missing, candidates, theta, phi);
    // Fig. 2 flow: the store keeps the substitution model for reuse.
    ersatz::save_kb(kb, args.kb_path);

    std::cout << "missing tool: " << result.missing_tool << " (theta="
              << theta << ", phi=" << phi << ", cache "
              << (result.cache_hit ? "hit" : "miss") << ")\n";
    std::cout << "relevant functional: "
              << ersatz::to_string(result.explanation.relevant_functional)
              << "\n";
    std::cout << "relevant physical: "
              << ersatz::to_string(result.explanation.relevant_physical)
              << "\n";
    if (result.explanation.fallback) {
        std::cout << "  (fallback: no relevant functional quality; the full "
                     "representative physical model was used)\n";
    }
    std::cout << "candidates:\n";
    for (const auto& r : result.ranked_candidates) {
        std::ostringstream sim;
        sim << std::fixed << std::setprecision(4) << r.similarity;
        std::cout << "  " << std::left << std::setw(16) << r.class_label
                  << " " << sim.str() << "  " << std::setw(11)
                  << verdict_mark(r.verdict) << " overlap: "
                  << ersatz::to_string(
                         result.explanation.overlaps.at(r.class_label))
                  << "\n";
    }
    if (result.chosen.has_value()) {
        std::cout << "chosen: " << *result.chosen << "\n";
    } else {
        std::cout << "no substitute: no candidate exceeded phi=" << phi
                  << "\n";
    }
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw ersatz::IoError("cannot write " + args.out_path);
        out << ersatz::query_result_to_text(result);
    }
    return kOk;
}

int run_eval(const EvalArgs& args) {
    ersatz::KnowledgeBase kb = ersatz::load_kb(args.kb_path);
    const double theta = args.theta.value_or(kb.config.theta);
    const double phi = args.phi.value_or(kb.config.phi);
    const ersatz::QueryFile queries =
        ersatz::load_query_file(args.queries_path);
    const ersatz::GroundTruthFile truth =
        ersatz::load_ground_truth(args.truth_path);
    const ersatz::EvalReport report =
        ersatz::run_eval(kb, queries, truth, theta, phi);
    if (!args.report_prefix.empty()) {
        ersatz::write_report(report, args.report_prefix);
        std::cout << "wrote " << args.report_prefix << ".json and "
                  << args.report_prefix << ".heatmap.tsv\n";
    }
    for (const auto& s : report.scenarios) {
        std::cout << "  " << s.scenario_id << " " << std::left << std::setw(14)
                  << s.missing_tool << " system: " << std::setw(14)
                  << (s.system_choice.has_value() ? *s.system_choice : "-")
                  << " expert: " << std::setw(14) << s.expert_modal
                  << (s.match ? " match" : " MISMATCH") << "\n";
    }
    std::cout << ersatz::agreement_line(report) << "\n";
    return kOk;
}

struct SweepPoint {
    int eta;
    double theta;
    double phi;
    std::size_t qualities = 0;
    std::size_t rep_physical_total = 0;
    std::size_t rep_functional_total = 0;
    double mean_positive = 0.0;
    std::optional<double> agreement;
    std::map<std::string, ersatz::QualitySet> rep_by_class;
    std::map<std::string, std::set<std::string>> positive_by_class;
};

int run_sweep(const SweepArgs& args) {
    ersatz::KnowledgeBase base_kb = ersatz::load_kb(args.kb_path);

    std::vector<double> thetas = args.thetas;
    std::vector<double> phis = args.phis;
    std::vector<int> etas = args.etas;
    if (thetas.empty()) thetas.push_back(base_kb.config.theta);
    if (phis.empty()) phis.push_back(base_kb.config.phi);
    for (double t : thetas) {
        if (!(t > 0.0 && t <= 1.0)) {
            throw ersatz::DomainError("sweep theta outside (0,1]");
        }
    }
    for (double p : phis) {
        if (!(p >= 0.0 && p < 1.0)) {
            throw ersatz::DomainError("sweep phi outside [0,1)");
        }
    }
    std::sort(thetas.begin(), thetas.end());
    std::sort(phis.begin(), phis.end());
    std::sort(etas.begin(), etas.end());

    // Eta variations rebuild from the manifest; theta/phi reuse the store.
    std::vector<std::pair<int, ersatz::KnowledgeBase>> stores;
    if (etas.empty()) {
        stores.emplace_back(base_kb.config.eta, base_kb);
    } else {
        if (args.manifest_path.empty()) {
            throw ersatz::DomainError(
                "eta sweep needs --manifest to rebuild the store");
        }
        const ersatz::Manifest manifest =
            ersatz::load_manifest(args.manifest_path);
        std::optional<ersatz::MachinePropertyFile> machine;
        if (!args.machine_path.empty()) {
            machine = ersatz::load_machine_file(args.machine_path);
        }
        for (int eta : etas) {
            ersatz::BuildOptions options;
            options.config = base_kb.config;
            options.config.eta = eta;
            options.machine = machine;
            stores.emplace_back(eta, ersatz::build_kb(manifest, options).kb);
        }
    }

    std::optional<ersatz::QueryFile> queries;
    std::optional<ersatz::GroundTruthFile> truth;
    if (!args.queries_path.empty() && !args.truth_path.empty()) {
        queries = ersatz::load_query_file(args.queries_path);
        truth = ersatz::load_ground_truth(args.truth_path);
    }

    std::vector<SweepPoint> points;
    for (auto& [eta, kb] : stores) {
        for (double theta : thetas) {
            for (double phi : phis) {
                SweepPoint point;
                point.eta = eta;
                point.theta = theta;
                point.phi = phi;
                point.qualities = kb.quality_inventory().size();
                for (const auto& cls : kb.classes) {
                    const auto rp = ersatz::representative_of_class(
                        kb, cls.label,
                        ersatz::RepresentativeKind::PhysicalOfClass, theta);
                    const auto rf = ersatz::representative_of_class(
                        kb, cls.label,
                        ersatz::RepresentativeKind::FunctionalOfClass, theta);
                    point.rep_physical_total += rp.qualities.size();
                    point.rep_functional_total += rf.qualities.size();
                    ersatz::QualitySet both = rp.qualities;
                    both.insert(rf.qualities.begin(), rf.qualities.end());
                    point.rep_by_class[cls.label] = std::move(both);

                    std::set<std::string> positive;
                    for (const auto& other : kb.classes) {
                        if (other.label == cls.label) continue;
                        const auto sub = ersatz::substitutability(
                            kb, cls.label, other.label, theta, phi);
                        if (sub.verdict == ersatz::Verdict::Substitute) {
                            positive.insert(other.label);
                        }
                    }
                    point.mean_positive += static_cast<double>(positive.size());
                    point.positive_by_class[cls.label] = std::move(positive);
                }
                point.mean_positive /=
                    static_cast<double>(kb.classes.size());
                if (queries.has_value()) {
                    // Scratch copy so cached substitution models from the
                    // sweep never land in the saved store.
                    ersatz::KnowledgeBase scratch = kb;
                    const ersatz::EvalReport report = ersatz::run_eval(
                        scratch, *queries, *truth, theta, phi);
                    point.agreement = report.agreement();
                }
                points.push_back(std::move(point));
            }
        }
    }

    // Monotonicity audit: representative sets shrink as theta rises;
    // positive substitute sets never grow as phi rises.
    std::vector<std::string> violations;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
            const SweepPoint& a = points[i];
            const SweepPoint& b = points[j];
            if (a.eta == b.eta && a.phi == b.phi && a.theta < b.theta) {
                for (const auto& [cls, set_b] : b.rep_by_class) {
                    const auto& set_a = a.rep_by_class.at(cls);
                    if (!std::includes(set_a.begin(), set_a.end(),
                                       set_b.begin(), set_b.end())) {
                        std::ostringstream msg;
                        msg << "representative set of '" << cls
                            << "' not nested: theta " << a.theta << " -> "
                            << b.theta << " (eta " << a.eta << ", phi "
                            << a.phi << ")";
                        violations.push_back(msg.str());
                    }
                }
            }
            if (a.eta == b.eta && a.theta == b.theta && a.phi < b.phi) {
                for (const auto& [cls, set_b] : b.positive_by_class) {
                    const auto& set_a = a.positive_by_class.at(cls);
                    if (!std::includes(set_a.begin(), set_a.end(),
                                       set_b.begin(), set_b.end())) {
                        std::ostringstream msg;
                        msg << "positive substitutes of '" << cls
                            << "' grew: phi " << a.phi << " -> " << b.phi
                            << " (eta " << a.eta << ", theta " << a.theta
                            << ")";
                        violations.push_back(msg.str());
                    }
                }
            }
        }
    }

    std::ostringstream table;
    table << "eta\ttheta\tphi\tqualities\trep_physical\trep_functional\t"
             "mean_positive\tagreement\n";
    for (const auto& p : points) {
        table << p.eta << '\t' << p.theta << '\t' << p.phi << '\t'
              << p.qualities << '\t' << p.rep_physical_total << '\t'
              << p.rep_functional_total << '\t' << std::fixed
              << std::setprecision(3) << p.mean_positive << '\t';
        table.unsetf(std::ios::fixed);
        if (p.agreement.has_value()) {
            table << std::setprecision(4) << *p.agreement;
        } else {
            table << "NA";
        }
        table << '\n';
    }
    std::cout << table.str();
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw ersatz::IoError("cannot write " + args.out_path);
        out << table.str();
    }

    for (const auto& v : violations) {
        std::cerr << "monotonicity violation: " << v << "\n";
    }
    if (!violations.empty() && args.strict) return kDataError;
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "ersatz - grounded qualitative knowledge for tool substitution"};
    app.require_subcommand(1);

    BuildArgs build;
    CLI::App* cmd_build =
        app.add_subcommand("build", "build a knowledge base from a manifest");
    cmd_build->add_option("--manifest", build.manifest_path,
                          "dataset manifest (JSON)")
        ->required();
    cmd_build->add_option("--machine", build.machine_path,
                          "machine-generated property file (TSV)");
    cmd_build->add_option("--out", build.out_path, "output knowledge base")
        ->required();
    cmd_build->add_option("--eta", build.config.eta, "clusters per property");
    cmd_build->add_option("--theta", build.config.theta,
                          "representative model threshold");
    cmd_build->add_option("--phi", build.config.phi,
                          "minimum similarity tolerance");
    cmd_build->add_option("--seed", build.config.rng_seed, "sampling seed");

    QueryArgs query;
    CLI::App* cmd_query =
        app.add_subcommand("query", "find a substitute for a missing tool");
    cmd_query->add_option("--kb", query.kb_path, "knowledge base file")
        ->required();
    cmd_query->add_option("--missing", query.missing, "missing tool class")
        ->required();
    cmd_query
        ->add_option("--candidates", query.candidates,
                     "candidate classes (comma separated)")
        ->required()
        ->delimiter(',');
    cmd_query->add_option("--theta", query.theta,
                          "override the stored theta");
    cmd_query->add_option("--phi", query.phi, "override the stored phi");
    cmd_query->add_option("--out", query.out_path,
                          "write the structured result (JSON)");

    EvalArgs eval;
    CLI::App* cmd_eval = app.add_subcommand(
        "eval", "score agreement against expert selections");
    cmd_eval->add_option("--kb", eval.kb_path, "knowledge base file")
        ->required();
    cmd_eval->add_option("--queries", eval.queries_path, "query file (JSON)")
        ->required();
    cmd_eval->add_option("--truth", eval.truth_path,
                         "expert ground truth file (JSON)")
        ->required();
    cmd_eval->add_option("--report", eval.report_prefix,
                         "report path prefix (writes .json and .heatmap.tsv)");
    cmd_eval->add_option("--theta", eval.theta, "override the stored theta");
    cmd_eval->add_option("--phi", eval.phi, "override the stored phi");

    SweepArgs sweep;
    CLI::App* cmd_sweep = app.add_subcommand(
        "sweep", "grid sweep over eta/theta/phi with monotonicity audit");
    cmd_sweep->add_option("--kb", sweep.kb_path, "knowledge base file")
        ->required();
    cmd_sweep->add_option("--theta", sweep.thetas, "theta grid")
        ->delimiter(',');
    cmd_sweep->add_option("--phi", sweep.phis, "phi grid")->delimiter(',');
    cmd_sweep->add_option("--eta", sweep.etas, "eta grid (rebuilds)")
        ->delimiter(',');
    cmd_sweep->add_option("--manifest", sweep.manifest_path,
                          "manifest for eta rebuilds");
    cmd_sweep->add_option("--machine", sweep.machine_path,
                          "machine property file for eta rebuilds");
    cmd_sweep->add_option("--queries", sweep.queries_path,
                          "query file for agreement scoring");
    cmd_sweep->add_option("--truth", sweep.truth_path,
                          "ground truth for agreement scoring");
    cmd_sweep->add_option("--out", sweep.out_path, "write the sweep table");
    cmd_sweep->add_flag("--strict", sweep.strict,
                        "nonzero exit on monotonicity violations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kDataError;
    }

    try {
        if (cmd_build->parsed()) return run_build(build);
        if (cmd_query->parsed()) return run_query(query);
        if (cmd_eval->parsed()) return run_eval(eval);
        if (cmd_sweep->parsed()) return run_sweep(sweep);
    } catch (const ersatz::UnknownClassError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cmd_query->parsed() ? kQueryError : kDataError;
    } catch (const ersatz::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kDataError;
}
