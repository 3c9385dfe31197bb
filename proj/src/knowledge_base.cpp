#include "ersatz/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace ersatz {

namespace {

constexpr const char* kKbFormat = "ersatz-kb";
constexpr int kKbVersion = 1;
constexpr double kSumTolerance = 1e-9;

using nlohmann::json;

std::string checksum_hex(const std::string& payload) {
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0')
        << fnv1a64(payload);
    return out.str();
}

}  // namespace

bool KnowledgeBase::has_class(const std::string& label) const {
    return find_class(label) != nullptr;
}

const ClassInfo* KnowledgeBase::find_class(const std::string& label) const {
    for (const auto& c : classes) {
        if (c.label == label) return &c;
    }
    return nullptr;
}

const PropertyDef* KnowledgeBase::find_property(
    const std::string& label) const {
    for (const auto& p : properties) {
        if (p.label == label) return &p;
    }
    return nullptr;
}

const ClassConcept* KnowledgeBase::find_concept(
    const std::string& class_label) const {
    auto it = class_concepts.find(class_label);
    return it == class_concepts.end() ? nullptr : &it->second;
}

const FunctionModel* KnowledgeBase::find_function_model(
    const QualityLabel& q) const {
    auto it = function_models.find(q.rendered());
    return it == function_models.end() ? nullptr : &it->second;
}

const SubstitutionModel* KnowledgeBase::find_substitution_model(
    const std::string& missing_tool, double theta, double phi) const {
    for (const auto& m : substitution_models) {
        if (m.missing_tool == missing_tool && m.theta == theta &&
            m.phi == phi) {
            return &m;
        }
    }
    return nullptr;
}

bool KnowledgeBase::is_functional_property(const std::string& property) const {
    const PropertyDef* def = find_property(property);
    return def != nullptr && def->kind == PropertyKind::Functional;
}

std::vector<QualityLabel> KnowledgeBase::quality_inventory() const {
    std::vector<QualityLabel> out;
    for (const auto& [property, model] : cluster_models) {
        for (int i = 0; i < model.eta(); ++i) {
            out.push_back(QualityLabel{property, i});
        }
    }
    return out;
}

std::vector<QualityLabel> KnowledgeBase::functional_quality_inventory() const {
    std::vector<QualityLabel> out;
    for (const auto& q : quality_inventory()) {
        if (is_functional_property(q.property)) out.push_back(q);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conceptualization
// ---------------------------------------------------------------------------

std::map<std::string, ClassConcept> conceptualize_classes(
    const std::vector<HoldsSet>& holds,
    const std::map<std::string, std::string>& class_of) {
    // class -> property -> (measured count, per-quality counts)
    struct PropertyCounts {
        int measured = 0;
        std::map<QualityLabel, int> held;
    };
    std::map<std::string, std::map<std::string, PropertyCounts>> counts;
    std::map<std::string, int> population;

    for (const auto& h : holds) {
        auto cls_it = class_of.find(h.instance_id);
        if (cls_it == class_of.end()) {
            throw UnknownClassError("instance '" + h.instance_id +
                                    "' has no class");
        }
        const std::string& cls = cls_it->second;
        ++population[cls];
        for (const auto& q : h.qualities) {
            PropertyCounts& pc = counts[cls][q.property];
            ++pc.measured;
            ++pc.held[q];
        }
    }

    std::map<std::string, ClassConcept> concepts;
    for (const auto& [cls, per_property] : counts) {
        ClassConcept cc;
        cc.class_label = cls;
        cc.instance_count = population[cls];
        for (const auto& [property, pc] : per_property) {
            for (const auto& [quality, held] : pc.held) {
                cc.entries[quality] =
                    static_cast<double>(held) / static_cast<double>(pc.measured);
            }
        }
        concepts.emplace(cls, std::move(cc));
    }
    // Classes whose instances are all unmeasured still get a concept shell.
    for (const auto& [id, cls] : class_of) {
        (void)id;
        if (concepts.count(cls) == 0 && population.count(cls) > 0) {
            concepts.emplace(cls, ClassConcept{cls, {}, population[cls]});
        }
    }
    return concepts;
}

std::map<std::string, FunctionModel> conceptualize_functions(
    const std::vector<HoldsSet>& holds,
    const std::vector<QualityLabel>& functional_qualities,
    const std::set<std::string>& functional_property_labels) {
    std::map<std::string, FunctionModel> models;
    for (const auto& f : functional_qualities) {
        FunctionModel model;
        model.functional_quality = f;

        struct PropertyCounts {
            int measured = 0;
            std::map<QualityLabel, int> held;
        };
        std::map<std::string, PropertyCounts> counts;

        for (const auto& h : holds) {
            if (h.qualities.count(f) == 0) continue;
            ++model.support_count;
            for (const auto& q : h.qualities) {
                if (functional_property_labels.count(q.property) > 0) continue;
                PropertyCounts& pc = counts[q.property];
                ++pc.measured;
                ++pc.held[q];
            }
        }
        for (const auto& [property, pc] : counts) {
            for (const auto& [quality, held] : pc.held) {
                model.entries[quality] =
                    static_cast<double>(held) / static_cast<double>(pc.measured);
            }
        }
        models.emplace(f.rendered(), std::move(model));
    }
    return models;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

void check_sum_to_one(const std::map<QualityLabel, double>& entries,
                      const std::string& owner, const char* what,
                      std::vector<std::string>& violations) {
    std::map<std::string, double> sums;
    for (const auto& [quality, value] : entries) {
        sums[quality.property] += value;
    }
    for (const auto& [property, sum] : sums) {
        if (std::abs(sum - 1.0) > kSumTolerance) {
            std::ostringstream msg;
            msg << owner << ": " << what << " for property '" << property
                << "' sum to " << std::setprecision(17) << sum << ", not 1";
            violations.push_back(msg.str());
        }
    }
}

}  // namespace

std::vector<std::string> validate_kb(const KnowledgeBase& kb) {
    std::vector<std::string> violations;
    auto report = [&](const std::string& msg) { violations.push_back(msg); };

    try {
        check_config(kb.config);
    } catch (const DomainError& e) {
        report(std::string("config: ") + e.what());
    }

    std::set<std::string> class_labels;
    for (const auto& c : kb.classes) {
        if (!class_labels.insert(c.label).second) {
            report("duplicate class label '" + c.label + "'");
        }
        if (c.instance_count <= 0) {
            report("class '" + c.label + "' has instance_count <= 0");
        }
    }

    std::set<std::string> property_labels;
    const std::set<std::string> allowed_functional(
        kb.functional_properties.begin(), kb.functional_properties.end());
    for (const auto& p : kb.properties) {
        if (!property_labels.insert(p.label).second) {
            report("duplicate property label '" + p.label + "'");
        }
        if (p.kind == PropertyKind::Functional &&
            allowed_functional.count(p.label) == 0) {
            report("functional property '" + p.label +
                   "' is outside the configured functional set");
        }
    }

    for (const auto& [label, model] : kb.cluster_models) {
        if (label != model.property) {
            report("cluster model stored under '" + label +
                   "' names property '" + model.property + "'");
        }
        if (kb.find_property(model.property) == nullptr) {
            report("cluster model for unknown property '" + model.property +
                   "'");
        }
        if (model.centroids.empty()) {
            report("cluster model for '" + model.property +
                   "' has no centroids");
        }
        for (std::size_t i = 0; i + 1 < model.centroids.size(); ++i) {
            if (!(model.centroids[i] < model.centroids[i + 1])) {
                report("cluster model for '" + model.property +
                       "' has non-ascending centroids");
                break;
            }
        }
    }

    // A quality is well-formed when its property has a cluster model and the
    // index is inside that model's eta.
    auto check_quality = [&](const QualityLabel& q, const std::string& owner) {
        auto it = kb.cluster_models.find(q.property);
        if (it == kb.cluster_models.end()) {
            report(owner + ": quality '" + q.rendered() +
                   "' references a property with no cluster model");
            return;
        }
        if (q.cluster_index < 0 || q.cluster_index >= it->second.eta()) {
            report(owner + ": quality '" + q.rendered() +
                   "' has cluster_index outside [0," +
                   std::to_string(it->second.eta() - 1) + "]");
        }
    };

    for (const auto& [label, cc] : kb.class_concepts) {
        const std::string owner = "class concept '" + label + "'";
        if (label != cc.class_label) {
            report(owner + " stored under mismatched key");
        }
        if (!kb.has_class(cc.class_label)) {
            report(owner + " names an unknown class");
        }
        if (cc.instance_count <= 0) {
            report(owner + " has instance_count <= 0");
        }
        for (const auto& [quality, membership] : cc.entries) {
            check_quality(quality, owner);
            if (!(membership > 0.0 && membership <= 1.0)) {
                report(owner + ": membership of '" + quality.rendered() +
                       "' is outside (0,1]");
            }
        }
        check_sum_to_one(cc.entries, owner, "memberships", violations);
    }

    for (const auto& [key, model] : kb.function_models) {
        const std::string owner = "function model '" + key + "'";
        if (key != model.functional_quality.rendered()) {
            report(owner + " stored under mismatched key");
        }
        check_quality(model.functional_quality, owner);
        if (!kb.is_functional_property(model.functional_quality.property)) {
            report(owner + " is keyed by a non-functional quality");
        }
        if (model.support_count < 0) {
            report(owner + " has negative support_count");
        }
        if (model.support_count == 0 && !model.entries.empty()) {
            report(owner + " has entries but no supporting instances");
        }
        for (const auto& [quality, proportion] : model.entries) {
            check_quality(quality, owner);
            if (kb.is_functional_property(quality.property)) {
                report(owner + ": entry '" + quality.rendered() +
                       "' is not a physical quality");
            }
            if (!(proportion > 0.0 && proportion <= 1.0)) {
                report(owner + ": proportion of '" + quality.rendered() +
                       "' is outside (0,1]");
            }
        }
        check_sum_to_one(model.entries, owner, "proportions", violations);
    }

    std::set<std::string> sub_keys;
    for (const auto& model : kb.substitution_models) {
        const std::string owner =
            "substitution model for '" + model.missing_tool + "'";
        {
            std::ostringstream key;
            key << model.missing_tool << "|" << std::setprecision(17)
                << model.theta << "|" << model.phi;
            if (!sub_keys.insert(key.str()).second) {
                report(owner + " duplicates a (tool, theta, phi) key");
            }
        }
        if (!kb.has_class(model.missing_tool)) {
            report(owner + " names an unknown class");
        }
        if (!(model.theta > 0.0 && model.theta <= 1.0)) {
            report(owner + " has theta outside (0,1]");
        }
        if (!(model.phi >= 0.0 && model.phi < 1.0)) {
            report(owner + " has phi outside [0,1)");
        }
        for (const auto& [cls, score] : model.positive_substitutes) {
            if (model.negative_substitutes.count(cls) > 0) {
                report(owner + ": class '" + cls +
                       "' is in both positive and negative sets");
            }
            if (!(score > model.phi)) {
                report(owner + ": positive substitute '" + cls +
                       "' has score <= phi");
            }
            if (score < 0.0 || score > 1.0) {
                report(owner + ": score for '" + cls + "' outside [0,1]");
            }
        }
        for (const auto& [cls, score] : model.negative_substitutes) {
            if (score > model.phi) {
                report(owner + ": negative substitute '" + cls +
                       "' has score > phi");
            }
            if (score < 0.0 || score > 1.0) {
                report(owner + ": score for '" + cls + "' outside [0,1]");
            }
        }
        for (const auto& q : model.relevant_functional) {
            check_quality(q, owner);
            if (!kb.is_functional_property(q.property)) {
                report(owner + ": relevant functional quality '" +
                       q.rendered() + "' is not functional");
            }
        }
        // relevant_physical must be a subset of the missing tool's
        // representative physical model at the model's theta.
        const ClassConcept* cc = kb.find_concept(model.missing_tool);
        for (const auto& q : model.relevant_physical) {
            check_quality(q, owner);
            if (kb.is_functional_property(q.property)) {
                report(owner + ": relevant physical quality '" + q.rendered() +
                       "' is not physical");
                continue;
            }
            if (cc == nullptr) {
                report(owner + " has relevant qualities but no class concept");
                break;
            }
            auto it = cc->entries.find(q);
            if (it == cc->entries.end() || it->second < model.theta) {
                report(owner + ": relevant physical quality '" + q.rendered() +
                       "' is outside the representative physical model");
            }
        }
    }

    return violations;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json quality_set_to_json(const QualitySet& qs) {
    json arr = json::array();
    for (const auto& q : qs) arr.push_back(q.rendered());
    return arr;
}

QualitySet quality_set_from_json(const json& arr) {
    QualitySet qs;
    for (const auto& q : arr) qs.insert(parse_quality(q.get<std::string>()));
    return qs;
}

json score_map_to_json(const std::map<std::string, double>& scores) {
    json arr = json::array();
    for (const auto& [cls, score] : scores) {
        arr.push_back({{"class", cls}, {"similarity", score}});
    }
    return arr;
}

std::map<std::string, double> score_map_from_json(const json& arr) {
    std::map<std::string, double> scores;
    for (const auto& item : arr) {
        scores[item.at("class").get<std::string>()] =
            item.at("similarity").get<double>();
    }
    return scores;
}

json kb_payload(const KnowledgeBase& kb) {
    json doc;
    doc["config"] = {{"eta", kb.config.eta},
                     {"theta", kb.config.theta},
                     {"phi", kb.config.phi},
                     {"rng_seed", kb.config.rng_seed}};
    doc["dataset_name"] = kb.dataset_name;
    doc["functional_properties"] = kb.functional_properties;

    json properties = json::array();
    for (const auto& p : kb.properties) {
        properties.push_back(
            {{"label", p.label},
             {"kind",
              p.kind == PropertyKind::Physical ? "physical" : "functional"},
             {"source", p.source == PropertySource::HumanGenerated
                            ? "human"
                            : "machine"}});
    }
    doc["properties"] = properties;

    json classes = json::array();
    for (const auto& c : kb.classes) {
        classes.push_back(
            {{"label", c.label}, {"instance_count", c.instance_count}});
    }
    doc["classes"] = classes;

    json cluster_models = json::array();
    for (const auto& [label, model] : kb.cluster_models) {
        cluster_models.push_back(
            {{"property", label}, {"centroids", model.centroids}});
    }
    doc["cluster_models"] = cluster_models;

    json concepts = json::array();
    for (const auto& [label, cc] : kb.class_concepts) {
        json entries = json::array();
        for (const auto& [quality, membership] : cc.entries) {
            entries.push_back({{"quality", quality.rendered()},
                               {"membership", membership}});
        }
        concepts.push_back({{"class", label},
                            {"instance_count", cc.instance_count},
                            {"entries", entries}});
    }
    doc["class_concepts"] = concepts;

    json functions = json::array();
    for (const auto& [key, model] : kb.function_models) {
        json entries = json::array();
        for (const auto& [quality, proportion] : model.entries) {
            entries.push_back({{"quality", quality.rendered()},
                               {"proportion", proportion}});
        }
        functions.push_back({{"quality", key},
                             {"support_count", model.support_count},
                             {"entries", entries}});
    }
    doc["function_models"] = functions;

    json substitutions = json::array();
    std::vector<SubstitutionModel> ordered = kb.substitution_models;
    std::sort(ordered.begin(), ordered.end(),
              [](const SubstitutionModel& a, const SubstitutionModel& b) {
                  return std::tie(a.missing_tool, a.theta, a.phi) <
                         std::tie(b.missing_tool, b.theta, b.phi);
              });
    for (const auto& model : ordered) {
        substitutions.push_back(
            {{"missing_tool", model.missing_tool},
             {"theta", model.theta},
             {"phi", model.phi},
             {"relevant_physical", quality_set_to_json(model.relevant_physical)},
             {"relevant_functional",
              quality_set_to_json(model.relevant_functional)},
             {"positive_substitutes",
              score_map_to_json(model.positive_substitutes)},
             {"negative_substitutes",
              score_map_to_json(model.negative_substitutes)}});
    }
    doc["substitution_models"] = substitutions;

    json degradations = json::array();
    std::vector<EtaDegradation> deg = kb.eta_degradations;
    std::sort(deg.begin(), deg.end(),
              [](const EtaDegradation& a, const EtaDegradation& b) {
                  return a.property < b.property;
              });
    for (const auto& d : deg) {
        degradations.push_back({{"property", d.property},
                                {"requested", d.requested},
                                {"used", d.used},
                                {"reason", d.reason}});
    }
    doc["eta_degradations"] = degradations;

    return doc;
}

KnowledgeBase kb_from_payload(const json& doc) {
    KnowledgeBase kb;
    const json& config = doc.at("config");
    kb.config.eta = config.at("eta").get<int>();
    kb.config.theta = config.at("theta").get<double>();
    kb.config.phi = config.at("phi").get<double>();
    kb.config.rng_seed = config.at("rng_seed").get<std::uint64_t>();
    kb.dataset_name = doc.value("dataset_name", "");
    for (const auto& f : doc.at("functional_properties")) {
        kb.functional_properties.push_back(f.get<std::string>());
    }
    for (const auto& p : doc.at("properties")) {
        PropertyDef def;
        def.label = p.at("label").get<std::string>();
        def.kind = p.at("kind").get<std::string>() == "physical"
                       ? PropertyKind::Physical
                       : PropertyKind::Functional;
        def.source = p.at("source").get<std::string>() == "human"
                         ? PropertySource::HumanGenerated
                         : PropertySource::MachineGenerated;
        kb.properties.push_back(std::move(def));
    }
    for (const auto& c : doc.at("classes")) {
        kb.classes.push_back(ClassInfo{c.at("label").get<std::string>(),
                                       c.at("instance_count").get<int>()});
    }
    for (const auto& m : doc.at("cluster_models")) {
        ClusterModel model;
        model.property = m.at("property").get<std::string>();
        for (const auto& c : m.at("centroids")) {
            model.centroids.push_back(c.get<double>());
        }
        kb.cluster_models.emplace(model.property, std::move(model));
    }
    for (const auto& c : doc.at("class_concepts")) {
        ClassConcept cc;
        cc.class_label = c.at("class").get<std::string>();
        cc.instance_count = c.at("instance_count").get<int>();
        for (const auto& e : c.at("entries")) {
            cc.entries[parse_quality(
                e.at("quality").get<std::string>())] =
                e.at("membership").get<double>();
        }
        std::string key = cc.class_label;
        kb.class_concepts.emplace(std::move(key), std::move(cc));
    }
    for (const auto& f : doc.at("function_models")) {
        FunctionModel model;
        model.functional_quality =
            parse_quality(f.at("quality").get<std::string>());
        model.support_count = f.at("support_count").get<int>();
        for (const auto& e : f.at("entries")) {
            model.entries[parse_quality(e.at("quality").get<std::string>())] =
                e.at("proportion").get<double>();
        }
        kb.function_models.emplace(model.functional_quality.rendered(),
                                   std::move(model));
    }
    for (const auto& s : doc.at("substitution_models")) {
        SubstitutionModel model;
        model.missing_tool = s.at("missing_tool").get<std::string>();
        model.theta = s.at("theta").get<double>();
        model.phi = s.at("phi").get<double>();
        model.relevant_physical =
            quality_set_from_json(s.at("relevant_physical"));
        model.relevant_functional =
            quality_set_from_json(s.at("relevant_functional"));
        model.positive_substitutes =
            score_map_from_json(s.at("positive_substitutes"));
        model.negative_substitutes =
            score_map_from_json(s.at("negative_substitutes"));
        kb.substitution_models.push_back(std::move(model));
    }
    for (const auto& d : doc.at("eta_degradations")) {
        kb.eta_degradations.push_back(
            EtaDegradation{d.at("property").get<std::string>(),
                           d.at("requested").get<int>(),
                           d.at("used").get<int>(),
                           d.at("reason").get<std::string>()});
    }
    return kb;
}

}  // namespace

std::string kb_to_text(const KnowledgeBase& kb) {
    const json payload = kb_payload(kb);
    json doc;
    doc["format"] = kKbFormat;
    doc["schema_version"] = kKbVersion;
    doc["checksum"] = checksum_hex(payload.dump());
    doc["kb"] = payload;
    return doc.dump(1) + "\n";
}

KnowledgeBase kb_from_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("knowledge base parse error: ") +
                         e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != kKbFormat) {
        throw SchemaError("not a knowledge base file (format field missing)");
    }
    const int version = doc.value("schema_version", -1);
    if (version != kKbVersion) {
        throw VersionMismatchError("knowledge base schema_version " +
                                   std::to_string(version) + ", expected " +
                                   std::to_string(kKbVersion));
    }
    if (!doc.contains("checksum") || !doc.contains("kb")) {
        throw SchemaError("knowledge base file missing checksum or kb");
    }
    const std::string expected = doc["checksum"].get<std::string>();
    const std::string actual = checksum_hex(doc["kb"].dump());
    if (expected != actual) {
        throw ChecksumError("knowledge base checksum mismatch: stored " +
                            expected + ", computed " + actual);
    }
    try {
        return kb_from_payload(doc["kb"]);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("knowledge base payload error: ") +
                          e.what());
    }
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + path);
    out << kb_to_text(kb);
    if (!out) throw IoError("write failed: " + path);
}

KnowledgeBase load_kb(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return kb_from_text(buf.str());
}

void extend_with_substitution_model(KnowledgeBase& kb,
                                    const SubstitutionModel& model) {
    if (!kb.has_class(model.missing_tool)) {
        throw UnknownClassError("cannot extend knowledge base: unknown class '" +
                                model.missing_tool + "'");
    }
    for (auto& existing : kb.substitution_models) {
        if (existing.missing_tool != model.missing_tool ||
            existing.theta != model.theta || existing.phi != model.phi) {
            continue;
        }
        // Merge: per-class maximum score across both sets, re-split by phi.
        std::map<std::string, double> scores;
        auto absorb = [&](const std::map<std::string, double>& src) {
            for (const auto& [cls, score] : src) {
                auto it = scores.find(cls);
                if (it == scores.end() || score > it->second) {
                    scores[cls] = score;
                }
            }
        };
        absorb(existing.positive_substitutes);
        absorb(existing.negative_substitutes);
        absorb(model.positive_substitutes);
        absorb(model.negative_substitutes);
        existing.positive_substitutes.clear();
        existing.negative_substitutes.clear();
        for (const auto& [cls, score] : scores) {
            if (score > existing.phi) {
                existing.positive_substitutes[cls] = score;
            } else {
                existing.negative_substitutes[cls] = score;
            }
        }
        return;
    }
    kb.substitution_models.push_back(model);
}

}  // namespace ersatz
