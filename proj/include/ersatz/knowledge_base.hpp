#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ersatz/core.hpp"
#include "ersatz/grounding.hpp"

namespace ersatz {

// A property whose sub-categorization ran at a smaller cluster count than
// configured (or was skipped outright), and why.
struct EtaDegradation {
    std::string property;
    int requested = 0;
    int used = 0;  // 0 means the property was skipped
    std::string reason;

    bool operator==(const EtaDegradation&) const = default;
};

// The full knowledge store: symbol inventory, per-property cluster models,
// fuzzy class concepts, function models and cached substitution models.
// Immutable in normal use; extend_with_substitution_model returns the only
// sanctioned mutation.
struct KnowledgeBase {
    ReasonerConfig config;
    std::string dataset_name;
    std::vector<std::string> functional_properties;
    std::vector<PropertyDef> properties;  // sorted by label
    std::vector<ClassInfo> classes;       // sorted by label
    std::map<std::string, ClusterModel> cluster_models;    // by property
    std::map<std::string, ClassConcept> class_concepts;    // by class
    std::map<std::string, FunctionModel> function_models;  // by rendered quality
    std::vector<SubstitutionModel> substitution_models;
    std::vector<EtaDegradation> eta_degradations;

    bool has_class(const std::string& label) const;
    const ClassInfo* find_class(const std::string& label) const;
    const PropertyDef* find_property(const std::string& label) const;
    const ClassConcept* find_concept(const std::string& class_label) const;
    const FunctionModel* find_function_model(const QualityLabel& q) const;
    const SubstitutionModel* find_substitution_model(
        const std::string& missing_tool, double theta, double phi) const;

    bool is_functional_property(const std::string& property) const;

    // Every quality label the cluster models can produce, sorted.
    std::vector<QualityLabel> quality_inventory() const;
    std::vector<QualityLabel> functional_quality_inventory() const;

    bool operator==(const KnowledgeBase&) const = default;
};

// Invariant checks over a complete store. Violations are data, not errors:
// the list is empty iff every type invariant holds.
std::vector<std::string> validate_kb(const KnowledgeBase& kb);

// For each class O and quality t: m = |{o in O : holds(o,t)}| divided by the
// number of O's instances measured on t's property. Zero proportions are
// omitted. Throws UnknownClassError when an instance id has no class.
std::map<std::string, ClassConcept> conceptualize_classes(
    const std::vector<HoldsSet>& holds,
    const std::map<std::string, std::string>& class_of);

// For each functional quality f (the full inventory, so unheld qualities get
// empty models) and physical quality p:
// d = |{o : holds(o,f) and holds(o,p)}| / |{o : holds(o,f), measured on p}|.
// Instances pool across all classes.
std::map<std::string, FunctionModel> conceptualize_functions(
    const std::vector<HoldsSet>& holds,
    const std::vector<QualityLabel>& functional_qualities,
    const std::set<std::string>& functional_property_labels);

// Versioned, checksummed round-trip persistence. Two saves of the same store
// are byte-identical; load rejects version bumps and corrupted payloads.
std::string kb_to_text(const KnowledgeBase& kb);
KnowledgeBase kb_from_text(const std::string& text);
void save_kb(const KnowledgeBase& kb, const std::string& path);
KnowledgeBase load_kb(const std::string& path);

// Inserts or merges a substitution model under the (missing_tool, theta, phi)
// key. Merging unions the positive/negative sets keeping per-class maximum
// scores and re-splitting against phi; relevant sets stay as first stored.
void extend_with_substitution_model(KnowledgeBase& kb,
                                    const SubstitutionModel& model);

}  // namespace ersatz
