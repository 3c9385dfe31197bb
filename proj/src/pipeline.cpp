#include "ersatz/pipeline.hpp"

#include <algorithm>

#include "ersatz/grounding.hpp"

namespace ersatz {

BuildResult build_kb(const Manifest& manifest, const BuildOptions& options) {
    validate_manifest(manifest);
    check_config(options.config);

    BuildResult result;
    KnowledgeBase& kb = result.kb;
    kb.config = options.config;
    kb.dataset_name = manifest.name;
    kb.functional_properties = manifest.functional_properties;
    std::sort(kb.functional_properties.begin(), kb.functional_properties.end());

    kb.classes = manifest.classes;
    std::sort(kb.classes.begin(), kb.classes.end(),
              [](const ClassInfo& a, const ClassInfo& b) {
                  return a.label < b.label;
              });

    for (const auto& spec : manifest.human_properties) {
        kb.properties.push_back(spec.property);
    }
    for (int k = 0; k < manifest.machine_property_dim; ++k) {
        kb.properties.push_back(PropertyDef{machine_property_label(k),
                                            PropertyKind::Physical,
                                            PropertySource::MachineGenerated});
    }
    std::sort(kb.properties.begin(), kb.properties.end());

    result.records = sample_human_properties(manifest, options.config.rng_seed);
    if (options.machine.has_value()) {
        result.records = load_machine_properties(
            std::move(result.records), *options.machine,
            manifest.machine_property_dim);
    }

    // Sub-categorization pools each property's values across all classes.
    for (const auto& def : kb.properties) {
        std::vector<double> values;
        for (const auto& rec : result.records) {
            auto it = rec.measurements.find(def.label);
            if (it != rec.measurements.end()) values.push_back(it->second);
        }
        if (values.empty()) {
            kb.eta_degradations.push_back(EtaDegradation{
                def.label, options.config.eta, 0, "no measurements"});
            continue;
        }
        try {
            kb.cluster_models.emplace(
                def.label,
                subcategorize(def.label, values, options.config.eta));
        } catch (const DegeneratePropertyError& e) {
            // Silently merging clusters would corrupt label ordinality;
            // retry at the distinct-value count and record the reduction.
            kb.cluster_models.emplace(
                def.label,
                subcategorize(def.label, values, e.distinct_count));
            kb.eta_degradations.push_back(EtaDegradation{
                def.label, options.config.eta, e.distinct_count,
                std::to_string(e.distinct_count) + " distinct values"});
        }
    }

    result.holds.reserve(result.records.size());
    std::map<std::string, std::string> class_of;
    for (const auto& rec : result.records) {
        result.holds.push_back(attribute(rec, kb.cluster_models));
        class_of[rec.instance_id] = rec.class_label;
    }

    kb.class_concepts = conceptualize_classes(result.holds, class_of);
    const std::set<std::string> functional_labels(
        kb.functional_properties.begin(), kb.functional_properties.end());
    kb.function_models = conceptualize_functions(
        result.holds, kb.functional_quality_inventory(), functional_labels);

    return result;
}

}  // namespace ersatz
