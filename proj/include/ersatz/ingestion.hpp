#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ersatz/core.hpp"

namespace ersatz {

// Truncated normal descriptor for one (property, class) pair, approximating
// an expert's intuition of how the property varies within the class.
struct DistributionSpec {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 1.0;

    bool operator==(const DistributionSpec&) const = default;
};

// A human-generated property and its per-class distributions. A class mapped
// to nullopt is explicitly unmeasured for this property.
struct HumanPropertySpec {
    PropertyDef property;
    std::map<std::string, std::optional<DistributionSpec>> per_class;

    bool operator==(const HumanPropertySpec&) const = default;
};

struct Manifest {
    int schema_version = 1;
    std::string name;
    int machine_property_dim = 4;
    std::vector<std::string> functional_properties;  // allowed labels
    std::vector<ClassInfo> classes;
    std::vector<HumanPropertySpec> human_properties;

    bool has_class(const std::string& label) const;
    int total_instances() const;

    bool operator==(const Manifest&) const = default;
};

// Parsed machine-generated property file: per instance, one fixed-width
// vector of concept responses.
struct MachinePropertyFile {
    int dim = 0;
    std::vector<std::pair<std::string, std::vector<double>>> rows;

    bool operator==(const MachinePropertyFile&) const = default;
};

inline std::string machine_property_label(int dim_index_zero_based) {
    return "shape_concept_" + std::to_string(dim_index_zero_based + 1);
}

// Manifest file handling. Throws ParseError on malformed text, SchemaError
// on missing/duplicate fields, DomainError on out-of-range values.
Manifest load_manifest(const std::string& path);
Manifest parse_manifest(const std::string& text);
void validate_manifest(const Manifest& manifest);
std::string manifest_to_text(const Manifest& manifest);
void save_manifest(const Manifest& manifest, const std::string& path);

// Machine property file: tab-separated rows under a versioned header line.
MachinePropertyFile load_machine_file(const std::string& path);
MachinePropertyFile parse_machine_file(const std::string& text);
std::string machine_file_to_text(const MachinePropertyFile& file);
void save_machine_file(const MachinePropertyFile& file,
                       const std::string& path);

// One draw from a truncated normal, on an RNG stream derived from
// (seed, class, property, instance index). The per-draw stream means adding
// or removing a class never perturbs another class's values.
double sample_truncated_normal(const DistributionSpec& spec,
                               std::uint64_t stream_seed);

std::uint64_t draw_stream_seed(std::uint64_t seed,
                               const std::string& class_label,
                               const std::string& property_label,
                               int instance_index);

// Samples every human-generated property for every instance in the manifest.
// Instance ids are "<class>_<index>" with a 1-based index; the result is
// sorted by instance_id. Fully determined by (manifest, seed).
std::vector<InstanceRecord> sample_human_properties(const Manifest& manifest,
                                                    std::uint64_t seed);

// Merges machine-generated vectors into the records: dimension k becomes
// property "shape_concept_<k+1>". Records without a row stay unmeasured.
// Throws SchemaError for unknown instance ids or a dimension mismatch.
std::vector<InstanceRecord> load_machine_properties(
    std::vector<InstanceRecord> records, const MachinePropertyFile& file,
    int expected_dim);

}  // namespace ersatz
