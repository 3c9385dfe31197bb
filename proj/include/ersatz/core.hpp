#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ersatz {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct UnknownClassError : Error {
    using Error::Error;
};
struct VersionMismatchError : Error {
    using Error::Error;
};
struct ChecksumError : Error {
    using Error::Error;
};

// Raised when a property has fewer distinct values than the requested number
// of clusters. Carries the distinct count so the caller can retry.
struct DegeneratePropertyError : Error {
    int distinct_count;
    explicit DegeneratePropertyError(int distinct)
        : Error("fewer distinct values (" + std::to_string(distinct) +
                ") than requested clusters"),
          distinct_count(distinct) {}
};

// ---------------------------------------------------------------------------
// Hashing (checksums and per-draw RNG stream seeding)
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::uint64_t value, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (i * 8)) & 0xFFu;
        h *= kFnvPrime;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Properties and qualities
// ---------------------------------------------------------------------------

enum class PropertyKind { Physical, Functional };
enum class PropertySource { HumanGenerated, MachineGenerated };

struct PropertyDef {
    std::string label;
    PropertyKind kind = PropertyKind::Physical;
    PropertySource source = PropertySource::HumanGenerated;

    bool operator==(const PropertyDef&) const = default;
    bool operator<(const PropertyDef& o) const { return label < o.label; }
};

// The default inventory of functional properties. A manifest may override it.
inline const std::vector<std::string>& default_functional_properties() {
    static const std::vector<std::string> v = {"blockage", "containment",
                                               "support"};
    return v;
}

// One qualitative measure of a property: cluster `cluster_index` of the
// property's sub-categorization. Indices are 0-based internally and rendered
// 1-based ("size_1".."size_4").
struct QualityLabel {
    std::string property;
    int cluster_index = 0;

    std::string rendered() const {
        return property + "_" + std::to_string(cluster_index + 1);
    }

    bool operator==(const QualityLabel&) const = default;
    bool operator<(const QualityLabel& o) const {
        if (property != o.property) return property < o.property;
        return cluster_index < o.cluster_index;
    }
};

// Inverse of QualityLabel::rendered(). Splits at the last underscore; the
// suffix is the 1-based cluster number, so the mapping is unambiguous even
// when property labels themselves contain digits ("shape_concept_1").
QualityLabel parse_quality(const std::string& rendered);

using QualitySet = std::set<QualityLabel>;

std::string to_string(const QualitySet& qs);

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

struct ClassInfo {
    std::string label;
    int instance_count = 0;

    bool operator==(const ClassInfo&) const = default;
};

// Raw per-instance measurements. A missing property key encodes
// "not measured"; NaN/inf are rejected at ingestion.
struct InstanceRecord {
    std::string instance_id;
    std::string class_label;
    std::map<std::string, double> measurements;

    bool operator==(const InstanceRecord&) const = default;
};

// The qualities attributed to one instance: at most one per property.
struct HoldsSet {
    std::string instance_id;
    QualitySet qualities;

    bool operator==(const HoldsSet&) const = default;
};

// ---------------------------------------------------------------------------
// Conceptual knowledge
// ---------------------------------------------------------------------------

// Fuzzy knowledge about an object class: for each observed quality t, the
// proportion m of the class's instances (measured on t's property) holding t.
// Zero-proportion qualities are omitted.
struct ClassConcept {
    std::string class_label;
    std::map<QualityLabel, double> entries;
    int instance_count = 0;

    bool operator==(const ClassConcept&) const = default;
};

// Co-occurrence knowledge for one functional quality f: for each physical
// quality p, the proportion d of f-holding instances (measured on p's
// property) that also hold p.
struct FunctionModel {
    QualityLabel functional_quality;
    std::map<QualityLabel, double> entries;
    int support_count = 0;

    bool operator==(const FunctionModel&) const = default;
};

enum class RepresentativeKind {
    PhysicalOfClass,
    FunctionalOfClass,
    PhysicalOfFunction
};

// Qualities of a class concept or function model whose proportion meets the
// threshold theta used at construction.
struct RepresentativeModel {
    std::string owner;  // class label, or rendered functional quality
    RepresentativeKind kind = RepresentativeKind::PhysicalOfClass;
    QualitySet qualities;
    double theta = 0.0;

    bool operator==(const RepresentativeModel&) const = default;
};

// Cached reasoning output for one missing tool at one (theta, phi) setting.
struct SubstitutionModel {
    std::string missing_tool;
    double theta = 0.0;
    double phi = 0.0;
    QualitySet relevant_physical;    // O_P'
    QualitySet relevant_functional;  // O_F'
    std::map<std::string, double> positive_substitutes;
    std::map<std::string, double> negative_substitutes;

    bool operator==(const SubstitutionModel&) const = default;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ReasonerConfig {
    int eta = 4;
    double theta = 0.35;
    double phi = 0.35;
    std::uint64_t rng_seed = 42;

    bool operator==(const ReasonerConfig&) const = default;
};

// Throws DomainError unless eta >= 2, theta in (0,1], phi in [0,1).
void check_config(const ReasonerConfig& config);

inline bool is_finite(double v) { return std::isfinite(v); }

}  // namespace ersatz
